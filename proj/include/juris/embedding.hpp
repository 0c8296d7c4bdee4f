#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace juris {

// Embeddings are stored as float32 (the on-disk index format); score math is
// carried out in double.
using Embedding = Eigen::VectorXf;

// Single-text embedding hook handed to scoring and retrieval code. Throws on
// failure (zero vector, backend error); callers apply their own policy.
using EmbedFn = std::function<Embedding(const std::string&)>;

// Batch form used when building indexes.
using BatchEmbedFn =
    std::function<std::vector<Embedding>(const std::vector<std::string>&)>;

}  // namespace juris
