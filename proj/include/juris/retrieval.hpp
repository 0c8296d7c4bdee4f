#pragma once

#include <Eigen/Dense>

#include <string>
#include <unordered_map>
#include <vector>

#include "juris/domain.hpp"
#include "juris/embedding.hpp"

namespace juris {

struct IndexedKb;  // kb.hpp

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

// Ordered token list; tokens are never empty strings.
struct TokenStream {
  std::vector<std::string> tokens;

  bool empty() const { return tokens.empty(); }
  size_t size() const { return tokens.size(); }
};

// Han-script runs emit overlapping character bigrams (a lone Han character
// emits itself); other scripts emit lowercased words delimited by whitespace
// and punctuation, with digit runs kept as separate whole tokens.
TokenStream tokenize(const std::string& text);

// ---------------------------------------------------------------------------
// Similarity primitives
// ---------------------------------------------------------------------------

// <u,v> / (|u||v|), computed in double. Throws ValidationError on dimension
// mismatch or a zero vector.
double cosine_sim(const Eigen::VectorXf& u, const Eigen::VectorXf& v);

// Cosine mapped onto [0,1]: (cos + 1) / 2.
double normalized_cosine(const Eigen::VectorXf& u, const Eigen::VectorXf& v);

// ---------------------------------------------------------------------------
// BM25 (Okapi)
// ---------------------------------------------------------------------------

// Corpus statistics for BM25: per-document term frequencies and lengths,
// document frequencies, and the average document length.
struct Bm25Stats {
  std::vector<std::string> ids;  // ordinal -> doc id
  std::unordered_map<std::string, int> ordinal_of;
  std::vector<std::unordered_map<std::string, int>> doc_tf;
  std::vector<int> doc_len;
  std::unordered_map<std::string, int> doc_freq;
  double avg_len = 0.0;

  int num_docs() const { return static_cast<int>(ids.size()); }
};

Bm25Stats build_bm25_stats(const std::vector<std::string>& ids,
                           const std::vector<TokenStream>& docs);

// Okapi BM25 with IDF = ln((N - df + 0.5) / (df + 0.5) + 1), summed over the
// query tokens (duplicates count once per occurrence). Throws on unknown
// doc_id; requires k1 > 0 and b in [0,1].
double bm25_score(const TokenStream& query, const std::string& doc_id,
                  const Bm25Stats& stats, double k1, double b);

// BM25 against every document, by ordinal.
std::vector<double> bm25_scores_all(const TokenStream& query,
                                    const Bm25Stats& stats, double k1, double b);

// ---------------------------------------------------------------------------
// Flat dense index
// ---------------------------------------------------------------------------

// Exact flat cosine index: one unit-norm float32 row per document.
struct DenseIndex {
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> vectors;
  std::vector<std::string> ids;
  std::unordered_map<std::string, Eigen::Index> ordinal_of;

  Eigen::Index size() const { return vectors.rows(); }
  int dim() const { return static_cast<int>(vectors.cols()); }

  // Appends a vector, normalizing it to unit norm. Throws ValidationError on
  // a zero vector, duplicate id, or dimension mismatch.
  void add(const std::string& id, const Embedding& v);

  const Embedding row(Eigen::Index i) const { return vectors.row(i); }
};

// min(k, index size) hits sorted by cosine descending, ties broken by
// ascending doc_id. Empty index yields an empty list; k < 1 is an error.
std::vector<ScoredHit> top_k_dense(const Embedding& query, const DenseIndex& index,
                                   int k);

// ---------------------------------------------------------------------------
// Hybrid sparse/dense fusion
// ---------------------------------------------------------------------------

// alpha * BM25_norm + (1 - alpha) * cosine, where BM25_norm is min-max
// normalized over the whole candidate set (a constant-BM25 set normalizes
// to 0). Throws on unknown doc_id.
double hybrid_score(const TokenStream& query_tokens, const Embedding& query_vec,
                    const std::string& doc_id, const Bm25Stats& stats,
                    const DenseIndex& index, double alpha, double k1, double b);

// Full hybrid ranking, top k, ties by ascending doc_id.
std::vector<ScoredHit> hybrid_top_k(const TokenStream& query_tokens,
                                    const Embedding& query_vec,
                                    const Bm25Stats& stats, const DenseIndex& index,
                                    double alpha, double k1, double b, int k);

// ---------------------------------------------------------------------------
// Bundle assembly (Stage II)
// ---------------------------------------------------------------------------

struct RetrievalParams {
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
};

// Dense top-k over laws and charges, hybrid top-k over precedents, and the
// concatenated case information document (law -> charge -> precedent, with
// section headers and per-entry id prefixes).
RetrievalBundle retrieve_bundle(const CaseSummary& summary, const IndexedKb& idx,
                                const Hyperparameters& h, const EmbedFn& embed,
                                const RetrievalParams& params = {});

}  // namespace juris
