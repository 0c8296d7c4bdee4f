#pragma once

#include <memory>
#include <string>
#include <vector>

#include "juris/embedding.hpp"
#include "juris/errors.hpp"

namespace juris {

// Requested by a mock profile when no fixture matches the key.
struct FixtureMissError : Error {
  explicit FixtureMissError(const std::string& key)
      : Error("fixture miss: " + key), key(key) {}
  std::string key;
};

// One chat turn. role_tag is "<Role>/<step>/<key>": it labels the call in
// transcripts and doubles as the mock fixture key.
struct ChatRequest {
  std::string role_tag;
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  int max_tokens = 2048;
  std::vector<std::string> attachments;  // reserved, rejected by both profiles
};

struct ChatResult {
  std::string text;
  long long tokens = 0;
};

// Uniform chat + embedding backend. Handles are shareable across concurrent
// trial workers.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResult chat(const ChatRequest& req) = 0;
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
  virtual int embedding_dim() const = 0;
  virtual std::string profile() const = 0;
};

// ---------------------------------------------------------------------------
// Mock profile
// ---------------------------------------------------------------------------

inline constexpr int kMockEmbeddingDim = 256;

// Deterministic hashed bag-of-tokens embedding: each token FNV-1a-hashed to
// one of 256 buckets, counts accumulated, vector unit-normalized. Throws
// ValidationError when the text yields no tokens.
Embedding hashed_embedding(const std::string& text);

// Fixture-driven backend: chat responses come verbatim from files named
// <dir>/<role_tag>.json or .txt; embeddings are hashed bag-of-tokens. Never
// touches the network. Read-only and lock-free after construction.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::string fixtures_dir);

  ChatResult chat(const ChatRequest& req) override;
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  int embedding_dim() const override { return kMockEmbeddingDim; }
  std::string profile() const override { return "mock"; }

 private:
  std::string dir_;
};

// ---------------------------------------------------------------------------
// Live profile
// ---------------------------------------------------------------------------

struct LiveOptions {
  std::string base_url;     // e.g. https://api.openai.com
  std::string api_key;
  std::string model;
  std::string embed_model;
  int max_inflight = 4;
  int max_attempts = 3;
  int retry_base_ms = 500;
  unsigned jitter_seed = 0;  // per-run seed for backoff jitter
  int timeout_s = 120;

  // Reads JURIS_API_BASE, JURIS_API_KEY, JURIS_MODEL, JURIS_EMBED_MODEL.
  // Missing endpoint or key -> ConfigError before any network activity.
  static LiveOptions from_env();
};

// OpenAI-compatible client: POST /v1/chat/completions and /v1/embeddings,
// bearer auth, bounded in-flight requests, retry with exponential backoff
// and jitter on transient failures (connect errors, 429, 5xx).
class LiveBackend : public Backend {
 public:
  explicit LiveBackend(LiveOptions options);
  ~LiveBackend() override;

  ChatResult chat(const ChatRequest& req) override;
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  int embedding_dim() const override;
  std::string profile() const override { return "live"; }

  // Attempts made by the most recent call on this thread (for tests/logs).
  int last_attempts() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Batch embedder backed by any Backend.
BatchEmbedFn batch_embedder(Backend& backend);

// Single-text embedder backed by any Backend.
EmbedFn embedder(Backend& backend);

}  // namespace juris
