#include "juris/gateway.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "juris/retrieval.hpp"

namespace fs = std::filesystem;

namespace juris {

// ---------------------------------------------------------------------------
// Hashed bag-of-tokens embedding (mock profile)
// ---------------------------------------------------------------------------

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Embedding hashed_embedding(const std::string& text) {
  const TokenStream tokens = tokenize(text);
  if (tokens.empty()) {
    throw ValidationError("cannot embed text with no tokens");
  }
  Embedding v = Embedding::Zero(kMockEmbeddingDim);
  for (const auto& tok : tokens.tokens) {
    v[static_cast<Eigen::Index>(fnv1a64(tok) % kMockEmbeddingDim)] += 1.0f;
  }
  const double norm = v.cast<double>().norm();
  return (v.cast<double>() / norm).cast<float>();
}

// ---------------------------------------------------------------------------
// MockBackend
// ---------------------------------------------------------------------------

MockBackend::MockBackend(std::string fixtures_dir) : dir_(std::move(fixtures_dir)) {
  if (dir_.empty()) {
    throw ConfigError("mock profile requires a fixture directory");
  }
}

ChatResult MockBackend::chat(const ChatRequest& req) {
  if (!req.attachments.empty()) {
    throw ValidationError("attachments are not supported");
  }
  for (const char* ext : {".json", ".txt"}) {
    const fs::path path = fs::path(dir_) / (req.role_tag + ext);
    std::ifstream in(path, std::ios::binary);
    if (!in) continue;
    std::string body((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return {std::move(body), 0};
  }
  throw FixtureMissError(req.role_tag);
}

std::vector<Embedding> MockBackend::embed(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hashed_embedding(t));
  return out;
}

// ---------------------------------------------------------------------------
// LiveBackend
// ---------------------------------------------------------------------------

LiveOptions LiveOptions::from_env() {
  auto get = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  LiveOptions opts;
  opts.base_url = get("JURIS_API_BASE");
  opts.api_key = get("JURIS_API_KEY");
  opts.model = get("JURIS_MODEL");
  opts.embed_model = get("JURIS_EMBED_MODEL");
  if (opts.base_url.empty()) {
    throw ConfigError("live profile requires JURIS_API_BASE");
  }
  if (opts.api_key.empty()) {
    throw ConfigError("live profile requires JURIS_API_KEY");
  }
  if (opts.model.empty()) opts.model = "gpt-4o";
  if (opts.embed_model.empty()) opts.embed_model = "text-embedding-3-small";
  opts.jitter_seed = static_cast<unsigned>(
      std::chrono::steady_clock::now().time_since_epoch().count());
  return opts;
}

struct LiveBackend::Impl {
  LiveOptions opts;
  std::atomic<int> inflight{0};
  std::mutex rng_mutex;
  std::mt19937 rng;
  std::atomic<int> embed_dim{0};
  static thread_local int last_attempts;

  explicit Impl(LiveOptions o) : opts(std::move(o)), rng(opts.jitter_seed) {}

  // Bounded in-flight slot, released on destruction.
  struct Slot {
    std::atomic<int>& counter;
    explicit Slot(Impl& impl) : counter(impl.inflight) {
      int cur = counter.load();
      while (true) {
        if (cur < impl.opts.max_inflight) {
          if (counter.compare_exchange_weak(cur, cur + 1)) break;
        } else {
          std::this_thread::sleep_for(std::chrono::milliseconds(5));
          cur = counter.load();
        }
      }
    }
    ~Slot() { counter.fetch_sub(1); }
  };

  int jitter_ms(int bound) {
    std::lock_guard<std::mutex> lock(rng_mutex);
    return static_cast<int>(rng() % static_cast<unsigned>(std::max(1, bound)));
  }

  static bool transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
  }

  // POSTs JSON with retries; returns the response body.
  std::string post_json(const std::string& path, const std::string& body) {
    Slot slot(*this);
    std::string last_error;
    for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
      last_attempts = attempt;
      httplib::Client client(opts.base_url);
      client.set_connection_timeout(opts.timeout_s, 0);
      client.set_read_timeout(opts.timeout_s, 0);
      client.set_bearer_token_auth(opts.api_key);
      auto res = client.Post(path, body, "application/json");
      if (res && res->status == 200) return res->body;
      if (res && !transient_status(res->status)) {
        throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                             path + ": " + res->body.substr(0, 512));
      }
      last_error = res ? "HTTP " + std::to_string(res->status)
                       : "transport: " + httplib::to_string(res.error());
      if (attempt < opts.max_attempts) {
        const int backoff = opts.retry_base_ms * (1 << (attempt - 1));
        std::this_thread::sleep_for(
            std::chrono::milliseconds(backoff + jitter_ms(opts.retry_base_ms / 2)));
      }
    }
    throw TransportError("exhausted " + std::to_string(opts.max_attempts) +
                         " attempts on " + path + " (" + last_error + ")");
  }
};

thread_local int LiveBackend::Impl::last_attempts = 0;

LiveBackend::LiveBackend(LiveOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {
  if (impl_->opts.base_url.empty()) {
    throw ConfigError("live profile requires an endpoint URL");
  }
  if (impl_->opts.api_key.empty()) {
    throw ConfigError("live profile requires an API key");
  }
}

LiveBackend::~LiveBackend() = default;

int LiveBackend::last_attempts() const { return Impl::last_attempts; }

ChatResult LiveBackend::chat(const ChatRequest& req) {
  if (!req.attachments.empty()) {
    throw ValidationError("attachments are not supported");
  }
  Json body{{"model", impl_->opts.model},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens},
            {"messages", Json::array({Json{{"role", "system"}, {"content", req.system_text}},
                                      Json{{"role", "user"}, {"content", req.user_text}}})}};
  const std::string resp = impl_->post_json("/v1/chat/completions", body.dump());
  Json parsed;
  try {
    parsed = Json::parse(resp);
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad chat response: ") + e.what());
  }
  ChatResult out;
  try {
    out.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const std::exception&) {
    throw ParseError("chat response missing choices[0].message.content");
  }
  if (parsed.contains("usage") && parsed["usage"].contains("total_tokens")) {
    out.tokens = parsed["usage"]["total_tokens"].get<long long>();
  }
  return out;
}

std::vector<Embedding> LiveBackend::embed(const std::vector<std::string>& texts) {
  for (const auto& t : texts) {
    if (t.empty()) throw ValidationError("cannot embed empty text");
  }
  Json body{{"model", impl_->opts.embed_model}, {"input", texts}};
  const std::string resp = impl_->post_json("/v1/embeddings", body.dump());
  Json parsed;
  try {
    parsed = Json::parse(resp);
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad embeddings response: ") + e.what());
  }
  std::vector<Embedding> out;
  int dim = impl_->embed_dim.load();
  for (const auto& item : parsed.at("data")) {
    const auto values = item.at("embedding").get<std::vector<float>>();
    if (dim == 0) {
      dim = static_cast<int>(values.size());
      impl_->embed_dim.store(dim);
    }
    if (static_cast<int>(values.size()) != dim) {
      throw ValidationError("dimension mismatch across embedding batch");
    }
    Embedding v = Eigen::Map<const Embedding>(values.data(),
                                              static_cast<Eigen::Index>(values.size()));
    const double norm = v.cast<double>().norm();
    if (norm == 0.0) throw ValidationError("embedding endpoint returned zero vector");
    out.push_back((v.cast<double>() / norm).cast<float>());
  }
  if (out.size() != texts.size()) {
    throw ParseError("embedding endpoint returned wrong item count");
  }
  return out;
}

int LiveBackend::embedding_dim() const { return impl_->embed_dim.load(); }

// ---------------------------------------------------------------------------
// Embedder adapters
// ---------------------------------------------------------------------------

BatchEmbedFn batch_embedder(Backend& backend) {
  return [&backend](const std::vector<std::string>& texts) {
    return backend.embed(texts);
  };
}

EmbedFn embedder(Backend& backend) {
  return [&backend](const std::string& text) {
    return backend.embed({text}).at(0);
  };
}

}  // namespace juris
