#include "juris/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "juris/errors.hpp"
#include "juris/kb.hpp"

namespace juris {

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

namespace {

// Decodes one UTF-8 codepoint starting at s[i]; advances i. Invalid bytes
// decode as U+FFFD and consume one byte.
uint32_t next_codepoint(const std::string& s, size_t& i) {
  unsigned char c = s[i];
  if (c < 0x80) {
    ++i;
    return c;
  }
  int extra;
  uint32_t cp;
  if ((c & 0xE0) == 0xC0) {
    extra = 1;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    extra = 2;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    extra = 3;
    cp = c & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + static_cast<size_t>(extra) >= s.size()) {
    // truncated sequence
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    unsigned char cc = s[i + k];
    if ((cc & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  i += extra + 1;
  return cp;
}

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_han(uint32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||  // CJK unified
         (cp >= 0x3400 && cp <= 0x4DBF) ||  // extension A
         (cp >= 0xF900 && cp <= 0xFAFF);    // compatibility ideographs
}

// CJK punctuation and fullwidth forms act as delimiters.
bool is_wide_punct(uint32_t cp) {
  return (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFF00 && cp <= 0xFFEF) ||
         (cp >= 0x2000 && cp <= 0x206F);
}

enum class CharClass { Delim, Letter, Digit, Han };

CharClass classify(uint32_t cp) {
  if (cp < 0x80) {
    if (std::isdigit(static_cast<int>(cp))) return CharClass::Digit;
    if (std::isalpha(static_cast<int>(cp))) return CharClass::Letter;
    return CharClass::Delim;
  }
  if (is_han(cp)) return CharClass::Han;
  if (is_wide_punct(cp) || cp == 0xFFFD) return CharClass::Delim;
  return CharClass::Letter;  // other scripts tokenize as words
}

}  // namespace

TokenStream tokenize(const std::string& text) {
  TokenStream out;
  std::string word;                 // pending letter/digit run
  std::vector<std::string> han;     // pending Han run, one char per element

  auto flush_word = [&] {
    if (!word.empty()) {
      out.tokens.push_back(word);
      word.clear();
    }
  };
  auto flush_han = [&] {
    if (han.empty()) return;
    if (han.size() == 1) {
      out.tokens.push_back(han[0]);
    } else {
      for (size_t i = 0; i + 1 < han.size(); ++i) {
        out.tokens.push_back(han[i] + han[i + 1]);
      }
    }
    han.clear();
  };

  CharClass prev = CharClass::Delim;
  size_t i = 0;
  while (i < text.size()) {
    uint32_t cp = next_codepoint(text, i);
    CharClass cls = classify(cp);
    if (cls != CharClass::Han) flush_han();
    switch (cls) {
      case CharClass::Delim:
        flush_word();
        break;
      case CharClass::Letter:
      case CharClass::Digit:
        // digit runs split from letter runs
        if (prev != cls) flush_word();
        if (cp < 0x80) {
          word.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
        } else {
          append_utf8(word, cp);
        }
        break;
      case CharClass::Han: {
        flush_word();
        std::string ch;
        append_utf8(ch, cp);
        han.push_back(std::move(ch));
        break;
      }
    }
    prev = cls;
  }
  flush_word();
  flush_han();
  return out;
}

// ---------------------------------------------------------------------------
// Similarity primitives
// ---------------------------------------------------------------------------

double cosine_sim(const Eigen::VectorXf& u, const Eigen::VectorXf& v) {
  if (u.size() != v.size()) {
    throw ValidationError("cosine_sim: dimension mismatch " +
                          std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
  }
  const Eigen::VectorXd ud = u.cast<double>();
  const Eigen::VectorXd vd = v.cast<double>();
  const double nu = ud.norm();
  const double nv = vd.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw ValidationError("cosine_sim: zero vector");
  }
  return ud.dot(vd) / (nu * nv);
}

double normalized_cosine(const Eigen::VectorXf& u, const Eigen::VectorXf& v) {
  return (cosine_sim(u, v) + 1.0) / 2.0;
}

// ---------------------------------------------------------------------------
// BM25
// ---------------------------------------------------------------------------

Bm25Stats build_bm25_stats(const std::vector<std::string>& ids,
                           const std::vector<TokenStream>& docs) {
  if (ids.size() != docs.size()) {
    throw ValidationError("bm25 stats: ids/docs size mismatch");
  }
  Bm25Stats stats;
  stats.ids = ids;
  long long total_len = 0;
  for (size_t d = 0; d < docs.size(); ++d) {
    if (!stats.ordinal_of.emplace(ids[d], static_cast<int>(d)).second) {
      throw ValidationError("bm25 stats: duplicate doc id " + ids[d]);
    }
    std::unordered_map<std::string, int> tf;
    for (const auto& tok : docs[d].tokens) ++tf[tok];
    for (const auto& [term, _] : tf) ++stats.doc_freq[term];
    stats.doc_len.push_back(static_cast<int>(docs[d].size()));
    total_len += static_cast<long long>(docs[d].size());
    stats.doc_tf.push_back(std::move(tf));
  }
  stats.avg_len =
      docs.empty() ? 0.0 : static_cast<double>(total_len) / docs.size();
  return stats;
}

namespace {

double bm25_doc_score(const TokenStream& query, int ordinal, const Bm25Stats& stats,
                      double k1, double b) {
  const auto& tf = stats.doc_tf[ordinal];
  const double len = stats.doc_len[ordinal];
  const double n = stats.num_docs();
  double score = 0.0;
  for (const auto& term : query.tokens) {
    auto df_it = stats.doc_freq.find(term);
    if (df_it == stats.doc_freq.end()) continue;
    auto tf_it = tf.find(term);
    if (tf_it == tf.end()) continue;
    const double df = df_it->second;
    const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    const double f = tf_it->second;
    score += idf * (f * (k1 + 1.0)) /
             (f + k1 * (1.0 - b + b * len / stats.avg_len));
  }
  return score;
}

}  // namespace

double bm25_score(const TokenStream& query, const std::string& doc_id,
                  const Bm25Stats& stats, double k1, double b) {
  if (!(k1 > 0.0)) throw ValidationError("bm25: k1 must be > 0");
  if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("bm25: b out of [0,1]");
  auto it = stats.ordinal_of.find(doc_id);
  if (it == stats.ordinal_of.end()) {
    throw ValidationError("bm25: unknown doc id " + doc_id);
  }
  return bm25_doc_score(query, it->second, stats, k1, b);
}

std::vector<double> bm25_scores_all(const TokenStream& query,
                                    const Bm25Stats& stats, double k1, double b) {
  if (!(k1 > 0.0)) throw ValidationError("bm25: k1 must be > 0");
  if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("bm25: b out of [0,1]");
  std::vector<double> scores(stats.num_docs());
  for (int d = 0; d < stats.num_docs(); ++d) {
    scores[d] = bm25_doc_score(query, d, stats, k1, b);
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Dense index
// ---------------------------------------------------------------------------

void DenseIndex::add(const std::string& id, const Embedding& v) {
  if (size() > 0 && v.size() != vectors.cols()) {
    throw ValidationError("index add: dimension mismatch for " + id);
  }
  if (ordinal_of.count(id)) {
    throw ValidationError("index add: duplicate id " + id);
  }
  const double norm = v.cast<double>().norm();
  if (norm == 0.0) {
    throw ValidationError("index add: zero vector for " + id);
  }
  const Eigen::Index row = vectors.rows();
  vectors.conservativeResize(row + 1, v.size());
  vectors.row(row) = (v.cast<double>() / norm).cast<float>();
  ordinal_of.emplace(id, row);
  ids.push_back(id);
}

namespace {

void sort_hits(std::vector<ScoredHit>& hits) {
  std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
}

}  // namespace

std::vector<ScoredHit> top_k_dense(const Embedding& query, const DenseIndex& index,
                                   int k) {
  if (k < 1) throw ValidationError("top_k_dense: k must be >= 1");
  if (index.size() == 0) return {};
  std::vector<ScoredHit> hits;
  hits.reserve(static_cast<size_t>(index.size()));
  for (Eigen::Index i = 0; i < index.size(); ++i) {
    const Embedding row = index.vectors.row(i);
    hits.push_back({index.ids[static_cast<size_t>(i)], cosine_sim(query, row)});
  }
  sort_hits(hits);
  if (static_cast<int>(hits.size()) > k) hits.resize(static_cast<size_t>(k));
  return hits;
}

// ---------------------------------------------------------------------------
// Hybrid fusion
// ---------------------------------------------------------------------------

namespace {

std::vector<double> min_max_normalize(const std::vector<double>& raw) {
  std::vector<double> out(raw.size(), 0.0);
  if (raw.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi == lo) return out;  // constant candidate set -> all 0
  for (size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
  return out;
}

std::vector<ScoredHit> hybrid_all(const TokenStream& query_tokens,
                                  const Embedding& query_vec,
                                  const Bm25Stats& stats, const DenseIndex& index,
                                  double alpha, double k1, double b) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("hybrid: alpha out of [0,1]");
  }
  if (stats.num_docs() != static_cast<int>(index.size())) {
    throw ValidationError("hybrid: sparse/dense corpus size mismatch");
  }
  const std::vector<double> raw = bm25_scores_all(query_tokens, stats, k1, b);
  const std::vector<double> bm25_norm = min_max_normalize(raw);
  std::vector<ScoredHit> hits;
  hits.reserve(raw.size());
  for (int d = 0; d < stats.num_docs(); ++d) {
    const auto& id = stats.ids[static_cast<size_t>(d)];
    auto ord = index.ordinal_of.find(id);
    if (ord == index.ordinal_of.end()) {
      throw ValidationError("hybrid: doc " + id + " missing from dense index");
    }
    const Embedding row = index.vectors.row(ord->second);
    const double sim = cosine_sim(query_vec, row);
    hits.push_back({id, alpha * bm25_norm[static_cast<size_t>(d)] +
                            (1.0 - alpha) * sim});
  }
  return hits;
}

}  // namespace

double hybrid_score(const TokenStream& query_tokens, const Embedding& query_vec,
                    const std::string& doc_id, const Bm25Stats& stats,
                    const DenseIndex& index, double alpha, double k1, double b) {
  auto it = stats.ordinal_of.find(doc_id);
  if (it == stats.ordinal_of.end()) {
    throw ValidationError("hybrid: unknown doc id " + doc_id);
  }
  const auto hits = hybrid_all(query_tokens, query_vec, stats, index, alpha, k1, b);
  return hits[static_cast<size_t>(it->second)].score;
}

std::vector<ScoredHit> hybrid_top_k(const TokenStream& query_tokens,
                                    const Embedding& query_vec,
                                    const Bm25Stats& stats, const DenseIndex& index,
                                    double alpha, double k1, double b, int k) {
  if (k < 1) throw ValidationError("hybrid_top_k: k must be >= 1");
  if (stats.num_docs() == 0) return {};
  auto hits = hybrid_all(query_tokens, query_vec, stats, index, alpha, k1, b);
  sort_hits(hits);
  if (static_cast<int>(hits.size()) > k) hits.resize(static_cast<size_t>(k));
  return hits;
}

// ---------------------------------------------------------------------------
// Bundle assembly
// ---------------------------------------------------------------------------

RetrievalBundle retrieve_bundle(const CaseSummary& summary, const IndexedKb& idx,
                                const Hyperparameters& h, const EmbedFn& embed,
                                const RetrievalParams& params) {
  const Embedding query = embed(summary.summary_text);
  const TokenStream query_tokens = tokenize(summary.summary_text);

  RetrievalBundle bundle;
  if (idx.law_index.size() > 0) {
    bundle.law_hits = top_k_dense(query, idx.law_index, h.top_k);
  }
  if (idx.charge_index.size() > 0) {
    bundle.charge_hits = top_k_dense(query, idx.charge_index, h.top_k);
  }
  if (idx.precedent_index.size() > 0) {
    bundle.precedent_hits =
        hybrid_top_k(query_tokens, query, idx.precedent_bm25, idx.precedent_index,
                     h.alpha, params.bm25_k1, params.bm25_b, h.top_k);
  }

  std::ostringstream doc;
  doc << "== Relevant Law Articles ==\n";
  for (const auto& hit : bundle.law_hits) {
    const LawArticle* art = idx.kb.laws.find(hit.doc_id);
    doc << "[" << hit.doc_id << "] " << art->title << ": " << art->body << "\n";
  }
  doc << "== Candidate Charges ==\n";
  for (const auto& hit : bundle.charge_hits) {
    const ChargeDef* ch = idx.kb.charges.find(hit.doc_id);
    doc << "[" << hit.doc_id << "] " << ch->name << ": " << ch->definition << "\n";
  }
  doc << "== Similar Precedents ==\n";
  for (const auto& hit : bundle.precedent_hits) {
    const Precedent* p = idx.kb.precedents.find(hit.doc_id);
    doc << "[" << hit.doc_id << "] " << p->fact_text << " (charges:";
    for (const auto& c : p->charges) doc << " " << c;
    doc << "; penalty: ";
    if (p->penalty.kind == PenaltyKind::Months) {
      doc << p->penalty.months << " months";
    } else {
      doc << to_string(p->penalty.kind);
    }
    doc << ")\n";
  }
  bundle.concatenated_document = doc.str();
  return bundle;
}

}  // namespace juris
