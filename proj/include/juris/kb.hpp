#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "juris/domain.hpp"
#include "juris/embedding.hpp"
#include "juris/retrieval.hpp"

namespace juris {

// ---------------------------------------------------------------------------
// Knowledge base entries
// ---------------------------------------------------------------------------

struct LawArticle {
  std::string article_id;
  std::string title;
  std::string body;
};

struct ChargeDef {
  std::string charge_id;
  std::string name;
  std::string definition;
  int base_sentence_months = 0;  // statutory base sentence
};

struct Precedent {
  std::string precedent_id;
  std::string fact_text;
  std::set<std::string> charges;
  std::set<std::string> articles;
  PenaltyTerm penalty;
};

template <typename Entry>
struct Kb {
  std::vector<Entry> entries;
  std::unordered_map<std::string, size_t> index_of;

  size_t size() const { return entries.size(); }
  const Entry* find(const std::string& id) const {
    auto it = index_of.find(id);
    return it == index_of.end() ? nullptr : &entries[it->second];
  }
};

using LawKb = Kb<LawArticle>;
using ChargeKb = Kb<ChargeDef>;
using PrecedentKb = Kb<Precedent>;

struct KbBundle {
  LawKb laws;
  ChargeKb charges;
  PrecedentKb precedents;
};

// Loads the three line-delimited JSON knowledge bases. Duplicate ids are
// rejected naming the id; malformed lines report the file and line number.
KbBundle load_kb(const std::string& law_path, const std::string& charge_path,
                 const std::string& precedent_path);

LawKb load_law_kb(const std::string& path);
ChargeKb load_charge_kb(const std::string& path);
PrecedentKb load_precedent_kb(const std::string& path);

void to_json(Json& j, const LawArticle& a);
void from_json(const Json& j, LawArticle& a);
void to_json(Json& j, const ChargeDef& c);
void from_json(const Json& j, ChargeDef& c);
void to_json(Json& j, const Precedent& p);
void from_json(const Json& j, Precedent& p);

// ---------------------------------------------------------------------------
// Indexed knowledge bases
// ---------------------------------------------------------------------------

// The three KBs plus their derived indexes: exact flat cosine indexes over
// law bodies, charge definitions, and precedent facts, and BM25 corpus
// statistics over precedent facts. Immutable after build.
struct IndexedKb {
  KbBundle kb;
  DenseIndex law_index;
  DenseIndex charge_index;
  DenseIndex precedent_index;
  Bm25Stats precedent_bm25;
  int dim = 0;
};

// Embeds every entry once (unit-normalized) and computes BM25 stats.
// Embedder failures propagate tagged with the offending entry id.
IndexedKb build_indexes(KbBundle kb, const BatchEmbedFn& embed);

// Directory layout: a versioned header.json with per-file SHA-256 checksums,
// one raw little-endian float32 matrix per index, JSON id maps, JSON BM25
// stats, and copies of the three KB JSONL files.
void persist_index(const IndexedKb& idx, const std::string& dir);

// Loads a persisted index. Missing header -> "index not found"; version
// mismatch and checksum failures raise explicit errors.
IndexedKb load_index(const std::string& dir);

// True when `dir` already contains a persisted index header.
bool index_exists(const std::string& dir);

}  // namespace juris
