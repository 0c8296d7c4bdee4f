#include "juris/kb.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "juris/digest.hpp"
#include "juris/errors.hpp"

namespace fs = std::filesystem;

namespace juris {

namespace {

constexpr int kIndexFormatVersion = 1;

template <typename Entry>
Kb<Entry> load_jsonl_kb(const std::string& path,
                        const std::string& (*id_of)(const Entry&)) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open KB file: " + path);
  Kb<Entry> kb;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Entry entry;
    try {
      entry = Json::parse(line).get<Entry>();
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string& id = id_of(entry);
    if (!kb.index_of.emplace(id, kb.entries.size()).second) {
      throw ValidationError("duplicate id " + id + " in " + path + ":" +
                            std::to_string(line_no));
    }
    kb.entries.push_back(std::move(entry));
  }
  return kb;
}

const std::string& law_id(const LawArticle& a) { return a.article_id; }
const std::string& charge_id_of(const ChargeDef& c) { return c.charge_id; }
const std::string& precedent_id_of(const Precedent& p) { return p.precedent_id; }

}  // namespace

void to_json(Json& j, const LawArticle& a) {
  j = Json{{"article_id", a.article_id}, {"title", a.title}, {"body", a.body}};
}

void from_json(const Json& j, LawArticle& a) {
  j.at("article_id").get_to(a.article_id);
  j.at("title").get_to(a.title);
  j.at("body").get_to(a.body);
  if (a.body.empty()) {
    throw ValidationError("law article " + a.article_id + " has empty body");
  }
}

void to_json(Json& j, const ChargeDef& c) {
  j = Json{{"charge_id", c.charge_id},
           {"name", c.name},
           {"definition", c.definition},
           {"base_sentence_months", c.base_sentence_months}};
}

void from_json(const Json& j, ChargeDef& c) {
  j.at("charge_id").get_to(c.charge_id);
  j.at("name").get_to(c.name);
  j.at("definition").get_to(c.definition);
  j.at("base_sentence_months").get_to(c.base_sentence_months);
  if (c.base_sentence_months < 0) {
    throw ValidationError("charge " + c.charge_id + " has negative base sentence");
  }
}

void to_json(Json& j, const Precedent& p) {
  j = Json{{"precedent_id", p.precedent_id},
           {"fact", p.fact_text},
           {"charges", p.charges},
           {"articles", p.articles},
           {"penalty", p.penalty}};
}

void from_json(const Json& j, Precedent& p) {
  j.at("precedent_id").get_to(p.precedent_id);
  j.at("fact").get_to(p.fact_text);
  j.at("charges").get_to(p.charges);
  j.at("articles").get_to(p.articles);
  j.at("penalty").get_to(p.penalty);
  if (p.fact_text.empty()) {
    throw ValidationError("precedent " + p.precedent_id + " has empty fact text");
  }
}

LawKb load_law_kb(const std::string& path) {
  return load_jsonl_kb<LawArticle>(path, law_id);
}

ChargeKb load_charge_kb(const std::string& path) {
  return load_jsonl_kb<ChargeDef>(path, charge_id_of);
}

PrecedentKb load_precedent_kb(const std::string& path) {
  return load_jsonl_kb<Precedent>(path, precedent_id_of);
}

KbBundle load_kb(const std::string& law_path, const std::string& charge_path,
                 const std::string& precedent_path) {
  KbBundle kb;
  kb.laws = load_law_kb(law_path);
  kb.charges = load_charge_kb(charge_path);
  kb.precedents = load_precedent_kb(precedent_path);
  return kb;
}

// ---------------------------------------------------------------------------
// Index building
// ---------------------------------------------------------------------------

namespace {

DenseIndex build_dense(const std::vector<std::string>& ids,
                       const std::vector<std::string>& texts,
                       const BatchEmbedFn& embed) {
  DenseIndex index;
  if (ids.empty()) return index;
  std::vector<Embedding> vecs;
  try {
    vecs = embed(texts);
  } catch (const std::exception& e) {
    throw Error("embedding failed while indexing " + ids[0] + "..: " + e.what());
  }
  if (vecs.size() != ids.size()) {
    throw Error("embedder returned " + std::to_string(vecs.size()) +
                " vectors for " + std::to_string(ids.size()) + " texts");
  }
  const Eigen::Index dim = vecs[0].size();
  index.vectors.resize(static_cast<Eigen::Index>(ids.size()), dim);
  index.ids = ids;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (vecs[i].size() != dim) {
      throw Error("indexing " + ids[i] + ": dimension mismatch");
    }
    const double norm = vecs[i].cast<double>().norm();
    if (norm == 0.0) throw Error("indexing " + ids[i] + ": zero vector");
    index.vectors.row(static_cast<Eigen::Index>(i)) =
        (vecs[i].cast<double>() / norm).cast<float>();
    if (!index.ordinal_of.emplace(ids[i], static_cast<Eigen::Index>(i)).second) {
      throw ValidationError("indexing " + ids[i] + ": duplicate id");
    }
  }
  return index;
}

}  // namespace

IndexedKb build_indexes(KbBundle kb, const BatchEmbedFn& embed) {
  IndexedKb idx;

  std::vector<std::string> ids, texts;
  for (const auto& a : kb.laws.entries) {
    ids.push_back(a.article_id);
    texts.push_back(a.body);
  }
  idx.law_index = build_dense(ids, texts, embed);

  ids.clear();
  texts.clear();
  for (const auto& c : kb.charges.entries) {
    ids.push_back(c.charge_id);
    texts.push_back(c.definition);
  }
  idx.charge_index = build_dense(ids, texts, embed);

  ids.clear();
  texts.clear();
  std::vector<TokenStream> docs;
  for (const auto& p : kb.precedents.entries) {
    ids.push_back(p.precedent_id);
    texts.push_back(p.fact_text);
    docs.push_back(tokenize(p.fact_text));
  }
  idx.precedent_index = build_dense(ids, texts, embed);
  idx.precedent_bm25 = build_bm25_stats(ids, docs);

  idx.dim = idx.law_index.size() > 0     ? idx.law_index.dim()
            : idx.charge_index.size() > 0 ? idx.charge_index.dim()
            : idx.precedent_index.size() > 0
                ? idx.precedent_index.dim()
                : 0;
  idx.kb = std::move(kb);
  return idx;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

const char* kHeaderFile = "header.json";

struct IndexFile {
  const char* vectors;
  const char* ids;
};

constexpr IndexFile kLawFiles{"law_vectors.f32", "law_ids.json"};
constexpr IndexFile kChargeFiles{"charge_vectors.f32", "charge_ids.json"};
constexpr IndexFile kPrecedentFiles{"precedent_vectors.f32", "precedent_ids.json"};

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

std::string matrix_bytes(const DenseIndex& index) {
  // row-major little-endian float32
  std::string buf;
  buf.resize(static_cast<size_t>(index.vectors.size()) * sizeof(float));
  if (!buf.empty()) {
    std::memcpy(buf.data(), index.vectors.data(), buf.size());
  }
  return buf;
}

void write_dense(const DenseIndex& index, const fs::path& dir,
                 const IndexFile& files) {
  write_file(dir / files.vectors, matrix_bytes(index));
  write_file(dir / files.ids, Json(index.ids).dump());
}

DenseIndex read_dense(const fs::path& dir, const IndexFile& files, int dim) {
  DenseIndex index;
  const std::string ids_json = read_file(dir / files.ids);
  std::vector<std::string> ids = Json::parse(ids_json).get<std::vector<std::string>>();
  const std::string bytes = read_file(dir / files.vectors);
  const size_t expected = ids.size() * static_cast<size_t>(dim) * sizeof(float);
  if (bytes.size() != expected) {
    throw IoError(std::string(files.vectors) + ": size mismatch, expected " +
                  std::to_string(expected) + " bytes, got " +
                  std::to_string(bytes.size()));
  }
  index.ids = std::move(ids);
  index.vectors.resize(static_cast<Eigen::Index>(index.ids.size()), dim);
  if (!bytes.empty()) {
    std::memcpy(index.vectors.data(), bytes.data(), bytes.size());
  }
  for (size_t i = 0; i < index.ids.size(); ++i) {
    if (!index.ordinal_of.emplace(index.ids[i], static_cast<Eigen::Index>(i)).second) {
      throw ValidationError("persisted index: duplicate id " + index.ids[i]);
    }
  }
  return index;
}

Json bm25_to_json(const Bm25Stats& stats) {
  Json doc_tf = Json::array();
  for (const auto& tf : stats.doc_tf) doc_tf.push_back(tf);
  return Json{{"ids", stats.ids},
              {"doc_tf", doc_tf},
              {"doc_len", stats.doc_len},
              {"doc_freq", stats.doc_freq},
              {"avg_len", stats.avg_len}};
}

Bm25Stats bm25_from_json(const Json& j) {
  Bm25Stats stats;
  j.at("ids").get_to(stats.ids);
  for (const auto& tf : j.at("doc_tf")) {
    stats.doc_tf.push_back(tf.get<std::unordered_map<std::string, int>>());
  }
  j.at("doc_len").get_to(stats.doc_len);
  j.at("doc_freq").get_to(stats.doc_freq);
  j.at("avg_len").get_to(stats.avg_len);
  for (size_t i = 0; i < stats.ids.size(); ++i) {
    stats.ordinal_of.emplace(stats.ids[i], static_cast<int>(i));
  }
  return stats;
}

std::string kb_to_jsonl(const LawKb& kb) {
  std::string out;
  for (const auto& e : kb.entries) out += Json(e).dump() + "\n";
  return out;
}
std::string kb_to_jsonl(const ChargeKb& kb) {
  std::string out;
  for (const auto& e : kb.entries) out += Json(e).dump() + "\n";
  return out;
}
std::string kb_to_jsonl(const PrecedentKb& kb) {
  std::string out;
  for (const auto& e : kb.entries) out += Json(e).dump() + "\n";
  return out;
}

}  // namespace

bool index_exists(const std::string& dir) {
  return fs::exists(fs::path(dir) / kHeaderFile);
}

void persist_index(const IndexedKb& idx, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create index directory " + dir + ": " + ec.message());

  write_dense(idx.law_index, root, kLawFiles);
  write_dense(idx.charge_index, root, kChargeFiles);
  write_dense(idx.precedent_index, root, kPrecedentFiles);
  write_file(root / "bm25_stats.json", bm25_to_json(idx.precedent_bm25).dump(2));
  write_file(root / "laws.jsonl", kb_to_jsonl(idx.kb.laws));
  write_file(root / "charges.jsonl", kb_to_jsonl(idx.kb.charges));
  write_file(root / "precedents.jsonl", kb_to_jsonl(idx.kb.precedents));

  Json checksums = Json::object();
  for (const char* name :
       {kLawFiles.vectors, kLawFiles.ids, kChargeFiles.vectors, kChargeFiles.ids,
        kPrecedentFiles.vectors, kPrecedentFiles.ids, "bm25_stats.json",
        "laws.jsonl", "charges.jsonl", "precedents.jsonl"}) {
    checksums[name] = sha256_file((root / name).string());
  }
  Json header{{"format_version", kIndexFormatVersion},
              {"dim", idx.dim},
              {"counts",
               {{"laws", idx.kb.laws.size()},
                {"charges", idx.kb.charges.size()},
                {"precedents", idx.kb.precedents.size()}}},
              {"checksums", checksums}};
  write_file(root / kHeaderFile, header.dump(2));
}

IndexedKb load_index(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::exists(root / kHeaderFile)) {
    throw IoError("index not found in " + dir);
  }
  Json header;
  try {
    header = Json::parse(read_file(root / kHeaderFile));
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad index header: ") + e.what());
  }
  const int version = header.at("format_version").get<int>();
  if (version != kIndexFormatVersion) {
    throw IoError("incompatible index format version " + std::to_string(version) +
                  " (expected " + std::to_string(kIndexFormatVersion) + ")");
  }
  for (const auto& [name, expected] : header.at("checksums").items()) {
    const std::string actual = sha256_file((root / name).string());
    if (actual != expected.get<std::string>()) {
      throw IoError("checksum mismatch for " + name + " in " + dir);
    }
  }

  IndexedKb idx;
  idx.dim = header.at("dim").get<int>();
  idx.law_index = read_dense(root, kLawFiles, idx.dim);
  idx.charge_index = read_dense(root, kChargeFiles, idx.dim);
  idx.precedent_index = read_dense(root, kPrecedentFiles, idx.dim);
  idx.precedent_bm25 = bm25_from_json(Json::parse(read_file(root / "bm25_stats.json")));
  idx.kb = load_kb((root / "laws.jsonl").string(), (root / "charges.jsonl").string(),
                   (root / "precedents.jsonl").string());

  if (idx.law_index.ids.size() != idx.kb.laws.size() ||
      idx.charge_index.ids.size() != idx.kb.charges.size() ||
      idx.precedent_index.ids.size() != idx.kb.precedents.size()) {
    throw ValidationError("persisted index cardinality does not match KB");
  }
  return idx;
}

}  // namespace juris
