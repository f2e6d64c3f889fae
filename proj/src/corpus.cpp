#include "readability/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "readability/error.hpp"
#include "readability/rng.hpp"
#include "utf8.hpp"

namespace readability {

namespace {

std::string read_line_stripped(std::istream& in, bool& ok) {
  std::string line;
  ok = static_cast<bool>(std::getline(in, line));
  if (ok && !line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<int> observed_levels(const std::vector<Document>& docs) {
  std::set<int> s;
  for (const auto& d : docs) s.insert(d.level);
  return {s.begin(), s.end()};
}

} // namespace

std::vector<std::string> tokenize(const std::string& text, const TokenizePolicy&) {
  std::vector<std::string> tokens;
  const auto cps = utf8::decode(text);
  std::vector<std::uint32_t> current;
  auto flush = [&] {
    if (current.empty()) return;
    // strip leading/trailing punctuation after lowercasing
    std::size_t lo = 0, hi = current.size();
    while (lo < hi && utf8::is_strippable_punct(current[lo])) ++lo;
    while (hi > lo && utf8::is_strippable_punct(current[hi - 1])) --hi;
    if (hi > lo) {
      std::string tok;
      for (std::size_t i = lo; i < hi; ++i) utf8::encode(current[i], tok);
      tokens.push_back(std::move(tok));
    }
    current.clear();
  };
  for (const auto cp : cps) {
    if (utf8::is_space(cp)) {
      flush();
    } else {
      current.push_back(utf8::to_lower(cp));
    }
  }
  flush();
  return tokens;
}

LeveledCorpus load_corpus(const std::filesystem::path& path,
                          const std::optional<std::vector<int>>& expected_levels) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path.string());

  LeveledCorpus corpus;
  std::set<std::string> seen_ids;

  // Sidecar metadata: "<stem>.meta.json" next to the corpus file.
  std::optional<std::vector<int>> sidecar_levels;
  {
    auto meta_path = path;
    meta_path.replace_extension(".meta.json");
    std::ifstream meta(meta_path);
    if (meta) {
      nlohmann::json j;
      try {
        meta >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed sidecar " + meta_path.string() + ": " + e.what());
      }
      if (j.contains("levels")) sidecar_levels = j.at("levels").get<std::vector<int>>();
      if (j.contains("language")) corpus.language_tag = j.at("language").get<std::string>();
    }
  }

  const std::optional<std::vector<int>>& declared =
      expected_levels ? expected_levels : sidecar_levels;
  if (declared) {
    if (declared->size() < 2 || !std::is_sorted(declared->begin(), declared->end()) ||
        std::adjacent_find(declared->begin(), declared->end()) != declared->end()) {
      throw ParseError("declared level set must be >= 2 strictly ascending levels");
    }
  }

  std::size_t line_no = 0;
  for (;;) {
    bool ok;
    std::string line = read_line_stripped(in, ok);
    if (!ok) break;
    ++line_no;
    if (line.empty()) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": empty line");
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || j.size() != 3 || !j.contains("id") || !j.contains("text") ||
        !j.contains("level") || !j.at("id").is_string() || !j.at("text").is_string() ||
        !j.at("level").is_number_integer()) {
      throw ParseError("corpus line " + std::to_string(line_no) +
                       ": expected exactly the keys id (string), text (string), "
                       "level (integer)");
    }
    Document doc;
    doc.id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    doc.level = j.at("level").get<int>();
    if (doc.id.empty()) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": empty id");
    }
    if (!seen_ids.insert(doc.id).second) {
      throw ParseError("duplicate document id '" + doc.id + "' at line " +
                       std::to_string(line_no));
    }
    if (doc.level < 0) {
      throw ParseError("document '" + doc.id + "': negative level " +
                       std::to_string(doc.level));
    }
    if (declared && std::find(declared->begin(), declared->end(), doc.level) ==
                        declared->end()) {
      throw ParseError("document '" + doc.id + "': unknown level " +
                       std::to_string(doc.level));
    }
    if (tokenize(doc.text).empty()) {
      throw ParseError("document '" + doc.id + "' (line " + std::to_string(line_no) +
                       ") has no tokens after tokenization");
    }
    corpus.documents.push_back(std::move(doc));
  }

  if (corpus.documents.empty()) throw ParseError("empty corpus: " + path.string());

  corpus.levels = declared ? *declared : observed_levels(corpus.documents);
  if (corpus.levels.size() < 2) {
    throw ParseError("corpus must contain at least 2 levels, found " +
                     std::to_string(corpus.levels.size()));
  }
  for (const int level : corpus.levels) {
    const bool present = std::any_of(corpus.documents.begin(), corpus.documents.end(),
                                     [&](const Document& d) { return d.level == level; });
    if (!present) {
      throw ParseError("declared level " + std::to_string(level) + " has no documents");
    }
  }
  return corpus;
}

void save_corpus(const LeveledCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file: " + path.string());
  for (const auto& doc : corpus.documents) {
    nlohmann::json j{{"id", doc.id}, {"text", doc.text}, {"level", doc.level}};
    out << j.dump() << '\n';
  }
}

NBowVector to_nbow(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                   const std::string& doc_id,
                   const std::unordered_set<std::string>* stopwords) {
  std::map<std::uint32_t, double> counts;
  double total = 0.0;
  for (const auto& tok : tokens) {
    if (stopwords && stopwords->count(tok)) continue;
    const auto idx = table.lookup(tok);
    if (!idx) continue;
    counts[*idx] += 1.0;
    total += 1.0;
  }
  if (counts.empty()) throw AllTokensDropped(doc_id);

  NBowVector nbow;
  nbow.doc_id = doc_id;
  nbow.token_ids.reserve(counts.size());
  nbow.weights.reserve(counts.size());
  for (const auto& [idx, count] : counts) {
    nbow.token_ids.push_back(idx);
    nbow.weights.push_back(count / total);
  }
  return nbow;
}

FoldAssignment split_folds(const LeveledCorpus& corpus, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count k must be >= 2, got " + std::to_string(k));

  std::map<int, std::vector<std::size_t>> by_level;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    by_level[corpus.documents[i].level].push_back(i);
  }
  for (const auto& [level, docs] : by_level) {
    if (docs.size() < static_cast<std::size_t>(k)) {
      throw Error("class " + std::to_string(level) + " has only " +
                  std::to_string(docs.size()) + " documents, fewer than k=" +
                  std::to_string(k));
    }
  }

  FoldAssignment folds;
  folds.k = k;
  Rng rng(seed);
  std::size_t offset = 0; // spreads per-class remainders across folds
  for (auto& [level, docs] : by_level) {
    rng.shuffle(docs);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      folds.assignment[corpus.documents[docs[i]].id] =
          static_cast<int>((i + offset) % static_cast<std::size_t>(k));
    }
    offset += docs.size();
  }
  return folds;
}

} // namespace readability
