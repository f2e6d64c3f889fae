#ifndef READABILITY_CORPUS_HPP
#define READABILITY_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "readability/embeddings.hpp"

namespace readability {

struct Document {
  std::string id;   // unique within the corpus
  std::string text; // UTF-8
  int level = 0;    // ordinal readability class, greater = harder
};

// Leveled document collection. Levels are ordered easiest to hardest.
struct LeveledCorpus {
  std::vector<Document> documents;
  std::vector<int> levels;
  std::string language_tag;
};

// Normalized bag-of-words over an embedding vocabulary: the mass
// distribution a document transports in WMD. Entries are sorted by token
// index; weights are strictly positive and sum to 1.
struct NBowVector {
  std::vector<std::uint32_t> token_ids;
  std::vector<double> weights;
  std::string doc_id;

  std::size_t support() const { return token_ids.size(); }
};

struct FoldAssignment {
  int k = 0;
  std::map<std::string, int> assignment; // doc_id -> fold in [0, k)
};

struct TokenizePolicy {
  // The default policy: Unicode-lowercase, split on whitespace, strip
  // leading/trailing punctuation, drop empty results.
};

// Reads a JSONL corpus: one {"id","text","level"} object per line. A
// sidecar "<stem>.meta.json" may declare the ordered level set and
// language; otherwise levels are the sorted distinct levels observed.
LeveledCorpus load_corpus(const std::filesystem::path& path,
                          const std::optional<std::vector<int>>& expected_levels = {});

// Writes the corpus in the same JSONL format; load_corpus(save_corpus(c))
// reproduces the documents exactly.
void save_corpus(const LeveledCorpus& corpus, const std::filesystem::path& path);

std::vector<std::string> tokenize(const std::string& text,
                                  const TokenizePolicy& policy = {});

// Builds the nBOW distribution, dropping OOV tokens and stopwords and
// renormalizing. Throws AllTokensDropped if nothing survives.
NBowVector to_nbow(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                   const std::string& doc_id,
                   const std::unordered_set<std::string>* stopwords = nullptr);

// Stratified k-fold split, deterministic for a fixed seed. Per-class fold
// sizes differ by at most one. Every class must have at least k documents.
FoldAssignment split_folds(const LeveledCorpus& corpus, int k, std::uint64_t seed);

} // namespace readability

#endif
