#ifndef READABILITY_POSTPROCESS_HPP
#define READABILITY_POSTPROCESS_HPP

#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "readability/classifier.hpp"
#include "readability/corpus.hpp"
#include "readability/embeddings.hpp"

namespace readability {

// One book on the shelf: a training document with its gold level, or the
// target (gold unknown). nbow is only materialized for documents that
// actually enter a WMD comparison.
struct ShelfEntry {
  std::string doc_id;
  std::optional<int> gold_level;
  double hardest_class_prob = 0.0;
  std::optional<NBowVector> nbow;
};

// Training documents plus the target, sorted ascending by the probability
// of the hardest class; probability ties are ordered by doc_id.
struct Bookshelf {
  std::vector<ShelfEntry> entries;
  std::size_t target_index = 0;
};

struct VoteOutcome {
  std::map<int, int> counts;           // level -> votes
  std::vector<int> winners;            // levels with the maximal count, ascending
  std::optional<int> chosen;           // unset by hard_vote when tied
  bool tie_broken = false;
  std::map<int, double> class_scores;  // mean normalized WMD per winning level
};

Bookshelf build_bookshelf(const std::vector<ShelfEntry>& train, ShelfEntry target);

// Up to `window` entries immediately left and right of the target,
// nearest-first per side (left block first). Short sides return fewer.
std::vector<ShelfEntry> gather_neighbors(const Bookshelf& shelf, int window = 3);

VoteOutcome hard_vote(const std::vector<ShelfEntry>& neighbors);

// Resolves a vote tie: exact WMD from the target to every neighbor of a
// winning level, each distance normalized by the maximum within the
// compared set, averaged per level; the least-scoring level wins. Residual
// ties resolve to the easier level.
std::pair<int, std::map<int, double>> wmd_tiebreak(
    const ShelfEntry& target, const std::vector<int>& winners,
    const std::vector<ShelfEntry>& neighbors, const EmbeddingTable& table);

enum class CorrectionMode { kWmd, kVoteOnly };

struct NeighborReport {
  std::string doc_id;
  int gold_level = 0;
  double hardest_class_prob = 0.0;
  std::optional<double> wmd_distance; // set when the neighbor was compared
};

struct CorrectionResult {
  std::string doc_id;
  int base_prediction = 0; // plain classifier argmax
  int corrected_level = 0;
  VoteOutcome vote;
  std::size_t shelf_size = 0;
  std::size_t target_index = 0;
  std::vector<NeighborReport> neighbors;
};

// Runs classification -> ranking -> grounding for one target at a time
// against a fixed training corpus. Construction precomputes the training
// side of the shelf; correct() is const and side-effect-free, so distinct
// targets may be corrected concurrently. The model, corpus and table are
// held by reference and must outlive the corrector.
class Corrector {
public:
  Corrector(const ProbabilisticModel& model, const LeveledCorpus& train,
            const EmbeddingTable& table, FeatureConfig feature_config = {},
            CorrectionMode mode = CorrectionMode::kWmd, int window = 3,
            std::unordered_set<std::string> stopwords = {});

  CorrectionResult correct(const Document& target) const;

  CorrectionMode mode() const { return mode_; }

private:
  NBowVector nbow_for(const std::string& doc_id, const std::string& text) const;

  const ProbabilisticModel& model_;
  const EmbeddingTable& table_;
  FeatureConfig feature_config_;
  CorrectionMode mode_;
  int window_;
  std::unordered_set<std::string> stopwords_;
  std::vector<ShelfEntry> train_entries_;
  std::map<std::string, const Document*> train_docs_;
};

// Convenience wrapper for one-off corrections.
CorrectionResult correct_label(const Document& target, const ProbabilisticModel& model,
                               const LeveledCorpus& train, const EmbeddingTable& table,
                               CorrectionMode mode = CorrectionMode::kWmd,
                               const FeatureConfig& feature_config = {}, int window = 3);

} // namespace readability

#endif
