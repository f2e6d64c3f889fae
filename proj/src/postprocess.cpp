#include "readability/postprocess.hpp"

#include <algorithm>
#include <limits>

#include "readability/error.hpp"
#include "readability/wmd.hpp"

namespace readability {

Bookshelf build_bookshelf(const std::vector<ShelfEntry>& train, ShelfEntry target) {
  if (train.empty()) throw Error("build_bookshelf: empty training list");

  std::vector<ShelfEntry> entries;
  entries.reserve(train.size() + 1);
  entries.insert(entries.end(), train.begin(), train.end());
  entries.push_back(std::move(target));
  const std::size_t target_slot = entries.size() - 1;

  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = entries[a];
    const auto& eb = entries[b];
    if (ea.hardest_class_prob != eb.hardest_class_prob) {
      return ea.hardest_class_prob < eb.hardest_class_prob;
    }
    if (ea.doc_id != eb.doc_id) return ea.doc_id < eb.doc_id;
    return a < b;
  });

  Bookshelf shelf;
  shelf.entries.reserve(entries.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (order[pos] == target_slot) shelf.target_index = pos;
    shelf.entries.push_back(std::move(entries[order[pos]]));
  }
  return shelf;
}

std::vector<ShelfEntry> gather_neighbors(const Bookshelf& shelf, int window) {
  if (window < 1) throw Error("gather_neighbors: window must be >= 1");
  std::vector<ShelfEntry> neighbors;
  const std::size_t t = shelf.target_index;
  for (int step = 1; step <= window; ++step) {
    if (t >= static_cast<std::size_t>(step)) {
      neighbors.push_back(shelf.entries[t - static_cast<std::size_t>(step)]);
    }
  }
  for (int step = 1; step <= window; ++step) {
    const std::size_t idx = t + static_cast<std::size_t>(step);
    if (idx < shelf.entries.size()) neighbors.push_back(shelf.entries[idx]);
  }
  return neighbors;
}

VoteOutcome hard_vote(const std::vector<ShelfEntry>& neighbors) {
  if (neighbors.empty()) throw Error("hard_vote: empty neighbor list");
  VoteOutcome outcome;
  for (const auto& n : neighbors) {
    if (!n.gold_level) {
      throw Error("hard_vote: neighbor '" + n.doc_id + "' has no gold level");
    }
    ++outcome.counts[*n.gold_level];
  }
  int max_count = 0;
  for (const auto& [level, count] : outcome.counts) max_count = std::max(max_count, count);
  for (const auto& [level, count] : outcome.counts) {
    if (count == max_count) outcome.winners.push_back(level);
  }
  if (outcome.winners.size() == 1) {
    outcome.chosen = outcome.winners.front();
  }
  return outcome;
}

namespace {

struct ComparedNeighbor {
  std::size_t neighbor_index;
  int level;
  double distance;
};

// Scoring rule shared with the tests: normalize each compared distance by
// the set maximum, average per level, pick the argmin (easier level on a
// residual tie).
std::pair<int, std::map<int, double>> score_tied_levels(
    const std::vector<ComparedNeighbor>& compared) {
  double max_distance = 0.0;
  for (const auto& c : compared) max_distance = std::max(max_distance, c.distance);

  std::map<int, double> scores;
  std::map<int, int> counts;
  for (const auto& c : compared) {
    const double normalized = max_distance > 0.0 ? c.distance / max_distance : 0.0;
    scores[c.level] += normalized;
    ++counts[c.level];
  }
  for (auto& [level, score] : scores) score /= counts[level];

  int best_level = scores.begin()->first;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& [level, score] : scores) {
    if (score < best_score) { // strict: residual ties keep the easier level
      best_score = score;
      best_level = level;
    }
  }
  return {best_level, scores};
}

std::vector<ComparedNeighbor> compare_winners(const ShelfEntry& target,
                                              const std::vector<int>& winners,
                                              const std::vector<ShelfEntry>& neighbors,
                                              const EmbeddingTable& table) {
  if (winners.size() < 2) throw Error("wmd_tiebreak: needs at least 2 tied levels");
  if (!target.nbow) throw Error("wmd_tiebreak: target has no nBOW");

  std::vector<ComparedNeighbor> compared;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const auto& n = neighbors[i];
    if (!n.gold_level ||
        std::find(winners.begin(), winners.end(), *n.gold_level) == winners.end()) {
      continue;
    }
    if (!n.nbow) throw Error("wmd_tiebreak: neighbor '" + n.doc_id + "' has no nBOW");
    compared.push_back({i, *n.gold_level, wmd(*target.nbow, *n.nbow, table).distance});
  }
  for (const int level : winners) {
    const bool found =
        std::any_of(compared.begin(), compared.end(),
                    [&](const ComparedNeighbor& c) { return c.level == level; });
    if (!found) {
      throw Error("wmd_tiebreak: no neighbor carries winning level " +
                  std::to_string(level));
    }
  }
  return compared;
}

} // namespace

std::pair<int, std::map<int, double>> wmd_tiebreak(
    const ShelfEntry& target, const std::vector<int>& winners,
    const std::vector<ShelfEntry>& neighbors, const EmbeddingTable& table) {
  return score_tied_levels(compare_winners(target, winners, neighbors, table));
}

Corrector::Corrector(const ProbabilisticModel& model, const LeveledCorpus& train,
                     const EmbeddingTable& table, FeatureConfig feature_config,
                     CorrectionMode mode, int window,
                     std::unordered_set<std::string> stopwords)
    : model_(model),
      table_(table),
      feature_config_(std::move(feature_config)),
      mode_(mode),
      window_(window),
      stopwords_(std::move(stopwords)) {
  if (train.documents.empty()) throw Error("Corrector: empty training corpus");
  const std::size_t hardest = model_.num_classes() - 1;
  train_entries_.reserve(train.documents.size());
  for (const auto& doc : train.documents) {
    const auto fv = extract_features(doc, feature_config_);
    const auto probs = predict_proba(model_, fv);
    ShelfEntry entry;
    entry.doc_id = doc.id;
    entry.gold_level = doc.level;
    entry.hardest_class_prob = probs.probs[hardest];
    train_entries_.push_back(std::move(entry));
    train_docs_[doc.id] = &doc;
  }
}

NBowVector Corrector::nbow_for(const std::string& doc_id, const std::string& text) const {
  return to_nbow(tokenize(text), table_, doc_id,
                 stopwords_.empty() ? nullptr : &stopwords_);
}

CorrectionResult Corrector::correct(const Document& target) const {
  CorrectionResult result;
  result.doc_id = target.id;

  ShelfEntry target_entry;
  try {
    const auto fv = extract_features(target, feature_config_);
    const auto probs = predict_proba(model_, fv);
    result.base_prediction = predict(model_, fv);
    target_entry.doc_id = target.id;
    target_entry.hardest_class_prob = probs.probs[model_.num_classes() - 1];
  } catch (const Error& e) {
    throw Error("classification phase: " + std::string(e.what()));
  }

  Bookshelf shelf;
  try {
    shelf = build_bookshelf(train_entries_, std::move(target_entry));
  } catch (const Error& e) {
    throw Error("ranking phase: " + std::string(e.what()));
  }
  result.shelf_size = shelf.entries.size();
  result.target_index = shelf.target_index;

  try {
    auto neighbors = gather_neighbors(shelf, window_);
    result.vote = hard_vote(neighbors);

    for (const auto& n : neighbors) {
      result.neighbors.push_back({n.doc_id, *n.gold_level, n.hardest_class_prob, {}});
    }

    if (result.vote.chosen) {
      result.corrected_level = *result.vote.chosen;
      return result;
    }

    result.vote.tie_broken = true;
    if (mode_ == CorrectionMode::kVoteOnly) {
      result.vote.chosen = result.vote.winners.front(); // easier level wins
      result.corrected_level = *result.vote.chosen;
      return result;
    }

    // Materialize nBOWs for the target and the compared neighbors only, so
    // unanimous votes never touch the embedding table.
    ShelfEntry target_with_nbow = shelf.entries[shelf.target_index];
    target_with_nbow.nbow = nbow_for(target.id, target.text);
    for (auto& n : neighbors) {
      if (std::find(result.vote.winners.begin(), result.vote.winners.end(),
                    *n.gold_level) == result.vote.winners.end()) {
        continue;
      }
      const auto it = train_docs_.find(n.doc_id);
      if (it == train_docs_.end()) {
        throw Error("neighbor '" + n.doc_id + "' is not a training document");
      }
      n.nbow = nbow_for(n.doc_id, it->second->text);
    }

    const auto compared = compare_winners(target_with_nbow, result.vote.winners,
                                          neighbors, table_);
    auto [level, scores] = score_tied_levels(compared);
    result.vote.chosen = level;
    result.vote.class_scores = std::move(scores);
    result.corrected_level = level;
    for (const auto& c : compared) {
      result.neighbors[c.neighbor_index].wmd_distance = c.distance;
    }
    return result;
  } catch (const AllTokensDropped&) {
    throw;
  } catch (const Error& e) {
    throw Error("grounding phase: " + std::string(e.what()));
  }
}

CorrectionResult correct_label(const Document& target, const ProbabilisticModel& model,
                               const LeveledCorpus& train, const EmbeddingTable& table,
                               CorrectionMode mode, const FeatureConfig& feature_config,
                               int window) {
  const Corrector corrector(model, train, table, feature_config, mode, window);
  return corrector.correct(target);
}

} // namespace readability
