#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "readability/corpus.hpp"
#include "readability/error.hpp"
#include "readability/postprocess.hpp"
#include "readability/rng.hpp"
#include "readability/wmd.hpp"
#include "support/test_util.hpp"

using namespace readability;

namespace {

ShelfEntry entry(const std::string& id, std::optional<int> gold, double prob) {
  return {id, gold, prob, {}};
}

} // namespace

TEST_CASE("build_bookshelf sorts by hardest-class probability") {
  std::vector<ShelfEntry> train{entry("t1", 2, 0.9), entry("t2", 0, 0.1),
                                entry("t3", 1, 0.5)};
  const auto shelf = build_bookshelf(train, entry("target", {}, 0.4));
  REQUIRE(shelf.entries.size() == 4);
  CHECK(shelf.entries[0].doc_id == "t2");
  CHECK(shelf.entries[1].doc_id == "target");
  CHECK(shelf.entries[2].doc_id == "t3");
  CHECK(shelf.entries[3].doc_id == "t1");
  CHECK(shelf.target_index == 1);
}

TEST_CASE("target with the lowest probability lands at index 0") {
  std::vector<ShelfEntry> train{entry("t1", 0, 0.2), entry("t2", 1, 0.7)};
  const auto shelf = build_bookshelf(train, entry("target", {}, 0.0));
  CHECK(shelf.target_index == 0);
}

TEST_CASE("probability ties order by doc_id, stable across runs") {
  std::vector<ShelfEntry> train{entry("zz", 0, 0.5), entry("aa", 1, 0.5)};
  for (int run = 0; run < 3; ++run) {
    const auto shelf = build_bookshelf(train, entry("mm", {}, 0.5));
    CHECK(shelf.entries[0].doc_id == "aa");
    CHECK(shelf.entries[1].doc_id == "mm");
    CHECK(shelf.entries[2].doc_id == "zz");
    CHECK(shelf.target_index == 1);
  }
  CHECK_THROWS_AS(build_bookshelf({}, entry("t", {}, 0.5)), Error);
}

TEST_CASE("bookshelf order is monotone for random entries") {
  Rng rng(808);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ShelfEntry> train;
    const std::size_t n = 2 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      train.push_back(entry("d" + std::to_string(i), static_cast<int>(rng.below(3)),
                            rng.uniform()));
    }
    const auto shelf = build_bookshelf(train, entry("target", {}, rng.uniform()));
    REQUIRE(shelf.entries.size() == n + 1);
    for (std::size_t i = 1; i < shelf.entries.size(); ++i) {
      CHECK(shelf.entries[i - 1].hardest_class_prob <=
            shelf.entries[i].hardest_class_prob);
    }
    CHECK(shelf.entries[shelf.target_index].doc_id == "target");
  }
}

TEST_CASE("gather_neighbors takes up to three per side, nearest first") {
  std::vector<ShelfEntry> train;
  for (int i = 0; i < 9; ++i) {
    train.push_back(entry("t" + std::to_string(i), 0, 0.1 * i));
  }
  const auto shelf = build_bookshelf(train, entry("target", {}, 0.45));
  REQUIRE(shelf.target_index == 5);

  const auto neighbors = gather_neighbors(shelf);
  REQUIRE(neighbors.size() == 6);
  CHECK(neighbors[0].doc_id == "t4"); // nearest left
  CHECK(neighbors[1].doc_id == "t3");
  CHECK(neighbors[2].doc_id == "t2");
  CHECK(neighbors[3].doc_id == "t5"); // nearest right
  CHECK(neighbors[4].doc_id == "t6");
  CHECK(neighbors[5].doc_id == "t7");
}

TEST_CASE("gather_neighbors shrinks at the shelf edges") {
  std::vector<ShelfEntry> train;
  for (int i = 0; i < 9; ++i) {
    train.push_back(entry("t" + std::to_string(i), 0, 0.1 * (i + 1)));
  }
  const auto shelf = build_bookshelf(train, entry("target", {}, 0.0));
  REQUIRE(shelf.target_index == 0);
  const auto neighbors = gather_neighbors(shelf);
  REQUIRE(neighbors.size() == 3); // all from the right
  CHECK(neighbors[0].doc_id == "t0");

  // small shelf: 3 train entries -> 3 neighbors total
  std::vector<ShelfEntry> small{entry("a", 0, 0.1), entry("b", 1, 0.5),
                                entry("c", 1, 0.9)};
  const auto small_shelf = build_bookshelf(small, entry("target", {}, 0.4));
  CHECK(gather_neighbors(small_shelf).size() == 3);
}

TEST_CASE("hard_vote resolves unanimity and strict majorities") {
  std::vector<ShelfEntry> unanimous;
  for (int i = 0; i < 6; ++i) {
    unanimous.push_back(entry("n" + std::to_string(i), 2, 0.5));
  }
  auto outcome = hard_vote(unanimous);
  CHECK(outcome.chosen == 2);
  CHECK(outcome.winners == std::vector<int>{2});
  CHECK_FALSE(outcome.tie_broken);
  CHECK(outcome.counts.at(2) == 6);

  std::vector<ShelfEntry> majority{entry("a", 1, 0.1), entry("b", 1, 0.2),
                                   entry("c", 1, 0.3), entry("d", 1, 0.4),
                                   entry("e", 3, 0.5), entry("f", 3, 0.6)};
  outcome = hard_vote(majority);
  CHECK(outcome.chosen == 1);
  CHECK(outcome.counts.at(1) == 4);
  CHECK(outcome.counts.at(3) == 2);
}

TEST_CASE("hard_vote defers triple ties") {
  std::vector<ShelfEntry> tied{entry("a", 1, 0.1), entry("b", 1, 0.2),
                               entry("c", 2, 0.3), entry("d", 2, 0.4),
                               entry("e", 3, 0.5), entry("f", 3, 0.6)};
  const auto outcome = hard_vote(tied);
  CHECK_FALSE(outcome.chosen.has_value());
  CHECK(outcome.winners == std::vector<int>{1, 2, 3});

  CHECK_THROWS_AS(hard_vote({}), Error);
  std::vector<ShelfEntry> no_gold{entry("a", {}, 0.1)};
  CHECK_THROWS_AS(hard_vote(no_gold), Error);
}

namespace {

// Three tight token clusters far apart; the target's words live in the
// level-3 cluster (tokens 6, 7, 8).
EmbeddingTable figure_one_table(double scale = 1.0) {
  std::vector<std::vector<double>> rows = {
      {0.0, 0.0},  {0.4, 0.0},  {0.0, 0.4},  // cluster of level 1
      {20.0, 0.0}, {20.4, 0.0}, {20.0, 0.4}, // cluster of level 2
      {0.0, 20.0}, {0.4, 20.0}, {0.0, 20.4}, // cluster of level 3
  };
  for (auto& row : rows) {
    for (auto& v : row) v *= scale;
  }
  return test_util::make_table(2, rows);
}

struct FigureOneSetup {
  ShelfEntry target;
  std::vector<ShelfEntry> neighbors;
};

FigureOneSetup figure_one_setup() {
  FigureOneSetup s;
  s.target = entry("x", {}, 0.5);
  s.target.nbow = test_util::make_nbow({6, 7, 8}, {0.4, 0.3, 0.3}, "x");

  auto add = [&](const std::string& id, int gold, std::vector<std::uint32_t> ids,
                 std::vector<double> w) {
    auto e = entry(id, gold, 0.5);
    e.nbow = test_util::make_nbow(std::move(ids), std::move(w), id);
    s.neighbors.push_back(std::move(e));
  };
  add("l1a", 1, {0, 1}, {0.5, 0.5});
  add("l1b", 1, {1, 2}, {0.5, 0.5});
  add("l2a", 2, {3, 4}, {0.5, 0.5});
  add("l2b", 2, {4, 5}, {0.5, 0.5});
  add("l3a", 3, {6, 7}, {0.5, 0.5});
  add("l3b", 3, {7, 8}, {0.5, 0.5});
  return s;
}

} // namespace

TEST_CASE("triple tie resolves to the class with least normalized distance") {
  const auto table = figure_one_table();
  auto s = figure_one_setup();
  const auto [level, scores] = wmd_tiebreak(s.target, {1, 2, 3}, s.neighbors, table);
  CHECK(level == 3);
  REQUIRE(scores.size() == 3);
  CHECK(scores.at(3) < scores.at(1));
  CHECK(scores.at(3) < scores.at(2));

  // Independent recomputation of the scoring rule from raw distances.
  std::map<int, std::vector<double>> distances;
  for (const auto& n : s.neighbors) {
    distances[*n.gold_level].push_back(wmd(*s.target.nbow, *n.nbow, table).distance);
  }
  double max_d = 0.0;
  for (const auto& [lvl, ds] : distances) {
    for (const double d : ds) max_d = std::max(max_d, d);
  }
  int expect_level = 0;
  double expect_score = 1e300;
  std::map<int, double> expect_scores;
  for (const auto& [lvl, ds] : distances) {
    double mean = 0.0;
    for (const double d : ds) mean += d / max_d;
    mean /= static_cast<double>(ds.size());
    expect_scores[lvl] = mean;
    if (mean < expect_score) {
      expect_score = mean;
      expect_level = lvl;
    }
  }
  CHECK(level == expect_level);
  for (const auto& [lvl, score] : scores) {
    CHECK(score == doctest::Approx(expect_scores.at(lvl)).epsilon(1e-12));
  }
}

TEST_CASE("tie-break choice is invariant to a common embedding rescale") {
  auto s = figure_one_setup();
  const auto base = wmd_tiebreak(s.target, {1, 2, 3}, s.neighbors, figure_one_table());
  for (const double scale : {0.25, 2.5, 1000.0}) {
    const auto scaled =
        wmd_tiebreak(s.target, {1, 2, 3}, s.neighbors, figure_one_table(scale));
    CHECK(scaled.first == base.first);
  }
}

TEST_CASE("residual tie resolves to the easier level") {
  // Two neighbors at exactly symmetric positions: both normalized
  // distances are 1, so the easier level must win.
  auto table = test_util::make_table(1, {{0.0}, {-1.0}, {1.0}});
  auto target = entry("x", {}, 0.5);
  target.nbow = test_util::make_nbow({0}, {1.0}, "x");
  auto n1 = entry("a", 1, 0.4);
  n1.nbow = test_util::make_nbow({1}, {1.0}, "a");
  auto n2 = entry("b", 2, 0.6);
  n2.nbow = test_util::make_nbow({2}, {1.0}, "b");

  const auto [level, scores] = wmd_tiebreak(target, {1, 2}, {n1, n2}, table);
  CHECK(level == 1);
  CHECK(scores.at(1) == doctest::Approx(1.0));
  CHECK(scores.at(2) == doctest::Approx(1.0));
}

TEST_CASE("all-zero distances fall back to the easier level") {
  auto table = test_util::make_table(1, {{0.0}});
  auto target = entry("x", {}, 0.5);
  target.nbow = test_util::make_nbow({0}, {1.0}, "x");
  auto n1 = entry("a", 0, 0.4);
  n1.nbow = test_util::make_nbow({0}, {1.0}, "a");
  auto n2 = entry("b", 1, 0.6);
  n2.nbow = test_util::make_nbow({0}, {1.0}, "b");
  const auto [level, scores] = wmd_tiebreak(target, {0, 1}, {n1, n2}, table);
  CHECK(level == 0);
}

TEST_CASE("wmd_tiebreak validates its inputs") {
  auto s = figure_one_setup();
  const auto table = figure_one_table();
  CHECK_THROWS_AS(wmd_tiebreak(s.target, {1}, s.neighbors, table), Error);
  CHECK_THROWS_AS(wmd_tiebreak(s.target, {1, 7}, s.neighbors, table), Error);
  auto no_nbow = s.target;
  no_nbow.nbow.reset();
  CHECK_THROWS_AS(wmd_tiebreak(no_nbow, {1, 2}, s.neighbors, table), Error);
}

// --------------------------------------------------------------------------
// End-to-end correction through a hand-built model.

namespace {

// One feature; class c concentrated near c. The model is crafted so that
// hardest-class probability is monotone in the feature.
ProbabilisticModel handmade_model(const std::vector<int>& labels) {
  ProbabilisticModel model;
  model.class_labels = labels;
  model.feature_names = {"x"};
  model.scaler.means = {0.0};
  model.scaler.stddevs = {1.0};
  for (std::size_t c = 0; c < labels.size(); ++c) {
    model.weights.push_back(static_cast<double>(c) * 2.0);
    model.biases.push_back(-(static_cast<double>(c) * c));
  }
  return model;
}

Document doc_with_tokens(const std::string& id, const std::string& text, int level) {
  return {id, text, level};
}

} // namespace

TEST_CASE("correct_label short-circuits on unanimous neighborhoods") {
  // The corpus vocabulary is deliberately absent from the embedding table:
  // any WMD attempt would throw AllTokensDropped, so success proves the
  // tie-break was never consulted.
  auto table = test_util::make_table(1, {{0.0}});
  LeveledCorpus train;
  train.levels = {0, 1};
  // Easy docs straddle the target's mean word length (4.33 and 5.0 around
  // 4.67) so the target ranks inside the easy block, not at its edge.
  for (int i = 0; i < 3; ++i) {
    train.documents.push_back(
        doc_with_tokens("e" + std::to_string(i), "easy words here", 0));
    train.documents.push_back(
        doc_with_tokens("f" + std::to_string(i), "easyy wordy heree", 0));
  }
  for (int i = 0; i < 6; ++i) {
    train.documents.push_back(
        doc_with_tokens("h" + std::to_string(i), "unusually formidable paragraphs", 1));
  }
  FeatureConfig fc;
  fc.enabled = {"mean_word_length"};

  std::vector<FeatureVector> features;
  std::vector<int> labels;
  for (const auto& d : train.documents) {
    features.push_back(extract_features(d, fc));
    labels.push_back(d.level);
  }
  const auto model = readability::train(features, labels);

  const Document target = doc_with_tokens("t", "easy short words", 0);
  const auto result =
      correct_label(target, model, train, table, CorrectionMode::kWmd, fc);
  CHECK(result.corrected_level == 0);
  CHECK_FALSE(result.vote.tie_broken);
  CHECK(result.vote.counts.at(0) == 6);

  // vote-only mode agrees when no tie fires
  const auto vote_only =
      correct_label(target, model, train, table, CorrectionMode::kVoteOnly, fc);
  CHECK(vote_only.corrected_level == result.corrected_level);
  CHECK(vote_only.base_prediction == result.base_prediction);
}

TEST_CASE("correct_label fixes a miscalibrated base prediction") {
  // Train entries placed by a handmade model; the target's feature puts its
  // argmax at class 2, but its hardest-class probability ranks it among the
  // class-1 guide books, whose unanimous vote corrects the label.
  auto model = handmade_model({0, 1, 2});

  auto table = test_util::make_table(1, {{0.0}});
  LeveledCorpus train;
  train.levels = {0, 1, 2};
  struct Spec {
    std::string id;
    int x;
    int level;
  };
  // token_count feature: x tokens. The handmade model scores s_c = 2c*x - c^2
  // after identity scaling, so P(hardest) is monotone in x. The class-1 block
  // spans counts 2..5, so the 3-token target ranks strictly inside it.
  const std::vector<Spec> specs = {
      {"a0", 1, 0}, {"a1", 1, 0}, {"a2", 1, 0}, {"a3", 1, 0},
      {"b0", 2, 1}, {"b1", 2, 1}, {"b2", 3, 1}, {"b3", 3, 1},
      {"b4", 4, 1}, {"b5", 4, 1}, {"b6", 5, 1},
      {"c0", 6, 2}, {"c1", 6, 2}, {"c2", 6, 2}, {"c3", 6, 2},
  };
  for (const auto& s : specs) {
    std::string text;
    for (int t = 0; t < s.x; ++t) text += "tok ";
    train.documents.push_back({s.id, text, s.level});
  }
  FeatureConfig fc;
  fc.enabled = {"token_count"};

  // Target with 3 tokens: argmax class is 2 (scores 0, 5, 8), yet its
  // P(hardest) sits inside the class-1 band, whose unanimous vote corrects
  // the label.
  const Document target{"t", "tok tok tok", 1};
  const auto fv = extract_features(target, fc);
  CHECK(predict(model, fv) == 2);

  const auto result =
      correct_label(target, model, train, table, CorrectionMode::kWmd, fc);
  CHECK(result.base_prediction == 2);
  CHECK(result.corrected_level == 1);
  CHECK_FALSE(result.vote.tie_broken);
}

TEST_CASE("tie-broken corrections report class scores and distances") {
  // Two-class tie with vocab clusters; target shares the hard cluster.
  auto table = test_util::make_table(
      1, {{0.0}, {0.1}, {10.0}, {10.1}}); // tokens w0 w1 (easy), w2 w3 (hard)
  LeveledCorpus train;
  train.levels = {0, 1};
  // Feature: mean word length separates classes weakly; craft probs so the
  // neighborhood splits 3-3. Simplest: handmade model over token_count and
  // train docs whose counts interleave the target.
  auto model = handmade_model({0, 1});
  FeatureConfig fc;
  fc.enabled = {"token_count"};

  // 3 easy docs with 2 tokens, 3 hard docs with 4 tokens; target 3 tokens.
  for (int i = 0; i < 3; ++i) {
    train.documents.push_back({"e" + std::to_string(i), "w0 w1", 0});
    train.documents.push_back({"h" + std::to_string(i), "w2 w3 w2 w3", 1});
  }
  const Document target{"t", "w2 w3 w2", 1};

  const auto result =
      correct_label(target, model, train, table, CorrectionMode::kWmd, fc);
  CHECK(result.vote.tie_broken);
  CHECK(result.vote.winners == std::vector<int>{0, 1});
  CHECK(result.corrected_level == 1); // target vocabulary sits in the hard cluster
  CHECK(result.vote.class_scores.at(1) < result.vote.class_scores.at(0));
  int with_distance = 0;
  for (const auto& n : result.neighbors) {
    if (n.wmd_distance) ++with_distance;
  }
  CHECK(with_distance == 6);

  // vote-only resolves the same tie to the easier level
  const auto vote_only =
      correct_label(target, model, train, table, CorrectionMode::kVoteOnly, fc);
  CHECK(vote_only.corrected_level == 0);
  CHECK(vote_only.vote.tie_broken);
  CHECK(vote_only.vote.class_scores.empty());
}

TEST_CASE("OOV documents surface AllTokensDropped from the grounding phase") {
  auto table = test_util::make_table(1, {{0.0}}); // vocabulary: only "w0"
  LeveledCorpus train;
  train.levels = {0, 1};
  auto model = handmade_model({0, 1});
  FeatureConfig fc;
  fc.enabled = {"token_count"};
  for (int i = 0; i < 3; ++i) {
    train.documents.push_back({"e" + std::to_string(i), "zz yy", 0});
    train.documents.push_back({"h" + std::to_string(i), "qq rr ss tt", 1});
  }
  const Document target{"t", "aa bb cc", 0}; // ties 3-3, then all tokens drop
  CHECK_THROWS_AS(
      correct_label(target, model, train, table, CorrectionMode::kWmd, fc),
      AllTokensDropped);
  // vote-only mode never touches the embeddings, so the same input succeeds
  const auto result =
      correct_label(target, model, train, table, CorrectionMode::kVoteOnly, fc);
  CHECK(result.corrected_level == 0);
}
