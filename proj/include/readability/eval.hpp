#ifndef READABILITY_EVAL_HPP
#define READABILITY_EVAL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "readability/classifier.hpp"
#include "readability/corpus.hpp"
#include "readability/embeddings.hpp"
#include "readability/postprocess.hpp"

namespace readability {

double accuracy(std::span<const int> pred, std::span<const int> gold);

// Unweighted mean of per-class F1 over `classes`; a class with P + R = 0
// contributes 0.
double macro_f1(std::span<const int> pred, std::span<const int> gold,
                const std::vector<int>& classes);

struct UTestResult {
  double u_statistic = 0.0;        // U of the first sample
  double z_statistic = 0.0;        // tie-corrected normal approximation
  double p_value_two_sided = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

// Two-sample Mann-Whitney U with average ranks for ties and a tie-corrected
// sigma. U_a + U_b = n1 * n2 exactly; swapping the samples negates z.
UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct GroupExperimentResult {
  UTestResult utest;
  std::vector<double> scores_a;
  std::vector<double> scores_b;
};

// Computes WMD per document pair in each group and tests whether the two
// score samples differ (group means ride along in the U-test result).
GroupExperimentResult wmd_group_experiment(
    const std::vector<std::pair<Document, Document>>& group_a,
    const std::vector<std::pair<Document, Document>>& group_b,
    const EmbeddingTable& table);

struct EvalConfig {
  int k = 5;
  int window = 3;
  FeatureConfig features;
  Hyperparameters hyper;
};

struct MethodMetrics {
  std::vector<double> fold_accuracy;
  std::vector<double> fold_macro_f1;
  double mean_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  std::vector<std::vector<std::size_t>> confusion; // gold x predicted, all folds
};

struct EvalReport {
  MethodMetrics base;      // plain classifier argmax
  MethodMetrics vote_only; // 3-neighbor vote, ties to the easier level
  MethodMetrics wmd;       // 3-neighbor vote with the WMD tie-breaker
  double tie_break_rate = 0.0; // fraction of targets whose vote tied
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> classes;
  std::string config_hash;
};

// Stratified k-fold cross-validation: trains per fold, corrects each
// held-out document, and aggregates per-method metrics (mean over folds).
EvalReport cross_validate(const LeveledCorpus& corpus, const EmbeddingTable& table,
                          const EvalConfig& config, std::uint64_t seed);

nlohmann::json report_to_json(const EvalReport& report);

// Aligned method x {Acc, F1} table for stdout.
std::string report_table(const EvalReport& report);

} // namespace readability

#endif
