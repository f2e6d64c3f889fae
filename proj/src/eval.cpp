#include "readability/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "readability/error.hpp"
#include "readability/wmd.hpp"

namespace readability {

double accuracy(std::span<const int> pred, std::span<const int> gold) {
  if (pred.size() != gold.size()) {
    throw Error("accuracy: length mismatch (" + std::to_string(pred.size()) + " vs " +
                std::to_string(gold.size()) + ")");
  }
  if (pred.empty()) throw Error("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gold[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double macro_f1(std::span<const int> pred, std::span<const int> gold,
                const std::vector<int>& classes) {
  if (pred.size() != gold.size()) {
    throw Error("macro_f1: length mismatch (" + std::to_string(pred.size()) + " vs " +
                std::to_string(gold.size()) + ")");
  }
  if (pred.empty()) throw Error("macro_f1: empty input");
  if (classes.empty()) throw Error("macro_f1: empty class list");

  double sum = 0.0;
  for (const int cls : classes) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == cls;
      const bool g = gold[i] == cls;
      if (p && g) tp += 1.0;
      if (p && !g) fp += 1.0;
      if (!p && g) fn += 1.0;
    }
    const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                    : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("mann_whitney_u: empty sample");

  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const std::size_t total = n1 + n2;

  struct Obs {
    double value;
    bool from_a;
  };
  std::vector<Obs> pool;
  pool.reserve(total);
  for (const double v : a) pool.push_back({v, true});
  for (const double v : b) pool.push_back({v, false});
  std::sort(pool.begin(), pool.end(),
            [](const Obs& x, const Obs& y) { return x.value < y.value; });

  // Average ranks over tie groups; accumulate the tie correction term.
  double rank_sum_a = 0.0;
  double tie_term = 0.0; // sum of t^3 - t over tie groups
  std::size_t i = 0;
  while (i < total) {
    std::size_t j = i;
    while (j < total && pool[j].value == pool[i].value) ++j;
    const double t = static_cast<double>(j - i);
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t p = i; p < j; ++p) {
      if (pool[p].from_a) rank_sum_a += avg_rank;
    }
    if (t > 1.0) tie_term += t * t * t - t;
    i = j;
  }

  UTestResult result;
  result.n1 = n1;
  result.n2 = n2;
  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  const double dn = static_cast<double>(total);
  result.u_statistic = rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
  result.mean_a = std::accumulate(a.begin(), a.end(), 0.0) / dn1;
  result.mean_b = std::accumulate(b.begin(), b.end(), 0.0) / dn2;

  const double variance =
      dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  const double sigma = variance > 0.0 ? std::sqrt(variance) : 0.0;
  if (sigma > 0.0) {
    result.z_statistic = (result.u_statistic - dn1 * dn2 / 2.0) / sigma;
    result.p_value_two_sided = std::erfc(std::abs(result.z_statistic) / std::sqrt(2.0));
  } else {
    result.z_statistic = 0.0;
    result.p_value_two_sided = 1.0;
  }
  return result;
}

GroupExperimentResult wmd_group_experiment(
    const std::vector<std::pair<Document, Document>>& group_a,
    const std::vector<std::pair<Document, Document>>& group_b,
    const EmbeddingTable& table) {
  if (group_a.empty() || group_b.empty()) {
    throw Error("wmd_group_experiment: both groups must be nonempty");
  }
  auto score_group = [&](const std::vector<std::pair<Document, Document>>& group) {
    std::vector<double> scores;
    scores.reserve(group.size());
    for (const auto& [d1, d2] : group) {
      try {
        const auto a = to_nbow(tokenize(d1.text), table, d1.id);
        const auto b = to_nbow(tokenize(d2.text), table, d2.id);
        scores.push_back(wmd(a, b, table).distance);
      } catch (const Error& e) {
        throw Error("pair (" + d1.id + ", " + d2.id + "): " + e.what());
      }
    }
    return scores;
  };

  GroupExperimentResult result;
  result.scores_a = score_group(group_a);
  result.scores_b = score_group(group_b);
  result.utest = mann_whitney_u(result.scores_a, result.scores_b);
  return result;
}

namespace {

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string config_hash(const EvalConfig& config, std::uint64_t seed) {
  std::ostringstream os;
  os << "k=" << config.k << ";window=" << config.window << ";l2=" << config.hyper.l2
     << ";max_iter=" << config.hyper.max_iter << ";tol=" << config.hyper.tol
     << ";extra_vowels=" << config.features.extra_vowels << ";features=";
  const auto& names =
      config.features.enabled.empty() ? default_feature_names() : config.features.enabled;
  for (const auto& n : names) os << n << ",";
  os << ";seed=" << seed;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

struct MethodAccumulator {
  std::vector<int> fold_pred;
  std::vector<int> all_pred;
};

void finish_fold(MethodMetrics& metrics, std::vector<int>& pred,
                 const std::vector<int>& gold, const std::vector<int>& classes) {
  metrics.fold_accuracy.push_back(accuracy(pred, gold));
  metrics.fold_macro_f1.push_back(macro_f1(pred, gold, classes));
  pred.clear();
}

void finalize(MethodMetrics& metrics, const std::vector<int>& all_pred,
              const std::vector<int>& all_gold, const std::vector<int>& classes) {
  const double folds = static_cast<double>(metrics.fold_accuracy.size());
  metrics.mean_accuracy =
      std::accumulate(metrics.fold_accuracy.begin(), metrics.fold_accuracy.end(), 0.0) /
      folds;
  metrics.mean_macro_f1 =
      std::accumulate(metrics.fold_macro_f1.begin(), metrics.fold_macro_f1.end(), 0.0) /
      folds;
  metrics.confusion.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  std::map<int, std::size_t> class_index;
  for (std::size_t c = 0; c < classes.size(); ++c) class_index[classes[c]] = c;
  for (std::size_t i = 0; i < all_pred.size(); ++i) {
    metrics.confusion[class_index.at(all_gold[i])][class_index.at(all_pred[i])] += 1;
  }
}

} // namespace

EvalReport cross_validate(const LeveledCorpus& corpus, const EmbeddingTable& table,
                          const EvalConfig& config, std::uint64_t seed) {
  const auto folds = split_folds(corpus, config.k, seed);

  EvalReport report;
  report.k = config.k;
  report.seed = seed;
  report.classes = corpus.levels;
  report.config_hash = config_hash(config, seed);

  MethodAccumulator base, vote_only, wmd_mode;
  std::vector<int> fold_gold, all_gold;
  std::size_t ties = 0;
  std::size_t corrected = 0;

  for (int fold = 0; fold < config.k; ++fold) {
    LeveledCorpus train_split;
    train_split.levels = corpus.levels;
    train_split.language_tag = corpus.language_tag;
    std::vector<const Document*> held_out;
    for (const auto& doc : corpus.documents) {
      if (folds.assignment.at(doc.id) == fold) {
        held_out.push_back(&doc);
      } else {
        train_split.documents.push_back(doc);
      }
    }

    try {
      std::vector<FeatureVector> features;
      std::vector<int> labels;
      features.reserve(train_split.documents.size());
      for (const auto& doc : train_split.documents) {
        features.push_back(extract_features(doc, config.features));
        labels.push_back(doc.level);
      }
      const auto model = train(features, labels, config.hyper, seed);
      const Corrector corrector(model, train_split, table, config.features,
                                CorrectionMode::kWmd, config.window);

      for (const Document* doc : held_out) {
        const auto result = corrector.correct(*doc);
        base.fold_pred.push_back(result.base_prediction);
        base.all_pred.push_back(result.base_prediction);
        wmd_mode.fold_pred.push_back(result.corrected_level);
        wmd_mode.all_pred.push_back(result.corrected_level);
        // The vote-only ablation resolves ties to the easier winning level.
        const int vote_label = result.vote.winners.size() > 1
                                   ? result.vote.winners.front()
                                   : result.corrected_level;
        vote_only.fold_pred.push_back(vote_label);
        vote_only.all_pred.push_back(vote_label);
        fold_gold.push_back(doc->level);
        all_gold.push_back(doc->level);
        ++corrected;
        if (result.vote.winners.size() > 1) ++ties;
      }
    } catch (const Error& e) {
      throw Error("fold " + std::to_string(fold) + ": " + e.what());
    }

    finish_fold(report.base, base.fold_pred, fold_gold, report.classes);
    finish_fold(report.vote_only, vote_only.fold_pred, fold_gold, report.classes);
    finish_fold(report.wmd, wmd_mode.fold_pred, fold_gold, report.classes);
    fold_gold.clear();
  }

  finalize(report.base, base.all_pred, all_gold, report.classes);
  finalize(report.vote_only, vote_only.all_pred, all_gold, report.classes);
  finalize(report.wmd, wmd_mode.all_pred, all_gold, report.classes);
  report.tie_break_rate =
      corrected > 0 ? static_cast<double>(ties) / static_cast<double>(corrected) : 0.0;
  return report;
}

namespace {

nlohmann::json metrics_to_json(const MethodMetrics& metrics) {
  return {{"fold_accuracy", metrics.fold_accuracy},
          {"fold_macro_f1", metrics.fold_macro_f1},
          {"mean_accuracy", metrics.mean_accuracy},
          {"mean_macro_f1", metrics.mean_macro_f1},
          {"confusion", metrics.confusion}};
}

} // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  return {{"base", metrics_to_json(report.base)},
          {"vote_only", metrics_to_json(report.vote_only)},
          {"wmd", metrics_to_json(report.wmd)},
          {"tie_break_rate", report.tie_break_rate},
          {"k", report.k},
          {"seed", report.seed},
          {"classes", report.classes},
          {"config_hash", report.config_hash}};
}

std::string report_table(const EvalReport& report) {
  std::ostringstream os;
  char line[96];
  std::snprintf(line, sizeof(line), "%-12s %8s %8s\n", "Method", "Acc", "F1");
  os << line;
  const auto row = [&](const char* name, const MethodMetrics& m) {
    std::snprintf(line, sizeof(line), "%-12s %8.4f %8.4f\n", name, m.mean_accuracy,
                  m.mean_macro_f1);
    os << line;
  };
  row("base", report.base);
  row("vote-only", report.vote_only);
  row("wmd", report.wmd);
  std::snprintf(line, sizeof(line), "tie-break rate: %.4f\n", report.tie_break_rate);
  os << line;
  return os.str();
}

} // namespace readability
