#ifndef READABILITY_CLASSIFIER_HPP
#define READABILITY_CLASSIFIER_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "readability/features.hpp"

namespace readability {

struct Hyperparameters {
  double l2 = 1.0;      // L2 regularization strength (biases unregularized)
  int max_iter = 1000;  // gradient descent iteration cap
  double tol = 1e-8;    // stop when the gradient max-norm drops below this
};

// Linear multiclass model with a softmax link: emits a probability simplex
// per document. Training is deterministic (convex objective, zero init),
// so identical inputs produce bit-identical models.
struct ProbabilisticModel {
  std::vector<int> class_labels;            // easiest -> hardest
  std::vector<double> weights;              // row-major classes x arity
  std::vector<double> biases;               // one per class
  Scaler scaler;                            // fit on the training features
  std::vector<std::string> feature_names;
  Hyperparameters hyper;
  std::uint64_t seed = 0;

  std::size_t num_classes() const { return class_labels.size(); }
  std::size_t arity() const { return feature_names.size(); }
};

struct ClassProbabilities {
  std::vector<double> probs; // aligned with class_labels, sums to 1
  std::string doc_id;
};

ProbabilisticModel train(const std::vector<FeatureVector>& features,
                         const std::vector<int>& labels,
                         const Hyperparameters& hyper = {}, std::uint64_t seed = 0);

ClassProbabilities predict_proba(const ProbabilisticModel& model,
                                 const FeatureVector& fv);

// Argmax of predict_proba; ties break toward the easier (lower) class.
int predict(const ProbabilisticModel& model, const FeatureVector& fv);

// Versioned binary container; a round-trip reproduces predict_proba
// bit-for-bit (weights are stored exactly).
void save_model(const ProbabilisticModel& model, const std::filesystem::path& path);
ProbabilisticModel load_model(const std::filesystem::path& path);

} // namespace readability

#endif
