#ifndef READABILITY_FEATURES_HPP
#define READABILITY_FEATURES_HPP

#include <functional>
#include <string>
#include <vector>

#include "readability/corpus.hpp"

namespace readability {

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> names; // parallel to values, same order for every doc
  std::string doc_id;
};

// Per-feature standardization parameters fit on training data. A zero
// stddev marks a constant feature; transform maps it to 0.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stddevs;
};

// Tokenized view handed to feature providers.
struct DocumentStats {
  std::vector<std::string> tokens;
  std::vector<std::size_t> sentence_token_counts; // one entry per sentence
  std::string extra_vowels;                       // language add-ons, e.g. umlauts
};

using FeatureProvider = std::function<double(const DocumentStats&)>;

struct FeatureConfig {
  std::vector<std::string> enabled; // empty = the full default set, in order
  std::string extra_vowels;         // appended to "aeiou" for the syllable proxy
};

// Names of the built-in surface features, in extraction order.
const std::vector<std::string>& default_feature_names();

// Registers an additional named feature; extraction picks it up when the
// config enables it. Registration is process-global and not thread-safe.
void register_feature(const std::string& name, FeatureProvider provider);

FeatureVector extract_features(const Document& doc, const FeatureConfig& config = {});

Scaler fit_scaler(const std::vector<FeatureVector>& features);

FeatureVector transform(const Scaler& scaler, const FeatureVector& fv);

} // namespace readability

#endif
