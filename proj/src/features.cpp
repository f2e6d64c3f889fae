#include "readability/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "readability/error.hpp"
#include "utf8.hpp"

namespace readability {

namespace {

// Sentences end at . ! ? followed by whitespace or end of text; a text
// without terminators counts as one sentence.
std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> sentences;
  std::string current;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    current.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      const bool at_end = (i + 1 == n);
      const char next = at_end ? ' ' : text[i + 1];
      if (at_end || next == ' ' || next == '\t' || next == '\n' || next == '\r') {
        sentences.push_back(current);
        current.clear();
      }
    }
  }
  if (!current.empty()) sentences.push_back(current);
  return sentences;
}

bool is_vowel(std::uint32_t cp, const std::vector<std::uint32_t>& extra) {
  switch (cp) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return true;
    default:
      return std::find(extra.begin(), extra.end(), cp) != extra.end();
  }
}

// Maximal vowel-letter runs per word: a dictionary-free syllable proxy.
double vowel_groups(const std::string& token, const std::vector<std::uint32_t>& extra) {
  double groups = 0.0;
  bool in_group = false;
  for (const auto cp : utf8::decode(token)) {
    if (is_vowel(cp, extra)) {
      if (!in_group) {
        groups += 1.0;
        in_group = true;
      }
    } else {
      in_group = false;
    }
  }
  return groups;
}

double builtin_feature(const std::string& name, const DocumentStats& stats) {
  const auto& tokens = stats.tokens;
  const double token_count = static_cast<double>(tokens.size());
  if (name == "token_count") return token_count;
  if (name == "sentence_count") {
    return static_cast<double>(stats.sentence_token_counts.size());
  }
  if (name == "mean_sentence_length") {
    double total = 0.0;
    for (const auto c : stats.sentence_token_counts) total += static_cast<double>(c);
    return total / static_cast<double>(stats.sentence_token_counts.size());
  }
  if (name == "mean_word_length") {
    double total = 0.0;
    for (const auto& t : tokens) total += static_cast<double>(utf8::count_codepoints(t));
    return total / token_count;
  }
  if (name == "type_token_ratio") {
    const std::set<std::string> types(tokens.begin(), tokens.end());
    return static_cast<double>(types.size()) / token_count;
  }
  if (name == "long_word_ratio") {
    double long_words = 0.0;
    for (const auto& t : tokens) {
      if (utf8::count_codepoints(t) >= 7) long_words += 1.0;
    }
    return long_words / token_count;
  }
  if (name == "mean_vowel_groups") {
    const auto extra = utf8::decode(stats.extra_vowels);
    double total = 0.0;
    for (const auto& t : tokens) total += vowel_groups(t, extra);
    return total / token_count;
  }
  if (name == "hapax_ratio") {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    double hapax = 0.0;
    for (const auto& [tok, c] : counts) {
      if (c == 1) hapax += 1.0;
    }
    return hapax / static_cast<double>(counts.size());
  }
  throw ConfigError("unknown feature '" + name + "'");
}

std::map<std::string, FeatureProvider>& registry() {
  static std::map<std::string, FeatureProvider> providers;
  return providers;
}

} // namespace

const std::vector<std::string>& default_feature_names() {
  static const std::vector<std::string> names = {
      "token_count",      "sentence_count",   "mean_sentence_length",
      "mean_word_length", "type_token_ratio", "long_word_ratio",
      "mean_vowel_groups", "hapax_ratio"};
  return names;
}

void register_feature(const std::string& name, FeatureProvider provider) {
  registry()[name] = std::move(provider);
}

FeatureVector extract_features(const Document& doc, const FeatureConfig& config) {
  DocumentStats stats;
  stats.tokens = tokenize(doc.text);
  if (stats.tokens.empty()) {
    throw Error("document '" + doc.id + "' has an empty token stream");
  }
  stats.extra_vowels = config.extra_vowels;
  for (const auto& sentence : split_sentences(doc.text)) {
    const auto sent_tokens = tokenize(sentence);
    if (!sent_tokens.empty()) stats.sentence_token_counts.push_back(sent_tokens.size());
  }
  if (stats.sentence_token_counts.empty()) {
    stats.sentence_token_counts.push_back(stats.tokens.size());
  }

  const std::vector<std::string>& names =
      config.enabled.empty() ? default_feature_names() : config.enabled;

  FeatureVector fv;
  fv.doc_id = doc.id;
  fv.names = names;
  fv.values.reserve(names.size());
  for (const auto& name : names) {
    const auto it = registry().find(name);
    const double value =
        it != registry().end() ? it->second(stats) : builtin_feature(name, stats);
    if (!std::isfinite(value)) {
      throw Error("feature '" + name + "' is non-finite for document '" + doc.id + "'");
    }
    fv.values.push_back(value);
  }
  return fv;
}

Scaler fit_scaler(const std::vector<FeatureVector>& features) {
  if (features.empty()) throw Error("fit_scaler: empty feature list");
  const auto& names = features.front().names;
  const std::size_t arity = features.front().values.size();
  for (const auto& fv : features) {
    if (fv.names != names || fv.values.size() != arity) {
      throw Error("fit_scaler: inconsistent feature ordering (document '" +
                  fv.doc_id + "')");
    }
  }

  Scaler scaler;
  scaler.means.assign(arity, 0.0);
  scaler.stddevs.assign(arity, 0.0);
  const double n = static_cast<double>(features.size());
  for (const auto& fv : features) {
    for (std::size_t f = 0; f < arity; ++f) scaler.means[f] += fv.values[f];
  }
  for (std::size_t f = 0; f < arity; ++f) scaler.means[f] /= n;
  for (const auto& fv : features) {
    for (std::size_t f = 0; f < arity; ++f) {
      const double d = fv.values[f] - scaler.means[f];
      scaler.stddevs[f] += d * d;
    }
  }
  for (std::size_t f = 0; f < arity; ++f) {
    scaler.stddevs[f] = std::sqrt(scaler.stddevs[f] / n); // population stddev
  }
  return scaler;
}

FeatureVector transform(const Scaler& scaler, const FeatureVector& fv) {
  if (fv.values.size() != scaler.means.size()) {
    throw Error("transform: arity mismatch (" + std::to_string(fv.values.size()) +
                " vs " + std::to_string(scaler.means.size()) + ")");
  }
  FeatureVector out = fv;
  for (std::size_t f = 0; f < out.values.size(); ++f) {
    out.values[f] = scaler.stddevs[f] > 0.0
                        ? (fv.values[f] - scaler.means[f]) / scaler.stddevs[f]
                        : 0.0;
  }
  return out;
}

} // namespace readability
