#ifndef READABILITY_CONFIG_HPP
#define READABILITY_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>

#include "readability/classifier.hpp"
#include "readability/features.hpp"
#include "readability/postprocess.hpp"

namespace readability {

// Run configuration shared by the CLI commands. The key names and their
// semantics are the compatibility surface; the file itself is JSON with one
// object per section (corpus.path -> {"corpus": {"path": ...}}).
struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path embeddings_path;
  std::optional<std::size_t> max_vocab;
  bool l2_normalize_embeddings = false;
  FeatureConfig features;
  Hyperparameters hyper;
  int k = 5;
  int window = 3;
  CorrectionMode mode = CorrectionMode::kWmd;
  std::optional<std::filesystem::path> stopwords_path;
  std::uint64_t seed = 0; // required in the file; no wall-clock defaults
  std::filesystem::path output_dir = ".";
};

// Parses and validates a config file. Throws ConfigError naming the
// offending section.key; paths are checked for existence up front.
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace readability

#endif
