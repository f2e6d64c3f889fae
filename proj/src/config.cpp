#include "readability/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "readability/error.hpp"

namespace readability {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown config key: " + (section.empty() ? key : section + "." + key));
    }
  }
}

const json* section(const json& root, const std::string& name) {
  if (!root.contains(name)) return nullptr;
  if (!root.at(name).is_object()) {
    throw ConfigError("config section '" + name + "' must be an object");
  }
  return &root.at(name);
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(root, "", {"corpus", "embeddings", "features", "classifier", "eval",
                        "postprocess", "seed", "output_dir"});

  RunConfig config;

  const json* corpus = section(root, "corpus");
  if (!corpus || !corpus->contains("path")) {
    throw ConfigError("missing required config key: corpus.path");
  }
  check_keys(*corpus, "corpus", {"path"});
  config.corpus_path = corpus->at("path").get<std::string>();

  const json* embeddings = section(root, "embeddings");
  if (!embeddings || !embeddings->contains("path")) {
    throw ConfigError("missing required config key: embeddings.path");
  }
  check_keys(*embeddings, "embeddings", {"path", "max_vocab", "l2_normalize"});
  config.embeddings_path = embeddings->at("path").get<std::string>();
  if (embeddings->contains("max_vocab")) {
    const auto v = embeddings->at("max_vocab").get<long long>();
    if (v <= 0) throw ConfigError("embeddings.max_vocab must be positive");
    config.max_vocab = static_cast<std::size_t>(v);
  }
  if (embeddings->contains("l2_normalize")) {
    config.l2_normalize_embeddings = embeddings->at("l2_normalize").get<bool>();
  }

  if (const json* features = section(root, "features")) {
    check_keys(*features, "features", {"enabled", "extra_vowels"});
    if (features->contains("enabled")) {
      config.features.enabled = features->at("enabled").get<std::vector<std::string>>();
    }
    if (features->contains("extra_vowels")) {
      config.features.extra_vowels = features->at("extra_vowels").get<std::string>();
    }
  }

  if (const json* classifier = section(root, "classifier")) {
    check_keys(*classifier, "classifier", {"l2", "max_iter", "tol"});
    if (classifier->contains("l2")) config.hyper.l2 = classifier->at("l2").get<double>();
    if (classifier->contains("max_iter")) {
      config.hyper.max_iter = classifier->at("max_iter").get<int>();
    }
    if (classifier->contains("tol")) config.hyper.tol = classifier->at("tol").get<double>();
    if (config.hyper.l2 < 0.0 || config.hyper.max_iter < 1 || config.hyper.tol <= 0.0) {
      throw ConfigError("classifier: l2 must be >= 0, max_iter >= 1, tol > 0");
    }
  }

  if (const json* eval = section(root, "eval")) {
    check_keys(*eval, "eval", {"k"});
    if (eval->contains("k")) config.k = eval->at("k").get<int>();
    if (config.k < 2) throw ConfigError("eval.k must be >= 2");
  }

  if (const json* post = section(root, "postprocess")) {
    check_keys(*post, "postprocess", {"window", "mode", "stopwords"});
    if (post->contains("window")) config.window = post->at("window").get<int>();
    if (config.window < 1) throw ConfigError("postprocess.window must be >= 1");
    if (post->contains("mode")) {
      const auto mode = post->at("mode").get<std::string>();
      if (mode == "wmd") {
        config.mode = CorrectionMode::kWmd;
      } else if (mode == "vote-only") {
        config.mode = CorrectionMode::kVoteOnly;
      } else {
        throw ConfigError("postprocess.mode must be 'wmd' or 'vote-only', got '" +
                          mode + "'");
      }
    }
    if (post->contains("stopwords")) {
      config.stopwords_path = std::filesystem::path(
          post->at("stopwords").get<std::string>());
    }
  }

  if (!root.contains("seed")) {
    throw ConfigError("missing required config key: seed");
  }
  if (!root.at("seed").is_number_unsigned() && !root.at("seed").is_number_integer()) {
    throw ConfigError("seed must be a nonnegative integer");
  }
  {
    const auto s = root.at("seed").get<long long>();
    if (s < 0) throw ConfigError("seed must be a nonnegative integer");
    config.seed = static_cast<std::uint64_t>(s);
  }

  if (root.contains("output_dir")) {
    config.output_dir = std::filesystem::path(root.at("output_dir").get<std::string>());
  }

  // Validate paths before any work starts.
  if (!std::filesystem::exists(config.corpus_path)) {
    throw ConfigError("corpus.path does not exist: " + config.corpus_path.string());
  }
  if (!std::filesystem::exists(config.embeddings_path)) {
    throw ConfigError("embeddings.path does not exist: " +
                      config.embeddings_path.string());
  }
  if (config.stopwords_path && !std::filesystem::exists(*config.stopwords_path)) {
    throw ConfigError("postprocess.stopwords does not exist: " +
                      config.stopwords_path->string());
  }
  return config;
}

} // namespace readability
