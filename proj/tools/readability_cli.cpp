// Command-line front end for the readability toolkit: training, label
// correction, cross-validated evaluation, direct WMD queries, the
// Mann-Whitney U test, and synthetic fixture generation.
//
// Exit codes: 0 success, 1 runtime failure, 2 config/usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "readability/classifier.hpp"
#include "readability/config.hpp"
#include "readability/corpus.hpp"
#include "readability/embeddings.hpp"
#include "readability/error.hpp"
#include "readability/eval.hpp"
#include "readability/postprocess.hpp"
#include "readability/synthetic.hpp"
#include "readability/wmd.hpp"

namespace {

using nlohmann::json;
using namespace readability;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword file: " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

EmbeddingTable load_embeddings(const RunConfig& config) {
  VecLoadOptions options;
  options.max_vocab = config.max_vocab;
  options.l2_normalize = config.l2_normalize_embeddings;
  return load_vec(config.embeddings_path, options);
}

std::pair<std::vector<FeatureVector>, std::vector<int>> corpus_features(
    const LeveledCorpus& corpus, const FeatureConfig& fc) {
  std::vector<FeatureVector> features;
  std::vector<int> labels;
  features.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    features.push_back(extract_features(doc, fc));
    labels.push_back(doc.level);
  }
  return {std::move(features), std::move(labels)};
}

int cmd_train(const std::string& config_path, std::string out_path) {
  const auto config = load_run_config(config_path);
  const auto corpus = load_corpus(config.corpus_path);
  auto [features, labels] = corpus_features(corpus, config.features);

  const auto model = train(features, labels, config.hyper, config.seed);

  std::vector<int> pred;
  pred.reserve(features.size());
  for (const auto& fv : features) pred.push_back(predict(model, fv));
  const double train_accuracy = accuracy(pred, labels);

  std::filesystem::create_directories(config.output_dir);
  if (out_path.empty()) out_path = (config.output_dir / "model.bin").string();
  save_model(model, out_path);

  json log{{"model_path", out_path},
           {"class_labels", model.class_labels},
           {"feature_names", model.feature_names},
           {"hyperparameters",
            {{"l2", model.hyper.l2},
             {"max_iter", model.hyper.max_iter},
             {"tol", model.hyper.tol}}},
           {"seed", model.seed},
           {"train_accuracy", train_accuracy},
           {"documents", corpus.documents.size()}};
  const auto log_path = config.output_dir / "train_log.json";
  std::ofstream log_out(log_path, std::ios::binary);
  log_out << log.dump(2) << '\n';
  std::cout << log.dump(2) << std::endl;
  return 0;
}

json correction_to_json(const CorrectionResult& r) {
  json counts = json::object();
  for (const auto& [level, count] : r.vote.counts) {
    counts[std::to_string(level)] = count;
  }
  json scores = json::object();
  for (const auto& [level, score] : r.vote.class_scores) {
    scores[std::to_string(level)] = score;
  }
  json neighbors = json::array();
  for (const auto& n : r.neighbors) {
    json entry{{"id", n.doc_id}, {"level", n.gold_level}};
    if (n.wmd_distance) {
      entry["wmd"] = *n.wmd_distance;
    } else {
      entry["wmd"] = nullptr;
    }
    neighbors.push_back(std::move(entry));
  }
  return {{"id", r.doc_id},
          {"base_prediction", r.base_prediction},
          {"corrected_label", r.corrected_level},
          {"vote_counts", counts},
          {"tie_broken", r.vote.tie_broken},
          {"class_scores", scores},
          {"neighbors", neighbors},
          {"target_index", r.target_index},
          {"shelf_size", r.shelf_size}};
}

int cmd_assess(const std::string& config_path, const std::string& model_path,
               const std::string& input_path, std::string out_path) {
  const auto config = load_run_config(config_path);
  const auto model = load_model(model_path);
  const auto corpus = load_corpus(config.corpus_path);
  const auto table = load_embeddings(config);
  std::unordered_set<std::string> stopwords;
  if (config.stopwords_path) stopwords = load_stopwords(*config.stopwords_path);

  const Corrector corrector(model, corpus, table, config.features, config.mode,
                            config.window, std::move(stopwords));

  std::ifstream in(input_path);
  if (!in) throw Error("cannot open input file: " + input_path);

  std::ostream* out = &std::cout;
  std::ofstream out_file;
  if (!out_path.empty()) {
    out_file.open(out_path, std::ios::binary);
    if (!out_file) throw Error("cannot write report file: " + out_path);
    out = &out_file;
  }

  std::size_t succeeded = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Document doc;
    try {
      const auto j = json::parse(line);
      doc.id = j.at("id").get<std::string>();
      doc.text = j.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError("input line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      const auto result = corrector.correct(doc);
      *out << correction_to_json(result).dump() << '\n';
      ++succeeded;
    } catch (const Error& e) {
      json row{{"id", doc.id}, {"error", e.what()}};
      *out << row.dump() << '\n';
    }
  }
  if (line_no == 0) throw Error("input file has no documents: " + input_path);
  return succeeded > 0 ? 0 : 1;
}

int cmd_evaluate(const std::string& config_path, std::string out_path) {
  const auto config = load_run_config(config_path);
  const auto corpus = load_corpus(config.corpus_path);
  const auto table = load_embeddings(config);

  EvalConfig eval_config;
  eval_config.k = config.k;
  eval_config.window = config.window;
  eval_config.features = config.features;
  eval_config.hyper = config.hyper;

  const auto report = cross_validate(corpus, table, eval_config, config.seed);

  std::filesystem::create_directories(config.output_dir);
  if (out_path.empty()) out_path = (config.output_dir / "eval_report.json").string();
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write report file: " + out_path);
  out << report_to_json(report).dump(2) << '\n';

  std::cout << report_table(report);
  return 0;
}

int cmd_wmd(const std::string& vec_path, const std::string& doc_a_path,
            const std::string& doc_b_path, bool with_plan) {
  const auto table = load_vec(vec_path);
  const auto nbow_a = to_nbow(tokenize(read_text_file(doc_a_path)), table, doc_a_path);
  const auto nbow_b = to_nbow(tokenize(read_text_file(doc_b_path)), table, doc_b_path);

  const auto result = wmd(nbow_a, nbow_b, table, with_plan);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", result.distance);
  std::cout << buf << '\n';
  if (with_plan && result.plan) {
    for (const auto& flow : result.plan->flows) {
      std::snprintf(buf, sizeof(buf), "%.9f", flow.amount);
      std::cout << table.token(nbow_a.token_ids[flow.source]) << ' '
                << table.token(nbow_b.token_ids[flow.dest]) << ' ' << buf << '\n';
    }
  }
  return 0;
}

int cmd_utest(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error("cannot open CSV file: " + csv_path);
  std::vector<double> a, b;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("CSV line " + std::to_string(line_no) + ": expected two columns");
    }
    const std::string fa = line.substr(0, comma);
    const std::string fb = line.substr(comma + 1);
    auto parse_into = [&](const std::string& field, std::vector<double>& column) {
      if (field.empty()) return;
      try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        column.push_back(v);
      } catch (const std::exception&) {
        if (line_no == 1) return; // tolerate a header line
        throw ParseError("CSV line " + std::to_string(line_no) + ": bad number '" +
                         field + "'");
      }
    };
    parse_into(fa, a);
    parse_into(fb, b);
  }
  const auto result = mann_whitney_u(a, b);
  json out{{"u", result.u_statistic},
           {"z", result.z_statistic},
           {"p_two_sided", result.p_value_two_sided},
           {"n1", result.n1},
           {"n2", result.n2},
           {"mean_a", result.mean_a},
           {"mean_b", result.mean_b}};
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_synth(const SynthSpec& spec, const std::string& corpus_path,
              const std::string& vec_path) {
  const auto fixture = generate_fixture(spec);
  write_fixture(fixture, corpus_path, vec_path);
  std::cout << "wrote " << fixture.corpus.documents.size() << " documents to "
            << corpus_path << " and " << fixture.table.size() << " vectors to "
            << vec_path << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Readability assessment with WMD-based label correction"};
  app.require_subcommand(1);

  std::string config_path, model_path, input_path, out_path;
  std::string vec_path, doc_a_path, doc_b_path, csv_path, corpus_out, vec_out;
  bool with_plan = false;
  SynthSpec spec;

  auto* train_cmd = app.add_subcommand("train", "Train the probabilistic classifier");
  train_cmd->add_option("--config", config_path, "Run config JSON")->required();
  train_cmd->add_option("--out", out_path, "Model output path");

  auto* assess_cmd =
      app.add_subcommand("assess", "Correct labels for unlabeled documents");
  assess_cmd->add_option("--config", config_path, "Run config JSON")->required();
  assess_cmd->add_option("--model", model_path, "Trained model file")->required();
  assess_cmd->add_option("--input", input_path, "JSONL of documents to assess")
      ->required();
  assess_cmd->add_option("--out", out_path, "Report JSONL output path");

  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validated comparison of "
                                                  "base, vote-only and wmd modes");
  eval_cmd->add_option("--config", config_path, "Run config JSON")->required();
  eval_cmd->add_option("--out", out_path, "Report JSON output path");

  auto* wmd_cmd = app.add_subcommand("wmd", "Word Mover's Distance between two texts");
  wmd_cmd->add_option("--embeddings", vec_path, ".vec embeddings file")->required();
  wmd_cmd->add_option("doc_a", doc_a_path, "First text file")->required();
  wmd_cmd->add_option("doc_b", doc_b_path, "Second text file")->required();
  wmd_cmd->add_flag("--plan", with_plan, "Print token-to-token flow triples");

  auto* utest_cmd =
      app.add_subcommand("utest", "Two-sample Mann-Whitney U test from a CSV");
  utest_cmd->add_option("--input", csv_path, "CSV with two score columns")->required();

  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic corpus and embeddings");
  synth_cmd->add_option("--classes", spec.classes, "Number of classes");
  synth_cmd->add_option("--docs-per-class", spec.docs_per_class, "Documents per class");
  synth_cmd->add_option("--vocab-per-class", spec.vocab_per_class, "Cluster vocabulary");
  synth_cmd->add_option("--dim", spec.dim, "Embedding dimension");
  synth_cmd->add_option("--noise", spec.noise_rate, "Label-independent noise rate");
  synth_cmd->add_option("--seed", spec.seed, "Random seed")->required();
  synth_cmd->add_option("--out-corpus", corpus_out, "Corpus JSONL path")->required();
  synth_cmd->add_option("--out-embeddings", vec_out, ".vec path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(config_path, out_path);
    if (assess_cmd->parsed()) return cmd_assess(config_path, model_path, input_path, out_path);
    if (eval_cmd->parsed()) return cmd_evaluate(config_path, out_path);
    if (wmd_cmd->parsed()) return cmd_wmd(vec_path, doc_a_path, doc_b_path, with_plan);
    if (utest_cmd->parsed()) return cmd_utest(csv_path);
    if (synth_cmd->parsed()) return cmd_synth(spec, corpus_out, vec_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
