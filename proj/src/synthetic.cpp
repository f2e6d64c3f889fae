#include "readability/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "readability/error.hpp"
#include "readability/rng.hpp"

namespace readability {

namespace {

// The word-length profile grows with the class ordinal; the classifier
// learns it through the word-based surface features. Sentence structure is
// kept class-neutral so the difficulty signal lives on a single axis.
double word_length_profile(int cls) { return 4.0 + 4.0 * cls; }
constexpr int kSentenceLength = 8;

constexpr int kContentTokenLength = 5;
constexpr double kCentroidScale = 10.0;
constexpr double kVectorJitter = 0.5;

double quantize(double v) { return std::round(v * 1e6) / 1e6; }

std::string random_word(Rng& rng, int length) {
  std::string word;
  word.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    word.push_back(static_cast<char>('a' + rng.below(26)));
  }
  return word;
}

} // namespace

SynthFixture generate_fixture(const SynthSpec& spec) {
  if (spec.classes < 2 || spec.docs_per_class < 1 || spec.vocab_per_class < 1 ||
      spec.dim < 1) {
    throw ConfigError("synthetic fixture: counts must be positive (>= 2 classes)");
  }
  if (spec.noise_rate < 0.0 || spec.noise_rate >= 1.0) {
    throw ConfigError("synthetic fixture: noise rate must be in [0, 1)");
  }

  Rng rng(spec.seed);
  const int num_classes = spec.classes;
  const int dim = spec.dim;

  // Per-class vocabulary clusters at mutually distant centroids.
  std::vector<std::string> tokens;
  std::vector<double> vectors;
  std::set<std::string> used;
  std::vector<std::vector<std::string>> class_vocab(num_classes);
  for (int cls = 0; cls < num_classes; ++cls) {
    const int axis = cls % dim;
    const double magnitude = kCentroidScale * (1.0 + static_cast<double>(cls / dim));
    for (int t = 0; t < spec.vocab_per_class; ++t) {
      std::string name = random_word(rng, kContentTokenLength);
      while (!used.insert(name).second) name = random_word(rng, kContentTokenLength);
      class_vocab[cls].push_back(name);
      tokens.push_back(name);
      for (int d = 0; d < dim; ++d) {
        const double base = d == axis ? magnitude : 0.0;
        vectors.push_back(quantize(base + rng.uniform(-kVectorJitter, kVectorJitter)));
      }
    }
  }

  LeveledCorpus corpus;
  corpus.language_tag = "synthetic";
  for (int cls = 0; cls < num_classes; ++cls) corpus.levels.push_back(cls);

  const double word_len_min = word_length_profile(0);
  const double word_len_max = word_length_profile(num_classes - 1);

  for (int cls = 0; cls < num_classes; ++cls) {
    for (int d = 0; d < spec.docs_per_class; ++d) {
      // Label-independent surface noise: with probability noise_rate the
      // document's word-length profile is shifted into the space between
      // class bands (either direction). The vocabulary stays in-class, so
      // the grounding phase can still recover the label.
      const double gap = (word_len_max - word_len_min) /
                         static_cast<double>(num_classes - 1);
      double word_len = word_length_profile(cls) + 0.05 * rng.normal();
      if (rng.uniform() < spec.noise_rate) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        word_len += sign * rng.uniform(0.55, 0.85) * gap;
      }
      word_len = std::clamp(word_len, 2.0, word_len_max + 2.0);

      // Alternate in-class content tokens with length-profiled filler so the
      // surface statistics of clean documents are tight around the profile.
      const int token_count = 50;
      std::vector<std::string> doc_tokens;
      doc_tokens.reserve(static_cast<std::size_t>(token_count));
      for (int t = 0; t < token_count; ++t) {
        if (t % 2 == 0) {
          doc_tokens.push_back(
              class_vocab[cls][rng.below(class_vocab[cls].size())]);
        } else {
          const double raw = word_len + 0.35 * rng.normal();
          const int length = std::clamp(static_cast<int>(std::lround(raw)), 2, 14);
          std::string filler = random_word(rng, length);
          while (used.count(filler)) filler = random_word(rng, length);
          doc_tokens.push_back(std::move(filler));
        }
      }

      std::string text;
      int since_break = 0;
      for (int t = 0; t < token_count; ++t) {
        if (t > 0) text.push_back(' ');
        text += doc_tokens[static_cast<std::size_t>(t)];
        if (++since_break == kSentenceLength) {
          text.push_back('.');
          since_break = 0;
        }
      }
      if (since_break != 0) text.push_back('.');

      Document doc;
      char id[32];
      std::snprintf(id, sizeof(id), "c%d_d%02d", cls, d);
      doc.id = id;
      doc.text = std::move(text);
      doc.level = cls;
      corpus.documents.push_back(std::move(doc));
    }
  }

  return {std::move(corpus),
          EmbeddingTable(static_cast<std::size_t>(dim), std::move(tokens),
                         std::move(vectors))};
}

void write_fixture(const SynthFixture& fixture, const std::filesystem::path& corpus_path,
                   const std::filesystem::path& vec_path) {
  save_corpus(fixture.corpus, corpus_path);

  std::ofstream out(vec_path, std::ios::binary);
  if (!out) throw Error("cannot write embeddings file: " + vec_path.string());
  out << fixture.table.size() << ' ' << fixture.table.dim() << '\n';
  char buf[32];
  for (std::uint32_t i = 0; i < fixture.table.size(); ++i) {
    out << fixture.table.token(i);
    for (const double v : fixture.table.row(i)) {
      std::snprintf(buf, sizeof(buf), " %.6f", v);
      out << buf;
    }
    out << '\n';
  }
}

} // namespace readability
