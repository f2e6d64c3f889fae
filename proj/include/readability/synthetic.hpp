#ifndef READABILITY_SYNTHETIC_HPP
#define READABILITY_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>

#include "readability/corpus.hpp"
#include "readability/embeddings.hpp"

namespace readability {

// Parameters for the self-contained evaluation fixture: per-class vocabulary
// clusters at mutually distant centroids, documents sampling mostly in-class
// tokens, and label-independent surface noise injected at `noise_rate`.
struct SynthSpec {
  int classes = 3;
  int docs_per_class = 30;
  int vocab_per_class = 40;
  int dim = 8;
  double noise_rate = 0.3;
  std::uint64_t seed = 0;
};

struct SynthFixture {
  LeveledCorpus corpus;
  EmbeddingTable table;
};

SynthFixture generate_fixture(const SynthSpec& spec);

// Writes the fixture in the corpus JSONL and embeddings .vec formats;
// byte-identical for a fixed spec. The in-memory fixture matches the files
// exactly (vector components are quantized before table construction).
void write_fixture(const SynthFixture& fixture, const std::filesystem::path& corpus_path,
                   const std::filesystem::path& vec_path);

} // namespace readability

#endif
