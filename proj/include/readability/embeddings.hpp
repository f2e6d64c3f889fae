#ifndef READABILITY_EMBEDDINGS_HPP
#define READABILITY_EMBEDDINGS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace readability {

// Token -> dense vector map providing the Euclidean ground cost between
// words. Immutable after load; concurrent readers are safe.
class EmbeddingTable {
public:
  EmbeddingTable(std::size_t dim, std::vector<std::string> tokens,
                 std::vector<double> vectors);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }

  std::optional<std::uint32_t> lookup(const std::string& token) const;
  const std::string& token(std::uint32_t index) const;

  std::span<const double> row(std::uint32_t index) const;

  // Rescales every vector to unit L2 norm. Zero vectors are left as-is.
  void l2_normalize();

private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> vocab_;
  std::vector<double> vectors_; // row-major, size() * dim_
};

struct VecLoadOptions {
  std::optional<std::size_t> max_vocab; // keep only the first N entries
  bool l2_normalize = false;            // unit-normalize vectors after load
};

// Reads a fastText-style text ".vec" file: a "<count> <dim>" header line,
// then one "token v1 .. vdim" row per line. LF and CRLF both accepted.
// Duplicate tokens keep the first occurrence. Values are parsed as doubles.
EmbeddingTable load_vec(const std::filesystem::path& path,
                        const VecLoadOptions& options = {});

// Euclidean distance between the vectors of tokens i and j.
double ground_cost(const EmbeddingTable& table, std::uint32_t i, std::uint32_t j);

class NBowVector; // corpus.hpp

// Dense |support(a)| x |support(b)| matrix of ground costs, row-major.
std::vector<double> cost_matrix(const EmbeddingTable& table, const NBowVector& a,
                                const NBowVector& b);

} // namespace readability

#endif
