#include "readability/embeddings.hpp"

#include <cmath>
#include <charconv>
#include <fstream>

#include "readability/corpus.hpp"
#include "readability/error.hpp"

namespace readability {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::vector<std::string> tokens,
                               std::vector<double> vectors)
    : dim_(dim), tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (dim_ == 0) throw Error("embedding dimension must be positive");
  if (vectors_.size() != tokens_.size() * dim_) {
    throw Error("embedding matrix size does not match vocabulary");
  }
  vocab_.reserve(tokens_.size());
  for (std::uint32_t i = 0; i < tokens_.size(); ++i) {
    vocab_.emplace(tokens_[i], i);
  }
}

std::optional<std::uint32_t> EmbeddingTable::lookup(const std::string& token) const {
  const auto it = vocab_.find(token);
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

const std::string& EmbeddingTable::token(std::uint32_t index) const {
  if (index >= tokens_.size()) throw Error("token index out of range");
  return tokens_[index];
}

std::span<const double> EmbeddingTable::row(std::uint32_t index) const {
  if (index >= tokens_.size()) throw Error("token index out of range");
  return {vectors_.data() + static_cast<std::size_t>(index) * dim_, dim_};
}

void EmbeddingTable::l2_normalize() {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    double* v = vectors_.data() + i * dim_;
    double norm2 = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) norm2 += v[d] * v[d];
    const double norm = std::sqrt(norm2);
    if (norm > 0.0) {
      for (std::size_t d = 0; d < dim_; ++d) v[d] /= norm;
    }
  }
}

namespace {

// Whitespace-splitting field scanner; avoids istringstream per line.
struct FieldScanner {
  const char* p;
  const char* end;
  bool next(std::string_view& out) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p >= end) return false;
    const char* start = p;
    while (p < end && *p != ' ' && *p != '\t') ++p;
    out = {start, static_cast<std::size_t>(p - start)};
    return true;
  }
};

double parse_double(std::string_view field, std::size_t line_no) {
  double value;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw ParseError("embeddings line " + std::to_string(line_no) +
                     ": bad float '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError("embeddings line " + std::to_string(line_no) +
                     ": non-finite value");
  }
  return value;
}

} // namespace

EmbeddingTable load_vec(const std::filesystem::path& path, const VecLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open embeddings file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("embeddings file is empty: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::size_t count = 0, dim = 0;
  {
    FieldScanner sc{line.data(), line.data() + line.size()};
    std::string_view a, b, extra;
    if (!sc.next(a) || !sc.next(b) || sc.next(extra)) {
      throw ParseError("malformed embeddings header, expected '<count> <dim>'");
    }
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), count);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), dim);
    if (ra.ec != std::errc{} || ra.ptr != a.data() + a.size() ||
        rb.ec != std::errc{} || rb.ptr != b.data() + b.size() || dim == 0) {
      throw ParseError("malformed embeddings header, expected '<count> <dim>'");
    }
  }

  const std::size_t cap = options.max_vocab ? *options.max_vocab : count;
  std::vector<std::string> tokens;
  std::vector<double> vectors;
  std::unordered_map<std::string, std::uint32_t> seen;
  tokens.reserve(std::min(cap, count));
  vectors.reserve(std::min(cap, count) * dim);

  std::size_t line_no = 1;
  while (tokens.size() < cap && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    FieldScanner sc{line.data(), line.data() + line.size()};
    std::string_view tok;
    if (!sc.next(tok)) continue;
    std::string token(tok);
    std::vector<double> row(dim);
    std::string_view field;
    for (std::size_t d = 0; d < dim; ++d) {
      if (!sc.next(field)) {
        throw ParseError("embeddings line " + std::to_string(line_no) + ": expected " +
                         std::to_string(dim) + " values, got " + std::to_string(d));
      }
      row[d] = parse_double(field, line_no);
    }
    if (sc.next(field)) {
      throw ParseError("embeddings line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " values, got more");
    }
    if (seen.count(token)) continue; // duplicates keep the first occurrence
    seen.emplace(token, static_cast<std::uint32_t>(tokens.size()));
    tokens.push_back(std::move(token));
    vectors.insert(vectors.end(), row.begin(), row.end());
  }

  EmbeddingTable table(dim, std::move(tokens), std::move(vectors));
  if (options.l2_normalize) table.l2_normalize();
  return table;
}

double ground_cost(const EmbeddingTable& table, std::uint32_t i, std::uint32_t j) {
  const auto xi = table.row(i);
  const auto xj = table.row(j);
  double sum = 0.0;
  for (std::size_t d = 0; d < xi.size(); ++d) {
    const double diff = xi[d] - xj[d];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

std::vector<double> cost_matrix(const EmbeddingTable& table, const NBowVector& a,
                                const NBowVector& b) {
  const std::size_t m = a.support();
  const std::size_t n = b.support();
  std::vector<double> costs(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      costs[i * n + j] = ground_cost(table, a.token_ids[i], b.token_ids[j]);
    }
  }
  return costs;
}

} // namespace readability
