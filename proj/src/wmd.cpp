#include "readability/wmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "readability/error.hpp"

namespace readability {

namespace {

constexpr double kReducedCostTol = 1e-9;

// Flow value with a symbolic epsilon component. Every supply row carries one
// unit of epsilon, which keeps basic flows lexicographically positive and
// rules out cycling on degenerate (equal-weight) instances. The numeric part
// is never touched by the perturbation, so marginals and the objective come
// out exact.
struct LexValue {
  double num = 0.0;
  long long eps = 0;

  friend bool operator<(const LexValue& a, const LexValue& b) {
    if (a.num != b.num) return a.num < b.num;
    return a.eps < b.eps;
  }
  LexValue& operator-=(const LexValue& o) {
    num -= o.num;
    eps -= o.eps;
    return *this;
  }
  LexValue& operator+=(const LexValue& o) {
    num += o.num;
    eps += o.eps;
    return *this;
  }
};

struct BasicCell {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  LexValue flow;
};

class TransportSimplex {
public:
  TransportSimplex(std::span<const double> costs, std::span<const double> supply,
                   std::span<const double> demand)
      : costs_(costs),
        m_(supply.size()),
        n_(demand.size()),
        cell_at_(m_ * n_, -1),
        u_(m_),
        v_(n_) {
    northwest_corner(supply, demand);
  }

  WmdResult solve(bool want_plan) {
    const std::size_t cap = 100 * (m_ + n_);
    std::size_t pivots = 0;
    for (;;) {
      compute_potentials();
      const auto entering = most_negative_reduced_cost();
      if (!entering) break;
      if (pivots >= cap) {
        throw SolverLimitError(cap, std::to_string(m_) + "x" + std::to_string(n_) +
                                        " transport instance");
      }
      pivot(entering->first, entering->second);
      ++pivots;
    }

    WmdResult result;
    result.stats.iterations = pivots;
    result.stats.basic_cells = basis_.size();
    double objective = 0.0;
    for (const auto& cell : basis_) {
      objective += cell.flow.num * cost(cell.row, cell.col);
    }
    result.distance = objective;
    if (want_plan) {
      TransportPlan plan;
      plan.objective = objective;
      for (const auto& cell : basis_) {
        if (cell.flow.num > 0.0) {
          plan.flows.push_back({cell.row, cell.col, cell.flow.num});
        }
      }
      result.plan = std::move(plan);
    }
    return result;
  }

private:
  double cost(std::uint32_t i, std::uint32_t j) const { return costs_[i * n_ + j]; }

  void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    basis_.reserve(m_ + n_ - 1);
    std::uint32_t i = 0, j = 0;
    LexValue rs{supply[0], 1};
    LexValue rd{demand[0], n_ == 1 ? static_cast<long long>(m_) : 0};
    while (true) {
      BasicCell cell;
      cell.row = i;
      cell.col = j;
      if (i == m_ - 1 && j == n_ - 1) {
        cell.flow = rs;
        push_cell(cell);
        break;
      }
      // Exhausted dimensions force the walk direction; rounding noise in
      // the running remainders must not push an index past its end.
      const bool advance_row = j + 1 == n_ || (i + 1 < m_ && rs < rd);
      if (advance_row) {
        cell.flow = rs;
        rd -= rs;
        push_cell(cell);
        ++i;
        rs = {supply[i], 1};
      } else {
        cell.flow = rd;
        rs -= rd;
        push_cell(cell);
        ++j;
        rd = {demand[j], j == n_ - 1 ? static_cast<long long>(m_) : 0};
      }
    }
  }

  void push_cell(const BasicCell& cell) {
    cell_at_[cell.row * n_ + cell.col] = static_cast<int>(basis_.size());
    basis_.push_back(cell);
  }

  // u_i + v_j = c_ij on basic cells; tree traversal from row 0.
  void compute_potentials() {
    row_cells_.assign(m_, {});
    col_cells_.assign(n_, {});
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      row_cells_[basis_[k].row].push_back(k);
      col_cells_[basis_[k].col].push_back(k);
    }
    std::fill(u_.begin(), u_.end(), std::numeric_limits<double>::quiet_NaN());
    std::fill(v_.begin(), v_.end(), std::numeric_limits<double>::quiet_NaN());
    u_[0] = 0.0;
    stack_.assign(1, 0); // node ids: rows are [0, m), cols are [m, m+n)
    while (!stack_.empty()) {
      const std::size_t node = stack_.back();
      stack_.pop_back();
      if (node < m_) {
        for (const std::size_t k : row_cells_[node]) {
          const auto& cell = basis_[k];
          if (std::isnan(v_[cell.col])) {
            v_[cell.col] = cost(cell.row, cell.col) - u_[cell.row];
            stack_.push_back(m_ + cell.col);
          }
        }
      } else {
        const std::size_t col = node - m_;
        for (const std::size_t k : col_cells_[col]) {
          const auto& cell = basis_[k];
          if (std::isnan(u_[cell.row])) {
            u_[cell.row] = cost(cell.row, cell.col) - v_[cell.col];
            stack_.push_back(cell.row);
          }
        }
      }
    }
  }

  std::optional<std::pair<std::uint32_t, std::uint32_t>> most_negative_reduced_cost()
      const {
    double best = -kReducedCostTol;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> entering;
    for (std::uint32_t i = 0; i < m_; ++i) {
      for (std::uint32_t j = 0; j < n_; ++j) {
        if (cell_at_[i * n_ + j] >= 0) continue;
        const double reduced = cost(i, j) - u_[i] - v_[j];
        if (reduced < best) {
          best = reduced;
          entering = {i, j};
        }
      }
    }
    return entering;
  }

  // Unique cycle closed by the entering cell: tree path from the entering
  // row node to the entering column node, alternating -,+,-,... after the
  // entering cell's +.
  void pivot(std::uint32_t enter_row, std::uint32_t enter_col) {
    const std::size_t num_nodes = m_ + n_;
    parent_cell_.assign(num_nodes, -1);
    parent_node_.assign(num_nodes, SIZE_MAX);
    visited_.assign(num_nodes, false);

    stack_.assign(1, enter_row);
    visited_[enter_row] = true;
    const std::size_t target = m_ + enter_col;
    while (!stack_.empty()) {
      const std::size_t node = stack_.back();
      stack_.pop_back();
      if (node == target) break;
      const auto& adjacent = node < m_ ? row_cells_[node] : col_cells_[node - m_];
      for (const std::size_t k : adjacent) {
        const auto& cell = basis_[k];
        const std::size_t other = node < m_ ? m_ + cell.col : cell.row;
        if (!visited_[other]) {
          visited_[other] = true;
          parent_cell_[other] = static_cast<int>(k);
          parent_node_[other] = node;
          stack_.push_back(other);
        }
      }
    }

    // Walk the path back from the column node; odd positions lose flow.
    cycle_.clear();
    for (std::size_t node = target; node != enter_row; node = parent_node_[node]) {
      cycle_.push_back(static_cast<std::size_t>(parent_cell_[node]));
    }

    // Minimum over losing cells (positions 0, 2, ... from the column end).
    LexValue theta{std::numeric_limits<double>::infinity(), 0};
    std::size_t leaving = SIZE_MAX;
    for (std::size_t p = 0; p < cycle_.size(); p += 2) {
      const auto& flow = basis_[cycle_[p]].flow;
      if (flow < theta) {
        theta = flow;
        leaving = cycle_[p];
      }
    }

    for (std::size_t p = 0; p < cycle_.size(); ++p) {
      if (p % 2 == 0) {
        basis_[cycle_[p]].flow -= theta;
      } else {
        basis_[cycle_[p]].flow += theta;
      }
    }

    // Replace the leaving cell with the entering one.
    auto& slot = basis_[leaving];
    cell_at_[slot.row * n_ + slot.col] = -1;
    slot.row = enter_row;
    slot.col = enter_col;
    slot.flow = theta;
    cell_at_[enter_row * n_ + enter_col] = static_cast<int>(leaving);
  }

  std::span<const double> costs_;
  std::size_t m_;
  std::size_t n_;
  std::vector<BasicCell> basis_;
  std::vector<int> cell_at_; // m x n -> basis index or -1
  std::vector<double> u_;
  std::vector<double> v_;
  std::vector<std::vector<std::size_t>> row_cells_;
  std::vector<std::vector<std::size_t>> col_cells_;
  std::vector<std::size_t> stack_;
  std::vector<int> parent_cell_;
  std::vector<std::size_t> parent_node_;
  std::vector<bool> visited_;
  std::vector<std::size_t> cycle_;
};

} // namespace

WmdResult solve_transport(std::span<const double> costs, std::span<const double> supply,
                          std::span<const double> demand, bool want_plan) {
  if (supply.empty() || demand.empty()) throw Error("transport: empty marginals");
  if (costs.size() != supply.size() * demand.size()) {
    throw Error("transport: cost matrix size mismatch");
  }
  double supply_sum = 0.0, demand_sum = 0.0;
  for (const double s : supply) {
    if (!(s >= 0.0)) throw Error("transport: negative supply");
    supply_sum += s;
  }
  for (const double d : demand) {
    if (!(d >= 0.0)) throw Error("transport: negative demand");
    demand_sum += d;
  }
  if (std::abs(supply_sum - demand_sum) > 1e-9 * std::max(1.0, supply_sum)) {
    throw Error("transport: marginals are not balanced");
  }
  TransportSimplex simplex(costs, supply, demand);
  return simplex.solve(want_plan);
}

WmdResult wmd(const NBowVector& a, const NBowVector& b, const EmbeddingTable& table,
              bool want_plan) {
  const auto costs = cost_matrix(table, a, b);
  return solve_transport(costs, a.weights, b.weights, want_plan);
}

double word_centroid_distance(const NBowVector& a, const NBowVector& b,
                              const EmbeddingTable& table) {
  const std::size_t dim = table.dim();
  std::vector<double> diff(dim, 0.0);
  for (std::size_t i = 0; i < a.support(); ++i) {
    const auto x = table.row(a.token_ids[i]);
    for (std::size_t d = 0; d < dim; ++d) diff[d] += a.weights[i] * x[d];
  }
  for (std::size_t j = 0; j < b.support(); ++j) {
    const auto x = table.row(b.token_ids[j]);
    for (std::size_t d = 0; d < dim; ++d) diff[d] -= b.weights[j] * x[d];
  }
  double sum = 0.0;
  for (const double c : diff) sum += c * c;
  return std::sqrt(sum);
}

double relaxed_wmd(const NBowVector& a, const NBowVector& b,
                   const EmbeddingTable& table) {
  const auto costs = cost_matrix(table, a, b);
  const std::size_t m = a.support();
  const std::size_t n = b.support();

  double from_a = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) best = std::min(best, costs[i * n + j]);
    from_a += a.weights[i] * best;
  }
  double from_b = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) best = std::min(best, costs[i * n + j]);
    from_b += b.weights[j] * best;
  }
  // The one-sided relaxations and the centroid distance are incomparable
  // lower bounds; taking all three keeps RWMD the dominating one.
  return std::max({from_a, from_b, word_centroid_distance(a, b, table)});
}

std::vector<PairwiseEntry> pairwise_wmd(const std::vector<NBowVector>& targets,
                                        const std::vector<NBowVector>& candidates,
                                        const EmbeddingTable& table,
                                        const PairwiseOptions& options) {
  if (targets.empty() || candidates.empty()) {
    throw Error("pairwise_wmd: empty input lists");
  }
  if (options.prune && !options.budgets.empty() &&
      options.budgets.size() != targets.size()) {
    throw Error("pairwise_wmd: budget list must match the target list");
  }
  std::vector<PairwiseEntry> matrix(targets.size() * candidates.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      auto& entry = matrix[t * candidates.size() + c];
      try {
        if (options.prune && !options.budgets.empty()) {
          const double bound = relaxed_wmd(targets[t], candidates[c], table);
          if (bound > options.budgets[t]) {
            entry = {bound, true};
            continue;
          }
        }
        entry = {wmd(targets[t], candidates[c], table).distance, false};
      } catch (const Error& e) {
        throw Error("pairwise_wmd: pair (" + targets[t].doc_id + ", " +
                    candidates[c].doc_id + "): " + e.what());
      }
    }
  }
  return matrix;
}

} // namespace readability
