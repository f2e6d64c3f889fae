#ifndef READABILITY_WMD_HPP
#define READABILITY_WMD_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "readability/corpus.hpp"
#include "readability/embeddings.hpp"

namespace readability {

// Optimal flow between two mass distributions. Source/dest are positions
// into the supports of the compared nBOW vectors.
struct TransportPlan {
  struct Flow {
    std::uint32_t source;
    std::uint32_t dest;
    double amount;
  };
  std::vector<Flow> flows; // strictly positive amounts only
  double objective = 0.0;
};

struct SolverStats {
  std::size_t iterations = 0;  // simplex pivots
  std::size_t basic_cells = 0; // m + n - 1
};

struct WmdResult {
  double distance = 0.0;
  std::optional<TransportPlan> plan;
  SolverStats stats;
};

// Exact solver for the balanced transportation problem
//   min sum_ij T_ij c_ij   s.t.  T >= 0, row sums = supply, col sums = demand
// by the transportation simplex: northwest-corner start, then u-v pivoting
// to optimality. Degeneracy is handled by a symbolic epsilon-perturbation
// of the supplies, so the returned flows and objective are computed from
// the unperturbed data. `costs` is row-major supply.size() x demand.size().
WmdResult solve_transport(std::span<const double> costs, std::span<const double> supply,
                          std::span<const double> demand, bool want_plan = false);

// Word Mover's Distance: minimum cumulative cost of moving the word mass
// of `a` onto `b`, with Euclidean embedding distance as the ground cost.
WmdResult wmd(const NBowVector& a, const NBowVector& b, const EmbeddingTable& table,
              bool want_plan = false);

// || sum_i a_i x_i - sum_j b_j x_j ||: cheap lower bound on wmd(a, b).
double word_centroid_distance(const NBowVector& a, const NBowVector& b,
                              const EmbeddingTable& table);

// Max of the two one-sided relaxations (each word's mass sent wholly to its
// nearest counterpart). Tighter than the centroid bound, still <= wmd(a, b).
double relaxed_wmd(const NBowVector& a, const NBowVector& b,
                   const EmbeddingTable& table);

struct PairwiseEntry {
  double value = 0.0;  // exact WMD, or the RWMD lower bound when pruned
  bool pruned = false;
};

struct PairwiseOptions {
  bool prune = false;
  std::vector<double> budgets; // per-target distance budget; empty = none
};

// Distance matrix (row-major targets x candidates). With pruning enabled and
// a budget supplied, candidates whose RWMD exceeds the target's budget carry
// the bound and a pruned marker instead of an exact value.
std::vector<PairwiseEntry> pairwise_wmd(const std::vector<NBowVector>& targets,
                                        const std::vector<NBowVector>& candidates,
                                        const EmbeddingTable& table,
                                        const PairwiseOptions& options = {});

} // namespace readability

#endif
