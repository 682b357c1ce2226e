#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spgmrf/model.hpp"
#include "spgmrf/optimizer.hpp"

namespace spgmrf {

/// Synthetic generating model plus its edge set (0-based pairs, i < j).
struct GroundTruth {
  ModelParams theta_true;
  std::vector<std::pair<int, int>> edges;
};

/**
 * Random sparse model: each pair is an edge independently with probability
 * edge_prob; edge weights are uniform on [w_low, w_high] with a fair random
 * sign. Node potentials are zero.
 */
GroundTruth generate_ground_truth(int p, double edge_prob, double w_low, double w_high,
                                  std::uint64_t seed);

/// n samples, each the endpoint of its own chain after burn_in sweeps from
/// a uniform random start.
Dataset sample_dataset(const GroundTruth& truth, int n, int burn_in, std::uint64_t seed,
                       Exec ex = Exec::parallel);

/**
 * Ranking quality of |theta_hat| on off-diagonal pairs against the true
 * edge set: area under the ROC curve with midrank tie handling. Throws if
 * the truth has no edges or no non-edges.
 */
double structure_auc(const ModelParams& theta_hat, const GroundTruth& truth);

struct TightnessRow {
  int iter = 0;
  double err_norm = 0.0;
  double bound = 0.0;
};

struct TightnessTrace {
  std::vector<TightnessRow> rows;
  double frac_bound_holds = 0.0;
  bool expectation_based = false;  // err column is ||E delta|| vs realized ||delta||
};

/// Pair the recorded per-iteration error norms with the mixing bound.
/// Requires runs executed with exact instrumentation.
TightnessTrace bound_tightness_trace(const std::vector<IterateRecord>& records,
                                     bool use_expectation);

}  // namespace spgmrf
