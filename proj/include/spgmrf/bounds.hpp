#pragma once

#include <span>
#include <vector>

#include "spgmrf/gibbs.hpp"
#include "spgmrf/model.hpp"

namespace spgmrf {

/**
 * Computable upper bound on the single-site influence structure of a
 * binary pairwise model, plus the sweep matrix built from it. U and B are
 * dense p x p, row-major. spectral_proxy estimates ||U||_2 by power
 * iteration; when it is >= 1 the mixing bound need not shrink with more
 * sweeps and consumers should cap tau.
 */
struct InfluenceBound {
  int p = 0;
  std::vector<double> U;
  std::vector<double> B;
  double spectral_proxy = 0.0;

  bool divergent() const { return spectral_proxy >= 1.0; }
};

/// Everything the per-iteration error bound produces.
struct BoundReport {
  int tau = 0;
  double grand_sum = 0.0;       // total mass of B^tau
  double asym_bound = 0.0;      // 2 sqrt(m) * grand_sum
  double nonasym_bound = 0.0;   // adds the concentration radius
  double confidence = 0.0;      // 1 - 2 * sum(beta_j); may be <= 0
  std::vector<double> eps;      // per-feature concentration radii
  bool overflow = false;        // grand sum left double range
  bool bound_divergent = false; // spectral_proxy >= 1
  bool confidence_warning = false;
};

/**
 * Worst-case influence of site j on the conditional law of site i,
 * maximized in closed form over the reachable range of the other sites'
 * contribution. Diagonal entries are zero: a resampled site ignores its
 * own previous value.
 */
InfluenceBound influence_matrix(const ModelParams& model);

/// B = B_p ... B_1 where B_i is the identity with row i replaced by row i
/// of U. Encodes one full ascending-order sweep.
std::vector<double> b_product(const std::vector<double>& U, int p);

/// Sum of all entries of B^tau via tau matrix-vector products against the
/// all-ones vector; B^tau itself is never formed.
double grand_sum_pow(const std::vector<double>& B, int p, int tau);

/// Incremental grand sums of B^tau for tau = 1, 2, ...; advances by one
/// sweep-equivalent per call using only U (O(p^2) per step).
class GrandSumTracker {
public:
  explicit GrandSumTracker(const InfluenceBound& bound);
  void advance();
  int tau() const { return tau_; }
  double value() const;

private:
  const std::vector<double>* U_;
  int p_;
  int tau_ = 0;
  std::vector<double> v_;
};

/// 2 sqrt(m) * grand_sum(B^tau): bound on the expected-moment error norm.
double asym_bound(const InfluenceBound& bound, int m, int tau);
double asym_bound(const ModelParams& model, int tau);

/// Variance-adaptive concentration radius for one 0/1 feature mean over q
/// independent chains: 2(sqrt(V ln(2/b)/(2q)) + 7 ln(2/b)/(3(q-1))).
double epsilon_j(double variance, int q, double beta);

/// Uniform allocation beta_j = beta_total / (2m), giving overall
/// confidence 1 - beta_total.
std::vector<double> uniform_betas(double beta_total, int m);

/// High-probability bound on the realized gradient-error norm.
BoundReport nonasym_bound(const InfluenceBound& bound, int m, int tau,
                          const GradEstimate& grad, std::span<const double> betas);
BoundReport nonasym_bound(const ModelParams& model, int tau, const GradEstimate& grad,
                          std::span<const double> betas);

}  // namespace spgmrf
