#pragma once

#include <vector>

#include "spgmrf/model.hpp"
#include "spgmrf/parallel.hpp"

namespace spgmrf {

/// Enumeration over all 2^p states is allowed up to this p.
inline constexpr int kEnumCap = 20;
/// Dense 2^p x 2^p sweep kernels are materialized only up to this p.
inline constexpr int kKernelCap = 12;

/// Full distribution over states, indexed by the little-endian encoding.
struct ExactDistribution {
  int p = 0;
  std::vector<double> probs;
};

double log_partition(const ModelParams& model, Exec ex = Exec::parallel);

ExactDistribution exact_distribution(const ModelParams& model, Exec ex = Exec::parallel);

/// E_theta psi(x) by enumeration; every component lies in [0,1].
std::vector<double> exact_moments(const ModelParams& model, Exec ex = Exec::parallel);

/// exact_moments - empirical moments of the data.
std::vector<double> exact_gradient(const ModelParams& model, const Dataset& data,
                                   Exec ex = Exec::parallel);

/// -theta . E_X psi + A(theta) + lambda * ||theta||_1.
double exact_objective(const ModelParams& model, const Dataset& data, double lambda,
                       Exec ex = Exec::parallel);

/**
 * Dense one-sweep transition matrix of the systematic-scan sampler
 * (sites resampled in order 0..p-1), row-major: K[x*2^p + y] is the
 * probability of landing in y after one full sweep from x.
 */
std::vector<double> gibbs_sweep_kernel(const ModelParams& model, Exec ex = Exec::parallel);

/// Push a distribution over states through one systematic-scan sweep,
/// in place. Works for any p <= kEnumCap without materializing the kernel.
void sweep_distribution(const ModelParams& model, std::vector<double>& mu);

/// E_mu psi for a distribution over states.
std::vector<double> distribution_moments(const ModelParams& model,
                                         const std::vector<double>& mu);

/// Total variation distance between the tau-sweep chain law started at x0
/// and the stationary distribution. tau = 0 gives 1 - P(x0).
double exact_tv_after_tau(const ModelParams& model, const Assignment& x0, int tau);

/// || E[psi(x_tau)] - E_theta psi ||_2 for a chain started from mu0.
double expected_error_norm_from(const ModelParams& model, std::vector<double> mu0, int tau);

}  // namespace spgmrf
