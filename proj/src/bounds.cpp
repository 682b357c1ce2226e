#include "spgmrf/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace spgmrf {

namespace {

/// |e^{-xi} - 1| * b / ((1 + b e^{-xi})(1 + b)): the conditional-law shift
/// at site i when site j flips, given the rest-of-row weight b. Shared by
/// the bound and by the exhaustive checks in the tests.
double influence_at(double xi_ij, double b) {
  const double e = std::exp(-xi_ij);
  return std::abs(e - 1.0) * b / ((1.0 + b * e) * (1.0 + b));
}

double spectral_norm_estimate(const std::vector<double>& U, int p) {
  // Power iteration on U^T U from the all-ones direction. U is entrywise
  // nonnegative, so the principal direction is reachable from it.
  std::vector<double> v(p, 1.0 / std::sqrt(static_cast<double>(p)));
  std::vector<double> w(p), z(p);
  double sigma2 = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < p; ++i) {
      double s = 0.0;
      for (int k = 0; k < p; ++k) s += U[static_cast<std::size_t>(i) * p + k] * v[k];
      w[i] = s;
    }
    for (int k = 0; k < p; ++k) {
      double s = 0.0;
      for (int i = 0; i < p; ++i) s += U[static_cast<std::size_t>(i) * p + k] * w[i];
      z[k] = s;
    }
    double norm = 0.0;
    for (double x : z) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    sigma2 = norm;  // Rayleigh estimate of lambda_max(U^T U) at unit v
    for (int k = 0; k < p; ++k) v[k] = z[k] / norm;
  }
  return std::sqrt(sigma2);
}

}  // namespace

InfluenceBound influence_matrix(const ModelParams& model) {
  const int p = model.p();
  InfluenceBound out;
  out.p = p;
  out.U.assign(static_cast<std::size_t>(p) * p, 0.0);

  for (int i = 0; i < p; ++i) {
    const auto row = model.xi_row(i);
    // Split the off-row couplings once: the reachable weight interval for
    // row i is [r, s] with r at all positive couplings active and s at all
    // negative couplings active.
    double pos_sum = 0.0, neg_sum = 0.0;
    for (int k = 0; k < p; ++k) {
      if (k == i) continue;
      if (row[k] > 0.0) pos_sum += row[k];
      else neg_sum += row[k];
    }
    for (int j = 0; j < p; ++j) {
      if (j == i) continue;
      const double xi_ij = row[j];
      double pos = pos_sum, neg = neg_sum;
      if (xi_ij > 0.0) pos -= xi_ij;
      else neg -= xi_ij;
      const double r = std::exp(-row[i] - pos);
      const double s = std::exp(-row[i] - neg);
      const double b_star = std::max(r, std::min(s, std::exp(xi_ij / 2.0)));
      out.U[static_cast<std::size_t>(i) * p + j] = influence_at(xi_ij, b_star);
    }
  }
  out.B = b_product(out.U, p);
  out.spectral_proxy = spectral_norm_estimate(out.U, p);
  return out;
}

std::vector<double> b_product(const std::vector<double>& U, int p) {
  if (U.size() != static_cast<std::size_t>(p) * p)
    throw std::invalid_argument("b_product: U must be p x p");
  // M starts as the identity; applying B_i replaces row i of M with
  // (row i of U) * M. Ascending i yields B_p ... B_1.
  std::vector<double> M(static_cast<std::size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i) M[static_cast<std::size_t>(i) * p + i] = 1.0;
  std::vector<double> tmp(p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      double s = 0.0;
      for (int k = 0; k < p; ++k)
        s += U[static_cast<std::size_t>(i) * p + k] * M[static_cast<std::size_t>(k) * p + j];
      tmp[j] = s;
    }
    std::copy(tmp.begin(), tmp.end(), M.begin() + static_cast<std::size_t>(i) * p);
  }
  return M;
}

double grand_sum_pow(const std::vector<double>& B, int p, int tau) {
  if (tau < 1) throw std::invalid_argument("grand_sum_pow: tau must be >= 1");
  if (B.size() != static_cast<std::size_t>(p) * p)
    throw std::invalid_argument("grand_sum_pow: B must be p x p");
  std::vector<double> v(p, 1.0), w(p);
  for (int t = 0; t < tau; ++t) {
    for (int i = 0; i < p; ++i) {
      double s = 0.0;
      for (int k = 0; k < p; ++k) s += B[static_cast<std::size_t>(i) * p + k] * v[k];
      w[i] = s;
    }
    v.swap(w);
  }
  double total = 0.0;
  for (double x : v) total += x;
  return total;
}

GrandSumTracker::GrandSumTracker(const InfluenceBound& bound)
    : U_(&bound.U), p_(bound.p), v_(bound.p, 1.0) {}

void GrandSumTracker::advance() {
  // In-place ascending update: v[i] <- (row i of U) . v equals one more
  // application of B = B_p ... B_1.
  for (int i = 0; i < p_; ++i) {
    double s = 0.0;
    for (int k = 0; k < p_; ++k) s += (*U_)[static_cast<std::size_t>(i) * p_ + k] * v_[k];
    v_[i] = s;
  }
  ++tau_;
}

double GrandSumTracker::value() const {
  if (tau_ < 1) throw std::logic_error("GrandSumTracker: advance() before value()");
  double total = 0.0;
  for (double x : v_) total += x;
  return total;
}

double asym_bound(const InfluenceBound& bound, int m, int tau) {
  if (tau < 1) throw std::invalid_argument("asym_bound: tau must be >= 1");
  GrandSumTracker tracker(bound);
  for (int t = 0; t < tau; ++t) tracker.advance();
  return 2.0 * std::sqrt(static_cast<double>(m)) * tracker.value();
}

double asym_bound(const ModelParams& model, int tau) {
  return asym_bound(influence_matrix(model), model.m(), tau);
}

double epsilon_j(double variance, int q, double beta) {
  if (!(variance >= 0.0)) throw std::invalid_argument("epsilon_j: variance must be >= 0");
  if (q < 2) throw std::invalid_argument("epsilon_j: q must be >= 2");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("epsilon_j: beta must be in (0,1)");
  const double log_term = std::log(2.0 / beta);
  return 2.0 * (std::sqrt(variance * log_term / (2.0 * static_cast<double>(q))) +
                7.0 * log_term / (3.0 * (static_cast<double>(q) - 1.0)));
}

std::vector<double> uniform_betas(double beta_total, int m) {
  if (!(beta_total > 0.0)) throw std::invalid_argument("uniform_betas: beta_total must be > 0");
  return std::vector<double>(static_cast<std::size_t>(m), beta_total / (2.0 * m));
}

BoundReport nonasym_bound(const InfluenceBound& bound, int m, int tau,
                          const GradEstimate& grad, std::span<const double> betas) {
  if (grad.q < 2) throw std::invalid_argument("nonasym_bound: q must be >= 2");
  if (betas.size() != grad.variances.size() ||
      betas.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("nonasym_bound: beta dimension mismatch");

  BoundReport report;
  report.tau = tau;
  GrandSumTracker tracker(bound);
  for (int t = 0; t < tau; ++t) tracker.advance();
  report.grand_sum = tracker.value();
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  report.asym_bound = 2.0 * sqrt_m * report.grand_sum;

  report.eps.resize(betas.size());
  double eps_sq_sum = 0.0;
  double beta_sum = 0.0;
  for (std::size_t j = 0; j < betas.size(); ++j) {
    report.eps[j] = epsilon_j(grad.variances[j], grad.q, betas[j]);
    eps_sq_sum += report.eps[j] * report.eps[j];
    beta_sum += betas[j];
  }
  report.nonasym_bound =
      2.0 * sqrt_m * (report.grand_sum + std::sqrt(eps_sq_sum / (4.0 * m)));
  report.confidence = 1.0 - 2.0 * beta_sum;
  report.confidence_warning = report.confidence <= 0.0;
  report.bound_divergent = bound.divergent();
  report.overflow = !std::isfinite(report.grand_sum);
  return report;
}

BoundReport nonasym_bound(const ModelParams& model, int tau, const GradEstimate& grad,
                          std::span<const double> betas) {
  return nonasym_bound(influence_matrix(model), model.m(), tau, grad, betas);
}

}  // namespace spgmrf
