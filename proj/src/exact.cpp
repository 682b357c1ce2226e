#include "spgmrf/exact.hpp"

#include <bit>
#include <cmath>

#include "spgmrf/errors.hpp"

namespace spgmrf {

namespace {

void check_cap(const ModelParams& model, int cap, const char* what) {
  if (model.p() > cap)
    throw capacity_error(std::string(what) + ": p exceeds enumeration cap");
}

/// theta . psi(state) from the packed state integer.
double state_score(const ModelParams& model, std::uint64_t state) {
  double s = 0.0;
  std::uint64_t bits = state;
  while (bits) {
    const int i = std::countr_zero(bits);
    bits &= bits - 1;
    s += model.xi(i, i);
    std::uint64_t rest = bits;  // j > i only, so each pair counts once
    while (rest) {
      const int j = std::countr_zero(rest);
      rest &= rest - 1;
      s += model.xi(i, j);
    }
  }
  return s;
}

double state_field(const ModelParams& model, std::uint64_t state, int site) {
  const auto row = model.xi_row(site);
  double dot = 0.0;
  std::uint64_t bits = state & ~(std::uint64_t{1} << site);
  while (bits) {
    dot += row[std::countr_zero(bits)];
    bits &= bits - 1;
  }
  return row[site] + dot;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Max-shifted exp weights; returns the shift and fills w[state].
double exp_weights(const ModelParams& model, std::vector<double>& w, Exec ex) {
  const std::uint64_t nstates = std::uint64_t{1} << model.p();
  const double shift = par::blocked_max(
      nstates, [&](std::uint64_t s) { return state_score(model, s); }, ex);
  w.resize(nstates);
  struct Ctx {
    const ModelParams* model;
    std::vector<double>* w;
    double shift;
    std::uint64_t n;
  } ctx{&model, &w, shift, nstates};
  par::detail::run_blocks(
      (nstates + par::kBlockSize - 1) / par::kBlockSize, ex, &ctx,
      [](void* p, std::uint64_t b) {
        auto& c = *static_cast<Ctx*>(p);
        const std::uint64_t begin = b * par::kBlockSize;
        const std::uint64_t end = std::min(c.n, begin + par::kBlockSize);
        for (std::uint64_t s = begin; s < end; ++s)
          (*c.w)[s] = std::exp(state_score(*c.model, s) - c.shift);
      });
  return shift;
}

}  // namespace

double log_partition(const ModelParams& model, Exec ex) {
  check_cap(model, kEnumCap, "log_partition");
  const std::uint64_t nstates = std::uint64_t{1} << model.p();
  const double shift = par::blocked_max(
      nstates, [&](std::uint64_t s) { return state_score(model, s); }, ex);
  const double z = par::blocked_sum(
      nstates, [&](std::uint64_t s) { return std::exp(state_score(model, s) - shift); },
      ex);
  return shift + std::log(z);
}

ExactDistribution exact_distribution(const ModelParams& model, Exec ex) {
  check_cap(model, kEnumCap, "exact_distribution");
  ExactDistribution dist;
  dist.p = model.p();
  exp_weights(model, dist.probs, ex);
  double z = 0.0;
  {
    // fixed-order pairwise total over the weight vector
    z = par::blocked_sum(
        dist.probs.size(), [&](std::uint64_t s) { return dist.probs[s]; }, ex);
  }
  for (auto& v : dist.probs) v /= z;
  return dist;
}

std::vector<double> exact_moments(const ModelParams& model, Exec ex) {
  check_cap(model, kEnumCap, "exact_moments");
  const std::uint64_t nstates = std::uint64_t{1} << model.p();
  const int m = model.m();
  const auto& idx = model.indexer();
  const double shift = par::blocked_max(
      nstates, [&](std::uint64_t s) { return state_score(model, s); }, ex);

  // One pass accumulates [Z | Z * moments].
  std::vector<double> acc(static_cast<std::size_t>(m) + 1, 0.0);
  par::blocked_accumulate(
      nstates, acc.size(), acc,
      [&](std::uint64_t begin, std::uint64_t end, double* out) {
        for (std::uint64_t s = begin; s < end; ++s) {
          const double w = std::exp(state_score(model, s) - shift);
          out[0] += w;
          std::uint64_t bits = s;
          while (bits) {
            const int i = std::countr_zero(bits);
            bits &= bits - 1;
            out[1 + idx.index(i, i)] += w;
            std::uint64_t rest = bits;
            while (rest) {
              const int j = std::countr_zero(rest);
              rest &= rest - 1;
              out[1 + idx.index(i, j)] += w;
            }
          }
        }
      },
      ex);

  std::vector<double> mom(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) mom[j] = acc[1 + j] / acc[0];
  return mom;
}

std::vector<double> exact_gradient(const ModelParams& model, const Dataset& data, Exec ex) {
  if (model.p() != data.p()) throw std::invalid_argument("exact_gradient: dimension mismatch");
  auto grad = exact_moments(model, ex);
  const auto emp = data.moments();
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= emp[j];
  return grad;
}

double exact_objective(const ModelParams& model, const Dataset& data, double lambda, Exec ex) {
  if (lambda < 0.0) throw std::invalid_argument("exact_objective: lambda must be >= 0");
  return unpenalized_objective_terms(model, data) + log_partition(model, ex) +
         lambda * l1_norm(model.theta());
}

std::vector<double> gibbs_sweep_kernel(const ModelParams& model, Exec ex) {
  check_cap(model, kKernelCap, "gibbs_sweep_kernel");
  const int p = model.p();
  const std::uint64_t n = std::uint64_t{1} << p;
  // Row x of the kernel is the point mass at x pushed through one sweep.
  std::vector<double> kernel(n * n, 0.0);

  struct Ctx {
    const ModelParams* model;
    std::vector<double>* kernel;
    std::uint64_t n;
  } ctx{&model, &kernel, n};
  par::detail::run_blocks(n, ex, &ctx, [](void* c, std::uint64_t x) {
    auto& ctx = *static_cast<Ctx*>(c);
    std::vector<double> row(ctx.n, 0.0);
    row[x] = 1.0;
    sweep_distribution(*ctx.model, row);
    std::copy(row.begin(), row.end(), ctx.kernel->begin() + x * ctx.n);
  });
  return kernel;
}

void sweep_distribution(const ModelParams& model, std::vector<double>& mu) {
  const int p = model.p();
  if (p > kEnumCap) throw capacity_error("sweep_distribution: p exceeds enumeration cap");
  const std::uint64_t n = std::uint64_t{1} << p;
  if (mu.size() != n) throw std::invalid_argument("sweep_distribution: size mismatch");
  for (int i = 0; i < p; ++i) {
    const std::uint64_t hi = std::uint64_t{1} << i;
    for (std::uint64_t s = 0; s < n; ++s) {
      if (s & hi) continue;
      const std::uint64_t t = s | hi;
      const double mass = mu[s] + mu[t];
      if (mass == 0.0) {
        mu[s] = mu[t] = 0.0;
        continue;
      }
      const double p1 = sigmoid(state_field(model, s, i));
      mu[t] = mass * p1;
      mu[s] = mass * (1.0 - p1);
    }
  }
}

std::vector<double> distribution_moments(const ModelParams& model,
                                         const std::vector<double>& mu) {
  const auto& idx = model.indexer();
  std::vector<double> mom(static_cast<std::size_t>(model.m()), 0.0);
  for (std::uint64_t s = 0; s < mu.size(); ++s) {
    const double w = mu[s];
    if (w == 0.0) continue;
    std::uint64_t bits = s;
    while (bits) {
      const int i = std::countr_zero(bits);
      bits &= bits - 1;
      mom[idx.index(i, i)] += w;
      std::uint64_t rest = bits;
      while (rest) {
        const int j = std::countr_zero(rest);
        rest &= rest - 1;
        mom[idx.index(i, j)] += w;
      }
    }
  }
  return mom;
}

double exact_tv_after_tau(const ModelParams& model, const Assignment& x0, int tau) {
  check_cap(model, kEnumCap, "exact_tv_after_tau");
  if (x0.p() != model.p()) throw std::invalid_argument("exact_tv_after_tau: dimension mismatch");
  if (tau < 0) throw std::invalid_argument("exact_tv_after_tau: tau must be >= 0");
  const auto stationary = exact_distribution(model);
  std::vector<double> mu(stationary.probs.size(), 0.0);
  mu[x0.state_index()] = 1.0;
  for (int t = 0; t < tau; ++t) sweep_distribution(model, mu);
  double tv = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) tv += std::abs(mu[s] - stationary.probs[s]);
  return 0.5 * tv;
}

double expected_error_norm_from(const ModelParams& model, std::vector<double> mu0, int tau) {
  check_cap(model, kEnumCap, "expected_error_norm_from");
  for (int t = 0; t < tau; ++t) sweep_distribution(model, mu0);
  const auto chain_mom = distribution_moments(model, mu0);
  const auto stat_mom = exact_moments(model);
  double s = 0.0;
  for (std::size_t j = 0; j < chain_mom.size(); ++j) {
    const double d = chain_mom[j] - stat_mom[j];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace spgmrf
