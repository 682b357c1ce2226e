#include "spgmrf/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "spgmrf/errors.hpp"
#include "spgmrf/exact.hpp"

namespace spgmrf {

TauStrategy TauStrategy::parse(const std::string& s) {
  TauStrategy st;
  if (s == "tay") {
    st.kind = Kind::tay;
    return st;
  }
  if (s == "increasing") {
    st.kind = Kind::increasing;
    return st;
  }
  if (s.rfind("fixed:", 0) == 0) {
    st.kind = Kind::fixed;
    st.fixed_tau = std::stoi(s.substr(6));
    if (st.fixed_tau < 1) throw std::invalid_argument("fixed tau must be >= 1");
    return st;
  }
  throw std::invalid_argument("unknown strategy: " + s +
                              " (expected fixed:N, increasing, or tay)");
}

std::string TauStrategy::str() const {
  switch (kind) {
    case Kind::fixed: return "fixed:" + std::to_string(fixed_tau);
    case Kind::increasing: return "increasing";
    case Kind::tay: return "tay";
  }
  return "?";
}

void SpgConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("SpgConfig: alpha must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("SpgConfig: lambda must be >= 0");
  if (q < 2) throw std::invalid_argument("SpgConfig: q must be >= 2");
  if (tau_max < 1) throw std::invalid_argument("SpgConfig: tau_max must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("SpgConfig: max_iters must be >= 1");
  if (stop_tol < 0.0) throw std::invalid_argument("SpgConfig: stop_tol must be >= 0");
  if (init_random_scale < 0.0)
    throw std::invalid_argument("SpgConfig: init_random_scale must be >= 0");
  if (!(beta_total > 0.0)) throw std::invalid_argument("SpgConfig: beta_total must be > 0");
}

std::vector<double> generalized_gradient(std::span<const double> theta,
                                         std::span<const double> delta_f, double alpha,
                                         double lambda) {
  if (!(alpha > 0.0)) throw std::invalid_argument("generalized_gradient: alpha must be > 0");
  if (theta.size() != delta_f.size())
    throw std::invalid_argument("generalized_gradient: dimension mismatch");
  const auto next = spg_step(theta, delta_f, alpha, lambda);
  std::vector<double> g(theta.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = (theta[j] - next[j]) / alpha;
  return g;
}

std::vector<double> spg_step(std::span<const double> theta, std::span<const double> delta_f,
                             double alpha, double lambda) {
  if (theta.size() != delta_f.size())
    throw std::invalid_argument("spg_step: dimension mismatch");
  std::vector<double> inner(theta.size());
  for (std::size_t j = 0; j < inner.size(); ++j) inner[j] = theta[j] - alpha * delta_f[j];
  return soft_threshold(inner, alpha * lambda);
}

TaySelection tay_select_tau(const ModelParams& model, std::span<const double> data_moments,
                            const SpgConfig& cfg, ChainEnsemble& ensemble,
                            const InfluenceBound& bound) {
  TaySelection sel;
  const int m = model.m();
  GrandSumTracker tracker(bound);
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  const auto betas = uniform_betas(cfg.beta_total, m);

  std::vector<std::uint64_t> counts;
  for (int tau = 1; tau <= cfg.tau_max; ++tau) {
    gibbs_one_sweep(ensemble, model, cfg.exec);
    tracker.advance();

    GradEstimate est;
    est.q = ensemble.q();
    est.tau = tau;
    counts = feature_counts(ensemble, model.indexer(), cfg.exec);
    moments_from_counts(counts, est.q, est.sample_moments, est.variances);
    est.delta_f.resize(est.sample_moments.size());
    for (std::size_t j = 0; j < est.delta_f.size(); ++j)
      est.delta_f[j] = est.sample_moments[j] - data_moments[j];

    const auto g = generalized_gradient(model.theta(), est.delta_f, cfg.alpha, cfg.lambda);
    const double gnorm = l2_norm(g);
    const double bound_now = 2.0 * sqrt_m * tracker.value();

    const bool accepted = bound_now < 0.5 * gnorm;
    if (accepted || tau == cfg.tau_max) {
      sel.grad = std::move(est);
      sel.tau = tau;
      sel.gnorm = gnorm;
      sel.criterion_unmet = !accepted;
      sel.report = nonasym_bound(bound, m, tau, sel.grad, betas);
      return sel;
    }
  }
  throw std::logic_error("tay_select_tau: unreachable");
}

bool conservative_q_check(const BoundReport& report, double gnorm) {
  return report.nonasym_bound > 0.0 && report.nonasym_bound <= 0.5 * gnorm;
}

namespace {

std::vector<double> initial_theta(const SpgConfig& cfg, int m) {
  std::vector<double> theta(static_cast<std::size_t>(m), 0.0);
  if (cfg.init_random_scale > 0.0) {
    CounterStream rng(cfg.master_seed, kStreamThetaInit);
    for (auto& v : theta)
      v = cfg.init_random_scale * (2.0 * rng.next_uniform() - 1.0);
  }
  return theta;
}

}  // namespace

RunResult run_spg(const Dataset& data, const SpgConfig& cfg) {
  cfg.validate();
  const int p = data.p();
  const FeatureIndexer idx(p);
  const int m = idx.m();
  if (cfg.record_exact && p > kEnumCap)
    throw capacity_error("run_spg: exact instrumentation needs p <= enumeration cap");

  RunResult result;
  result.p = p;
  std::vector<double> theta = initial_theta(cfg, m);
  const auto data_moments = data.moments();
  const auto betas = uniform_betas(cfg.beta_total, m);

  if (cfg.record_exact) {
    const ModelParams model0(idx, theta);
    result.initial_exact_obj = exact_objective(model0, data, cfg.lambda, cfg.exec);
  }

  std::optional<ChainEnsemble> prev_ensemble;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelParams model(idx, theta);
    const auto bound = influence_matrix(model);

    // Fresh streams each iteration; persistent chains keep their own.
    const std::uint64_t stream_base = static_cast<std::uint64_t>(k) << 32;
    ChainEnsemble ensemble =
        init_ensemble(cfg.q, p, cfg.init_mode, cfg.master_seed, stream_base,
                      cfg.init_mode == InitMode::data ? &data : nullptr,
                      prev_ensemble ? &*prev_ensemble : nullptr);

    // Empirical law of the realized starting states, captured before any
    // sweeping; the expected-error instrumentation conditions on it.
    std::vector<double> mu0;
    if (cfg.record_exact) {
      mu0.assign(std::uint64_t{1} << p, 0.0);
      const double w = 1.0 / static_cast<double>(cfg.q);
      for (int c = 0; c < cfg.q; ++c) mu0[ensemble.state(c).state_index()] += w;
    }

    if (ensemble.persistent_fallback())
      std::fprintf(stderr, "note: persistent init has no predecessor at iteration %d; "
                           "falling back to uniform\n", k);

    IterateRecord rec;
    rec.iter = k;

    GradEstimate grad;
    if (cfg.strategy.kind == TauStrategy::Kind::tay) {
      auto sel = tay_select_tau(model, data_moments, cfg, ensemble, bound);
      grad = std::move(sel.grad);
      rec.tau_used = sel.tau;
      rec.gnorm = sel.gnorm;
      rec.grand_sum = sel.report.grand_sum;
      rec.asym_bound = sel.report.asym_bound;
      rec.nonasym_bound = sel.report.nonasym_bound;
      rec.criterion_unmet = sel.criterion_unmet;
      rec.conservative_ok = conservative_q_check(sel.report, sel.gnorm);
    } else {
      const int tau = cfg.strategy.kind == TauStrategy::Kind::fixed ? cfg.strategy.fixed_tau
                                                                    : std::min(k, cfg.tau_max);
      grad = grad_estimate(model, data_moments, ensemble, tau, cfg.exec);
      const auto report = nonasym_bound(bound, m, tau, grad, betas);
      const auto g = generalized_gradient(theta, grad.delta_f, cfg.alpha, cfg.lambda);
      rec.tau_used = tau;
      rec.gnorm = l2_norm(g);
      rec.grand_sum = report.grand_sum;
      rec.asym_bound = report.asym_bound;
      rec.nonasym_bound = report.nonasym_bound;
      rec.conservative_ok = conservative_q_check(report, rec.gnorm);
    }

    auto theta_next = spg_step(theta, grad.delta_f, cfg.alpha, cfg.lambda);

    if (cfg.record_exact) {
      const auto exact_grad = exact_gradient(model, data, cfg.exec);
      double dn = 0.0;
      for (std::size_t j = 0; j < exact_grad.size(); ++j) {
        const double d = grad.delta_f[j] - exact_grad[j];
        dn += d * d;
      }
      rec.exact_delta_norm = std::sqrt(dn);
      rec.exact_expected_delta_norm =
          expected_error_norm_from(model, std::move(mu0), rec.tau_used);

      const ModelParams model_next(idx, theta_next);
      rec.exact_obj = exact_objective(model_next, data, cfg.lambda, cfg.exec);
    }

    if (cfg.init_mode == InitMode::persistent) prev_ensemble = std::move(ensemble);

    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    double diff = 0.0, base = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double d = theta_next[j] - theta[j];
      diff += d * d;
      base += theta[j] * theta[j];
    }
    theta = std::move(theta_next);
    rec.theta = theta;
    result.records.push_back(std::move(rec));

    if (cfg.stop_tol > 0.0 &&
        std::sqrt(diff) / std::max(1.0, std::sqrt(base)) < cfg.stop_tol) {
      result.stopped_by_tol = true;
      break;
    }
  }

  result.theta_final = theta;
  return result;
}

std::vector<double> averaged_iterate(const std::vector<IterateRecord>& records) {
  if (records.empty()) throw std::invalid_argument("averaged_iterate: no records");
  std::vector<double> avg(records.front().theta.size(), 0.0);
  for (const auto& r : records)
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += r.theta[j];
  for (auto& v : avg) v /= static_cast<double>(records.size());
  return avg;
}

}  // namespace spgmrf
