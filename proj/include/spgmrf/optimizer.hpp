#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spgmrf/bounds.hpp"
#include "spgmrf/gibbs.hpp"
#include "spgmrf/model.hpp"

namespace spgmrf {

/// Per-iteration chain-length policy.
struct TauStrategy {
  enum class Kind { fixed, increasing, tay };
  Kind kind = Kind::tay;
  int fixed_tau = 30;

  static TauStrategy parse(const std::string& s);
  std::string str() const;
};

struct SpgConfig {
  double alpha = 0.4;
  double lambda = 0.0;
  int q = 2000;
  TauStrategy strategy;
  int tau_max = 500;
  int max_iters = 100;
  double stop_tol = 0.0;  // 0 disables the relative-change stop
  InitMode init_mode = InitMode::uniform;
  std::uint64_t master_seed = 0;
  double beta_total = 0.01;
  double init_random_scale = 0.0;  // 0 starts from the zero vector
  bool record_exact = false;       // enumeration instrumentation, small p only
  Exec exec = Exec::parallel;

  void validate() const;
};

struct IterateRecord {
  int iter = 0;                 // 1-based
  std::vector<double> theta;    // iterate after this step
  int tau_used = 0;
  double gnorm = 0.0;           // ||G_alpha|| at the accepted gradient
  double grand_sum = 0.0;
  double asym_bound = 0.0;
  double nonasym_bound = 0.0;
  bool conservative_ok = false; // advisory sample-size criterion
  bool criterion_unmet = false; // tau cap hit before the bound closed
  double wall_ms = 0.0;
  std::optional<double> exact_obj;                 // g(theta) after the step
  std::optional<double> exact_delta_norm;          // realized ||delta||
  std::optional<double> exact_expected_delta_norm; // ||E delta|| from init law
};

struct RunResult {
  std::vector<double> theta_final;
  std::vector<IterateRecord> records;
  std::optional<double> initial_exact_obj;
  bool stopped_by_tol = false;
  int p = 0;
};

/// G_alpha = (theta - S_{alpha lambda}(theta - alpha delta_f)) / alpha.
std::vector<double> generalized_gradient(std::span<const double> theta,
                                         std::span<const double> delta_f, double alpha,
                                         double lambda);

/// One proximal update S_{alpha lambda}(theta - alpha delta_f).
std::vector<double> spg_step(std::span<const double> theta, std::span<const double> delta_f,
                             double alpha, double lambda);

struct TaySelection {
  GradEstimate grad;
  int tau = 0;
  BoundReport report;
  double gnorm = 0.0;
  bool criterion_unmet = false;
};

/**
 * Grow tau one sweep at a time until the mixing bound drops below half the
 * generalized-gradient norm (recomputed from the current chains each
 * sweep), or until cfg.tau_max with criterion_unmet set.
 */
TaySelection tay_select_tau(const ModelParams& model, std::span<const double> data_moments,
                            const SpgConfig& cfg, ChainEnsemble& ensemble,
                            const InfluenceBound& bound);

/// Advisory companion criterion: 0 < nonasym_bound <= gnorm / 2.
bool conservative_q_check(const BoundReport& report, double gnorm);

RunResult run_spg(const Dataset& data, const SpgConfig& cfg);

/// Mean of all recorded iterates (dense; not used for structure recovery).
std::vector<double> averaged_iterate(const std::vector<IterateRecord>& records);

}  // namespace spgmrf
