#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spgmrf/model.hpp"
#include "spgmrf/parallel.hpp"
#include "spgmrf/rng.hpp"

namespace spgmrf {

enum class InitMode { uniform, zeros, data, persistent };

InitMode parse_init_mode(const std::string& s);
std::string to_string(InitMode mode);

/**
 * q independent systematic-scan chains over the same p sites. Chain states
 * are stored contiguously (words_per_chain 64-bit words each) and every
 * chain owns a counter-based RNG stream, so sweeps parallelize across
 * chains with bitwise-reproducible results.
 */
class ChainEnsemble {
public:
  ChainEnsemble(int q, int p, std::uint64_t master_seed, std::uint64_t stream_base);

  int q() const { return q_; }
  int p() const { return p_; }
  long sweeps_done() const { return sweeps_done_; }
  std::uint64_t master_seed() const { return master_seed_; }

  Assignment state(int chain) const;
  void set_state(int chain, const Assignment& x);

  std::span<const std::uint64_t> chain_words(int chain) const;
  std::span<std::uint64_t> chain_words(int chain);
  int words_per_chain() const { return words_per_chain_; }

  CounterStream& rng(int chain) { return rng_[chain]; }

  /// Set when a persistent init had no predecessor and fell back to uniform.
  bool persistent_fallback() const { return persistent_fallback_; }
  void set_persistent_fallback(bool v) { persistent_fallback_ = v; }

  void bump_sweeps() { ++sweeps_done_; }

private:
  int q_;
  int p_;
  int words_per_chain_;
  long sweeps_done_ = 0;
  std::uint64_t master_seed_;
  std::vector<std::uint64_t> states_;
  std::vector<CounterStream> rng_;
  bool persistent_fallback_ = false;
};

/// Gradient estimate from q chain endpoints, with per-feature sample
/// variances for the concentration bound.
struct GradEstimate {
  std::vector<double> delta_f;
  std::vector<double> sample_moments;
  std::vector<double> variances;  // unbiased, divide by q-1
  int tau = 0;
  int q = 0;
};

/// P(X_i = 1 | rest of x); strictly inside (0,1) for finite parameters.
double conditional_prob(const ModelParams& model, const Assignment& x, int site);

/**
 * Build a fresh ensemble. `uniform` draws iid fair bits per chain; `zeros`
 * starts every chain from the all-zeros state (the fixed-start setting the
 * error analysis conditions on); `data` bootstrap-resamples dataset rows;
 * `persistent` reuses the final states of `prev` (falling back to uniform,
 * with a notice flag, when prev is null). stream_base partitions the RNG
 * stream space between callers.
 */
ChainEnsemble init_ensemble(int q, int p, InitMode mode, std::uint64_t master_seed,
                            std::uint64_t stream_base = 0, const Dataset* data = nullptr,
                            const ChainEnsemble* prev = nullptr);

/// Resample every site of every chain once, in site order.
void gibbs_one_sweep(ChainEnsemble& ensemble, const ModelParams& model,
                     Exec ex = Exec::parallel);

/// Per-feature occurrence counts over chain endpoints (exact integers).
std::vector<std::uint64_t> feature_counts(const ChainEnsemble& ensemble,
                                          const FeatureIndexer& idx, Exec ex = Exec::parallel);

/// Sample moments / unbiased variances derived from integer counts.
void moments_from_counts(std::span<const std::uint64_t> counts, int q,
                         std::vector<double>& moments, std::vector<double>& variances);

/// Run `sweeps` full sweeps, then form the gradient estimate. Requires
/// q >= 2 so the sample variances are defined.
GradEstimate grad_estimate(const ModelParams& model, std::span<const double> data_moments,
                           ChainEnsemble& ensemble, int sweeps, Exec ex = Exec::parallel);

}  // namespace spgmrf
