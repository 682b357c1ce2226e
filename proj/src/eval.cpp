#include "spgmrf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spgmrf/gibbs.hpp"
#include "spgmrf/rng.hpp"

namespace spgmrf {

GroundTruth generate_ground_truth(int p, double edge_prob, double w_low, double w_high,
                                  std::uint64_t seed) {
  if (p < 2) throw std::invalid_argument("generate_ground_truth: p must be >= 2");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw std::invalid_argument("generate_ground_truth: edge_prob must be in [0,1]");
  if (!(0.0 < w_low && w_low <= w_high))
    throw std::invalid_argument("generate_ground_truth: need 0 < w_low <= w_high");

  const FeatureIndexer idx(p);
  std::vector<double> theta(static_cast<std::size_t>(idx.m()), 0.0);
  std::vector<std::pair<int, int>> edges;
  CounterStream rng(seed, kStreamGroundTruth);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const bool present = rng.next_uniform() < edge_prob;
      const double mag = w_low + (w_high - w_low) * rng.next_uniform();
      const bool negative = rng.next_uniform() < 0.5;
      if (!present) continue;  // draws above keep the stream usage fixed
      theta[idx.index(i, j)] = negative ? -mag : mag;
      edges.emplace_back(i, j);
    }
  return GroundTruth{ModelParams(idx, std::move(theta)), std::move(edges)};
}

Dataset sample_dataset(const GroundTruth& truth, int n, int burn_in, std::uint64_t seed,
                       Exec ex) {
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("sample_dataset: burn_in must be >= 0");
  const int p = truth.theta_true.p();

  ChainEnsemble chains(n, p, seed, kStreamDataset);
  const int words = chains.words_per_chain();
  for (int c = 0; c < n; ++c) {
    auto dst = chains.chain_words(c);
    for (int w = 0; w < words; ++w) dst[w] = chains.rng(c).next_u64();
    const int tail = p - (words - 1) * 64;
    if (tail < 64) dst[words - 1] &= (std::uint64_t{1} << tail) - 1;
  }
  for (int t = 0; t < burn_in; ++t) gibbs_one_sweep(chains, truth.theta_true, ex);

  std::vector<Assignment> samples;
  samples.reserve(n);
  for (int c = 0; c < n; ++c) samples.push_back(chains.state(c));
  return Dataset(FeatureIndexer(p), std::move(samples));
}

double structure_auc(const ModelParams& theta_hat, const GroundTruth& truth) {
  const int p = truth.theta_true.p();
  if (theta_hat.p() != p) throw std::invalid_argument("structure_auc: dimension mismatch");

  std::vector<std::vector<bool>> is_edge(p, std::vector<bool>(p, false));
  for (const auto& [i, j] : truth.edges) is_edge[i][j] = true;

  struct Scored {
    double score;
    bool positive;
  };
  std::vector<Scored> items;
  items.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      items.push_back({std::abs(theta_hat.theta_at(i, j)), is_edge[i][j]});

  std::size_t n_pos = 0;
  for (const auto& it : items) n_pos += it.positive ? 1 : 0;
  const std::size_t n_neg = items.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("structure_auc: degenerate truth (no positives or no negatives)");

  // Mann-Whitney with midranks for ties.
  std::sort(items.begin(), items.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (items[k].positive) rank_sum_pos += midrank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

TightnessTrace bound_tightness_trace(const std::vector<IterateRecord>& records,
                                     bool use_expectation) {
  TightnessTrace trace;
  trace.expectation_based = use_expectation;
  std::size_t holds = 0;
  for (const auto& rec : records) {
    const auto& field = use_expectation ? rec.exact_expected_delta_norm : rec.exact_delta_norm;
    if (!field.has_value())
      throw std::invalid_argument("bound_tightness_trace: run lacks exact instrumentation");
    trace.rows.push_back({rec.iter, *field, rec.asym_bound});
    // absolute guard: both sides are enumeration sums with ~1e-16 noise,
    // which matters when the true values are exactly zero
    if (rec.asym_bound >= *field - 1e-12) ++holds;
  }
  if (trace.rows.empty())
    throw std::invalid_argument("bound_tightness_trace: empty record list");
  trace.frac_bound_holds = static_cast<double>(holds) / static_cast<double>(trace.rows.size());
  return trace;
}

}  // namespace spgmrf
