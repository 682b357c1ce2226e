#include "spgmrf/model.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace spgmrf {

namespace {
std::size_t words_for(int p) { return (static_cast<std::size_t>(p) + 63) / 64; }
}  // namespace

Assignment::Assignment(int p) : p_(p), words_(words_for(p), 0) {
  if (p < 1) throw std::invalid_argument("Assignment: p must be positive");
}

Assignment Assignment::from_bits(const std::vector<int>& bits) {
  if (bits.empty()) throw std::invalid_argument("Assignment: empty bit vector");
  Assignment a(static_cast<int>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1)
      throw std::invalid_argument("Assignment: entries must be 0 or 1");
    a.set_bit(static_cast<int>(i), bits[i]);
  }
  return a;
}

Assignment Assignment::from_state_index(int p, std::uint64_t state) {
  if (p < 1 || p > 63) throw std::invalid_argument("Assignment: state encoding needs p <= 63");
  if (p < 63 && state >> p)
    throw std::invalid_argument("Assignment: state index out of range");
  Assignment a(p);
  a.words_[0] = state;
  return a;
}

std::uint64_t Assignment::state_index() const {
  if (p_ > 63) throw std::invalid_argument("Assignment: state encoding needs p <= 63");
  return words_[0];
}

ModelParams::ModelParams(FeatureIndexer indexer, std::vector<double> theta)
    : indexer_(indexer), theta_(std::move(theta)) {
  if (static_cast<int>(theta_.size()) != indexer_.m())
    throw std::invalid_argument("ModelParams: theta size != p(p+1)/2");
  for (double v : theta_)
    if (!std::isfinite(v)) throw std::invalid_argument("ModelParams: non-finite entry");
  const int p = indexer_.p();
  xi_.assign(static_cast<std::size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double v = theta_[indexer_.index(i, j)];
      xi_[static_cast<std::size_t>(i) * p + j] = v;
      xi_[static_cast<std::size_t>(j) * p + i] = v;
    }
}

double ModelParams::local_field(int i, const Assignment& x) const {
  const int p = indexer_.p();
  if (x.p() != p) throw std::invalid_argument("local_field: dimension mismatch");
  if (i < 0 || i >= p) throw std::invalid_argument("local_field: site out of range");
  const double* row = xi_.data() + static_cast<std::size_t>(i) * p;
  double dot = 0.0;
  const auto words = x.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      const int k = static_cast<int>(w * 64) + std::countr_zero(bits);
      dot += row[k];
      bits &= bits - 1;
    }
  }
  // The diagonal enters once as the node potential; remove its appearance
  // in the dot product when x_i = 1.
  return row[i] + dot - row[i] * x.bit(i);
}

double ModelParams::score(const Assignment& x) const {
  const int p = indexer_.p();
  if (x.p() != p) throw std::invalid_argument("score: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < p; ++i) {
    if (!x.bit(i)) continue;
    s += theta_[indexer_.index(i, i)];
    for (int j = i + 1; j < p; ++j)
      if (x.bit(j)) s += theta_[indexer_.index(i, j)];
  }
  return s;
}

Dataset::Dataset(FeatureIndexer indexer, std::vector<Assignment> samples)
    : indexer_(indexer), samples_(std::move(samples)) {
  if (samples_.empty()) throw std::invalid_argument("Dataset: empty sample list");
  for (const auto& s : samples_)
    if (s.p() != indexer_.p()) throw std::invalid_argument("Dataset: dimension mismatch");
  empirical_moments_ = empirical_moments(samples_, indexer_);
}

std::vector<double> sufficient_statistics(const Assignment& x, const FeatureIndexer& idx) {
  if (x.p() != idx.p()) throw std::invalid_argument("sufficient_statistics: dimension mismatch");
  const int p = idx.p();
  std::vector<double> psi(static_cast<std::size_t>(idx.m()), 0.0);
  for (int i = 0; i < p; ++i) {
    if (!x.bit(i)) continue;
    psi[idx.index(i, i)] = 1.0;
    for (int j = i + 1; j < p; ++j)
      if (x.bit(j)) psi[idx.index(i, j)] = 1.0;
  }
  return psi;
}

std::vector<double> empirical_moments(const std::vector<Assignment>& samples,
                                      const FeatureIndexer& idx) {
  if (samples.empty()) throw std::invalid_argument("empirical_moments: empty sample list");
  const int p = idx.p();
  // Feature values are 0/1, so integer counts make the mean exact and
  // independent of summation order.
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(idx.m()), 0);
  for (const auto& x : samples) {
    if (x.p() != p) throw std::invalid_argument("empirical_moments: dimension mismatch");
    for (int i = 0; i < p; ++i) {
      if (!x.bit(i)) continue;
      ++counts[idx.index(i, i)];
      for (int j = i + 1; j < p; ++j)
        if (x.bit(j)) ++counts[idx.index(i, j)];
    }
  }
  std::vector<double> mom(counts.size());
  const double n = static_cast<double>(samples.size());
  for (std::size_t j = 0; j < counts.size(); ++j)
    mom[j] = static_cast<double>(counts[j]) / n;
  return mom;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> soft_threshold(std::span<const double> a, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("soft_threshold: threshold must be >= 0");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double mag = std::abs(a[i]) - t;
    out[i] = mag > 0.0 ? (a[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

double unpenalized_objective_terms(const ModelParams& model, const Dataset& data) {
  if (model.p() != data.p())
    throw std::invalid_argument("unpenalized_objective_terms: dimension mismatch");
  const auto mom = data.moments();
  const auto theta = model.theta();
  double dot = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) dot += theta[j] * mom[j];
  return -dot;
}

}  // namespace spgmrf
