#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spgmrf/indexer.hpp"

namespace spgmrf {

/**
 * One binary configuration of p sites, bit-packed into 64-bit words.
 * Word 0 bit 0 holds site 0, so for p <= 63 the first word doubles as the
 * little-endian state integer used by the enumeration code.
 */
class Assignment {
public:
  explicit Assignment(int p);
  static Assignment from_bits(const std::vector<int>& bits);
  static Assignment from_state_index(int p, std::uint64_t state);

  int p() const { return p_; }
  int bit(int i) const {
    return static_cast<int>((words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u);
  }
  void set_bit(int i, int value) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    auto& w = words_[static_cast<std::size_t>(i) >> 6];
    w = value ? (w | mask) : (w & ~mask);
  }

  /// Little-endian integer encoding; requires p <= 63.
  std::uint64_t state_index() const;

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  bool operator==(const Assignment& other) const {
    return p_ == other.p_ && words_ == other.words_;
  }

private:
  int p_;
  std::vector<std::uint64_t> words_;
};

/**
 * Parameter vector of a binary pairwise model in canonical feature order.
 * Diagonal entries are the node potentials. A dense symmetric coupling
 * matrix is materialized at construction for fast row access in samplers;
 * the object is immutable afterwards and safe to share across threads.
 */
class ModelParams {
public:
  ModelParams(FeatureIndexer indexer, std::vector<double> theta);

  const FeatureIndexer& indexer() const { return indexer_; }
  int p() const { return indexer_.p(); }
  int m() const { return indexer_.m(); }

  std::span<const double> theta() const { return theta_; }
  double theta_at(int i, int j) const { return theta_[indexer_.index(i, j)]; }

  /// Symmetric coupling lookup: xi(i,k) = theta(min,max). xi(i,i) is the
  /// node potential.
  double xi(int i, int k) const { return xi_[static_cast<std::size_t>(i) * p() + k]; }
  std::span<const double> xi_row(int i) const {
    return {xi_.data() + static_cast<std::size_t>(i) * p(), static_cast<std::size_t>(p())};
  }

  /// Conditional log-odds of site i being 1 given the rest of x.
  double local_field(int i, const Assignment& x) const;

  /// theta . psi(x).
  double score(const Assignment& x) const;

private:
  FeatureIndexer indexer_;
  std::vector<double> theta_;
  std::vector<double> xi_;
};

/// Binary samples plus their cached feature means.
class Dataset {
public:
  Dataset(FeatureIndexer indexer, std::vector<Assignment> samples);

  int p() const { return indexer_.p(); }
  int n() const { return static_cast<int>(samples_.size()); }
  const FeatureIndexer& indexer() const { return indexer_; }
  const std::vector<Assignment>& samples() const { return samples_; }
  std::span<const double> moments() const { return empirical_moments_; }

private:
  FeatureIndexer indexer_;
  std::vector<Assignment> samples_;
  std::vector<double> empirical_moments_;
};

/// psi(x): diagonal features are the bits, off-diagonals their products.
std::vector<double> sufficient_statistics(const Assignment& x, const FeatureIndexer& idx);

/// Mean of sufficient_statistics over a nonempty sample list.
std::vector<double> empirical_moments(const std::vector<Assignment>& samples,
                                      const FeatureIndexer& idx);

double l1_norm(std::span<const double> v);
double l2_norm(std::span<const double> v);

/// Componentwise sgn(a_i) * max(0, |a_i| - t); t must be nonnegative.
std::vector<double> soft_threshold(std::span<const double> a, double t);

/// The inference-free objective piece: -theta . empirical_moments.
double unpenalized_objective_terms(const ModelParams& model, const Dataset& data);

}  // namespace spgmrf
