#pragma once

#include <stdexcept>
#include <utility>

namespace spgmrf {

/**
 * Canonical linear indexing of the m = p(p+1)/2 pair features of a binary
 * pairwise model. Order is the row-major upper triangle including the
 * diagonal: (0,0),(0,1),...,(0,p-1),(1,1),...,(p-1,p-1). All modules and
 * file formats share this layout.
 */
class FeatureIndexer {
public:
  explicit FeatureIndexer(int p) : p_(p) {
    if (p < 1 || p > 10000)
      throw std::invalid_argument("FeatureIndexer: node count must be in [1, 10000]");
    m_ = p * (p + 1) / 2;
  }

  int p() const { return p_; }
  int m() const { return m_; }

  /// Linear index of feature (i,j), 0 <= i <= j < p.
  int index(int i, int j) const {
    if (i < 0 || j < i || j >= p_)
      throw std::invalid_argument("FeatureIndexer::index: need 0 <= i <= j < p");
    return row_offset(i) + (j - i);
  }

  /// Inverse of index().
  std::pair<int, int> pair_of(int idx) const {
    if (idx < 0 || idx >= m_)
      throw std::invalid_argument("FeatureIndexer::pair_of: index out of range");
    int i = 0;
    while (row_offset(i + 1) <= idx) ++i;
    return {i, i + (idx - row_offset(i))};
  }

  bool operator==(const FeatureIndexer& other) const { return p_ == other.p_; }

private:
  int row_offset(int i) const { return i * p_ - i * (i - 1) / 2; }

  int p_;
  int m_;
};

}  // namespace spgmrf
