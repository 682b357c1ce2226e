#include <doctest.h>

#include "spgmrf/indexer.hpp"

using spgmrf::FeatureIndexer;

TEST_SUITE("indexer") {

TEST_CASE("canonical order walks the upper triangle row-major") {
  FeatureIndexer idx(3);
  CHECK(idx.m() == 6);
  CHECK(idx.index(0, 0) == 0);
  CHECK(idx.index(0, 1) == 1);
  CHECK(idx.index(0, 2) == 2);
  CHECK(idx.index(1, 1) == 3);
  CHECK(idx.index(1, 2) == 4);
  CHECK(idx.index(2, 2) == 5);
}

TEST_CASE("bijection holds exhaustively for p in 1..64") {
  for (int p = 1; p <= 64; ++p) {
    FeatureIndexer idx(p);
    CHECK(idx.m() == p * (p + 1) / 2);
    int linear = 0;
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) {
        REQUIRE(idx.index(i, j) == linear);
        const auto [ri, rj] = idx.pair_of(linear);
        REQUIRE(ri == i);
        REQUIRE(rj == j);
        ++linear;
      }
    CHECK(linear == idx.m());
  }
}

TEST_CASE("invalid arguments are rejected") {
  CHECK_THROWS_AS(FeatureIndexer(0), std::invalid_argument);
  FeatureIndexer idx(4);
  CHECK_THROWS_AS(idx.index(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(idx.index(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(idx.pair_of(10), std::invalid_argument);
  CHECK_THROWS_AS(idx.pair_of(-1), std::invalid_argument);
}

}  // TEST_SUITE
