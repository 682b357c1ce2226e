#include <doctest.h>

#include <cmath>
#include <vector>

#include "spgmrf/exact.hpp"
#include "spgmrf/gibbs.hpp"
#include "spgmrf/rng.hpp"

using namespace spgmrf;

namespace {

ModelParams random_model(int p, double scale, std::uint64_t seed) {
  FeatureIndexer idx(p);
  CounterStream rng(seed, 0);
  std::vector<double> theta(idx.m());
  for (auto& v : theta) v = scale * (2.0 * rng.next_uniform() - 1.0);
  return ModelParams(idx, theta);
}

ModelParams zero_model(int p) {
  FeatureIndexer idx(p);
  return ModelParams(idx, std::vector<double>(idx.m(), 0.0));
}

}  // namespace

TEST_SUITE("gibbs") {

TEST_CASE("conditional probability closed forms") {
  const auto zero = zero_model(3);
  for (std::uint64_t s = 0; s < 8; ++s)
    for (int i = 0; i < 3; ++i)
      CHECK(conditional_prob(zero, Assignment::from_state_index(3, s), i) == 0.5);

  // p=2, theta_11 = 0, theta_12 = 2, x2 = 1
  ModelParams m(FeatureIndexer(2), {0.0, 2.0, 0.0});
  const auto x = Assignment::from_bits({0, 1});
  CHECK(conditional_prob(m, x, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-14));

  CHECK_THROWS_AS(conditional_prob(m, x, 2), std::invalid_argument);
  CHECK_THROWS_AS(conditional_prob(m, x, -1), std::invalid_argument);
}

TEST_CASE("conditional probability agrees with the enumeration ratio") {
  const auto model = random_model(4, 1.3, 17);
  const auto dist = exact_distribution(model);
  for (std::uint64_t s = 0; s < 16; ++s)
    for (int i = 0; i < 4; ++i) {
      const std::uint64_t s1 = s | (std::uint64_t{1} << i);
      const std::uint64_t s0 = s1 & ~(std::uint64_t{1} << i);
      const double ratio = dist.probs[s1] / (dist.probs[s0] + dist.probs[s1]);
      const double cond = conditional_prob(model, Assignment::from_state_index(4, s), i);
      REQUIRE(std::abs(cond - ratio) < 1e-12);
    }
}

TEST_CASE("saturated node potential pins its site after one sweep") {
  FeatureIndexer idx(3);
  std::vector<double> theta(idx.m(), 0.0);
  theta[idx.index(0, 0)] = 40.0;
  ModelParams model(idx, theta);
  auto ens = init_ensemble(200, 3, InitMode::uniform, 7, 0);
  gibbs_one_sweep(ens, model);
  for (int c = 0; c < ens.q(); ++c) REQUIRE(ens.state(c).bit(0) == 1);
}

TEST_CASE("one sweep of a million fair chains has per-site means near one half") {
  const auto model = zero_model(2);
  ChainEnsemble ens(1000000, 2, 2026, 0);  // all chains start at 00
  gibbs_one_sweep(ens, model);
  double mean0 = 0.0, mean1 = 0.0;
  for (int c = 0; c < ens.q(); ++c) {
    mean0 += ens.state(c).bit(0);
    mean1 += ens.state(c).bit(1);
  }
  mean0 /= ens.q();
  mean1 /= ens.q();
  CHECK(mean0 > 0.4985);
  CHECK(mean0 < 0.5015);
  CHECK(mean1 > 0.4985);
  CHECK(mean1 < 0.5015);
}

TEST_CASE("same seeds replay identical states") {
  const auto model = random_model(5, 1.0, 23);
  auto a = init_ensemble(50, 5, InitMode::uniform, 99, 0);
  auto b = init_ensemble(50, 5, InitMode::uniform, 99, 0);
  for (int t = 0; t < 7; ++t) {
    gibbs_one_sweep(a, model);
    gibbs_one_sweep(b, model);
  }
  for (int c = 0; c < 50; ++c) REQUIRE(a.state(c) == b.state(c));
  CHECK(a.sweeps_done() == 7);
}

TEST_CASE("serial and parallel sweeps are bitwise identical") {
  const auto model = random_model(6, 1.1, 31);
  auto a = init_ensemble(123, 6, InitMode::uniform, 5, 0);
  auto b = init_ensemble(123, 6, InitMode::uniform, 5, 0);
  for (int t = 0; t < 5; ++t) {
    gibbs_one_sweep(a, model, Exec::serial);
    gibbs_one_sweep(b, model, Exec::parallel);
  }
  for (int c = 0; c < 123; ++c) REQUIRE(a.state(c) == b.state(c));
  const auto ca = feature_counts(a, model.indexer(), Exec::serial);
  const auto cb = feature_counts(b, model.indexer(), Exec::parallel);
  CHECK(ca == cb);
}

TEST_CASE("init modes: uniform reproducible, data bootstrap, persistent fallback") {
  {
    auto a = init_ensemble(10, 4, InitMode::uniform, 1234, 0);
    auto b = init_ensemble(10, 4, InitMode::uniform, 1234, 0);
    for (int c = 0; c < 10; ++c) REQUIRE(a.state(c) == b.state(c));
  }
  {
    FeatureIndexer idx(3);
    std::vector<Assignment> rows;
    for (std::uint64_t s = 0; s < 8; ++s) rows.push_back(Assignment::from_state_index(3, s));
    Dataset data(idx, rows);
    auto ens = init_ensemble(20, 3, InitMode::data, 55, 0, &data);
    auto ens2 = init_ensemble(20, 3, InitMode::data, 55, 0, &data);
    for (int c = 0; c < 20; ++c) {
      REQUIRE(ens.state(c) == ens2.state(c));
      bool found = false;
      for (const auto& r : rows)
        if (ens.state(c) == r) found = true;
      REQUIRE(found);
    }
    CHECK_THROWS_AS(init_ensemble(20, 3, InitMode::data, 55, 0, nullptr),
                    std::invalid_argument);
  }
  {
    auto ens = init_ensemble(8, 3, InitMode::persistent, 9, 0, nullptr, nullptr);
    CHECK(ens.persistent_fallback());
    auto uniform_twin = init_ensemble(8, 3, InitMode::uniform, 9, 0);
    for (int c = 0; c < 8; ++c) REQUIRE(ens.state(c) == uniform_twin.state(c));

    gibbs_one_sweep(ens, zero_model(3));
    auto continued = init_ensemble(8, 3, InitMode::persistent, 9, 0, nullptr, &ens);
    CHECK_FALSE(continued.persistent_fallback());
    for (int c = 0; c < 8; ++c) REQUIRE(continued.state(c) == ens.state(c));
  }
  CHECK_THROWS_AS(init_ensemble(1, 3, InitMode::uniform, 0, 0), std::invalid_argument);
  {
    // zeros mode: every chain starts at the all-zeros state
    auto ens = init_ensemble(6, 4, InitMode::zeros, 123, 0);
    for (int c = 0; c < 6; ++c) REQUIRE(ens.state(c) == Assignment(4));
    CHECK(parse_init_mode("zeros") == InitMode::zeros);
    CHECK(to_string(InitMode::zeros) == "zeros");
  }
}

TEST_CASE("grad estimate matches the exact gradient for a fair model") {
  const auto model = zero_model(2);
  FeatureIndexer idx(2);
  Dataset ones(idx, {Assignment::from_bits({1, 1})});
  auto ens = init_ensemble(200000, 2, InitMode::uniform, 77, 0);
  const auto est = grad_estimate(model, ones.moments(), ens, 3);
  // exact gradient is (-0.5, -0.75, -0.5); allow a generous Monte Carlo window
  CHECK(est.delta_f[0] == doctest::Approx(-0.5).epsilon(0.01));
  CHECK(est.delta_f[1] == doctest::Approx(-0.75).epsilon(0.01));
  CHECK(est.delta_f[2] == doctest::Approx(-0.5).epsilon(0.01));
  CHECK(est.tau == 3);
  CHECK(est.q == 200000);
  for (std::size_t j = 0; j < est.delta_f.size(); ++j)
    REQUIRE(est.delta_f[j] ==
            doctest::Approx(est.sample_moments[j] - ones.moments()[j]).epsilon(1e-15));
}

TEST_CASE("grad estimate rejects q < 2 and reports zero variance for pinned features") {
  const auto model = zero_model(2);
  std::vector<double> mom{0.5, 0.25, 0.5};
  ChainEnsemble single(1, 2, 0, 0);
  CHECK_THROWS_AS(grad_estimate(model, mom, single, 1), std::invalid_argument);

  FeatureIndexer idx(2);
  std::vector<double> theta(idx.m(), 0.0);
  theta[idx.index(0, 0)] = 40.0;  // x1 pinned to 1
  ModelParams pinned(idx, theta);
  auto ens = init_ensemble(500, 2, InitMode::uniform, 3, 0);
  const auto est = grad_estimate(pinned, mom, ens, 2);
  CHECK(est.variances[idx.index(0, 0)] == 0.0);
  for (double v : est.variances) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 0.25 * 500.0 / 499.0 + 1e-15);
  }
}

TEST_CASE("long-run sample moments approach exact moments") {
  const auto model = random_model(6, 0.8, 61);
  const auto exact = exact_moments(model);
  auto ens = init_ensemble(100000, 6, InitMode::uniform, 8, 0);
  std::vector<double> dummy(exact.size(), 0.0);
  const auto est = grad_estimate(model, dummy, ens, 200);
  // generous envelope: 20 binomial sigmas at q = 1e5
  const double window = 20.0 * std::sqrt(0.25 / 100000.0);
  for (std::size_t j = 0; j < exact.size(); ++j)
    REQUIRE(std::abs(est.sample_moments[j] - exact[j]) <= window);
}

TEST_CASE("feature counts agree with per-sample statistics across word boundaries") {
  // p = 70 spans two state words; compare the tallying kernel against the
  // one-sample reference path
  const int p = 70;
  const FeatureIndexer idx(p);
  ChainEnsemble ens(40, p, 99, 0);
  for (int c = 0; c < 40; ++c) {
    auto words = ens.chain_words(c);
    words[0] = ens.rng(c).next_u64();
    words[1] = ens.rng(c).next_u64() & ((std::uint64_t{1} << (p - 64)) - 1);
  }
  const auto counts = feature_counts(ens, idx);
  std::vector<double> naive(idx.m(), 0.0);
  for (int c = 0; c < 40; ++c) {
    const auto psi = sufficient_statistics(ens.state(c), idx);
    for (int j = 0; j < idx.m(); ++j) naive[j] += psi[j];
  }
  for (int j = 0; j < idx.m(); ++j)
    REQUIRE(static_cast<double>(counts[j]) == naive[j]);

  // sweeps stay deterministic and serial == parallel across words too
  FeatureIndexer midx(p);
  std::vector<double> theta(midx.m(), 0.0);
  CounterStream rng(5, 9);
  for (auto& v : theta) v = 0.4 * (2.0 * rng.next_uniform() - 1.0);
  ModelParams model(midx, theta);
  auto a = init_ensemble(30, p, InitMode::uniform, 7, 0);
  auto b = init_ensemble(30, p, InitMode::uniform, 7, 0);
  gibbs_one_sweep(a, model, Exec::serial);
  gibbs_one_sweep(b, model, Exec::parallel);
  for (int c = 0; c < 30; ++c) REQUIRE(a.state(c) == b.state(c));
}

TEST_CASE("full grad output is a pure function of seeds and config") {
  const auto model = random_model(3, 1.0, 71);
  std::vector<double> mom(model.m(), 0.25);
  auto e1 = init_ensemble(300, 3, InitMode::uniform, 424, 99);
  auto e2 = init_ensemble(300, 3, InitMode::uniform, 424, 99);
  const auto g1 = grad_estimate(model, mom, e1, 4);
  const auto g2 = grad_estimate(model, mom, e2, 4);
  CHECK(g1.delta_f == g2.delta_f);
  CHECK(g1.sample_moments == g2.sample_moments);
  CHECK(g1.variances == g2.variances);
}

}  // TEST_SUITE
