// Times the OpenMP kernels against their serial reference implementations
// and verifies they produce identical results while doing so.

#include <chrono>
#include <cstdio>
#include <vector>

#include "spgmrf/exact.hpp"
#include "spgmrf/gibbs.hpp"
#include "spgmrf/parallel.hpp"
#include "spgmrf/rng.hpp"

using namespace spgmrf;

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

ModelParams random_model(int p, double scale, std::uint64_t seed) {
  FeatureIndexer idx(p);
  CounterStream rng(seed, 0);
  std::vector<double> theta(idx.m());
  for (auto& v : theta) v = scale * (2.0 * rng.next_uniform() - 1.0);
  return ModelParams(idx, theta);
}

struct Timing {
  double serial_ms;
  double parallel_ms;
  bool identical;
};

void report(const char* name, const Timing& t) {
  std::printf("%-28s serial %9.1f ms   parallel %9.1f ms   speedup %5.2fx   %s\n", name,
              t.serial_ms, t.parallel_ms, t.serial_ms / t.parallel_ms,
              t.identical ? "identical" : "MISMATCH");
}

Timing bench_sweeps(int q, int p, int sweeps) {
  const auto model = random_model(p, 0.8, 17);
  auto a = init_ensemble(q, p, InitMode::uniform, 1, 0);
  auto b = init_ensemble(q, p, InitMode::uniform, 1, 0);

  const double t0 = now_ms();
  for (int t = 0; t < sweeps; ++t) gibbs_one_sweep(a, model, Exec::serial);
  const double t1 = now_ms();
  for (int t = 0; t < sweeps; ++t) gibbs_one_sweep(b, model, Exec::parallel);
  const double t2 = now_ms();

  bool same = true;
  for (int c = 0; c < q; ++c)
    if (!(a.state(c) == b.state(c))) same = false;
  return {t1 - t0, t2 - t1, same};
}

Timing bench_moments(int p) {
  const auto model = random_model(p, 0.7, 23);
  const double t0 = now_ms();
  const auto ms = exact_moments(model, Exec::serial);
  const double t1 = now_ms();
  const auto mp = exact_moments(model, Exec::parallel);
  const double t2 = now_ms();
  return {t1 - t0, t2 - t1, ms == mp};
}

Timing bench_log_partition(int p) {
  const auto model = random_model(p, 0.7, 29);
  const double t0 = now_ms();
  const double s = log_partition(model, Exec::serial);
  const double t1 = now_ms();
  const double r = log_partition(model, Exec::parallel);
  const double t2 = now_ms();
  return {t1 - t0, t2 - t1, s == r};
}

Timing bench_counts(int q, int p) {
  const auto model = random_model(p, 0.8, 31);
  auto ens = init_ensemble(q, p, InitMode::uniform, 2, 0);
  gibbs_one_sweep(ens, model);
  const double t0 = now_ms();
  const auto cs = feature_counts(ens, model.indexer(), Exec::serial);
  const double t1 = now_ms();
  const auto cp = feature_counts(ens, model.indexer(), Exec::parallel);
  const double t2 = now_ms();
  return {t1 - t0, t2 - t1, cs == cp};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) par::set_max_threads(std::atoi(argv[1]));
  std::printf("threads: %d\n", par::effective_threads());
  report("gibbs sweeps q=20000 p=20", bench_sweeps(20000, 20, 50));
  report("gibbs sweeps q=2000  p=100", bench_sweeps(2000, 100, 20));
  report("feature counts q=200000", bench_counts(200000, 20));
  report("exact moments p=16", bench_moments(16));
  report("log partition p=18", bench_log_partition(18));
  return 0;
}
