#include "spgmrf/gibbs.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace spgmrf {

namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double field_from_words(const ModelParams& model, std::span<const std::uint64_t> words,
                        int site) {
  const auto row = model.xi_row(site);
  double dot = 0.0;
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      dot += row[w * 64 + std::countr_zero(bits)];
      bits &= bits - 1;
    }
  }
  const int self = static_cast<int>((words[static_cast<std::size_t>(site) >> 6] >>
                                     (site & 63)) & 1u);
  return row[site] + dot - row[site] * self;
}

void sweep_chain(const ModelParams& model, std::span<std::uint64_t> words,
                 CounterStream& rng) {
  const int p = model.p();
  for (int i = 0; i < p; ++i) {
    const double u = rng.next_uniform();
    const double p1 = sigmoid(field_from_words(model, words, i));
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    auto& w = words[static_cast<std::size_t>(i) >> 6];
    w = (u < p1) ? (w | mask) : (w & ~mask);
  }
}

}  // namespace

InitMode parse_init_mode(const std::string& s) {
  if (s == "uniform") return InitMode::uniform;
  if (s == "zeros") return InitMode::zeros;
  if (s == "data") return InitMode::data;
  if (s == "persistent") return InitMode::persistent;
  throw std::invalid_argument("unknown init mode: " + s);
}

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::uniform: return "uniform";
    case InitMode::zeros: return "zeros";
    case InitMode::data: return "data";
    case InitMode::persistent: return "persistent";
  }
  return "?";
}

ChainEnsemble::ChainEnsemble(int q, int p, std::uint64_t master_seed,
                             std::uint64_t stream_base)
    : q_(q), p_(p), master_seed_(master_seed) {
  if (q < 1) throw std::invalid_argument("ChainEnsemble: q must be >= 1");
  if (p < 1) throw std::invalid_argument("ChainEnsemble: p must be >= 1");
  words_per_chain_ = (p + 63) / 64;
  states_.assign(static_cast<std::size_t>(q) * words_per_chain_, 0);
  rng_.reserve(q);
  for (int c = 0; c < q; ++c)
    rng_.emplace_back(master_seed, stream_base + static_cast<std::uint64_t>(c));
}

Assignment ChainEnsemble::state(int chain) const {
  Assignment a(p_);
  const auto src = chain_words(chain);
  std::copy(src.begin(), src.end(), a.words().begin());
  return a;
}

void ChainEnsemble::set_state(int chain, const Assignment& x) {
  if (x.p() != p_) throw std::invalid_argument("ChainEnsemble::set_state: dimension mismatch");
  const auto src = x.words();
  auto dst = chain_words(chain);
  std::copy(src.begin(), src.end(), dst.begin());
}

std::span<const std::uint64_t> ChainEnsemble::chain_words(int chain) const {
  return {states_.data() + static_cast<std::size_t>(chain) * words_per_chain_,
          static_cast<std::size_t>(words_per_chain_)};
}

std::span<std::uint64_t> ChainEnsemble::chain_words(int chain) {
  return {states_.data() + static_cast<std::size_t>(chain) * words_per_chain_,
          static_cast<std::size_t>(words_per_chain_)};
}

double conditional_prob(const ModelParams& model, const Assignment& x, int site) {
  if (site < 0 || site >= model.p())
    throw std::invalid_argument("conditional_prob: site out of range");
  return sigmoid(model.local_field(site, x));
}

ChainEnsemble init_ensemble(int q, int p, InitMode mode, std::uint64_t master_seed,
                            std::uint64_t stream_base, const Dataset* data,
                            const ChainEnsemble* prev) {
  if (q < 2) throw std::invalid_argument("init_ensemble: q must be >= 2");
  if (mode == InitMode::data && data == nullptr)
    throw std::invalid_argument("init_ensemble: data mode needs a dataset");

  if (mode == InitMode::persistent && prev != nullptr) {
    if (prev->p() != p || prev->q() != q)
      throw std::invalid_argument("init_ensemble: persistent shape mismatch");
    ChainEnsemble cont = *prev;  // chains, streams and counters continue
    cont.set_persistent_fallback(false);
    return cont;
  }

  ChainEnsemble ens(q, p, master_seed, stream_base);
  if (mode == InitMode::persistent) ens.set_persistent_fallback(true);

  if (mode == InitMode::zeros) return ens;  // states default to all-zeros

  if (mode == InitMode::data) {
    const auto& rows = data->samples();
    if (data->p() != p) throw std::invalid_argument("init_ensemble: dataset dimension mismatch");
    const std::uint64_t n = rows.size();
    for (int c = 0; c < q; ++c) {
      const std::uint64_t r = ens.rng(c).next_u64() % n;
      ens.set_state(c, rows[static_cast<std::size_t>(r)]);
    }
    return ens;
  }

  // uniform (also the persistent fallback): iid fair bits from each chain's
  // own stream
  const int words = ens.words_per_chain();
  for (int c = 0; c < q; ++c) {
    auto dst = ens.chain_words(c);
    for (int w = 0; w < words; ++w) dst[w] = ens.rng(c).next_u64();
    const int tail = p - (words - 1) * 64;
    if (tail < 64) dst[words - 1] &= (std::uint64_t{1} << tail) - 1;
  }
  return ens;
}

void gibbs_one_sweep(ChainEnsemble& ensemble, const ModelParams& model, Exec ex) {
  if (ensemble.p() != model.p())
    throw std::invalid_argument("gibbs_one_sweep: dimension mismatch");
  const int q = ensemble.q();

  struct Ctx {
    ChainEnsemble* ens;
    const ModelParams* model;
  } ctx{&ensemble, &model};
  // One "block" per chain: chains are independent and own their RNG
  // streams, so any schedule yields identical states.
  par::detail::run_blocks(static_cast<std::uint64_t>(q), ex, &ctx,
                          [](void* p, std::uint64_t c) {
                            auto& ctx = *static_cast<Ctx*>(p);
                            sweep_chain(*ctx.model,
                                        ctx.ens->chain_words(static_cast<int>(c)),
                                        ctx.ens->rng(static_cast<int>(c)));
                          });
  ensemble.bump_sweeps();
}

std::vector<std::uint64_t> feature_counts(const ChainEnsemble& ensemble,
                                          const FeatureIndexer& idx, Exec ex) {
  if (idx.p() != ensemble.p())
    throw std::invalid_argument("feature_counts: dimension mismatch");
  const int q = ensemble.q();
  const std::size_t m = static_cast<std::size_t>(idx.m());

  // Counts are exact integers, so a per-block tally followed by any-order
  // merging is deterministic.
  const std::uint64_t nblocks =
      (static_cast<std::uint64_t>(q) + par::kBlockSize - 1) / par::kBlockSize;
  std::vector<std::uint64_t> counts(m, 0);
  std::vector<std::vector<std::uint64_t>> partial(nblocks);

  struct Ctx {
    const ChainEnsemble* ens;
    const FeatureIndexer* idx;
    std::vector<std::vector<std::uint64_t>>* partial;
    std::size_t m;
    int q;
  } ctx{&ensemble, &idx, &partial, m, q};

  par::detail::run_blocks(nblocks, ex, &ctx, [](void* p, std::uint64_t b) {
    auto& c = *static_cast<Ctx*>(p);
    auto& local = (*c.partial)[b];
    local.assign(c.m, 0);
    const int begin = static_cast<int>(b * par::kBlockSize);
    const int end = std::min(c.q, static_cast<int>((b + 1) * par::kBlockSize));
    const int pdim = c.ens->p();
    for (int chain = begin; chain < end; ++chain) {
      const auto words = c.ens->chain_words(chain);
      for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t bits = words[w];
        while (bits) {
          const int i = static_cast<int>(w * 64) + std::countr_zero(bits);
          bits &= bits - 1;
          ++local[c.idx->index(i, i)];
          // remaining bits in this word
          std::uint64_t rest = bits;
          while (rest) {
            const int j = static_cast<int>(w * 64) + std::countr_zero(rest);
            rest &= rest - 1;
            ++local[c.idx->index(i, j)];
          }
          // bits in later words
          for (std::size_t w2 = w + 1; w2 < words.size(); ++w2) {
            std::uint64_t rest2 = words[w2];
            while (rest2) {
              const int j = static_cast<int>(w2 * 64) + std::countr_zero(rest2);
              rest2 &= rest2 - 1;
              ++local[c.idx->index(i, j)];
            }
          }
        }
      }
    }
    (void)pdim;
  });

  for (const auto& local : partial)
    for (std::size_t j = 0; j < m; ++j) counts[j] += local[j];
  return counts;
}

void moments_from_counts(std::span<const std::uint64_t> counts, int q,
                         std::vector<double>& moments, std::vector<double>& variances) {
  const double qd = static_cast<double>(q);
  moments.resize(counts.size());
  variances.resize(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double c = static_cast<double>(counts[j]);
    moments[j] = c / qd;
    // unbiased sample variance of a 0/1 feature: (c - c^2/q) / (q-1)
    variances[j] = (c - c * c / qd) / (qd - 1.0);
  }
}

GradEstimate grad_estimate(const ModelParams& model, std::span<const double> data_moments,
                           ChainEnsemble& ensemble, int sweeps, Exec ex) {
  if (ensemble.q() < 2) throw std::invalid_argument("grad_estimate: q must be >= 2");
  if (sweeps < 1) throw std::invalid_argument("grad_estimate: sweeps must be >= 1");
  if (static_cast<int>(data_moments.size()) != model.m())
    throw std::invalid_argument("grad_estimate: moment dimension mismatch");
  for (int t = 0; t < sweeps; ++t) gibbs_one_sweep(ensemble, model, ex);

  GradEstimate est;
  est.q = ensemble.q();
  est.tau = sweeps;
  const auto counts = feature_counts(ensemble, model.indexer(), ex);
  moments_from_counts(counts, est.q, est.sample_moments, est.variances);
  est.delta_f.resize(est.sample_moments.size());
  for (std::size_t j = 0; j < est.delta_f.size(); ++j)
    est.delta_f[j] = est.sample_moments[j] - data_moments[j];
  return est;
}

}  // namespace spgmrf
