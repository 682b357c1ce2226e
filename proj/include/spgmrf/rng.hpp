#pragma once

#include <array>
#include <cstdint>

namespace spgmrf {

/**
 * Philox4x32-10 keyed counter permutation. Stateless: output is a pure
 * function of (counter, key), which is what makes chain-parallel sampling
 * replayable regardless of thread scheduling.
 */
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> x,
                                                  std::array<std::uint32_t, 2> k) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round != 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    const std::uint64_t prod0 = static_cast<std::uint64_t>(kMul0) * x[0];
    const std::uint64_t prod1 = static_cast<std::uint64_t>(kMul1) * x[2];
    x = {static_cast<std::uint32_t>(prod1 >> 32) ^ x[1] ^ k[0],
         static_cast<std::uint32_t>(prod1),
         static_cast<std::uint32_t>(prod0 >> 32) ^ x[3] ^ k[1],
         static_cast<std::uint32_t>(prod0)};
  }
  return x;
}

/// Identifier recorded in run metadata so outputs can name their generator.
inline constexpr const char* kRngAlgorithm = "philox4x32-10";

/// Stream-space partitions so different consumers of one master seed never
/// share a substream. Optimizer ensembles use (iteration << 32) + chain,
/// which stays clear of these tags.
inline constexpr std::uint64_t kStreamGroundTruth = 0xA000000000000000ull;
inline constexpr std::uint64_t kStreamDataset = 0xB000000000000000ull;
inline constexpr std::uint64_t kStreamThetaInit = 0xF000000000000001ull;

/**
 * One logical random stream: the key is the master seed, the stream id
 * selects an independent substream, and a 64-bit block counter advances as
 * numbers are drawn. Each Philox block yields two 64-bit outputs, buffered.
 */
class CounterStream {
public:
  CounterStream() : CounterStream(0, 0) {}
  CounterStream(std::uint64_t master_seed, std::uint64_t stream)
      : seed_(master_seed), stream_(stream) {}

  std::uint64_t next_u64() {
    if (avail_ == 0) refill();
    return buf_[--avail_];
  }

  /// Uniform double in [0,1), 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t stream() const { return stream_; }
  std::uint64_t master_seed() const { return seed_; }

private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed_),
        static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32_10(ctr, key);
    buf_[1] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buf_[0] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    avail_ = 2;
    ++block_;
  }

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int avail_ = 0;
};

}  // namespace spgmrf
