#pragma once

// Counter-based random numbers (Philox 4x64, 10 rounds).  Each (seed, stream,
// sequence) triple addresses an independent 2^66-byte stream, so simulation
// replicates can be generated in any order, or in parallel, and still be
// bit-for-bit reproducible.

#include <array>
#include <cstdint>

#include "brlogit/math.hpp"

namespace brlogit {

namespace detail {

inline void mulhilo64(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

}  // namespace detail

// One 256-bit Philox block: encrypt the counter under the key.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) {
  constexpr std::uint64_t m0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t m1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t w0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t w1 = 0xBB67AE8584CAA73BULL;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    detail::mulhilo64(m0, ctr[0], hi0, lo0);
    detail::mulhilo64(m1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t sequence)
      : key_{seed, stream}, ctr_{0, sequence, 0, 0} {}

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      // The counter advances (with carry) before each block is produced.
      for (int w = 0; w < 4 && ++ctr_[w] == 0; ++w) {
      }
      block_ = philox4x64(ctr_, key_);
      pos_ = 0;
    }
    return block_[pos_++];
  }

  // Uniform strictly inside (0,1), so inverse-CDF transforms stay finite.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> ctr_;
  std::array<std::uint64_t, 4> block_{};
  int pos_ = 4;
};

}  // namespace brlogit
