#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace entropy_cpd::rng {

// Philox 4x32-10 counter-based block cipher (Salmon et al. 2011).
// Chosen so that every Monte Carlo trajectory can own an independent,
// cheaply constructed stream keyed by (seed, domain, index): parallel
// and serial runs then consume identical randomness per trajectory.
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key);
};

// 32-bit FNV-1a, used to hash experiment tags into a stream domain.
std::uint32_t hash_tag(std::string_view tag);

// One independent stream of a counter-based generator. Streams with
// distinct (seed, domain, index) triples never overlap.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t domain, std::uint64_t index);
  RandomStream(std::uint64_t seed, std::string_view tag, std::uint64_t index)
      : RandomStream(seed, hash_tag(tag), index) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double uniform01();

  // Standard normal via Box-Muller (two uniforms per call).
  double normal();

  // Binomial(n, p). Inversion for small n*p, transformed rejection
  // (Hormann's BTRS) otherwise, so a draw is O(1) for any n.
  std::int64_t binomial(std::int64_t n, double p);

  // Multinomial counts by sequential conditional binomials: O(k) per
  // vector independent of n.
  Eigen::ArrayXd multinomial(std::int64_t n, const Eigen::ArrayXd& probs);

  // One categorical index by CDF inversion.
  int categorical(const Eigen::ArrayXd& probs);

 private:
  Philox4x32::Key key_;
  std::uint32_t stream_lo_ = 0;
  std::uint32_t stream_hi_ = 0;
  std::uint64_t block_ = 0;
  Philox4x32::Block buffer_{};
  int buffer_pos_ = 4;

  void refill();
  std::int64_t binomial_inversion(std::int64_t n, double p);
  std::int64_t binomial_btrs(std::int64_t n, double p);
};

}  // namespace entropy_cpd::rng
