#include "entropy_cpd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace entropy_cpd::rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline Philox4x32::Block single_round(const Philox4x32::Block& x,
                                      const Philox4x32::Key& k) {
  const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * x[0];
  const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * x[2];
  return {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k[0],
          static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k[1],
          static_cast<std::uint32_t>(p0)};
}

}  // namespace

Philox4x32::Block Philox4x32::generate(Block counter, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    counter = single_round(counter, key);
  }
  return counter;
}

std::uint32_t hash_tag(std::string_view tag) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint32_t domain,
                           std::uint64_t index) {
  key_ = {static_cast<std::uint32_t>(seed),
          static_cast<std::uint32_t>(seed >> 32)};
  stream_lo_ = static_cast<std::uint32_t>(index);
  stream_hi_ = domain + 0x9E3779B9u * static_cast<std::uint32_t>(index >> 32);
}

void RandomStream::refill() {
  const Philox4x32::Block counter = {static_cast<std::uint32_t>(block_),
                                     static_cast<std::uint32_t>(block_ >> 32),
                                     stream_lo_, stream_hi_};
  buffer_ = Philox4x32::generate(counter, key_);
  ++block_;
  buffer_pos_ = 0;
}

std::uint32_t RandomStream::next_u32() {
  if (buffer_pos_ >= 4) refill();
  return buffer_[buffer_pos_++];
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return lo | (hi << 32);
}

double RandomStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  // u1 in (0,1] so the log is finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * M_PI * u2);
}

std::int64_t RandomStream::binomial(std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial(n, 1.0 - p);
  if (static_cast<double>(n) * p < 10.0) return binomial_inversion(n, p);
  return binomial_btrs(n, p);
}

std::int64_t RandomStream::binomial_inversion(std::int64_t n, double p) {
  const double odds = p / (1.0 - p);
  const double u = uniform01();
  double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
  double cdf = pmf;
  std::int64_t k = 0;
  while (u > cdf && k < n) {
    ++k;
    pmf *= odds * static_cast<double>(n - k + 1) / static_cast<double>(k);
    cdf += pmf;
  }
  return k;
}

std::int64_t RandomStream::binomial_btrs(std::int64_t n, double p) {
  // Hormann (1993), transformed rejection with exact log-pmf acceptance.
  const double nd = static_cast<double>(n);
  const double spq = std::sqrt(nd * p * (1.0 - p));
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / (1.0 - p));
  const double m = std::floor((nd + 1.0) * p);
  const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);

  for (;;) {
    const double u = uniform01() - 0.5;
    double v = uniform01();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + c);
    if (kd < 0.0 || kd > nd) continue;
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kd);
    v = std::log(v * alpha / (a / (us * us) + b));
    const double accept = h - std::lgamma(kd + 1.0) -
                          std::lgamma(nd - kd + 1.0) + (kd - m) * lpq;
    if (v <= accept) return static_cast<std::int64_t>(kd);
  }
}

Eigen::ArrayXd RandomStream::multinomial(std::int64_t n,
                                         const Eigen::ArrayXd& probs) {
  const Eigen::Index k = probs.size();
  Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(k);
  std::int64_t remaining = n;
  double mass = 1.0;
  for (Eigen::Index i = 0; i + 1 < k && remaining > 0; ++i) {
    const double cond = std::clamp(probs[i] / mass, 0.0, 1.0);
    const std::int64_t c = binomial(remaining, cond);
    counts[i] = static_cast<double>(c);
    remaining -= c;
    mass -= probs[i];
    if (mass <= 0.0) break;
  }
  counts[k - 1] += static_cast<double>(remaining);
  return counts;
}

int RandomStream::categorical(const Eigen::ArrayXd& probs) {
  const double u = uniform01();
  double cum = 0.0;
  const Eigen::Index k = probs.size();
  for (Eigen::Index i = 0; i < k; ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(k - 1);
}

}  // namespace entropy_cpd::rng
