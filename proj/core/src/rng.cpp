#include "tinfer/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace tinfer {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kTrialSalt = 0xD1B54A32D192ED03ull;
constexpr std::uint64_t kPurposeSalt = 0x8CB92BA72F3D8DD7ull;
}  // namespace

std::uint64_t Rng::mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

Rng::Rng(std::uint64_t seed, std::uint64_t trial, StreamPurpose purpose) {
  std::uint64_t key = mix(seed + kGamma);
  key = mix(key ^ (kTrialSalt * (trial + 1)));
  key = mix(key ^ (kPurposeSalt * (static_cast<std::uint64_t>(purpose) + 1)));
  state_ = key;
}

std::uint64_t Rng::next_u64() {
  state_ += kGamma;
  return mix(state_);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % un + 1) % un;
  std::uint64_t x = next_u64();
  while (x > limit) x = next_u64();
  return static_cast<std::int64_t>(x % un);
}

double Rng::gaussian() {
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

bool Rng::bernoulli(double p) {
  return uniform() < p;
}

double Rng::exponential(double mean) {
  if (mean <= 0.0) throw std::invalid_argument("Rng::exponential: mean must be positive");
  return -mean * std::log(uniform_open());
}

std::int64_t Rng::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("Rng::poisson: mean must be nonnegative");
  std::int64_t total = 0;
  // exp(-mean) underflows past ~700; large means are split into exact chunks.
  while (mean > 500.0) {
    const double chunk = 500.0;
    const double limit = std::exp(-chunk);
    std::int64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform_open();
    } while (p > limit);
    total += k - 1;
    mean -= chunk;
  }
  const double limit = std::exp(-mean);
  std::int64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform_open();
  } while (p > limit);
  return total + k - 1;
}

}  // namespace tinfer
