#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "tinfer/rng.hpp"

using namespace tinfer;

TEST_CASE("identical stream coordinates reproduce identical draws") {
  Rng a(42, 3, StreamPurpose::kObservations);
  Rng b(42, 3, StreamPurpose::kObservations);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different purposes and trials give different streams") {
  Rng a(42, 3, StreamPurpose::kObservations);
  Rng b(42, 3, StreamPurpose::kInit);
  Rng c(42, 4, StreamPurpose::kObservations);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++same_ab;
    if (va == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("uniform values live in [0,1) and are roughly uniform") {
  Rng rng(7, 0, StreamPurpose::kGeneric);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 0.005);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.005);
}

TEST_CASE("gaussian moments") {
  Rng rng(11, 0, StreamPurpose::kGeneric);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("uniform_int is unbiased across a small range") {
  Rng rng(13, 0, StreamPurpose::kGeneric);
  const int n = 70000;
  int counts[7] = {0};
  for (int i = 0; i < n; ++i) counts[rng.uniform_int(7)]++;
  for (int k = 0; k < 7; ++k) {
    CHECK(std::abs(counts[k] - n / 7.0) < 5.0 * std::sqrt(n / 7.0));
  }
}

TEST_CASE("poisson mean and variance") {
  Rng rng(17, 0, StreamPurpose::kGeneric);
  for (double lambda : {0.3, 3.0, 40.0}) {
    const int n = 40000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(lambda));
      sum += k;
      sumsq += k * k;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean - lambda) < 0.08 * std::max(1.0, lambda));
    CHECK(std::abs(var - lambda) < 0.12 * std::max(1.0, lambda));
  }
}

TEST_CASE("poisson survives means past the exp underflow knee") {
  Rng rng(19, 0, StreamPurpose::kGeneric);
  const double lambda = 1500.0;
  double sum = 0.0;
  const int n = 400;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(lambda));
  CHECK(std::abs(sum / n - lambda) < 0.05 * lambda);
}

TEST_CASE("exponential mean") {
  Rng rng(23, 0, StreamPurpose::kGeneric);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.exponential(2.5);
  CHECK(std::abs(sum / n - 2.5) < 0.05);
}
