#include <doctest.h>

#include <cmath>

#include "tinfer/regime.hpp"

using namespace tinfer;

TEST_CASE("sample counts below the largest dimension land in region A") {
  const Shape shape({100, 100, 100});
  const RegimeReport r = classify_regime(1e9, 50.0, shape);
  CHECK(r.region == Region::kA);
}

TEST_CASE("10x above the computational thresholds reaches C or better at m=3") {
  const Shape shape({100, 100, 100});
  const double dstar = 1e6;
  const double comp_n = 10.0 * std::sqrt(dstar);
  const double comp_snr = 10.0 * std::sqrt(std::pow(dstar, 1.5) / comp_n);
  const RegimeReport r = classify_regime(comp_snr, comp_n, shape);
  CHECK(static_cast<int>(r.region) >= static_cast<int>(Region::kC));
}

TEST_CASE("the region index is monotone over an snr x n grid") {
  for (int m : {3, 4}) {
    std::vector<int> dims(static_cast<std::size_t>(m), 60);
    const Shape shape(dims);
    const int kGrid = 24;
    std::vector<std::vector<int>> region(kGrid, std::vector<int>(kGrid, 0));
    for (int i = 0; i < kGrid; ++i) {
      for (int j = 0; j < kGrid; ++j) {
        const double snr = std::pow(10.0, -2.0 + 0.5 * i);
        const double n = std::pow(10.0, 0.5 + 0.35 * j);
        region[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            static_cast<int>(classify_regime(snr, n, shape).region);
      }
    }
    for (int i = 0; i < kGrid; ++i) {
      for (int j = 0; j < kGrid; ++j) {
        if (i > 0) CHECK(region[i][j] >= region[i - 1][j]);
        if (j > 0) CHECK(region[i][j] >= region[i][j - 1]);
      }
    }
  }
}

TEST_CASE("m>=4 extends past the computational region to E") {
  const Shape shape({40, 40, 40, 40});
  const RegimeReport r = classify_regime(1e12, 1e7, shape);
  CHECK(r.region == Region::kE);
}

TEST_CASE("m=3 tops out at region D") {
  const Shape shape({50, 50, 50});
  const RegimeReport r = classify_regime(1e15, 1e12, shape);
  CHECK(r.region == Region::kD);
}

TEST_CASE("threshold report carries ratios and the balance warning") {
  const Shape balanced({50, 50, 50});
  CHECK(classify_regime(10.0, 100.0, balanced).balanced);
  const Shape skewed({100, 10, 10});
  const RegimeReport r = classify_regime(10.0, 100.0, skewed);
  CHECK(!r.balanced);
  CHECK(r.imbalance == doctest::Approx(10.0));
  CHECK(r.thresholds.size() == 3);
  for (const ThresholdCheck& c : r.thresholds) {
    CHECK(c.snr_threshold > 0.0);
    CHECK(c.n_threshold > 0.0);
  }
}

TEST_CASE("region letters") {
  CHECK(region_letter(Region::kA) == 'A');
  CHECK(region_letter(Region::kE) == 'E');
}
