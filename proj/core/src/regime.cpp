#include "tinfer/regime.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tinfer {

char region_letter(Region r) {
  switch (r) {
    case Region::kA: return 'A';
    case Region::kB: return 'B';
    case Region::kC: return 'C';
    case Region::kD: return 'D';
    case Region::kE: return 'E';
  }
  return '?';
}

RegimeReport classify_regime(double snr, double n, const Shape& shape) {
  if (!(snr >= 0.0) || !(n > 0.0)) {
    throw std::invalid_argument("classify_regime: snr must be >= 0 and n > 0");
  }
  const int m = shape.order();
  const double dstar = static_cast<double>(shape.num_entries());
  const double dmax = static_cast<double>(shape.max_dim());

  RegimeReport report;
  report.imbalance = dmax / static_cast<double>(shape.min_dim());
  report.balanced = report.imbalance <= 2.0;

  auto make_check = [&](const std::string& name, double snr_thr, double n_thr) {
    ThresholdCheck c;
    c.name = name;
    c.snr_threshold = snr_thr;
    c.n_threshold = n_thr;
    c.snr_ratio = snr_thr > 0.0 ? snr / snr_thr : std::numeric_limits<double>::infinity();
    c.n_ratio = n_thr > 0.0 ? n / n_thr : std::numeric_limits<double>::infinity();
    c.satisfied = snr >= snr_thr && n >= n_thr;
    return c;
  };

  const ThresholdCheck statistical =
      make_check("statistical", std::sqrt(dstar * dmax / n), dmax);
  const ThresholdCheck computational =
      make_check("computational", std::sqrt(std::pow(dstar, 1.5) / n), std::sqrt(dstar));
  const ThresholdCheck dependent =
      make_check("dependent-init", std::sqrt(dmax) * std::sqrt(dstar * dmax / n),
                 std::pow(dmax, 1.5));
  report.thresholds = {statistical, computational, dependent};

  // Predicates are nested by conjunction so the region index is monotone in
  // both snr and n.
  report.region = Region::kA;
  if (statistical.satisfied) report.region = Region::kB;
  if (m == 3) {
    if (statistical.satisfied && computational.satisfied) report.region = Region::kC;
    if (statistical.satisfied && computational.satisfied && dependent.satisfied) {
      report.region = Region::kD;
    }
  } else {
    if (statistical.satisfied && dependent.satisfied) report.region = Region::kD;
    if (statistical.satisfied && dependent.satisfied && computational.satisfied) {
      report.region = Region::kE;
    }
  }
  return report;
}

}  // namespace tinfer
