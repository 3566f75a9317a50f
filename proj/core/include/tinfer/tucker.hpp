#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tinfer/linalg.hpp"
#include "tinfer/tensor.hpp"

namespace tinfer {

/// Per-mode rank profile. Bounds are checked against a shape; rank-profile
/// consistency beyond 1 <= r_j <= d_j is not enforced.
struct MultilinearRank {
  std::vector<int> ranks;

  MultilinearRank() = default;
  explicit MultilinearRank(std::vector<int> r);

  int order() const { return static_cast<int>(ranks.size()); }
  int rank(int mode) const { return ranks[static_cast<std::size_t>(mode)]; }
  std::int64_t product() const;  // r*
  void validate_for(const Shape& shape) const;

  bool operator==(const MultilinearRank& other) const { return ranks == other.ranks; }
};

/// Core tensor plus per-mode orthonormal factors U_j (d_j x r_j).
struct TuckerFactorization {
  DenseTensor core;
  std::vector<Matrix> factors;

  int order() const { return static_cast<int>(factors.size()); }
  Shape ambient_shape() const;
  MultilinearRank rank() const;
};

/// Sanity checks: consistent shapes and factor orthonormality to 1e-10.
void validate(const TuckerFactorization& f);

/// core x_1 U_1 ... x_m U_m.
DenseTensor reconstruct(const TuckerFactorization& f);

/// Entry of the reconstruction at a single multi-index, O(r* m) time.
double reconstruct_entry(const TuckerFactorization& f, std::span<const int> index);
double reconstruct_entry_at_offset(const TuckerFactorization& f, std::int64_t offset);

/// Classical HOSVD: per-mode top-r_j left singular subspaces of the
/// unfoldings, core = t x_j U_j^T.
TuckerFactorization hosvd(const DenseTensor& t, const MultilinearRank& r);

/// t x_j (U_j U_j^T) for every mode.
DenseTensor project_multilinear(const DenseTensor& t, std::span<const Matrix> factors);

struct TuckerDiagnostics {
  std::vector<double> incoherence;  // Inco(U_j) = d_j ||U_j||_{2,inf}^2 / r_j
  double lambda_min = 0.0;          // smallest r_j-th unfolding singular value
  double lambda_max = 0.0;
  double kappa = 0.0;
  std::int64_t dof = 0;             // r* + sum_j r_j d_j - r_j^2
};
TuckerDiagnostics diagnostics(const TuckerFactorization& f);

}  // namespace tinfer
