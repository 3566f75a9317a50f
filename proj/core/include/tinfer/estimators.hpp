#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tinfer/sampling.hpp"
#include "tinfer/tensor.hpp"
#include "tinfer/tucker.hpp"

namespace tinfer {

struct EstimatorConfig {
  MultilinearRank rank;
  int steps = 0;
  /// Offline RGD step size; defaults to d*/n when unset.
  std::optional<double> step_size;
  /// Online RGD step size coefficient: eta = online_step_coeff * log(max dim) / n.
  double online_step_coeff = 1.0;
  /// Early-stop threshold on the relative F-norm change per offline step
  /// (0 disables early stopping).
  double tolerance = 0.0;
};

struct CompletionResult {
  TuckerFactorization estimate;
  /// Relative F-error against the supplied ground truth, one entry per
  /// recorded iteration (offline: every step; online: thinned checkpoints
  /// ending at the final state). Empty when no truth is supplied.
  std::vector<double> trajectory;
};

/// Sum of y_i at their cells; duplicate cells accumulate.
DenseTensor observation_tensor(const ObservationSet& obs);

/// Empirical squared loss sum_i (t[cell_i] - y_i)^2.
double observed_squared_loss(const ObservationSet& obs, const DenseTensor& t);

/// Spectral initialization with diagonal deletion: per mode, the top-r_j
/// eigen-subspace of the unfolded observation Gram matrix with its diagonal
/// zeroed; the rescaled observation tensor is then projected onto those
/// subspaces and returned in core/factor form.
TuckerFactorization diag_deletion_init(const ObservationSet& obs, const MultilinearRank& rank);

/// Orthogonal projection of g onto the tangent space of the fixed-rank
/// manifold at reconstruct(f). Linear, idempotent, and self-adjoint.
DenseTensor tangent_project_at(const TuckerFactorization& f, const DenseTensor& g);

/// The debiased tensor: reconstruct(init) + (d*/n) sum_i (y_i - pred_i) X_i.
DenseTensor debias_only(const ObservationSet& obs, const TuckerFactorization& init);

/// Debias followed by exactly one power iteration: per mode, the top-r_j
/// left singular subspace of the debiased tensor compressed by the initial
/// factors of every other mode; returns the final estimate in core/factor
/// form (reconstruction equals the debiased tensor projected onto the new
/// subspaces).
TuckerFactorization debias_power_iteration(const ObservationSet& obs,
                                           const TuckerFactorization& init);

/// Subspace power iterations (HOOI sweeps) on the rescaled observation
/// tensor, warm-started from the given factors. Sharpens a rough spectral
/// start enough for gradient descent; the core is the compression of
/// (d*/n) * observation_tensor by the final subspaces.
TuckerFactorization spectral_power_refine(const ObservationSet& obs,
                                          const TuckerFactorization& init, int iterations);

/// Offline Riemannian gradient descent with tangent-space projected gradient
/// steps and HOSVD retraction. Steps that would increase the empirical
/// squared loss after retraction are halved (up to 8 times) before being
/// taken, which keeps warm starts near the basin boundary from diverging.
CompletionResult rgd_offline(const ObservationSet& obs, const TuckerFactorization& init,
                             const EstimatorConfig& cfg, const DenseTensor* truth = nullptr);

/// One pass of online Riemannian gradient descent over the observations in
/// order. Gradients are rank-one, so each step runs in O(sum_j d_j r_j^2 +
/// poly(r)) time without touching all d* cells.
CompletionResult rgd_online(const ObservationSet& obs, const TuckerFactorization& init,
                            const EstimatorConfig& cfg, const DenseTensor* truth = nullptr);

/// Observation-independent initialization: HOSVD_r(truth + E) where E is a
/// seeded Gaussian tensor scaled so its linf norm equals target_linf exactly.
/// target_linf == 0 returns the truth unchanged.
TuckerFactorization make_independent_init(const TuckerFactorization& truth, double target_linf,
                                          std::uint64_t seed, std::uint64_t trial = 0);

}  // namespace tinfer
