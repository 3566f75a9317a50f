#include "tinfer/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tinfer/errors.hpp"
#include "tinfer/linalg.hpp"
#include "tinfer/rng.hpp"

namespace tinfer {

DenseTensor observation_tensor(const ObservationSet& obs) {
  DenseTensor t(obs.shape);
  // Serial accumulation in sample order keeps results bit-reproducible.
  for (const Observation& s : obs.samples) t[s.offset] += s.y;
  return t;
}

namespace {

void require_matching_shape(const ObservationSet& obs, const TuckerFactorization& f,
                            const char* what) {
  if (!(obs.shape == f.ambient_shape())) {
    throw std::invalid_argument(std::string(what) + ": observation shape does not match estimate");
  }
}

// Compress every mode except `skip` by the transposed factors.
DenseTensor compress_except(const DenseTensor& t, const std::vector<Matrix>& factors, int skip) {
  DenseTensor out = t;
  for (int k = 0; k < static_cast<int>(factors.size()); ++k) {
    if (k == skip) continue;
    out = marginal_multiply(out, k, transpose(factors[static_cast<std::size_t>(k)]));
  }
  return out;
}

// HOSVD of a tensor already given in core/factor form with orthonormal
// factors: only the small core is decomposed and the factors are composed.
// Exact because orthonormal compressions preserve the unfolding spectra.
TuckerFactorization hosvd_of_factored(const DenseTensor& small_core,
                                      const std::vector<Matrix>& factors,
                                      const MultilinearRank& rank) {
  TuckerFactorization inner = hosvd(small_core, rank);
  TuckerFactorization out;
  out.core = std::move(inner.core);
  out.factors.reserve(factors.size());
  for (int j = 0; j < static_cast<int>(factors.size()); ++j) {
    out.factors.push_back(matmul(factors[static_cast<std::size_t>(j)],
                                 inner.factors[static_cast<std::size_t>(j)]));
  }
  return out;
}

}  // namespace

TuckerFactorization diag_deletion_init(const ObservationSet& obs, const MultilinearRank& rank) {
  if (obs.count() < 1) throw std::invalid_argument("diag_deletion_init: need at least one sample");
  rank.validate_for(obs.shape);

  const DenseTensor tobv = observation_tensor(obs);
  const int m = obs.shape.order();
  std::vector<Matrix> factors;
  factors.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    Matrix gram = matmul_a_bt(unfold(tobv, j), unfold(tobv, j));
    for (double v : gram.data) {
      if (!std::isfinite(v)) throw NumericError("diag_deletion_init: non-finite Gram matrix");
    }
    const int d = gram.rows;
    const int r = rank.rank(j);
    const double gram_norm = frobenius_norm(gram);

    // The Gram diagonal is biased by squared noise and sampling; start from
    // the deleted diagonal and iteratively impute it from the current rank-r
    // approximation. On an exactly low-rank Gram this restores the true
    // diagonal, so a fully observed noiseless tensor is recovered exactly.
    for (int i = 0; i < d; ++i) gram(i, i) = 0.0;
    Matrix u(d, r);
    for (int round = 0; round < 150; ++round) {
      SymEig eig = jacobi_eigh(gram);
      // SVD semantics on the symmetric matrix: order by |eigenvalue|.
      std::vector<int> order(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
      std::stable_sort(order.begin(), order.end(), [&eig](int a, int b) {
        return std::abs(eig.values[static_cast<std::size_t>(a)]) >
               std::abs(eig.values[static_cast<std::size_t>(b)]);
      });
      for (int c = 0; c < r; ++c) {
        const int src = order[static_cast<std::size_t>(c)];
        for (int row = 0; row < d; ++row) u(row, c) = eig.vectors(row, src);
      }
      double diag_change = 0.0;
      for (int i = 0; i < d; ++i) {
        double imputed = 0.0;
        for (int c = 0; c < r; ++c) {
          imputed += eig.values[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])] *
                     u(i, c) * u(i, c);
        }
        diag_change = std::max(diag_change, std::abs(gram(i, i) - imputed));
        gram(i, i) = imputed;
      }
      if (diag_change <= 1e-13 * gram_norm) break;
    }
    // Sign convention: largest-magnitude entry positive.
    for (int c = 0; c < u.cols; ++c) {
      int arg = 0;
      for (int row = 1; row < u.rows; ++row) {
        if (std::abs(u(row, c)) > std::abs(u(arg, c))) arg = row;
      }
      if (u(arg, c) < 0.0) {
        for (int row = 0; row < u.rows; ++row) u(row, c) = -u(row, c);
      }
    }
    factors.push_back(std::move(u));
  }

  const double scale_factor = static_cast<double>(obs.shape.num_entries()) /
                              static_cast<double>(obs.count());
  DenseTensor small = tobv;
  for (int j = 0; j < m; ++j) {
    small = marginal_multiply(small, j, transpose(factors[static_cast<std::size_t>(j)]));
  }
  for (double& v : small.data()) v *= scale_factor;
  return hosvd_of_factored(small, factors, rank);
}

DenseTensor tangent_project_at(const TuckerFactorization& f, const DenseTensor& g) {
  if (!(g.shape() == f.ambient_shape())) {
    throw std::invalid_argument("tangent_project_at: shape mismatch");
  }
  const int m = f.order();

  // Component through the factor subspaces: g x_j P_{U_j} for all modes.
  DenseTensor compressed = g;
  for (int j = 0; j < m; ++j) {
    compressed = marginal_multiply(compressed, j, transpose(f.factors[static_cast<std::size_t>(j)]));
  }
  DenseTensor result = compressed;
  for (int j = 0; j < m; ++j) {
    result = marginal_multiply(result, j, f.factors[static_cast<std::size_t>(j)]);
  }

  // Per-mode complement components: C x_{k != j} U_k x_j W_j with
  // W_j = (I - P_{U_j}) M_j(g x_{k != j} U_k^T) pinv(M_j(C)).
  for (int j = 0; j < m; ++j) {
    const Matrix& u = f.factors[static_cast<std::size_t>(j)];
    const Matrix a = unfold(compress_except(g, f.factors, j), j);  // d_j x r_{-j}
    int core_rank = 0;
    const Matrix pinv = pseudo_inverse(unfold(f.core, j), 1e-12, &core_rank);
    if (core_rank < f.core.shape().dim(j)) {
      throw NumericError("tangent_project_at: mode-" + std::to_string(j + 1) +
                         " core unfolding is rank deficient (pseudo-inverse cutoff hit)");
    }
    Matrix w = matmul(a, pinv);  // d_j x r_j
    const Matrix ut_w = matmul_at_b(u, w);
    const Matrix u_ut_w = matmul(u, ut_w);
    for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= u_ut_w.data[i];

    DenseTensor term = f.core;
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      term = marginal_multiply(term, k, f.factors[static_cast<std::size_t>(k)]);
    }
    term = marginal_multiply(term, j, w);
    result = add(result, term);
  }
  return result;
}

DenseTensor debias_only(const ObservationSet& obs, const TuckerFactorization& init) {
  require_matching_shape(obs, init, "debias_only");
  if (obs.count() < 1) throw std::invalid_argument("debias_only: need at least one sample");
  DenseTensor ubs = reconstruct(init);
  const double scale_factor = static_cast<double>(obs.shape.num_entries()) /
                              static_cast<double>(obs.count());
  // Residuals read the reconstruction before any cell is updated, matching
  // a fixed initial estimate even when cells repeat.
  std::vector<double> upd(static_cast<std::size_t>(ubs.size()), 0.0);
  for (const Observation& s : obs.samples) {
    upd[static_cast<std::size_t>(s.offset)] += scale_factor * (s.y - ubs[s.offset]);
  }
  for (std::int64_t i = 0; i < ubs.size(); ++i) ubs[i] += upd[static_cast<std::size_t>(i)];
  return ubs;
}

TuckerFactorization debias_power_iteration(const ObservationSet& obs,
                                           const TuckerFactorization& init) {
  require_matching_shape(obs, init, "debias_power_iteration");
  const DenseTensor ubs = debias_only(obs, init);
  const int m = init.order();
  const MultilinearRank rank = init.rank();

  TuckerFactorization out;
  out.factors.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    // SVD of the d_j x r_{-j} compression, never of the full unfolding.
    const Matrix compressed = unfold(compress_except(ubs, init.factors, j), j);
    out.factors.push_back(svd_top_r(compressed, rank.rank(j)).u);
  }
  DenseTensor core = ubs;
  for (int j = 0; j < m; ++j) {
    core = marginal_multiply(core, j, transpose(out.factors[static_cast<std::size_t>(j)]));
  }
  out.core = std::move(core);
  return out;
}

namespace {

struct CompressedObservations {
  std::vector<std::int64_t> offsets;
  std::vector<double> counts;
  std::vector<double> sums;
  std::vector<double> sumsq;
};

CompressedObservations compress_observations(const ObservationSet& obs) {
  std::vector<std::pair<std::int64_t, double>> items;
  items.reserve(obs.samples.size());
  for (const Observation& s : obs.samples) items.emplace_back(s.offset, s.y);
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  CompressedObservations out;
  for (const auto& [off, y] : items) {
    if (out.offsets.empty() || out.offsets.back() != off) {
      out.offsets.push_back(off);
      out.counts.push_back(0.0);
      out.sums.push_back(0.0);
      out.sumsq.push_back(0.0);
    }
    out.counts.back() += 1.0;
    out.sums.back() += y;
    out.sumsq.back() += y * y;
  }
  return out;
}

// Empirical least-squares loss sum_i (T[cell_i] - y_i)^2.
double empirical_loss(const CompressedObservations& packed, const DenseTensor& t) {
  double loss = 0.0;
  for (std::size_t i = 0; i < packed.offsets.size(); ++i) {
    const double v = t[packed.offsets[i]];
    loss += packed.counts[i] * v * v - 2.0 * packed.sums[i] * v + packed.sumsq[i];
  }
  return loss;
}

}  // namespace

TuckerFactorization spectral_power_refine(const ObservationSet& obs,
                                          const TuckerFactorization& init, int iterations) {
  require_matching_shape(obs, init, "spectral_power_refine");
  if (obs.count() < 1) throw std::invalid_argument("spectral_power_refine: need samples");
  if (iterations < 0) throw std::invalid_argument("spectral_power_refine: iterations must be >= 0");

  const double scale_factor = static_cast<double>(obs.shape.num_entries()) /
                              static_cast<double>(obs.count());
  DenseTensor tobv = observation_tensor(obs);
  for (double& v : tobv.data()) v *= scale_factor;

  const int m = obs.shape.order();
  TuckerFactorization f = init;
  for (int it = 0; it < iterations; ++it) {
    for (int j = 0; j < m; ++j) {
      const Matrix compressed = unfold(compress_except(tobv, f.factors, j), j);
      f.factors[static_cast<std::size_t>(j)] =
          svd_top_r(compressed, f.factors[static_cast<std::size_t>(j)].cols).u;
    }
  }
  DenseTensor core = tobv;
  for (int j = 0; j < m; ++j) {
    core = marginal_multiply(core, j, transpose(f.factors[static_cast<std::size_t>(j)]));
  }
  f.core = std::move(core);
  return f;
}

CompletionResult rgd_offline(const ObservationSet& obs, const TuckerFactorization& init,
                             const EstimatorConfig& cfg, const DenseTensor* truth) {
  require_matching_shape(obs, init, "rgd_offline");
  if (obs.count() < 1) throw std::invalid_argument("rgd_offline: need at least one sample");
  cfg.rank.validate_for(obs.shape);
  if (!(init.rank() == cfg.rank)) {
    throw std::invalid_argument("rgd_offline: init rank does not match configured rank");
  }

  const double dstar = static_cast<double>(obs.shape.num_entries());
  const double n = static_cast<double>(obs.count());
  const double eta = cfg.step_size.value_or(dstar / n);
  if (!(eta > 0.0)) throw std::invalid_argument("rgd_offline: step size must be positive");

  const CompressedObservations packed = compress_observations(obs);
  const DenseTensor tobv = observation_tensor(obs);
  const double guard = 1e3 * frobenius_norm(tobv) * dstar / n;
  const double truth_norm = truth != nullptr ? frobenius_norm(*truth) : 0.0;

  CompletionResult result;
  result.estimate = init;
  DenseTensor cur = reconstruct(init);
  double cur_loss = empirical_loss(packed, cur);

  for (int t = 0; t < cfg.steps; ++t) {
    DenseTensor grad(obs.shape);
    for (std::size_t i = 0; i < packed.offsets.size(); ++i) {
      const std::int64_t off = packed.offsets[i];
      grad[off] = packed.counts[i] * cur[off] - packed.sums[i];
    }
    const DenseTensor step_dir = tangent_project_at(result.estimate, grad);

    // Backtracking on the empirical loss: the nominal step is taken whenever
    // it does not increase the loss after retraction; otherwise it is halved.
    // Warm starts at the edge of the contraction basin overshoot on the cells
    // the sampling hit more than once, and an unguarded fixed step diverges.
    TuckerFactorization accepted;
    DenseTensor retracted;
    double step = eta;
    bool moved = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      DenseTensor next = cur;
      for (std::int64_t i = 0; i < next.size(); ++i) next[i] -= step * step_dir[i];
      TuckerFactorization candidate = hosvd(next, cfg.rank);
      DenseTensor candidate_dense = reconstruct(candidate);
      const double loss = empirical_loss(packed, candidate_dense);
      if (loss <= cur_loss) {
        accepted = std::move(candidate);
        retracted = std::move(candidate_dense);
        cur_loss = loss;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // stationary to within the backtracking resolution
    result.estimate = std::move(accepted);

    const double iterate_norm = frobenius_norm(retracted);
    if (iterate_norm > guard) {
      throw NumericError("rgd_offline: diverged at step " + std::to_string(t + 1) +
                         " (iterate norm " + std::to_string(iterate_norm) + " exceeds guard " +
                         std::to_string(guard) + ")");
    }
    if (truth != nullptr) {
      result.trajectory.push_back(frobenius_norm(subtract(retracted, *truth)) /
                                  std::max(truth_norm, 1e-300));
    }
    const double change = frobenius_norm(subtract(retracted, cur));
    const double base = std::max(frobenius_norm(cur), 1e-300);
    cur = std::move(retracted);
    if (cfg.tolerance > 0.0 && change / base < cfg.tolerance) break;
  }
  return result;
}

namespace {

// QR of a tall thin matrix by modified Gram-Schmidt; used to absorb the
// slow orthonormality drift of online factors back into the core.
void mgs_qr(Matrix& a, Matrix& r_out) {
  r_out = Matrix(a.cols, a.cols);
  for (int c = 0; c < a.cols; ++c) {
    for (int p = 0; p < c; ++p) {
      double dot = 0.0;
      for (int i = 0; i < a.rows; ++i) dot += a(i, p) * a(i, c);
      r_out(p, c) = dot;
      for (int i = 0; i < a.rows; ++i) a(i, c) -= dot * a(i, p);
    }
    double norm = 0.0;
    for (int i = 0; i < a.rows; ++i) norm += a(i, c) * a(i, c);
    norm = std::sqrt(norm);
    r_out(c, c) = norm;
    if (norm > 1e-300) {
      for (int i = 0; i < a.rows; ++i) a(i, c) /= norm;
    }
  }
}

}  // namespace

CompletionResult rgd_online(const ObservationSet& obs, const TuckerFactorization& init,
                            const EstimatorConfig& cfg, const DenseTensor* truth) {
  require_matching_shape(obs, init, "rgd_online");
  cfg.rank.validate_for(obs.shape);
  if (!(init.rank() == cfg.rank)) {
    throw std::invalid_argument("rgd_online: init rank does not match configured rank");
  }
  const int m = obs.shape.order();
  const double n = static_cast<double>(std::max<std::int64_t>(obs.count(), 1));
  const double eta = cfg.online_step_coeff * std::log(static_cast<double>(obs.shape.max_dim())) / n;
  if (eta < 0.0) throw std::invalid_argument("rgd_online: step coefficient must be >= 0");

  CompletionResult result;
  result.estimate = init;
  if (eta == 0.0 || obs.count() == 0) {
    if (truth != nullptr) {
      result.trajectory.push_back(frobenius_norm(subtract(reconstruct(init), *truth)) /
                                  std::max(frobenius_norm(*truth), 1e-300));
    }
    return result;
  }

  const DenseTensor tobv = observation_tensor(obs);
  const double guard =
      1e3 * frobenius_norm(tobv) * static_cast<double>(obs.shape.num_entries()) / n;
  const double truth_norm = truth != nullptr ? frobenius_norm(*truth) : 0.0;
  const std::int64_t checkpoint_every =
      std::max<std::int64_t>(1, obs.count() / 200);

  DenseTensor core = init.core;
  std::vector<Matrix> factors = init.factors;
  std::vector<int> idx(static_cast<std::size_t>(m), 0);

  for (std::int64_t t = 0; t < obs.count(); ++t) {
    const Observation& s = obs.samples[static_cast<std::size_t>(t)];
    obs.shape.index_of(s.offset, idx);

    // Factor rows at the sampled cell.
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      const Matrix& u = factors[static_cast<std::size_t>(j)];
      const int i = idx[static_cast<std::size_t>(j)];
      rows[static_cast<std::size_t>(j)].assign(u.data.begin() + static_cast<std::ptrdiff_t>(i) * u.cols,
                                               u.data.begin() + static_cast<std::ptrdiff_t>(i + 1) * u.cols);
    }

    // D[a] = prod_j rows_j[a_j]; prediction = <C, D>.
    DenseTensor d_core(core.shape());
    std::vector<int> a(static_cast<std::size_t>(m), 0);
    double pred = 0.0;
    for (std::int64_t off = 0; off < core.size(); ++off) {
      core.shape().index_of(off, a);
      double v = 1.0;
      for (int j = 0; j < m; ++j) v *= rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(a[static_cast<std::size_t>(j)])];
      d_core[off] = v;
      pred += core[off] * v;
    }
    const double coef = eta * (pred - s.y);

    if (coef != 0.0) {
      // Rank-one tangent pieces per mode: q_j w_j^T with q_j the complement
      // part of the sampled basis vector and w_j = pinv(M_j(C))^T v_j where
      // v_j is the Kronecker of the other factor rows in unfolding order.
      std::vector<std::vector<double>> qhat(static_cast<std::size_t>(m));
      std::vector<double> qnorm(static_cast<std::size_t>(m), 0.0);
      std::vector<std::vector<double>> w(static_cast<std::size_t>(m));
      std::vector<int> ext(static_cast<std::size_t>(m), 0);

      for (int j = 0; j < m; ++j) {
        const Matrix& u = factors[static_cast<std::size_t>(j)];
        const int dj = u.rows;
        const int rj = u.cols;
        std::vector<double> q(static_cast<std::size_t>(dj), 0.0);
        q[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] = 1.0;
        for (int r = 0; r < dj; ++r) {
          double dot = 0.0;
          for (int c = 0; c < rj; ++c) dot += u(r, c) * rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
          q[static_cast<std::size_t>(r)] -= dot;
        }
        double norm = 0.0;
        for (double v : q) norm += v * v;
        norm = std::sqrt(norm);
        qnorm[static_cast<std::size_t>(j)] = norm;
        if (norm > 1e-12) {
          ext[static_cast<std::size_t>(j)] = 1;
          for (double& v : q) v /= norm;
          qhat[static_cast<std::size_t>(j)] = std::move(q);

          // v_j in the column enumeration of unfold(C, j).
          const Matrix cj = unfold(core, j);
          std::vector<int> rem_dims;
          for (int k = 0; k < m; ++k) {
            if (k != j) rem_dims.push_back(core.shape().dim(k));
          }
          std::vector<double> v(static_cast<std::size_t>(cj.cols), 0.0);
          std::vector<int> rem_idx(rem_dims.size(), 0);
          for (int col = 0; col < cj.cols; ++col) {
            std::int64_t rest = col;
            for (int k = static_cast<int>(rem_dims.size()) - 1; k >= 0; --k) {
              rem_idx[static_cast<std::size_t>(k)] = static_cast<int>(rest % rem_dims[static_cast<std::size_t>(k)]);
              rest /= rem_dims[static_cast<std::size_t>(k)];
            }
            double prod = 1.0;
            int pos = 0;
            for (int k = 0; k < m; ++k) {
              if (k == j) continue;
              prod *= rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(rem_idx[static_cast<std::size_t>(pos)])];
              ++pos;
            }
            v[static_cast<std::size_t>(col)] = prod;
          }
          const Matrix pinv = pseudo_inverse(cj, 1e-12);
          std::vector<double> wj(static_cast<std::size_t>(core.shape().dim(j)), 0.0);
          for (int r = 0; r < pinv.rows; ++r) {
            const double vr = v[static_cast<std::size_t>(r)];
            if (vr == 0.0) continue;
            for (int c = 0; c < pinv.cols; ++c) wj[static_cast<std::size_t>(c)] += vr * pinv(r, c);
          }
          w[static_cast<std::size_t>(j)] = std::move(wj);
        }
      }

      // Extended core over dims (r_j + ext_j).
      std::vector<int> ext_dims(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j) ext_dims[static_cast<std::size_t>(j)] = core.shape().dim(j) + ext[static_cast<std::size_t>(j)];
      DenseTensor ext_core{Shape(ext_dims)};

      // Block with every mode in factor range: C - coef * D.
      for (std::int64_t off = 0; off < core.size(); ++off) {
        core.shape().index_of(off, a);
        ext_core.at(a) = core[off] - coef * d_core[off];
      }
      // Slices with exactly one mode in the complement slot:
      // -coef * |q_j| * (C x_j w_j^T).
      for (int j = 0; j < m; ++j) {
        if (ext[static_cast<std::size_t>(j)] == 0) continue;
        Matrix wrow(1, core.shape().dim(j));
        for (int c = 0; c < wrow.cols; ++c) wrow(0, c) = w[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
        const DenseTensor contracted = marginal_multiply(core, j, wrow);
        const double factor = -coef * qnorm[static_cast<std::size_t>(j)];
        std::vector<int> ei(static_cast<std::size_t>(m), 0);
        for (std::int64_t off = 0; off < contracted.size(); ++off) {
          contracted.shape().index_of(off, ei);
          ei[static_cast<std::size_t>(j)] = core.shape().dim(j);  // complement slot
          ext_core.at(ei) = factor * contracted[off];
        }
      }

      // Retraction: HOSVD of the extended core, composed with the extended
      // factors [U_j | qhat_j].
      TuckerFactorization small = hosvd(ext_core, cfg.rank);
      for (int j = 0; j < m; ++j) {
        const Matrix& u = factors[static_cast<std::size_t>(j)];
        Matrix v(u.rows, u.cols + ext[static_cast<std::size_t>(j)]);
        for (int r = 0; r < u.rows; ++r) {
          for (int c = 0; c < u.cols; ++c) v(r, c) = u(r, c);
          if (ext[static_cast<std::size_t>(j)] == 1) v(r, u.cols) = qhat[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
        }
        factors[static_cast<std::size_t>(j)] = matmul(v, small.factors[static_cast<std::size_t>(j)]);
      }
      core = std::move(small.core);

      const double core_norm = frobenius_norm(core);
      if (core_norm > guard) {
        throw NumericError("rgd_online: diverged at sample " + std::to_string(t + 1) +
                           " (iterate norm " + std::to_string(core_norm) + " exceeds guard " +
                           std::to_string(guard) + ")");
      }
    }

    // Periodically fold factor drift back into the core (exact QR rewrite).
    if ((t + 1) % 256 == 0) {
      for (int j = 0; j < m; ++j) {
        Matrix r;
        mgs_qr(factors[static_cast<std::size_t>(j)], r);
        core = marginal_multiply(core, j, r);
      }
    }

    if (truth != nullptr && ((t + 1) % checkpoint_every == 0 || t + 1 == obs.count())) {
      TuckerFactorization snap{core, factors};
      result.trajectory.push_back(frobenius_norm(subtract(reconstruct(snap), *truth)) /
                                  std::max(truth_norm, 1e-300));
    }
  }

  result.estimate = TuckerFactorization{std::move(core), std::move(factors)};
  return result;
}

TuckerFactorization make_independent_init(const TuckerFactorization& truth, double target_linf,
                                          std::uint64_t seed, std::uint64_t trial) {
  if (target_linf < 0.0) {
    throw std::invalid_argument("make_independent_init: target_linf must be >= 0");
  }
  if (target_linf == 0.0) return truth;

  DenseTensor noisy = reconstruct(truth);
  Rng rng(seed, trial, StreamPurpose::kInit);
  DenseTensor e(noisy.shape());
  for (double& v : e.data()) v = rng.gaussian();
  const double linf = linf_norm(e);
  if (linf == 0.0) throw NumericError("make_independent_init: degenerate perturbation");
  const double s = target_linf / linf;
  for (std::int64_t i = 0; i < noisy.size(); ++i) noisy[i] += s * e[i];
  return hosvd(noisy, truth.rank());
}

}  // namespace tinfer
