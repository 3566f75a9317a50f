#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "tinfer/errors.hpp"
#include "tinfer/estimators.hpp"
#include "tinfer/sampling.hpp"

using namespace tinfer;

namespace {

ObservationSet full_observation(const DenseTensor& t) {
  ObservationSet obs;
  obs.shape = t.shape();
  for (std::int64_t i = 0; i < t.size(); ++i) obs.samples.push_back({i, t[i]});
  return obs;
}

}  // namespace

TEST_CASE("observation_tensor accumulates duplicates") {
  ObservationSet obs;
  obs.shape = Shape({2, 2, 2});
  CHECK(frobenius_norm(observation_tensor(obs)) == 0.0);

  obs.samples.push_back({3, 3.5});
  DenseTensor t = observation_tensor(obs);
  CHECK(t[3] == 3.5);
  CHECK(l1_norm(t) == 3.5);

  obs.samples.push_back({3, 2.0});
  obs.samples.push_back({3, 3.0});
  t = observation_tensor(obs);
  CHECK(t[3] == 8.5);
}

TEST_CASE("tangent_project_at keeps the base point fixed") {
  std::mt19937 gen(3);
  const TuckerFactorization f =
      oracles::random_factorization(Shape({5, 4, 6}), MultilinearRank({2, 2, 2}), gen);
  const DenseTensor t = reconstruct(f);
  CHECK(oracles::rel_error(tangent_project_at(f, t), t) < 1e-10);
}

TEST_CASE("tangent_project_at annihilates a tensor orthogonal in every mode") {
  TuckerFactorization f;
  Matrix e1(3, 1);
  e1(0, 0) = 1.0;
  f.factors = {e1, e1, e1};
  f.core = DenseTensor(Shape({1, 1, 1}), {2.0});
  std::vector<std::vector<double>> vecs(3, std::vector<double>(3, 0.0));
  for (auto& v : vecs) v[1] = 1.0;  // e2 in every mode
  const DenseTensor g = outer(vecs);
  CHECK(frobenius_norm(tangent_project_at(f, g)) < 1e-13);
}

TEST_CASE("tangent_project_at matches the explicit-basis least-squares oracle") {
  std::mt19937 gen(7);
  for (int rep = 0; rep < 5; ++rep) {
    const TuckerFactorization f =
        oracles::random_factorization(Shape({4, 4, 4}), MultilinearRank({2, 2, 2}), gen);
    const DenseTensor g = oracles::random_tensor(Shape({4, 4, 4}), gen);
    Eigen::Index rank = 0;
    const DenseTensor want = oracles::oracle_tangent_project(f, g, &rank);
    CHECK(rank == diagnostics(f).dof);  // 8 + 3*(2*4-4) = 20
    const DenseTensor got = tangent_project_at(f, g);
    CHECK(oracles::rel_error(got, want) < 1e-9);
  }
}

TEST_CASE("tangent projection is linear, idempotent, self-adjoint and contractive") {
  std::mt19937 gen(11);
  const TuckerFactorization f =
      oracles::random_factorization(Shape({5, 5, 5}), MultilinearRank({2, 2, 2}), gen);
  const DenseTensor g = oracles::random_tensor(Shape({5, 5, 5}), gen);
  const DenseTensor h = oracles::random_tensor(Shape({5, 5, 5}), gen);

  const DenseTensor pg = tangent_project_at(f, g);
  const DenseTensor ph = tangent_project_at(f, h);

  // Idempotence.
  CHECK(oracles::rel_error(tangent_project_at(f, pg), pg) < 1e-10);
  // Self-adjointness.
  CHECK(inner(pg, h) == doctest::Approx(inner(g, ph)).epsilon(1e-10));
  // Contraction.
  CHECK(frobenius_norm(pg) <= frobenius_norm(g) + 1e-12);
  // Linearity.
  const DenseTensor sum = tangent_project_at(f, add(g, h));
  CHECK(oracles::rel_error(sum, add(pg, ph)) < 1e-10);
}

TEST_CASE("tangent_project_at rejects rank-deficient cores") {
  std::mt19937 gen(13);
  TuckerFactorization f =
      oracles::random_factorization(Shape({4, 4, 4}), MultilinearRank({2, 2, 2}), gen);
  for (double& v : f.core.data()) v = 0.0;
  f.core[0] = 1.0;  // every unfolding now has rank 1 < 2
  const DenseTensor g = oracles::random_tensor(Shape({4, 4, 4}), gen);
  CHECK_THROWS_AS(tangent_project_at(f, g), NumericError);
}

TEST_CASE("diag_deletion_init") {
  SUBCASE("noiseless full observation recovers an exact incoherent low-rank tensor") {
    // Incoherent truth: the deleted Gram diagonal stays below the spectral
    // gap, so the diagonal-imputation refinement converges to the exact Gram.
    GroundTruthSpec spec;
    spec.shape = Shape({12, 12, 12});
    spec.rank = MultilinearRank({2, 2, 2});
    spec.lambda_min = 10.0;
    spec.seed = 3;
    const TuckerFactorization truth = generate_ground_truth(spec);
    const DenseTensor t = reconstruct(truth);
    const ObservationSet obs = full_observation(t);
    const TuckerFactorization init = diag_deletion_init(obs, MultilinearRank({2, 2, 2}));
    CHECK(oracles::rel_error(reconstruct(init), t) < 1e-8);
  }
  SUBCASE("zero-valued observations give the zero estimate") {
    ObservationSet obs;
    obs.shape = Shape({4, 4, 4});
    obs.samples.push_back({5, 0.0});
    const TuckerFactorization init = diag_deletion_init(obs, MultilinearRank({2, 2, 2}));
    CHECK(frobenius_norm(reconstruct(init)) == 0.0);
  }
  SUBCASE("empty observation set is rejected") {
    ObservationSet obs;
    obs.shape = Shape({4, 4, 4});
    CHECK_THROWS_AS(diag_deletion_init(obs, MultilinearRank({2, 2, 2})), std::invalid_argument);
  }
  SUBCASE("Monte Carlo recovery at moderate noise") {
    // d=20, r=(2,2,2), p=0.3, sigma=0.01, lambda_min=50. The error here is
    // dominated by the sampling fluctuations of the Gram matrix, which scale
    // like ||T||_F^2 regardless of lambda_min; at this size the one-shot
    // spectral estimate lands around 0.5 relative error, good enough for a
    // gradient-descent warm start but far from the truth itself.
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 11; ++seed) {
      GroundTruthSpec spec;
      spec.shape = Shape({20, 20, 20});
      spec.rank = MultilinearRank({2, 2, 2});
      spec.lambda_min = 50.0;
      spec.seed = 1000 + seed;
      const TuckerFactorization truth = generate_ground_truth(spec);
      const DenseTensor t = reconstruct(truth);
      const ObservationSet obs =
          sample_observations(t, 2400, NoiseModel::gaussian(0.01), 1000 + seed);
      const TuckerFactorization init = diag_deletion_init(obs, spec.rank);
      errors.push_back(oracles::rel_error(reconstruct(init), t));
    }
    std::sort(errors.begin(), errors.end());
    CHECK(errors[errors.size() / 2] < 0.65);
  }
}

TEST_CASE("debias identities") {
  std::mt19937 gen(23);
  const TuckerFactorization truth =
      oracles::random_factorization(Shape({5, 5, 5}), MultilinearRank({2, 2, 2}), gen);
  const DenseTensor t = reconstruct(truth);

  SUBCASE("perfect init and zero noise is a fixed point") {
    const ObservationSet obs = sample_observations(t, 300, NoiseModel::gaussian(0.0), 9);
    const DenseTensor ubs = debias_only(obs, truth);
    CHECK(oracles::rel_error(ubs, t) < 1e-12);
    const TuckerFactorization est = debias_power_iteration(obs, truth);
    CHECK(oracles::rel_error(reconstruct(est), t) < 1e-10);
  }
  SUBCASE("full observation reduces the debiased tensor to the observation tensor") {
    ObservationSet obs = full_observation(t);
    // Perturb the values so the observation tensor differs from the init.
    for (Observation& s : obs.samples) s.y += 0.01 * std::sin(static_cast<double>(s.offset));
    const DenseTensor want = observation_tensor(obs);
    std::mt19937 gen2(29);
    const TuckerFactorization arbitrary_init =
        oracles::random_factorization(Shape({5, 5, 5}), MultilinearRank({2, 2, 2}), gen2);
    const DenseTensor ubs = debias_only(obs, arbitrary_init);
    double scale_ref = std::max(1.0, linf_norm(want));
    for (std::int64_t i = 0; i < want.size(); ++i) {
      CHECK(std::abs(ubs[i] - want[i]) < 1e-12 * scale_ref);
    }
  }
  SUBCASE("2x2x2 hand-listed observations match a direct summation oracle") {
    TuckerFactorization small;
    Matrix u(2, 1);
    u(0, 0) = 0.6;
    u(1, 0) = 0.8;
    small.factors = {u, u, u};
    small.core = DenseTensor(Shape({1, 1, 1}), {2.0});
    const DenseTensor init_dense = reconstruct(small);

    ObservationSet obs;
    obs.shape = Shape({2, 2, 2});
    obs.samples = {{0, 1.5}, {3, -0.25}, {3, 0.75}, {6, 2.0}};
    const DenseTensor ubs = debias_only(obs, small);

    // Oracle: init + (8/4) * sum of residuals scattered into cells.
    DenseTensor want = init_dense;
    std::vector<double> delta(8, 0.0);
    for (const Observation& s : obs.samples) {
      delta[static_cast<std::size_t>(s.offset)] += 2.0 * (s.y - init_dense[s.offset]);
    }
    for (std::int64_t i = 0; i < 8; ++i) want[i] += delta[static_cast<std::size_t>(i)];
    for (std::int64_t i = 0; i < 8; ++i) CHECK(ubs[i] == doctest::Approx(want[i]).epsilon(1e-14));
  }
  SUBCASE("power iteration uses the init factors for every mode compression") {
    // With an init whose factors span the truth, one debias + power iteration
    // on noiseless partial data returns the truth.
    const ObservationSet obs = sample_observations(t, 400, NoiseModel::gaussian(0.0), 31);
    const TuckerFactorization est = debias_power_iteration(obs, truth);
    CHECK(est.factors[0].cols == 2);
    CHECK(oracles::rel_error(reconstruct(est), t) < 1e-10);
  }
}

TEST_CASE("debias is unbiased over fresh observation sets") {
  // Small Monte Carlo version of the entrywise unbiasedness check; the
  // acceptance suite runs the full 2000-replicate variant.
  std::mt19937 gen(31);
  const TuckerFactorization truth =
      oracles::random_factorization(Shape({4, 4, 4}), MultilinearRank({2, 2, 2}), gen);
  const DenseTensor t = reconstruct(truth);
  const TuckerFactorization init = make_independent_init(truth, 0.3, 555);

  const int reps = 400;
  const std::int64_t n = 128;
  DenseTensor mean(t.shape());
  DenseTensor m2(t.shape());
  for (int rep = 0; rep < reps; ++rep) {
    const ObservationSet obs =
        sample_observations(t, n, NoiseModel::gaussian(0.5), 77, static_cast<std::uint64_t>(rep));
    const DenseTensor ubs = debias_only(obs, init);
    for (std::int64_t i = 0; i < t.size(); ++i) {
      const double delta = ubs[i] - mean[i];
      mean[i] += delta / static_cast<double>(rep + 1);
      m2[i] += delta * (ubs[i] - mean[i]);
    }
  }
  int bad = 0;
  for (std::int64_t i = 0; i < t.size(); ++i) {
    const double se = std::sqrt(m2[i] / (reps - 1.0) / reps);
    if (std::abs(mean[i] - t[i]) > 4.0 * se) ++bad;
  }
  // Allow a single 4-sigma outlier across 64 cells.
  CHECK(bad <= 1);
}

TEST_CASE("rgd_offline") {
  std::mt19937 gen(37);
  const Shape shape({6, 6, 6});
  const MultilinearRank rank({2, 2, 2});
  const TuckerFactorization truth = oracles::random_factorization(shape, rank, gen);
  const DenseTensor t = reconstruct(truth);

  SUBCASE("zero steps returns the init unchanged") {
    const ObservationSet obs = sample_observations(t, 200, NoiseModel::gaussian(0.1), 1);
    EstimatorConfig cfg;
    cfg.rank = rank;
    cfg.steps = 0;
    const CompletionResult r = rgd_offline(obs, truth, cfg);
    CHECK(oracles::rel_error(reconstruct(r.estimate), t) < 1e-14);
  }
  SUBCASE("perfect init, zero noise, full observation is a fixed point") {
    const ObservationSet obs = full_observation(t);
    EstimatorConfig cfg;
    cfg.rank = rank;
    cfg.steps = 5;
    const CompletionResult r = rgd_offline(obs, truth, cfg, &t);
    CHECK(oracles::rel_error(reconstruct(r.estimate), t) < 1e-10);
    for (double e : r.trajectory) CHECK(e < 1e-10);
  }
  SUBCASE("one full-observation step corrects any core error in the truth's subspaces") {
    // Init shares the truth's factors but has a wrong core; the projected
    // gradient under full noiseless observation restores the truth in one
    // step because the truth lies in the init's tangent space.
    TuckerFactorization init = truth;
    std::mt19937 gen2(41);
    std::normal_distribution<double> normal;
    for (double& v : init.core.data()) v += normal(gen2);
    const ObservationSet obs = full_observation(t);
    EstimatorConfig cfg;
    cfg.rank = rank;
    cfg.steps = 1;
    const CompletionResult r = rgd_offline(obs, init, cfg);
    CHECK(oracles::rel_error(reconstruct(r.estimate), t) < 1e-9);
  }
  SUBCASE("high-SNR desk run converges") {
    GroundTruthSpec spec;
    spec.shape = Shape({20, 20, 20});
    spec.rank = rank;
    spec.lambda_min = 10.0 * std::pow(20.0, 1.75);
    spec.seed = 77;
    const TuckerFactorization gt = generate_ground_truth(spec);
    const DenseTensor gtd = reconstruct(gt);
    const ObservationSet obs = sample_observations(gtd, 1600, NoiseModel::gaussian(1.0), 78);
    const TuckerFactorization start = diag_deletion_init(obs, rank);
    EstimatorConfig cfg;
    cfg.rank = rank;
    cfg.steps = 40;
    const CompletionResult r = rgd_offline(obs, start, cfg, &gtd);
    CHECK(r.trajectory.back() < 0.02);
    CHECK(r.trajectory.back() < r.trajectory.front());
    // Error settles: nonincreasing after the first few retractions.
    for (std::size_t i = 4; i < r.trajectory.size(); ++i) {
      CHECK(r.trajectory[i] <= r.trajectory[i - 1] * 1.05 + 1e-12);
    }
  }
}

TEST_CASE("rgd_online") {
  std::mt19937 gen(43);
  const Shape shape({6, 6, 6});
  const MultilinearRank rank({2, 2, 2});
  const TuckerFactorization truth = oracles::random_factorization(shape, rank, gen);
  const DenseTensor t = reconstruct(truth);

  SUBCASE("zero noise with a perfect init leaves the estimate unchanged") {
    const ObservationSet obs = sample_observations(t, 500, NoiseModel::gaussian(0.0), 3);
    EstimatorConfig cfg;
    cfg.rank = rank;
    const CompletionResult r = rgd_online(obs, truth, cfg);
    CHECK(oracles::rel_error(reconstruct(r.estimate), t) < 1e-9);
  }
  SUBCASE("zero step coefficient returns the init") {
    const ObservationSet obs = sample_observations(t, 100, NoiseModel::gaussian(0.5), 5);
    EstimatorConfig cfg;
    cfg.rank = rank;
    cfg.online_step_coeff = 0.0;
    const CompletionResult r = rgd_online(obs, truth, cfg);
    CHECK(oracles::rel_error(reconstruct(r.estimate), t) < 1e-14);
  }
  SUBCASE("improves on the init error at desk scale") {
    GroundTruthSpec spec;
    spec.shape = Shape({15, 15, 15});
    spec.rank = rank;
    spec.lambda_min = 10.0 * std::pow(15.0, 1.25);
    spec.seed = 91;
    const TuckerFactorization gt = generate_ground_truth(spec);
    const DenseTensor gtd = reconstruct(gt);
    const ObservationSet obs = sample_observations(gtd, 4000, NoiseModel::gaussian(1.0), 92);
    const TuckerFactorization start = diag_deletion_init(obs, rank);
    const double init_error = oracles::rel_error(reconstruct(start), gtd);
    EstimatorConfig cfg;
    cfg.rank = rank;
    cfg.online_step_coeff = 10.0;
    const CompletionResult r = rgd_online(obs, start, cfg, &gtd);
    CHECK(r.trajectory.back() < init_error);
  }
}

TEST_CASE("make_independent_init") {
  std::mt19937 gen(47);
  const TuckerFactorization truth =
      oracles::random_factorization(Shape({5, 5, 5}), MultilinearRank({2, 2, 2}), gen);

  SUBCASE("target 0 returns the truth exactly") {
    const TuckerFactorization init = make_independent_init(truth, 0.0, 1);
    CHECK(oracles::rel_error(reconstruct(init), reconstruct(truth)) == 0.0);
  }
  SUBCASE("perturbation linf norm is exact before the retraction") {
    // At full rank the retraction is the identity, exposing the raw
    // perturbation: linf(init - truth) equals the target exactly.
    TuckerFactorization full;
    std::mt19937 gen2(53);
    full = oracles::random_factorization(Shape({4, 3, 4}), MultilinearRank({4, 3, 4}), gen2);
    const double target = 0.37;
    const TuckerFactorization init = make_independent_init(full, target, 7);
    const DenseTensor diff = subtract(reconstruct(init), reconstruct(full));
    CHECK(linf_norm(diff) == doctest::Approx(target).epsilon(1e-9));
  }
  SUBCASE("retraction amplification stays within 5x over 60 seeds") {
    GroundTruthSpec spec;
    spec.shape = Shape({12, 12, 12});
    spec.rank = MultilinearRank({2, 2, 2});
    spec.lambda_min = 60.0;
    spec.seed = 5;
    const TuckerFactorization gt = generate_ground_truth(spec);
    const DenseTensor gtd = reconstruct(gt);
    const double target = 0.2;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const TuckerFactorization init = make_independent_init(gt, target, seed);
      const double err = linf_norm(subtract(reconstruct(init), gtd));
      CHECK(err <= 5.0 * target);
    }
  }
}
