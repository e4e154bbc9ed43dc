#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dense_oracles.hpp"
#include "streamgp/batch_sgp.hpp"
#include "streamgp/exact_gp.hpp"
#include "streamgp/linalg.hpp"
#include "streamgp/rng.hpp"
#include "streamgp/streaming_vfe.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace streamgp;



TEST_CASE("update from the empty state reproduces the batch collapsed fit") {
  Rng rng(41);
  const Hyperparams theta = testutil::random_hypers(rng, 1);
  const Matrix X = testutil::random_inputs(rng, 30, 1);
  const Vector y = testutil::sample_gp(rng, X, theta);
  const Matrix Z = testutil::spread_pseudo(6, 0.5, 9.5);
  const DataBatch batch{X, y};

  const auto res = vfe_update(SparsePosterior::initial(), batch, theta, Z);
  CHECK(std::abs(res.energy.total - collapsed_bound(X, y, Z, theta)) < 1e-8);
  CHECK(res.energy.delta_a == 0.0);

  const BatchSgpModel m = fit_q(X, y, Z, theta);
  CHECK(testutil::max_abs_diff(res.posterior.mean, m.q_mean) < 1e-8);
  CHECK(testutil::max_abs_diff(res.posterior.cov, m.q_cov) < 1e-8);
}

TEST_CASE("two batches with fixed parameters equal one batch fit on the union") {
  Rng rng(42);
  const Hyperparams theta = Hyperparams::isotropic(1, 1.0, 1.0, 0.1);
  const Matrix X = testutil::random_inputs(rng, 60, 1);
  const Vector y = testutil::sample_gp(rng, X, theta);
  const Matrix Z = testutil::spread_pseudo(8, 0.5, 9.5);

  const DataBatch b1{X.topRows(30), y.head(30)};
  const DataBatch b2{X.bottomRows(30), y.tail(30)};
  const auto s1 = vfe_update(SparsePosterior::initial(), b1, theta, Z);
  const auto s2 = vfe_update(s1.posterior, b2, theta, Z);

  const BatchSgpModel batch = fit_q(X, y, Z, theta);
  CHECK(testutil::max_abs_diff(s2.posterior.mean, batch.q_mean) < 1e-6);
  CHECK(testutil::max_abs_diff(s2.posterior.cov, batch.q_cov) < 1e-6);
  CHECK(std::abs(s1.energy.total + s2.energy.total -
                 collapsed_bound(X, y, Z, theta)) < 1e-6);
}

TEST_CASE("pseudo-inputs at every seen input track the exact model") {
  Rng rng(43);
  const Hyperparams theta = Hyperparams::isotropic(1, 0.3, 1.0, 0.15);
  const Matrix X = testutil::jittered_grid(rng, 90, 0.25);
  const Vector y = testutil::sample_gp(rng, X, theta);

  SparsePosterior state = SparsePosterior::initial();
  double cumulative = 0.0;
  for (Index k = 0; k < 3; ++k) {
    const DataBatch batch{X.middleRows(30 * k, 30), y.segment(30 * k, 30)};
    const Matrix Z_all = X.topRows(30 * (k + 1));
    const auto res = vfe_update(state, batch, theta, Z_all);
    state = res.posterior;
    cumulative += res.energy.total;
  }

  const ExactGp exact = ExactGp::fit(X, y, theta);
  CHECK(std::abs(cumulative - exact.log_marginal_likelihood()) < 1e-6);

  const Matrix Xs = testutil::random_inputs(rng, 25, 1, 0.0, 22.0);
  const auto ps = predict(state, Xs, theta);
  const auto pe = exact.predict(Xs);
  CHECK(testutil::max_abs_diff(ps.mean, pe.mean) < 1e-6);
  CHECK(testutil::max_abs_diff(ps.latent_var, pe.latent_var) < 1e-6);
}

TEST_CASE("energy evaluation agrees with the update's reported energy") {
  Rng rng(44);
  for (int rep = 0; rep < 3; ++rep) {
    const Hyperparams theta_old = testutil::random_hypers(rng, 1);
    Hyperparams theta_new = theta_old;
    theta_new.log_lengthscales.array() += 0.1;
    const SparsePosterior old_state = testutil::seeded_state(rng, theta_old, 25, 5);
    const Matrix Xb = testutil::random_inputs(rng, 15, 1);
    const DataBatch batch{Xb, testutil::sample_gp(rng, Xb, theta_new)};
    const Matrix Z_new = testutil::random_inputs(rng, 6, 1);

    const auto up = vfe_update(old_state, batch, theta_new, Z_new);
    const auto e = vfe_energy(old_state, batch, theta_new, Z_new);
    CHECK(std::abs(up.energy.total - e.total) < 1e-12);
  }
}

TEST_CASE("empty state yields a zero old-posterior term") {
  Rng rng(45);
  const Hyperparams theta = testutil::random_hypers(rng, 1);
  const Matrix X = testutil::random_inputs(rng, 12, 1);
  const DataBatch batch{X, testutil::sample_gp(rng, X, theta)};
  const auto e = vfe_energy(SparsePosterior::initial(), batch, theta,
                            testutil::spread_pseudo(4, 1.0, 9.0));
  CHECK(e.delta_a == 0.0);
  CHECK(e.total == doctest::Approx(e.gaussian_term + e.trace_term).epsilon(1e-14));
}

TEST_CASE("energy matches the dense naive formula on a two-batch instance") {
  Rng rng(46);
  for (int rep = 0; rep < 4; ++rep) {
    const Hyperparams theta_old = testutil::random_hypers(rng, 1);
    Hyperparams theta_new = theta_old;
    theta_new.log_lengthscales.array() += 0.15;
    theta_new.log_signal_variance += 0.1;
    const SparsePosterior old_state = testutil::seeded_state(rng, theta_old, 30, 6);
    const Matrix Xb = testutil::random_inputs(rng, 18, 1);
    const DataBatch batch{Xb, testutil::sample_gp(rng, Xb, theta_new)};
    const Matrix Z_new = testutil::random_inputs(rng, 7, 1);

    const auto e = vfe_energy(old_state, batch, theta_new, Z_new);
    const double dense =
        oracles::dense_online_energy(old_state, batch, theta_new, Z_new);
    CHECK(e.total == doctest::Approx(dense).epsilon(1e-8));
  }
}

TEST_CASE("posterior matches the dense natural-parameter construction") {
  Rng rng(47);
  const Hyperparams theta_old = testutil::random_hypers(rng, 1);
  Hyperparams theta_new = theta_old;
  theta_new.log_noise_variance += 0.2;
  const SparsePosterior old_state = testutil::seeded_state(rng, theta_old, 25, 5);
  const Matrix Xb = testutil::random_inputs(rng, 14, 1);
  const DataBatch batch{Xb, testutil::sample_gp(rng, Xb, theta_new)};
  const Matrix Z_new = testutil::random_inputs(rng, 6, 1);

  const auto up = vfe_update(old_state, batch, theta_new, Z_new);
  const auto dense =
      oracles::dense_online_posterior(old_state, batch, theta_new, Z_new);
  CHECK(testutil::max_abs_diff(up.posterior.mean, dense.mean) < 1e-8);
  CHECK(testutil::max_abs_diff(up.posterior.cov, dense.cov) < 1e-8);
}

TEST_CASE("energy breakdown parts sum to the total") {
  Rng rng(48);
  for (int rep = 0; rep < 5; ++rep) {
    const Hyperparams theta_old = testutil::random_hypers(rng, 1);
    Hyperparams theta_new = theta_old;
    theta_new.log_lengthscales.array() -= 0.1;
    const SparsePosterior old_state = testutil::seeded_state(rng, theta_old, 20, 5);
    const Matrix Xb = testutil::random_inputs(rng, 12, 1);
    const DataBatch batch{Xb, testutil::sample_gp(rng, Xb, theta_new)};
    const auto e = vfe_energy(old_state, batch, theta_new,
                              testutil::random_inputs(rng, 5, 1));
    CHECK(std::abs(e.total - (e.gaussian_term + e.trace_term + e.delta_a)) <
          1e-10);
  }
}

TEST_CASE("prediction at the pseudo-inputs returns the posterior mean") {
  Rng rng(49);
  const Hyperparams theta = testutil::random_hypers(rng, 1);
  const SparsePosterior state = testutil::seeded_state(rng, theta, 30, 6);
  const auto pred = predict(state, state.Z, theta);
  CHECK(testutil::max_abs_diff(pred.mean, state.mean) < 1e-10);
}

TEST_CASE("prediction reverts to the prior far from the pseudo-inputs") {
  Rng rng(50);
  const Hyperparams theta = Hyperparams::isotropic(1, 0.7, 1.6, 0.1);
  const SparsePosterior state = testutil::seeded_state(rng, theta, 30, 6);
  Matrix far(1, 1);
  far << 300.0;
  const auto pred = predict(state, far, theta);
  CHECK(std::abs(pred.mean[0]) < 1e-6);
  CHECK(std::abs(pred.latent_var[0] - 1.6) < 1e-6);
  CHECK(pred.observed_var[0] == doctest::Approx(1.7));
}

TEST_CASE("batch order does not change the final posterior under fixed parameters") {
  Rng rng(51);
  const Hyperparams theta = Hyperparams::isotropic(1, 1.2, 0.9, 0.12);
  const Matrix X = testutil::random_inputs(rng, 40, 1);
  const Vector y = testutil::sample_gp(rng, X, theta);
  const Matrix Z = testutil::spread_pseudo(7, 0.5, 9.5);
  const DataBatch b1{X.topRows(20), y.head(20)};
  const DataBatch b2{X.bottomRows(20), y.tail(20)};

  const auto fwd = vfe_update(
      vfe_update(SparsePosterior::initial(), b1, theta, Z).posterior, b2, theta, Z);
  const auto rev = vfe_update(
      vfe_update(SparsePosterior::initial(), b2, theta, Z).posterior, b1, theta, Z);
  CHECK(testutil::max_abs_diff(fwd.posterior.mean, rev.posterior.mean) < 1e-8);
  CHECK(testutil::max_abs_diff(fwd.posterior.cov, rev.posterior.cov) < 1e-8);
}

TEST_CASE("returned covariance is symmetric positive definite") {
  Rng rng(52);
  for (int rep = 0; rep < 5; ++rep) {
    const Hyperparams theta = testutil::random_hypers(rng, 1);
    const SparsePosterior state = testutil::seeded_state(rng, theta, 25, 6);
    CHECK(testutil::max_abs_diff(state.cov, state.cov.transpose()) < 1e-10);
    CHECK_NOTHROW(chol_spd(state.cov, "S_b"));
  }
}

TEST_CASE("adding a pseudo-input at a batch point does not lower the energy") {
  Rng rng(53);
  for (int rep = 0; rep < 5; ++rep) {
    const Hyperparams theta = testutil::random_hypers(rng, 1);
    const SparsePosterior old_state = testutil::seeded_state(rng, theta, 20, 5);
    const Matrix Xb = testutil::random_inputs(rng, 15, 1);
    const DataBatch batch{Xb, testutil::sample_gp(rng, Xb, theta)};
    const Matrix Z = testutil::spread_pseudo(5, 0.5, 9.5);
    Matrix Z2(6, 1);
    Z2.topRows(5) = Z;
    Z2(5, 0) = Xb(static_cast<Index>(rng.integer(15)), 0);

    const double e1 = vfe_energy(old_state, batch, theta, Z).total;
    const double e2 = vfe_energy(old_state, batch, theta, Z2).total;
    CHECK(e2 >= e1 - 1e-8);
  }
}

TEST_CASE("update rejects malformed inputs") {
  Rng rng(54);
  const Hyperparams theta = testutil::random_hypers(rng, 1);
  const Matrix X = testutil::random_inputs(rng, 8, 1);
  const Vector y = testutil::random_vector(rng, 8);
  const Matrix Z = testutil::spread_pseudo(3, 1.0, 9.0);

  CHECK_THROWS_AS(
      vfe_update(SparsePosterior::initial(), DataBatch{Matrix(0, 1), Vector(0)},
                 theta, Z),
      ContractViolation);
  CHECK_THROWS_AS(vfe_update(SparsePosterior::initial(), DataBatch{X, y}, theta,
                             Matrix(0, 1)),
                  ContractViolation);

  // A stored covariance that is not positive definite is a conditioning error.
  SparsePosterior bad;
  bad.Z = Z;
  bad.mean = Vector::Zero(3);
  bad.cov = -Matrix::Identity(3, 3);
  bad.theta_fit = theta;
  CHECK_THROWS_AS(vfe_update(bad, DataBatch{X, y}, theta, Z), ConditioningError);
}

TEST_CASE("prediction from the empty state is rejected") {
  const Hyperparams theta = Hyperparams::isotropic(1, 1.0, 1.0, 0.1);
  CHECK_THROWS_AS(
      predict(SparsePosterior::initial(), Matrix::Zero(1, 1), theta),
      ContractViolation);
}
