// Copyright 2026 The gparareal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "gp_emulator.hpp"
#include "helpers.hpp"

using namespace gparareal;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Hyperparameters random_theta(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ls(-1.0, 1.0), ll(-1.5, 0.5);
  return Hyperparameters::from_log(ls(rng), ll(rng));
}

} // namespace

TEST_SUITE("gp_emulator") {

TEST_CASE("kernel at zero distance is sigma2") {
  const Hyperparameters t{2.5, 0.3};
  const State x{0.1, -0.4};
  CHECK(kernel_eval(t, x, x) == 2.5);
}

TEST_CASE("kernel at squared distance two") {
  CHECK(kernel_eval({1.0, 1.0}, State{0.0, 0.0}, State{1.0, 1.0}) ==
        doctest::Approx(0.36788).epsilon(1e-5));
}

TEST_CASE("kernel is symmetric") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 20; ++i) {
    const State a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const Hyperparameters t{u(rng) + 3, u(rng) + 3};
    CHECK(kernel_eval(t, a, b) == kernel_eval(t, b, a));
  }
}

TEST_CASE("hyperparameters must be positive and finite") {
  CHECK_THROWS_AS(validate(Hyperparameters{0.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(validate(Hyperparameters{1.0, -1.0}), ParameterError);
  CHECK_THROWS_AS(validate(Hyperparameters{INFINITY, 1.0}), ParameterError);
  CHECK_NOTHROW(validate(Hyperparameters{1e-30, 1e10}));
}

TEST_CASE("dataset drops duplicate inputs and keeps the first row") {
  ResidualDataset d(2);
  CHECK(d.add(State{1, 2}, State{3, 4}, Provenance::acquisition));
  CHECK_FALSE(d.add(State{1, 2}, State{9, 9}, Provenance::legacy));
  CHECK(d.size() == 1);
  CHECK(d.output(0)[0] == 3);
  CHECK(d.provenance(0) == Provenance::acquisition);
  CHECK(d.contains(State{1, 2}));
  CHECK_THROWS(d.add(State{NAN, 0}, State{0, 0}, Provenance::acquisition));
  CHECK_THROWS_AS(d.add(State{1, 2, 3}, State{0, 0}, Provenance::acquisition),
                  DimensionMismatch);
}

TEST_CASE("single point conditioning has unit weight") {
  ResidualDataset d(1);
  d.add(State{0.0}, State{1.0}, Provenance::acquisition);
  const std::vector<Hyperparameters> t{{1.0, 1.0}};
  const auto em = condition(d, t);
  CHECK(em.weights(0).size() == 1);
  CHECK(em.weights(0)[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("conditioning on empty data is rejected") {
  const std::vector<Hyperparameters> t{{1.0, 1.0}};
  CHECK_THROWS(condition(ResidualDataset(1), t));
}

// Forward agreement with an explicit inverse is only meaningful when the Gram
// matrix is reasonably conditioned; both solvers lose about cond(K) * eps.
double condition_number(const ResidualDataset& data, const Hyperparameters& t, double jitter) {
  const auto g = testing::gram(data, t, jitter);
  Eigen::MatrixXd k(g.size(), g.size());
  for (std::size_t r = 0; r < g.size(); ++r)
    for (std::size_t c = 0; c < g.size(); ++c)
      k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = g[r][c];
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

TEST_CASE("posterior matches the explicit-inverse oracle on 50 random datasets") {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> nd(1, 10), dd(1, 3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int accepted = 0;
  while (accepted < 50) {
    const std::size_t n = nd(rng), d = dd(rng);
    const auto data = testing::random_dataset(rng, n, d);
    std::vector<Hyperparameters> theta;
    for (std::size_t i = 0; i < d; ++i)
      theta.push_back(random_theta(rng));
    const auto em = condition(data, theta);
    bool well_conditioned = true;
    for (std::size_t i = 0; i < d; ++i)
      well_conditioned &= condition_number(data, theta[i], em.jitter(i)) < 1e6;
    if (!well_conditioned)
      continue;
    ++accepted;

    for (std::size_t i = 0; i < d; ++i) {
      const auto inv = testing::gauss_jordan_inverse(testing::gram(data, theta[i], em.jitter(i)));
      for (std::size_t r = 0; r < n; ++r) {
        double w = 0.0;
        for (std::size_t c = 0; c < n; ++c)
          w += inv[r][c] * data.output(c)[i];
        CHECK(std::abs(em.weights(i)[static_cast<Eigen::Index>(r)] - w) <
              1e-8 * std::max(1.0, std::abs(w)));
      }
    }
    for (int q = 0; q < 5; ++q) {
      State x(d);
      for (auto& v : x)
        v = u(rng);
      const auto p = em.predict(x);
      for (std::size_t i = 0; i < d; ++i) {
        const auto b = testing::brute_posterior(data, i, theta[i], em.jitter(i), x);
        CHECK(std::abs(p.mean[i] - b.mean) < 1e-8);
        CHECK(std::abs(p.raw_variance[i] - b.variance) < 1e-8);
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double lml = log_marginal_likelihood(data, i, theta[i]);
      const auto f = log_marginal_likelihood_terms(
          squared_distances(data.input_matrix()), data.output_column(i), theta[i]);
      const double b = testing::brute_log_likelihood(data, i, theta[i], f.jitter);
      CHECK(rel_err(lml, b) < 1e-8);
    }
  }
}

TEST_CASE("weights solve the jittered system even when it is ill-conditioned") {
  std::mt19937_64 rng(2027);
  for (int trial = 0; trial < 50; ++trial) {
    const auto data = testing::random_dataset(rng, 10, 1);
    const std::vector<Hyperparameters> theta{Hyperparameters::from_log(0.0, 1.0)};
    const auto em = condition(data, theta);
    const auto k = testing::gram(data, theta[0], em.jitter(0));
    double res = 0.0, knorm = 0.0, wnorm = 0.0;
    for (std::size_t r = 0; r < 10; ++r) {
      double kw = 0.0;
      for (std::size_t c = 0; c < 10; ++c) {
        kw += k[r][c] * em.weights(0)[static_cast<Eigen::Index>(c)];
        knorm = std::max(knorm, std::abs(k[r][c]));
      }
      res = std::max(res, std::abs(kw - data.output(r)[0]));
      wnorm = std::max(wnorm, std::abs(em.weights(0)[static_cast<Eigen::Index>(r)]));
    }
    CHECK(res <= 1e-12 * 10 * knorm * wnorm + 1e-12);
  }
}

TEST_CASE("likelihood gradient matches central differences") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> nd(2, 10), dd(1, 3);
  const double h = 1e-5;
  int trial = 0;
  while (trial < 50) {
    const auto data = testing::random_dataset(rng, nd(rng), dd(rng));
    const auto sq = squared_distances(data.input_matrix());
    const auto y = data.output_column(0);
    const auto t = random_theta(rng);
    // finite differences of a near-singular likelihood are noise
    if (condition_number(data, t, log_marginal_likelihood_terms(sq, y, t).jitter) > 1e6)
      continue;
    ++trial;
    const double ls = std::log(t.sigma2), ll = std::log(t.ell2);
    const auto g = log_marginal_likelihood_terms(sq, y, t);
    auto value = [&](double a, double b) {
      return log_marginal_likelihood_terms(sq, y, Hyperparameters::from_log(a, b), false).value;
    };
    const double fd0 = (value(ls + h, ll) - value(ls - h, ll)) / (2 * h);
    const double fd1 = (value(ls, ll + h) - value(ls, ll - h)) / (2 * h);
    CAPTURE(trial);
    CHECK(std::abs(g.gradient[0] - fd0) <= 1e-5 * std::max(1.0, std::abs(fd0)));
    CHECK(std::abs(g.gradient[1] - fd1) <= 1e-5 * std::max(1.0, std::abs(fd1)));
  }
}

TEST_CASE("log marginal likelihood of a single point") {
  ResidualDataset d(1);
  d.add(State{0.3}, State{1.0}, Provenance::acquisition);
  for (double ell2 : {0.01, 1.0, 50.0})
    CHECK(log_marginal_likelihood(d, 0, {1.0, ell2}) ==
          doctest::Approx(-0.5 - 0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-8));
  CHECK(log_marginal_likelihood(d, 0, {1.0, 1.0}) == doctest::Approx(-1.41894).epsilon(1e-5));
}

TEST_CASE("likelihood falls toward minus infinity as sigma2 shrinks") {
  std::mt19937_64 rng(5);
  const auto d = testing::random_dataset(rng, 6, 2);
  double prev = log_marginal_likelihood(d, 0, {1.0, 0.5});
  CHECK(std::isfinite(prev));
  for (double s2 : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double v = log_marginal_likelihood(d, 0, {s2, 0.5});
    CHECK(std::isfinite(v));
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < -1e6);
}

TEST_CASE("prediction at a training input interpolates") {
  std::mt19937_64 rng(11);
  const auto data = testing::random_dataset(rng, 8, 2);
  const std::vector<Hyperparameters> t{{1.3, 0.4}, {0.2, 0.9}};
  const auto em = condition(data, t);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto p = em.predict(data.input(r));
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(p.mean[i] - data.output(r)[i]) < 1e-6);
      CHECK(p.variance[i] <= 1e-6 * t[i].sigma2);
    }
  }
}

TEST_CASE("far from the data the prior is recovered") {
  std::mt19937_64 rng(12);
  const auto data = testing::random_dataset(rng, 8, 2);
  const std::vector<Hyperparameters> t{{1.3, 0.04}, {0.2, 0.09}};
  const auto p = condition(data, t).predict(State{40.0, -40.0});
  CHECK(std::abs(p.mean[0]) < 1e-12);
  CHECK(p.variance[0] == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(p.variance[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("prior emulator predicts zero mean and prior variance") {
  const auto em = GpEmulator::prior(2, {{2.0, 1.0}, {3.0, 1.0}});
  const auto p = em.predict(State{0.5, 0.5});
  CHECK(p.mean == State{0.0, 0.0});
  CHECK(p.variance == State{2.0, 3.0});
}

TEST_CASE("posterior variance is non-negative and barely negative before clamping") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = testing::random_dataset(rng, 10, 2);
    const std::vector<Hyperparameters> t{random_theta(rng), random_theta(rng)};
    const auto em = condition(data, t);
    for (int q = 0; q < 20; ++q) {
      const State x = q % 2 ? State{u(rng), u(rng)}
                            : State(data.input(q % 10).begin(), data.input(q % 10).end());
      const auto p = em.predict(x);
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK(p.variance[i] >= 0.0);
        CHECK(p.raw_variance[i] >= -1e-8 * t[i].sigma2);
      }
    }
  }
}

TEST_CASE("posterior mean is linear in the outputs") {
  std::mt19937_64 rng(14);
  const auto a = testing::random_dataset(rng, 9, 1);
  ResidualDataset b(1), sum(1);
  std::normal_distribution<double> g;
  for (std::size_t r = 0; r < a.size(); ++r) {
    const State y{g(rng)};
    b.add(a.input(r), y, Provenance::acquisition);
    sum.add(a.input(r), State{a.output(r)[0] + y[0]}, Provenance::acquisition);
  }
  const std::vector<Hyperparameters> t{{0.7, 0.3}};
  const auto ea = condition(a, t), eb = condition(b, t), es = condition(sum, t);
  for (double x : {-0.9, -0.2, 0.0, 0.45, 1.7}) {
    const State q{x};
    // rounding scales with the size of the weights
    const double scale = ea.weights(0).cwiseAbs().sum() + eb.weights(0).cwiseAbs().sum() +
                         es.weights(0).cwiseAbs().sum();
    CHECK(std::abs(es.predict_mean(q)[0] - ea.predict_mean(q)[0] - eb.predict_mean(q)[0]) <
          1e-13 * scale + 1e-13);
  }
}

TEST_CASE("gram matrices are symmetric and factorizable") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = testing::random_dataset(rng, 10, 3);
    const auto sq = squared_distances(data.input_matrix());
    CHECK(sq == sq.transpose());
    CHECK_NOTHROW(factorize_gram(sq, random_theta(rng)));
  }
}

TEST_CASE("jitter escalates until the factorization succeeds") {
  // Non-metric distances give a Gram matrix with one eigenvalue near -e/6.
  auto sq = [](double e) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d(0, 2) = d(2, 0) = e;
    return d;
  };
  const auto f = factorize_gram(sq(2e-6), {2.0, 1.0});
  CHECK(f.jitter == doctest::Approx(2e-6).epsilon(1e-9));
  CHECK(factorize_gram(sq(0.0), {2.0, 1.0}).jitter == doctest::Approx(2e-10));
  CHECK_THROWS_AS(factorize_gram(sq(2e-3), {2.0, 1.0}), IllConditioned);
  CHECK_THROWS_AS(factorize_gram(sq(0.0), {2.0, 1.0}, 0, {0.0, 1e-4}), ParameterError);
  CHECK_THROWS_AS(factorize_gram(sq(0.0), {2.0, 1.0}, 0, {1e-3, 1e-4}), ParameterError);
}

TEST_CASE("factorization failure names the output dimension") {
  // Non-finite hyperparameters cannot be rescued by any jitter.
  ResidualDataset d(1);
  d.add(State{0.0}, State{1.0}, Provenance::acquisition);
  d.add(State{1.0}, State{1.0}, Provenance::acquisition);
  try {
    factorize_gram(squared_distances(d.input_matrix()), {NAN, 1.0}, 3);
    FAIL("expected IllConditioned");
  } catch (const IllConditioned& e) {
    CHECK(e.output_dim() == 3);
  }
}

TEST_CASE("conditioning on merged data equals conditioning on the concatenation") {
  std::mt19937_64 rng(16);
  const auto acq = testing::random_dataset(rng, 6, 2);
  const auto leg = testing::random_dataset(rng, 5, 2);
  ResidualDataset concat(2);
  for (const auto* part : {&acq, &leg})
    for (std::size_t r = 0; r < part->size(); ++r)
      concat.add(part->input(r), part->output(r), part->provenance(r));
  ResidualDataset merged = acq;
  for (std::size_t r = 0; r < leg.size(); ++r)
    merged.add(leg.input(r), leg.output(r), Provenance::legacy);
  const std::vector<Hyperparameters> t{{1.0, 0.5}, {0.5, 0.2}};
  const auto a = condition(merged, t), b = condition(concat, t);
  for (const State& x : {State{0.1, 0.2}, State{-0.7, 0.9}}) {
    CHECK(a.predict(x).mean == b.predict(x).mean);
    CHECK(a.predict(x).variance == b.predict(x).variance);
  }
}

TEST_CASE("hyperparameters of a known GP draw are recovered within a factor of two") {
  const double sigma2 = 4.0, ell2 = 0.5;
  const std::size_t n = 30;
  int recovered = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::normal_distribution<double> g;
    ResidualDataset x(1);
    while (x.size() < n)
      x.add(State{u(rng)}, State{0.0}, Provenance::acquisition);
    const auto sq = squared_distances(x.input_matrix());
    Eigen::MatrixXd k = (-sq / (2 * ell2)).array().exp() * sigma2;
    // same jitter the emulator assumes, so the draw comes from the fitted model
    k.diagonal().array() += 1e-10 * sigma2;
    const Eigen::MatrixXd l = k.llt().matrixL();
    Eigen::VectorXd z(n);
    for (auto& v : z)
      v = g(rng);
    const Eigen::VectorXd y = l * z;
    ResidualDataset data(1);
    for (std::size_t r = 0; r < n; ++r)
      data.add(x.input(r), State{y[static_cast<Eigen::Index>(r)]}, Provenance::acquisition);

    const std::vector<Hyperparameters> init{{1.0, 1.0}};
    const auto res = optimize_hyperparameters(data, init);
    const auto& t = res.theta[0];
    CAPTURE(seed);
    CAPTURE(t.sigma2);
    CAPTURE(t.ell2);
    recovered += t.sigma2 > sigma2 / 2 && t.sigma2 < sigma2 * 2 && t.ell2 > ell2 / 2 &&
                 t.ell2 < ell2 * 2;
  }
  CHECK(recovered == 5);
}

TEST_CASE("optimization never lowers the objective and is deterministic") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = testing::random_dataset(rng, 12, 2);
    const std::vector<Hyperparameters> init{random_theta(rng), random_theta(rng)};
    const auto a = optimize_hyperparameters(data, init);
    const auto b = optimize_hyperparameters(data, init);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(a.theta[i] == b.theta[i]);
      CHECK(log_marginal_likelihood(data, i, a.theta[i]) >=
            log_marginal_likelihood(data, i, init[i]));
    }
  }
}

TEST_CASE("optimizer result does not depend on the worker count") {
  std::mt19937_64 rng(18);
  const auto data = testing::random_dataset(rng, 15, 3);
  const std::vector<Hyperparameters> init(3, Hyperparameters{});
  OptimizerOptions serial, parallel;
  parallel.workers = 3;
  CHECK(optimize_hyperparameters(data, init, serial).theta ==
        optimize_hyperparameters(data, init, parallel).theta);
}

TEST_CASE("zero residuals keep the initial hyperparameters") {
  ResidualDataset d(2);
  d.add(State{0, 0}, State{0, 0}, Provenance::acquisition);
  d.add(State{1, 0}, State{0, 0}, Provenance::acquisition);
  const std::vector<Hyperparameters> init{{2.0, 3.0}, {0.5, 0.25}};
  const auto r = optimize_hyperparameters(d, init);
  CHECK(r.theta == init);
}

} // TEST_SUITE
