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

#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ode_system.hpp"

namespace gparareal {

/// Square-exponential kernel hyperparameters. Optimized in log space.
struct Hyperparameters {
  double sigma2 = 1.0; // output scale
  double ell2 = 1.0;   // squared input length scale

  static Hyperparameters from_log(double log_sigma2, double log_ell2);
  bool operator==(const Hyperparameters&) const = default;
};

void validate(const Hyperparameters& theta);

/// sigma2 * exp(-|x - x'|^2 / (2 ell2)), isotropic over R^d.
double kernel_eval(const Hyperparameters& theta, std::span<const double> x,
                   std::span<const double> x2);

enum class Provenance { acquisition, legacy };

const char* to_string(Provenance p);

/// Inputs x and residuals y = (F - G)(x). Rows with an input already present
/// are dropped (the first occurrence wins); noise-free data cannot hold two
/// rows at the same input.
class ResidualDataset {
public:
  explicit ResidualDataset(std::size_t dim = 0) : dim_(dim) {}

  /// Returns false when the input was already present and the row dropped.
  bool add(std::span<const double> x, std::span<const double> y, Provenance provenance);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return provenance_.size(); }
  bool empty() const { return provenance_.empty(); }

  std::span<const double> input(std::size_t row) const;
  std::span<const double> output(std::size_t row) const;
  Provenance provenance(std::size_t row) const { return provenance_[row]; }
  bool contains(std::span<const double> x) const;
  std::size_t count(Provenance p) const;

  Eigen::MatrixXd input_matrix() const;                   // n x d
  Eigen::VectorXd output_column(std::size_t dim) const;   // length n

  /// Exact (bitwise) equality of rows and provenance.
  bool operator==(const ResidualDataset& other) const;

private:
  std::size_t dim_;
  std::vector<double> inputs_;
  std::vector<double> outputs_;
  std::vector<Provenance> provenance_;
  std::set<std::vector<double>> seen_;
};

/// Pairwise squared distances of the rows of `x`.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x);

/// Nugget added to the Gram diagonal, relative to sigma2. Escalates by 10x on
/// factorization failure.
struct JitterPolicy {
  double initial = 1e-10;
  double maximum = 1e-4;
};

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0; // absolute value added to the diagonal
};

/// Cholesky of K(x, x) + jitter I with escalation. Throws IllConditioned
/// (tagged with `output_dim`) when even the maximum jitter fails.
Factorization factorize_gram(const Eigen::MatrixXd& sqdist, const Hyperparameters& theta,
                             int output_dim = 0, const JitterPolicy& jitter = {});

struct Prediction {
  State mean;
  State variance;     // clamped to >= 0
  State raw_variance; // before clamping
};

/// Independent zero-mean GPs, one per output dimension, sharing the inputs.
/// Immutable once built and safe to share across threads.
class GpEmulator {
public:
  /// Emulator with no data: posterior equals the prior (mean 0, variance sigma2).
  static GpEmulator prior(std::size_t dim, std::vector<Hyperparameters> theta);

  std::size_t dim() const { return theta_.size(); }
  std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }
  const Hyperparameters& theta(std::size_t i) const { return theta_[i]; }
  const std::vector<Hyperparameters>& thetas() const { return theta_; }
  double jitter(std::size_t i) const { return factors_[i].jitter; }
  /// K(x, x)^{-1} y_i.
  const Eigen::VectorXd& weights(std::size_t i) const { return weights_[i]; }

  Prediction predict(std::span<const double> x) const;
  State predict_mean(std::span<const double> x) const;

private:
  friend GpEmulator condition(const ResidualDataset&, std::span<const Hyperparameters>,
                              const JitterPolicy&);

  Eigen::MatrixXd inputs_;
  std::vector<Hyperparameters> theta_;
  std::vector<Factorization> factors_;
  std::vector<Eigen::VectorXd> weights_;
};

GpEmulator condition(const ResidualDataset& data, std::span<const Hyperparameters> theta,
                     const JitterPolicy& jitter = {});

struct LikelihoodTerms {
  double value = 0.0;
  /// Derivatives with respect to (log sigma2, log ell2).
  std::array<double, 2> gradient{};
  double jitter = 0.0;
};

/// log N(y | 0, K(x, x) + jitter) with its gradient in log-hyperparameters.
LikelihoodTerms log_marginal_likelihood_terms(const Eigen::MatrixXd& sqdist,
                                              const Eigen::VectorXd& y,
                                              const Hyperparameters& theta,
                                              bool with_gradient = true,
                                              const JitterPolicy& jitter = {});

double log_marginal_likelihood(const ResidualDataset& data, std::size_t output,
                               const Hyperparameters& theta);

struct OptimizerOptions {
  /// Extra starting points in log ell2; the caller's initial value is always
  /// tried first. sigma2 is profiled out in closed form at every ell2.
  std::vector<double> log_ell2_starts = {-1.0, 1.0};
  int max_iterations = 60;
  double gradient_tolerance = 1e-5;
  std::array<double, 2> log_sigma2_bounds = {-60.0, 30.0};
  std::array<double, 2> log_ell2_bounds = {-15.0, 15.0};
  std::size_t workers = 1;
};

struct OptimizationResult {
  std::vector<Hyperparameters> theta;
  std::vector<double> objective;  // log marginal likelihood at theta
  std::vector<bool> diverged;     // no finite objective was ever found
};

/// Maximizes each output dimension's marginal likelihood independently.
/// Never returns a point worse than `init`; deterministic given its inputs.
OptimizationResult optimize_hyperparameters(const ResidualDataset& data,
                                            std::span<const Hyperparameters> init,
                                            const OptimizerOptions& options = {});

} // namespace gparareal
