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

#include "gp_emulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "errors.hpp"
#include "runtime.hpp"

namespace gparareal {

Hyperparameters Hyperparameters::from_log(double log_sigma2, double log_ell2) {
  return {std::exp(log_sigma2), std::exp(log_ell2)};
}

void validate(const Hyperparameters& theta) {
  if (!(theta.sigma2 > 0.0) || !std::isfinite(theta.sigma2) || !(theta.ell2 > 0.0) ||
      !std::isfinite(theta.ell2))
    throw ParameterError("kernel hyperparameters must be positive and finite");
}

double kernel_eval(const Hyperparameters& theta, std::span<const double> x,
                   std::span<const double> x2) {
  if (x.size() != x2.size())
    throw DimensionMismatch("kernel inputs differ in dimension");
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - x2[i];
    r2 += diff * diff;
  }
  return theta.sigma2 * std::exp(-r2 / (2.0 * theta.ell2));
}

const char* to_string(Provenance p) {
  return p == Provenance::acquisition ? "acquisition" : "legacy";
}

// --- ResidualDataset --------------------------------------------------------

bool ResidualDataset::add(std::span<const double> x, std::span<const double> y,
                          Provenance provenance) {
  if (dim_ == 0 && empty())
    dim_ = x.size();
  if (x.size() != dim_ || y.size() != dim_)
    throw DimensionMismatch("dataset row has dimension " + std::to_string(x.size()) + "/" +
                            std::to_string(y.size()) + ", expected " +
                            std::to_string(dim_));
  for (double v : x)
    if (!std::isfinite(v))
      throw ParameterError("dataset input must be finite");
  std::vector<double> key(x.begin(), x.end());
  if (!seen_.insert(std::move(key)).second)
    return false;
  inputs_.insert(inputs_.end(), x.begin(), x.end());
  outputs_.insert(outputs_.end(), y.begin(), y.end());
  provenance_.push_back(provenance);
  return true;
}

std::span<const double> ResidualDataset::input(std::size_t row) const {
  return {inputs_.data() + row * dim_, dim_};
}

std::span<const double> ResidualDataset::output(std::size_t row) const {
  return {outputs_.data() + row * dim_, dim_};
}

bool ResidualDataset::contains(std::span<const double> x) const {
  return seen_.count(std::vector<double>(x.begin(), x.end())) > 0;
}

std::size_t ResidualDataset::count(Provenance p) const {
  return static_cast<std::size_t>(std::count(provenance_.begin(), provenance_.end(), p));
}

Eigen::MatrixXd ResidualDataset::input_matrix() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t r = 0; r < size(); ++r)
    for (std::size_t c = 0; c < dim_; ++c)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = inputs_[r * dim_ + c];
  return x;
}

Eigen::VectorXd ResidualDataset::output_column(std::size_t dim) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(size()));
  for (std::size_t r = 0; r < size(); ++r)
    y(static_cast<Eigen::Index>(r)) = outputs_[r * dim_ + dim];
  return y;
}

bool ResidualDataset::operator==(const ResidualDataset& other) const {
  return dim_ == other.dim_ && provenance_ == other.provenance_ &&
         inputs_ == other.inputs_ && outputs_ == other.outputs_;
}

// --- Gram matrices ----------------------------------------------------------

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double r2 = (x.row(i) - x.row(j)).squaredNorm();
      d(i, j) = r2;
      d(j, i) = r2;
    }
  }
  return d;
}

namespace {

Eigen::MatrixXd gram(const Eigen::MatrixXd& sqdist, const Hyperparameters& theta) {
  return theta.sigma2 * (sqdist.array() * (-0.5 / theta.ell2)).exp().matrix();
}

} // namespace

Factorization factorize_gram(const Eigen::MatrixXd& sqdist, const Hyperparameters& theta,
                             int output_dim, const JitterPolicy& jitter) {
  if (!(jitter.initial > 0.0) || !(jitter.maximum >= jitter.initial))
    throw ParameterError("jitter policy needs 0 < initial <= maximum");
  const Eigen::MatrixXd k = gram(sqdist, theta);
  for (double rel = jitter.initial; rel <= jitter.maximum * (1.0 + 1e-9); rel *= 10.0) {
    Factorization f;
    f.jitter = rel * theta.sigma2;
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += f.jitter;
    f.llt.compute(kj);
    if (f.llt.info() == Eigen::Success) {
      // LLT only rejects non-positive pivots; reject denormal ones as well.
      const auto diag = f.llt.matrixLLT().diagonal();
      if ((diag.array() > 0.0).all() && diag.allFinite())
        return f;
    }
  }
  throw IllConditioned(output_dim);
}

// --- GpEmulator -------------------------------------------------------------

GpEmulator GpEmulator::prior(std::size_t dim, std::vector<Hyperparameters> theta) {
  if (theta.size() != dim)
    throw DimensionMismatch("need one hyperparameter set per output dimension");
  for (const auto& t : theta)
    validate(t);
  GpEmulator em;
  em.inputs_.resize(0, static_cast<Eigen::Index>(dim));
  em.theta_ = std::move(theta);
  em.factors_.resize(dim);
  em.weights_.assign(dim, Eigen::VectorXd());
  return em;
}

GpEmulator condition(const ResidualDataset& data, std::span<const Hyperparameters> theta,
                     const JitterPolicy& jitter) {
  if (data.empty())
    throw ParameterError("cannot condition on an empty dataset");
  if (theta.size() != data.dim())
    throw DimensionMismatch("need one hyperparameter set per output dimension");

  GpEmulator em;
  em.inputs_ = data.input_matrix();
  em.theta_.assign(theta.begin(), theta.end());
  const Eigen::MatrixXd d2 = squared_distances(em.inputs_);
  for (std::size_t i = 0; i < data.dim(); ++i) {
    validate(theta[i]);
    em.factors_.push_back(factorize_gram(d2, theta[i], static_cast<int>(i), jitter));
    em.weights_.push_back(em.factors_.back().llt.solve(data.output_column(i)));
  }
  return em;
}

Prediction GpEmulator::predict(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(inputs_.cols()))
    throw DimensionMismatch("prediction input has wrong dimension");
  const Eigen::Index n = inputs_.rows();
  const Eigen::Map<const Eigen::RowVectorXd> xr(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd r2(n);
  for (Eigen::Index j = 0; j < n; ++j)
    r2(j) = (inputs_.row(j) - xr).squaredNorm();

  Prediction p;
  p.mean.assign(dim(), 0.0);
  p.variance.assign(dim(), 0.0);
  p.raw_variance.assign(dim(), 0.0);
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto& t = theta_[i];
    if (n == 0) {
      p.raw_variance[i] = p.variance[i] = t.sigma2;
      continue;
    }
    const Eigen::VectorXd kx = t.sigma2 * (r2.array() * (-0.5 / t.ell2)).exp().matrix();
    p.mean[i] = kx.dot(weights_[i]);
    const Eigen::VectorXd v = factors_[i].llt.matrixL().solve(kx);
    p.raw_variance[i] = t.sigma2 - v.squaredNorm();
    p.variance[i] = std::max(0.0, p.raw_variance[i]);
  }
  return p;
}

State GpEmulator::predict_mean(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(inputs_.cols()))
    throw DimensionMismatch("prediction input has wrong dimension");
  const Eigen::Index n = inputs_.rows();
  State mean(dim(), 0.0);
  if (n == 0)
    return mean;
  const Eigen::Map<const Eigen::RowVectorXd> xr(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd r2(n);
  for (Eigen::Index j = 0; j < n; ++j)
    r2(j) = (inputs_.row(j) - xr).squaredNorm();
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto& t = theta_[i];
    const Eigen::VectorXd kx = t.sigma2 * (r2.array() * (-0.5 / t.ell2)).exp().matrix();
    mean[i] = kx.dot(weights_[i]);
  }
  return mean;
}

// --- Marginal likelihood ----------------------------------------------------

LikelihoodTerms log_marginal_likelihood_terms(const Eigen::MatrixXd& sqdist,
                                              const Eigen::VectorXd& y,
                                              const Hyperparameters& theta,
                                              bool with_gradient,
                                              const JitterPolicy& jitter) {
  validate(theta);
  const Eigen::Index n = y.size();
  if (n == 0 || sqdist.rows() != n)
    throw DimensionMismatch("likelihood needs a non-empty dataset with matching distances");

  const Factorization f = factorize_gram(sqdist, theta, 0, jitter);
  const Eigen::VectorXd alpha = f.llt.solve(y);
  const double log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();

  LikelihoodTerms out;
  out.jitter = f.jitter;
  const double quad = y.dot(alpha);
  out.value = -0.5 * quad - 0.5 * log_det -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (!with_gradient)
    return out;

  // The nugget scales with sigma2, so dK/dlog(sigma2) = K itself.
  out.gradient[0] = 0.5 * (quad - static_cast<double>(n));

  // dK/dlog(ell2) = K_noiseless .* D / (2 ell2)
  const Eigen::MatrixXd dk =
      (theta.sigma2 * (sqdist.array() * (-0.5 / theta.ell2)).exp() *
       (sqdist.array() * (0.5 / theta.ell2)))
          .matrix();
  const Eigen::MatrixXd kinv =
      f.llt.solve(Eigen::MatrixXd::Identity(n, n));
  const double data_term = alpha.dot(dk * alpha);
  const double trace_term = (kinv.array() * dk.array()).sum();
  out.gradient[1] = 0.5 * (data_term - trace_term);
  return out;
}

double log_marginal_likelihood(const ResidualDataset& data, std::size_t output,
                               const Hyperparameters& theta) {
  if (data.empty())
    throw ParameterError("likelihood of an empty dataset is undefined");
  if (output >= data.dim())
    throw DimensionMismatch("output dimension out of range");
  const Eigen::MatrixXd d2 = squared_distances(data.input_matrix());
  return log_marginal_likelihood_terms(d2, data.output_column(output), theta, false).value;
}

// --- Hyperparameter optimization --------------------------------------------

namespace {

/// The nugget is relative to sigma2, so K = sigma2 (R + c I) and for a fixed
/// ell2 the likelihood is maximized in closed form by sigma2 = y'(R + cI)^-1 y / n.
/// The search therefore runs over log ell2 on the profiled objective.
struct ProfilePoint {
  double log_ell2 = 0.0;
  double log_sigma2 = 0.0;
  double value = -std::numeric_limits<double>::infinity();
  double slope = 0.0; // d value / d log ell2
  bool finite() const { return std::isfinite(value) && std::isfinite(slope); }
};

class ProfileObjective {
public:
  ProfileObjective(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& y,
                   const OptimizerOptions& options)
      : sqdist_(sqdist), y_(y), options_(options) {}

  ProfilePoint eval(double log_ell2) const {
    ProfilePoint p;
    p.log_ell2 = std::clamp(log_ell2, options_.log_ell2_bounds[0], options_.log_ell2_bounds[1]);
    const double ell2 = std::exp(p.log_ell2);
    const auto n = static_cast<double>(y_.size());
    try {
      const Factorization f = factorize_gram(sqdist_, {1.0, ell2});
      const Eigen::VectorXd beta = f.llt.solve(y_);
      const double q = y_.dot(beta);
      if (!(q > 0.0))
        return p;
      p.log_sigma2 = std::clamp(std::log(q / n), options_.log_sigma2_bounds[0],
                                options_.log_sigma2_bounds[1]);
      const double sigma2 = std::exp(p.log_sigma2);
      const double log_det_r = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
      p.value = -0.5 * q / sigma2 - 0.5 * (n * p.log_sigma2 + log_det_r) -
                0.5 * n * std::log(2.0 * std::numbers::pi);

      // Envelope theorem: the profile slope is the partial derivative in
      // log ell2 at the optimal sigma2.
      const Eigen::MatrixXd m =
          ((sqdist_.array() * (-0.5 / ell2)).exp() * (sqdist_.array() * (0.5 / ell2)))
              .matrix();
      const Eigen::MatrixXd rinv =
          f.llt.solve(Eigen::MatrixXd::Identity(y_.size(), y_.size()));
      p.slope = 0.5 * (beta.dot(m * beta) / sigma2 - (rinv.array() * m.array()).sum());
    } catch (const IllConditioned&) {
      p.value = -std::numeric_limits<double>::infinity();
    }
    return p;
  }

  /// Quasi-Newton (secant) ascent with Armijo backtracking; never moves to a
  /// worse point.
  ProfilePoint ascend(ProfilePoint p) const {
    if (!p.finite())
      return p;
    double inv_curv = 1.0; // for the minimization of -value
    for (int it = 0; it < options_.max_iterations; ++it) {
      const double g = -p.slope;
      if (std::abs(g) < options_.gradient_tolerance)
        break;
      double dir = -inv_curv * g;
      if (dir * g >= 0.0) {
        inv_curv = 1.0;
        dir = -g;
      }
      dir = std::clamp(dir, -4.0, 4.0);

      ProfilePoint next;
      bool accepted = false;
      for (double step = 1.0; step > 1e-8; step *= 0.5) {
        next = eval(p.log_ell2 + step * dir);
        const double gain = next.value - p.value;
        if (next.finite() && gain > 0.0 && gain >= -1e-4 * step * dir * g) {
          accepted = true;
          break;
        }
      }
      if (!accepted)
        break;
      const double s = next.log_ell2 - p.log_ell2;
      const double yv = -next.slope - g;
      if (s * yv > 1e-14)
        inv_curv = s / yv;
      p = next;
      if (std::abs(s) < 1e-9)
        break;
    }
    return p;
  }

private:
  const Eigen::MatrixXd& sqdist_;
  const Eigen::VectorXd& y_;
  const OptimizerOptions& options_;
};

struct DimResult {
  Hyperparameters theta;
  double objective;
  bool diverged;
};

} // namespace

OptimizationResult optimize_hyperparameters(const ResidualDataset& data,
                                            std::span<const Hyperparameters> init,
                                            const OptimizerOptions& options) {
  if (data.empty())
    throw ParameterError("cannot optimize hyperparameters without data");
  if (init.size() != data.dim())
    throw DimensionMismatch("need one initial hyperparameter set per output dimension");
  for (const auto& t : init)
    validate(t);

  const Eigen::MatrixXd d2 = squared_distances(data.input_matrix());

  const auto per_dim = parallel_map<DimResult>(
      data.dim(), options.workers, [&](std::size_t i) -> DimResult {
        const Eigen::VectorXd y = data.output_column(i);
        double init_value = -std::numeric_limits<double>::infinity();
        try {
          init_value = log_marginal_likelihood_terms(d2, y, init[i], false).value;
        } catch (const IllConditioned&) {
        }

        // Identically zero residuals: any sigma2 fits, the posterior mean is 0.
        if (y.isZero(0.0))
          return {init[i], init_value, false};

        const ProfileObjective obj(d2, y, options);
        ProfilePoint best = obj.ascend(obj.eval(std::log(init[i].ell2)));
        for (double z : options.log_ell2_starts) {
          const ProfilePoint p = obj.ascend(obj.eval(z));
          if (p.value > best.value)
            best = p;
        }
        if (std::isfinite(init_value) && !(best.value > init_value))
          return {init[i], init_value, false};
        if (!best.finite())
          return {init[i], init_value, true};
        return {Hyperparameters::from_log(best.log_sigma2, best.log_ell2), best.value, false};
      });

  OptimizationResult out;
  for (const auto& r : per_dim) {
    out.theta.push_back(r.theta);
    out.objective.push_back(r.objective);
    out.diverged.push_back(r.diverged);
  }
  return out;
}

} // namespace gparareal
