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

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "gp_emulator.hpp"
#include "ode_system.hpp"

namespace testing {

using gparareal::OdeSystem;
using gparareal::State;

// u' = lambda * u, componentwise.
inline OdeSystem linear_system(double lambda, gparareal::State u0, double t0, double t_end) {
  OdeSystem s;
  s.label = "linear";
  s.dim = u0.size();
  s.rhs = [lambda](std::span<const double> u, std::span<double> du) {
    for (std::size_t i = 0; i < u.size(); ++i)
      du[i] = lambda * u[i];
  };
  s.t0 = t0;
  s.t_end = t_end;
  s.u0 = std::move(u0);
  return s;
}

inline OdeSystem zero_system(gparareal::State u0, double t0 = 0.0, double t_end = 1.0) {
  return linear_system(0.0, std::move(u0), t0, t_end);
}

// u1' = u1^2 blows up at t = 1 / u1(0).
inline OdeSystem riccati_system(double u0, double t_end) {
  OdeSystem s;
  s.label = "riccati";
  s.dim = 1;
  s.rhs = [](std::span<const double> u, std::span<double> du) { du[0] = u[0] * u[0]; };
  s.t0 = 0.0;
  s.t_end = t_end;
  s.u0 = {u0};
  return s;
}

using Matrix = std::vector<std::vector<double>>;

// Dense inverse by Gauss-Jordan elimination with partial pivoting.
inline Matrix gauss_jordan_inverse(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c]))
        p = r;
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c)
        continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

// log det by Gaussian elimination (matrix assumed SPD).
inline double log_det(Matrix a) {
  const std::size_t n = a.size();
  double ld = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    ld += std::log(a[c][c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k)
        a[r][k] -= f * a[c][k];
    }
  }
  return ld;
}

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct Brute {
  double mean;
  double variance;
};

// Posterior of one output dimension straight from the textbook formulas.
inline Matrix gram(const gparareal::ResidualDataset& data, const gparareal::Hyperparameters& t,
                   double jitter) {
  const std::size_t n = data.size();
  Matrix k(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      k[r][c] = t.sigma2 * std::exp(-sq_dist(data.input(r), data.input(c)) / (2 * t.ell2)) +
                (r == c ? jitter : 0.0);
  return k;
}

inline Brute brute_posterior(const gparareal::ResidualDataset& data, std::size_t dim,
                             const gparareal::Hyperparameters& t, double jitter,
                             std::span<const double> x) {
  const std::size_t n = data.size();
  const Matrix inv = gauss_jordan_inverse(gram(data, t, jitter));
  std::vector<double> kx(n);
  for (std::size_t r = 0; r < n; ++r)
    kx[r] = t.sigma2 * std::exp(-sq_dist(data.input(r), x) / (2 * t.ell2));
  double mean = 0.0, quad = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      mean += kx[r] * inv[r][c] * data.output(c)[dim];
      quad += kx[r] * inv[r][c] * kx[c];
    }
  return {mean, t.sigma2 - quad};
}

inline double brute_log_likelihood(const gparareal::ResidualDataset& data, std::size_t dim,
                                   const gparareal::Hyperparameters& t, double jitter) {
  const std::size_t n = data.size();
  const Matrix k = gram(data, t, jitter);
  const Matrix inv = gauss_jordan_inverse(k);
  double quad = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      quad += data.output(r)[dim] * inv[r][c] * data.output(c)[dim];
  return -0.5 * quad - 0.5 * log_det(k) - 0.5 * n * std::log(2 * M_PI);
}

inline gparareal::ResidualDataset random_dataset(std::mt19937_64& rng, std::size_t n,
                                                 std::size_t d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  gparareal::ResidualDataset data(d);
  State x(d), y(d);
  while (data.size() < n) {
    for (auto& v : x)
      v = u(rng);
    for (auto& v : y)
      v = u(rng);
    data.add(x, y, gparareal::Provenance::acquisition);
  }
  return data;
}

} // namespace testing
