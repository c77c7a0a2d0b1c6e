/*
 * Copyright 2026 The xbarsec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Independent reference computations for the test suites. Nothing here
// calls into the library except plain data types.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "xbarsec/matrix.hpp"

namespace oracle {

// Dense I = G^T v, summed in long double.
inline std::vector<double> mvm(const xbarsec::Matrix& g, const std::vector<double>& v) {
  std::vector<double> out(g.cols);
  for (std::size_t j = 0; j < g.cols; ++j) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < g.rows; ++i) acc += static_cast<long double>(g(i, j)) * v[i];
    out[j] = static_cast<double>(acc);
  }
  return out;
}

// S3 written out by hand: image of 0, 1, 2 under each keyed arrangement.
inline constexpr std::array<std::array<std::size_t, 3>, 6> kS3 = {{
    {0, 1, 2},  // identity
    {1, 0, 2},  // (01)
    {2, 1, 0},  // (02)
    {0, 2, 1},  // (12)
    {1, 2, 0},  // (012)
    {2, 0, 1},  // (021)
}};

inline std::vector<std::size_t> mapping(std::size_t rows, const std::vector<std::uint8_t>& keys) {
  std::vector<std::size_t> m(rows);
  for (std::size_t i = 0; i < rows; ++i) m[i] = i;
  for (std::size_t t = 0; t < keys.size(); ++t) {
    for (std::size_t k = 0; k < 3; ++k) m[3 * t + k] = 3 * t + kS3[keys[t]][k];
  }
  return m;
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

inline double max_rel_err(const std::vector<double>& got, const std::vector<double>& want) {
  double peak = 0.0, worst = 0.0;
  for (double w : want) peak = std::max(peak, std::abs(w));
  for (std::size_t i = 0; i < got.size(); ++i) {
    worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(peak, 1e-300));
  }
  return worst;
}

// Elmore delay of an RC chain: resistor k feeds node k, every node holds c.
inline double elmore_chain(const std::vector<double>& resistors, double c) {
  double upstream = 0.0, d = 0.0;
  for (double r : resistors) {
    upstream += r;
    d += upstream * c;
  }
  return d;
}

// Crossbar worst path as a chain: driver into the first wordline segment,
// along the wordline to the far column, through the fastest cell, then
// down that column's bitline.
inline double crossbar_path_delay(std::size_t m, std::size_t nt, double r_drive, double r_wire,
                                  double r_cell, double c) {
  std::vector<double> chain;
  chain.push_back(r_drive + r_wire);
  for (std::size_t j = 1; j < nt; ++j) chain.push_back(r_wire);
  chain.push_back(r_cell + r_wire);
  for (std::size_t i = 1; i < m; ++i) chain.push_back(r_wire);
  return elmore_chain(chain, c);
}

// Dense Gaussian elimination with partial pivoting for small systems.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// Nodal analysis of a 1T1R crossbar written directly from the circuit:
// returns the sense currents of every column.
struct Circuit {
  std::size_t m = 0, nt = 0;
  xbarsec::Matrix cell_g;  // including the access transistor
  double r_wire = 0, r_drive = 0, r_sense = 0;
};

inline std::vector<double> crossbar_currents(const Circuit& c, const std::vector<double>& v) {
  const std::size_t n = 2 * c.m * c.nt;
  auto w = [&](std::size_t i, std::size_t j) { return i * c.nt + j; };
  auto b = [&](std::size_t i, std::size_t j) { return c.m * c.nt + i * c.nt + j; };
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 0.0);
  auto stamp = [&](std::size_t p, std::size_t q, double g) {
    a[p][p] += g;
    a[q][q] += g;
    a[p][q] -= g;
    a[q][p] -= g;
  };
  for (std::size_t i = 0; i < c.m; ++i) {
    a[w(i, 0)][w(i, 0)] += 1.0 / c.r_drive;
    rhs[w(i, 0)] += v[i] / c.r_drive;
    for (std::size_t j = 0; j < c.nt; ++j) {
      stamp(w(i, j), b(i, j), c.cell_g(i, j));
      if (j + 1 < c.nt) stamp(w(i, j), w(i, j + 1), 1.0 / c.r_wire);
      if (i + 1 < c.m) stamp(b(i, j), b(i + 1, j), 1.0 / c.r_wire);
    }
  }
  for (std::size_t j = 0; j < c.nt; ++j) a[b(c.m - 1, j)][b(c.m - 1, j)] += 1.0 / c.r_sense;
  const auto x = dense_solve(a, rhs);
  std::vector<double> out(c.nt);
  for (std::size_t j = 0; j < c.nt; ++j) out[j] = x[b(c.m - 1, j)] / c.r_sense;
  return out;
}

inline xbarsec::Matrix random_weights(std::size_t r, std::size_t c, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  xbarsec::Matrix w(r, c);
  for (auto& x : w.data) x = u(gen);
  return w;
}

inline std::vector<double> random_volts(std::size_t n, double vmax, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, vmax);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

}  // namespace oracle

#include <optional>

#include "xbarsec/errors.hpp"

namespace oracle {

// Kind of the xbarsec::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<xbarsec::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const xbarsec::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace oracle
