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
#include "xbarsec/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <queue>

#include "xbarsec/errors.hpp"
#include "xbarsec/permutor.hpp"

namespace xbarsec {

namespace {

constexpr double kResidualBound = 1e-9;
constexpr double kRefineTarget = 1e-13;
constexpr int kMaxRefinements = 4;

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

}  // namespace

double SimResult::mean_data_current(const std::vector<std::size_t>& data_columns) const {
  if (data_columns.empty()) return 0.0;
  double sum = 0.0;
  for (auto j : data_columns) sum += column_currents.at(j);
  return sum / static_cast<double>(data_columns.size());
}

ResistiveNetwork build_network(const CrossbarArray& array) {
  const auto& node = array.node();
  const auto& g = array.read_raw_conductances();
  ResistiveNetwork net;
  net.rows = array.rows();
  net.total_cols = array.total_cols();
  net.driver_resistance = node.r_driver + (array.has_permutor() ? node.r_switch : 0.0);
  net.sense_resistance = node.r_sense;
  net.cell_conductance.resize(net.rows * net.total_cols);

  const std::size_t m = net.rows;
  const std::size_t nt = net.total_cols;
  net.branches.reserve(m + 2 * m * nt + nt);
  for (std::size_t i = 0; i < m; ++i) {
    net.branches.push_back({net.source(i), net.w(i, 0), net.driver_resistance});
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double r_cell = 1.0 / g(i, j) + node.r_access;
      net.cell_conductance[i * nt + j] = 1.0 / r_cell;
      net.branches.push_back({net.w(i, j), net.b(i, j), r_cell});
      if (j + 1 < nt) net.branches.push_back({net.w(i, j), net.w(i, j + 1), node.r_wire});
      if (i + 1 < m) net.branches.push_back({net.b(i, j), net.b(i + 1, j), node.r_wire});
    }
  }
  for (std::size_t j = 0; j < nt; ++j) {
    net.branches.push_back({net.b(m - 1, j), net.ground(), node.r_sense});
  }
  return net;
}

struct NetworkSolver::Impl {
  const ResistiveNetwork* net = nullptr;
  std::size_t rows = 0;
  // Per internal node: unknown index, or kNone when tied to a fixed terminal.
  std::vector<std::size_t> unknown_of;
  // Per internal node: fixed terminal it is shorted to (valid when unknown_of == kNone).
  std::vector<std::size_t> fixed_of;
  std::size_t n_unknowns = 0;
  struct Coupling {
    std::size_t unknown;
    std::size_t terminal;
    double g;
  };
  std::vector<Coupling> couplings;
  Eigen::SparseMatrix<double> matrix;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

  double fixed_voltage(std::size_t terminal, std::span<const double> v) const {
    if (terminal == net->ground()) return 0.0;
    return v[terminal - net->ground() - 1];
  }

  Eigen::VectorXd rhs(std::span<const double> v) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_unknowns));
    for (const auto& c : couplings) {
      r[static_cast<Eigen::Index>(c.unknown)] += c.g * fixed_voltage(c.terminal, v);
    }
    return r;
  }
};

NetworkSolver::NetworkSolver(const ResistiveNetwork& net) : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.net = &net;
  s.rows = net.rows;
  const std::size_t n_int = net.internal_nodes();
  const std::size_t n_term = net.terminal_count();

  DisjointSets sets(n_term);
  for (const auto& br : net.branches) {
    if (br.resistance < 0.0 || !std::isfinite(br.resistance)) {
      throw Error(ErrorKind::Solver, "branch with invalid resistance");
    }
    if (br.resistance == 0.0) sets.unite(br.a, br.b);
  }

  // Each group may hold at most one fixed terminal.
  std::vector<std::size_t> group_fixed(n_term, kNone);
  for (std::size_t t = n_int; t < n_term; ++t) {
    const auto root = sets.find(t);
    if (group_fixed[root] != kNone) {
      throw Error(ErrorKind::Solver, "zero-resistance path shorts two fixed terminals (" +
                                         std::to_string(group_fixed[root]) + ", " +
                                         std::to_string(t) + ")");
    }
    group_fixed[root] = t;
  }

  std::vector<std::size_t> group_unknown(n_term, kNone);
  s.unknown_of.assign(n_int, kNone);
  s.fixed_of.assign(n_int, kNone);
  for (std::size_t k = 0; k < n_int; ++k) {
    const auto root = sets.find(k);
    if (group_fixed[root] != kNone) {
      s.fixed_of[k] = group_fixed[root];
      continue;
    }
    if (group_unknown[root] == kNone) group_unknown[root] = s.n_unknowns++;
    s.unknown_of[k] = group_unknown[root];
  }

  auto classify = [&](std::size_t t, std::size_t& unknown, std::size_t& fixed) {
    const auto root = sets.find(t);
    unknown = group_unknown[root];
    fixed = group_fixed[root];
  };

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(net.branches.size() * 4);
  std::vector<std::vector<std::size_t>> adjacency(s.n_unknowns);
  std::vector<char> anchored(s.n_unknowns, 0);
  for (const auto& br : net.branches) {
    if (br.resistance == 0.0) continue;
    const double g = 1.0 / br.resistance;
    std::size_t ua, fa, ub, fb;
    classify(br.a, ua, fa);
    classify(br.b, ub, fb);
    if (ua != kNone && ub != kNone) {
      if (ua == ub) continue;
      const auto ia = static_cast<int>(ua), ib = static_cast<int>(ub);
      trips.emplace_back(ia, ia, g);
      trips.emplace_back(ib, ib, g);
      trips.emplace_back(ia, ib, -g);
      trips.emplace_back(ib, ia, -g);
      adjacency[ua].push_back(ub);
      adjacency[ub].push_back(ua);
    } else if (ua != kNone) {
      trips.emplace_back(static_cast<int>(ua), static_cast<int>(ua), g);
      s.couplings.push_back({ua, fb, g});
      anchored[ua] = 1;
    } else if (ub != kNone) {
      trips.emplace_back(static_cast<int>(ub), static_cast<int>(ub), g);
      s.couplings.push_back({ub, fa, g});
      anchored[ub] = 1;
    }
  }

  // Every unknown needs a conductive path to a fixed terminal.
  std::vector<char> reached(anchored);
  std::queue<std::size_t> frontier;
  for (std::size_t u = 0; u < s.n_unknowns; ++u) {
    if (anchored[u]) frontier.push(u);
  }
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto nb : adjacency[u]) {
      if (!reached[nb]) {
        reached[nb] = 1;
        frontier.push(nb);
      }
    }
  }
  const auto floating = static_cast<std::size_t>(std::count(reached.begin(), reached.end(), 0));
  if (floating > 0) {
    throw Error(ErrorKind::Solver, std::to_string(floating) +
                                       " floating node group(s) without a path to a source or ground");
  }

  const auto n = static_cast<Eigen::Index>(s.n_unknowns);
  s.matrix.resize(n, n);
  s.matrix.setFromTriplets(trips.begin(), trips.end());
  s.matrix.makeCompressed();
  if (n > 0) {
    s.ldlt.compute(s.matrix);
    if (s.ldlt.info() != Eigen::Success) {
      throw Error(ErrorKind::Solver, "factorization of the " + std::to_string(s.n_unknowns) +
                                         "-unknown nodal system failed (singular or ill-conditioned)");
    }
  }
}

NetworkSolver::~NetworkSolver() = default;
NetworkSolver::NetworkSolver(NetworkSolver&&) noexcept = default;
NetworkSolver& NetworkSolver::operator=(NetworkSolver&&) noexcept = default;

std::size_t NetworkSolver::unknowns() const { return impl_->n_unknowns; }

NodeSolution NetworkSolver::solve(std::span<const double> row_voltages) const {
  const auto& s = *impl_;
  if (row_voltages.size() != s.rows) {
    throw Error(ErrorKind::Shape, "network has " + std::to_string(s.rows) + " sources, got " +
                                      std::to_string(row_voltages.size()) + " voltages");
  }
  NodeSolution sol;
  Eigen::VectorXd x;
  if (s.n_unknowns > 0) {
    const Eigen::VectorXd rhs = s.rhs(row_voltages);
    const double rhs_norm = rhs.norm();
    x = s.ldlt.solve(rhs);
    sol.iterations = 1;
    double residual = 0.0;
    if (rhs_norm > 0.0) {
      Eigen::VectorXd r = rhs - s.matrix * x;
      residual = r.norm() / rhs_norm;
      for (int k = 0; k < kMaxRefinements && residual > kRefineTarget; ++k) {
        x += s.ldlt.solve(r);
        r = rhs - s.matrix * x;
        const double next = r.norm() / rhs_norm;
        ++sol.iterations;
        if (!(next < residual)) {
          residual = next;
          break;
        }
        residual = next;
      }
    } else {
      x.setZero();
    }
    if (!std::isfinite(residual) || residual > kResidualBound) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e", residual);
      throw Error(ErrorKind::Solver, std::string("nodal solve did not converge, relative residual ") +
                                         buf);
    }
    sol.residual = residual;
  }

  const std::size_t n_int = s.unknown_of.size();
  sol.voltages.resize(n_int);
  for (std::size_t k = 0; k < n_int; ++k) {
    if (s.unknown_of[k] != kNone) {
      sol.voltages[k] = x[static_cast<Eigen::Index>(s.unknown_of[k])];
    } else {
      sol.voltages[k] = s.fixed_voltage(s.fixed_of[k], row_voltages);
    }
  }
  return sol;
}

void NetworkSolver::write_matrix_market(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  const auto& m = impl_->matrix;
  std::size_t nnz = 0;
  for (int c = 0; c < m.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, c); it; ++it) {
      if (it.row() >= it.col()) ++nnz;
    }
  }
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate real symmetric\n");
  std::fprintf(f, "%% nodal conductance matrix (S)\n");
  std::fprintf(f, "%ld %ld %zu\n", static_cast<long>(m.rows()), static_cast<long>(m.cols()), nnz);
  for (int c = 0; c < m.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, c); it; ++it) {
      if (it.row() >= it.col()) {
        std::fprintf(f, "%ld %ld %.17g\n", static_cast<long>(it.row() + 1),
                     static_cast<long>(it.col() + 1), it.value());
      }
    }
  }
  const bool ok = std::fclose(f) == 0;
  if (!ok) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

void NetworkSolver::write_rhs_matrix_market(std::span<const double> row_voltages,
                                            const std::string& path) const {
  if (row_voltages.size() != impl_->rows) throw Error(ErrorKind::Shape, "wrong input length");
  const auto rhs = impl_->rhs(row_voltages);
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  std::fprintf(f, "%%%%MatrixMarket matrix array real general\n");
  std::fprintf(f, "%% injected source currents (A)\n");
  std::fprintf(f, "%ld 1\n", static_cast<long>(rhs.size()));
  for (Eigen::Index k = 0; k < rhs.size(); ++k) std::fprintf(f, "%.17g\n", rhs[k]);
  const bool ok = std::fclose(f) == 0;
  if (!ok) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

NodeSolution solve_network(const ResistiveNetwork& net, std::span<const double> row_voltages) {
  return NetworkSolver(net).solve(row_voltages);
}

namespace {

double cell_current(const ResistiveNetwork& net, const NodeSolution& sol, std::size_t i,
                    std::size_t j) {
  return net.cell_conductance[i * net.total_cols + j] *
         (sol.voltages[net.w(i, j)] - sol.voltages[net.b(i, j)]);
}

}  // namespace

std::vector<double> column_currents(const ResistiveNetwork& net, const NodeSolution& sol) {
  std::vector<double> out(net.total_cols, 0.0);
  if (net.sense_resistance > 0.0) {
    for (std::size_t j = 0; j < net.total_cols; ++j) {
      out[j] = sol.voltages[net.b(net.rows - 1, j)] / net.sense_resistance;
    }
    return out;
  }
  // Shorted sense: the bitline's only exit is the sense branch, so its
  // current is the sum of the cell currents feeding that bitline.
  for (std::size_t i = 0; i < net.rows; ++i) {
    for (std::size_t j = 0; j < net.total_cols; ++j) out[j] += cell_current(net, sol, i, j);
  }
  return out;
}

std::vector<double> source_currents(const ResistiveNetwork& net, const NodeSolution& sol,
                                    std::span<const double> row_voltages) {
  std::vector<double> out(net.rows, 0.0);
  if (net.driver_resistance > 0.0) {
    for (std::size_t i = 0; i < net.rows; ++i) {
      out[i] = (row_voltages[i] - sol.voltages[net.w(i, 0)]) / net.driver_resistance;
    }
    return out;
  }
  for (std::size_t i = 0; i < net.rows; ++i) {
    for (std::size_t j = 0; j < net.total_cols; ++j) out[i] += cell_current(net, sol, i, j);
  }
  return out;
}

double estimate_delay(const CrossbarArray& array) {
  const auto& p = array.node();
  const double m = static_cast<double>(array.rows());
  const double nt = static_cast<double>(array.total_cols());
  const double r_drive = p.r_driver + (array.has_permutor() ? p.r_switch : 0.0);
  const double r_cell_min = 1.0 / array.device().g_on + p.r_access;
  const double c = p.c_wire;
  // Every resistance on the path charges all capacitance downstream of it,
  // so the driver and the wordline also see the bitline of the far column.
  return r_drive * (nt + m) * c + p.r_wire * c * (nt * (nt + 1.0) / 2.0 + nt * m) +
         r_cell_min * m * c + p.r_wire * c * m * (m + 1.0) / 2.0;
}

double estimate_power(const ResistiveNetwork& net, const NodeSolution& sol,
                      std::span<const double> row_voltages, const CrossbarArray& array) {
  const auto src = source_currents(net, sol, row_voltages);
  double p = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) p += row_voltages[i] * src[i];
  const auto& node = array.node();
  if (array.has_permutor()) {
    p += static_cast<double>(permutor_transistor_count(array.rows())) * node.p_switch;
  }
  p += static_cast<double>(array.wm_cols()) * node.p_wm_col;
  return p;
}

SimResult simulate(const CrossbarArray& array, const std::vector<std::vector<double>>& inputs) {
  if (inputs.empty()) throw Error(ErrorKind::InvalidArgument, "simulation needs at least one input");
  const auto net = build_network(array);
  const NetworkSolver solver(net);

  SimResult res;
  res.column_currents.assign(array.total_cols(), 0.0);
  for (const auto& v : inputs) {
    if (v.size() != array.rows()) {
      throw Error(ErrorKind::Shape, "input has " + std::to_string(v.size()) +
                                        " entries, array has " + std::to_string(array.rows()) +
                                        " rows");
    }
    for (double x : v) {
      if (!(x >= 0.0 && x <= array.node().v_read)) {
        throw Error(ErrorKind::Range, "input voltage outside [0, v_read]");
      }
    }
    const auto phys = array.route_inputs(v);
    const auto sol = solver.solve(phys);
    const auto cur = column_currents(net, sol);
    for (std::size_t j = 0; j < cur.size(); ++j) res.column_currents[j] += cur[j];
    res.power += estimate_power(net, sol, phys, array);
  }
  const double n = static_cast<double>(inputs.size());
  for (auto& c : res.column_currents) c /= n;
  res.power /= n;
  res.delay = estimate_delay(array);
  res.node_id = array.node().node_id;
  res.rows = array.rows();
  res.cols = array.cols();
  res.wm_cols = array.wm_cols();
  res.permutor = array.has_permutor();
  res.watermark = array.has_watermark();
  return res;
}

}  // namespace xbarsec
