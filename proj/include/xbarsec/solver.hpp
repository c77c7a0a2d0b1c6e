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
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xbarsec/crossbar.hpp"

namespace xbarsec {

/// Two-terminal resistor between network terminals.
struct Branch {
  std::size_t a;
  std::size_t b;
  double resistance;  // ohms, >= 0 (zero means a short)
};

/// Wordline/bitline resistive network of a crossbar.
///
/// Terminal numbering: w(i,j) = i*Nt + j, b(i,j) = M*Nt + i*Nt + j for the
/// 2*M*Nt internal nodes, then ground, then one ideal source per physical row.
struct ResistiveNetwork {
  std::size_t rows = 0;
  std::size_t total_cols = 0;
  double driver_resistance = 0.0;  // r_driver (+ r_switch with a permutor)
  double sense_resistance = 0.0;
  std::vector<double> cell_conductance;  // M*Nt, row-major, includes r_access
  std::vector<Branch> branches;

  std::size_t internal_nodes() const { return 2 * rows * total_cols; }
  std::size_t w(std::size_t i, std::size_t j) const { return i * total_cols + j; }
  std::size_t b(std::size_t i, std::size_t j) const { return (rows + i) * total_cols + j; }
  std::size_t ground() const { return internal_nodes(); }
  std::size_t source(std::size_t i) const { return internal_nodes() + 1 + i; }
  std::size_t terminal_count() const { return internal_nodes() + 1 + rows; }
};

struct NodeSolution {
  std::vector<double> voltages;  // internal nodes
  double residual = 0.0;         // ||rhs - G x|| / ||rhs||
  int iterations = 0;            // 1 + refinement steps
};

/// Column currents, delay and power of one simulated configuration.
struct SimResult {
  std::vector<double> column_currents;  // A, all physical columns
  double delay = 0.0;                   // s
  double power = 0.0;                   // W
  std::string node_id;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t wm_cols = 0;
  bool permutor = false;
  bool watermark = false;

  /// Mean current over the data columns only.
  double mean_data_current(const std::vector<std::size_t>& data_columns) const;
  bool operator==(const SimResult&) const = default;
};

ResistiveNetwork build_network(const CrossbarArray& array);

/// Factorizes the network once; each solve() is then a pair of triangular
/// solves plus refinement. Zero-resistance branches are contracted.
class NetworkSolver {
 public:
  explicit NetworkSolver(const ResistiveNetwork& net);
  ~NetworkSolver();
  NetworkSolver(NetworkSolver&&) noexcept;
  NetworkSolver& operator=(NetworkSolver&&) noexcept;

  /// row_voltages are the physical source voltages (already routed).
  NodeSolution solve(std::span<const double> row_voltages) const;

  std::size_t unknowns() const;

  /// Reduced system in Matrix Market coordinate format (lower triangle).
  void write_matrix_market(const std::string& path) const;
  /// Right-hand side for the given inputs, Matrix Market array format.
  void write_rhs_matrix_market(std::span<const double> row_voltages,
                               const std::string& path) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

NodeSolution solve_network(const ResistiveNetwork& net, std::span<const double> row_voltages);

/// Current through each sense branch, A.
std::vector<double> column_currents(const ResistiveNetwork& net, const NodeSolution& sol);

/// Current delivered by each row source, A.
std::vector<double> source_currents(const ResistiveNetwork& net, const NodeSolution& sol,
                                    std::span<const double> row_voltages);

/// Elmore estimate of the input driver to far-corner path.
double estimate_delay(const CrossbarArray& array);

/// DC array power plus peripheral overhead of the attached security.
double estimate_power(const ResistiveNetwork& net, const NodeSolution& sol,
                      std::span<const double> row_voltages, const CrossbarArray& array);

/// Solves every input of the batch (logical order, volts) and averages
/// currents and power over the batch.
SimResult simulate(const CrossbarArray& array, const std::vector<std::vector<double>>& inputs);

}  // namespace xbarsec
