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

#include <map>
#include <string>
#include <vector>

namespace xbarsec {

/// Memristor conductance window. Invariant: g_on > g_off > g_leak > 0.
struct MemristorParams {
  double g_on = 100e-6;
  double g_off = 1e-6;
  double g_leak = 1e-9;

  void validate() const;
};

/// Electrical parameters of one technology node, SI units throughout.
struct TechNodeParams {
  std::string node_id;
  double v_read = 0.2;     // V
  double r_wire = 0.0;     // ohm per wire segment
  double c_wire = 0.0;     // F per wire segment
  double r_access = 0.0;   // access transistor on-resistance
  double r_switch = 0.0;   // permutor pass transistor on-resistance
  double r_driver = 0.0;   // row driver output resistance
  double r_sense = 0.0;    // column sense resistance
  double p_switch = 0.0;   // W per permutor pass transistor
  double p_wm_col = 0.0;   // W per watermark column

  /// Throws Error(Range) naming the first violated field. Resistances must
  /// be strictly positive; the solver itself also accepts zeros, which is
  /// how ideal-circuit comparisons are set up.
  void validate() const;

  bool operator==(const TechNodeParams&) const = default;
};

/// Field access by config-file key; unknown names throw Error(Lookup).
double get_field(const TechNodeParams& params, const std::string& name);
void set_field(TechNodeParams& params, const std::string& name, double value);

/// Built-in defaults for "45nm", "22nm" and "7nm".
const std::vector<TechNodeParams>& default_tech_nodes();

/// Table of node parameters: built-in defaults plus overrides from config
/// files. Immutable once handed to simulations.
class NodeTable {
 public:
  NodeTable();

  /// Throws Error(Lookup) naming the label when the node is unknown.
  const TechNodeParams& at(const std::string& node_id) const;
  bool contains(const std::string& node_id) const;
  std::vector<std::string> labels() const;

  /// Inserts or replaces a node record after validating it.
  void set(const TechNodeParams& params);

  /// Loads an INI-style file. Each section is a node label; keys are the
  /// field names of TechNodeParams. Sections for unknown labels define new
  /// nodes starting from the 45nm defaults. Validation failures leave the
  /// table unchanged.
  void load_file(const std::string& path);
  void load_string(const std::string& text);

  void save_file(const std::string& path) const;
  std::string to_string() const;

 private:
  std::map<std::string, TechNodeParams> nodes_;
};

/// Lookup in the built-in table.
TechNodeParams tech_node_params(const std::string& node_id);

/// Linear weight-to-conductance map; w outside [0,1] throws Error(Range).
double conductance_from_weight(double w, const MemristorParams& device);

/// Series resistance of one 1T1R read path: memristor, access transistor and
/// (optionally) the permutor pass transistor.
double cell_path_resistance(double g, const TechNodeParams& node, bool with_permutor);

}  // namespace xbarsec
