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
#include "xbarsec/device.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xbarsec/errors.hpp"

namespace xbarsec {

namespace {

struct Field {
  const char* name;
  double TechNodeParams::*member;
};

constexpr Field kFields[] = {
    {"v_read", &TechNodeParams::v_read},     {"r_wire", &TechNodeParams::r_wire},
    {"c_wire", &TechNodeParams::c_wire},     {"r_access", &TechNodeParams::r_access},
    {"r_switch", &TechNodeParams::r_switch}, {"r_driver", &TechNodeParams::r_driver},
    {"r_sense", &TechNodeParams::r_sense},   {"p_switch", &TechNodeParams::p_switch},
    {"p_wm_col", &TechNodeParams::p_wm_col},
};

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

TechNodeParams make_node(const char* id, double r_wire, double c_wire, double r_access,
                         double r_switch, double r_driver) {
  TechNodeParams p;
  p.node_id = id;
  p.v_read = 0.2;
  p.r_wire = r_wire;
  p.c_wire = c_wire;
  p.r_access = r_access;
  p.r_switch = r_switch;
  p.r_driver = r_driver;
  p.r_sense = 1.0;
  p.p_switch = 0.2e-6;
  p.p_wm_col = 20e-6;
  return p;
}

}  // namespace

namespace {

double TechNodeParams::*find_field(const std::string& name) {
  for (const auto& f : kFields) {
    if (name == f.name) return f.member;
  }
  throw Error(ErrorKind::Lookup, "unknown node parameter '" + name + "'");
}

}  // namespace

double get_field(const TechNodeParams& params, const std::string& name) {
  return params.*find_field(name);
}

void set_field(TechNodeParams& params, const std::string& name, double value) {
  params.*find_field(name) = value;
}

void MemristorParams::validate() const {
  if (!(g_leak > 0.0 && g_off > g_leak && g_on > g_off)) {
    throw Error(ErrorKind::Range, "memristor params must satisfy g_on > g_off > g_leak > 0");
  }
}

void TechNodeParams::validate() const {
  auto require = [&](bool ok, const char* field, const char* rule) {
    if (!ok) {
      throw Error(ErrorKind::Range,
                  "node '" + node_id + "': " + field + " must be " + rule);
    }
  };
  require(std::isfinite(v_read) && v_read > 0.0, "v_read", "> 0");
  require(std::isfinite(r_wire) && r_wire > 0.0, "r_wire", "> 0");
  require(std::isfinite(c_wire) && c_wire >= 0.0, "c_wire", ">= 0");
  require(std::isfinite(r_access) && r_access > 0.0, "r_access", "> 0");
  require(std::isfinite(r_switch) && r_switch > 0.0, "r_switch", "> 0");
  require(std::isfinite(r_driver) && r_driver > 0.0, "r_driver", "> 0");
  require(std::isfinite(r_sense) && r_sense > 0.0, "r_sense", "> 0");
  require(std::isfinite(p_switch) && p_switch >= 0.0, "p_switch", ">= 0");
  require(std::isfinite(p_wm_col) && p_wm_col >= 0.0, "p_wm_col", ">= 0");
}

const std::vector<TechNodeParams>& default_tech_nodes() {
  static const std::vector<TechNodeParams> nodes = {
      make_node("45nm", 2.5, 0.20e-15, 2.0e3, 1.0e3, 500.0),
      make_node("22nm", 5.0, 0.15e-15, 3.0e3, 1.5e3, 700.0),
      make_node("7nm", 15.0, 0.08e-15, 5.0e3, 2.5e3, 1.0e3),
  };
  return nodes;
}

NodeTable::NodeTable() {
  for (const auto& n : default_tech_nodes()) nodes_.emplace(n.node_id, n);
}

const TechNodeParams& NodeTable::at(const std::string& node_id) const {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end()) {
    throw Error(ErrorKind::Lookup, "unknown node '" + node_id + "'");
  }
  return it->second;
}

bool NodeTable::contains(const std::string& node_id) const {
  return nodes_.count(node_id) != 0;
}

std::vector<std::string> NodeTable::labels() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : nodes_) out.push_back(k);
  return out;
}

void NodeTable::set(const TechNodeParams& params) {
  params.validate();
  nodes_[params.node_id] = params;
}

void NodeTable::load_string(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Format, std::string("node config: ") + e.what());
  }

  auto staged = nodes_;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(ErrorKind::Format, "node config: key '" + section + "' outside a section");
    }
    TechNodeParams p = staged.count(section) ? staged.at(section) : default_tech_nodes().front();
    p.node_id = section;
    for (const auto& [key, value] : body) {
      const Field* field = nullptr;
      for (const auto& f : kFields) {
        if (key == f.name) field = &f;
      }
      if (field == nullptr) {
        throw Error(ErrorKind::Format,
                    "node config: unknown key '" + key + "' in [" + section + "]");
      }
      const auto raw = value.get_value<std::string>();
      std::size_t used = 0;
      double parsed = 0.0;
      try {
        parsed = std::stod(raw, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != raw.size()) {
        throw Error(ErrorKind::Format, "node config: bad number '" + raw + "' for " + section +
                                           "." + key);
      }
      p.*(field->member) = parsed;
    }
    p.validate();
    staged[section] = p;
  }
  nodes_ = std::move(staged);
}

void NodeTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open node config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  load_string(ss.str());
}

std::string NodeTable::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [label, p] : nodes_) {
    if (!first) out << '\n';
    first = false;
    out << '[' << label << "]\n";
    for (const auto& f : kFields) out << f.name << " = " << format_double(p.*(f.member)) << '\n';
  }
  return out.str();
}

void NodeTable::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write node config '" + path + "'");
  out << to_string();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

TechNodeParams tech_node_params(const std::string& node_id) {
  static const NodeTable defaults;
  return defaults.at(node_id);
}

double conductance_from_weight(double w, const MemristorParams& device) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw Error(ErrorKind::Range, "weight " + format_double(w) + " outside [0,1]");
  }
  return device.g_off + w * (device.g_on - device.g_off);
}

double cell_path_resistance(double g, const TechNodeParams& node, bool with_permutor) {
  if (!(g > 0.0)) throw Error(ErrorKind::Range, "conductance must be > 0");
  return 1.0 / g + node.r_access + (with_permutor ? node.r_switch : 0.0);
}

}  // namespace xbarsec
