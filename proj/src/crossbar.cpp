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
#include "xbarsec/crossbar.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xbarsec/errors.hpp"

namespace xbarsec {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(ErrorKind::Format, "bad number '" + s + "'");
  return x;
}

std::size_t parse_size(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::Format, "bad count '" + s + "'");
  }
  return std::stoull(s);
}

}  // namespace

CrossbarArray CrossbarArray::program_weights(std::size_t rows, std::size_t cols,
                                             const Matrix& weights, const TechNodeParams& node,
                                             const MemristorParams& device) {
  device.validate();
  if (weights.rows != rows || weights.cols != cols) {
    throw Error(ErrorKind::Shape, "weights are " + std::to_string(weights.rows) + "x" +
                                      std::to_string(weights.cols) + ", array is " +
                                      std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (rows == 0 || cols == 0) throw Error(ErrorKind::Shape, "array must be non-empty");

  std::string bad;
  std::size_t bad_count = 0;
  CrossbarArray a;
  a.grid_ = Matrix(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double w = weights(i, j);
      if (!(w >= 0.0 && w <= 1.0)) {
        if (bad_count++ < 8) bad += " (" + std::to_string(i) + "," + std::to_string(j) + ")";
        continue;
      }
      a.grid_(i, j) = conductance_from_weight(w, device);
    }
  }
  if (bad_count > 0) {
    throw Error(ErrorKind::Range, std::to_string(bad_count) + " weight(s) outside [0,1] at" + bad +
                                      (bad_count > 8 ? " ..." : ""));
  }
  a.node_ = node;
  a.device_ = device;
  return a;
}

CrossbarArray CrossbarArray::from_conductances(const Matrix& grid,
                                               std::vector<std::size_t> watermark_columns,
                                               const TechNodeParams& node,
                                               const MemristorParams& device) {
  device.validate();
  if (grid.rows == 0 || grid.cols == 0) throw Error(ErrorKind::Shape, "array must be non-empty");
  if (grid.data.size() != grid.rows * grid.cols) throw Error(ErrorKind::Shape, "ragged grid");
  std::sort(watermark_columns.begin(), watermark_columns.end());
  if (std::adjacent_find(watermark_columns.begin(), watermark_columns.end()) !=
      watermark_columns.end()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate watermark column");
  }
  for (auto c : watermark_columns) {
    if (c >= grid.cols) throw Error(ErrorKind::Range, "watermark column out of range");
  }
  if (watermark_columns.size() >= grid.cols) {
    throw Error(ErrorKind::Shape, "array has no data columns");
  }
  for (std::size_t k = 0; k < grid.data.size(); ++k) {
    const double g = grid.data[k];
    if (!(g >= device.g_off && g <= device.g_on)) {
      throw Error(ErrorKind::Range, "conductance " + fmt(g) + " at (" +
                                        std::to_string(k / grid.cols) + "," +
                                        std::to_string(k % grid.cols) +
                                        ") outside [g_off, g_on]");
    }
  }
  CrossbarArray a;
  a.grid_ = grid;
  a.wm_columns_ = std::move(watermark_columns);
  a.node_ = node;
  a.device_ = device;
  return a;
}

std::vector<std::size_t> CrossbarArray::data_columns() const {
  std::vector<std::size_t> out;
  out.reserve(cols());
  for (std::size_t j = 0; j < grid_.cols; ++j) {
    if (!std::binary_search(wm_columns_.begin(), wm_columns_.end(), j)) out.push_back(j);
  }
  return out;
}

Matrix CrossbarArray::logical_conductances() const {
  if (!key_) return grid_;
  return permute_rows(grid_, key_to_permutation(*key_).inverse());
}

CrossbarArray CrossbarArray::with_key(const PermKey& key) const {
  if (key_) throw Error(ErrorKind::State, "array already has a permutor key");
  if (key.rows != rows()) {
    throw Error(ErrorKind::Shape, "key is for " + std::to_string(key.rows) + " rows, array has " +
                                      std::to_string(rows()));
  }
  CrossbarArray a = *this;
  a.grid_ = store_permuted(grid_, key);
  a.key_ = key;
  return a;
}

CrossbarArray CrossbarArray::with_watermark_grid(const Matrix& grid,
                                                 std::vector<std::size_t> columns,
                                                 std::shared_ptr<const WatermarkSpec> spec) const {
  CrossbarArray a = from_conductances(grid, std::move(columns), node_, device_);
  a.key_ = key_;
  a.watermark_ = std::move(spec);
  return a;
}

CrossbarArray CrossbarArray::with_cell(std::size_t row, std::size_t col, double g) const {
  if (row >= grid_.rows || col >= grid_.cols) throw Error(ErrorKind::Range, "cell out of range");
  if (!(g >= device_.g_off && g <= device_.g_on)) {
    throw Error(ErrorKind::Range, "conductance " + fmt(g) + " outside [g_off, g_on]");
  }
  CrossbarArray a = *this;
  a.grid_(row, col) = g;
  return a;
}

CrossbarArray CrossbarArray::with_node(const TechNodeParams& node) const {
  CrossbarArray a = *this;
  a.node_ = node;
  return a;
}

void CrossbarArray::check_inputs(std::span<const double> v, InputCheck check) const {
  if (v.size() != rows()) {
    throw Error(ErrorKind::Shape, "input has " + std::to_string(v.size()) + " entries, array has " +
                                      std::to_string(rows()) + " rows");
  }
  if (check == InputCheck::Unchecked) return;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0 && v[i] <= node_.v_read)) {
      throw Error(ErrorKind::Range, "input " + std::to_string(i) + " = " + fmt(v[i]) +
                                        " V outside [0, v_read]");
    }
  }
}

std::vector<double> CrossbarArray::route_inputs(std::span<const double> v) const {
  if (!key_) return {v.begin(), v.end()};
  return apply_permutor(v, *key_);
}

std::vector<double> CrossbarArray::ideal_mvm(std::span<const double> v, InputCheck check) const {
  check_inputs(v, check);
  const auto phys = route_inputs(v);
  std::vector<double> out(grid_.cols, 0.0);
  for (std::size_t i = 0; i < grid_.rows; ++i) {
    const double vi = phys[i];
    auto g = grid_.row(i);
    for (std::size_t j = 0; j < grid_.cols; ++j) out[j] += g[j] * vi;
  }
  return out;
}

std::string CrossbarArray::to_csv() const {
  std::ostringstream out;
  out << "rows,cols,wm_cols,node,wm_columns\n";
  out << rows() << ',' << cols() << ',' << wm_cols() << ',' << node_.node_id << ',';
  for (std::size_t k = 0; k < wm_columns_.size(); ++k) {
    if (k) out << ';';
    out << wm_columns_[k];
  }
  out << '\n';
  for (std::size_t i = 0; i < grid_.rows; ++i) {
    for (std::size_t j = 0; j < grid_.cols; ++j) {
      if (j) out << ',';
      out << fmt(grid_(i, j));
    }
    out << '\n';
  }
  return out.str();
}

void CrossbarArray::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << to_csv();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

std::string csv_node_label(const std::string& text) {
  std::istringstream in(text);
  std::string header, values;
  std::getline(in, header);
  std::getline(in, values);
  const auto fields = split(values, ',');
  if (fields.size() < 4) throw Error(ErrorKind::Format, "array CSV header is incomplete");
  return fields[3];
}

CrossbarArray CrossbarArray::from_csv(const std::string& text, const TechNodeParams& node,
                                      const MemristorParams& device) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("rows,cols,wm_cols,node", 0) != 0) {
    throw Error(ErrorKind::Format, "array CSV must start with 'rows,cols,wm_cols,node'");
  }
  if (!std::getline(in, line)) throw Error(ErrorKind::Format, "array CSV header values missing");
  const auto head = split(line, ',');
  if (head.size() < 4) throw Error(ErrorKind::Format, "array CSV header values incomplete");
  const std::size_t m = parse_size(head[0]);
  const std::size_t n = parse_size(head[1]);
  const std::size_t wm = parse_size(head[2]);
  std::vector<std::size_t> wm_columns;
  if (head.size() >= 5 && !head[4].empty()) {
    for (const auto& s : split(head[4], ';')) wm_columns.push_back(parse_size(s));
  }
  if (wm_columns.size() != wm) {
    throw Error(ErrorKind::Format, "array CSV lists " + std::to_string(wm_columns.size()) +
                                       " watermark columns, header says " + std::to_string(wm));
  }
  Matrix grid(m, n + wm);
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorKind::Format, "array CSV is truncated");
    const auto cells = split(line, ',');
    if (cells.size() != n + wm) {
      throw Error(ErrorKind::Format, "array CSV row " + std::to_string(i) + " has " +
                                         std::to_string(cells.size()) + " values");
    }
    for (std::size_t j = 0; j < cells.size(); ++j) grid(i, j) = parse_double(cells[j]);
  }
  TechNodeParams p = node;
  p.node_id = head[3];
  return from_conductances(grid, std::move(wm_columns), p, device);
}

CrossbarArray CrossbarArray::load_csv(const std::string& path, const NodeTable& nodes,
                                      const MemristorParams& device) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto text = ss.str();
  return from_csv(text, nodes.at(csv_node_label(text)), device);
}

}  // namespace xbarsec
