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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xbarsec/device.hpp"
#include "xbarsec/matrix.hpp"
#include "xbarsec/permutor.hpp"

namespace xbarsec {

struct WatermarkSpec;

enum class InputCheck { Strict, Unchecked };

/// Grid of 1T1R cell conductances in physical storage order, with the
/// security configuration attached to it. Values are immutable; the
/// with_* members return modified copies.
class CrossbarArray {
 public:
  /// Programs an unsecured M x N array from weights in [0,1].
  static CrossbarArray program_weights(std::size_t rows, std::size_t cols, const Matrix& weights,
                                       const TechNodeParams& node,
                                       const MemristorParams& device = {});

  /// Wraps a raw physical grid. Watermark columns are given by physical
  /// index; no key is attached.
  static CrossbarArray from_conductances(const Matrix& grid,
                                         std::vector<std::size_t> watermark_columns,
                                         const TechNodeParams& node,
                                         const MemristorParams& device = {});

  std::size_t rows() const { return grid_.rows; }
  std::size_t cols() const { return grid_.cols - wm_columns_.size(); }
  std::size_t wm_cols() const { return wm_columns_.size(); }
  std::size_t total_cols() const { return grid_.cols; }

  const TechNodeParams& node() const { return node_; }
  const MemristorParams& device() const { return device_; }
  const std::optional<PermKey>& key() const { return key_; }
  bool has_permutor() const { return key_.has_value(); }
  bool has_watermark() const { return !wm_columns_.empty(); }
  const std::vector<std::size_t>& watermark_columns() const { return wm_columns_; }
  const std::shared_ptr<const WatermarkSpec>& watermark() const { return watermark_; }

  /// Physical indices of the data columns, in logical order.
  std::vector<std::size_t> data_columns() const;

  /// Stored state exactly as an observer of the cells would see it.
  const Matrix& read_raw_conductances() const { return grid_; }

  /// Grid in logical row order (inverse permutation applied).
  Matrix logical_conductances() const;

  /// Reorders storage by the key and routes every later input through it.
  /// Throws Error(State) if a key is already attached.
  CrossbarArray with_key(const PermKey& key) const;

  /// Used by embed_watermark; see watermark.hpp.
  CrossbarArray with_watermark_grid(const Matrix& grid, std::vector<std::size_t> columns,
                                    std::shared_ptr<const WatermarkSpec> spec) const;

  /// Copy with one physical cell reprogrammed (fault/tamper modelling).
  CrossbarArray with_cell(std::size_t row, std::size_t col, double g) const;

  /// Copy with different node parameters.
  CrossbarArray with_node(const TechNodeParams& node) const;

  /// Input routed to physical rows (identity without a key).
  std::vector<double> route_inputs(std::span<const double> v) const;

  /// Parasitic-free I_j = sum_i G_ij v_i over all physical columns.
  std::vector<double> ideal_mvm(std::span<const double> v,
                                InputCheck check = InputCheck::Strict) const;

  /// Portable text form: "rows,cols,wm_cols,node,wm_columns" header line,
  /// one values line, then one CSV line of conductances per row.
  std::string to_csv() const;
  void save_csv(const std::string& path) const;
  static CrossbarArray from_csv(const std::string& text, const TechNodeParams& node,
                                const MemristorParams& device = {});
  static CrossbarArray load_csv(const std::string& path, const NodeTable& nodes,
                                const MemristorParams& device = {});

 private:
  CrossbarArray() = default;
  void check_inputs(std::span<const double> v, InputCheck check) const;

  Matrix grid_;
  std::vector<std::size_t> wm_columns_;
  std::optional<PermKey> key_;
  std::shared_ptr<const WatermarkSpec> watermark_;
  TechNodeParams node_;
  MemristorParams device_;
};

/// Node label recorded in an array CSV header.
std::string csv_node_label(const std::string& text);

}  // namespace xbarsec
