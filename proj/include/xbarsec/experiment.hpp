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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xbarsec/device.hpp"
#include "xbarsec/errors.hpp"
#include "xbarsec/solver.hpp"

namespace xbarsec {

enum class Config { Baseline, Permutor, Watermark, Both };

const char* to_string(Config c);
Config config_from_string(const std::string& s);
bool uses_permutor(Config c);
bool uses_watermark(Config c);

enum class Dataset { Uniform, Mnist, Lora, Csv };

const char* to_string(Dataset d);
Dataset dataset_from_string(const std::string& s);

/// Where the input batch comes from. Weights are always seeded uniform.
struct DatasetSpec {
  Dataset kind = Dataset::Uniform;
  std::string path;         // IDX images or CSV samples
  std::size_t batch = 8;    // vectors per configuration
  std::size_t offset = 0;   // first MNIST image
  int spreading_factor = 7;
  std::optional<double> snr_db;
};

struct ArraySize {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool operator==(const ArraySize&) const = default;
};

struct ExperimentGrid {
  std::vector<std::string> nodes{"45nm", "22nm", "7nm"};
  std::vector<ArraySize> sizes{{10, 10}, {128, 10}, {256, 128}};
  std::vector<Config> configs{Config::Baseline, Config::Permutor, Config::Watermark, Config::Both};
  std::uint64_t seed = 1;
  DatasetSpec dataset;

  void validate() const;
  std::size_t cell_count() const { return nodes.size() * sizes.size() * configs.size(); }
};

/// Normalised input vectors in [0,1] for an array of the given row count.
std::vector<std::vector<double>> prepare_inputs(const DatasetSpec& dataset, std::size_t rows,
                                                std::uint64_t seed);

/// Seeded uniform weights in [0,1]; identical for every config of a seed.
Matrix experiment_weights(ArraySize size, std::uint64_t seed);

/// The array a configuration is simulated on (key and watermark derived
/// from the seed).
CrossbarArray build_config_array(const TechNodeParams& node, ArraySize size, Config config,
                                 std::uint64_t seed, const MemristorParams& device = {});

/// inputs are normalised vectors, scaled by the node's v_read.
SimResult run_config(const TechNodeParams& node, ArraySize size, Config config,
                     const std::vector<std::vector<double>>& inputs, std::uint64_t seed,
                     const MemristorParams& device = {});

struct CellResult {
  std::string node;
  ArraySize size;
  Config config = Config::Baseline;
  SimResult sim;
  double mean_current = 0.0;  // over data columns
};

/// Cartesian product nodes x sizes x configs in that nesting order. Cells
/// run on up to 'threads' workers (0 = hardware concurrency); the output
/// order does not depend on scheduling.
std::vector<CellResult> sweep(const ExperimentGrid& grid, const NodeTable& nodes,
                              unsigned threads = 0);

struct OverheadRow {
  std::string node;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Config config = Config::Baseline;
  double current_A = 0.0;
  double delay_s = 0.0;
  double power_W = 0.0;
  double current_drop_pct = 0.0;
  double delay_inc_pct = 0.0;
  double power_inc_pct = 0.0;
  bool operator==(const OverheadRow&) const = default;
};

double drop_pct(double base, double value);
double increase_pct(double base, double value);

/// Throws Error(Lookup) naming the (node, size) group that lacks a baseline.
std::vector<OverheadRow> overhead_report(const std::vector<CellResult>& results);

enum class ReportFormat { Csv, Json };

ReportFormat report_format_from_string(const std::string& s);
inline constexpr const char* kReportHeader =
    "node,rows,cols,config,current_A,delay_s,power_W,current_drop_pct,delay_inc_pct,power_inc_pct";

std::string report_to_csv(const std::vector<OverheadRow>& rows);
std::string report_to_json(const std::vector<OverheadRow>& rows);
std::vector<OverheadRow> report_from_csv(const std::string& text);
void emit_report(const std::vector<OverheadRow>& rows, ReportFormat format, const std::string& path);

struct Overheads {
  double current_drop_pct = 0.0;
  double delay_inc_pct = 0.0;
  double power_inc_pct = 0.0;
};

struct CalibrationOptions {
  Overheads targets{8.8, 5.5, 9.8};
  ArraySize size{256, 128};
  Config config = Config::Both;
  std::uint64_t seed = 1;
  DatasetSpec dataset;
  std::size_t max_solves = 200;   // parasitic simulations, baseline and config
  double stop_residual = 1e-4;
  double fail_residual = 0.5;
  double min_step = 1e-3;         // relative step at which descent stops
  // The power target cannot tell p_wm_col from p_switch, so p_wm_col is
  // set rather than fitted whenever the start point misses the targets.
  double p_wm_col = 0.0;
};

struct CalibrationResult {
  TechNodeParams params;
  Overheads achieved;
  double residual = 0.0;
  std::size_t iterations = 0;  // accepted moves
  std::size_t solves = 0;      // parasitic evaluations (baseline + config pairs)
};

/// Thrown when the best point found still misses the targets.
class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, CalibrationResult best)
      : Error(ErrorKind::Calibration, what), best_(std::move(best)) {}
  const CalibrationResult& best() const { return best_; }

 private:
  CalibrationResult best_;
};

/// Names of the parameters calibrate() moves, in descent order.
const std::vector<std::string>& calibration_free_params();

/// Sum of squared relative errors of achieved against targets.
double calibration_residual(const Overheads& achieved, const Overheads& targets);

/// Overheads of options.config against baseline at options.size.
Overheads measure_overheads(const TechNodeParams& node, const CalibrationOptions& options);

/// Coordinate descent with multiplicative steps starting from 'start'.
/// Returns 'start' untouched when it already meets options.stop_residual.
CalibrationResult calibrate(const TechNodeParams& start, const CalibrationOptions& options = {});

/// Carries a fit made on 'reference' to every node of 'defaults': fitted
/// resistances keep each node's ratio to the reference defaults, peripheral
/// powers follow the ratio of drive power v_read^2 / r_driver.
NodeTable transfer_calibration(const TechNodeParams& fitted, const NodeTable& defaults,
                               const std::string& reference = "45nm");

}  // namespace xbarsec
