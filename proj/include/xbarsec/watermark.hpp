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
#include <string>
#include <vector>

#include "xbarsec/crossbar.hpp"
#include "xbarsec/matrix.hpp"

namespace xbarsec {

enum class Placement { End, Begin, Interleaved };

/// How column currents are evaluated for signatures and measurements.
enum class Backend { Ideal, Parasitic };

const char* to_string(Placement p);
Placement placement_from_string(const std::string& s);
const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);

inline constexpr std::size_t kWatermarkColumns = 2;
inline constexpr std::size_t kDefaultProbes = 4;
inline constexpr double kDefaultTolerance = 0.02;
inline constexpr double kDeviationFloor = 1e-12;  // 1 pA
// Rows driven by one probe. With at most 8 rows at >= v_read/2, moving any
// one cell half the conductance window shifts its probe current by > 3%.
inline constexpr std::size_t kProbeBlockRows = 8;

/// Probes make_watermark builds: at least 'requested', enough that no probe
/// drives more than kProbeBlockRows rows, and never more than one per row.
constexpr std::size_t watermark_probe_count(std::size_t rows, std::size_t requested) {
  const std::size_t blocks = (rows + kProbeBlockRows - 1) / kProbeBlockRows;
  const std::size_t k = requested > blocks ? requested : blocks;
  return k < rows ? k : rows;
}

/// Two protection columns with a seeded conductance pattern and the current
/// signature they must produce under a fixed set of probe inputs.
struct WatermarkSpec {
  std::size_t rows = 0;
  std::size_t data_cols = 0;
  std::uint64_t seed = 0;
  Placement placement = Placement::End;
  Backend backend = Backend::Ideal;
  double tolerance = kDefaultTolerance;
  std::vector<std::size_t> column_indices;  // physical, ascending
  Matrix pattern;                           // rows x 2, siemens
  Matrix probe_inputs;                      // k x rows, volts
  Matrix signature;                         // k x 2, amperes

  std::size_t probe_count() const { return probe_inputs.rows; }
  void validate(const MemristorParams& device) const;
};

struct VerificationReport {
  bool pass = false;
  Matrix deviation;  // probes x watermark columns, relative
  double worst_deviation = 0.0;
  std::vector<std::size_t> columns_checked;
  double tolerance = 0.0;
};

/// Deterministic in (rows, data_cols, seed, placement). Rows are dealt out
/// in seeded order to watermark_probe_count(rows, probes) probes; each probe
/// drives its own rows in [v_read/2, v_read] and leaves the rest at 0 V.
/// The signature is the ideal MVM of the probes over the pattern.
WatermarkSpec make_watermark(std::size_t rows, std::size_t data_cols, std::uint64_t seed,
                             Placement placement, const TechNodeParams& node,
                             const MemristorParams& device = {},
                             std::size_t probes = kDefaultProbes,
                             double tolerance = kDefaultTolerance);

/// Installs the pattern at spec.column_indices; data columns keep their
/// relative order in the remaining positions.
CrossbarArray embed_watermark(const CrossbarArray& array, const WatermarkSpec& spec);

/// Column currents for every probe, probes x total columns.
Matrix measure_probes(const CrossbarArray& array, const WatermarkSpec& spec, Backend backend);

/// Re-derives the signature by measuring a freshly embedded array with the
/// given backend.
WatermarkSpec sign_with_backend(const WatermarkSpec& spec, const CrossbarArray& embedded,
                                Backend backend);

VerificationReport verify_watermark(const Matrix& measured, const WatermarkSpec& spec);

/// Two-sample Kolmogorov-Smirnov statistic between the currents of the
/// watermark columns and of the data columns over seeded random probes.
/// Each probe drives one distinct row, so at most 'rows' probes are used.
double camouflage_stats(const CrossbarArray& array, const WatermarkSpec& spec,
                        std::size_t probe_count, std::uint64_t seed);

/// Probes camouflage_stats actually applies.
constexpr std::size_t camouflage_probe_count(std::size_t rows, std::size_t requested) {
  return requested < rows ? requested : rows;
}

/// D = sup |F1 - F2|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample critical value c(alpha) * sqrt((n+m)/(n*m)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha = 0.05);

/// Key=value text. The signature is stored too, so parasitic-backend specs
/// load without the array.
std::string watermark_to_string(const WatermarkSpec& spec);
WatermarkSpec watermark_from_string(const std::string& text, const TechNodeParams& node,
                                    const MemristorParams& device = {});
void save_watermark(const WatermarkSpec& spec, const std::string& path);
WatermarkSpec load_watermark(const std::string& path, const TechNodeParams& node,
                             const MemristorParams& device = {});

}  // namespace xbarsec
