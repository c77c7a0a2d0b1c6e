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
#include "xbarsec/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "xbarsec/errors.hpp"
#include "xbarsec/random.hpp"
#include "xbarsec/solver.hpp"

namespace xbarsec {

namespace {

enum SeedTag : std::uint64_t { kPatternTag = 1, kProbeTag = 2, kPlacementTag = 3 };

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::size_t> place_columns(std::size_t data_cols, std::uint64_t seed,
                                       Placement placement) {
  const std::size_t total = data_cols + kWatermarkColumns;
  switch (placement) {
    case Placement::End: return {data_cols, data_cols + 1};
    case Placement::Begin: return {0, 1};
    case Placement::Interleaved: {
      Rng rng(derive_seed(seed, kPlacementTag));
      const std::size_t first = rng.below(total);
      std::size_t second = rng.below(total - 1);
      if (second >= first) ++second;
      return {std::min(first, second), std::max(first, second)};
    }
  }
  throw Error(ErrorKind::InvalidArgument, "bad placement");
}

Matrix ideal_signature(const Matrix& probes, const Matrix& pattern) {
  Matrix sig(probes.rows, pattern.cols);
  for (std::size_t p = 0; p < probes.rows; ++p) {
    for (std::size_t i = 0; i < pattern.rows; ++i) {
      for (std::size_t c = 0; c < pattern.cols; ++c) sig(p, c) += pattern(i, c) * probes(p, i);
    }
  }
  return sig;
}

}  // namespace

const char* to_string(Placement p) {
  switch (p) {
    case Placement::End: return "end";
    case Placement::Begin: return "begin";
    case Placement::Interleaved: return "interleaved";
  }
  return "?";
}

Placement placement_from_string(const std::string& s) {
  if (s == "end") return Placement::End;
  if (s == "begin") return Placement::Begin;
  if (s == "interleaved") return Placement::Interleaved;
  throw Error(ErrorKind::InvalidArgument, "unknown placement '" + s + "'");
}

const char* to_string(Backend b) { return b == Backend::Ideal ? "ideal" : "parasitic"; }

Backend backend_from_string(const std::string& s) {
  if (s == "ideal") return Backend::Ideal;
  if (s == "parasitic") return Backend::Parasitic;
  throw Error(ErrorKind::InvalidArgument, "unknown backend '" + s + "'");
}

void WatermarkSpec::validate(const MemristorParams& device) const {
  const std::size_t total = data_cols + kWatermarkColumns;
  if (column_indices.size() != kWatermarkColumns) {
    throw Error(ErrorKind::Shape, "watermark needs exactly two columns");
  }
  if (column_indices[0] >= column_indices[1] || column_indices[1] >= total) {
    throw Error(ErrorKind::Range, "watermark column indices must be distinct, ascending and < " +
                                      std::to_string(total));
  }
  if (pattern.rows != rows || pattern.cols != kWatermarkColumns) {
    throw Error(ErrorKind::Shape, "watermark pattern must be rows x 2");
  }
  for (double g : pattern.data) {
    if (!(g >= device.g_off && g <= device.g_on)) {
      throw Error(ErrorKind::Range, "watermark pattern conductance outside [g_off, g_on]");
    }
  }
  if (probe_inputs.cols != rows || probe_inputs.rows == 0) {
    throw Error(ErrorKind::Shape, "probe inputs must be k x rows with k >= 1");
  }
  if (signature.rows != probe_inputs.rows || signature.cols != kWatermarkColumns) {
    throw Error(ErrorKind::Shape, "signature must be k x 2");
  }
  if (!(tolerance > 0.0)) throw Error(ErrorKind::Range, "tolerance must be > 0");
}

WatermarkSpec make_watermark(std::size_t rows, std::size_t data_cols, std::uint64_t seed,
                             Placement placement, const TechNodeParams& node,
                             const MemristorParams& device, std::size_t probes,
                             double tolerance) {
  if (rows == 0) throw Error(ErrorKind::InvalidArgument, "watermark needs at least one row");
  if (probes == 0) throw Error(ErrorKind::InvalidArgument, "watermark needs at least one probe");
  WatermarkSpec spec;
  spec.rows = rows;
  spec.data_cols = data_cols;
  spec.seed = seed;
  spec.placement = placement;
  spec.tolerance = tolerance;
  spec.column_indices = place_columns(data_cols, seed, placement);

  Rng pattern_rng(derive_seed(seed, kPatternTag));
  spec.pattern = Matrix(rows, kWatermarkColumns);
  for (auto& g : spec.pattern.data) g = pattern_rng.uniform(device.g_off, device.g_on);

  Rng probe_rng(derive_seed(seed, kProbeTag));
  const std::size_t k = watermark_probe_count(rows, probes);
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[probe_rng.below(i)]);
  spec.probe_inputs = Matrix(k, rows);
  for (std::size_t n = 0; n < rows; ++n) {
    spec.probe_inputs(n % k, order[n]) = probe_rng.uniform(0.5 * node.v_read, node.v_read);
  }

  spec.signature = ideal_signature(spec.probe_inputs, spec.pattern);
  spec.validate(device);
  return spec;
}

CrossbarArray embed_watermark(const CrossbarArray& array, const WatermarkSpec& spec) {
  if (array.has_watermark()) throw Error(ErrorKind::State, "array already carries a watermark");
  if (spec.rows != array.rows()) {
    throw Error(ErrorKind::Shape, "watermark is for " + std::to_string(spec.rows) +
                                      " rows, array has " + std::to_string(array.rows()));
  }
  if (spec.data_cols != array.cols()) {
    throw Error(ErrorKind::Shape, "watermark is for " + std::to_string(spec.data_cols) +
                                      " data columns, array has " + std::to_string(array.cols()));
  }
  spec.validate(array.device());

  // The pattern is defined in logical row order; storage follows the key.
  Matrix pattern = spec.pattern;
  if (array.key()) pattern = permute_rows(pattern, key_to_permutation(*array.key()));

  const auto& src = array.read_raw_conductances();
  const std::size_t total = array.cols() + kWatermarkColumns;
  Matrix grid(array.rows(), total);
  for (std::size_t i = 0; i < array.rows(); ++i) {
    std::size_t data_j = 0;
    for (std::size_t j = 0; j < total; ++j) {
      if (j == spec.column_indices[0]) grid(i, j) = pattern(i, 0);
      else if (j == spec.column_indices[1]) grid(i, j) = pattern(i, 1);
      else grid(i, j) = src(i, data_j++);
    }
  }
  return array.with_watermark_grid(grid, spec.column_indices,
                                   std::make_shared<const WatermarkSpec>(spec));
}

Matrix measure_probes(const CrossbarArray& array, const WatermarkSpec& spec, Backend backend) {
  if (spec.rows != array.rows()) throw Error(ErrorKind::Shape, "probe length != array rows");
  Matrix out(spec.probe_count(), array.total_cols());
  if (backend == Backend::Ideal) {
    for (std::size_t p = 0; p < spec.probe_count(); ++p) {
      const auto cur = array.ideal_mvm(spec.probe_inputs.row(p));
      std::copy(cur.begin(), cur.end(), out.row(p).begin());
    }
    return out;
  }
  const auto net = build_network(array);
  const NetworkSolver solver(net);
  for (std::size_t p = 0; p < spec.probe_count(); ++p) {
    const auto phys = array.route_inputs(spec.probe_inputs.row(p));
    const auto cur = column_currents(net, solver.solve(phys));
    std::copy(cur.begin(), cur.end(), out.row(p).begin());
  }
  return out;
}

WatermarkSpec sign_with_backend(const WatermarkSpec& spec, const CrossbarArray& embedded,
                                Backend backend) {
  if (embedded.watermark_columns() != spec.column_indices) {
    throw Error(ErrorKind::State, "array does not carry this watermark");
  }
  const auto measured = measure_probes(embedded, spec, backend);
  WatermarkSpec out = spec;
  out.backend = backend;
  for (std::size_t p = 0; p < spec.probe_count(); ++p) {
    for (std::size_t c = 0; c < kWatermarkColumns; ++c) {
      out.signature(p, c) = measured(p, spec.column_indices[c]);
    }
  }
  return out;
}

VerificationReport verify_watermark(const Matrix& measured, const WatermarkSpec& spec) {
  const std::size_t total = spec.data_cols + kWatermarkColumns;
  if (measured.rows != spec.probe_count() || measured.cols != total) {
    throw Error(ErrorKind::Shape, "measured currents must be " +
                                      std::to_string(spec.probe_count()) + " x " +
                                      std::to_string(total));
  }
  VerificationReport rep;
  rep.tolerance = spec.tolerance;
  rep.columns_checked = spec.column_indices;
  rep.deviation = Matrix(spec.probe_count(), kWatermarkColumns);
  for (std::size_t p = 0; p < spec.probe_count(); ++p) {
    for (std::size_t c = 0; c < kWatermarkColumns; ++c) {
      const double expect = spec.signature(p, c);
      const double got = measured(p, spec.column_indices[c]);
      const double dev = std::abs(got - expect) / std::max(std::abs(expect), kDeviationFloor);
      rep.deviation(p, c) = dev;
      rep.worst_deviation = std::max(rep.worst_deviation, dev);
    }
  }
  rep.pass = rep.worst_deviation <= spec.tolerance;
  return rep;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidArgument, "KS needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double camouflage_stats(const CrossbarArray& array, const WatermarkSpec& spec,
                        std::size_t probe_count, std::uint64_t seed) {
  if (!array.has_watermark() || array.watermark_columns() != spec.column_indices) {
    throw Error(ErrorKind::State, "array does not carry this watermark");
  }
  if (probe_count == 0) throw Error(ErrorKind::InvalidArgument, "need at least one probe");
  const auto data_cols = array.data_columns();
  // Each probe drives a single row, so every sample reads a distinct cell
  // and the two samples are independent draws. Dense probes would tie all
  // samples of one column together through its fixed conductances.
  Rng rng(seed);
  std::vector<std::size_t> order(array.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<double> wm, data;
  std::vector<double> v(array.rows());
  for (std::size_t p = 0; p < camouflage_probe_count(array.rows(), probe_count); ++p) {
    std::fill(v.begin(), v.end(), 0.0);
    v[order[p]] = array.node().v_read;
    const auto cur = array.ideal_mvm(v);
    for (auto c : spec.column_indices) wm.push_back(cur[c]);
    for (auto c : data_cols) data.push_back(cur[c]);
  }
  return ks_statistic(std::move(wm), std::move(data));
}

std::string watermark_to_string(const WatermarkSpec& spec) {
  std::ostringstream out;
  out << "format = xbarsec-watermark-1\n";
  out << "rows = " << spec.rows << '\n';
  out << "data_cols = " << spec.data_cols << '\n';
  out << "seed = " << spec.seed << '\n';
  out << "placement = " << to_string(spec.placement) << '\n';
  out << "backend = " << to_string(spec.backend) << '\n';
  out << "tolerance = " << fmt(spec.tolerance) << '\n';
  out << "probes = " << spec.probe_count() << '\n';
  out << "columns = " << spec.column_indices[0] << ',' << spec.column_indices[1] << '\n';
  for (std::size_t p = 0; p < spec.probe_count(); ++p) {
    out << "signature." << p << " = " << fmt(spec.signature(p, 0)) << ','
        << fmt(spec.signature(p, 1)) << '\n';
  }
  return out.str();
}

WatermarkSpec watermark_from_string(const std::string& text, const TechNodeParams& node,
                                    const MemristorParams& device) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Format, "watermark line without '='");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw Error(ErrorKind::Format, "watermark file lacks '" + k + "'");
    return it->second;
  };
  auto to_size = [](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(ErrorKind::Format, "bad integer '" + s + "'");
    }
    return static_cast<std::size_t>(std::stoull(s));
  };
  auto to_double = [](const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Error(ErrorKind::Format, "bad number '" + s + "'");
    return x;
  };
  if (get("format") != "xbarsec-watermark-1") {
    throw Error(ErrorKind::Format, "unsupported watermark format '" + get("format") + "'");
  }

  const std::size_t rows = to_size(get("rows"));
  const std::size_t data_cols = to_size(get("data_cols"));
  const auto seed = static_cast<std::uint64_t>(std::stoull(get("seed")));
  const auto placement = placement_from_string(get("placement"));
  const double tolerance = to_double(get("tolerance"));
  const std::size_t probes = to_size(get("probes"));
  WatermarkSpec spec =
      make_watermark(rows, data_cols, seed, placement, node, device, probes, tolerance);
  spec.backend = backend_from_string(get("backend"));

  const auto& cols = get("columns");
  const auto comma = cols.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::Format, "columns must be 'a,b'");
  const std::vector<std::size_t> listed = {to_size(cols.substr(0, comma)),
                                           to_size(cols.substr(comma + 1))};
  if (listed != spec.column_indices) {
    throw Error(ErrorKind::Format, "stored columns disagree with the seeded placement");
  }
  for (std::size_t p = 0; p < probes; ++p) {
    auto it = kv.find("signature." + std::to_string(p));
    if (it == kv.end()) {
      if (spec.backend != Backend::Ideal) {
        throw Error(ErrorKind::Format, "parasitic signature line " + std::to_string(p) + " missing");
      }
      continue;
    }
    const auto c = it->second.find(',');
    if (c == std::string::npos) throw Error(ErrorKind::Format, "signature needs two values");
    spec.signature(p, 0) = to_double(it->second.substr(0, c));
    spec.signature(p, 1) = to_double(it->second.substr(c + 1));
  }
  return spec;
}

void save_watermark(const WatermarkSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << watermark_to_string(spec);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

WatermarkSpec load_watermark(const std::string& path, const TechNodeParams& node,
                             const MemristorParams& device) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return watermark_from_string(ss.str(), node, device);
}

}  // namespace xbarsec
