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
#include "xbarsec/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <span>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "xbarsec/data_ingest.hpp"
#include "xbarsec/permutor.hpp"
#include "xbarsec/random.hpp"
#include "xbarsec/watermark.hpp"

namespace xbarsec {

namespace {

constexpr std::uint64_t kWeightTag = 10;
constexpr std::uint64_t kKeyTag = 11;
constexpr std::uint64_t kWatermarkTag = 12;
constexpr std::uint64_t kInputTag = 13;

std::string size_label(ArraySize s) {
  return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

const char* to_string(Config c) {
  switch (c) {
    case Config::Baseline: return "baseline";
    case Config::Permutor: return "permutor";
    case Config::Watermark: return "watermark";
    case Config::Both: return "both";
  }
  return "?";
}

Config config_from_string(const std::string& s) {
  for (auto c : {Config::Baseline, Config::Permutor, Config::Watermark, Config::Both}) {
    if (s == to_string(c)) return c;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown config '" + s + "'");
}

bool uses_permutor(Config c) { return c == Config::Permutor || c == Config::Both; }
bool uses_watermark(Config c) { return c == Config::Watermark || c == Config::Both; }

const char* to_string(Dataset d) {
  switch (d) {
    case Dataset::Uniform: return "uniform";
    case Dataset::Mnist: return "mnist";
    case Dataset::Lora: return "lora";
    case Dataset::Csv: return "csv";
  }
  return "?";
}

Dataset dataset_from_string(const std::string& s) {
  for (auto d : {Dataset::Uniform, Dataset::Mnist, Dataset::Lora, Dataset::Csv}) {
    if (s == to_string(d)) return d;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown dataset '" + s + "'");
}

void ExperimentGrid::validate() const {
  if (nodes.empty() || sizes.empty() || configs.empty()) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least one node, size and config");
  }
  for (auto s : sizes) {
    if (s.rows == 0 || s.cols == 0) {
      throw Error(ErrorKind::InvalidArgument, "array size " + size_label(s) + " is empty");
    }
  }
  if (dataset.batch == 0) throw Error(ErrorKind::InvalidArgument, "batch must be >= 1");
}

std::vector<std::vector<double>> prepare_inputs(const DatasetSpec& dataset, std::size_t rows,
                                                std::uint64_t seed) {
  const std::uint64_t s = derive_seed(seed, kInputTag);
  switch (dataset.kind) {
    case Dataset::Uniform:
      return uniform_batch(rows, dataset.batch, s).vectors;
    case Dataset::Lora:
      return lora_batch(rows, dataset.batch, s, dataset.spreading_factor, 4, dataset.snr_db).vectors;
    case Dataset::Mnist:
      return mnist_batch(load_idx_file(dataset.path), nullptr, rows, dataset.batch, dataset.offset)
          .vectors;
    case Dataset::Csv: {
      auto v = csv_batch_file(dataset.path, rows).vectors;
      if (v.size() > dataset.batch) v.resize(dataset.batch);
      return v;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown dataset");
}

Matrix experiment_weights(ArraySize size, std::uint64_t seed) {
  Matrix w(size.rows, size.cols);
  Rng rng(derive_seed(seed, kWeightTag));
  for (auto& x : w.data) x = rng.uniform();
  return w;
}

CrossbarArray build_config_array(const TechNodeParams& node, ArraySize size, Config config,
                                 std::uint64_t seed, const MemristorParams& device) {
  auto array = CrossbarArray::program_weights(size.rows, size.cols,
                                              experiment_weights(size, seed), node, device);
  if (uses_permutor(config)) array = array.with_key(generate_key(size.rows, derive_seed(seed, kKeyTag)));
  if (uses_watermark(config)) {
    array = embed_watermark(array, make_watermark(size.rows, size.cols, derive_seed(seed, kWatermarkTag),
                                                  Placement::End, node, device));
  }
  return array;
}

SimResult run_config(const TechNodeParams& node, ArraySize size, Config config,
                     const std::vector<std::vector<double>>& inputs, std::uint64_t seed,
                     const MemristorParams& device) {
  const auto array = build_config_array(node, size, config, seed, device);
  std::vector<std::vector<double>> volts;
  volts.reserve(inputs.size());
  for (const auto& x : inputs) volts.push_back(normalize_to_voltage(x, node.v_read));
  return simulate(array, volts);
}

std::vector<CellResult> sweep(const ExperimentGrid& grid, const NodeTable& nodes,
                              unsigned threads) {
  grid.validate();
  struct Cell {
    const TechNodeParams* node;
    ArraySize size;
    Config config;
  };
  std::vector<Cell> cells;
  for (const auto& n : grid.nodes) {
    const auto& params = nodes.at(n);
    for (auto s : grid.sizes) {
      for (auto c : grid.configs) cells.push_back({&params, s, c});
    }
  }
  std::map<std::size_t, std::vector<std::vector<double>>> inputs;
  for (auto s : grid.sizes) {
    if (!inputs.count(s.rows)) inputs[s.rows] = prepare_inputs(grid.dataset, s.rows, grid.seed);
  }

  std::vector<CellResult> out(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < cells.size();) {
      const auto& c = cells[k];
      try {
        auto& r = out[k];
        r.node = c.node->node_id;
        r.size = c.size;
        r.config = c.config;
        r.sim = run_config(*c.node, c.size, c.config, inputs.at(c.size.rows), grid.seed);
        const auto array = build_config_array(*c.node, c.size, c.config, grid.seed);
        r.mean_current = r.sim.mean_data_current(array.data_columns());
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!errors[k].empty()) {
      const auto& c = cells[k];
      throw Error(ErrorKind::Solver, "cell (" + c.node->node_id + ", " + size_label(c.size) + ", " +
                                         to_string(c.config) + ") failed: " + errors[k]);
    }
  }
  return out;
}

double drop_pct(double base, double value) { return (base - value) / base * 100.0; }
double increase_pct(double base, double value) { return (value - base) / base * 100.0; }

std::vector<OverheadRow> overhead_report(const std::vector<CellResult>& results) {
  std::map<std::pair<std::string, std::pair<std::size_t, std::size_t>>, const CellResult*> base;
  for (const auto& r : results) {
    if (r.config == Config::Baseline) base[{r.node, {r.size.rows, r.size.cols}}] = &r;
  }
  std::vector<OverheadRow> rows;
  rows.reserve(results.size());
  for (const auto& r : results) {
    auto it = base.find({r.node, {r.size.rows, r.size.cols}});
    if (it == base.end()) {
      throw Error(ErrorKind::Lookup,
                  "group (" + r.node + ", " + size_label(r.size) + ") has no baseline result");
    }
    const auto& b = *it->second;
    OverheadRow row;
    row.node = r.node;
    row.rows = r.size.rows;
    row.cols = r.size.cols;
    row.config = r.config;
    row.current_A = r.mean_current;
    row.delay_s = r.sim.delay;
    row.power_W = r.sim.power;
    if (r.config != Config::Baseline) {
      row.current_drop_pct = drop_pct(b.mean_current, r.mean_current);
      row.delay_inc_pct = increase_pct(b.sim.delay, r.sim.delay);
      row.power_inc_pct = increase_pct(b.sim.power, r.sim.power);
    }
    rows.push_back(row);
  }
  return rows;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw Error(ErrorKind::InvalidArgument, "unknown report format '" + s + "'");
}

std::string report_to_csv(const std::vector<OverheadRow>& rows) {
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "report has no rows");
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) {
    out += r.node + "," + std::to_string(r.rows) + "," + std::to_string(r.cols) + "," +
           to_string(r.config) + "," + fmt17(r.current_A) + "," + fmt17(r.delay_s) + "," +
           fmt17(r.power_W) + "," + fmt17(r.current_drop_pct) + "," + fmt17(r.delay_inc_pct) +
           "," + fmt17(r.power_inc_pct) + "\n";
  }
  return out;
}

std::string report_to_json(const std::vector<OverheadRow>& rows) {
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "report has no rows");
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"node", r.node},
                   {"rows", r.rows},
                   {"cols", r.cols},
                   {"config", to_string(r.config)},
                   {"current_A", r.current_A},
                   {"delay_s", r.delay_s},
                   {"power_W", r.power_W},
                   {"current_drop_pct", r.current_drop_pct},
                   {"delay_inc_pct", r.delay_inc_pct},
                   {"power_inc_pct", r.power_inc_pct}});
  }
  return arr.dump(2) + "\n";
}

std::vector<OverheadRow> report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw Error(ErrorKind::Format, "report header mismatch");
  }
  std::vector<OverheadRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream cells(line);
    for (std::string c; std::getline(cells, c, ',');) f.push_back(c);
    if (f.size() != 10) {
      throw Error(ErrorKind::Format, "line " + std::to_string(line_no) + ": expected 10 fields");
    }
    try {
      OverheadRow r;
      r.node = f[0];
      r.rows = std::stoul(f[1]);
      r.cols = std::stoul(f[2]);
      r.config = config_from_string(f[3]);
      r.current_A = std::stod(f[4]);
      r.delay_s = std::stod(f[5]);
      r.power_W = std::stod(f[6]);
      r.current_drop_pct = std::stod(f[7]);
      r.delay_inc_pct = std::stod(f[8]);
      r.power_inc_pct = std::stod(f[9]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Format, "line " + std::to_string(line_no) + ": bad field");
    }
  }
  return rows;
}

void emit_report(const std::vector<OverheadRow>& rows, ReportFormat format,
                 const std::string& path) {
  const auto text = format == ReportFormat::Csv ? report_to_csv(rows) : report_to_json(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Calibration

const std::vector<std::string>& calibration_free_params() {
  static const std::vector<std::string> names{"r_switch", "r_driver", "p_switch"};
  return names;
}

double calibration_residual(const Overheads& a, const Overheads& t) {
  auto sq = [](double x, double target) { return std::pow((x - target) / target, 2.0); };
  return sq(a.current_drop_pct, t.current_drop_pct) + sq(a.delay_inc_pct, t.delay_inc_pct) +
         sq(a.power_inc_pct, t.power_inc_pct);
}

namespace {

// Descent runs in log space over these fields; p_switch is solved for.
const char* const kElectricalFields[] = {"r_switch", "r_driver"};
using Direction = std::array<double, 2>;

// r_switch alone, then both together: current drop follows their ratio and
// delay follows the overall scale.
constexpr Direction kStartDirections[] = {{1.0, 0.0}, {1.0, 1.0}};

struct Point {
  TechNodeParams params;
  Overheads achieved;
  double residual;
};

TechNodeParams scaled(TechNodeParams p, const Direction& d, double f) {
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] != 0.0) set_field(p, kElectricalFields[k], get_field(p, kElectricalFields[k]) * std::pow(f, d[k]));
  }
  return p;
}

// Multiplicative direction-set descent. Each direction is line searched with
// factor (1+step)^(+-1), the exponent doubling while it keeps improving. After
// a sweep that moved, the net log displacement becomes an extra direction
// (replacing the previous one) and is searched too, so narrow valleys are
// followed instead of zigzagged.
// The step halves when nothing moves. Improvements below one part in 1e6 are
// not moves. 'best' is updated in place, so progress survives an exception
// thrown by eval.
template <typename Eval>
void descend(Point& best, double min_step, double stop, std::size_t& accepted, Eval&& eval) {
  std::vector<Direction> dirs(std::begin(kStartDirections), std::end(kStartDirections));
  const auto improves = [&](const Point& next) {
    return next.residual < best.residual * (1.0 - 1e-6);
  };
  const auto line = [&](const Direction& d, double step) {
    for (const double f0 : {1.0 + step, 1.0 / (1.0 + step)}) {
      bool any = false;
      for (double f = f0; best.residual > stop; f *= f) {
        Point next = eval(scaled(best.params, d, f));
        if (!improves(next)) break;
        best = std::move(next);
        ++accepted;
        any = true;
      }
      if (any) return true;
    }
    return false;
  };
  for (double step = 1.0; best.residual > stop && step >= min_step;) {
    const TechNodeParams anchor = best.params;
    bool moved = false;
    for (const auto& d : dirs) moved = line(d, step) || moved;
    if (!moved) {
      step /= 2.0;
      continue;
    }
    Direction net{};
    double norm = 0.0;
    for (std::size_t k = 0; k < net.size(); ++k) {
      net[k] = std::log(get_field(best.params, kElectricalFields[k]) /
                        get_field(anchor, kElectricalFields[k]));
      norm = std::max(norm, std::abs(net[k]));
    }
    for (auto& x : net) x /= norm;
    if (dirs.size() > std::size(kStartDirections)) dirs.pop_back();
    dirs.push_back(net);
    line(net, step);
  }
}

// Electrical part of one simulated array. Peripheral powers are added
// analytically, so moving p_switch or p_wm_col needs no new solve.
struct Electrical {
  double current, delay, power;
};

class Evaluator {
 public:
  explicit Evaluator(const CalibrationOptions& opt, const TechNodeParams& start)
      : opt_(opt),
        inputs_(prepare_inputs(opt.dataset, opt.size.rows, opt.seed)),
        base_(build_config_array(start, opt.size, Config::Baseline, opt.seed)),
        cfg_(build_config_array(start, opt.size, opt.config, opt.seed)) {
    for (auto& v : inputs_) v = normalize_to_voltage(v, start.v_read);
  }

  Overheads operator()(const TechNodeParams& p) {
    const auto [b, c] = electrical(p);
    double periph = static_cast<double>(cfg_.wm_cols()) * p.p_wm_col;
    if (cfg_.has_permutor()) {
      periph += static_cast<double>(permutor_transistor_count(cfg_.rows())) * p.p_switch;
    }
    return {drop_pct(b.current, c.current), increase_pct(b.delay, c.delay),
            increase_pct(b.power, c.power + periph)};
  }

  std::size_t solves() const { return base_cache_.size() + cfg_cache_.size(); }

  /// p_switch that puts the power overhead exactly on target, clamped at
  /// zero. Power is linear in p_switch, so no search is needed.
  double matching_p_switch(const TechNodeParams& p, double target_pct) {
    if (!cfg_.has_permutor()) return p.p_switch;
    const auto [b, c] = electrical(p);
    const double need = b.power * (1.0 + target_pct / 100.0) - c.power -
                        static_cast<double>(cfg_.wm_cols()) * p.p_wm_col;
    return std::max(0.0, need / static_cast<double>(permutor_transistor_count(cfg_.rows())));
  }

 private:
  Electrical run(const CrossbarArray& array, TechNodeParams p) const {
    p.p_switch = 0.0;
    p.p_wm_col = 0.0;
    const auto a = array.with_node(p);
    const auto r = simulate(a, inputs_);
    return {r.mean_data_current(a.data_columns()), r.delay, r.power};
  }

  // The baseline has no pass transistor, so it only depends on r_driver.
  std::pair<Electrical, Electrical> electrical(const TechNodeParams& p) {
    const auto key = std::make_pair(p.r_switch, p.r_driver);
    auto bi = base_cache_.find(p.r_driver);
    auto ci = cfg_cache_.find(key);
    const std::size_t needed = (bi == base_cache_.end()) + (ci == cfg_cache_.end());
    if (solves() + needed > opt_.max_solves) {
      throw Error(ErrorKind::Calibration,
                  "solve budget of " + std::to_string(opt_.max_solves) + " exhausted");
    }
    std::future<Electrical> pending;
    if (bi == base_cache_.end()) {
      pending = std::async(std::launch::async, [&] { return run(base_, p); });
    }
    if (ci == cfg_cache_.end()) ci = cfg_cache_.emplace(key, run(cfg_, p)).first;
    if (pending.valid()) bi = base_cache_.emplace(p.r_driver, pending.get()).first;
    return {bi->second, ci->second};
  }

  CalibrationOptions opt_;
  std::vector<std::vector<double>> inputs_;
  CrossbarArray base_;
  CrossbarArray cfg_;
  std::map<double, Electrical> base_cache_;
  std::map<std::pair<double, double>, Electrical> cfg_cache_;
};

}  // namespace

Overheads measure_overheads(const TechNodeParams& node, const CalibrationOptions& options) {
  CalibrationOptions opt = options;
  opt.max_solves = 2;
  Evaluator eval(opt, node);
  return eval(node);
}

CalibrationResult calibrate(const TechNodeParams& start, const CalibrationOptions& options) {
  start.validate();
  const auto& t = options.targets;
  if (!(t.current_drop_pct > 0.0 && t.delay_inc_pct > 0.0 && t.power_inc_pct > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "calibration targets must be positive");
  }
  if (options.config == Config::Baseline) {
    throw Error(ErrorKind::InvalidArgument, "cannot calibrate the baseline against itself");
  }

  Evaluator eval(options, start);
  const auto score = [&](const TechNodeParams& p) {
    const auto a = eval(p);
    return Point{p, a, calibration_residual(a, t)};
  };

  // p_switch only shifts the power overhead, so every electrical point takes
  // the p_switch that matches the power target.
  const auto profiled = [&](const TechNodeParams& p) {
    TechNodeParams q = p;
    q.p_wm_col = options.p_wm_col;
    q.p_switch = eval.matching_p_switch(q, t.power_inc_pct);
    return score(q);
  };

  CalibrationResult best;
  Point current = score(start);
  if (current.residual > options.stop_residual) {
    try {
      current = profiled(start);
      descend(current, options.min_step, options.stop_residual, best.iterations, profiled);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Calibration) throw;
    }
  }
  best.params = current.params;
  best.achieved = current.achieved;
  best.residual = current.residual;
  best.solves = eval.solves();
  if (best.residual > options.fail_residual) {
    std::ostringstream msg;
    msg << "calibration residual " << best.residual << " above " << options.fail_residual
        << " (best r_switch=" << best.params.r_switch << ", r_driver=" << best.params.r_driver
        << ", p_switch=" << best.params.p_switch << ", p_wm_col=" << best.params.p_wm_col << ")";
    throw CalibrationError(msg.str(), best);
  }
  return best;
}

NodeTable transfer_calibration(const TechNodeParams& fitted, const NodeTable& defaults,
                               const std::string& reference) {
  const auto& ref = defaults.at(reference);
  const double ref_drive = ref.v_read * ref.v_read / ref.r_driver;
  NodeTable out = defaults;
  for (const auto& label : defaults.labels()) {
    const auto& d = defaults.at(label);
    TechNodeParams p = d;
    p.r_switch = fitted.r_switch * d.r_switch / ref.r_switch;
    p.r_driver = fitted.r_driver * d.r_driver / ref.r_driver;
    const double drive = (d.v_read * d.v_read / d.r_driver) / ref_drive;
    p.p_switch = fitted.p_switch * drive;
    p.p_wm_col = fitted.p_wm_col * drive;
    if (label == reference) p = fitted;
    out.set(p);
  }
  return out;
}

}  // namespace xbarsec
