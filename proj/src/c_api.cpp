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
#include "xbarsec/xbarsec.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "xbarsec/adversary.hpp"
#include "xbarsec/crossbar.hpp"
#include "xbarsec/data_ingest.hpp"
#include "xbarsec/device.hpp"
#include "xbarsec/errors.hpp"
#include "xbarsec/experiment.hpp"
#include "xbarsec/permutor.hpp"
#include "xbarsec/random.hpp"
#include "xbarsec/solver.hpp"
#include "xbarsec/watermark.hpp"

struct xbs_nodes {
  xbarsec::NodeTable table;
};

struct xbs_key {
  xbarsec::PermKey key;
};

struct xbs_array {
  xbarsec::CrossbarArray array;
};

struct xbs_watermark {
  xbarsec::WatermarkSpec spec;
};

struct xbs_report {
  std::vector<xbarsec::OverheadRow> rows;
};

namespace {

using namespace xbarsec;

thread_local std::string g_last_error;

xbs_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return XBS_ERR_INVALID_ARGUMENT;
    case ErrorKind::Shape: return XBS_ERR_SHAPE;
    case ErrorKind::Length: return XBS_ERR_LENGTH;
    case ErrorKind::Range: return XBS_ERR_RANGE;
    case ErrorKind::Lookup: return XBS_ERR_LOOKUP;
    case ErrorKind::Format: return XBS_ERR_FORMAT;
    case ErrorKind::Io: return XBS_ERR_IO;
    case ErrorKind::State: return XBS_ERR_STATE;
    case ErrorKind::Solver: return XBS_ERR_SOLVER;
    case ErrorKind::Calibration: return XBS_ERR_CALIBRATION;
  }
  return XBS_ERR_INTERNAL;
}

xbs_status fail(xbs_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename F>
xbs_status guard(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(XBS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(XBS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(XBS_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

xbs_status copy_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap < s.size() + 1) return fail(XBS_ERR_BUFFER, "buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return XBS_OK;
}

std::vector<std::string> split(const char* text) {
  std::vector<std::string> out;
  if (!text) return out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ArraySize parse_size(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t a = 0, b = 0;
    const auto rows = std::stoul(s.substr(0, x), &a);
    const auto cols = std::stoul(s.substr(x + 1), &b);
    if (a != x || b != s.size() - x - 1) throw std::invalid_argument(s);
    return {rows, cols};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "array size must look like RxC, got '" + s + "'");
  }
}

DatasetSpec to_dataset(const xbs_dataset* d) {
  DatasetSpec spec;
  if (!d) return spec;
  if (d->kind) spec.kind = dataset_from_string(d->kind);
  if (d->path) spec.path = d->path;
  spec.batch = d->batch;
  spec.offset = d->offset;
  spec.spreading_factor = d->spreading_factor;
  if (!std::isnan(d->snr_db)) spec.snr_db = d->snr_db;
  return spec;
}

std::vector<std::vector<double>> to_batch(const double* data, std::size_t batch,
                                          std::size_t rows) {
  std::vector<std::vector<double>> out(batch);
  for (std::size_t b = 0; b < batch; ++b) out[b].assign(data + b * rows, data + (b + 1) * rows);
  return out;
}

void fill_summary(const SimResult& r, const CrossbarArray& a, xbs_sim_summary* out) {
  if (!out) return;
  out->mean_current_a = r.mean_data_current(a.data_columns());
  out->delay_s = r.delay;
  out->power_w = r.power;
  out->total_cols = r.column_currents.size();
}

void copy_currents(const SimResult& r, double* currents, std::size_t cap) {
  if (!currents) return;
  if (cap < r.column_currents.size()) {
    throw Error(ErrorKind::Shape, "current buffer holds " + std::to_string(cap) + " values, need " +
                                      std::to_string(r.column_currents.size()));
  }
  std::copy(r.column_currents.begin(), r.column_currents.end(), currents);
}

void fill_calibration(const CalibrationResult& r, xbs_calibration_result* out) {
  if (!out) return;
  out->current_drop_pct = r.achieved.current_drop_pct;
  out->delay_inc_pct = r.achieved.delay_inc_pct;
  out->power_inc_pct = r.achieved.power_inc_pct;
  out->residual = r.residual;
  out->iterations = r.iterations;
  out->solves = r.solves;
  out->r_switch = r.params.r_switch;
  out->r_driver = r.params.r_driver;
  out->p_switch = r.params.p_switch;
  out->p_wm_col = r.params.p_wm_col;
}

}  // namespace

extern "C" {

const char* xbs_version(void) { return "0.1.0"; }

const char* xbs_status_name(xbs_status status) {
  switch (status) {
    case XBS_OK: return "ok";
    case XBS_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case XBS_ERR_SHAPE: return "shape";
    case XBS_ERR_LENGTH: return "length";
    case XBS_ERR_RANGE: return "range";
    case XBS_ERR_LOOKUP: return "lookup";
    case XBS_ERR_FORMAT: return "format";
    case XBS_ERR_IO: return "io";
    case XBS_ERR_STATE: return "state";
    case XBS_ERR_SOLVER: return "solver";
    case XBS_ERR_CALIBRATION: return "calibration";
    case XBS_ERR_BUFFER: return "buffer";
    case XBS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* xbs_last_error(void) { return g_last_error.c_str(); }

// ---- nodes -----------------------------------------------------------------

xbs_status xbs_nodes_create(xbs_nodes** out) {
  return guard([&] {
    require(out, "out is null");
    *out = new xbs_nodes{};
    return XBS_OK;
  });
}

xbs_status xbs_nodes_load(xbs_nodes* nodes, const char* path) {
  return guard([&] {
    require(nodes && path, "null argument");
    nodes->table.load_file(path);
    return XBS_OK;
  });
}

xbs_status xbs_nodes_save(const xbs_nodes* nodes, const char* path) {
  return guard([&] {
    require(nodes && path, "null argument");
    nodes->table.save_file(path);
    return XBS_OK;
  });
}

xbs_status xbs_nodes_get(const xbs_nodes* nodes, const char* node, const char* field,
                         double* out) {
  return guard([&] {
    require(nodes && node && field && out, "null argument");
    *out = get_field(nodes->table.at(node), field);
    return XBS_OK;
  });
}

xbs_status xbs_nodes_set(xbs_nodes* nodes, const char* node, const char* field, double value) {
  return guard([&] {
    require(nodes && node && field, "null argument");
    TechNodeParams p = nodes->table.at(node);
    set_field(p, field, value);
    nodes->table.set(p);
    return XBS_OK;
  });
}

void xbs_nodes_destroy(xbs_nodes* nodes) { delete nodes; }

// ---- keys ------------------------------------------------------------------

xbs_status xbs_key_generate(size_t rows, uint64_t seed, xbs_key** out) {
  return guard([&] {
    require(out, "out is null");
    *out = new xbs_key{generate_key(rows, seed)};
    return XBS_OK;
  });
}

xbs_status xbs_key_parse(const char* text, xbs_key** out) {
  return guard([&] {
    require(text && out, "null argument");
    *out = new xbs_key{key_from_string(text)};
    return XBS_OK;
  });
}

xbs_status xbs_key_to_string(const xbs_key* key, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    require(key, "key is null");
    return copy_string(key_to_string(key->key), buf, cap, needed);
  });
}

size_t xbs_key_rows(const xbs_key* key) { return key ? key->key.rows : 0; }

void xbs_key_destroy(xbs_key* key) { delete key; }

double xbs_key_space_bits(size_t rows) { return key_space_bits(rows); }

size_t xbs_permutor_transistors(size_t rows) { return permutor_transistor_count(rows); }

double xbs_transistor_overhead(size_t rows, size_t cols) {
  try {
    return transistor_overhead(rows, cols);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// ---- arrays ----------------------------------------------------------------

xbs_status xbs_array_program(const xbs_nodes* nodes, const char* node, size_t rows, size_t cols,
                             const double* weights, xbs_array** out) {
  return guard([&] {
    require(nodes && node && weights && out, "null argument");
    Matrix w(rows, cols);
    std::copy(weights, weights + rows * cols, w.data.begin());
    *out = new xbs_array{CrossbarArray::program_weights(rows, cols, w, nodes->table.at(node))};
    return XBS_OK;
  });
}

xbs_status xbs_array_experiment(const xbs_nodes* nodes, const char* node, size_t rows,
                                size_t cols, const char* config, uint64_t seed,
                                xbs_array** out) {
  return guard([&] {
    require(nodes && node && config && out, "null argument");
    *out = new xbs_array{build_config_array(nodes->table.at(node), {rows, cols},
                                            config_from_string(config), seed)};
    return XBS_OK;
  });
}

xbs_status xbs_array_load_csv(const xbs_nodes* nodes, const char* path, xbs_array** out) {
  return guard([&] {
    require(nodes && path && out, "null argument");
    *out = new xbs_array{CrossbarArray::load_csv(path, nodes->table)};
    return XBS_OK;
  });
}

xbs_status xbs_array_save_csv(const xbs_array* array, const char* path) {
  return guard([&] {
    require(array && path, "null argument");
    array->array.save_csv(path);
    return XBS_OK;
  });
}

xbs_status xbs_array_attach_key(const xbs_array* array, const xbs_key* key, xbs_array** out) {
  return guard([&] {
    require(array && key && out, "null argument");
    *out = new xbs_array{array->array.with_key(key->key)};
    return XBS_OK;
  });
}

xbs_status xbs_array_set_cell(const xbs_array* array, size_t row, size_t col, double g,
                              xbs_array** out) {
  return guard([&] {
    require(array && out, "null argument");
    *out = new xbs_array{array->array.with_cell(row, col, g)};
    return XBS_OK;
  });
}

xbs_status xbs_array_shape(const xbs_array* array, size_t* rows, size_t* data_cols,
                           size_t* wm_cols) {
  return guard([&] {
    require(array, "array is null");
    if (rows) *rows = array->array.rows();
    if (data_cols) *data_cols = array->array.cols();
    if (wm_cols) *wm_cols = array->array.wm_cols();
    return XBS_OK;
  });
}

xbs_status xbs_array_conductances(const xbs_array* array, double* out, size_t cap) {
  return guard([&] {
    require(array && out, "null argument");
    const auto& g = array->array.read_raw_conductances();
    if (cap < g.data.size()) throw Error(ErrorKind::Shape, "conductance buffer too small");
    std::copy(g.data.begin(), g.data.end(), out);
    return XBS_OK;
  });
}

xbs_status xbs_array_ideal_mvm(const xbs_array* array, const double* v, size_t n, double* out,
                               size_t cap) {
  return guard([&] {
    require(array && v && out, "null argument");
    const auto cur = array->array.ideal_mvm({v, n});
    if (cap < cur.size()) throw Error(ErrorKind::Shape, "current buffer too small");
    std::copy(cur.begin(), cur.end(), out);
    return XBS_OK;
  });
}

void xbs_array_destroy(xbs_array* array) { delete array; }

// ---- simulation ------------------------------------------------------------

xbs_status xbs_simulate(const xbs_array* array, const double* inputs, size_t batch,
                        double* currents, size_t cap, xbs_sim_summary* out) {
  return guard([&] {
    require(array && inputs, "null argument");
    const auto r = simulate(array->array, to_batch(inputs, batch, array->array.rows()));
    copy_currents(r, currents, cap);
    fill_summary(r, array->array, out);
    return XBS_OK;
  });
}

void xbs_dataset_defaults(xbs_dataset* d) {
  if (!d) return;
  const DatasetSpec spec;
  d->kind = "uniform";
  d->path = nullptr;
  d->batch = spec.batch;
  d->offset = spec.offset;
  d->spreading_factor = spec.spreading_factor;
  d->snr_db = std::numeric_limits<double>::quiet_NaN();
}

xbs_status xbs_prepare_inputs(const xbs_dataset* d, size_t rows, uint64_t seed, double* out,
                              size_t cap, size_t* count) {
  return guard([&] {
    require(out, "out is null");
    const auto batch = prepare_inputs(to_dataset(d), rows, seed);
    if (count) *count = batch.size();
    if (cap < batch.size() * rows) throw Error(ErrorKind::Shape, "input buffer too small");
    for (std::size_t b = 0; b < batch.size(); ++b) {
      std::copy(batch[b].begin(), batch[b].end(), out + b * rows);
    }
    return XBS_OK;
  });
}

xbs_status xbs_run_config(const xbs_nodes* nodes, const char* node, size_t rows, size_t cols,
                          const char* config, uint64_t seed, const xbs_dataset* d,
                          double* currents, size_t cap, xbs_sim_summary* out) {
  return guard([&] {
    require(nodes && node && config, "null argument");
    const auto& params = nodes->table.at(node);
    const ArraySize size{rows, cols};
    const auto cfg = config_from_string(config);
    const auto inputs = prepare_inputs(to_dataset(d), rows, seed);
    const auto r = run_config(params, size, cfg, inputs, seed);
    copy_currents(r, currents, cap);
    fill_summary(r, build_config_array(params, size, cfg, seed), out);
    return XBS_OK;
  });
}

// ---- watermark -------------------------------------------------------------

xbs_status xbs_watermark_create(const xbs_array* target, uint64_t seed, const char* placement,
                                xbs_watermark** out) {
  return guard([&] {
    require(target && out, "null argument");
    const auto& a = target->array;
    const auto where = placement ? placement_from_string(placement) : Placement::End;
    *out = new xbs_watermark{
        make_watermark(a.rows(), a.cols(), seed, where, a.node(), a.device())};
    return XBS_OK;
  });
}

xbs_status xbs_watermark_embed(const xbs_array* array, const xbs_watermark* wm, xbs_array** out) {
  return guard([&] {
    require(array && wm && out, "null argument");
    *out = new xbs_array{embed_watermark(array->array, wm->spec)};
    return XBS_OK;
  });
}

xbs_status xbs_watermark_sign(xbs_watermark* wm, const xbs_array* embedded, const char* backend) {
  return guard([&] {
    require(wm && embedded, "null argument");
    const auto b = backend ? backend_from_string(backend) : Backend::Ideal;
    wm->spec = sign_with_backend(wm->spec, embedded->array, b);
    return XBS_OK;
  });
}

xbs_status xbs_watermark_verify(const xbs_array* array, const xbs_watermark* wm, int* pass,
                                double* worst_deviation) {
  return guard([&] {
    require(array && wm, "null argument");
    const auto measured = measure_probes(array->array, wm->spec, wm->spec.backend);
    const auto rep = verify_watermark(measured, wm->spec);
    if (pass) *pass = rep.pass ? 1 : 0;
    if (worst_deviation) *worst_deviation = rep.worst_deviation;
    return XBS_OK;
  });
}

xbs_status xbs_watermark_save(const xbs_watermark* wm, const char* path) {
  return guard([&] {
    require(wm && path, "null argument");
    save_watermark(wm->spec, path);
    return XBS_OK;
  });
}

xbs_status xbs_watermark_load(const xbs_nodes* nodes, const char* node, const char* path,
                              xbs_watermark** out) {
  return guard([&] {
    require(nodes && node && path && out, "null argument");
    *out = new xbs_watermark{load_watermark(path, nodes->table.at(node))};
    return XBS_OK;
  });
}

xbs_status xbs_watermark_camouflage(const xbs_array* array, const xbs_watermark* wm,
                                    size_t probes, uint64_t seed, double* statistic,
                                    double* critical) {
  return guard([&] {
    require(array && wm, "null argument");
    const double d = camouflage_stats(array->array, wm->spec, probes, seed);
    if (statistic) *statistic = d;
    if (critical) {
      const auto used = camouflage_probe_count(array->array.rows(), probes);
      *critical = ks_critical_value(used * wm->spec.column_indices.size(),
                                    used * array->array.cols());
    }
    return XBS_OK;
  });
}

void xbs_watermark_destroy(xbs_watermark* wm) { delete wm; }

// ---- adversary -------------------------------------------------------------

xbs_status xbs_attack(const xbs_nodes* nodes, const char* node, size_t rows, size_t cols,
                      const char* config, uint64_t seed, size_t probes, double keys_per_second,
                      xbs_attack_report* out) {
  return guard([&] {
    require(nodes && node && config && out, "null argument");
    const auto& params = nodes->table.at(node);
    const auto array = build_config_array(params, {rows, cols}, config_from_string(config), seed);
    const auto clone = extract_and_clone(array);
    auto workload = uniform_batch(rows, probes, derive_seed(seed, 20)).vectors;
    for (auto& v : workload) v = normalize_to_voltage(v, params.v_read);
    const auto rep = extraction_fidelity(array.logical_conductances(), clone, workload);
    out->row_placement_accuracy = rep.row_placement_accuracy;
    out->frobenius_error = rep.frobenius_error;
    out->clone_output_mse = rep.clone_output_mse;
    if (array.has_permutor()) {
      out->key_space_bits = key_space_bits(rows);
      out->brute_force_log10_s = brute_force_cost_log10(rows, keys_per_second);
    } else {
      out->key_space_bits = 0.0;
      out->brute_force_log10_s = -std::numeric_limits<double>::infinity();
    }
    return XBS_OK;
  });
}

// ---- sweeps and reports ----------------------------------------------------

void xbs_grid_defaults(xbs_grid* grid) {
  if (!grid) return;
  grid->nodes = "45nm,22nm,7nm";
  grid->sizes = "10x10,128x10,256x128";
  grid->configs = "baseline,permutor,watermark,both";
  grid->seed = 1;
  xbs_dataset_defaults(&grid->dataset);
  grid->threads = 0;
}

xbs_status xbs_sweep(const xbs_nodes* nodes, const xbs_grid* grid, xbs_report** out) {
  return guard([&] {
    require(nodes && grid && out, "null argument");
    ExperimentGrid g;
    g.nodes = split(grid->nodes);
    g.sizes.clear();
    for (const auto& s : split(grid->sizes)) g.sizes.push_back(parse_size(s));
    g.configs.clear();
    for (const auto& c : split(grid->configs)) g.configs.push_back(config_from_string(c));
    g.seed = grid->seed;
    g.dataset = to_dataset(&grid->dataset);
    const auto results = sweep(g, nodes->table, grid->threads);
    *out = new xbs_report{overhead_report(results)};
    return XBS_OK;
  });
}

xbs_status xbs_report_load_csv(const char* path, xbs_report** out) {
  return guard([&] {
    require(path && out, "null argument");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, std::string("cannot open '") + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = new xbs_report{report_from_csv(ss.str())};
    return XBS_OK;
  });
}

size_t xbs_report_size(const xbs_report* report) { return report ? report->rows.size() : 0; }

xbs_status xbs_report_row_at(const xbs_report* report, size_t index, xbs_report_row* out) {
  return guard([&] {
    require(report && out, "null argument");
    if (index >= report->rows.size()) throw Error(ErrorKind::Range, "row index out of range");
    const auto& r = report->rows[index];
    std::snprintf(out->node, sizeof out->node, "%s", r.node.c_str());
    std::snprintf(out->config, sizeof out->config, "%s", to_string(r.config));
    out->rows = r.rows;
    out->cols = r.cols;
    out->current_a = r.current_A;
    out->delay_s = r.delay_s;
    out->power_w = r.power_W;
    out->current_drop_pct = r.current_drop_pct;
    out->delay_inc_pct = r.delay_inc_pct;
    out->power_inc_pct = r.power_inc_pct;
    return XBS_OK;
  });
}

xbs_status xbs_report_write(const xbs_report* report, const char* format, const char* path) {
  return guard([&] {
    require(report && format && path, "null argument");
    emit_report(report->rows, report_format_from_string(format), path);
    return XBS_OK;
  });
}

xbs_status xbs_report_to_string(const xbs_report* report, const char* format, char* buf,
                                size_t cap, size_t* needed) {
  return guard([&] {
    require(report && format, "null argument");
    const auto f = report_format_from_string(format);
    return copy_string(f == ReportFormat::Csv ? report_to_csv(report->rows)
                                              : report_to_json(report->rows),
                       buf, cap, needed);
  });
}

void xbs_report_destroy(xbs_report* report) { delete report; }

// ---- calibration -----------------------------------------------------------

void xbs_calibration_defaults(xbs_calibration_options* opt) {
  if (!opt) return;
  const CalibrationOptions d;
  opt->node = "45nm";
  opt->rows = d.size.rows;
  opt->cols = d.size.cols;
  opt->config = to_string(d.config);
  opt->seed = d.seed;
  opt->target_current_drop_pct = d.targets.current_drop_pct;
  opt->target_delay_inc_pct = d.targets.delay_inc_pct;
  opt->target_power_inc_pct = d.targets.power_inc_pct;
  opt->max_solves = d.max_solves;
  xbs_dataset_defaults(&opt->dataset);
}

xbs_status xbs_calibrate(xbs_nodes* nodes, const xbs_calibration_options* opt,
                         xbs_calibration_result* out) {
  return guard([&] {
    require(nodes && opt && opt->node && opt->config, "null argument");
    CalibrationOptions o;
    o.targets = {opt->target_current_drop_pct, opt->target_delay_inc_pct,
                 opt->target_power_inc_pct};
    o.size = {opt->rows, opt->cols};
    o.config = config_from_string(opt->config);
    o.seed = opt->seed;
    o.dataset = to_dataset(&opt->dataset);
    o.max_solves = opt->max_solves;
    try {
      const auto r = calibrate(nodes->table.at(opt->node), o);
      fill_calibration(r, out);
      nodes->table = transfer_calibration(r.params, nodes->table, opt->node);
    } catch (const CalibrationError& e) {
      fill_calibration(e.best(), out);
      throw;
    }
    return XBS_OK;
  });
}

}  // extern "C"
