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
// Command-line front end. Talks to the library only through xbarsec.h.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xbarsec/xbarsec.h"

namespace {

using json = nlohmann::json;

// Carries a failed status out of a subcommand to main().
struct Failure {
  std::string status;
  std::string message;
};

void check(xbs_status s) {
  if (s != XBS_OK) throw Failure{xbs_status_name(s), xbs_last_error()};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using Nodes = std::unique_ptr<xbs_nodes, Deleter<xbs_nodes, xbs_nodes_destroy>>;
using Key = std::unique_ptr<xbs_key, Deleter<xbs_key, xbs_key_destroy>>;
using Array = std::unique_ptr<xbs_array, Deleter<xbs_array, xbs_array_destroy>>;
using Watermark = std::unique_ptr<xbs_watermark, Deleter<xbs_watermark, xbs_watermark_destroy>>;
using Report = std::unique_ptr<xbs_report, Deleter<xbs_report, xbs_report_destroy>>;

struct Common {
  std::uint64_t seed = 1;
  std::string config_file;
};

struct DatasetArgs {
  std::string kind = "uniform";
  std::string path;
  std::size_t batch = 8;
  std::size_t offset = 0;
  int sf = 7;
  double snr = std::numeric_limits<double>::quiet_NaN();

  void add_to(CLI::App* app) {
    app->add_option("--dataset", kind, "Input source")
        ->check(CLI::IsMember({"uniform", "mnist", "lora", "csv"}))
        ->capture_default_str();
    app->add_option("--data-path", path, "IDX image file or CSV sample file");
    app->add_option("--batch", batch, "Input vectors per configuration")->capture_default_str();
    app->add_option("--offset", offset, "First MNIST image");
    app->add_option("--sf", sf, "LoRa spreading factor")->capture_default_str();
    app->add_option("--snr", snr, "LoRa SNR in dB (omit for a clean stream)");
  }

  xbs_dataset get() const {
    xbs_dataset d;
    xbs_dataset_defaults(&d);
    d.kind = kind.c_str();
    d.path = path.empty() ? nullptr : path.c_str();
    d.batch = batch;
    d.offset = offset;
    d.spreading_factor = sf;
    d.snr_db = snr;
    return d;
  }
};

Nodes load_nodes(const Common& c) {
  xbs_nodes* n = nullptr;
  check(xbs_nodes_create(&n));
  Nodes nodes(n);
  if (!c.config_file.empty()) check(xbs_nodes_load(nodes.get(), c.config_file.c_str()));
  return nodes;
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& s) {
  std::size_t r = 0, c = 0;
  char x = 0, extra = 0;
  if (std::sscanf(s.c_str(), "%zu%c%zu%c", &r, &x, &c, &extra) != 3 || x != 'x' || !r || !c) {
    throw Failure{"invalid_argument", "size must look like RxC, got '" + s + "'"};
  }
  return {r, c};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{"io", "cannot write '" + path + "'"};
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

void cmd_simulate(const Common& c, const std::string& node, const std::string& size,
                  const std::string& mode, const DatasetArgs& data, bool currents) {
  auto nodes = load_nodes(c);
  const auto [rows, cols] = parse_size(size);
  std::vector<double> cur(cols + 2);
  xbs_sim_summary sum{};
  const auto d = data.get();
  check(xbs_run_config(nodes.get(), node.c_str(), rows, cols, mode.c_str(), c.seed, &d,
                       cur.data(), cur.size(), &sum));
  cur.resize(sum.total_cols);
  json j = {{"node", node},           {"rows", rows},
            {"cols", cols},           {"config", mode},
            {"seed", c.seed},         {"current_A", sum.mean_current_a},
            {"delay_s", sum.delay_s}, {"power_W", sum.power_w}};
  if (currents) j["column_currents_A"] = cur;
  emit(j);
}

void cmd_sweep(const Common& c, const std::string& nodes_list, const std::string& sizes,
               const std::string& configs, const DatasetArgs& data, unsigned threads,
               const std::string& format, const std::string& out) {
  auto nodes = load_nodes(c);
  xbs_grid g;
  xbs_grid_defaults(&g);
  g.nodes = nodes_list.c_str();
  g.sizes = sizes.c_str();
  g.configs = configs.c_str();
  g.seed = c.seed;
  g.dataset = data.get();
  g.threads = threads;
  xbs_report* r = nullptr;
  check(xbs_sweep(nodes.get(), &g, &r));
  Report report(r);
  if (out.empty() || out == "-") {
    std::size_t need = 0;
    xbs_report_to_string(report.get(), format.c_str(), nullptr, 0, &need);
    std::string text(need, '\0');
    check(xbs_report_to_string(report.get(), format.c_str(), text.data(), need, &need));
    text.resize(need - 1);
    std::cout << text;
  } else {
    check(xbs_report_write(report.get(), format.c_str(), out.c_str()));
  }
}

void cmd_calibrate(const Common& c, const std::string& node, const std::string& size,
                   const std::string& mode, const std::vector<double>& targets,
                   std::size_t max_solves, const DatasetArgs& data, const std::string& out) {
  auto nodes = load_nodes(c);
  const auto [rows, cols] = parse_size(size);
  xbs_calibration_options o;
  xbs_calibration_defaults(&o);
  o.node = node.c_str();
  o.rows = rows;
  o.cols = cols;
  o.config = mode.c_str();
  o.seed = c.seed;
  o.target_current_drop_pct = targets[0];
  o.target_delay_inc_pct = targets[1];
  o.target_power_inc_pct = targets[2];
  o.max_solves = max_solves;
  o.dataset = data.get();
  xbs_calibration_result r{};
  const auto s = xbs_calibrate(nodes.get(), &o, &r);
  const json fit = {{"current_drop_pct", r.current_drop_pct},
                    {"delay_inc_pct", r.delay_inc_pct},
                    {"power_inc_pct", r.power_inc_pct},
                    {"residual", r.residual},
                    {"iterations", r.iterations},
                    {"solves", r.solves},
                    {"r_switch", r.r_switch},
                    {"r_driver", r.r_driver},
                    {"p_switch", r.p_switch},
                    {"p_wm_col", r.p_wm_col}};
  if (s != XBS_OK) {
    std::cerr << json({{"best", fit}}).dump() << '\n';
    check(s);
  }
  if (!out.empty()) check(xbs_nodes_save(nodes.get(), out.c_str()));
  emit(fit);
}

void cmd_attack(const Common& c, const std::string& node, const std::string& size,
                const std::string& mode, std::size_t probes, double rate) {
  auto nodes = load_nodes(c);
  const auto [rows, cols] = parse_size(size);
  xbs_attack_report r{};
  check(xbs_attack(nodes.get(), node.c_str(), rows, cols, mode.c_str(), c.seed, probes, rate, &r));
  emit({{"node", node},
        {"rows", rows},
        {"cols", cols},
        {"config", mode},
        {"row_placement_accuracy", r.row_placement_accuracy},
        {"frobenius_error", r.frobenius_error},
        {"clone_output_mse", r.clone_output_mse},
        {"key_space_bits", r.key_space_bits},
        {"brute_force_log10_s", std::isfinite(r.brute_force_log10_s)
                                    ? json(r.brute_force_log10_s)
                                    : json(nullptr)}});
}

void cmd_keygen(const Common& c, std::size_t rows, const std::string& out) {
  xbs_key* k = nullptr;
  check(xbs_key_generate(rows, c.seed, &k));
  Key key(k);
  std::size_t need = 0;
  xbs_key_to_string(key.get(), nullptr, 0, &need);
  std::string text(need, '\0');
  check(xbs_key_to_string(key.get(), text.data(), need, &need));
  text.resize(need - 1);
  if (!out.empty()) write_text(out, text + "\n");
  emit({{"rows", rows},
        {"key", text},
        {"key_space_bits", xbs_key_space_bits(rows)},
        {"transistors", xbs_permutor_transistors(rows)}});
}

struct WatermarkArgs {
  std::string node = "45nm";
  std::string size = "10x10";
  std::string array_in;
  std::string key_file;
  std::uint64_t wm_seed = 7;
  std::string placement = "end";
  std::string backend = "ideal";
  std::string array_out;
  std::string spec_out;
  std::string spec_in;
};

Array source_array(const Common& c, xbs_nodes* nodes, const WatermarkArgs& a) {
  xbs_array* raw = nullptr;
  if (!a.array_in.empty()) {
    check(xbs_array_load_csv(nodes, a.array_in.c_str(), &raw));
    return Array(raw);
  }
  const auto [rows, cols] = parse_size(a.size);
  check(xbs_array_experiment(nodes, a.node.c_str(), rows, cols, "baseline", c.seed, &raw));
  Array base(raw);
  if (a.key_file.empty()) return base;
  std::ifstream in(a.key_file);
  std::string text;
  if (!in || !std::getline(in, text)) throw Failure{"io", "cannot read '" + a.key_file + "'"};
  xbs_key* k = nullptr;
  check(xbs_key_parse(text.c_str(), &k));
  Key key(k);
  check(xbs_array_attach_key(base.get(), key.get(), &raw));
  return Array(raw);
}

void cmd_watermark_embed(const Common& c, const WatermarkArgs& a) {
  auto nodes = load_nodes(c);
  auto base = source_array(c, nodes.get(), a);
  xbs_watermark* w = nullptr;
  check(xbs_watermark_create(base.get(), a.wm_seed, a.placement.c_str(), &w));
  Watermark wm(w);
  xbs_array* raw = nullptr;
  check(xbs_watermark_embed(base.get(), wm.get(), &raw));
  Array marked(raw);
  if (a.backend != "ideal") check(xbs_watermark_sign(wm.get(), marked.get(), a.backend.c_str()));
  if (!a.array_out.empty()) check(xbs_array_save_csv(marked.get(), a.array_out.c_str()));
  if (!a.spec_out.empty()) check(xbs_watermark_save(wm.get(), a.spec_out.c_str()));
  int pass = 0;
  double worst = 0.0;
  check(xbs_watermark_verify(marked.get(), wm.get(), &pass, &worst));
  emit({{"embedded", true}, {"self_check", pass != 0}, {"worst_deviation", worst}});
}

void cmd_watermark_verify(const Common& c, const WatermarkArgs& a) {
  if (a.array_in.empty() || a.spec_in.empty()) {
    throw Failure{"invalid_argument", "verify needs --array and --spec"};
  }
  auto nodes = load_nodes(c);
  xbs_array* raw = nullptr;
  check(xbs_array_load_csv(nodes.get(), a.array_in.c_str(), &raw));
  Array array(raw);
  xbs_watermark* w = nullptr;
  check(xbs_watermark_load(nodes.get(), a.node.c_str(), a.spec_in.c_str(), &w));
  Watermark wm(w);
  int pass = 0;
  double worst = 0.0;
  check(xbs_watermark_verify(array.get(), wm.get(), &pass, &worst));
  emit({{"pass", pass != 0}, {"worst_deviation", worst}});
  if (!pass) throw Failure{"verification", "watermark mismatch, worst deviation " +
                                               std::to_string(worst)};
}

void cmd_report(const std::string& in, const std::string& format, const std::string& out) {
  xbs_report* r = nullptr;
  check(xbs_report_load_csv(in.c_str(), &r));
  Report report(r);
  if (format != "summary") {
    std::size_t need = 0;
    xbs_report_to_string(report.get(), format.c_str(), nullptr, 0, &need);
    std::string text(need, '\0');
    check(xbs_report_to_string(report.get(), format.c_str(), text.data(), need, &need));
    text.resize(need - 1);
    write_text(out, text);
    return;
  }
  // Worst overhead per config, over every node and size.
  std::map<std::string, json> worst;
  for (std::size_t i = 0; i < xbs_report_size(report.get()); ++i) {
    xbs_report_row row;
    check(xbs_report_row_at(report.get(), i, &row));
    auto& w = worst[row.config];
    if (w.is_null()) {
      w = {{"max_current_drop_pct", row.current_drop_pct},
           {"max_delay_inc_pct", row.delay_inc_pct},
           {"max_power_inc_pct", row.power_inc_pct},
           {"cells", 0}};
    }
    w["max_current_drop_pct"] = std::max(w["max_current_drop_pct"].get<double>(), row.current_drop_pct);
    w["max_delay_inc_pct"] = std::max(w["max_delay_inc_pct"].get<double>(), row.delay_inc_pct);
    w["max_power_inc_pct"] = std::max(w["max_power_inc_pct"].get<double>(), row.power_inc_pct);
    w["cells"] = w["cells"].get<int>() + 1;
  }
  write_text(out, json(worst).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security overhead experiments for memristive crossbar arrays"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Seed for weights, keys, watermarks and inputs")
      ->capture_default_str();
  app.add_option("--config", common.config_file, "Node parameter file (INI)")
      ->check(CLI::ExistingFile);
  app.set_version_flag("--version", std::string(xbs_version()));

  const std::vector<std::string> modes{"baseline", "permutor", "watermark", "both"};

  std::string node = "45nm", size = "10x10", mode = "both";
  DatasetArgs data;

  auto* sim = app.add_subcommand("simulate", "Simulate one configuration");
  bool currents = false;
  sim->add_option("--node", node)->capture_default_str();
  sim->add_option("--size", size, "RxC")->capture_default_str();
  sim->add_option("--mode", mode)->check(CLI::IsMember(modes))->capture_default_str();
  sim->add_flag("--currents", currents, "Include every column current");
  data.add_to(sim);

  auto* swp = app.add_subcommand("sweep", "Simulate a grid and report overheads");
  std::string nodes_list = "45nm,22nm,7nm", sizes = "10x10,128x10,256x128";
  std::string configs = "baseline,permutor,watermark,both", format = "csv", out;
  unsigned threads = 0;
  swp->add_option("--nodes", nodes_list)->capture_default_str();
  swp->add_option("--sizes", sizes)->capture_default_str();
  swp->add_option("--configs", configs)->capture_default_str();
  swp->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  swp->add_option("--out", out, "Output file (default stdout)");
  swp->add_option("--threads", threads, "Worker threads (0 = all cores)");
  data.add_to(swp);

  auto* cal = app.add_subcommand("calibrate", "Fit node parameters to overhead targets");
  std::vector<double> targets{8.8, 5.5, 9.8};
  std::size_t max_solves = 200;
  std::string cal_size = "256x128";
  cal->add_option("--node", node)->capture_default_str();
  cal->add_option("--size", cal_size)->capture_default_str();
  cal->add_option("--mode", mode)->check(CLI::IsMember(modes))->capture_default_str();
  cal->add_option("--targets", targets, "current drop, delay and power percentages")
      ->expected(3)
      ->delimiter(',')
      ->capture_default_str();
  cal->add_option("--max-solves", max_solves)->capture_default_str();
  cal->add_option("--out", out, "Write the fitted node table here");
  data.add_to(cal);

  auto* atk = app.add_subcommand("attack", "White-box extraction against a seeded array");
  std::size_t probes = 64;
  double rate = 1e12;
  atk->add_option("--node", node)->capture_default_str();
  atk->add_option("--size", size)->capture_default_str();
  atk->add_option("--mode", mode)->check(CLI::IsMember(modes))->capture_default_str();
  atk->add_option("--probes", probes)->capture_default_str();
  atk->add_option("--rate", rate, "Brute-force keys per second")->capture_default_str();

  auto* wm = app.add_subcommand("watermark", "Embed or verify a watermark");
  wm->require_subcommand(1);
  wm->fallthrough();
  WatermarkArgs wa;
  auto* emb = wm->add_subcommand("embed", "Embed a watermark and save array and spec");
  emb->add_option("--node", wa.node)->capture_default_str();
  emb->add_option("--size", wa.size)->capture_default_str();
  emb->add_option("--array", wa.array_in, "Start from this array CSV instead");
  emb->add_option("--key", wa.key_file, "Permutor key file for the seeded array");
  emb->add_option("--wm-seed", wa.wm_seed)->capture_default_str();
  emb->add_option("--placement", wa.placement)
      ->check(CLI::IsMember({"end", "begin", "interleaved"}))
      ->capture_default_str();
  emb->add_option("--backend", wa.backend)
      ->check(CLI::IsMember({"ideal", "parasitic"}))
      ->capture_default_str();
  emb->add_option("--out-array", wa.array_out);
  emb->add_option("--out-spec", wa.spec_out);
  auto* ver = wm->add_subcommand("verify", "Check an array against a saved watermark");
  ver->add_option("--node", wa.node)->capture_default_str();
  ver->add_option("--array", wa.array_in)->required();
  ver->add_option("--spec", wa.spec_in)->required();

  auto* key = app.add_subcommand("keygen", "Generate a permutor key");
  std::size_t rows = 128;
  key->add_option("--rows", rows)->capture_default_str();
  key->add_option("--out", out, "Also write the key to this file");

  auto* rep = app.add_subcommand("report", "Convert or summarise a sweep report");
  std::string in, rep_format = "summary";
  rep->add_option("--in", in, "Report CSV")->required();
  rep->add_option("--format", rep_format)
      ->check(CLI::IsMember({"csv", "json", "summary"}))
      ->capture_default_str();
  rep->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json({{"error", "usage"}, {"message", e.what()}}).dump() << '\n';
    return 2;
  }

  try {
    if (*sim) cmd_simulate(common, node, size, mode, data, currents);
    else if (*swp) cmd_sweep(common, nodes_list, sizes, configs, data, threads, format, out);
    else if (*cal) cmd_calibrate(common, node, cal_size, mode, targets, max_solves, data, out);
    else if (*atk) cmd_attack(common, node, size, mode, probes, rate);
    else if (*emb) cmd_watermark_embed(common, wa);
    else if (*ver) cmd_watermark_verify(common, wa);
    else if (*key) cmd_keygen(common, rows, out);
    else if (*rep) cmd_report(in, rep_format, out);
  } catch (const Failure& f) {
    std::cerr << json({{"error", f.status}, {"message", f.message}}).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json({{"error", "internal"}, {"message", e.what()}}).dump() << '\n';
    return 1;
  }
  return 0;
}
