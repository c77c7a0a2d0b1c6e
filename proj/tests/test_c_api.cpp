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
// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "xbarsec/xbarsec.h"

namespace {

std::string tmp(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

struct Nodes {
  xbs_nodes* p = nullptr;
  Nodes() { REQUIRE(xbs_nodes_create(&p) == XBS_OK); }
  ~Nodes() { xbs_nodes_destroy(p); }
};

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(xbs_status_name(XBS_OK)) == "ok");
  CHECK(std::string(xbs_status_name(XBS_ERR_LOOKUP)) == "lookup");
  CHECK(std::string(xbs_status_name(XBS_ERR_LENGTH)) == "length");
  CHECK(std::strlen(xbs_version()) > 0);
  Nodes n;
  double x = 0;
  CHECK(xbs_nodes_get(n.p, "3nm", "r_wire", &x) == XBS_ERR_LOOKUP);
  CHECK(std::string(xbs_last_error()).find("3nm") != std::string::npos);
  CHECK(xbs_nodes_get(nullptr, "45nm", "r_wire", &x) == XBS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("node table") {
  Nodes n;
  double x = 0;
  REQUIRE(xbs_nodes_get(n.p, "45nm", "r_switch", &x) == XBS_OK);
  CHECK(x == 1000.0);
  CHECK(xbs_nodes_set(n.p, "45nm", "r_switch", 1200.0) == XBS_OK);
  xbs_nodes_get(n.p, "45nm", "r_switch", &x);
  CHECK(x == 1200.0);
  CHECK(xbs_nodes_set(n.p, "45nm", "r_switch", -5.0) == XBS_ERR_RANGE);
  CHECK(xbs_nodes_get(n.p, "45nm", "bogus", &x) == XBS_ERR_LOOKUP);

  const auto path = tmp("xbs_capi_nodes.ini");
  REQUIRE(xbs_nodes_save(n.p, path.c_str()) == XBS_OK);
  Nodes m;
  REQUIRE(xbs_nodes_load(m.p, path.c_str()) == XBS_OK);
  xbs_nodes_get(m.p, "45nm", "r_switch", &x);
  CHECK(x == 1200.0);
  CHECK(xbs_nodes_load(m.p, "/nonexistent.ini") == XBS_ERR_IO);
  std::filesystem::remove(path);
}

TEST_CASE("keys") {
  xbs_key* k = nullptr;
  REQUIRE(xbs_key_generate(128, 5, &k) == XBS_OK);
  CHECK(xbs_key_rows(k) == 128);
  size_t need = 0;
  CHECK(xbs_key_to_string(k, nullptr, 0, &need) == XBS_ERR_BUFFER);
  CHECK(need == std::strlen("128:") + 42 + 1);
  std::vector<char> buf(need);
  REQUIRE(xbs_key_to_string(k, buf.data(), buf.size(), &need) == XBS_OK);
  xbs_key* back = nullptr;
  REQUIRE(xbs_key_parse(buf.data(), &back) == XBS_OK);
  std::vector<char> buf2(need);
  xbs_key_to_string(back, buf2.data(), buf2.size(), &need);
  CHECK(std::string(buf.data()) == std::string(buf2.data()));
  xbs_key_destroy(back);
  xbs_key_destroy(k);
  CHECK(xbs_key_parse("oops", &back) == XBS_ERR_FORMAT);

  CHECK(xbs_key_space_bits(128) == doctest::Approx(42 * std::log2(6.0)));
  CHECK(xbs_permutor_transistors(128) == 380);
  CHECK(xbs_transistor_overhead(256, 128) == doctest::Approx(766.0 / 32768.0));
}

TEST_CASE("arrays and the ideal product") {
  Nodes n;
  const double w[4] = {1.0, 0.0, 0.0, 1.0};
  xbs_array* a = nullptr;
  REQUIRE(xbs_array_program(n.p, "45nm", 2, 2, w, &a) == XBS_OK);
  size_t r = 0, c = 0, wm = 9;
  xbs_array_shape(a, &r, &c, &wm);
  CHECK(r == 2);
  CHECK(c == 2);
  CHECK(wm == 0);
  const double v[2] = {0.2, 0.2};
  double i[2] = {0, 0};
  REQUIRE(xbs_array_ideal_mvm(a, v, 2, i, 2) == XBS_OK);
  CHECK(i[0] == doctest::Approx(20.2e-6));
  CHECK(xbs_array_ideal_mvm(a, v, 1, i, 2) == XBS_ERR_SHAPE);
  CHECK(xbs_array_ideal_mvm(a, v, 2, i, 1) == XBS_ERR_SHAPE);

  xbs_key* k = nullptr;
  xbs_key_generate(2, 1, &k);
  xbs_array* s = nullptr;
  CHECK(xbs_array_attach_key(a, k, &s) == XBS_OK);
  xbs_array_destroy(s);
  xbs_key_destroy(k);

  const double bad[4] = {1.0, 2.0, 0.0, 1.0};
  xbs_array* b = nullptr;
  CHECK(xbs_array_program(n.p, "45nm", 2, 2, bad, &b) == XBS_ERR_RANGE);
  CHECK(b == nullptr);

  const auto path = tmp("xbs_capi_array.csv");
  REQUIRE(xbs_array_save_csv(a, path.c_str()) == XBS_OK);
  REQUIRE(xbs_array_load_csv(n.p, path.c_str(), &b) == XBS_OK);
  double g1[4], g2[4];
  xbs_array_conductances(a, g1, 4);
  xbs_array_conductances(b, g2, 4);
  CHECK(std::memcmp(g1, g2, sizeof g1) == 0);
  xbs_array_destroy(b);
  xbs_array_destroy(a);
  std::filesystem::remove(path);
}

TEST_CASE("simulation and configurations") {
  Nodes n;
  xbs_dataset d;
  xbs_dataset_defaults(&d);
  CHECK(d.batch == 8);
  CHECK(std::isnan(d.snr_db));
  std::vector<double> cur(12);
  xbs_sim_summary base{}, both{};
  REQUIRE(xbs_run_config(n.p, "45nm", 10, 10, "baseline", 1, &d, cur.data(), cur.size(), &base) == XBS_OK);
  REQUIRE(xbs_run_config(n.p, "45nm", 10, 10, "both", 1, &d, cur.data(), cur.size(), &both) == XBS_OK);
  CHECK(base.total_cols == 10);
  CHECK(both.total_cols == 12);
  CHECK(both.mean_current_a < base.mean_current_a);
  CHECK(both.delay_s > base.delay_s);
  CHECK(xbs_run_config(n.p, "45nm", 10, 10, "secure", 1, &d, cur.data(), cur.size(), &both) ==
        XBS_ERR_INVALID_ARGUMENT);

  size_t count = 0;
  std::vector<double> in(8 * 10);
  d.kind = "lora";
  REQUIRE(xbs_prepare_inputs(&d, 10, 3, in.data(), in.size(), &count) == XBS_OK);
  CHECK(count == 8);
  for (double x : in) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }

  xbs_array* a = nullptr;
  REQUIRE(xbs_array_experiment(n.p, "45nm", 10, 10, "baseline", 1, &a) == XBS_OK);
  for (auto& x : in) x *= 0.2;
  xbs_sim_summary s{};
  REQUIRE(xbs_simulate(a, in.data(), 8, cur.data(), cur.size(), &s) == XBS_OK);
  CHECK(s.power_w > 0.0);
  xbs_array_destroy(a);
}

TEST_CASE("watermarks") {
  Nodes n;
  xbs_array* a = nullptr;
  REQUIRE(xbs_array_experiment(n.p, "45nm", 10, 10, "baseline", 2, &a) == XBS_OK);
  xbs_watermark* w = nullptr;
  REQUIRE(xbs_watermark_create(a, 9, "end", &w) == XBS_OK);
  xbs_array* m = nullptr;
  REQUIRE(xbs_watermark_embed(a, w, &m) == XBS_OK);
  int pass = 0;
  double worst = 1.0;
  REQUIRE(xbs_watermark_verify(m, w, &pass, &worst) == XBS_OK);
  CHECK(pass == 1);
  CHECK(worst == 0.0);

  xbs_array* t = nullptr;
  REQUIRE(xbs_array_set_cell(m, 3, 10, 1e-6, &t) == XBS_OK);
  xbs_watermark_verify(t, w, &pass, &worst);
  CHECK(pass == 0);

  double d = 0, crit = 0;
  REQUIRE(xbs_watermark_camouflage(m, w, 10, 4, &d, &crit) == XBS_OK);
  CHECK(d >= 0.0);
  CHECK(crit > 0.0);

  REQUIRE(xbs_watermark_sign(w, m, "parasitic") == XBS_OK);
  const auto path = tmp("xbs_capi_wm.txt");
  REQUIRE(xbs_watermark_save(w, path.c_str()) == XBS_OK);
  xbs_watermark* back = nullptr;
  REQUIRE(xbs_watermark_load(n.p, "45nm", path.c_str(), &back) == XBS_OK);
  xbs_watermark_verify(m, back, &pass, &worst);
  CHECK(pass == 1);
  CHECK(xbs_watermark_embed(m, w, &t) == XBS_ERR_STATE);

  xbs_watermark_destroy(back);
  xbs_watermark_destroy(w);
  xbs_array_destroy(t);
  xbs_array_destroy(m);
  xbs_array_destroy(a);
  std::filesystem::remove(path);
}

TEST_CASE("attack metrics") {
  Nodes n;
  xbs_attack_report r{};
  REQUIRE(xbs_attack(n.p, "45nm", 128, 8, "permutor", 3, 16, 1e9, &r) == XBS_OK);
  CHECK(r.key_space_bits == doctest::Approx(108.57).epsilon(1e-4));
  CHECK(r.clone_output_mse > 0.0);
  CHECK(r.row_placement_accuracy < 1.0);
  CHECK(r.brute_force_log10_s == doctest::Approx(std::log10(std::pow(6.0, 42) / 2e9)));
  REQUIRE(xbs_attack(n.p, "45nm", 12, 8, "baseline", 3, 16, 1e9, &r) == XBS_OK);
  CHECK(r.row_placement_accuracy == 1.0);
  CHECK(r.clone_output_mse == 0.0);
  CHECK(r.key_space_bits == 0.0);
}

TEST_CASE("sweep and reports") {
  Nodes n;
  xbs_grid g;
  xbs_grid_defaults(&g);
  g.nodes = "45nm";
  g.sizes = "10x10,12x6";
  xbs_report* rep = nullptr;
  REQUIRE(xbs_sweep(n.p, &g, &rep) == XBS_OK);
  REQUIRE(xbs_report_size(rep) == 8);
  xbs_report_row row;
  REQUIRE(xbs_report_row_at(rep, 3, &row) == XBS_OK);
  CHECK(std::string(row.node) == "45nm");
  CHECK(std::string(row.config) == "both");
  CHECK(row.rows == 10);
  CHECK(xbs_report_row_at(rep, 8, &row) == XBS_ERR_RANGE);

  size_t need = 0;
  CHECK(xbs_report_to_string(rep, "csv", nullptr, 0, &need) == XBS_ERR_BUFFER);
  std::string text(need, '\0');
  REQUIRE(xbs_report_to_string(rep, "csv", text.data(), need, &need) == XBS_OK);
  CHECK(text.rfind("node,rows,cols,config,", 0) == 0);

  const auto path = tmp("xbs_capi_report.csv");
  REQUIRE(xbs_report_write(rep, "csv", path.c_str()) == XBS_OK);
  xbs_report* back = nullptr;
  REQUIRE(xbs_report_load_csv(path.c_str(), &back) == XBS_OK);
  CHECK(xbs_report_size(back) == 8);
  xbs_report_row a, b;
  for (size_t i = 0; i < 8; ++i) {
    xbs_report_row_at(rep, i, &a);
    xbs_report_row_at(back, i, &b);
    CHECK(a.current_drop_pct == b.current_drop_pct);
    CHECK(a.power_w == b.power_w);
  }
  CHECK(xbs_report_write(rep, "xml", path.c_str()) == XBS_ERR_INVALID_ARGUMENT);
  xbs_report_destroy(back);
  xbs_report_destroy(rep);
  std::filesystem::remove(path);

  g.sizes = "10by10";
  CHECK(xbs_sweep(n.p, &g, &rep) == XBS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("calibration through the C interface") {
  Nodes n;
  xbs_calibration_options o;
  xbs_calibration_defaults(&o);
  CHECK(o.rows == 256);
  CHECK(o.cols == 128);
  CHECK(o.target_current_drop_pct == 8.8);
  o.rows = 8;
  o.cols = 4;
  o.dataset.batch = 1;
  o.target_current_drop_pct = 0.01;
  o.target_delay_inc_pct = 90.0;
  o.target_power_inc_pct = 0.01;
  o.max_solves = 10;
  xbs_calibration_result r{};
  double before = 0, after = 0;
  xbs_nodes_get(n.p, "7nm", "r_switch", &before);
  CHECK(xbs_calibrate(n.p, &o, &r) == XBS_ERR_CALIBRATION);
  CHECK(r.residual > 0.5);
  CHECK(r.r_switch > 0.0);
  xbs_nodes_get(n.p, "7nm", "r_switch", &after);
  CHECK(after == before);
}
