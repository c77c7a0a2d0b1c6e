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
#ifndef XBARSEC_XBARSEC_H
#define XBARSEC_XBARSEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(XBARSEC_BUILDING)
#define XBS_API __attribute__((visibility("default")))
#else
#define XBS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; details of the last failure on the
 * calling thread are available from xbs_last_error(). */
typedef enum xbs_status {
  XBS_OK = 0,
  XBS_ERR_INVALID_ARGUMENT = 1,
  XBS_ERR_SHAPE = 2,
  XBS_ERR_LENGTH = 3,
  XBS_ERR_RANGE = 4,
  XBS_ERR_LOOKUP = 5,
  XBS_ERR_FORMAT = 6,
  XBS_ERR_IO = 7,
  XBS_ERR_STATE = 8,
  XBS_ERR_SOLVER = 9,
  XBS_ERR_CALIBRATION = 10,
  XBS_ERR_BUFFER = 11, /* output buffer too small; *needed says how much */
  XBS_ERR_INTERNAL = 12
} xbs_status;

XBS_API const char* xbs_version(void);
XBS_API const char* xbs_status_name(xbs_status status);
/* Message of the last failure on this thread, "" if none. */
XBS_API const char* xbs_last_error(void);

/* ---- node parameter table ---------------------------------------------- */

typedef struct xbs_nodes xbs_nodes;

XBS_API xbs_status xbs_nodes_create(xbs_nodes** out);
/* INI overrides; on failure the table is unchanged. */
XBS_API xbs_status xbs_nodes_load(xbs_nodes* nodes, const char* path);
XBS_API xbs_status xbs_nodes_save(const xbs_nodes* nodes, const char* path);
XBS_API xbs_status xbs_nodes_get(const xbs_nodes* nodes, const char* node, const char* field,
                                 double* out);
XBS_API xbs_status xbs_nodes_set(xbs_nodes* nodes, const char* node, const char* field,
                                 double value);
XBS_API void xbs_nodes_destroy(xbs_nodes* nodes);

/* ---- permutor keys ------------------------------------------------------ */

typedef struct xbs_key xbs_key;

XBS_API xbs_status xbs_key_generate(size_t rows, uint64_t seed, xbs_key** out);
XBS_API xbs_status xbs_key_parse(const char* text, xbs_key** out);
/* Writes the text form including the terminating NUL. */
XBS_API xbs_status xbs_key_to_string(const xbs_key* key, char* buf, size_t cap, size_t* needed);
XBS_API size_t xbs_key_rows(const xbs_key* key);
XBS_API void xbs_key_destroy(xbs_key* key);

XBS_API double xbs_key_space_bits(size_t rows);
XBS_API size_t xbs_permutor_transistors(size_t rows);
/* Percent of the 1T1R array's transistor count. */
XBS_API double xbs_transistor_overhead(size_t rows, size_t cols);

/* ---- arrays ------------------------------------------------------------- */

typedef struct xbs_array xbs_array;

/* weights: rows*cols row-major values in [0,1]. */
XBS_API xbs_status xbs_array_program(const xbs_nodes* nodes, const char* node, size_t rows,
                                     size_t cols, const double* weights, xbs_array** out);
/* Seeded experiment array; config is baseline|permutor|watermark|both. */
XBS_API xbs_status xbs_array_experiment(const xbs_nodes* nodes, const char* node, size_t rows,
                                        size_t cols, const char* config, uint64_t seed,
                                        xbs_array** out);
XBS_API xbs_status xbs_array_load_csv(const xbs_nodes* nodes, const char* path, xbs_array** out);
XBS_API xbs_status xbs_array_save_csv(const xbs_array* array, const char* path);
XBS_API xbs_status xbs_array_attach_key(const xbs_array* array, const xbs_key* key,
                                        xbs_array** out);
XBS_API xbs_status xbs_array_set_cell(const xbs_array* array, size_t row, size_t col, double g,
                                      xbs_array** out);
XBS_API xbs_status xbs_array_shape(const xbs_array* array, size_t* rows, size_t* data_cols,
                                   size_t* wm_cols);
/* Raw physical conductances, rows*(data_cols+wm_cols) values. */
XBS_API xbs_status xbs_array_conductances(const xbs_array* array, double* out, size_t cap);
/* Parasitic-free column currents over all physical columns. */
XBS_API xbs_status xbs_array_ideal_mvm(const xbs_array* array, const double* v, size_t n,
                                       double* out, size_t cap);
XBS_API void xbs_array_destroy(xbs_array* array);

/* ---- simulation --------------------------------------------------------- */

typedef struct xbs_sim_summary {
  double mean_current_a; /* over data columns */
  double delay_s;
  double power_w;
  size_t total_cols;
} xbs_sim_summary;

/* inputs: batch*rows logical voltages. currents may be NULL; otherwise it
 * receives total_cols batch-mean currents (cap must allow that). */
XBS_API xbs_status xbs_simulate(const xbs_array* array, const double* inputs, size_t batch,
                                double* currents, size_t cap, xbs_sim_summary* out);

typedef struct xbs_dataset {
  const char* kind; /* uniform|mnist|lora|csv; NULL means uniform */
  const char* path; /* IDX images or CSV samples */
  size_t batch;
  size_t offset;
  int spreading_factor;
  double snr_db; /* NaN for a noiseless stream */
} xbs_dataset;

XBS_API void xbs_dataset_defaults(xbs_dataset* d);

/* Normalised input batch for the given row count; out holds batch*rows. */
XBS_API xbs_status xbs_prepare_inputs(const xbs_dataset* d, size_t rows, uint64_t seed,
                                      double* out, size_t cap, size_t* count);

/* One experiment cell, simulated on the dataset batch. */
XBS_API xbs_status xbs_run_config(const xbs_nodes* nodes, const char* node, size_t rows,
                                  size_t cols, const char* config, uint64_t seed,
                                  const xbs_dataset* d, double* currents, size_t cap,
                                  xbs_sim_summary* out);

/* ---- watermark ---------------------------------------------------------- */

typedef struct xbs_watermark xbs_watermark;

/* placement is end|begin|interleaved. */
XBS_API xbs_status xbs_watermark_create(const xbs_array* target, uint64_t seed,
                                        const char* placement, xbs_watermark** out);
XBS_API xbs_status xbs_watermark_embed(const xbs_array* array, const xbs_watermark* wm,
                                       xbs_array** out);
/* Re-signs against a freshly embedded array with backend ideal|parasitic. */
XBS_API xbs_status xbs_watermark_sign(xbs_watermark* wm, const xbs_array* embedded,
                                      const char* backend);
XBS_API xbs_status xbs_watermark_verify(const xbs_array* array, const xbs_watermark* wm,
                                        int* pass, double* worst_deviation);
XBS_API xbs_status xbs_watermark_save(const xbs_watermark* wm, const char* path);
XBS_API xbs_status xbs_watermark_load(const xbs_nodes* nodes, const char* node, const char* path,
                                      xbs_watermark** out);
/* KS statistic and its 5% critical value for k random probes. */
XBS_API xbs_status xbs_watermark_camouflage(const xbs_array* array, const xbs_watermark* wm,
                                            size_t probes, uint64_t seed, double* statistic,
                                            double* critical);
XBS_API void xbs_watermark_destroy(xbs_watermark* wm);

/* ---- adversary ---------------------------------------------------------- */

typedef struct xbs_attack_report {
  double row_placement_accuracy;
  double frobenius_error;
  double clone_output_mse;
  double key_space_bits;
  double brute_force_log10_s;
} xbs_attack_report;

/* White-box extraction of a seeded experiment array; probes random inputs,
 * keys_per_second sets the brute-force estimate. */
XBS_API xbs_status xbs_attack(const xbs_nodes* nodes, const char* node, size_t rows, size_t cols,
                              const char* config, uint64_t seed, size_t probes,
                              double keys_per_second, xbs_attack_report* out);

/* ---- sweeps and reports ------------------------------------------------- */

typedef struct xbs_grid {
  const char* nodes;   /* comma list, e.g. "45nm,22nm,7nm" */
  const char* sizes;   /* comma list of RxC, e.g. "10x10,128x10,256x128" */
  const char* configs; /* comma list of configs */
  uint64_t seed;
  xbs_dataset dataset;
  unsigned threads; /* 0 = all cores */
} xbs_grid;

XBS_API void xbs_grid_defaults(xbs_grid* grid);

typedef struct xbs_report xbs_report;

typedef struct xbs_report_row {
  char node[32];
  size_t rows;
  size_t cols;
  char config[16];
  double current_a;
  double delay_s;
  double power_w;
  double current_drop_pct;
  double delay_inc_pct;
  double power_inc_pct;
} xbs_report_row;

XBS_API xbs_status xbs_sweep(const xbs_nodes* nodes, const xbs_grid* grid, xbs_report** out);
XBS_API xbs_status xbs_report_load_csv(const char* path, xbs_report** out);
XBS_API size_t xbs_report_size(const xbs_report* report);
XBS_API xbs_status xbs_report_row_at(const xbs_report* report, size_t index, xbs_report_row* out);
/* format is csv|json. */
XBS_API xbs_status xbs_report_write(const xbs_report* report, const char* format,
                                    const char* path);
XBS_API xbs_status xbs_report_to_string(const xbs_report* report, const char* format, char* buf,
                                        size_t cap, size_t* needed);
XBS_API void xbs_report_destroy(xbs_report* report);

/* ---- calibration -------------------------------------------------------- */

typedef struct xbs_calibration_options {
  const char* node; /* reference node, fitted then transferred */
  size_t rows;
  size_t cols;
  const char* config;
  uint64_t seed;
  double target_current_drop_pct;
  double target_delay_inc_pct;
  double target_power_inc_pct;
  size_t max_solves;
  xbs_dataset dataset;
} xbs_calibration_options;

typedef struct xbs_calibration_result {
  double current_drop_pct;
  double delay_inc_pct;
  double power_inc_pct;
  double residual;
  size_t iterations;
  size_t solves;
  double r_switch;
  double r_driver;
  double p_switch;
  double p_wm_col;
} xbs_calibration_result;

XBS_API void xbs_calibration_defaults(xbs_calibration_options* opt);

/* Fits the reference node and, on success, replaces every node of the table
 * with the transferred parameters. On XBS_ERR_CALIBRATION the result holds
 * the best point found and the table is unchanged. */
XBS_API xbs_status xbs_calibrate(xbs_nodes* nodes, const xbs_calibration_options* opt,
                                 xbs_calibration_result* out);

#ifdef __cplusplus
}
#endif

#endif /* XBARSEC_XBARSEC_H */
