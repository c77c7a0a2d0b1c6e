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
/* Compiles as C11 against the public header and runs a tiny session. */
#include <math.h>
#include <stdio.h>

#include "xbarsec/xbarsec.h"

int main(void) {
  xbs_nodes* nodes = NULL;
  xbs_array* array = NULL;
  xbs_sim_summary sum;
  xbs_dataset d;
  double currents[12];
  int failures = 0;

  if (xbs_nodes_create(&nodes) != XBS_OK) return 1;
  xbs_dataset_defaults(&d);
  if (xbs_run_config(nodes, "45nm", 10, 10, "both", 1, &d, currents, 12, &sum) != XBS_OK) {
    fprintf(stderr, "run_config: %s\n", xbs_last_error());
    ++failures;
  } else if (sum.total_cols != 12 || !(sum.mean_current_a > 0.0)) {
    ++failures;
  }
  if (fabs(xbs_key_space_bits(128) - 108.5684) > 0.001) ++failures;
  if (xbs_array_experiment(nodes, "3nm", 4, 4, "baseline", 1, &array) != XBS_ERR_LOOKUP) ++failures;
  if (array != NULL) ++failures;

  xbs_nodes_destroy(nodes);
  printf("c smoke: %s\n", failures ? "FAIL" : "ok");
  return failures ? 1 : 0;
}
