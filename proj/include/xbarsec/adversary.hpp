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
#include <vector>

#include "xbarsec/crossbar.hpp"
#include "xbarsec/matrix.hpp"

namespace xbarsec {

/// Outcome of a white-box extraction attempt.
struct ExtractionReport {
  double row_placement_accuracy = 0.0;  // fraction of rows at their logical position
  double frobenius_error = 0.0;         // ||W_clone - W_true||_F / ||W_true||_F
  double clone_output_mse = 0.0;        // A^2, ideal MVM over the probe workload
};

/// Copies the physically stored grid into an unsecured array. The attacker
/// has no key, so the clone uses physical row order as its logical order.
CrossbarArray extract_and_clone(const CrossbarArray& array);

/// original_weights is the true logical conductance grid (same shape as the
/// clone's raw grid); probes are logical input vectors in volts.
ExtractionReport extraction_fidelity(const Matrix& original_weights, const CrossbarArray& clone,
                                     const std::vector<std::vector<double>>& probes);

/// Expected time to find the key by exhaustive search: 6^floor(M/3) / (2 rate).
/// Evaluated in log space; returns +inf only when the result exceeds double range.
double brute_force_cost(std::size_t rows, double keys_per_second);

/// log10 of brute_force_cost, finite for every row count.
double brute_force_cost_log10(std::size_t rows, double keys_per_second);

}  // namespace xbarsec
