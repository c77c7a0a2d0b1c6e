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
#include "xbarsec/adversary.hpp"

#include <cmath>

#include "xbarsec/errors.hpp"
#include "xbarsec/permutor.hpp"

namespace xbarsec {

CrossbarArray extract_and_clone(const CrossbarArray& array) {
  return CrossbarArray::from_conductances(array.read_raw_conductances(), {}, array.node(),
                                          array.device());
}

ExtractionReport extraction_fidelity(const Matrix& original_weights, const CrossbarArray& clone,
                                     const std::vector<std::vector<double>>& probes) {
  const auto& stolen = clone.read_raw_conductances();
  if (stolen.rows != original_weights.rows || stolen.cols != original_weights.cols) {
    throw Error(ErrorKind::Shape, "clone and original grids differ in shape");
  }
  ExtractionReport rep;

  std::size_t placed = 0;
  for (std::size_t i = 0; i < stolen.rows; ++i) {
    auto a = stolen.row(i);
    auto b = original_weights.row(i);
    if (std::equal(a.begin(), a.end(), b.begin())) ++placed;
  }
  rep.row_placement_accuracy = static_cast<double>(placed) / static_cast<double>(stolen.rows);

  double diff = 0.0, norm = 0.0;
  for (std::size_t k = 0; k < stolen.data.size(); ++k) {
    const double d = stolen.data[k] - original_weights.data[k];
    diff += d * d;
    norm += original_weights.data[k] * original_weights.data[k];
  }
  rep.frobenius_error = norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);

  if (!probes.empty()) {
    double sq = 0.0;
    std::size_t count = 0;
    for (const auto& v : probes) {
      if (v.size() != stolen.rows) throw Error(ErrorKind::Shape, "probe length != rows");
      const auto got = clone.ideal_mvm(v);
      for (std::size_t j = 0; j < stolen.cols; ++j) {
        double expect = 0.0;
        for (std::size_t i = 0; i < stolen.rows; ++i) expect += original_weights(i, j) * v[i];
        const double e = got[j] - expect;
        sq += e * e;
        ++count;
      }
    }
    rep.clone_output_mse = sq / static_cast<double>(count);
  }
  return rep;
}

double brute_force_cost_log10(std::size_t rows, double keys_per_second) {
  if (!(keys_per_second > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "key rate must be positive");
  }
  return static_cast<double>(triplet_count(rows)) * std::log10(6.0) - std::log10(2.0) -
         std::log10(keys_per_second);
}

double brute_force_cost(std::size_t rows, double keys_per_second) {
  const double log10_cost = brute_force_cost_log10(rows, keys_per_second);
  // 6^20 < 2^53: small key spaces are counted exactly.
  if (triplet_count(rows) <= 20) {
    double keys = 1.0;
    for (std::size_t t = 0; t < triplet_count(rows); ++t) keys *= 6.0;
    return keys / (2.0 * keys_per_second);
  }
  return std::pow(10.0, log10_cost);
}

}  // namespace xbarsec
