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
#include <span>
#include <string>
#include <vector>

#include "xbarsec/matrix.hpp"

namespace xbarsec {

/// Secret key of the input permutor: one sub-key in [0,5] per complete
/// triplet of rows. Rows beyond the last complete triplet pass through.
struct PermKey {
  std::size_t rows = 0;
  std::vector<std::uint8_t> triplet_keys;

  /// Throws Error(Range) or Error(Shape) when the invariants do not hold.
  void validate() const;
  bool operator==(const PermKey&) const = default;
};

/// mapping[i] is the physical row driven when logical input i is selected.
struct RowPermutation {
  std::vector<std::size_t> mapping;

  bool is_identity() const;
  RowPermutation inverse() const;
  bool operator==(const RowPermutation&) const = default;
};

/// Number of complete triplets for an M-row array.
constexpr std::size_t triplet_count(std::size_t rows) { return rows / 3; }

PermKey generate_key(std::size_t rows, std::uint64_t seed);

/// Sub-key enumeration of S3 (positions within the triplet):
/// 0 identity, 1 (01), 2 (02), 3 (12), 4 (012), 5 (021).
RowPermutation key_to_permutation(const PermKey& key);

/// out[mapping[i]] = v[i].
std::vector<double> apply_permutor(std::span<const double> v, const PermKey& key);
std::vector<double> apply_permutation(std::span<const double> v, const RowPermutation& perm);

/// Physical storage order: output row mapping[i] holds input row i.
Matrix store_permuted(const Matrix& weights, const PermKey& key);
Matrix permute_rows(const Matrix& m, const RowPermutation& perm);

/// floor(M/3) * log2(6).
double key_space_bits(std::size_t rows);

/// 9 pass transistors per triplet plus one path-matching transistor per
/// leftover row.
std::size_t permutor_transistor_count(std::size_t rows);

/// Permutor transistors over the M*N transistors of the 1T1R array.
double transistor_overhead(std::size_t rows, std::size_t cols);

/// "<rows>:<hex>", one hex digit per triplet sub-key.
std::string key_to_string(const PermKey& key);
PermKey key_from_string(const std::string& text);

}  // namespace xbarsec
