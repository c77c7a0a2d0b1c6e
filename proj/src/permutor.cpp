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
#include "xbarsec/permutor.hpp"

#include <array>
#include <cmath>

#include "xbarsec/errors.hpp"
#include "xbarsec/random.hpp"

namespace xbarsec {

namespace {

// Image of positions 0,1,2 under each sub-key.
constexpr std::array<std::array<std::uint8_t, 3>, 6> kS3 = {{
    {0, 1, 2},  // identity
    {1, 0, 2},  // (01)
    {2, 1, 0},  // (02)
    {0, 2, 1},  // (12)
    {1, 2, 0},  // (012)
    {2, 0, 1},  // (021)
}};

}  // namespace

void PermKey::validate() const {
  if (rows == 0) throw Error(ErrorKind::Range, "key needs at least one row");
  if (triplet_keys.size() != triplet_count(rows)) {
    throw Error(ErrorKind::Shape, "key for " + std::to_string(rows) + " rows needs " +
                                      std::to_string(triplet_count(rows)) + " triplet keys, got " +
                                      std::to_string(triplet_keys.size()));
  }
  for (std::size_t t = 0; t < triplet_keys.size(); ++t) {
    if (triplet_keys[t] > 5) {
      throw Error(ErrorKind::Range, "triplet key " + std::to_string(t) + " is " +
                                        std::to_string(triplet_keys[t]) + ", must be in [0,5]");
    }
  }
}

bool RowPermutation::is_identity() const {
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (mapping[i] != i) return false;
  }
  return true;
}

RowPermutation RowPermutation::inverse() const {
  RowPermutation inv;
  inv.mapping.resize(mapping.size());
  for (std::size_t i = 0; i < mapping.size(); ++i) inv.mapping[mapping[i]] = i;
  return inv;
}

PermKey generate_key(std::size_t rows, std::uint64_t seed) {
  if (rows == 0) throw Error(ErrorKind::InvalidArgument, "key needs at least one row");
  Rng rng(seed);
  PermKey key;
  key.rows = rows;
  key.triplet_keys.resize(triplet_count(rows));
  for (auto& k : key.triplet_keys) k = static_cast<std::uint8_t>(rng.below(6));
  return key;
}

RowPermutation key_to_permutation(const PermKey& key) {
  key.validate();
  RowPermutation perm;
  perm.mapping.resize(key.rows);
  for (std::size_t i = 0; i < key.rows; ++i) perm.mapping[i] = i;
  for (std::size_t t = 0; t < key.triplet_keys.size(); ++t) {
    const auto& image = kS3[key.triplet_keys[t]];
    for (std::size_t k = 0; k < 3; ++k) perm.mapping[3 * t + k] = 3 * t + image[k];
  }
  return perm;
}

std::vector<double> apply_permutation(std::span<const double> v, const RowPermutation& perm) {
  if (v.size() != perm.mapping.size()) {
    throw Error(ErrorKind::Shape, "input length " + std::to_string(v.size()) +
                                      " does not match permutation length " +
                                      std::to_string(perm.mapping.size()));
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[perm.mapping[i]] = v[i];
  return out;
}

std::vector<double> apply_permutor(std::span<const double> v, const PermKey& key) {
  return apply_permutation(v, key_to_permutation(key));
}

Matrix permute_rows(const Matrix& m, const RowPermutation& perm) {
  if (m.rows != perm.mapping.size()) {
    throw Error(ErrorKind::Shape, "matrix has " + std::to_string(m.rows) +
                                      " rows, permutation has " +
                                      std::to_string(perm.mapping.size()));
  }
  Matrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    auto src = m.row(i);
    auto dst = out.row(perm.mapping[i]);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

Matrix store_permuted(const Matrix& weights, const PermKey& key) {
  return permute_rows(weights, key_to_permutation(key));
}

double key_space_bits(std::size_t rows) {
  return static_cast<double>(triplet_count(rows)) * std::log2(6.0);
}

std::size_t permutor_transistor_count(std::size_t rows) {
  return 9 * triplet_count(rows) + rows % 3;
}

double transistor_overhead(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::InvalidArgument, "array must be non-empty");
  return static_cast<double>(permutor_transistor_count(rows)) /
         static_cast<double>(rows * cols);
}

std::string key_to_string(const PermKey& key) {
  key.validate();
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = std::to_string(key.rows) + ":";
  for (auto k : key.triplet_keys) out.push_back(kHex[k]);
  return out;
}

PermKey key_from_string(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorKind::Format, "key must look like '<rows>:<hex>'");
  }
  PermKey key;
  for (std::size_t i = 0; i < colon; ++i) {
    if (text[i] < '0' || text[i] > '9') throw Error(ErrorKind::Format, "bad row count in key");
    key.rows = key.rows * 10 + static_cast<std::size_t>(text[i] - '0');
  }
  for (std::size_t i = colon + 1; i < text.size(); ++i) {
    const char c = text[i];
    int digit = -1;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    if (digit < 0) throw Error(ErrorKind::Format, std::string("bad hex digit '") + c + "' in key");
    key.triplet_keys.push_back(static_cast<std::uint8_t>(digit));
  }
  if (key.rows == 0) throw Error(ErrorKind::Format, "key row count must be positive");
  key.validate();
  return key;
}

}  // namespace xbarsec
