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
#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "xbarsec/crossbar.hpp"
#include "xbarsec/watermark.hpp"

using namespace xbarsec;
using oracle::error_kind;

namespace {

const TechNodeParams kNode = tech_node_params("45nm");

std::vector<std::vector<double>> sorted_rows(const Matrix& m) {
  std::vector<std::vector<double>> r;
  for (std::size_t i = 0; i < m.rows; ++i) r.emplace_back(m.row(i).begin(), m.row(i).end());
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

TEST_CASE("programming") {
  const MemristorParams d;
  const auto zero = CrossbarArray::program_weights(2, 2, Matrix(2, 2, 0.0), kNode);
  for (double g : zero.read_raw_conductances().data) CHECK(g == d.g_off);
  CHECK(zero.wm_cols() == 0);
  CHECK_FALSE(zero.has_permutor());

  Matrix eye(2, 2, 0.0);
  eye(0, 0) = eye(1, 1) = 1.0;
  const auto id = CrossbarArray::program_weights(2, 2, eye, kNode);
  CHECK(id.read_raw_conductances()(0, 0) == d.g_on);
  CHECK(id.read_raw_conductances()(0, 1) == d.g_off);

  CHECK(error_kind([] { CrossbarArray::program_weights(2, 2, Matrix(3, 2, 0.5), kNode); }) ==
        ErrorKind::Shape);
  Matrix bad(2, 2, 0.5);
  bad(1, 0) = 1.5;
  try {
    CrossbarArray::program_weights(2, 2, bad, kNode);
    FAIL("expected a range error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Range);
    CHECK(std::string(e.what()).find("(1,0)") != std::string::npos);
  }
}

TEST_CASE("ideal MVM examples") {
  auto node = kNode;
  node.v_read = 1.0;
  MemristorParams wide{1e-3, 1e-6, 1e-9};
  const auto one = CrossbarArray::from_conductances(Matrix(1, 1, 1e-3), {}, node, wide);
  CHECK(one.ideal_mvm(std::vector<double>{1.0})[0] == doctest::Approx(1e-3));

  Matrix g(2, 2);
  g(0, 0) = 100e-6;
  g(0, 1) = 1e-6;
  g(1, 0) = 1e-6;
  g(1, 1) = 100e-6;
  const auto two = CrossbarArray::from_conductances(g, {}, kNode);
  const auto i = two.ideal_mvm(std::vector<double>{0.2, 0.2});
  CHECK(i[0] == doctest::Approx(20.2e-6).epsilon(1e-12));
  CHECK(i[1] == doctest::Approx(20.2e-6).epsilon(1e-12));
  for (double x : two.ideal_mvm(std::vector<double>{0.0, 0.0})) CHECK(x == 0.0);

  CHECK(error_kind([&] { two.ideal_mvm(std::vector<double>{0.2}); }) == ErrorKind::Shape);
  CHECK(error_kind([&] { two.ideal_mvm(std::vector<double>{0.3, 0.0}); }) == ErrorKind::Range);
  CHECK(error_kind([&] { two.ideal_mvm(std::vector<double>{-0.1, 0.0}); }) == ErrorKind::Range);
}

TEST_CASE("ideal MVM matches a dense product") {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<std::size_t> dim(1, 32);
  for (int t = 0; t < 200; ++t) {
    const std::size_t r = dim(gen), c = dim(gen);
    const auto a = CrossbarArray::program_weights(r, c, oracle::random_weights(r, c, gen), kNode);
    const auto v = oracle::random_volts(r, kNode.v_read, gen);
    const auto want = oracle::mvm(a.read_raw_conductances(), v);
    const auto got = a.ideal_mvm(v);
    for (std::size_t j = 0; j < c; ++j) CHECK(oracle::rel_err(got[j], want[j]) <= 1e-12);
  }
}

TEST_CASE("ideal MVM is linear") {
  std::mt19937_64 gen(22);
  for (int t = 0; t < 50; ++t) {
    const auto a = CrossbarArray::program_weights(12, 7, oracle::random_weights(12, 7, gen), kNode);
    const auto v1 = oracle::random_volts(12, 0.2, gen);
    const auto v2 = oracle::random_volts(12, 0.2, gen);
    std::vector<double> s(12);
    for (std::size_t i = 0; i < 12; ++i) s[i] = v1[i] + v2[i];
    const auto i1 = a.ideal_mvm(v1), i2 = a.ideal_mvm(v2);
    const auto is = a.ideal_mvm(s, InputCheck::Unchecked);
    for (std::size_t j = 0; j < 7; ++j) CHECK(oracle::rel_err(is[j], i1[j] + i2[j]) <= 1e-12);
  }
}

TEST_CASE("permutor transparency") {
  std::mt19937_64 gen(23);
  for (int t = 0; t < 100; ++t) {
    const std::size_t r = 1 + gen() % 40, c = 1 + gen() % 12;
    const auto plain = CrossbarArray::program_weights(r, c, oracle::random_weights(r, c, gen), kNode);
    const auto key = generate_key(r, gen());
    const auto secured = plain.with_key(key);
    const auto v = oracle::random_volts(r, 0.2, gen);
    const auto a = plain.ideal_mvm(v), b = secured.ideal_mvm(v);
    for (std::size_t j = 0; j < c; ++j) CHECK(oracle::rel_err(b[j], a[j]) <= 1e-12);

    // Raw storage is the keyed row permutation of the plain grid.
    const auto perm = oracle::mapping(r, key.triplet_keys);
    const auto& raw = secured.read_raw_conductances();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        CHECK(raw(perm[i], j) == plain.read_raw_conductances()(i, j));
    CHECK(sorted_rows(raw) == sorted_rows(plain.read_raw_conductances()));
    CHECK(secured.logical_conductances() == plain.read_raw_conductances());
  }
  const auto a = CrossbarArray::program_weights(3, 1, Matrix(3, 1, 0.5), kNode);
  const auto k = generate_key(3, 1);
  CHECK(error_kind([&] { a.with_key(k).with_key(k); }) == ErrorKind::State);
  CHECK(error_kind([&] { a.with_key(generate_key(6, 1)); }) == ErrorKind::Shape);
}

TEST_CASE("watermark columns live in the grid") {
  std::mt19937_64 gen(24);
  const auto plain = CrossbarArray::program_weights(10, 10, oracle::random_weights(10, 10, gen), kNode);
  const auto spec = make_watermark(10, 10, 5, Placement::End, kNode);
  const auto marked = embed_watermark(plain, spec);
  CHECK(marked.total_cols() == 12);
  CHECK(marked.cols() == 10);
  CHECK(marked.watermark_columns() == std::vector<std::size_t>{10, 11});
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(marked.read_raw_conductances()(i, 10) == spec.pattern(i, 0));
    CHECK(marked.read_raw_conductances()(i, 11) == spec.pattern(i, 1));
  }
  CHECK(marked.data_columns() == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("cell edits and bounds") {
  const auto a = CrossbarArray::program_weights(2, 2, Matrix(2, 2, 0.5), kNode);
  const auto b = a.with_cell(1, 1, 1e-6);
  CHECK(b.read_raw_conductances()(1, 1) == 1e-6);
  CHECK(a.read_raw_conductances()(1, 1) != 1e-6);
  CHECK(error_kind([&] { a.with_cell(2, 0, 1e-6); }) == ErrorKind::Range);
  CHECK(error_kind([&] { a.with_cell(0, 0, 1e-3); }) == ErrorKind::Range);
  CHECK(error_kind([&] { CrossbarArray::from_conductances(Matrix(2, 2, 2e-4), {}, kNode); }) ==
        ErrorKind::Range);
  CHECK(error_kind([&] { CrossbarArray::from_conductances(Matrix(2, 2, 5e-5), {1, 1}, kNode); }) ==
        ErrorKind::InvalidArgument);
  CHECK(error_kind([&] { CrossbarArray::from_conductances(Matrix(2, 2, 5e-5), {0, 1}, kNode); }) ==
        ErrorKind::Shape);
}

TEST_CASE("array CSV round trip") {
  std::mt19937_64 gen(25);
  const auto plain = CrossbarArray::program_weights(6, 4, oracle::random_weights(6, 4, gen), kNode);
  const auto marked = embed_watermark(plain, make_watermark(6, 4, 3, Placement::Interleaved, kNode));
  const auto text = marked.to_csv();
  CHECK(csv_node_label(text) == "45nm");
  const auto back = CrossbarArray::from_csv(text, kNode);
  CHECK(back.read_raw_conductances() == marked.read_raw_conductances());
  CHECK(back.watermark_columns() == marked.watermark_columns());
  CHECK(error_kind([&] { CrossbarArray::from_csv("rows,cols\n1,1\n", kNode); }) == ErrorKind::Format);
  CHECK(error_kind([&] { CrossbarArray::from_csv(text.substr(0, text.size() / 2), kNode); }) ==
        ErrorKind::Format);
}
