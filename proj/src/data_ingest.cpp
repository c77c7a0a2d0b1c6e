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
#include "xbarsec/data_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "xbarsec/errors.hpp"
#include "xbarsec/random.hpp"

namespace xbarsec {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  out.push_back(static_cast<std::uint8_t>(x >> 24));
  out.push_back(static_cast<std::uint8_t>(x >> 16));
  out.push_back(static_cast<std::uint8_t>(x >> 8));
  out.push_back(static_cast<std::uint8_t>(x));
}

std::vector<double> min_max(std::vector<double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double a = *lo, b = *hi;
  if (!(b > a)) {
    std::fill(x.begin(), x.end(), 0.5);
    return x;
  }
  for (auto& v : x) v = (v - a) / (b - a);
  return x;
}

}  // namespace

std::size_t IdxTensor::item_size() const {
  std::size_t n = 1;
  for (std::size_t k = 1; k < dims.size(); ++k) n *= dims[k];
  return n;
}

std::span<const std::uint8_t> IdxTensor::item(std::size_t k) const {
  if (k >= items()) throw Error(ErrorKind::Range, "IDX item index out of range");
  const auto n = item_size();
  return {data.data() + k * n, n};
}

IdxTensor load_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorKind::Length, "IDX header truncated");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxImagesMagic && magic != kIdxLabelsMagic) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", magic);
    throw Error(ErrorKind::Format, std::string("unsupported IDX magic ") + buf);
  }
  const std::size_t rank = magic & 0xff;
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header) throw Error(ErrorKind::Length, "IDX dimension header truncated");
  IdxTensor t;
  std::size_t payload = 1;
  for (std::size_t k = 0; k < rank; ++k) {
    t.dims.push_back(read_be32(bytes, 4 + 4 * k));
    payload *= t.dims.back();
  }
  if (bytes.size() - header < payload) {
    throw Error(ErrorKind::Length, "IDX payload truncated: expected " + std::to_string(payload) +
                                       " bytes, have " + std::to_string(bytes.size() - header));
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header),
                bytes.begin() + static_cast<std::ptrdiff_t>(header + payload));
  return t;
}

IdxTensor load_idx_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_idx(bytes);
}

std::vector<std::uint8_t> write_idx(const IdxTensor& tensor) {
  if (tensor.dims.size() != 1 && tensor.dims.size() != 3) {
    throw Error(ErrorKind::Shape, "only rank-1 and rank-3 IDX tensors are supported");
  }
  std::size_t payload = 1;
  for (auto d : tensor.dims) payload *= d;
  if (payload != tensor.data.size()) throw Error(ErrorKind::Shape, "IDX dims do not match data");
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * tensor.dims.size() + payload);
  write_be32(out, tensor.dims.size() == 3 ? kIdxImagesMagic : kIdxLabelsMagic);
  for (auto d : tensor.dims) write_be32(out, d);
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

std::vector<double> resample_linear(std::span<const double> x, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "resample target must be >= 1");
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "cannot resample an empty signal");
  if (x.size() == n) return {x.begin(), x.end()};
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = x[0];
    return out;
  }
  const double span = static_cast<double>(x.size() - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double pos = static_cast<double>(k) * span / static_cast<double>(n - 1);
    const auto lo = std::min(static_cast<std::size_t>(pos), x.size() - 1);
    const auto hi = std::min(lo + 1, x.size() - 1);
    const double t = pos - static_cast<double>(lo);
    out[k] = (1.0 - t) * x[lo] + t * x[hi];
  }
  out.back() = x.back();
  return out;
}

std::vector<double> resample_flatten(std::span<const std::uint8_t> image, std::size_t target_rows) {
  std::vector<double> flat(image.size());
  std::transform(image.begin(), image.end(), flat.begin(),
                 [](std::uint8_t b) { return static_cast<double>(b) / 255.0; });
  return resample_linear(flat, target_rows);
}

std::vector<double> normalize_to_voltage(std::span<const double> vec, double v_read) {
  std::vector<double> out(vec.size());
  for (std::size_t i = 0; i < vec.size(); ++i) {
    if (!(vec[i] >= 0.0 && vec[i] <= 1.0)) {
      throw Error(ErrorKind::Range, "entry " + std::to_string(i) + " outside [0,1]");
    }
    out[i] = vec[i] * v_read;
  }
  return out;
}

void ChirpSpec::validate() const {
  if (spreading_factor < 5 || spreading_factor > 12) {
    throw Error(ErrorKind::Range, "spreading factor must be in [5,12]");
  }
  const std::uint32_t n = 1u << spreading_factor;
  for (auto s : symbols) {
    if (s >= n) throw Error(ErrorKind::Range, "symbol " + std::to_string(s) + " >= 2^SF");
  }
}

std::vector<std::complex<double>> gen_lora_chirps(const ChirpSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n_s = std::size_t{1} << spec.spreading_factor;
  const double n_sd = static_cast<double>(n_s);
  std::vector<std::complex<double>> out;
  out.reserve(n_s * spec.symbols.size());
  for (auto s : spec.symbols) {
    for (std::size_t n = 0; n < n_s; ++n) {
      const double nd = static_cast<double>(n);
      double cycles = nd * nd / (2.0 * n_sd) + nd * (static_cast<double>(s) / n_sd - 0.5);
      cycles -= std::floor(cycles);  // keep the argument small
      out.push_back(std::polar(1.0, 2.0 * std::numbers::pi * cycles));
    }
  }
  if (spec.snr_db) {
    Rng rng(seed);
    const double sigma = std::sqrt(std::pow(10.0, -*spec.snr_db / 10.0) / 2.0);
    for (auto& x : out) x += std::complex<double>(sigma * rng.normal(), sigma * rng.normal());
  }
  return out;
}

std::vector<double> rf_features(std::span<const std::complex<double>> iq, std::size_t target_rows) {
  if (iq.empty()) throw Error(ErrorKind::InvalidArgument, "empty IQ stream");
  std::vector<double> re(iq.size());
  std::transform(iq.begin(), iq.end(), re.begin(), [](auto z) { return z.real(); });
  return resample_linear(min_max(std::move(re)), target_rows);
}

SampleBatch mnist_batch(const IdxTensor& images, const IdxTensor* labels, std::size_t target_rows,
                        std::size_t count, std::size_t offset) {
  if (images.dims.size() != 3) throw Error(ErrorKind::Shape, "MNIST images must be rank 3");
  if (offset + count > images.items()) {
    throw Error(ErrorKind::Range, "requested " + std::to_string(count) + " images from offset " +
                                      std::to_string(offset) + ", file has " +
                                      std::to_string(images.items()));
  }
  SampleBatch batch;
  batch.source = "mnist";
  for (std::size_t k = offset; k < offset + count; ++k) {
    batch.vectors.push_back(resample_flatten(images.item(k), target_rows));
    if (labels) batch.labels.push_back(labels->item(k)[0]);
  }
  return batch;
}

SampleBatch lora_batch(std::size_t target_rows, std::size_t count, std::uint64_t seed,
                       int spreading_factor, std::size_t symbols_per_frame,
                       std::optional<double> snr_db) {
  SampleBatch batch;
  batch.source = "lora";
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    ChirpSpec spec;
    spec.spreading_factor = spreading_factor;
    spec.snr_db = snr_db;
    for (std::size_t s = 0; s < symbols_per_frame; ++s) {
      spec.symbols.push_back(
          static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << spreading_factor)));
    }
    batch.labels.push_back(static_cast<int>(spec.symbols.front()));
    batch.vectors.push_back(rf_features(gen_lora_chirps(spec, rng.next()), target_rows));
  }
  return batch;
}

SampleBatch uniform_batch(std::size_t target_rows, std::size_t count, std::uint64_t seed) {
  SampleBatch batch;
  batch.source = "uniform";
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> v(target_rows);
    for (auto& x : v) x = rng.uniform();
    batch.vectors.push_back(std::move(v));
  }
  return batch;
}

SampleBatch csv_batch(const std::string& text, std::size_t target_rows) {
  SampleBatch batch;
  batch.source = "csv";
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> sample;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || !std::isfinite(x)) {
        throw Error(ErrorKind::Format, "line " + std::to_string(line_no) + ": bad value '" + cell + "'");
      }
      sample.push_back(x);
    }
    batch.vectors.push_back(resample_linear(min_max(std::move(sample)), target_rows));
  }
  if (batch.vectors.empty()) throw Error(ErrorKind::Format, "CSV contains no samples");
  return batch;
}

SampleBatch csv_batch_file(const std::string& path, std::size_t target_rows) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return csv_batch(ss.str(), target_rows);
}

}  // namespace xbarsec
