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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xbarsec {

/// Unsigned-byte IDX tensor (MNIST images are rank 3, labels rank 1).
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t items() const { return dims.empty() ? 0 : dims[0]; }
  /// Bytes per item (product of the trailing dimensions).
  std::size_t item_size() const;
  std::span<const std::uint8_t> item(std::size_t k) const;
  bool operator==(const IdxTensor&) const = default;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

IdxTensor load_idx(std::span<const std::uint8_t> bytes);
IdxTensor load_idx_file(const std::string& path);
std::vector<std::uint8_t> write_idx(const IdxTensor& tensor);

/// Piecewise-linear resample to n points, endpoints preserved.
std::vector<double> resample_linear(std::span<const double> x, std::size_t n);

/// Row-major bytes scaled by 1/255 and resampled to target_rows.
std::vector<double> resample_flatten(std::span<const std::uint8_t> image, std::size_t target_rows);

/// v_i = vec_i * v_read; entries outside [0,1] throw Error(Range).
std::vector<double> normalize_to_voltage(std::span<const double> vec, double v_read);

struct ChirpSpec {
  int spreading_factor = 7;  // 5..12, 2^SF samples per symbol
  std::vector<std::uint32_t> symbols;
  std::optional<double> snr_db;  // none = noiseless

  void validate() const;
};

/// Baseband CSS chirps, symbols concatenated.
std::vector<std::complex<double>> gen_lora_chirps(const ChirpSpec& spec, std::uint64_t seed);

/// Real part, min-max normalised (constant streams map to 0.5), resampled.
std::vector<double> rf_features(std::span<const std::complex<double>> iq, std::size_t target_rows);

/// Normalised vectors ready to scale into input voltages.
struct SampleBatch {
  std::vector<std::vector<double>> vectors;
  std::vector<int> labels;
  std::string source;
};

/// First count images (after offset) of an IDX image tensor.
SampleBatch mnist_batch(const IdxTensor& images, const IdxTensor* labels, std::size_t target_rows,
                        std::size_t count, std::size_t offset = 0);

/// Random-symbol chirp frames, one frame of symbols_per_frame symbols per vector.
SampleBatch lora_batch(std::size_t target_rows, std::size_t count, std::uint64_t seed,
                       int spreading_factor = 7, std::size_t symbols_per_frame = 4,
                       std::optional<double> snr_db = std::nullopt);

/// Seeded uniform vectors in [0,1].
SampleBatch uniform_batch(std::size_t target_rows, std::size_t count, std::uint64_t seed);

/// One sample per line, comma-separated decimals. Each line is min-max
/// normalised and resampled like an RF stream.
SampleBatch csv_batch(const std::string& text, std::size_t target_rows);
SampleBatch csv_batch_file(const std::string& path, std::size_t target_rows);

}  // namespace xbarsec
