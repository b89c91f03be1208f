/*
 * Copyright 2026 The labalign Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "labalign/datagen.hpp"
#include "labalign/error.hpp"
#include "labalign/spectral.hpp"

namespace labalign {

using PixelMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale images flattened row-major, one per row of `pixels`, with
/// intensities in [0, max_value].
struct RawImageSet {
  PixelMatrix pixels;  // count x (height * width)
  std::vector<int> labels;
  Index height = 0;
  Index width = 0;
  double max_value = 255.0;

  Index count() const { return pixels.rows(); }
  /// Image i as a height x width grid.
  Matrix image(Index i) const;
};

/// Raised while reading IDX files.
class IdxFormatError : public DataError {
 public:
  enum class Kind { kBadMagic, kTruncated, kCountMismatch, kIo };
  IdxFormatError(Kind kind, const std::string& message)
      : DataError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Gzip-compressed files are decompressed transparently.
RawImageSet load_idx(const std::filesystem::path& images,
                     const std::filesystem::path& labels);

/// Writes raw IDX files; used to build fixtures and to export test data.
void write_idx(const std::filesystem::path& images,
               const std::filesystem::path& labels, const RawImageSet& set);

struct CsvMatrix {
  Matrix data;
  std::optional<Vector> labels;
  std::vector<std::string> header;  // feature names; empty without a header
};

/// Rectangular numeric CSV with an optional header row. A final header column
/// named "label" is split off as labels. Throws DataError on ragged rows or
/// non-numeric cells.
CsvMatrix load_matrix_csv(const std::filesystem::path& path);

/// Writes features (and labels, when given) with 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& data,
                      const std::optional<Vector>& labels = std::nullopt);

/// How pixel values in a USPS CSV map onto [0, 1].
enum class PixelRange { kAuto, kUnit, kSigned, kByte };

/// USPS images stored as CSV: 256 pixel columns (16x16, row-major) plus a
/// "label" column. Pixels are mapped to [0, 1]; kAuto picks kSigned when any
/// value is negative, kByte when any exceeds 1, kUnit otherwise.
RawImageSet load_usps_csv(const std::filesystem::path& path,
                          PixelRange range = PixelRange::kAuto);

/// Bilinear resampling with corner-aligned sample positions.
Matrix resize_bilinear(const Matrix& image, Index out_height, Index out_width);

/// Resizes every image of a set.
RawImageSet resize_set(const RawImageSet& set, Index out_height,
                       Index out_width);

/// Train and test splits of one digit dataset.
struct DigitCorpus {
  RawImageSet train;
  RawImageSet test;
};

/// MNIST from a directory holding the four standard IDX files
/// (train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte,
/// t10k-labels-idx1-ubyte), each optionally gzipped.
DigitCorpus load_mnist_dir(const std::filesystem::path& dir);

/// USPS from usps_train.csv and usps_test.csv in `dir`.
DigitCorpus load_usps_dir(const std::filesystem::path& dir,
                          PixelRange range = PixelRange::kAuto);

enum class Direction { kMnistToUsps, kUspsToMnist };

struct TaskSpec {
  int digit_lo = 0;
  int digit_hi = 1;
  double subsample_ratio = 1.0;  // fraction of digit_lo kept in the source
  Direction direction = Direction::kMnistToUsps;
  std::uint64_t seed = 0;
  Index validation_size = 100;

  void validate() const;
};

/// Source/target designs for one binary digit task. Target labels are kept
/// for validation and final evaluation only.
struct PreparedTask {
  LabeledDomain source;
  DesignMatrix target;
  Vector target_labels;
  std::vector<Index> validation;  // indices into the target rows
  std::vector<Index> evaluation;
  Index source_lo_count = 0;
  Index source_hi_count = 0;
};

/// Two-digit subset of one split, pixels scaled to [0, 1], bias appended,
/// labels {digit_lo -> -1, digit_hi -> +1}. Throws DataError when a digit is
/// absent.
LabeledDomain binary_design(const RawImageSet& set, int digit_lo, int digit_hi);

/// Source = train split of the source dataset with digit_lo subsampled,
/// target = test split of the other dataset. USPS images are resized to the
/// MNIST grid first.
PreparedTask prepare_binary_task(const DigitCorpus& mnist,
                                 const DigitCorpus& usps, const TaskSpec& spec);

}  // namespace labalign
