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

#include "labalign/datasets.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "labalign/rng.hpp"

namespace labalign {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr Index kMnistSide = 28;
constexpr std::uint64_t kSubsampleStream = 11;
constexpr std::uint64_t kValidationStream = 12;

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<std::remove_pointer_t<gzFile>, GzCloser>;

// Reads plain or gzip-compressed files through one interface.
class IdxReader {
 public:
  explicit IdxReader(const std::filesystem::path& path)
      : path_(path), handle_(gzopen(path.c_str(), "rb")) {
    if (!handle_) {
      throw IdxFormatError(IdxFormatError::Kind::kIo,
                           "cannot open " + path.string());
    }
  }

  void read(void* out, std::size_t bytes) {
    auto* dst = static_cast<unsigned char*>(out);
    while (bytes > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(bytes, 1u << 30));
      const int got = gzread(handle_.get(), dst, chunk);
      if (got < 0) {
        throw IdxFormatError(IdxFormatError::Kind::kIo,
                             "read error in " + path_.string());
      }
      if (got == 0) {
        throw IdxFormatError(IdxFormatError::Kind::kTruncated,
                             "unexpected end of file: " + path_.string());
      }
      dst += got;
      bytes -= static_cast<std::size_t>(got);
    }
  }

  std::uint32_t read_u32() {
    std::array<unsigned char, 4> b{};
    read(b.data(), b.size());
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
           (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
  }

  void expect_magic(std::uint32_t magic) {
    const std::uint32_t got = read_u32();
    if (got != magic) {
      std::ostringstream msg;
      msg << "bad magic number 0x" << std::hex << got << " in " << path_.string()
          << " (expected 0x" << magic << ")";
      throw IdxFormatError(IdxFormatError::Kind::kBadMagic, msg.str());
    }
  }

 private:
  std::filesystem::path path_;
  GzHandle handle_;
};

void put_u32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), b.size());
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

double sample(const Matrix& img, Index r, Index c) {
  return img(std::clamp<Index>(r, 0, img.rows() - 1),
             std::clamp<Index>(c, 0, img.cols() - 1));
}

// Corner-aligned source coordinate of output index i.
double source_coordinate(Index i, Index in_size, Index out_size) {
  if (out_size == 1 || in_size == 1) return 0.0;
  return static_cast<double>(i) * static_cast<double>(in_size - 1) /
         static_cast<double>(out_size - 1);
}

std::vector<Index> indices_of(const RawImageSet& set, int digit) {
  std::vector<Index> out;
  for (Index i = 0; i < set.count(); ++i) {
    if (set.labels[static_cast<std::size_t>(i)] == digit) out.push_back(i);
  }
  return out;
}

LabeledDomain assemble(const RawImageSet& set, const std::vector<Index>& lo,
                       const std::vector<Index>& hi) {
  const Index n = static_cast<Index>(lo.size() + hi.size());
  Matrix features(n, set.pixels.cols());
  Vector labels(n);
  Index row = 0;
  const double scale = 1.0 / set.max_value;
  for (const Index i : lo) {
    features.row(row) = set.pixels.row(i).cast<double>() * scale;
    labels(row++) = -1.0;
  }
  for (const Index i : hi) {
    features.row(row) = set.pixels.row(i).cast<double>() * scale;
    labels(row++) = 1.0;
  }
  return {DesignMatrix::with_bias(features), std::move(labels)};
}

}  // namespace

Matrix RawImageSet::image(Index i) const {
  Matrix out(height, width);
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) out(r, c) = pixels(i, r * width + c);
  }
  return out;
}

RawImageSet load_idx(const std::filesystem::path& images,
                     const std::filesystem::path& labels) {
  IdxReader image_reader(images);
  image_reader.expect_magic(kImageMagic);
  const std::uint32_t count = image_reader.read_u32();
  const std::uint32_t height = image_reader.read_u32();
  const std::uint32_t width = image_reader.read_u32();

  IdxReader label_reader(labels);
  label_reader.expect_magic(kLabelMagic);
  const std::uint32_t label_count = label_reader.read_u32();
  if (label_count != count) {
    throw IdxFormatError(IdxFormatError::Kind::kCountMismatch,
                         "image/label count mismatch: " + std::to_string(count) +
                             " images, " + std::to_string(label_count) + " labels");
  }
  if (height == 0 || width == 0) {
    throw IdxFormatError(IdxFormatError::Kind::kBadMagic,
                         "image dimensions must be positive");
  }

  RawImageSet set;
  set.height = height;
  set.width = width;
  set.max_value = 255.0;
  const std::size_t pixels_per_image = std::size_t{height} * width;
  std::vector<unsigned char> raw(std::size_t{count} * pixels_per_image);
  image_reader.read(raw.data(), raw.size());
  set.pixels.resize(count, static_cast<Index>(pixels_per_image));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    set.pixels.data()[i] = static_cast<float>(raw[i]);
  }
  std::vector<unsigned char> raw_labels(count);
  label_reader.read(raw_labels.data(), raw_labels.size());
  set.labels.assign(raw_labels.begin(), raw_labels.end());
  return set;
}

void write_idx(const std::filesystem::path& images,
               const std::filesystem::path& labels, const RawImageSet& set) {
  std::ofstream img(images, std::ios::binary);
  std::ofstream lab(labels, std::ios::binary);
  if (!img || !lab) throw DataError("cannot write IDX files");
  put_u32(img, kImageMagic);
  put_u32(img, static_cast<std::uint32_t>(set.count()));
  put_u32(img, static_cast<std::uint32_t>(set.height));
  put_u32(img, static_cast<std::uint32_t>(set.width));
  for (Index i = 0; i < set.pixels.size(); ++i) {
    const double v = std::clamp(std::round(double{set.pixels.data()[i]}), 0.0, 255.0);
    img.put(static_cast<char>(static_cast<unsigned char>(v)));
  }
  put_u32(lab, kLabelMagic);
  put_u32(lab, static_cast<std::uint32_t>(set.labels.size()));
  for (const int l : set.labels) lab.put(static_cast<char>(l));
}

CsvMatrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvMatrix out;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool has_label = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (rows.empty() && out.header.empty()) {
      const bool numeric = std::all_of(cells.begin(), cells.end(), [](const auto& c) {
        return parse_number(c).has_value();
      });
      if (!numeric) {
        out.header = cells;
        width = cells.size();
        has_label = !cells.empty() && cells.back() == "label";
        if (has_label) out.header.pop_back();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": ragged row (" + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(width) + ")");
    }
    std::vector<double> values;
    values.reserve(width);
    for (const auto& cell : cells) {
      const auto v = parse_number(cell);
      if (!v) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": non-numeric cell '" + cell + "'");
      }
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");
  const Index features = static_cast<Index>(width) - (has_label ? 1 : 0);
  if (features < 1) throw DataError(path.string() + ": no feature columns");
  out.data.resize(static_cast<Index>(rows.size()), features);
  Vector labels(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Index c = 0; c < features; ++c) {
      out.data(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
    if (has_label) labels(static_cast<Index>(r)) = rows[r].back();
  }
  if (has_label) out.labels = std::move(labels);
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& data,
                      const std::optional<Vector>& labels) {
  if (labels && labels->size() != data.rows()) {
    throw std::invalid_argument("label count does not match rows");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (Index c = 0; c < data.cols(); ++c) {
    out << (c ? "," : "") << 'f' << c + 1;
  }
  if (labels) out << ",label";
  out << '\n';
  char buf[32];
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index c = 0; c < data.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data(r, c));
      out << (c ? "," : "") << buf;
    }
    if (labels) {
      std::snprintf(buf, sizeof buf, "%.17g", (*labels)(r));
      out << ',' << buf;
    }
    out << '\n';
  }
}

RawImageSet load_usps_csv(const std::filesystem::path& path, PixelRange range) {
  CsvMatrix csv = load_matrix_csv(path);
  if (!csv.labels) throw DataError(path.string() + ": USPS CSV needs a label column");
  if (csv.data.cols() != 256) {
    throw DataError(path.string() + ": expected 256 pixel columns, found " +
                    std::to_string(csv.data.cols()));
  }
  if (range == PixelRange::kAuto) {
    range = csv.data.minCoeff() < 0.0   ? PixelRange::kSigned
            : csv.data.maxCoeff() > 1.0 ? PixelRange::kByte
                                        : PixelRange::kUnit;
  }
  RawImageSet set;
  set.height = 16;
  set.width = 16;
  set.max_value = 1.0;
  switch (range) {
    case PixelRange::kSigned:
      set.pixels = ((csv.data.array() + 1.0) / 2.0).cast<float>();
      break;
    case PixelRange::kByte:
      set.pixels = (csv.data / 255.0).cast<float>();
      break;
    default:
      set.pixels = csv.data.cast<float>();
      break;
  }
  set.labels.reserve(static_cast<std::size_t>(csv.labels->size()));
  for (const double l : *csv.labels) {
    if (l != std::round(l) || l < 0 || l > 9) {
      throw DataError(path.string() + ": labels must be digits 0-9");
    }
    set.labels.push_back(static_cast<int>(l));
  }
  return set;
}

Matrix resize_bilinear(const Matrix& image, Index out_height, Index out_width) {
  if (image.rows() < 1 || image.cols() < 1 || out_height < 1 || out_width < 1) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  Matrix out(out_height, out_width);
  for (Index r = 0; r < out_height; ++r) {
    const double y = source_coordinate(r, image.rows(), out_height);
    const Index y0 = static_cast<Index>(std::floor(y));
    const double fy = y - static_cast<double>(y0);
    for (Index c = 0; c < out_width; ++c) {
      const double x = source_coordinate(c, image.cols(), out_width);
      const Index x0 = static_cast<Index>(std::floor(x));
      const double fx = x - static_cast<double>(x0);
      const double top = (1.0 - fx) * sample(image, y0, x0) + fx * sample(image, y0, x0 + 1);
      const double bottom =
          (1.0 - fx) * sample(image, y0 + 1, x0) + fx * sample(image, y0 + 1, x0 + 1);
      out(r, c) = (1.0 - fy) * top + fy * bottom;
    }
  }
  return out;
}

RawImageSet resize_set(const RawImageSet& set, Index out_height,
                       Index out_width) {
  RawImageSet out;
  out.height = out_height;
  out.width = out_width;
  out.max_value = set.max_value;
  out.labels = set.labels;
  out.pixels.resize(set.count(), out_height * out_width);
  for (Index i = 0; i < set.count(); ++i) {
    const Matrix resized = resize_bilinear(set.image(i), out_height, out_width);
    for (Index r = 0; r < out_height; ++r) {
      for (Index c = 0; c < out_width; ++c) {
        out.pixels(i, r * out_width + c) = static_cast<float>(resized(r, c));
      }
    }
  }
  return out;
}

namespace {

std::filesystem::path find_data_file(const std::filesystem::path& dir,
                                     const std::string& name) {
  for (const std::string& candidate : {name, name + ".gz"}) {
    if (std::filesystem::exists(dir / candidate)) return dir / candidate;
  }
  throw DataError("missing dataset file " + (dir / name).string() + "[.gz]");
}

}  // namespace

DigitCorpus load_mnist_dir(const std::filesystem::path& dir) {
  return {load_idx(find_data_file(dir, "train-images-idx3-ubyte"),
                   find_data_file(dir, "train-labels-idx1-ubyte")),
          load_idx(find_data_file(dir, "t10k-images-idx3-ubyte"),
                   find_data_file(dir, "t10k-labels-idx1-ubyte"))};
}

DigitCorpus load_usps_dir(const std::filesystem::path& dir, PixelRange range) {
  return {load_usps_csv(find_data_file(dir, "usps_train.csv"), range),
          load_usps_csv(find_data_file(dir, "usps_test.csv"), range)};
}

void TaskSpec::validate() const {
  if (digit_lo < 0 || digit_lo > 9 || digit_hi < 0 || digit_hi > 9) {
    throw std::invalid_argument("digits must lie in 0-9");
  }
  if (digit_lo >= digit_hi) {
    throw std::invalid_argument("digit_lo must be smaller than digit_hi");
  }
  if (!(subsample_ratio > 0.0 && subsample_ratio <= 1.0)) {
    throw std::invalid_argument("subsample ratio must lie in (0, 1]");
  }
  if (validation_size < 0) {
    throw std::invalid_argument("validation size must be >= 0");
  }
}

LabeledDomain binary_design(const RawImageSet& set, int digit_lo, int digit_hi) {
  const auto lo = indices_of(set, digit_lo);
  const auto hi = indices_of(set, digit_hi);
  if (lo.empty() || hi.empty()) {
    throw DataError("digit " + std::to_string(lo.empty() ? digit_lo : digit_hi) +
                    " absent from split");
  }
  return assemble(set, lo, hi);
}

PreparedTask prepare_binary_task(const DigitCorpus& mnist,
                                 const DigitCorpus& usps, const TaskSpec& spec) {
  spec.validate();
  std::optional<RawImageSet> resized_source;
  std::optional<RawImageSet> resized_target;
  auto on_mnist_grid = [](const RawImageSet& set,
                          std::optional<RawImageSet>& slot) -> const RawImageSet* {
    if (set.height == kMnistSide && set.width == kMnistSide) return &set;
    slot = resize_set(set, kMnistSide, kMnistSide);
    return &*slot;
  };
  const bool from_mnist = spec.direction == Direction::kMnistToUsps;
  const RawImageSet& source_set =
      *on_mnist_grid(from_mnist ? mnist.train : usps.train, resized_source);
  const RawImageSet& target_set =
      *on_mnist_grid(from_mnist ? usps.test : mnist.test, resized_target);

  std::vector<Index> lo = indices_of(source_set, spec.digit_lo);
  const std::vector<Index> hi = indices_of(source_set, spec.digit_hi);
  if (lo.empty() || hi.empty()) {
    throw DataError("digit " + std::to_string(lo.empty() ? spec.digit_lo : spec.digit_hi) +
                    " absent from source split");
  }
  if (spec.subsample_ratio < 1.0) {
    const auto keep = static_cast<std::size_t>(
        std::floor(spec.subsample_ratio * static_cast<double>(lo.size())));
    if (keep == 0) throw DataError("subsample ratio leaves no source samples of digit_lo");
    Rng rng(derive_seed(spec.seed, kSubsampleStream));
    rng.shuffle(std::span<Index>(lo));
    lo.resize(keep);
    std::sort(lo.begin(), lo.end());
  }

  PreparedTask task{assemble(source_set, lo, hi),
                    DesignMatrix(Matrix::Ones(1, 1), true), Vector(), {}, {},
                    static_cast<Index>(lo.size()), static_cast<Index>(hi.size())};

  const auto target_lo = indices_of(target_set, spec.digit_lo);
  const auto target_hi = indices_of(target_set, spec.digit_hi);
  if (target_lo.empty() || target_hi.empty()) {
    throw DataError("digit " +
                    std::to_string(target_lo.empty() ? spec.digit_lo : spec.digit_hi) +
                    " absent from target split");
  }
  LabeledDomain target = assemble(target_set, target_lo, target_hi);
  task.target = std::move(target.design);
  task.target_labels = std::move(target.labels);

  const Index n_target = task.target.rows();
  if (spec.validation_size >= n_target) {
    throw DataError("validation size must be smaller than the target split");
  }
  std::vector<Index> order(static_cast<std::size_t>(n_target));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(derive_seed(spec.seed, kValidationStream));
  rng.shuffle(std::span<Index>(order));
  const auto split = order.begin() + spec.validation_size;
  task.validation.assign(order.begin(), split);
  task.evaluation.assign(split, order.end());
  std::sort(task.validation.begin(), task.validation.end());
  std::sort(task.evaluation.begin(), task.evaluation.end());
  return task;
}

}  // namespace labalign
