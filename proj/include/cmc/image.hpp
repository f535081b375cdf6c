#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cmc {

struct Pixel {
  int row = 0;
  int col = 0;

  auto operator<=>(const Pixel&) const = default;
};

/// Dense row-major 2D array.
template <class T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  bool contains(Pixel p) const noexcept { return contains(p.row, p.col); }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator()(Pixel p) { return (*this)(p.row, p.col); }
  const T& operator()(Pixel p) const { return (*this)(p.row, p.col); }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Region labels, 0 = background.
using LabelImage = Image<std::uint32_t>;

/// Real-valued image with values in [0,1] (boundary maps, rescaled raw images).
using RealImage = Image<double>;

inline constexpr int kRowOffsets4[4] = {-1, 0, 0, 1};
inline constexpr int kColOffsets4[4] = {0, -1, 1, 0};

/// Checks that every value is finite and within [0,1]; throws InvalidBoundary otherwise.
void check_unit_range(const RealImage& image);

/// Reads a binary PGM (P5, 8- or 16-bit). Labels are returned verbatim.
LabelImage read_label_pgm(const std::string& path);
/// Reads a binary PGM and rescales to [0,1] by dividing by maxval.
RealImage read_real_pgm(const std::string& path);
/// Writes a 16-bit P5 PGM; throws InvalidArgument for labels above 65535.
void write_label_pgm(const std::string& path, const LabelImage& image);
/// Writes a 16-bit P5 PGM with round(value * 65535).
void write_real_pgm(const std::string& path, const RealImage& image);

}  // namespace cmc
