#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sonar {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CellCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const CellCoord&, const CellCoord&) = default;
  friend auto operator<=>(const CellCoord& a, const CellCoord& b) {
    // row-major order
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

/// Object class label. 0 means "no label".
using ClassId = std::uint16_t;
inline constexpr ClassId kNoClass = 0;

inline constexpr double kDefaultResolution = 0.25;

/// Dense row-major 2D layer.
template <typename T>
class GridLayer {
 public:
  GridLayer() = default;
  GridLayer(int width, int height, T fill = T{}, double resolution = kDefaultResolution)
      : width_(width), height_(height), resolution_(resolution) {
    if (width <= 0 || height <= 0) throw ValidationError("grid dimensions must be positive");
    if (!(resolution > 0.0)) throw ValidationError("grid resolution must be positive");
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool in_bounds(CellCoord c) const { return in_bounds(c.x, c.y); }

  std::size_t index(CellCoord c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
  }
  CellCoord coord(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width_)),
            static_cast<int>(i / static_cast<std::size_t>(width_))};
  }

  T& operator()(int x, int y) { return cells_[index({x, y})]; }
  const T& operator()(int x, int y) const { return cells_[index({x, y})]; }
  T& operator[](CellCoord c) { return cells_[index(c)]; }
  const T& operator[](CellCoord c) const { return cells_[index(c)]; }

  /// Bounds-checked access.
  T& at(CellCoord c) {
    check(c);
    return cells_[index(c)];
  }
  const T& at(CellCoord c) const {
    check(c);
    return cells_[index(c)];
  }

  std::vector<T>& data() { return cells_; }
  const std::vector<T>& data() const { return cells_; }

  bool same_shape(int w, int h) const { return w == width_ && h == height_; }
  template <typename U>
  bool same_shape(const GridLayer<U>& other) const {
    return other.width() == width_ && other.height() == height_;
  }

  void fill(T value) { std::fill(cells_.begin(), cells_.end(), value); }

  friend bool operator==(const GridLayer&, const GridLayer&) = default;

 private:
  void check(CellCoord c) const {
    if (!in_bounds(c))
      throw ValidationError("cell (" + std::to_string(c.x) + "," + std::to_string(c.y) + ") out of bounds");
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = kDefaultResolution;
  std::vector<T> cells_;
};

/// Binary layers store one byte per cell (0 or 1) so kernels can stream them.
using BitLayer = GridLayer<std::uint8_t>;
using RealLayer = GridLayer<double>;
using LabelLayer = GridLayer<ClassId>;

}  // namespace sonar
