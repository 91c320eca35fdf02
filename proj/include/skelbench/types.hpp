#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skelbench {

/// Raised for invalid inputs and malformed files. The message names the
/// violated condition so batch tools can report it per file.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Image-plane coordinates in pixels. x is the column, y is the row; pixel
/// (i, j) has its center at (i, j) and covers [i-0.5, i+0.5] x [j-0.5, j+0.5].
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend auto operator<=>(const Point2&, const Point2&) = default;

  Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline double squared_distance(Point2 a, Point2 b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Center of a maximal inscribed disk together with its radius.
struct MedialPoint {
  Point2 position;
  double r = 0.0;

  friend bool operator==(const MedialPoint&, const MedialPoint&) = default;
};

using PointSet = std::vector<Point2>;

/// Closed polygon; the closing edge from back() to front() is implicit.
/// Orientation is counter-clockwise in the (x, y) frame, i.e. positive
/// shoelace area.
struct Contour {
  std::vector<Point2> vertices;

  std::size_t size() const { return vertices.size(); }
  bool empty() const { return vertices.empty(); }
};

/// Row-major boolean raster. true = foreground (white, 255 on disk).
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height)
      : width_(width), height_(height),
        pixels_(static_cast<std::size_t>(checked_area(width, height)), 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t area() const { return pixels_.size(); }

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool at(int x, int y) const { return pixels_[index(x, y)] != 0; }
  /// Out-of-bounds reads are background.
  bool get(int x, int y) const { return in_bounds(x, y) && at(x, y); }
  void set(int x, int y, bool v) { pixels_[index(x, y)] = v ? 1 : 0; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto p : pixels_) n += p;
    return n;
  }
  bool empty_foreground() const { return count() == 0; }

  std::span<const std::uint8_t> data() const { return pixels_; }

  /// Pixel centers of all foreground pixels, row-major order.
  PointSet foreground_points() const;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  static long checked_area(int w, int h) {
    if (w <= 0 || h <= 0) throw Error("image dimensions must be positive");
    return static_cast<long>(w) * h;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Euclidean distance (pixels) from each pixel center to the nearest
/// background pixel center; zero on background. Outside the image counts as
/// background.
struct DistanceField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

}  // namespace skelbench
