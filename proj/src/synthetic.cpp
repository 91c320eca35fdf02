#include "skelbench/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skelbench/geometry.hpp"

namespace skelbench {

namespace {

class Canvas {
 public:
  explicit Canvas(int size) : img_(size, size), size_(size) {}

  // Shapes are authored on a 256 grid and scaled to the canvas.
  Point2 map(Point2 p) const {
    const double k = (size_ - 16) / 240.0;
    const double mid = (size_ - 1) / 2.0;
    return {mid + (p.x - 127.5) * k, mid + (p.y - 127.5) * k};
  }
  double len(double v) const { return v * (size_ - 16) / 240.0; }

  Canvas& disk(Point2 c, double r) { return capsule(c, c, r); }

  Canvas& capsule(Point2 a, Point2 b, double r) {
    a = map(a);
    b = map(b);
    r = len(r);
    const Point2 d = b - a;
    const double len2 = dot(d, d);
    for (int y = 0; y < size_; ++y)
      for (int x = 0; x < size_; ++x) {
        const Point2 p{double(x), double(y)};
        const double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
        if (distance(p, a + d * t) <= r) img_.set(x, y, true);
      }
    return *this;
  }

  Canvas& polygon(std::vector<Point2> pts) {
    Contour c;
    for (auto& p : pts) c.vertices.push_back(map(p));
    const auto fill = rasterize_polygon(c, size_, size_);
    for (int y = 0; y < size_; ++y)
      for (int x = 0; x < size_; ++x)
        if (fill.at(x, y)) img_.set(x, y, true);
    return *this;
  }

  Canvas& ellipse(Point2 c, double a, double b, double degrees) {
    std::vector<Point2> pts;
    const double phi = degrees * std::numbers::pi / 180;
    for (int k = 0; k < 720; ++k) {
      const double t = 2 * std::numbers::pi * k / 720;
      const double x = a * std::cos(t), y = b * std::sin(t);
      pts.push_back({c.x + x * std::cos(phi) - y * std::sin(phi),
                     c.y + x * std::sin(phi) + y * std::cos(phi)});
    }
    return polygon(std::move(pts));
  }

  Canvas& rect(double x0, double y0, double w, double h) {
    return polygon({{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}});
  }

  Canvas& star(Point2 c, int points, double outer, double inner, double degrees) {
    std::vector<Point2> pts;
    for (int k = 0; k < 2 * points; ++k) {
      const double t = degrees * std::numbers::pi / 180 + std::numbers::pi * k / points;
      const double r = k % 2 ? inner : outer;
      pts.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
    }
    return polygon(std::move(pts));
  }

  BinaryImage take() { return std::move(img_); }

 private:
  BinaryImage img_;
  int size_;
};

}  // namespace

std::vector<SyntheticShape> synthetic_corpus(int size) {
  if (size < 64) throw Error("synthetic corpus needs a canvas of at least 64 pixels");
  std::vector<SyntheticShape> out;
  auto add = [&](const std::string& cls, int n, Canvas& c) {
    out.push_back({cls + "-" + std::to_string(n), cls, c.take()});
  };
  const Point2 mid{127.5, 127.5};

  add("ellipse", 1, Canvas(size).ellipse(mid, 110, 110, 0));
  add("ellipse", 2, Canvas(size).ellipse(mid, 115, 55, 0));
  add("ellipse", 3, Canvas(size).ellipse(mid, 110, 40, 30));

  add("rect", 1, Canvas(size).rect(77.5, 107.5, 100, 40));
  add("rect", 2, Canvas(size).rect(27.5, 27.5, 200, 200));
  add("rect", 3, Canvas(size).rect(17.5, 82.5, 220, 90));

  add("bar", 1, Canvas(size).capsule({50, 127.5}, {205, 127.5}, 30));
  add("bar", 2, Canvas(size).capsule({60, 190}, {195, 65}, 25));
  add("bar", 3, Canvas(size)
              .rect(27.5, 97.5, 200, 60)
              .rect(47.5, 77.5, 160, 100)
              .disk({47.5, 97.5}, 20)
              .disk({207.5, 97.5}, 20)
              .disk({47.5, 157.5}, 20)
              .disk({207.5, 157.5}, 20));

  add("cross", 1, Canvas(size).rect(27.5, 102.5, 200, 50).rect(102.5, 27.5, 50, 200));
  add("cross", 2, Canvas(size).rect(27.5, 27.5, 200, 50).rect(102.5, 27.5, 50, 200));
  add("cross", 3, Canvas(size).rect(47.5, 27.5, 55, 200).rect(47.5, 172.5, 160, 55));

  add("star", 1, Canvas(size).star(mid, 5, 115, 48, -90));
  add("star", 2, Canvas(size).star({127.5, 140}, 3, 115, 40, -90));
  add("star", 3, Canvas(size).star(mid, 6, 115, 60, 0));

  add("triangle", 1, Canvas(size).polygon({{127.5, 20}, {234, 205}, {21, 205}}));
  add("triangle", 2, Canvas(size).polygon({{30, 30}, {230, 230}, {30, 230}}));
  add("triangle", 3, Canvas(size).polygon({{10, 170}, {245, 170}, {70, 80}}));

  add("blob", 1, Canvas(size)
               .disk({127.5, 160}, 55)
               .capsule({85, 130}, {60, 50}, 13)
               .capsule({110, 115}, {105, 25}, 13)
               .capsule({140, 115}, {150, 28}, 13)
               .capsule({165, 125}, {190, 50}, 12)
               .capsule({170, 175}, {230, 150}, 14));
  add("blob", 2, Canvas(size).disk({85, 140}, 65).disk({175, 115}, 55));
  {
    Canvas c(size);
    const double r = 85;
    Point2 prev{};
    for (int k = 0; k <= 54; ++k) {
      const double t = (40 + 280.0 * k / 54) * std::numbers::pi / 180;
      const Point2 p{127.5 + r * std::cos(t), 127.5 + r * std::sin(t)};
      if (k > 0) c.capsule(prev, p, 22);
      prev = p;
    }
    add("blob", 3, c);
  }
  return out;
}

BinaryImage rectangle_shape(int size, bool bump) {
  if (size < 110) throw Error("canvas too small for the 100 x 40 rectangle");
  BinaryImage img(size, size);
  const int x0 = (size - 100) / 2, y0 = (size - 40) / 2;
  for (int y = y0; y < y0 + 40; ++y)
    for (int x = x0; x < x0 + 100; ++x) img.set(x, y, true);
  if (bump) img.set(x0 + 50, y0 - 1, true);
  return img;
}

}  // namespace skelbench
