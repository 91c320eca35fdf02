#include "skelbench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace skelbench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas rooted at finite f values; out[q] receives
// min_p (q - p)^2 + f[p].
void envelope_1d(std::span<const double> f, std::span<double> out,
                 std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    const double fq = f[q] + double(q) * q;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    // z[0] is -inf, so the scan always stops at k >= 0.
    double s = 0;
    while (true) {
      const int p = v[k];
      s = (fq - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

std::vector<double> squared_distance_to_sites(int width, int height,
                                              std::span<const std::uint8_t> site) {
  if (width <= 0 || height <= 0) throw Error("grid dimensions must be positive");
  const std::size_t w = width, h = height;
  if (site.size() != w * h) throw Error("site mask size does not match the grid");

  std::vector<double> grid(w * h);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = site[i] ? 0.0 : kInf;

  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> col(h), col_out(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) col[y] = grid[y * w + x];
    envelope_1d(col, col_out, v, z);
    for (std::size_t y = 0; y < h; ++y) grid[y * w + x] = col_out[y];
  }
  std::vector<double> row(w), row_out(w);
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(grid.begin() + y * w, w, row.begin());
    envelope_1d(row, row_out, v, z);
    std::copy_n(row_out.begin(), w, grid.begin() + y * w);
  }
  return grid;
}

DistanceField distance_transform(const BinaryImage& img) {
  if (img.empty_foreground()) throw Error("empty shape");
  // One-pixel background frame stands in for the outside of the image.
  const int pw = img.width() + 2, ph = img.height() + 2;
  std::vector<std::uint8_t> site(static_cast<std::size_t>(pw) * ph, 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      site[static_cast<std::size_t>(y + 1) * pw + x + 1] = img.at(x, y) ? 0 : 1;
  const auto sq = squared_distance_to_sites(pw, ph, site);

  DistanceField field{img.width(), img.height(), {}};
  field.values.resize(img.area());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      field.values[img.index(x, y)] =
          std::sqrt(sq[static_cast<std::size_t>(y + 1) * pw + x + 1]);
  return field;
}

PointSet BinaryImage::foreground_points() const {
  PointSet out;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (at(x, y)) out.push_back({double(x), double(y)});
  return out;
}

// ---------------------------------------------------------------------------

double signed_area(const Contour& c) {
  const auto& v = c.vertices;
  double sum = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    sum += a.x * b.y - b.x * a.y;
  }
  return 0.5 * sum;
}

bool point_in_polygon(const Contour& c, Point2 p) {
  const auto& v = c.vertices;
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const auto& a = v[i];
    const auto& b = v[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double distance_to_boundary(const Contour& c, Point2 p) {
  const auto& v = c.vertices;
  double best = kInf;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i];
    const Point2 b = v[(i + 1) % v.size()];
    const Point2 d = b - a;
    const double len2 = dot(d, d);
    double t = len2 > 0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, distance(p, a + d * t));
  }
  return best;
}

BinaryImage rasterize_polygon(const Contour& c, int width, int height) {
  BinaryImage img(width, height);
  const auto& v = c.vertices;
  if (v.size() < 3) return img;
  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    xs.clear();
    const double py = y;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point2 a = v[i];
      const Point2 b = v[(i + 1) % v.size()];
      // Half-open in y so shared vertices are counted once.
      if ((a.y <= py && py < b.y) || (b.y <= py && py < a.y))
        xs.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int x1 = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1])) - 1);
      for (int x = x0; x <= x1; ++x) img.set(x, y, true);
    }
  }
  return img;
}

// ---------------------------------------------------------------------------

std::vector<int> label_components(const BinaryImage& img, Connectivity conn, int* count) {
  std::vector<int> label(img.area(), -1);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  const bool eight = conn == Connectivity::eight;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y) || label[img.index(x, y)] >= 0) continue;
      label[img.index(x, y)] = next;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!eight && dx != 0 && dy != 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (!img.get(nx, ny)) continue;
            auto& l = label[img.index(nx, ny)];
            if (l < 0) {
              l = next;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
      ++next;
    }
  }
  if (count) *count = next;
  return label;
}

namespace {

BinaryImage complement(const BinaryImage& img) {
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set(x, y, !img.at(x, y));
  return out;
}

// Background pixels not 4-connected to the image border.
std::vector<bool> enclosed_background(const BinaryImage& img, int* regions) {
  const BinaryImage bg = complement(img);
  int count = 0;
  const auto label = label_components(bg, Connectivity::four, &count);
  std::vector<bool> touches(count, false);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (x != 0 && y != 0 && x != img.width() - 1 && y != img.height() - 1) continue;
      const int l = label[img.index(x, y)];
      if (l >= 0) touches[l] = true;
    }
  }
  std::vector<bool> enclosed(img.area(), false);
  for (std::size_t i = 0; i < label.size(); ++i)
    enclosed[i] = label[i] >= 0 && !touches[label[i]];
  if (regions) *regions = static_cast<int>(std::count(touches.begin(), touches.end(), false));
  return enclosed;
}

}  // namespace

int count_holes(const BinaryImage& img) {
  int regions = 0;
  enclosed_background(img, &regions);
  return regions;
}

BinaryImage fill_holes(const BinaryImage& img) {
  const auto enclosed = enclosed_background(img, nullptr);
  BinaryImage out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (enclosed[img.index(x, y)]) out.set(x, y, true);
  return out;
}

BinaryImage morphology(const BinaryImage& img, MorphOp op, int radius) {
  if (radius < 0) throw Error("morphology radius must be non-negative");
  BinaryImage cur = img;
  for (int step = 0; step < radius; ++step) {
    BinaryImage next(cur.width(), cur.height());
    for (int y = 0; y < cur.height(); ++y) {
      for (int x = 0; x < cur.width(); ++x) {
        bool any = false, all = true;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const bool v = cur.get(x + dx, y + dy);
            any = any || v;
            all = all && v;
          }
        }
        next.set(x, y, op == MorphOp::dilate ? any : all);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

// ---------------------------------------------------------------------------

Contour extract_contour(const BinaryImage& img) {
  int components = 0;
  label_components(img, Connectivity::eight, &components);
  if (components == 0) throw Error("empty shape: no foreground pixels");
  if (components > 1)
    throw Error("shape has " + std::to_string(components) +
                " 8-connected foreground components (expected 1)");
  if (const int holes = count_holes(img); holes > 0)
    throw Error("shape has " + std::to_string(holes) + " hole(s)");

  // Corners are integer lattice points; corner (cx, cy) sits at
  // (cx - 0.5, cy - 0.5) in pixel coordinates.
  using Corner = std::pair<int, int>;
  std::map<Corner, std::vector<Corner>> out_edges;
  std::size_t total = 0;
  auto add = [&](Corner a, Corner b) {
    out_edges[a].push_back(b);
    ++total;
  };
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y)) continue;
      if (!img.get(x, y - 1)) add({x, y}, {x + 1, y});
      if (!img.get(x + 1, y)) add({x + 1, y}, {x + 1, y + 1});
      if (!img.get(x, y + 1)) add({x + 1, y + 1}, {x, y + 1});
      if (!img.get(x - 1, y)) add({x, y + 1}, {x, y});
    }
  }

  // The smallest corner is the top-left corner of the top-left pixel and has
  // a single outgoing edge, so the walk cannot close early at a pinch.
  const Corner start = out_edges.begin()->first;
  std::vector<Corner> loop{start};
  Corner prev = start;
  Corner cur = out_edges.begin()->second.front();
  out_edges.begin()->second.clear();
  std::size_t used = 1;
  while (cur != start) {
    auto& outs = out_edges[cur];
    if (outs.empty()) break;
    std::size_t pick = 0;
    if (outs.size() > 1) {
      // Diagonal contact: take the right turn so the two touching pixels end
      // up on the same loop.
      const int inx = cur.first - prev.first, iny = cur.second - prev.second;
      for (std::size_t k = 0; k < outs.size(); ++k) {
        const int ox = outs[k].first - cur.first, oy = outs[k].second - cur.second;
        if (inx * oy - iny * ox < 0) pick = k;
      }
    }
    loop.push_back(cur);
    prev = cur;
    cur = outs[pick];
    outs.erase(outs.begin() + static_cast<long>(pick));
    ++used;
  }
  if (used != total) throw Error("shape boundary does not form a single closed loop");

  // Merge collinear runs.
  std::vector<Point2> verts;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Corner a = loop[(i + n - 1) % n], b = loop[i], c = loop[(i + 1) % n];
    const long cr = static_cast<long>(b.first - a.first) * (c.second - b.second) -
                    static_cast<long>(b.second - a.second) * (c.first - b.first);
    if (cr != 0) verts.push_back({b.first - 0.5, b.second - 0.5});
  }
  Contour contour{std::move(verts)};
  if (signed_area(contour) < 0)
    std::reverse(contour.vertices.begin(), contour.vertices.end());
  const auto first = std::min_element(contour.vertices.begin(), contour.vertices.end());
  std::rotate(contour.vertices.begin(), first, contour.vertices.end());
  return contour;
}

// ---------------------------------------------------------------------------

double directed_hausdorff(std::span<const Point2> from, std::span<const Point2> to) {
  if (from.empty() || to.empty()) throw Error("Hausdorff distance of an empty set");
  double worst = 0;
  for (const auto& a : from) {
    double best = kInf;
    for (const auto& b : to) {
      best = std::min(best, squared_distance(a, b));
      if (best <= worst) break;  // cannot raise the maximum
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

double hausdorff(std::span<const Point2> a, std::span<const Point2> b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double directed_hausdorff(const BinaryImage& from, const BinaryImage& to) {
  if (from.width() != to.width() || from.height() != to.height())
    throw Error("directed_hausdorff: raster sizes differ");
  if (from.empty_foreground()) return 0.0;
  if (to.empty_foreground()) return kInf;
  const auto sq = squared_distance_to_sites(to.width(), to.height(), to.data());
  double worst = 0;
  const auto src = from.data();
  for (std::size_t i = 0; i < sq.size(); ++i)
    if (src[i]) worst = std::max(worst, sq[i]);
  return std::sqrt(worst);
}

// ---------------------------------------------------------------------------

double swept_disk_excess(const MedialPoint& a, const MedialPoint& b, Point2 q) {
  const Point2 d = b.position - a.position;
  const double len = norm(d);
  const double ea = distance(q, a.position) - a.r;
  const double eb = distance(q, b.position) - b.r;
  if (len < 1e-12) return std::min(ea, eb);
  const double k = (b.r - a.r) / len;
  // One disk contains the other; the sweep adds nothing.
  if (std::abs(k) >= 1.0) return std::min(ea, eb);
  const Point2 u = d * (1.0 / len);
  const Point2 w = q - a.position;
  const double along = dot(w, u);
  const double perp = std::abs(cross(u, w));
  const double s = std::clamp(along + k * perp / std::sqrt(1.0 - k * k), 0.0, len);
  const double e = std::hypot(along - s, perp) - (a.r + k * s);
  return std::min({e, ea, eb});
}

std::pair<int, int> nearest_pixel(Point2 p) {
  return {static_cast<int>(std::floor(p.x + 0.5)), static_cast<int>(std::floor(p.y + 0.5))};
}

std::vector<std::pair<int, int>> digital_line(int x0, int y0, int x1, int y1) {
  const bool swap = std::pair(x1, y1) < std::pair(x0, y0);
  if (swap) {
    std::swap(x0, x1);
    std::swap(y0, y1);
  }
  std::vector<std::pair<int, int>> out;
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (true) {
    out.emplace_back(x, y);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return out;
}

namespace {

constexpr double kCoverEps = 1e-9;

void clip_box(double x0, double y0, double x1, double y1, int width, int height,
              int& ix0, int& iy0, int& ix1, int& iy1) {
  ix0 = std::max(0, static_cast<int>(std::ceil(x0 - kCoverEps)));
  iy0 = std::max(0, static_cast<int>(std::ceil(y0 - kCoverEps)));
  ix1 = std::min(width - 1, static_cast<int>(std::floor(x1 + kCoverEps)));
  iy1 = std::min(height - 1, static_cast<int>(std::floor(y1 + kCoverEps)));
}

void visit_center(Point2 p, int width, int height, const PixelVisitor& visit) {
  const auto [x, y] = nearest_pixel(p);
  if (x >= 0 && y >= 0 && x < width && y < height) visit(x, y);
}

}  // namespace

void visit_disk(const MedialPoint& m, int width, int height, const PixelVisitor& visit) {
  const double r = std::max(0.0, m.r);
  int x0, y0, x1, y1;
  clip_box(m.position.x - r, m.position.y - r, m.position.x + r, m.position.y + r, width,
           height, x0, y0, x1, y1);
  const double r2 = r * r + kCoverEps;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (squared_distance({double(x), double(y)}, m.position) <= r2) visit(x, y);
  visit_center(m.position, width, height, visit);
}

void visit_capsule(const MedialPoint& a, const MedialPoint& b, int width, int height,
                   const PixelVisitor& visit) {
  const double ra = std::max(0.0, a.r), rb = std::max(0.0, b.r);
  const MedialPoint ca{a.position, ra}, cb{b.position, rb};
  int x0, y0, x1, y1;
  clip_box(std::min(a.position.x - ra, b.position.x - rb),
           std::min(a.position.y - ra, b.position.y - rb),
           std::max(a.position.x + ra, b.position.x + rb),
           std::max(a.position.y + ra, b.position.y + rb), width, height, x0, y0, x1, y1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (swept_disk_excess(ca, cb, {double(x), double(y)}) <= kCoverEps) visit(x, y);
  const auto [px, py] = nearest_pixel(a.position);
  const auto [qx, qy] = nearest_pixel(b.position);
  for (auto [x, y] : digital_line(px, py, qx, qy))
    if (x >= 0 && y >= 0 && x < width && y < height) visit(x, y);
}

BinaryImage reconstruct_from_skeleton(const SkeletonGraph& g, int width, int height) {
  BinaryImage img(width, height);
  for (const auto& m : g.nodes) {
    if (!is_finite(m.position) || m.position.x < -0.5 || m.position.y < -0.5 ||
        m.position.x >= width - 0.5 || m.position.y >= height - 0.5)
      throw Error("medial point outside the canvas");
  }
  auto mark = [&](int x, int y) { img.set(x, y, true); };
  for (const auto& m : g.nodes) visit_disk(m, width, height, mark);
  for (auto [i, j] : g.edges) visit_capsule(g.nodes[i], g.nodes[j], width, height, mark);
  return img;
}

}  // namespace skelbench
