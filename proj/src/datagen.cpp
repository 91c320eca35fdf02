#include "skelbench/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "skelbench/geometry.hpp"
#include "skelbench/skeletonize.hpp"

namespace skelbench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view shape_id) {
  return splitmix64(global_seed ^ splitmix64(fnv1a(shape_id)));
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error("Rng::below(0)");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do v = engine_();
  while (v >= limit);
  return v % n;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------

RenderedShape render_shape_image(const Contour& c, const RenderConfig& cfg) {
  if (cfg.size <= 0 || cfg.margin < 0 || 2 * cfg.margin >= cfg.size)
    throw Error("bad render size/margin");
  if (cfg.supersample < 1 || cfg.supersample % 2 == 0)
    throw Error("supersample must be a positive odd number");
  if (c.size() < 3 || std::abs(signed_area(c)) < 1e-9) throw Error("degenerate contour");
  double x0 = c.vertices[0].x, x1 = x0, y0 = c.vertices[0].y, y1 = y0;
  for (const auto& v : c.vertices) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  const double extent = std::max(x1 - x0, y1 - y0);
  RenderedShape out;
  out.transform.scale = (cfg.size - 2 * cfg.margin) / extent;
  const double mid = (cfg.size - 1) / 2.0;
  out.transform.offset = Point2{mid, mid} - Point2{(x0 + x1) / 2, (y0 + y1) / 2} * out.transform.scale;

  // Fine grid: fine pixel K*i + k samples x = i + (k - (K-1)/2) / K.
  const int k = cfg.supersample;
  Contour fine;
  for (const auto& v : c.vertices) {
    const Point2 p = out.transform.apply(v);
    fine.vertices.push_back({k * p.x + (k - 1) / 2.0, k * p.y + (k - 1) / 2.0});
  }
  const BinaryImage hi = rasterize_polygon(fine, k * cfg.size, k * cfg.size);
  out.image = BinaryImage(cfg.size, cfg.size);
  for (int y = 0; y < cfg.size; ++y)
    for (int x = 0; x < cfg.size; ++x) {
      int votes = 0;
      for (int dy = 0; dy < k; ++dy)
        for (int dx = 0; dx < k; ++dx) votes += hi.at(k * x + dx, k * y + dy);
      out.image.set(x, y, 2 * votes > k * k);
    }
  if (out.image.empty_foreground()) throw Error("degenerate contour (renders empty)");
  return out;
}

namespace {

using Pixel = std::pair<int, int>;

Pixel nearest_mask_pixel(const BinaryImage& mask, Point2 p) {
  Pixel best{-1, -1};
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const double d = squared_distance(p, {double(x), double(y)});
      if (d < best_d) {
        best_d = d;
        best = {x, y};
      }
    }
  if (best.first < 0) throw Error("skeleton mask is empty");
  return best;
}

// Shortest 8-connected path inside the mask (breadth first, fixed neighbor
// order).
std::vector<Pixel> path_in_mask(const BinaryImage& mask, Pixel from, Pixel to) {
  const int w = mask.width();
  std::vector<int> prev(mask.area(), -2);
  std::deque<int> queue{from.second * w + from.first};
  prev[queue.front()] = -1;
  const int target = to.second * w + to.first;
  while (!queue.empty() && prev[target] == -2) {
    const int cur = queue.front();
    queue.pop_front();
    const int cx = cur % w, cy = cur / w;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = cx + dx, ny = cy + dy;
        if ((dx || dy) && mask.get(nx, ny) && prev[ny * w + nx] == -2) {
          prev[ny * w + nx] = cur;
          queue.push_back(ny * w + nx);
        }
      }
  }
  if (prev[target] == -2) throw Error("skeleton nodes lie in different parts of the shape");
  std::vector<Pixel> path;
  for (int cur = target; cur != -1; cur = prev[cur]) path.push_back({cur % w, cur / w});
  return path;
}

}  // namespace

BinaryImage render_skeleton_image(const SkeletonGraph& g, int width, int height,
                                  const RenderTransform& transform, const BinaryImage* mask) {
  if (g.nodes.empty()) throw Error("empty skeleton");
  if (mask && (mask->width() != width || mask->height() != height))
    throw Error("mask size does not match the canvas");
  std::vector<Pixel> px;
  for (const auto& m : g.nodes) {
    const Point2 p = transform.apply(m.position);
    Pixel q = nearest_pixel(p);
    if (q.first < 0 || q.second < 0 || q.first >= width || q.second >= height)
      throw Error("skeleton node outside the canvas");
    if (mask && !mask->at(q.first, q.second)) q = nearest_mask_pixel(*mask, p);
    px.push_back(q);
  }
  BinaryImage out(width, height);
  for (const auto& q : px) out.set(q.first, q.second, true);
  for (const auto& [i, j] : g.edges) {
    auto line = digital_line(px[i].first, px[i].second, px[j].first, px[j].second);
    if (mask && std::any_of(line.begin(), line.end(),
                            [&](const Pixel& q) { return !mask->at(q.first, q.second); }))
      line = path_in_mask(*mask, px[i], px[j]);
    for (const auto& q : line) out.set(q.first, q.second, true);
  }
  return out;
}

// ---------------------------------------------------------------------------

PointSet sample_point_cloud(const Contour& c, const SamplingConfig& cfg) {
  if (!(cfg.h > 0)) throw Error("grid step h must be positive");
  if (!(cfg.noise_scale >= 0)) throw Error("noise scale must be non-negative");
  if (c.size() < 3) throw Error("degenerate contour");
  const double h = cfg.h;
  const double eps = 1e-9 * std::max(1.0, h);
  const auto& v = c.vertices;

  double x0 = v[0].x, x1 = x0, y0 = v[0].y, y1 = y0;
  for (const auto& p : v) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  PointSet raw;
  const long ky0 = static_cast<long>(std::ceil(y0 / h - 1e-9));
  const long ky1 = static_cast<long>(std::floor(y1 / h + 1e-9));
  for (long ky = ky0; ky <= ky1; ++ky) {
    const double y = ky * h;
    std::vector<double> xs;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point2 a = v[i], b = v[(i + 1) % v.size()];
      if ((a.y <= y) != (b.y <= y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      // Horizontal edges lying on this row.
      if (std::abs(a.y - y) <= eps && std::abs(b.y - y) <= eps) {
        const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
        for (long kx = static_cast<long>(std::ceil((lo - eps) / h));
             kx * h <= hi + eps; ++kx)
          raw.push_back({kx * h, y});
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2)
      for (long kx = static_cast<long>(std::ceil((xs[i] - eps) / h)); kx * h <= xs[i + 1] + eps;
           ++kx)
        raw.push_back({kx * h, y});
  }
  for (const auto& p : resample_contour(c, h)) raw.push_back(p);

  // Grid points come first, so near-duplicate boundary samples defer to them.
  std::set<std::pair<long long, long long>> seen;
  PointSet cloud;
  for (const auto& p : raw) {
    const std::pair key{std::llround(p.x / h * 1e6), std::llround(p.y / h * 1e6)};
    if (seen.insert(key).second) cloud.push_back(p);
  }
  std::sort(cloud.begin(), cloud.end());

  if (cfg.noise != NoiseKind::none && cfg.noise_scale > 0) {
    Rng rng(cfg.seed);
    const double s = cfg.noise_scale * h;
    for (auto& p : cloud) {
      if (cfg.noise == NoiseKind::uniform) {
        p.x += rng.uniform(-s, s);
        p.y += rng.uniform(-s, s);
      } else {
        p.x += s * rng.normal();
        p.y += s * rng.normal();
      }
    }
  }
  return cloud;
}

PointSet resample_cloud(const PointSet& p, double factor, std::uint64_t seed, double jitter) {
  if (!(factor > 0) || !std::isfinite(factor)) throw Error("resample factor must be positive");
  if (p.empty()) throw Error("cannot resample an empty cloud");
  const std::size_t n = p.size();
  const auto target = static_cast<std::size_t>(
      std::max(1.0, std::ceil(factor * static_cast<double>(n) - 1e-9)));
  if (target == n) return p;
  Rng rng(seed);
  if (target < n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < target; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(target);
    std::sort(idx.begin(), idx.end());
    PointSet out;
    for (std::size_t i : idx) out.push_back(p[i]);
    return out;
  }
  PointSet out = p;
  while (out.size() < target) {
    const Point2 src = p[rng.below(n)];
    const double dx = rng.uniform(-jitter, jitter);
    const double dy = rng.uniform(-jitter, jitter);
    out.push_back({src.x + dx, src.y + dy});
  }
  return out;
}

PointSet LabeledCloud::skeletal() const {
  PointSet out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (labels[i] == 1) out.push_back(points[i]);
  return out;
}

namespace {

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 d = b - a;
  const double len2 = dot(d, d);
  const double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + d * t);
}

}  // namespace

LabeledCloud label_skeleton_points(const PointSet& cloud, const SkeletonGraph& g, double tau) {
  if (!(tau >= 0)) throw Error("label threshold must be non-negative");
  LabeledCloud out{cloud, std::vector<int>(cloud.size(), 2), g.nodes.empty()};
  if (g.nodes.empty()) return out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point2 p = cloud[i];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : g.nodes) best = std::min(best, distance(p, m.position));
    for (const auto& [a, b] : g.edges)
      best = std::min(best, point_segment_distance(p, g.nodes[a].position, g.nodes[b].position));
    if (best <= tau) out.labels[i] = 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Per-class counts summing to `total`: at least one each (while the class
// keeps a training shape), then largest remainders of the exact quotas.
std::vector<int> apportion(const std::vector<double>& quota, const std::vector<int>& room,
                           long total) {
  const std::size_t n = quota.size();
  std::vector<int> count(n);
  long assigned = 0;
  for (std::size_t c = 0; c < n; ++c) {
    count[c] = std::min(room[c], std::max(1, static_cast<int>(std::floor(quota[c]))));
    assigned += count[c];
  }
  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < n; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
  });
  bool progress = true;
  while (assigned < total && progress) {
    progress = false;
    for (std::size_t c : order) {
      if (assigned >= total) break;
      if (count[c] < room[c]) {
        ++count[c];
        ++assigned;
        progress = true;
      }
    }
  }
  return count;
}

}  // namespace

std::vector<SplitEntry> make_split(std::vector<ShapeRecord> shapes, const SplitRatios& ratios,
                                   std::uint64_t seed) {
  if (!(ratios.train >= 0 && ratios.val > 0 && ratios.test > 0))
    throw Error("split ratios must be positive");
  const double sum = ratios.train + ratios.val + ratios.test;
  std::sort(shapes.begin(), shapes.end(),
            [](const auto& a, const auto& b) { return a.shape_id < b.shape_id; });
  std::map<std::string, std::vector<std::string>> by_class;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (i > 0 && shapes[i].shape_id == shapes[i - 1].shape_id)
      throw Error("duplicate shape id '" + shapes[i].shape_id + "'");
    by_class[shapes[i].class_name].push_back(shapes[i].shape_id);
  }
  std::vector<std::string> too_small;
  for (const auto& [name, ids] : by_class)
    if (ids.size() < 3) too_small.push_back(name + " (" + std::to_string(ids.size()) + ")");
  if (!too_small.empty()) {
    std::string msg = "classes need at least 3 shapes:";
    for (const auto& s : too_small) msg += " " + s;
    throw Error(msg);
  }

  const double n_total = static_cast<double>(shapes.size());
  std::vector<double> q_val, q_test;
  std::vector<int> room;
  for (const auto& [name, ids] : by_class) {
    q_val.push_back(ids.size() * ratios.val / sum);
    q_test.push_back(ids.size() * ratios.test / sum);
    room.push_back(static_cast<int>(ids.size()) - 2);  // keep one test, one train
  }
  const auto val = apportion(q_val, room, std::lround(n_total * ratios.val / sum));
  for (std::size_t c = 0; c < room.size(); ++c) room[c] = room[c] + 1 - val[c];
  const auto test = apportion(q_test, room, std::lround(n_total * ratios.test / sum));

  std::vector<SplitEntry> out;
  std::size_t c = 0;
  for (auto& [name, ids] : by_class) {
    Rng rng(derive_seed(seed, name));
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const SplitPart part = i < std::size_t(val[c])              ? SplitPart::val
                             : i < std::size_t(val[c] + test[c]) ? SplitPart::test
                                                                  : SplitPart::train;
      out.push_back({ids[i], name, part});
    }
    ++c;
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.shape_id < b.shape_id; });
  return out;
}

}  // namespace skelbench
