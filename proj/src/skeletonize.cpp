#include "skelbench/skeletonize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include <boost/polygon/voronoi.hpp>

#include "skelbench/geometry.hpp"

namespace skelbench {

namespace {

BinaryImage pad(const BinaryImage& img, int border) {
  BinaryImage out(img.width() + 2 * border, img.height() + 2 * border);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img.at(x, y)) out.set(x + border, y + border, true);
  return out;
}

BinaryImage crop(const BinaryImage& img, int border, int width, int height) {
  BinaryImage out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.set(x, y, img.at(x + border, y + border));
  return out;
}

}  // namespace

CleanedShape clean_shape(const BinaryImage& img) {
  if (img.empty_foreground()) throw Error("empty shape");
  int comps_before = 0;
  label_components(img, Connectivity::eight, &comps_before);
  const int holes_before = count_holes(img);

  // Padding keeps the erosion from eating shapes that touch the border.
  const BinaryImage padded = pad(img, 1);
  const BinaryImage closed = crop(
      morphology(morphology(padded, MorphOp::dilate), MorphOp::erode), 1, img.width(),
      img.height());

  int comps_closed = 0;
  const auto labels = label_components(closed, Connectivity::eight, &comps_closed);
  const int holes_closed_img = count_holes(closed);
  if (comps_closed == 0) throw Error("shape vanished under cleaning");

  std::vector<std::size_t> sizes(comps_closed, 0);
  for (int l : labels)
    if (l >= 0) ++sizes[l];
  const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  BinaryImage kept(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (labels[img.index(x, y)] == keep) kept.set(x, y, true);

  const int holes_left = count_holes(kept);
  CleanedShape out{fill_holes(kept), {}};
  out.report.holes_closed = std::max(0, holes_before - holes_closed_img);
  out.report.islands_removed = comps_closed - 1;
  out.report.topology_changed = holes_left > 0 || comps_closed < comps_before;
  return out;
}

// ---------------------------------------------------------------------------

PointSet resample_contour(const Contour& c, double step) {
  if (!(step > 0)) throw Error("sample step must be positive");
  PointSet out;
  const auto& v = c.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i];
    const Point2 b = v[(i + 1) % v.size()];
    const double len = distance(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
    for (int k = 0; k < n; ++k) out.push_back(a + (b - a) * (double(k) / n));
  }
  return out;
}

namespace {

// Sites are snapped to a power-of-two lattice for the integer Voronoi
// builder, as fine as the 32-bit input range allows.
double site_scale(const PointSet& samples) {
  double extent = 1.0;
  for (const auto& p : samples) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
  double scale = 1.0;
  while (scale < 1048576.0 && extent * scale * 2 < 1073741824.0) scale *= 2;
  return scale;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

SkeletonGraph voronoi_medial_axis(const Contour& c, double sample_step) {
  if (!(sample_step > 0)) throw Error("sample step must be positive");
  if (c.size() < 3 || std::abs(signed_area(c)) < 1e-6)
    throw Error("degenerate contour (zero area)");

  namespace bp = boost::polygon;
  using Site = bp::point_data<int>;
  PointSet samples = resample_contour(c, sample_step);
  const double scale = site_scale(samples);
  std::vector<Site> sites;
  sites.reserve(samples.size());
  for (const auto& p : samples)
    sites.emplace_back(static_cast<int>(std::lround(p.x * scale)),
                       static_cast<int>(std::lround(p.y * scale)));
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    return std::pair(a.x(), a.y()) < std::pair(b.x(), b.y());
  });
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  if (sites.size() < 3) throw Error("degenerate contour (too few boundary samples)");

  bp::voronoi_diagram<double> vd;
  bp::construct_voronoi(sites.begin(), sites.end(), &vd);

  SkeletonGraph g;
  std::map<std::pair<long long, long long>, int> node_at;
  std::map<const bp::voronoi_vertex<double>*, int> node_of;
  for (const auto& vertex : vd.vertices()) {
    const Point2 p{vertex.x() / scale, vertex.y() / scale};
    if (!point_in_polygon(c, p) || distance_to_boundary(c, p) < 1e-9) continue;
    const auto* edge = vertex.incident_edge();
    const auto& site = sites[edge->cell()->source_index()];
    const double r = distance(p, {site.x() / scale, site.y() / scale});
    const std::pair key{std::llround(p.x * 1e6), std::llround(p.y * 1e6)};
    auto [it, inserted] = node_at.emplace(key, static_cast<int>(g.nodes.size()));
    if (inserted) {
      g.nodes.push_back({p, r});
    } else {
      auto& m = g.nodes[it->second];
      m.r = std::min(m.r, r);
    }
    node_of[&vertex] = it->second;
  }
  for (const auto& edge : vd.edges()) {
    if (!edge.is_finite() || &edge > edge.twin()) continue;
    const auto a = node_of.find(edge.vertex0());
    const auto b = node_of.find(edge.vertex1());
    if (a == node_of.end() || b == node_of.end()) continue;
    if (a->second != b->second) g.edges.emplace_back(a->second, b->second);
  }
  g.normalize();
  if (g.nodes.empty()) throw Error("no interior Voronoi vertices (shape too thin)");

  // Keep the largest connected piece.
  int count = 0;
  const auto label = g.component_labels(&count);
  std::vector<int> size(count, 0);
  for (int l : label) ++size[l];
  const int keep = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<bool> mask(g.nodes.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = label[i] == keep;
  g = g.induced(mask);

  // Cut cycles, keeping shorter edges first.
  if (g.edges.size() + 1 > g.nodes.size()) {
    auto order = g.edges;
    std::stable_sort(order.begin(), order.end(), [&](const Edge& e, const Edge& f) {
      return squared_distance(g.nodes[e.first].position, g.nodes[e.second].position) <
             squared_distance(g.nodes[f.first].position, g.nodes[f.second].position);
    });
    DisjointSets sets(g.nodes.size());
    std::vector<Edge> tree;
    for (const auto& e : order)
      if (sets.unite(e.first, e.second)) tree.push_back(e);
    g.edges = std::move(tree);
    g.normalize();
  }
  return g;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kScoreSlack = 1e-9;

struct Box {
  int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max();
  int x1 = std::numeric_limits<int>::min(), y1 = std::numeric_limits<int>::min();

  bool empty() const { return x0 > x1 || y0 > y1; }
  void add(int x, int y) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  Box grown(int m, int w, int h) const {
    return {std::max(0, x0 - m), std::max(0, y0 - m), std::min(w - 1, x1 + m),
            std::min(h - 1, y1 + m)};
  }
  bool intersects(const Box& o) const {
    return !empty() && !o.empty() && x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
  }
};

// Mutable pruning state: alive nodes/edges and per-pixel coverage counts of
// the reconstruction (edge capsules, plus the disk of a lone node).
class Pruner {
 public:
  Pruner(const SkeletonGraph& g, const BinaryImage& shape, double epsilon)
      : g_(g), shape_(shape), eps_(epsilon), w_(shape.width()), h_(shape.height()),
        margin_(static_cast<int>(std::ceil(epsilon)) + 1),
        alive_(g.nodes.size(), true), cover_(shape.area(), 0) {
    adj_.resize(g.nodes.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      adj_[g.edges[e].first].push_back({g.edges[e].second, static_cast<int>(e)});
      adj_[g.edges[e].second].push_back({g.edges[e].first, static_cast<int>(e)});
    }
    for (auto& list : adj_) std::sort(list.begin(), list.end());
    edge_alive_.assign(g.edges.size(), true);
    edge_pixels_.resize(g.edges.size());
    alive_count_ = static_cast<int>(g.nodes.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      for (int p : edge_pixels(static_cast<int>(e))) ++cover_[p];
    if (g.edges.empty())
      for (std::size_t v = 0; v < g.nodes.size(); ++v)
        for (int p : disk_pixels(static_cast<int>(v))) ++cover_[p];
  }

  SkeletonGraph run() {
    std::map<int, Cached> cache;  // keyed by leaf node
    while (true) {
      const auto branches = leaf_branches();
      // Drop cache entries whose branch changed shape.
      for (auto it = cache.begin(); it != cache.end();) {
        auto b = branches.find(it->first);
        if (b == branches.end() || b->second != it->second.nodes)
          it = cache.erase(it);
        else
          ++it;
      }
      std::optional<int> best;
      for (const auto& [leaf, nodes] : branches) {
        auto it = cache.find(leaf);
        if (it == cache.end()) it = cache.emplace(leaf, evaluate(nodes)).first;
        const auto& c = it->second;
        if (c.score > eps_ + kScoreSlack) continue;
        if (!best) {
          best = leaf;
          continue;
        }
        const auto& b = cache.at(*best);
        if (std::tuple(c.score, c.nodes.size(), leaf) <
            std::tuple(b.score, b.nodes.size(), *best))
          best = leaf;
      }
      if (!best) break;
      const Box changed = apply(cache.at(*best).nodes);
      for (auto it = cache.begin(); it != cache.end();) {
        if (it->second.window.intersects(changed) || it->first == *best)
          it = cache.erase(it);
        else
          ++it;
      }
    }
    std::vector<bool> keep(alive_.begin(), alive_.end());
    return g_.induced(keep);
  }

 private:
  struct Cached {
    std::vector<int> nodes;
    double score = 0;
    Box window;  // region whose coverage the score depends on
  };

  const std::vector<int>& edge_pixels(int e) {
    auto& px = edge_pixels_[e];
    if (px.empty()) {
      const auto& [a, b] = g_.edges[e];
      visit_capsule(g_.nodes[a], g_.nodes[b], w_, h_,
                    [&](int x, int y) { px.push_back(y * w_ + x); });
      std::sort(px.begin(), px.end());
      px.erase(std::unique(px.begin(), px.end()), px.end());
    }
    return px;
  }

  std::vector<int> disk_pixels(int v) const {
    std::vector<int> px;
    visit_disk(g_.nodes[v], w_, h_, [&](int x, int y) { px.push_back(y * w_ + x); });
    std::sort(px.begin(), px.end());
    px.erase(std::unique(px.begin(), px.end()), px.end());
    return px;
  }

  int degree(int v) const {
    int d = 0;
    for (auto [w, e] : adj_[v]) d += edge_alive_[e] ? 1 : 0;
    return d;
  }

  // Leaf node -> nodes of its branch (leaf first).
  std::map<int, std::vector<int>> leaf_branches() const {
    std::map<int, std::vector<int>> out;
    if (alive_count_ <= 1) return out;
    for (std::size_t s = 0; s < g_.nodes.size(); ++s) {
      if (!alive_[s] || degree(static_cast<int>(s)) != 1) continue;
      std::vector<int> nodes{static_cast<int>(s)};
      int prev = -1, cur = static_cast<int>(s);
      bool reached_leaf = false;
      while (true) {
        int next = -1;
        for (auto [w, e] : adj_[cur])
          if (edge_alive_[e] && w != prev) next = w;
        const int d = degree(next);
        if (d >= 3) break;
        if (d == 1) {
          reached_leaf = true;
          break;
        }
        nodes.push_back(next);
        prev = cur;
        cur = next;
      }
      // A bare path: trim one end node at a time.
      if (reached_leaf) nodes.resize(1);
      out.emplace(static_cast<int>(s), std::move(nodes));
    }
    return out;
  }

  std::vector<int> incident_edges(const std::vector<int>& nodes) const {
    std::vector<int> edges;
    for (int v : nodes)
      for (auto [w, e] : adj_[v])
        if (edge_alive_[e]) edges.push_back(e);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
  }

  // The node left alone when `nodes` are removed, if exactly one remains.
  std::optional<int> lone_survivor(const std::vector<int>& nodes) const {
    if (alive_count_ - static_cast<int>(nodes.size()) != 1) return std::nullopt;
    for (std::size_t v = 0; v < g_.nodes.size(); ++v)
      if (alive_[v] && std::find(nodes.begin(), nodes.end(), int(v)) == nodes.end())
        return static_cast<int>(v);
    return std::nullopt;
  }

  // Temporarily removes the branch, measures the local error, restores.
  Cached evaluate(const std::vector<int>& nodes) {
    Cached out{nodes, 0.0, {}};
    const auto edges = incident_edges(nodes);
    const auto survivor = lone_survivor(nodes);
    std::vector<int> survivor_px;
    if (survivor) survivor_px = disk_pixels(*survivor);
    for (int p : survivor_px) ++cover_[p];

    Box lost;
    for (int e : edges)
      for (int p : edge_pixels(e))
        if (--cover_[p] == 0) lost.add(p % w_, p / w_);

    if (!lost.empty()) {
      const Box region = lost.grown(margin_, w_, h_);
      const Box window = region.grown(margin_ + 1, w_, h_);
      out.window = window;
      out.score = local_error(region, window);
    }

    for (int e : edges)
      for (int p : edge_pixels(e)) ++cover_[p];
    for (int p : survivor_px) --cover_[p];
    return out;
  }

  // Max distance from uncovered shape pixels in `region` to covered pixels,
  // computed inside `window` (values beyond the window come out too large,
  // which only matters above the threshold).
  double local_error(const Box& region, const Box& window) const {
    const int ww = window.x1 - window.x0 + 1, wh = window.y1 - window.y0 + 1;
    std::vector<std::uint8_t> site(static_cast<std::size_t>(ww) * wh);
    bool any_uncovered = false;
    for (int y = window.y0; y <= window.y1; ++y)
      for (int x = window.x0; x <= window.x1; ++x) {
        const bool covered = cover_[y * w_ + x] > 0;
        site[static_cast<std::size_t>(y - window.y0) * ww + (x - window.x0)] = covered;
        if (!covered && shape_.at(x, y) && x >= region.x0 && x <= region.x1 &&
            y >= region.y0 && y <= region.y1)
          any_uncovered = true;
      }
    if (!any_uncovered) return 0.0;
    const auto sq = squared_distance_to_sites(ww, wh, site);
    double worst = 0;
    for (int y = region.y0; y <= region.y1; ++y)
      for (int x = region.x0; x <= region.x1; ++x) {
        if (!shape_.at(x, y) || cover_[y * w_ + x] > 0) continue;
        worst = std::max(worst, sq[static_cast<std::size_t>(y - window.y0) * ww + (x - window.x0)]);
      }
    return std::sqrt(worst);
  }

  Box apply(const std::vector<int>& nodes) {
    const auto edges = incident_edges(nodes);
    if (const auto survivor = lone_survivor(nodes))
      for (int p : disk_pixels(*survivor)) ++cover_[p];
    Box changed;
    for (int e : edges) {
      for (int p : edge_pixels(e))
        if (--cover_[p] == 0) changed.add(p % w_, p / w_);
      edge_alive_[e] = false;
      edge_pixels_[e].clear();
      edge_pixels_[e].shrink_to_fit();
    }
    for (int v : nodes) alive_[v] = false;
    alive_count_ -= static_cast<int>(nodes.size());
    return changed;
  }

  const SkeletonGraph& g_;
  const BinaryImage& shape_;
  double eps_;
  int w_, h_;
  int margin_;
  std::vector<bool> alive_;
  std::vector<bool> edge_alive_;
  std::vector<std::vector<std::pair<int, int>>> adj_;  // (neighbor, edge id)
  std::vector<std::vector<int>> edge_pixels_;
  std::vector<int> cover_;
  int alive_count_ = 0;
};

}  // namespace

SkeletonGraph prune(const SkeletonGraph& g, const BinaryImage& shape, double epsilon) {
  if (!(epsilon > 0)) throw Error("prune threshold must be positive");
  if (g.nodes.size() <= 1) return g;
  SkeletonGraph input = g;
  input.normalize();
  if (!input.connected()) throw Error("prune expects a connected skeleton");
  return Pruner(input, shape, epsilon).run();
}

std::vector<SkeletonCandidate> prune_candidates(const SkeletonGraph& g,
                                                const BinaryImage& shape,
                                                const std::vector<double>& thresholds) {
  std::vector<SkeletonCandidate> out;
  SkeletonGraph current = g;
  for (double eps : thresholds) {
    current = prune(current, shape, eps);
    out.push_back({eps, current, branch_count(current)});
  }
  return out;
}

EpsilonChoice choose_epsilon(const std::vector<SkeletonCandidate>& candidates) {
  if (candidates.empty()) throw Error("no skeleton candidates");
  std::size_t top = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (std::abs(candidates[i].branches - candidates[i - 1].branches) > 1) break;
    top = i;
  }
  std::size_t pick = top;
  while (pick > 0 && candidates[pick - 1].graph == candidates[top].graph) --pick;

  EpsilonChoice choice{pick, false};
  if (candidates.size() >= 3) {
    bool all_jump = true;
    for (std::size_t i = 1; i < candidates.size(); ++i)
      all_jump = all_jump && std::abs(candidates[i].branches - candidates[i - 1].branches) > 1;
    choice.needs_review = all_jump;
  }
  return choice;
}

namespace {

AutoSkeleton prepare(const BinaryImage& img, double sample_step) {
  AutoSkeleton out;
  auto cleaned = clean_shape(img);
  out.clean = cleaned.report;
  out.cleaned = std::move(cleaned.image);
  out.contour = extract_contour(out.cleaned);
  out.unpruned = voronoi_medial_axis(out.contour, sample_step);
  return out;
}

}  // namespace

AutoSkeleton skeletonize_auto(const BinaryImage& img, double sample_step) {
  AutoSkeleton out = prepare(img, sample_step);
  out.candidates = prune_candidates(
      out.unpruned, out.cleaned,
      std::vector<double>(std::begin(kPruneThresholds), std::end(kPruneThresholds)));
  const auto choice = choose_epsilon(out.candidates);
  out.graph = out.candidates[choice.index].graph;
  out.epsilon = out.candidates[choice.index].epsilon;
  out.needs_review = choice.needs_review || out.clean.topology_changed;
  return out;
}

AutoSkeleton skeletonize_fixed(const BinaryImage& img, double epsilon, double sample_step) {
  AutoSkeleton out = prepare(img, sample_step);
  out.graph = prune(out.unpruned, out.cleaned, epsilon);
  out.candidates.push_back({epsilon, out.graph, branch_count(out.graph)});
  out.epsilon = epsilon;
  out.needs_review = out.clean.topology_changed;
  return out;
}

}  // namespace skelbench
