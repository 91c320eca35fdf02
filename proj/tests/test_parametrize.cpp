#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "skelbench/parametrize.hpp"
#include "test_support.hpp"

using namespace skelbench;
using namespace skelbench::testing;

namespace {

SkeletonGraph random_tree(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> step(-6.0, 6.0), rad(1.0, 6.0);
  SkeletonGraph g;
  g.nodes.push_back({{50, 50}, rad(rng)});
  for (int i = 1; i < n; ++i) {
    const int p = std::uniform_int_distribution<int>(0, i - 1)(rng);
    const Point2 q = g.nodes[p].position + Point2{step(rng), step(rng)};
    g.nodes.push_back({q, rad(rng)});
    g.edges.emplace_back(p, i);
  }
  g.normalize();
  return g;
}

// Counts pixels (on a generous integer grid) inside the union of the subtree
// disks and capsules, each tested directly against its definition.
double brute_subtree_area(const SkeletonTree& t, int v) {
  std::vector<int> sub{v};
  for (std::size_t i = 0; i < sub.size(); ++i)
    for (int c : t.children[sub[i]]) sub.push_back(c);
  std::set<std::pair<int, int>> px;
  auto round_px = [](Point2 p) { return std::pair(int(std::floor(p.x + 0.5)), int(std::floor(p.y + 0.5))); };
  for (int a : sub) {
    const auto& m = t.nodes[a];
    px.insert(round_px(m.position));
    for (int y = int(m.position.y - m.r) - 1; y <= int(m.position.y + m.r) + 1; ++y)
      for (int x = int(m.position.x - m.r) - 1; x <= int(m.position.x + m.r) + 1; ++x)
        if (std::hypot(x - m.position.x, y - m.position.y) <= m.r + 1e-9) px.insert({x, y});
    for (int c : t.children[a]) {
      const auto& n = t.nodes[c];
      // Swept disk: dense sampling of the interpolated disk along the edge.
      const int steps = 400;
      for (int s = 0; s <= steps; ++s) {
        const double f = double(s) / steps;
        const Point2 q = m.position + (n.position - m.position) * f;
        const double r = m.r + (n.r - m.r) * f;
        for (int y = int(q.y - r) - 1; y <= int(q.y + r) + 1; ++y)
          for (int x = int(q.x - r) - 1; x <= int(q.x + r) + 1; ++x)
            if (std::hypot(x - q.x, y - q.y) <= r + 1e-9) px.insert({x, y});
      }
      // Digital line between the rounded end points (plain DDA oracle).
      auto [x0, y0] = round_px(m.position);
      auto [x1, y1] = round_px(n.position);
      const int len = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
      for (int s = 0; s <= len; ++s) {
        const double f = len ? double(s) / len : 0.0;
        const double x = x0 + f * (x1 - x0), y = y0 + f * (y1 - y0);
        px.insert(round_px({x, y}));
      }
    }
  }
  return double(px.size());
}

// Branch-like curve: control points marching in one direction with jitter.
BezierBranch random_branch(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1, 1);
  const double angle = std::numbers::pi * unit(rng);
  BezierBranch b;
  for (int k = 0; k < 6; ++k)
    b.points[k] = {50 + 12 * k * std::cos(angle) + 8 * unit(rng),
                   50 + 12 * k * std::sin(angle) + 8 * unit(rng), 6 + 3 * unit(rng)};
  return b;
}

// Distance from a point to a curve: dense scan then golden-section refine.
double point_to_curve(const BezierBranch& b, const ControlPoint& p) {
  auto d = [&](double t) {
    const auto q = b.evaluate(t);
    return std::sqrt((q.x - p.x) * (q.x - p.x) + (q.y - p.y) * (q.y - p.y) +
                     (q.r - p.r) * (q.r - p.r));
  };
  const int n = 2000;
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (d(double(i) / n) < d(double(best) / n)) best = i;
  double lo = std::max(0.0, (best - 1.0) / n), hi = std::min(1.0, (best + 1.0) / n);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 100; ++it) {
    const double a = hi - g * (hi - lo), c = lo + g * (hi - lo);
    if (d(a) < d(c))
      hi = c;
    else
      lo = a;
  }
  return std::min(d((lo + hi) / 2), d(double(best) / n));
}

std::vector<MedialPoint> sample(const BezierBranch& b, int n) {
  std::vector<MedialPoint> out;
  for (int i = 0; i < n; ++i) {
    const auto p = b.evaluate(double(i) / (n - 1));
    out.push_back({{p.x, p.y}, p.r});
  }
  return out;
}

double residual_sq(const BezierBranch& b, const std::vector<MedialPoint>& chain,
                   const std::vector<double>& t) {
  double sum = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    // Bernstein form written out independently of the library.
    double x = 0, y = 0, r = 0;
    for (int k = 0; k <= 5; ++k) {
      const double c = std::tgamma(6.0) / (std::tgamma(k + 1.0) * std::tgamma(6.0 - k)) *
                       std::pow(t[i], k) * std::pow(1 - t[i], 5 - k);
      x += c * b.points[k].x;
      y += c * b.points[k].y;
      r += c * b.points[k].r;
    }
    sum += (x - chain[i].position.x) * (x - chain[i].position.x) +
           (y - chain[i].position.y) * (y - chain[i].position.y) +
           (r - chain[i].r) * (r - chain[i].r);
  }
  return sum;
}

}  // namespace

TEST_CASE("build_tree roots at the largest disk") {
  SkeletonGraph path{{{{0, 0}, 1}, {{1, 0}, 3}, {{2, 0}, 2}}, {{0, 1}, {1, 2}}};
  const auto t = build_tree(path);
  CHECK(t.root == 1);
  CHECK(t.parent == std::vector<int>{1, -1, 1});
  CHECK(t.preorder == std::vector<int>{1, 0, 2});

  SkeletonGraph star{{{{0, 0}, 5}, {{1, 0}, 1}, {{0, 1}, 1}, {{-1, 0}, 1}},
                     {{0, 1}, {0, 2}, {0, 3}}};
  CHECK(build_tree(star).root == 0);

  SkeletonGraph cycle{{{{0, 0}, 1}, {{1, 0}, 1}, {{1, 1}, 1}, {{0, 1}, 1}},
                      {{0, 1}, {1, 2}, {2, 3}, {0, 3}}};
  CHECK_THROWS_WITH_AS(build_tree(cycle), "shape is not simply connected", Error);
}

TEST_CASE("WEDF of a single disk approximates its area") {
  SkeletonGraph g{{{{10.3, 20.7}, 10}}, {}};
  const auto t = build_tree(g);
  const auto w = compute_wedf(t);
  CHECK(std::abs(w[0] - std::numbers::pi * 100) / (std::numbers::pi * 100) < 0.05);
  CHECK(w[0] == brute_subtree_area(t, 0));
}

TEST_CASE("WEDF of two disks joined by an edge") {
  SkeletonGraph g{{{{10, 10}, 5}, {{30, 10}, 5}}, {{0, 1}}};
  const auto t = build_tree(g);
  REQUIRE(t.root == 0);
  const auto w = compute_wedf(t);
  // Disk of B and the capsule, both counted directly.
  int disk = 0, capsule = 0;
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 50; ++x) {
      if (std::hypot(x - 30.0, y - 10.0) <= 5) ++disk;
      if (exact_point_segment({double(x), double(y)}, {10, 10}, {30, 10}) <= 5) ++capsule;
    }
  CHECK(w[1] == disk);
  CHECK(w[0] == capsule);
}

TEST_CASE("WEDF matches a brute-force union and is monotone") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_tree(rng, std::uniform_int_distribution<int>(1, 14)(rng));
    const auto t = build_tree(g);
    const auto w = compute_wedf(t);
    for (int v = 0; v < int(t.size()); ++v) {
      CHECK(w[v] == brute_subtree_area(t, v));
      CHECK(w[v] > 0);
      if (t.parent[v] >= 0) CHECK(w[t.parent[v]] >= w[v]);
      if (t.children[v].empty()) {
        SkeletonGraph single{{t.nodes[v]}, {}};
        CHECK(w[v] == compute_wedf(build_tree(single))[0]);
      }
    }
  }
}

TEST_CASE("merge_branches examples") {
  SUBCASE("path is one curve") {
    SkeletonGraph g;
    for (int i = 0; i < 6; ++i) g.nodes.push_back({{double(i * 3), 0}, 2.0 + (i == 2)});
    for (int i = 0; i < 5; ++i) g.edges.emplace_back(i, i + 1);
    const auto p = parametrize(g);
    REQUIRE(p.curves.size() == 1);
    CHECK(p.curves[0].nodes.size() == 6);
  }
  SUBCASE("trunk with a small twig passes through") {
    // Trunk along x with the root at one end, twig hanging off the middle.
    SkeletonGraph g;
    for (int i = 0; i < 10; ++i) g.nodes.push_back({{double(i * 4), 0}, i == 0 ? 6.0 : 5.0});
    for (int i = 0; i < 9; ++i) g.edges.emplace_back(i, i + 1);
    g.nodes.push_back({{8, 4}, 1.0});
    g.edges.emplace_back(2, 10);
    g.normalize();
    const auto p = parametrize(g);
    REQUIRE(p.curves.size() == 2);
    CHECK(p.curves[0].nodes.size() == 10);
    CHECK(p.curves[1].nodes == std::vector<int>{2, 10});
  }
  SUBCASE("two equal children end the parent curve") {
    // Parent stem coming from the root, splitting into two mirrored legs.
    SkeletonGraph g;
    g.nodes.push_back({{0, 0}, 8});   // root
    g.nodes.push_back({{0, 10}, 5});  // joint
    g.nodes.push_back({{-8, 18}, 3});
    g.nodes.push_back({{8, 18}, 3});
    g.edges = {{0, 1}, {1, 2}, {1, 3}};
    const auto p = parametrize(g);
    CHECK(p.curves.size() == 3);
    for (const auto& c : p.curves) CHECK(c.nodes.size() == 2);
  }
}

TEST_CASE("merge_branches partitions the edges") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = random_tree(rng, std::uniform_int_distribution<int>(2, 30)(rng));
    const auto p = parametrize(g);
    std::multiset<Edge> seen;
    for (const auto& c : p.curves) {
      REQUIRE(c.nodes.size() >= 2);
      CHECK(p.wedf[c.nodes.front()] >= p.wedf[c.nodes.back()]);
      for (std::size_t i = 0; i + 1 < c.nodes.size(); ++i)
        seen.insert({std::min(c.nodes[i], c.nodes[i + 1]), std::max(c.nodes[i], c.nodes[i + 1])});
    }
    const std::multiset<Edge> expected(g.edges.begin(), g.edges.end());
    CHECK(seen == expected);
    CHECK(p.skeleton.branches.size() == p.curves.size());
  }
}

TEST_CASE("fit_bezier reproduces straight data") {
  std::vector<MedialPoint> chain;
  for (int i = 0; i < 30; ++i) chain.push_back({{3 + 2.0 * i, 7 - 0.5 * i}, 4 + 0.1 * i});
  const auto b = fit_bezier(chain);
  for (int k = 0; k <= 5; ++k) {
    const double f = k / 5.0;
    CHECK(b.points[k].x == doctest::Approx(3 + 58 * f).epsilon(1e-9));
    CHECK(b.points[k].y == doctest::Approx(7 - 14.5 * f).epsilon(1e-9));
    CHECK(b.points[k].r == doctest::Approx(4 + 2.9 * f).epsilon(1e-9));
  }
}

TEST_CASE("fit_bezier short chains") {
  const std::vector<MedialPoint> two{{{1, 2}, 3}, {{11, 7}, 1}};
  const auto b = fit_bezier(two);
  CHECK(b.points[0] == ControlPoint{1, 2, 3});
  CHECK(b.points[5] == ControlPoint{11, 7, 1});
  for (int k = 1; k < 5; ++k) {
    const double f = k / 5.0;
    CHECK(b.points[k].x == doctest::Approx(1 + 10 * f));
    CHECK(b.points[k].y == doctest::Approx(2 + 5 * f));
    CHECK(b.points[k].r == doctest::Approx(3 - 2 * f));
  }
  const std::vector<MedialPoint> one_spot{{{4, 4}, 2}, {{4, 4}, 2}};
  for (const auto& p : fit_bezier(one_spot).points) CHECK(p == ControlPoint{4, 4, 2});
  CHECK_THROWS_AS(fit_bezier(std::vector<MedialPoint>{{{0, 0}, 1}}), Error);
}

TEST_CASE("fit_bezier recovers known curves") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto truth = random_branch(rng);
    const auto chain = sample(truth, 100);
    const auto fit = fit_bezier(chain);
    CHECK(fit.points[0] == truth.points[0]);
    CHECK(fit.points[5] == truth.points[5]);
    double worst = 0;
    for (const auto& m : chain)
      worst = std::max(worst, point_to_curve(fit, {m.position.x, m.position.y, m.r}));
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("fit_bezier interior points are locally optimal") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0, 1.5);
  for (int trial = 0; trial < 16; ++trial) {
    const int n = trial < 12 ? 3 + trial % 6 : 30 + 10 * trial;
    auto chain = sample(random_branch(rng), n);
    for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
      chain[i].position.x += noise(rng);
      chain[i].position.y += noise(rng);
    }
    const auto [fit, t] = fit_bezier_with_parameters(chain);
    REQUIRE(t.size() == chain.size());
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 1.0);
    const double base = residual_sq(fit, chain, t);
    for (int k = 1; k <= 4; ++k)
      for (int c = 0; c < 3; ++c)
        for (double s : {-0.1, 0.1}) {
          auto moved = fit;
          double* v[] = {&moved.points[k].x, &moved.points[k].y, &moved.points[k].r};
          *v[c] += s;
          if (fit.points[k].r == 0) continue;  // clamped, not a free optimum
          CHECK(residual_sq(moved, chain, t) >= base - 1e-9);
        }
  }
}

TEST_CASE("order_and_flatten is canonical") {
  std::mt19937_64 rng(1);
  std::vector<BezierBranch> b{random_branch(rng), random_branch(rng), random_branch(rng),
                              random_branch(rng)};
  std::vector<double> imp{3, 10, 10, 1};
  const auto ref = order_and_flatten(b, imp);
  CHECK(ref.importance == std::vector<double>{10, 10, 3, 1});
  CHECK(ref.flatten().size() == 4 * 18);
  CHECK(ref.branches[2] == b[0]);
  std::vector<int> perm{0, 1, 2, 3};
  do {
    std::vector<BezierBranch> pb;
    std::vector<double> pi;
    for (int i : perm) {
      pb.push_back(b[i]);
      pi.push_back(imp[i]);
    }
    CHECK(order_and_flatten(pb, pi).flatten() == ref.flatten());
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(order_and_flatten({b[0]}, {1.0}).flatten().size() == 18);
}
