#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "skelbench/formats.hpp"
#include "skelbench/image_io.hpp"
#include "skelbench/metrics.hpp"
#include "test_support.hpp"

using namespace skelbench;
namespace fs = std::filesystem;

namespace {

bool close_rel(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Oracles work on plain sets and the flattened vector layout.

double oracle_f1(const BinaryImage& pred, const BinaryImage& gt) {
  std::set<std::pair<int, int>> p, g;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (pred.at(x, y)) p.insert({x, y});
      if (gt.at(x, y)) g.insert({x, y});
    }
  int tp = 0;
  for (const auto& q : p) tp += g.count(q);
  if (tp == 0) return 0;
  const double prec = double(tp) / p.size(), rec = double(tp) / g.size();
  return 2 * prec * rec / (prec + rec);
}

double oracle_chamfer(const PointSet& a, const PointSet& b) {
  auto one = [](const PointSet& from, const PointSet& to) {
    double s = 0;
    for (const auto& p : from) {
      double m = INFINITY;
      for (const auto& q : to) m = std::min(m, std::hypot(p.x - q.x, p.y - q.y));
      s += m;
    }
    return s / from.size();
  };
  return one(a, b) + one(b, a);
}

std::vector<double> values(const BezierBranch& b) {
  ParametricSkeleton s;
  s.branches = {b};
  return s.flatten();
}

double oracle_msd(const BezierBranch& a, const BezierBranch& b) {
  const auto u = values(a), v = values(b);
  double s = 0;
  for (std::size_t k = 0; k < u.size(); ++k) s += (u[k] - v[k]) * (u[k] - v[k]);
  return s / 6;
}

double oracle_mbe(const BezierBranch& b) {
  const auto v = values(b);
  double legs = 0, radii = 0;
  for (int i = 0; i < 6; ++i) {
    radii += v[3 * i + 2] * v[3 * i + 2];
    if (i < 5) {
      legs += std::pow(v[3 * i + 3] - v[3 * i], 2) + std::pow(v[3 * i + 4] - v[3 * i + 1], 2);
    }
  }
  return legs / 5 + radii / 6;
}

double oracle_d(const ParametricSkeleton& a, const ParametricSkeleton& b) {
  const auto& big = a.branches.size() >= b.branches.size() ? a : b;
  const auto& small = a.branches.size() >= b.branches.size() ? b : a;
  double s = 0;
  for (std::size_t j = 0; j < big.branches.size(); ++j)
    s += j < small.branches.size() ? oracle_msd(a.branches[j], b.branches[j])
                                   : oracle_mbe(big.branches[j]);
  return s / big.branches.size();
}

BezierBranch random_branch(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-20, 20), ur(0, 8);
  BezierBranch b;
  for (auto& p : b.points) p = {u(rng), u(rng), ur(rng)};
  return b;
}

BezierBranch line_branch(double x0, double y, double r) {
  BezierBranch b;
  for (int i = 0; i < 6; ++i) b.points[i] = {x0 + i, y, r};
  return b;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("skelbench_metrics_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("f1_pixel examples") {
  BinaryImage gt(2, 2), pred(2, 2);
  gt.set(0, 0, true);
  gt.set(1, 1, true);
  pred.set(0, 0, true);
  pred.set(0, 1, true);
  const auto r = f1_pixel(pred, gt);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);

  CHECK(f1_pixel(gt, gt).f1 == 1.0);
  const auto none = f1_pixel(BinaryImage(2, 2), gt);
  CHECK(none.tp == 0);
  CHECK(none.f1 == 0.0);
  CHECK(f1_pixel(BinaryImage(2, 2), BinaryImage(2, 2)).f1 == 0.0);
  CHECK_THROWS_AS(f1_pixel(BinaryImage(2, 3), gt), Error);
}

TEST_CASE("chamfer examples") {
  CHECK(chamfer({{1, 2}, {3, 4}}, {{1, 2}, {3, 4}}).value == 0.0);
  CHECK(chamfer({{0, 0}}, {{3, 4}}).value == 10.0);
  const auto r = chamfer({{0, 0}, {4, 0}}, {{0, 0}});
  CHECK(r.value == 2.0);
  CHECK(r.a_to_b == 2.0);
  CHECK(r.b_to_a == 0.0);
  CHECK_THROWS_WITH_AS(chamfer({}, {{0, 0}}), "undefined Chamfer on empty set", Error);
  CHECK_THROWS_AS(chamfer({{0, 0}}, {}), Error);
}

TEST_CASE("msd and mbe examples") {
  const auto b = line_branch(0, 0, 0);
  CHECK(msd(b, b) == 0.0);
  BezierBranch shifted = b;
  for (auto& p : shifted.points) {
    p.x += 1;
    p.y += 1;
    p.r += 1;
  }
  CHECK(msd(b, shifted) == 3.0);
  BezierBranch r0 = b;
  r0.points[0].r = 3;
  CHECK(msd(b, r0) == 1.5);

  CHECK(mbe(BezierBranch{}) == 0.0);
  CHECK(mbe(b) == 1.0);
  BezierBranch fat;
  for (auto& p : fat.points) p = {5, 5, 2};
  CHECK(mbe(fat) == 4.0);
}

TEST_CASE("parametric_distance examples") {
  std::mt19937_64 rng(1);
  ParametricSkeleton v{{random_branch(rng), random_branch(rng), random_branch(rng)}, {}};
  CHECK(parametric_distance(v, v).d == 0.0);

  ParametricSkeleton w = v;
  for (auto& b : w.branches) b.points[2].x += 1;
  const auto eq = parametric_distance(v, w);
  CHECK(eq.unpaired.empty());
  CHECK(eq.d == doctest::Approx((eq.msd[0] + eq.msd[1] + eq.msd[2]) / 3));

  ParametricSkeleton gt{{line_branch(0, 0, 1), line_branch(3, 7, 2)}, {}};
  ParametricSkeleton pred{{gt.branches[0]}, {}};
  const auto r = parametric_distance(gt, pred);
  CHECK(r.n_b == 1);
  CHECK(r.N_b == 2);
  CHECK_FALSE(r.unpaired_from_prediction);
  CHECK(r.d == 0.5 * (0 + mbe(gt.branches[1])));
  CHECK(mbe(gt.branches[1]) == 1.0 + 4.0);

  const auto extra = parametric_distance(pred, gt);
  CHECK(extra.unpaired_from_prediction == true);
  CHECK(extra.d == r.d);
  CHECK(parametric_distance(gt, {}).d == 0.5 * (mbe(gt.branches[0]) + mbe(gt.branches[1])));
  CHECK_THROWS_AS(parametric_distance({}, {}), Error);
}

TEST_CASE("metrics agree with brute force on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    std::uniform_int_distribution<int> dim(1, 9);
    const int w = dim(rng), h = dim(rng);
    BinaryImage a(w, h), b(w, h);
    std::bernoulli_distribution coin(trial % 3 == 0 ? 0.1 : 0.5);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        a.set(x, y, coin(rng));
        b.set(x, y, coin(rng));
      }
    const auto fab = f1_pixel(a, b), fba = f1_pixel(b, a);
    CHECK(close_rel(fab.f1, oracle_f1(a, b)));
    CHECK(fab.f1 == fba.f1);
    CHECK(fab.precision == fba.recall);
    CHECK(fab.f1 >= 0.0);
    CHECK(fab.f1 <= 1.0);
    CHECK((fab.f1 == 1.0) == (fab.fp == 0 && fab.fn == 0 && fab.tp > 0));

    std::uniform_int_distribution<int> card(1, 40);
    std::uniform_real_distribution<double> coord(-50, 50);
    PointSet p(card(rng)), q(card(rng));
    for (auto& v : p) v = {coord(rng), coord(rng)};
    for (auto& v : q) v = {coord(rng), coord(rng)};
    if (trial % 5 == 0) {
      // Integer coordinates with duplicates and ties.
      for (auto& v : p) v = {std::round(v.x / 10), std::round(v.y / 10)};
      for (auto& v : q) v = {std::round(v.x / 10), std::round(v.y / 10)};
    }
    const double c = chamfer(p, q).value;
    CHECK(close_rel(c, oracle_chamfer(p, q)));
    CHECK(c == chamfer(q, p).value);
    CHECK(chamfer(p, p).value == 0.0);
    const Point2 t{coord(rng), coord(rng)};
    PointSet pt = p, qt = q;
    for (auto& v : pt) v = v + t;
    for (auto& v : qt) v = v + t;
    CHECK(std::abs(chamfer(pt, qt).value - c) <= 1e-9 * std::max(1.0, c));

    const auto b1 = random_branch(rng), b2 = random_branch(rng);
    CHECK(close_rel(msd(b1, b2), oracle_msd(b1, b2)));
    CHECK(msd(b1, b2) == msd(b2, b1));
    CHECK(close_rel(mbe(b1), oracle_mbe(b1)));

    std::uniform_int_distribution<int> nb(0, 5);
    ParametricSkeleton s1, s2;
    const int n1 = 1 + nb(rng), n2 = nb(rng);
    for (int j = 0; j < n1; ++j) s1.branches.push_back(random_branch(rng));
    for (int j = 0; j < n2; ++j) s2.branches.push_back(random_branch(rng));
    const auto rep = parametric_distance(s1, s2);
    CHECK(close_rel(rep.d, oracle_d(s1, s2)));
    CHECK(rep.n_b <= rep.N_b);
    CHECK(rep.msd.size() == rep.n_b);
    CHECK(rep.unpaired.size() == rep.N_b - rep.n_b);
  }
}

TEST_CASE("batch_evaluate pixel track") {
  const auto gt = scratch("pix_gt"), pred = scratch("pix_pred");
  BinaryImage a(4, 4), b(4, 4);
  a.set(1, 1, true);
  a.set(2, 2, true);
  b.set(1, 1, true);
  write_png(gt / "s1.png", a);
  write_png(gt / "s2.png", b);
  write_png(gt / "s3.png", b);
  const auto same = batch_evaluate(Track::pixel, gt, gt);
  CHECK(same.aggregate == 1.0);
  CHECK(same.scored == 3);

  write_png(pred / "s1.png", b);  // F1 = 2/3
  write_png(pred / "s2.png", b);  // F1 = 1
  const auto t = batch_evaluate(Track::pixel, pred, gt, 3);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].shape_id == "s1");
  CHECK(t.rows[0].value == doctest::Approx(2.0 / 3.0));
  CHECK(t.rows[2].missing);
  CHECK(t.rows[2].value == 0.0);
  CHECK(t.missing == 1);
  CHECK(t.scored == 3);
  CHECK(t.aggregate == doctest::Approx((2.0 / 3.0 + 1.0 + 0.0) / 3));
  const auto csv = t.format_csv();
  CHECK(csv.rfind("shape_id,metric,value,flags\n", 0) == 0);
  CHECK(csv.find("s3,f1,0,missing\n") != std::string::npos);
  CHECK(csv.substr(csv.rfind('\n', csv.size() - 2) + 1).rfind("aggregate,f1,", 0) == 0);

  write_file_atomic(pred / "s2.png", "not a png");
  const auto bad = batch_evaluate(Track::pixel, pred, gt);
  CHECK(bad.errors == 1);
  CHECK(bad.rows[1].error);
  CHECK(bad.scored == 2);
  CHECK(bad.aggregate == doctest::Approx((2.0 / 3.0 + 0.0) / 2));
  CHECK(bad.format_csv().find("s2,f1,,error\n") != std::string::npos);

  CHECK_THROWS_AS(batch_evaluate(Track::pixel, pred, scratch("pix_empty")), Error);
}

TEST_CASE("batch_evaluate point track") {
  const auto gt = scratch("pts_gt"), pred = scratch("pts_pred");
  write_pts(gt / "a.pts", {{0, 0}});
  write_pts(pred / "a.pts", {{3, 4}});  // 10
  write_pts(gt / "b.pts", {{0, 0}});
  write_pts(pred / "b.pts", {{0, 0}, {4, 0}});  // 2
  const auto t = batch_evaluate(Track::point, pred, gt);
  CHECK(t.rows[0].value == 10.0);
  CHECK(t.rows[1].value == 2.0);
  CHECK(t.aggregate == 6.0);

  // Missing prediction: distance to the ground-truth centroid.
  write_pts(gt / "c.pts", {{0, 0}, {2, 0}});
  const auto m = batch_evaluate(Track::point, pred, gt);
  CHECK(m.rows[2].missing);
  CHECK(m.rows[2].value == 2.0);

  // Labelled clouds contribute their label-1 points; .skel files take priority.
  const std::vector<int> labels{1, 2, 1};
  write_pts(gt / "d.skel.pts", {{0, 0}, {50, 50}, {2, 0}}, &labels);
  write_pts(pred / "d.skel.pts", {{0, 0}, {2, 0}});
  const auto s = batch_evaluate(Track::point, pred, gt);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].shape_id == "d");
  CHECK(s.rows[0].value == 0.0);
}

TEST_CASE("batch_evaluate parametric track") {
  const auto gt = scratch("csv_gt"), pred = scratch("csv_pred");
  ParametricSkeleton two{{line_branch(0, 0, 1), line_branch(3, 7, 2)}, {}};
  ParametricSkeleton one{{two.branches[0]}, {}};
  write_parametric_csv(gt / "x.csv", two);
  write_parametric_csv(pred / "x.csv", one);
  write_parametric_csv(gt / "y.csv", one);
  const auto t = batch_evaluate(Track::parametric, pred, gt);
  CHECK(t.rows[0].value == 2.5);
  CHECK(t.rows[1].missing);
  CHECK(t.rows[1].value == mbe(one.branches[0]));
}
