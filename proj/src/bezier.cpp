#include "skelbench/bezier.hpp"

#include <cmath>

#include "skelbench/types.hpp"

namespace skelbench {

std::array<double, kControlPoints> bernstein5(double t) {
  static constexpr double kBinomial[kControlPoints] = {1, 5, 10, 10, 5, 1};
  const double s = 1.0 - t;
  std::array<double, kControlPoints> out{};
  for (int i = 0; i < kControlPoints; ++i)
    out[i] = kBinomial[i] * std::pow(t, i) * std::pow(s, kBezierDegree - i);
  return out;
}

ControlPoint BezierBranch::evaluate(double t) const {
  const auto basis = bernstein5(t);
  ControlPoint p;
  for (int i = 0; i < kControlPoints; ++i) {
    p.x += basis[i] * points[i].x;
    p.y += basis[i] * points[i].y;
    p.r += basis[i] * points[i].r;
  }
  return p;
}

std::vector<double> ParametricSkeleton::flatten() const {
  std::vector<double> v;
  v.reserve(branches.size() * kValuesPerBranch);
  for (const auto& b : branches) {
    for (const auto& p : b.points) {
      v.push_back(p.x);
      v.push_back(p.y);
      v.push_back(p.r);
    }
  }
  return v;
}

ParametricSkeleton ParametricSkeleton::unflatten(const std::vector<double>& values) {
  if (values.size() % kValuesPerBranch != 0)
    throw Error("parametric vector length " + std::to_string(values.size()) +
                " is not a multiple of 18");
  ParametricSkeleton out;
  for (std::size_t off = 0; off < values.size(); off += kValuesPerBranch) {
    BezierBranch b;
    for (int i = 0; i < kControlPoints; ++i)
      b.points[i] = {values[off + 3 * i], values[off + 3 * i + 1], values[off + 3 * i + 2]};
    out.branches.push_back(b);
  }
  return out;
}

}  // namespace skelbench
