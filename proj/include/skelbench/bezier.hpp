#pragma once

#include <array>
#include <vector>

namespace skelbench {

/// Control point of a medial curve: position and disk radius, all in pixels.
struct ControlPoint {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;

  friend bool operator==(const ControlPoint&, const ControlPoint&) = default;
  friend auto operator<=>(const ControlPoint&, const ControlPoint&) = default;
};

inline constexpr int kBezierDegree = 5;
inline constexpr int kControlPoints = kBezierDegree + 1;
inline constexpr int kValuesPerBranch = 3 * kControlPoints;

/// Degree-5 Bezier curve in (x, y, r).
struct BezierBranch {
  std::array<ControlPoint, kControlPoints> points{};

  ControlPoint evaluate(double t) const;

  friend bool operator==(const BezierBranch&, const BezierBranch&) = default;
  friend auto operator<=>(const BezierBranch&, const BezierBranch&) = default;
};

/// Bernstein basis values B_{i,5}(t), i = 0..5.
std::array<double, kControlPoints> bernstein5(double t);

/// Branches in canonical order. `importance` is parallel to `branches` when
/// known (it is not stored in the CSV export).
struct ParametricSkeleton {
  std::vector<BezierBranch> branches;
  std::vector<double> importance;

  /// [x_0^0, y_0^0, r_0^0, x_1^0, ..., r_5^0, x_0^1, ...]
  std::vector<double> flatten() const;
  static ParametricSkeleton unflatten(const std::vector<double>& values);
};

}  // namespace skelbench
