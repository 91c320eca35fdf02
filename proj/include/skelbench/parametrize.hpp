#pragma once

#include <span>
#include <vector>

#include "skelbench/bezier.hpp"
#include "skelbench/skeleton_graph.hpp"
#include "skelbench/types.hpp"

namespace skelbench {

/// Rooted version of a skeleton tree. Children lists are sorted by node index.
struct SkeletonTree {
  std::vector<MedialPoint> nodes;
  std::vector<int> parent;  ///< -1 at the root
  std::vector<std::vector<int>> children;
  int root = -1;
  std::vector<int> preorder;  ///< root first, children visited in index order

  std::size_t size() const { return nodes.size(); }
  int degree(int v) const {
    return static_cast<int>(children[v].size()) + (parent[v] >= 0 ? 1 : 0);
  }
};

/// Roots the tree at the node of largest radius (lowest index on ties).
/// Throws "shape is not simply connected" on cycles.
SkeletonTree build_tree(const SkeletonGraph& g);

/// Per node: raster area (px^2) of the union of the medial disks and edge
/// capsules of the subtree hanging at that node.
std::vector<double> compute_wedf(const SkeletonTree& t);

struct MergeConfig {
  /// Largest relative WEDF drop across a joint still treated as continuous.
  double tau_wedf = 0.15;
  /// Relative WEDF gap below which two children count as equally important.
  double tau_eq = 0.05;
};

struct MedialCurve {
  std::vector<int> nodes;  ///< chain of tree nodes, higher-WEDF end first
  double importance = 0.0;
};

/// Splits the tree into curves. Degree-2 nodes are passed through. At a
/// joint below the root, the parent branch continues into its most important
/// child when the WEDF drop is within tau_wedf and that child clearly beats
/// the runner-up; otherwise the joint ends every curve touching it. At the
/// root, the two most important children are joined when the third is
/// clearly smaller. Every tree edge ends up in exactly one curve.
std::vector<MedialCurve> merge_branches(const SkeletonTree& t, std::span<const double> wedf,
                                        const MergeConfig& cfg = {});

/// Degree-5 fit with exact end points and least-squares interior control
/// points. Parameters start at chord length (measured in x, y); for chains of
/// 24 or more points they are then refined together with the control points
/// (Levenberg-Marquardt, order preserving), and the result is the
/// least-squares solution for the final parameters. Shorter chains are pulled toward evenly spaced
/// points on the end-point segment. Interior radii are clamped at zero.
BezierBranch fit_bezier(std::span<const MedialPoint> chain);

struct BezierFit {
  BezierBranch branch;
  std::vector<double> parameters;  ///< one per chain point, 0 and 1 at the ends
};
BezierFit fit_bezier_with_parameters(std::span<const MedialPoint> chain);

/// Sorts by decreasing importance, ties by control-point coordinates.
ParametricSkeleton order_and_flatten(std::vector<BezierBranch> branches,
                                     std::vector<double> importance);

struct Parametrization {
  SkeletonTree tree;
  std::vector<double> wedf;
  std::vector<MedialCurve> curves;
  ParametricSkeleton skeleton;
};

Parametrization parametrize(const SkeletonGraph& g, const MergeConfig& cfg = {});

}  // namespace skelbench
