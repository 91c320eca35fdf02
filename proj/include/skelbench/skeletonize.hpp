#pragma once

#include <vector>

#include "skelbench/skeleton_graph.hpp"
#include "skelbench/types.hpp"

namespace skelbench {

// ---------------------------------------------------------------------------
// Shape cleaning

struct CleanReport {
  /// Closing merged components or left holes behind; the shape needs a look.
  bool topology_changed = false;
  int holes_closed = 0;
  int islands_removed = 0;
};

struct CleanedShape {
  BinaryImage image;
  CleanReport report;
};

/// One-pixel closing (dilate, then erode), then every 8-component except the
/// largest is dropped. Holes that survive the closing are filled as well and
/// flagged through `topology_changed`. Throws if nothing is left.
CleanedShape clean_shape(const BinaryImage& img);

// ---------------------------------------------------------------------------
// Medial axis

inline constexpr double kDefaultSampleStep = 1.0;

/// Boundary points spaced at most `step` apart along every edge, starting at
/// each contour vertex.
PointSet resample_contour(const Contour& c, double step);

/// Interior Voronoi skeleton of the resampled boundary: Voronoi vertices that
/// lie strictly inside the contour become nodes (radius = distance to the
/// nearest boundary sample), Voronoi edges between two such vertices become
/// edges. Coincident vertices are merged, cycles are cut and only the
/// largest connected piece is returned.
SkeletonGraph voronoi_medial_axis(const Contour& c, double sample_step = kDefaultSampleStep);

// ---------------------------------------------------------------------------
// Pruning

/// Greedy leaf-branch removal: repeatedly removes the leaf branch whose
/// removal yields the smallest local reconstruction error, as long as the
/// one-sided Hausdorff distance from the shape's foreground pixels to the
/// reconstructed skeleton stays within `epsilon`. A leaf branch runs from a
/// degree-1 node up to (not including) the nearest junction; once the graph
/// is a simple path, end nodes are trimmed one at a time.
SkeletonGraph prune(const SkeletonGraph& g, const BinaryImage& shape, double epsilon);

// ---------------------------------------------------------------------------
// Automatic threshold choice

inline constexpr double kPruneThresholds[] = {2.0, 4.0, 6.0};

struct SkeletonCandidate {
  double epsilon = 0.0;
  SkeletonGraph graph;
  int branches = 0;
};

struct EpsilonChoice {
  std::size_t index = 0;  ///< into the candidate list
  bool needs_review = false;
};

/// Walks the thresholds upward while the branch count stays within +-1 of the
/// previous threshold's, then falls back to the smallest threshold that gives
/// the same graph. Flags the shape when consecutive counts jump by more than
/// one at both steps.
EpsilonChoice choose_epsilon(const std::vector<SkeletonCandidate>& candidates);

/// Prunes at each threshold in increasing order, each starting from the
/// previous result, so node counts are non-increasing in epsilon.
std::vector<SkeletonCandidate> prune_candidates(const SkeletonGraph& g,
                                                const BinaryImage& shape,
                                                const std::vector<double>& thresholds);

struct AutoSkeleton {
  SkeletonGraph graph;
  double epsilon = 0.0;
  bool needs_review = false;
  CleanReport clean;
  BinaryImage cleaned;
  Contour contour;
  SkeletonGraph unpruned;
  std::vector<SkeletonCandidate> candidates;
};

/// clean_shape -> extract_contour -> voronoi_medial_axis -> prune at 2, 4 and
/// 6 px -> choose_epsilon.
AutoSkeleton skeletonize_auto(const BinaryImage& img,
                              double sample_step = kDefaultSampleStep);

/// Same pipeline with a fixed threshold.
AutoSkeleton skeletonize_fixed(const BinaryImage& img, double epsilon,
                               double sample_step = kDefaultSampleStep);

}  // namespace skelbench
