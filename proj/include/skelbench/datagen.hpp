#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "skelbench/formats.hpp"
#include "skelbench/skeleton_graph.hpp"
#include "skelbench/types.hpp"

namespace skelbench {

// ---------------------------------------------------------------------------
// Randomness. The mapping from engine output to numbers is spelled out here
// so results do not depend on the standard library's distributions.

/// Stream seed for one shape, independent of processing order.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view shape_id);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform01();                 ///< [0, 1), 53 bits
  double uniform(double lo, double hi);
  std::uint64_t below(std::uint64_t n);  ///< uniform in [0, n), unbiased
  double normal();                    ///< Box-Muller, one value per call

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Rendering

/// Maps source coordinates to canvas coordinates: p * scale + offset.
struct RenderTransform {
  double scale = 1.0;
  Point2 offset{0, 0};
  Point2 apply(Point2 p) const { return p * scale + offset; }
};

struct RenderConfig {
  int size = 256;
  int margin = 8;
  int supersample = 3;  ///< odd; samples per axis for the majority vote
};

struct RenderedShape {
  BinaryImage image;
  RenderTransform transform;
};

/// Scales the contour so its longer bounding-box side spans size - 2*margin
/// pixels, centers it, and fills it. Each output pixel takes the majority of
/// supersample x supersample point samples.
RenderedShape render_shape_image(const Contour& c, const RenderConfig& cfg = {});

/// Draws every edge as an 8-connected digital line between the rounded node
/// positions. With a mask, pixels are kept inside it: a node that rounds onto
/// background moves to the nearest mask pixel, and an edge whose line leaves
/// the mask is drawn as a shortest 8-connected path through the mask instead.
/// Throws if a node lands outside the canvas.
BinaryImage render_skeleton_image(const SkeletonGraph& g, int width, int height,
                                  const RenderTransform& transform = {},
                                  const BinaryImage* mask = nullptr);

// ---------------------------------------------------------------------------
// Point clouds

enum class NoiseKind { none, uniform, gaussian };

struct SamplingConfig {
  double h = 1.0;
  NoiseKind noise = NoiseKind::uniform;
  double noise_scale = 0.25;  ///< in units of h
  std::uint64_t seed = 0;
};

/// Grid points at multiples of h inside or on the contour plus the contour
/// resampled at step h, deduplicated and sorted, then displaced by noise.
PointSet sample_point_cloud(const Contour& c, const SamplingConfig& cfg);

/// Random subsample (factor < 1, input order kept) or augmentation with
/// jittered copies of random points (factor > 1) to ceil(factor * n) points.
PointSet resample_cloud(const PointSet& p, double factor, std::uint64_t seed,
                        double jitter = 0.25);

struct LabeledCloud {
  PointSet points;
  std::vector<int> labels;  ///< 1 = skeletal, 2 = other
  bool empty_skeleton = false;
  PointSet skeletal() const;
};

/// Label 1 for points within tau of a skeleton node or edge segment.
LabeledCloud label_skeleton_points(const PointSet& cloud, const SkeletonGraph& g, double tau);

// ---------------------------------------------------------------------------
// Splits

struct ShapeRecord {
  std::string shape_id;
  std::string class_name;
};

struct SplitRatios {
  double train = 1218.0 / 1725.0;
  double val = 241.0 / 1725.0;
  double test = 266.0 / 1725.0;
};

/// Stratified split: val and test totals are round(N * ratio), apportioned
/// over classes by largest remainder with at least one val and one test shape
/// per class. Rows come back sorted by shape id. Throws for classes with
/// fewer than three shapes and for duplicate ids.
std::vector<SplitEntry> make_split(std::vector<ShapeRecord> shapes, const SplitRatios& ratios,
                                   std::uint64_t seed);

}  // namespace skelbench
