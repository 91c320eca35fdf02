#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "skelbench/skeleton_graph.hpp"
#include "skelbench/types.hpp"

namespace skelbench {

// ---------------------------------------------------------------------------
// Distance fields

/// Exact squared Euclidean distance from every cell of a width x height grid
/// to the nearest cell with site[i] != 0 (separable lower-envelope method).
/// Cells are +inf when there is no site at all.
std::vector<double> squared_distance_to_sites(int width, int height,
                                              std::span<const std::uint8_t> site);

/// Distance from each foreground pixel center to the nearest background pixel
/// center, with everything outside the image treated as background.
/// Throws Error("empty shape") on an all-background image.
DistanceField distance_transform(const BinaryImage& img);

// ---------------------------------------------------------------------------
// Polygons and contours

double signed_area(const Contour& c);
/// Even-odd test; points exactly on an edge may go either way.
bool point_in_polygon(const Contour& c, Point2 p);
/// Distance from p to the nearest point of the closed polyline.
double distance_to_boundary(const Contour& c, Point2 p);
/// Pixel (i, j) is set iff its center is inside the polygon.
BinaryImage rasterize_polygon(const Contour& c, int width, int height);

/// Outer boundary of the single foreground component, traced along pixel
/// edges (vertices at half-integer coordinates), collinear vertices merged,
/// positive orientation, starting at the lexicographically smallest vertex.
/// Diagonal-only contacts are treated as connected (8-connectivity).
/// Throws if the image is empty, has several components, or has holes.
Contour extract_contour(const BinaryImage& img);

// ---------------------------------------------------------------------------
// Connectivity

enum class Connectivity { four = 4, eight = 8 };

/// Component id per pixel (-1 for background), numbered in row-major order of
/// first pixel.
std::vector<int> label_components(const BinaryImage& img, Connectivity conn,
                                  int* count);
/// Background regions (4-connected) that do not reach the image border.
int count_holes(const BinaryImage& img);
BinaryImage fill_holes(const BinaryImage& img);

// ---------------------------------------------------------------------------
// Morphology

enum class MorphOp { dilate, erode };

/// 3x3 (8-neighborhood) structuring element applied `radius` times. Pixels
/// outside the image are background.
BinaryImage morphology(const BinaryImage& img, MorphOp op, int radius = 1);

// ---------------------------------------------------------------------------
// Hausdorff distance

double directed_hausdorff(std::span<const Point2> from, std::span<const Point2> to);
/// max of both directed distances. Throws on empty input.
double hausdorff(std::span<const Point2> a, std::span<const Point2> b);

/// Directed Hausdorff between the foreground pixel centers of two equally
/// sized rasters, computed through a distance field. Returns 0 when `from` is
/// empty and +inf when `to` is empty.
double directed_hausdorff(const BinaryImage& from, const BinaryImage& to);

// ---------------------------------------------------------------------------
// Medial disks

/// min over t in [0,1] of |q - p(t)| - r(t) with position and radius
/// interpolated linearly between a and b. Non-positive iff q lies in the
/// region swept by the disk.
double swept_disk_excess(const MedialPoint& a, const MedialPoint& b, Point2 q);

/// Integer pixel nearest to p (halves round up).
std::pair<int, int> nearest_pixel(Point2 p);

/// 8-connected digital line between two pixels, inclusive. The pixel sequence
/// does not depend on which endpoint is passed first.
std::vector<std::pair<int, int>> digital_line(int x0, int y0, int x1, int y1);

using PixelVisitor = std::function<void(int x, int y)>;

/// Visits the raster cover of a single medial disk clipped to the canvas:
/// pixel centers inside the disk plus the pixel holding its center.
void visit_disk(const MedialPoint& m, int width, int height, const PixelVisitor& visit);
/// Raster cover of the swept disk between two medial points, plus the digital
/// line between their nearest pixels. Pixels may be visited more than once.
void visit_capsule(const MedialPoint& a, const MedialPoint& b, int width, int height,
                   const PixelVisitor& visit);

/// Union of node disks and edge capsules. Throws if a node lies outside the
/// canvas; an empty graph yields an empty image.
BinaryImage reconstruct_from_skeleton(const SkeletonGraph& g, int width, int height);

}  // namespace skelbench
