#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skelbench/bezier.hpp"
#include "skelbench/datagen.hpp"
#include "skelbench/parametrize.hpp"
#include "skelbench/skeleton_graph.hpp"
#include "skelbench/types.hpp"

namespace skelbench {

struct PipelineConfig {
  std::optional<double> epsilon;  ///< unset = automatic choice among 2, 4, 6
  SamplingConfig sampling;        ///< seed is replaced per shape
  double label_tau = 0.0;         ///< 0 = the sampling step h
  MergeConfig merge;
  RenderConfig render;
  SplitRatios ratios;
  std::uint64_t seed = 0;
  bool figures = false;
  int jobs = 1;

  /// Throws on non-positive tolerances or an epsilon outside {2, 4, 6}.
  void validate() const;
};

/// "<class>-<n>" -> "<class>"; ids without a '-' are their own class.
std::string class_of(const std::string& shape_id);

/// Shape pixels, skeleton edges and a few inscribed circles; optional Bezier
/// branches are drawn as polylines sampled along t.
std::string skeleton_svg(const BinaryImage& shape, const SkeletonGraph& g,
                         const ParametricSkeleton* branches = nullptr);

struct ShapeOutcome {
  std::string shape_id;
  std::string class_name;
  bool ok = false;
  std::string error;
  double epsilon = 0.0;
  bool needs_review = false;
  bool topology_changed = false;
  std::size_t nodes = 0;
  int branches = 0;
  std::size_t curves = 0;
  std::size_t points = 0;
  std::size_t skeletal_points = 0;
};

struct PipelineResult {
  std::vector<ShapeOutcome> shapes;  ///< sorted by id
  std::vector<std::string> unsplit_classes;  ///< fewer than three shapes, sent to train
  std::size_t failures() const;
};

/// Runs one source shape (any size) through normalization and every output:
///   out/png/<id>.png, out/png/<id>.skel.png, out/pts/<id>.pts (labelled),
///   out/pts/<id>.skel.pts, out/csv/<id>.csv, out/skeleton/<id>.skel and,
///   with figures on, out/figures/<id>.svg.
ShapeOutcome process_shape(const std::string& shape_id, const BinaryImage& source,
                           const PipelineConfig& cfg, const std::filesystem::path& out);

/// Every *.png in `in` (sorted by name), then split.tsv and report.tsv.
PipelineResult run_pipeline(const std::filesystem::path& in, const std::filesystem::path& out,
                            const PipelineConfig& cfg);

}  // namespace skelbench
