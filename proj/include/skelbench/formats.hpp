#pragma once

// Text formats shared by the pipeline stages. Numbers are written in the
// shortest form that parses back to the same double, so write -> read ->
// write is byte-stable.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skelbench/bezier.hpp"
#include "skelbench/skeleton_graph.hpp"
#include "skelbench/types.hpp"

namespace skelbench {

std::string format_number(double v);
/// Strict: the whole token must be a finite decimal number.
double parse_number(std::string_view token);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// ---- .pts: "x y" per line, optional integer label as a third column -------

struct PtsData {
  PointSet points;
  std::vector<int> labels;  ///< empty when the file has two columns
};

std::string format_pts(const PointSet& points, const std::vector<int>* labels = nullptr);
PtsData parse_pts(std::string_view text);
PtsData read_pts(const std::filesystem::path& path);
void write_pts(const std::filesystem::path& path, const PointSet& points,
               const std::vector<int>* labels = nullptr);

// ---- skeleton graph: "nodes N edges M", N x "x y r", M x "i j" ------------

std::string format_graph(const SkeletonGraph& g);
SkeletonGraph parse_graph(std::string_view text);
SkeletonGraph read_graph(const std::filesystem::path& path);
void write_graph(const std::filesystem::path& path, const SkeletonGraph& g);

// ---- parametric CSV: one tab-separated row of 18 values per branch --------

std::string format_parametric_csv(const ParametricSkeleton& s);
ParametricSkeleton parse_parametric_csv(std::string_view text);
ParametricSkeleton read_parametric_csv(const std::filesystem::path& path);
void write_parametric_csv(const std::filesystem::path& path, const ParametricSkeleton& s);

// ---- split manifest: "shape_id<TAB>class<TAB>{train|val|test}" -------------

enum class SplitPart { train, val, test };
std::string_view to_string(SplitPart p);
SplitPart parse_split_part(std::string_view s);

struct SplitEntry {
  std::string shape_id;
  std::string class_name;
  SplitPart part = SplitPart::train;

  friend bool operator==(const SplitEntry&, const SplitEntry&) = default;
};

std::string format_split_manifest(const std::vector<SplitEntry>& rows);
std::vector<SplitEntry> parse_split_manifest(std::string_view text);

}  // namespace skelbench
