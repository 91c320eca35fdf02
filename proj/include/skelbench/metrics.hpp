#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skelbench/bezier.hpp"
#include "skelbench/types.hpp"

namespace skelbench {

struct PixelReport {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

/// Positives are foreground pixels. Precision and recall are 0 when their
/// denominators are, and F1 is 0 when precision + recall is.
PixelReport f1_pixel(const BinaryImage& pred, const BinaryImage& gt);

struct ChamferReport {
  double a_to_b = 0;  ///< mean over A of the distance to the nearest point of B
  double b_to_a = 0;
  double value = 0;
};

ChamferReport chamfer(const PointSet& a, const PointSet& b);

/// Mean over the six control points of the squared (x, y, r) difference.
double msd(const BezierBranch& a, const BezierBranch& b);
/// Mean squared control polygon leg plus mean squared radius.
double mbe(const BezierBranch& b);

struct ParametricReport {
  std::vector<double> msd;        ///< one per positional pair j < n_b
  std::vector<double> unpaired;   ///< MBE of branches n_b..N_b-1 of the longer vector
  bool unpaired_from_prediction = false;
  std::size_t n_b = 0;  ///< min branch count
  std::size_t N_b = 0;  ///< max branch count
  double d = 0;
};

/// Branches are paired by position. One side may be empty; both empty throws.
ParametricReport parametric_distance(const ParametricSkeleton& gt, const ParametricSkeleton& pred);

// ---------------------------------------------------------------------------
// Batch scoring

enum class Track { pixel, point, parametric };
std::string_view to_string(Track t);
std::string_view metric_name(Track t);
std::string_view file_extension(Track t);

struct ScoreRow {
  std::string shape_id;
  double value = 0;
  bool missing = false;
  bool error = false;
  std::string message;  ///< error text; empty otherwise
};

struct ScoreTable {
  Track track = Track::pixel;
  std::vector<ScoreRow> rows;  ///< sorted by shape id
  std::size_t scored = 0;      ///< rows in the aggregate (all non-error rows)
  double aggregate = 0;        ///< mean over scored rows, summed in row order
  std::size_t missing = 0;
  std::size_t errors = 0;

  /// "shape_id,metric,value,flags" then one row per shape and the
  /// aggregate row last.
  std::string format_csv() const;
};

/// Scores every ground-truth file of the track's type in gt_dir against the
/// prediction with the same file name. When gt_dir holds "<id>.skel.<ext>"
/// files only those are used. For .pts files with a label column only
/// label-1 points take part.
///
/// A missing prediction scores F1 = 0 (pixel), the Chamfer distance between
/// the ground truth and its centroid (point), or the mean MBE of the ground
/// truth branches (parametric), and is flagged. Unreadable files produce an
/// error row that is left out of the aggregate.
ScoreTable batch_evaluate(Track track, const std::filesystem::path& pred_dir,
                          const std::filesystem::path& gt_dir, int jobs = 1);

}  // namespace skelbench
