#include "skelbench/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "skelbench/formats.hpp"
#include "skelbench/image_io.hpp"

namespace fs = std::filesystem;

namespace skelbench {

PixelReport f1_pixel(const BinaryImage& pred, const BinaryImage& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height())
    throw Error("f1_pixel: image sizes differ (" + std::to_string(pred.width()) + "x" +
                std::to_string(pred.height()) + " vs " + std::to_string(gt.width()) + "x" +
                std::to_string(gt.height()) + ")");
  PixelReport r;
  const auto p = pred.data(), g = gt.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] != 0, b = g[i] != 0;
    r.tp += a && b;
    r.fp += a && !b;
    r.fn += !a && b;
  }
  if (r.tp + r.fp > 0) r.precision = double(r.tp) / double(r.tp + r.fp);
  if (r.tp + r.fn > 0) r.recall = double(r.tp) / double(r.tp + r.fn);
  if (r.precision + r.recall > 0)
    r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

namespace {

// Mean nearest-neighbour distance from `from` into `to`, with `to` sorted by x.
double mean_nearest(const PointSet& from, const PointSet& to) {
  double sum = 0;
  for (const auto& a : from) {
    double best = std::numeric_limits<double>::infinity();
    const auto mid = std::lower_bound(to.begin(), to.end(), a.x,
                                      [](const Point2& p, double x) { return p.x < x; });
    for (auto it = mid; it != to.end(); ++it) {
      const double dx = it->x - a.x;
      if (dx * dx >= best) break;
      best = std::min(best, squared_distance(a, *it));
    }
    for (auto it = mid; it != to.begin();) {
      --it;
      const double dx = a.x - it->x;
      if (dx * dx >= best) break;
      best = std::min(best, squared_distance(a, *it));
    }
    sum += std::sqrt(best);
  }
  return sum / double(from.size());
}

}  // namespace

ChamferReport chamfer(const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty()) throw Error("undefined Chamfer on empty set");
  for (const auto* s : {&a, &b})
    for (const auto& p : *s)
      if (!is_finite(p)) throw Error("chamfer: non-finite coordinate");
  PointSet sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  ChamferReport r;
  r.a_to_b = mean_nearest(a, sb);
  r.b_to_a = mean_nearest(b, sa);
  r.value = r.a_to_b + r.b_to_a;
  return r;
}

double msd(const BezierBranch& a, const BezierBranch& b) {
  double sum = 0;
  for (int i = 0; i < kControlPoints; ++i) {
    const auto& p = a.points[i];
    const auto& q = b.points[i];
    sum += (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.r - q.r) * (p.r - q.r);
  }
  return sum / kControlPoints;
}

double mbe(const BezierBranch& b) {
  double legs = 0, radii = 0;
  for (int i = 0; i + 1 < kControlPoints; ++i) {
    const double dx = b.points[i + 1].x - b.points[i].x;
    const double dy = b.points[i + 1].y - b.points[i].y;
    legs += dx * dx + dy * dy;
  }
  for (const auto& p : b.points) radii += p.r * p.r;
  return legs / kBezierDegree + radii / kControlPoints;
}

ParametricReport parametric_distance(const ParametricSkeleton& gt, const ParametricSkeleton& pred) {
  const auto& g = gt.branches;
  const auto& p = pred.branches;
  if (g.empty() && p.empty()) throw Error("parametric distance of two empty skeletons");
  ParametricReport r;
  r.n_b = std::min(g.size(), p.size());
  r.N_b = std::max(g.size(), p.size());
  r.unpaired_from_prediction = p.size() > g.size();
  const auto& longer = r.unpaired_from_prediction ? p : g;
  double sum = 0;
  for (std::size_t j = 0; j < r.n_b; ++j) {
    r.msd.push_back(msd(g[j], p[j]));
    sum += r.msd.back();
  }
  for (std::size_t j = r.n_b; j < r.N_b; ++j) {
    r.unpaired.push_back(mbe(longer[j]));
    sum += r.unpaired.back();
  }
  r.d = sum / double(r.N_b);
  return r;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Track t) {
  switch (t) {
    case Track::pixel: return "pixel";
    case Track::point: return "point";
    case Track::parametric: return "parametric";
  }
  return "?";
}

std::string_view metric_name(Track t) {
  switch (t) {
    case Track::pixel: return "f1";
    case Track::point: return "chamfer";
    case Track::parametric: return "D";
  }
  return "?";
}

std::string_view file_extension(Track t) {
  switch (t) {
    case Track::pixel: return ".png";
    case Track::point: return ".pts";
    case Track::parametric: return ".csv";
  }
  return "";
}

namespace {

bool ends_with(std::string_view s, std::string_view tail) {
  return s.size() >= tail.size() && s.substr(s.size() - tail.size()) == tail;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

PointSet read_skeletal_points(const fs::path& path) {
  auto data = read_pts(path);
  if (data.labels.empty()) return std::move(data.points);
  PointSet out;
  for (std::size_t i = 0; i < data.points.size(); ++i)
    if (data.labels[i] == 1) out.push_back(data.points[i]);
  return out;
}

double missing_score(Track track, const fs::path& gt) {
  switch (track) {
    case Track::pixel:
      read_png(gt);  // still surfaces an unreadable ground truth
      return 0.0;
    case Track::point: {
      const auto g = read_skeletal_points(gt);
      if (g.empty()) throw Error("ground truth has no skeleton points");
      Point2 c{0, 0};
      for (const auto& p : g) c = c + p;
      c = c * (1.0 / double(g.size()));
      return chamfer(g, {c}).value;
    }
    case Track::parametric:
      return parametric_distance(read_parametric_csv(gt), {}).d;
  }
  return 0.0;
}

double score(Track track, const fs::path& pred, const fs::path& gt) {
  switch (track) {
    case Track::pixel:
      return f1_pixel(read_png(pred), read_png(gt)).f1;
    case Track::point: {
      const auto g = read_skeletal_points(gt);
      if (g.empty()) throw Error("ground truth has no skeleton points");
      const auto p = read_skeletal_points(pred);
      if (p.empty()) throw Error("prediction has no skeleton points");
      return chamfer(p, g).value;
    }
    case Track::parametric:
      return parametric_distance(read_parametric_csv(gt), read_parametric_csv(pred)).d;
  }
  return 0.0;
}

}  // namespace

std::string ScoreTable::format_csv() const {
  const std::string metric(metric_name(track));
  std::string out = "shape_id,metric,value,flags\n";
  for (const auto& r : rows) {
    out += csv_field(r.shape_id) + "," + metric + ",";
    if (r.error) {
      out += ",error\n";
      continue;
    }
    out += format_number(r.value) + "," + (r.missing ? "missing" : "") + "\n";
  }
  out += "aggregate," + metric + "," + (scored ? format_number(aggregate) : std::string()) +
         ",n=" + std::to_string(scored) + ";missing=" + std::to_string(missing) +
         ";errors=" + std::to_string(errors) + "\n";
  return out;
}

ScoreTable batch_evaluate(Track track, const fs::path& pred_dir, const fs::path& gt_dir, int jobs) {
  const std::string ext(file_extension(track));
  const std::string skel_ext = ".skel" + ext;
  if (!fs::is_directory(gt_dir)) throw Error("ground truth directory not found: " + gt_dir.string());

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(gt_dir))
    if (entry.is_regular_file() && ends_with(entry.path().filename().string(), ext))
      names.push_back(entry.path().filename().string());
  if (std::any_of(names.begin(), names.end(), [&](const auto& n) { return ends_with(n, skel_ext); }))
    std::erase_if(names, [&](const auto& n) { return !ends_with(n, skel_ext); });
  if (names.empty()) throw Error("no " + ext + " ground truth files in " + gt_dir.string());
  std::sort(names.begin(), names.end());

  ScoreTable table;
  table.track = track;
  table.rows.resize(names.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < names.size();) {
      const auto& name = names[i];
      auto& row = table.rows[i];
      row.shape_id = name.substr(0, name.size() - (ends_with(name, skel_ext) ? skel_ext : ext).size());
      const fs::path pred = pred_dir / name;
      try {
        if (fs::exists(pred)) {
          row.value = score(track, pred, gt_dir / name);
        } else {
          row.missing = true;
          row.value = missing_score(track, gt_dir / name);
        }
      } catch (const std::exception& e) {
        row.error = true;
        row.message = name + ": " + e.what();
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(names.size()));
  std::vector<std::jthread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  pool.clear();

  double sum = 0;
  for (const auto& r : table.rows) {
    if (r.error) {
      ++table.errors;
      continue;
    }
    table.missing += r.missing;
    ++table.scored;
    sum += r.value;
  }
  if (table.scored) table.aggregate = sum / double(table.scored);
  return table;
}

}  // namespace skelbench
