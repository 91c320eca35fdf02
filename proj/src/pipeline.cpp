#include "skelbench/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "skelbench/formats.hpp"
#include "skelbench/geometry.hpp"
#include "skelbench/image_io.hpp"
#include "skelbench/skeletonize.hpp"

namespace fs = std::filesystem;

namespace skelbench {

void PipelineConfig::validate() const {
  if (epsilon && *epsilon != 2.0 && *epsilon != 4.0 && *epsilon != 6.0)
    throw Error("epsilon must be auto, 2, 4 or 6");
  if (!(sampling.h > 0)) throw Error("sampling step h must be positive");
  if (!(sampling.noise_scale >= 0)) throw Error("noise scale must be non-negative");
  if (label_tau < 0) throw Error("label tau must be positive (or 0 for h)");
  if (!(merge.tau_wedf > 0) || !(merge.tau_eq > 0)) throw Error("merge tolerances must be positive");
  if (render.size < 16 || render.margin < 0 || 2 * render.margin >= render.size)
    throw Error("render size and margin are inconsistent");
  if (render.supersample < 1 || render.supersample % 2 == 0)
    throw Error("supersample must be a positive odd number");
  if (!(ratios.train > 0) || !(ratios.val > 0) || !(ratios.test > 0))
    throw Error("split ratios must be positive");
  if (jobs < 1) throw Error("jobs must be at least 1");
}

std::string class_of(const std::string& shape_id) {
  const auto dash = shape_id.rfind('-');
  return dash == std::string::npos || dash == 0 ? shape_id : shape_id.substr(0, dash);
}

std::string skeleton_svg(const BinaryImage& shape, const SkeletonGraph& g,
                         const ParametricSkeleton* branches) {
  const int w = shape.width(), h = shape.height();
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                    "\" height=\"" + std::to_string(h) + "\" viewBox=\"-0.5 -0.5 " +
                    std::to_string(w) + " " + std::to_string(h) + "\">\n";
  out += "<rect x=\"-0.5\" y=\"-0.5\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" fill=\"white\"/>\n";
  if (!shape.empty_foreground()) {
    const auto c = extract_contour(clean_shape(shape).image);
    out += "<polygon fill=\"#dde6f0\" stroke=\"#345\" stroke-width=\"0.6\" points=\"";
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out += ' ';
      out += format_number(c.vertices[i].x) + "," + format_number(c.vertices[i].y);
    }
    out += "\"/>\n";
  }
  // A handful of inscribed circles, largest first.
  std::vector<int> order(g.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.nodes[a].r > g.nodes[b].r; });
  const std::size_t step = std::max<std::size_t>(1, order.size() / 8);
  for (std::size_t k = 0; k < order.size() && k / step < 8; k += step) {
    const auto& m = g.nodes[order[k]];
    out += "<circle cx=\"" + format_number(m.position.x) + "\" cy=\"" +
           format_number(m.position.y) + "\" r=\"" + format_number(m.r) +
           "\" fill=\"none\" stroke=\"#e08a2c\" stroke-width=\"0.5\"/>\n";
  }
  for (auto [a, b] : g.edges) {
    const auto p = g.nodes[a].position, q = g.nodes[b].position;
    out += "<line x1=\"" + format_number(p.x) + "\" y1=\"" + format_number(p.y) + "\" x2=\"" +
           format_number(q.x) + "\" y2=\"" + format_number(q.y) +
           "\" stroke=\"#c0392b\" stroke-width=\"1\"/>\n";
  }
  if (g.edges.empty())
    for (const auto& m : g.nodes)
      out += "<circle cx=\"" + format_number(m.position.x) + "\" cy=\"" +
             format_number(m.position.y) + "\" r=\"1.5\" fill=\"#c0392b\"/>\n";
  if (branches) {
    for (const auto& b : branches->branches) {
      out += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"0.8\" points=\"";
      for (int k = 0; k <= 32; ++k) {
        const auto p = b.evaluate(k / 32.0);
        if (k) out += ' ';
        out += format_number(p.x) + "," + format_number(p.y);
      }
      out += "\"/>\n";
    }
  }
  return out + "</svg>\n";
}

std::size_t PipelineResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(shapes.begin(), shapes.end(), [](const auto& s) { return !s.ok; }));
}

ShapeOutcome process_shape(const std::string& shape_id, const BinaryImage& source,
                           const PipelineConfig& cfg, const fs::path& out) {
  ShapeOutcome res;
  res.shape_id = shape_id;
  res.class_name = class_of(shape_id);

  const auto cleaned = clean_shape(source);
  const auto rendered = render_shape_image(extract_contour(cleaned.image), cfg.render);
  const auto sk = cfg.epsilon ? skeletonize_fixed(rendered.image, *cfg.epsilon)
                              : skeletonize_auto(rendered.image);
  const int size = cfg.render.size;
  const auto param = parametrize(sk.graph, cfg.merge);
  const auto raster = render_skeleton_image(sk.graph, size, size, {}, &sk.cleaned);

  SamplingConfig sampling = cfg.sampling;
  sampling.seed = derive_seed(cfg.seed, shape_id);
  const auto cloud = sample_point_cloud(sk.contour, sampling);
  const double tau = cfg.label_tau > 0 ? cfg.label_tau : sampling.h;
  const auto labeled = label_skeleton_points(cloud, sk.graph, tau);

  for (const char* sub : {"png", "pts", "csv", "skeleton"}) fs::create_directories(out / sub);
  write_png(out / "png" / (shape_id + ".png"), sk.cleaned);
  write_png(out / "png" / (shape_id + ".skel.png"), raster);
  write_pts(out / "pts" / (shape_id + ".pts"), labeled.points, &labeled.labels);
  write_pts(out / "pts" / (shape_id + ".skel.pts"), labeled.skeletal());
  write_parametric_csv(out / "csv" / (shape_id + ".csv"), param.skeleton);
  write_graph(out / "skeleton" / (shape_id + ".skel"), sk.graph);
  if (cfg.figures) {
    fs::create_directories(out / "figures");
    write_file_atomic(out / "figures" / (shape_id + ".svg"),
                      skeleton_svg(sk.cleaned, sk.graph, &param.skeleton));
  }

  res.ok = true;
  res.epsilon = sk.epsilon;
  res.needs_review = sk.needs_review;
  res.topology_changed = cleaned.report.topology_changed || sk.clean.topology_changed;
  res.nodes = sk.graph.nodes.size();
  res.branches = branch_count(sk.graph);
  res.curves = param.skeleton.branches.size();
  res.points = labeled.points.size();
  res.skeletal_points = labeled.skeletal().size();
  return res;
}

namespace {

std::string format_report(const std::vector<ShapeOutcome>& shapes) {
  std::string out =
      "shape_id\tclass\tstatus\tepsilon\tneeds_review\ttopology_changed\tnodes\tbranches\t"
      "curves\tpoints\tskeletal_points\terror\n";
  for (const auto& s : shapes) {
    out += s.shape_id + '\t' + s.class_name + '\t' + (s.ok ? "ok" : "error") + '\t';
    if (s.ok) {
      out += format_number(s.epsilon) + '\t' + (s.needs_review ? "yes" : "no") + '\t' +
             (s.topology_changed ? "yes" : "no") + '\t' + std::to_string(s.nodes) + '\t' +
             std::to_string(s.branches) + '\t' + std::to_string(s.curves) + '\t' +
             std::to_string(s.points) + '\t' + std::to_string(s.skeletal_points) + '\t';
    } else {
      out += "\t\t\t\t\t\t\t\t";
    }
    std::string err = s.error;
    std::replace_if(err.begin(), err.end(), [](char c) { return c == '\t' || c == '\n'; }, ' ');
    out += err + '\n';
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const fs::path& in, const fs::path& out, const PipelineConfig& cfg) {
  cfg.validate();
  if (!fs::is_directory(in)) throw Error("input directory not found: " + in.string());
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(in))
    if (e.is_regular_file() && e.path().extension() == ".png") inputs.push_back(e.path());
  if (inputs.empty()) throw Error("no .png shapes in " + in.string());
  std::sort(inputs.begin(), inputs.end());
  fs::create_directories(out);

  PipelineResult result;
  result.shapes.resize(inputs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < inputs.size();) {
      const std::string id = inputs[i].stem().string();
      try {
        result.shapes[i] = process_shape(id, read_png(inputs[i]), cfg, out);
      } catch (const std::exception& e) {
        auto& s = result.shapes[i];
        s.shape_id = id;
        s.class_name = class_of(id);
        s.error = e.what();
      }
    }
  };
  const int n = std::clamp(cfg.jobs, 1, static_cast<int>(inputs.size()));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(work);
    work();
  }

  std::map<std::string, std::vector<ShapeRecord>> by_class;
  for (const auto& s : result.shapes)
    if (s.ok) by_class[s.class_name].push_back({s.shape_id, s.class_name});
  std::vector<ShapeRecord> splittable;
  std::vector<SplitEntry> rows;
  for (const auto& [cls, members] : by_class) {
    if (members.size() >= 3) {
      splittable.insert(splittable.end(), members.begin(), members.end());
    } else {
      result.unsplit_classes.push_back(cls);
      for (const auto& m : members) rows.push_back({m.shape_id, m.class_name, SplitPart::train});
    }
  }
  if (!splittable.empty()) {
    auto split = make_split(std::move(splittable), cfg.ratios, cfg.seed);
    rows.insert(rows.end(), split.begin(), split.end());
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.shape_id < b.shape_id; });
  write_file_atomic(out / "split.tsv", format_split_manifest(rows));
  write_file_atomic(out / "report.tsv", format_report(result.shapes));
  return result;
}

}  // namespace skelbench
