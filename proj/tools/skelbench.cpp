// skelbench command-line frontend.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "skelbench/datagen.hpp"
#include "skelbench/formats.hpp"
#include "skelbench/geometry.hpp"
#include "skelbench/image_io.hpp"
#include "skelbench/metrics.hpp"
#include "skelbench/parametrize.hpp"
#include "skelbench/pipeline.hpp"
#include "skelbench/skeletonize.hpp"
#include "skelbench/synthetic.hpp"

namespace fs = std::filesystem;
using namespace skelbench;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

std::string strip_suffix(const std::string& name, const std::string& suffix) {
  return ends_with(name, suffix) ? name.substr(0, name.size() - suffix.size()) : name;
}

// A file, or every file in a directory whose name ends with `suffix`
// (minus those ending with `exclude`), sorted by name.
std::vector<fs::path> collect(const fs::path& in, const std::string& suffix,
                              const std::string& exclude = "") {
  if (fs::is_regular_file(in)) return {in};
  if (!fs::is_directory(in)) throw Error("input not found: " + in.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(in)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && ends_with(name, suffix) && (exclude.empty() || !ends_with(name, exclude)))
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error("no " + suffix + " files in " + in.string());
  return out;
}

// Runs task(i) for every input on `jobs` threads. Each task returns its log
// line; lines are printed in input order. Returns the number of failures.
int for_each_input(const std::vector<fs::path>& inputs, int jobs,
                   const std::function<std::string(const fs::path&)>& task) {
  std::vector<std::string> logs(inputs.size());
  std::vector<char> failed(inputs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < inputs.size();) {
      try {
        logs[i] = task(inputs[i]);
      } catch (const std::exception& e) {
        failed[i] = 1;
        logs[i] = inputs[i].string() + ": error: " + e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, inputs.size())));
    for (int t = 1; t < n; ++t) pool.emplace_back(work);
    work();
  }
  int failures = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    (failed[i] ? std::cerr : std::cout) << logs[i] << '\n';
    failures += failed[i];
  }
  return failures;
}

std::optional<double> parse_epsilon(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "2") return 2.0;
  if (s == "4") return 4.0;
  if (s == "6") return 6.0;
  throw UsageError("--epsilon must be auto, 2, 4 or 6");
}

NoiseKind parse_noise(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "uniform") return NoiseKind::uniform;
  if (s == "gaussian") return NoiseKind::gaussian;
  throw UsageError("--noise must be none, uniform or gaussian");
}

// Seed precedence: --seed on the command line, then SKELBENCH_SEED, then the
// config file, then the default.
std::uint64_t resolve_seed(std::uint64_t parsed, const std::vector<std::string>& argv) {
  const bool on_command_line = std::any_of(argv.begin(), argv.end(), [](const std::string& a) {
    return a == "--seed" || a.rfind("--seed=", 0) == 0;
  });
  if (on_command_line) return parsed;
  const char* env = std::getenv("SKELBENCH_SEED");
  if (!env || !*env) return parsed;
  std::uint64_t v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc{} || ptr != end) throw UsageError("SKELBENCH_SEED is not an unsigned integer");
  return v;
}

struct SamplingFlags {
  double h = 1.0;
  std::string noise = "uniform";
  double noise_scale = 0.25;

  void add(CLI::App* app) {
    app->add_option("--grid-step", h, "sampling grid step h, px")->check(CLI::PositiveNumber);
    app->add_option("--noise", noise, "displacement noise")
        ->check(CLI::IsMember({"none", "uniform", "gaussian"}));
    app->add_option("--noise-scale", noise_scale,
                    "noise magnitude in units of h (uniform: half-width, gaussian: sigma)")
        ->check(CLI::NonNegativeNumber);
  }
  SamplingConfig config(std::uint64_t seed) const {
    return {h, parse_noise(noise), noise_scale, seed};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skelbench: medial-axis ground truth generation and skeleton evaluation"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML configuration file; command-line flags override it");
  app.require_subcommand(1);
  app.set_version_flag("--version", "skelbench 0.1.0");

  int jobs = 1;
  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs,-j", jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "global seed (env SKELBENCH_SEED overrides the config file)");
  };

  // skeletonize
  auto* sk = app.add_subcommand("skeletonize", "binary PNG shapes -> pruned skeleton graphs (.skel)");
  std::string sk_in, sk_out, sk_eps = "auto";
  double sk_step = kDefaultSampleStep;
  bool sk_svg = false;
  sk->add_option("--in", sk_in, "PNG file or directory")->required();
  sk->add_option("--out", sk_out, "output directory")->required();
  sk->add_option("--epsilon", sk_eps,
                 "pruning threshold in px; auto walks 2, 4, 6 while the branch count is stable")
      ->check(CLI::IsMember({"auto", "2", "4", "6"}));
  sk->add_option("--sample-step", sk_step, "boundary sample spacing, px")->check(CLI::PositiveNumber);
  sk->add_flag("--svg", sk_svg, "also write an SVG overlay per shape");
  add_jobs(sk);

  // parametrize
  auto* pa = app.add_subcommand("parametrize", "skeleton graphs -> ordered degree-5 Bezier branches (.csv)");
  std::string pa_in, pa_out;
  MergeConfig merge;
  pa->add_option("--in", pa_in, ".skel file or directory")->required();
  pa->add_option("--out", pa_out, "output directory")->required();
  pa->add_option("--tau-wedf", merge.tau_wedf, "largest relative WEDF drop merged across a joint")
      ->check(CLI::PositiveNumber);
  pa->add_option("--tau-eq", merge.tau_eq, "relative WEDF gap under which children tie")
      ->check(CLI::PositiveNumber);
  add_jobs(pa);

  // rasterize
  auto* ra = app.add_subcommand("rasterize", "skeleton graphs -> 8-connected skeleton PNGs");
  std::string ra_in, ra_out, ra_mask;
  int ra_size = 256;
  ra->add_option("--in", ra_in, ".skel file or directory")->required();
  ra->add_option("--out", ra_out, "output directory")->required();
  ra->add_option("--size", ra_size, "canvas width and height, px")->check(CLI::PositiveNumber);
  ra->add_option("--mask", ra_mask,
                 "shape PNG (or directory of <id>.png) that skeleton pixels must stay inside");
  add_jobs(ra);

  // sample
  auto* sa = app.add_subcommand("sample", "binary PNG shapes -> noisy point clouds (.pts)");
  std::string sa_in, sa_out;
  SamplingFlags sa_flags;
  sa->add_option("--in", sa_in, "PNG file or directory")->required();
  sa->add_option("--out", sa_out, "output directory")->required();
  sa_flags.add(sa);
  add_seed(sa);
  add_jobs(sa);

  // label
  auto* la = app.add_subcommand("label", "label cloud points near a skeleton (1 = skeletal, 2 = other)");
  std::string la_cloud, la_skel, la_out;
  double la_tau = 1.0;
  la->add_option("--cloud", la_cloud, ".pts file")->required();
  la->add_option("--skeleton", la_skel, ".skel file")->required();
  la->add_option("--out", la_out, "labelled .pts output; skeletal points go to <stem>.skel.pts")
      ->required();
  la->add_option("--tau", la_tau, "labelling distance, px (the sampling step h)")
      ->check(CLI::PositiveNumber);

  // split
  auto* sp = app.add_subcommand("split", "stratified train/val/test manifest");
  std::string sp_in, sp_out;
  SplitRatios ratios;
  sp->add_option("--in", sp_in, "directory of <class>-<n>.png shapes")->required();
  sp->add_option("--out", sp_out, "manifest path (shape_id, class, part)")->required();
  sp->add_option("--train", ratios.train, "train ratio")->check(CLI::PositiveNumber);
  sp->add_option("--val", ratios.val, "validation ratio")->check(CLI::PositiveNumber);
  sp->add_option("--test", ratios.test, "test ratio")->check(CLI::PositiveNumber);
  add_seed(sp);

  // evaluate-*
  std::string ev_pred, ev_gt, ev_out;
  std::map<CLI::App*, Track> eval_cmds;
  for (auto [name, track, what] :
       {std::tuple{"evaluate-pixel", Track::pixel, "pixel F1 over <id>.png skeleton rasters"},
        std::tuple{"evaluate-point", Track::point, "symmetric Chamfer distance over <id>.pts clouds"},
        std::tuple{"evaluate-parametric", Track::parametric, "branch distance D over <id>.csv files"}}) {
    auto* ev = app.add_subcommand(name, what);
    ev->add_option("--pred", ev_pred, "prediction directory")->required();
    ev->add_option("--gt", ev_gt, "ground-truth directory")->required();
    ev->add_option("--out", ev_out, "scores CSV path (default: stdout)");
    ev->footer(
        "A missing prediction scores F1 = 0 (pixel), the Chamfer distance between the ground\n"
        "truth and its centroid (point), or the mean MBE of the ground-truth branches\n"
        "(parametric), and is flagged 'missing'. Unreadable files are flagged 'error',\n"
        "left out of the mean and make the exit status 1.");
    add_jobs(ev);
    eval_cmds[ev] = track;
  }

  // pipeline
  auto* pi = app.add_subcommand("pipeline", "shapes -> png/, pts/, csv/, skeleton/, split.tsv, report.tsv");
  std::string pi_in, pi_out, pi_eps = "auto";
  SamplingFlags pi_flags;
  PipelineConfig pcfg;
  pi->add_option("--in", pi_in, "directory of <class>-<n>.png shapes")->required();
  pi->add_option("--out", pi_out, "dataset directory")->required();
  pi->add_option("--epsilon", pi_eps,
                 "pruning threshold in px; auto walks 2, 4, 6 while the branch count is stable")
      ->check(CLI::IsMember({"auto", "2", "4", "6"}));
  pi_flags.add(pi);
  pi->add_option("--label-tau", pcfg.label_tau, "labelling distance, px; 0 means h")
      ->check(CLI::NonNegativeNumber);
  pi->add_option("--tau-wedf", pcfg.merge.tau_wedf, "largest relative WEDF drop merged across a joint")
      ->check(CLI::PositiveNumber);
  pi->add_option("--tau-eq", pcfg.merge.tau_eq, "relative WEDF gap under which children tie")
      ->check(CLI::PositiveNumber);
  pi->add_option("--size", pcfg.render.size, "render canvas, px")->check(CLI::Range(16, 8192));
  pi->add_option("--margin", pcfg.render.margin, "empty border around the longest side, px")
      ->check(CLI::NonNegativeNumber);
  pi->add_option("--supersample", pcfg.render.supersample,
                 "majority-vote samples per axis and pixel (odd)")
      ->check(CLI::PositiveNumber);
  pi->add_option("--train", pcfg.ratios.train, "train ratio")->check(CLI::PositiveNumber);
  pi->add_option("--val", pcfg.ratios.val, "validation ratio")->check(CLI::PositiveNumber);
  pi->add_option("--test", pcfg.ratios.test, "test ratio")->check(CLI::PositiveNumber);
  pi->add_flag("--figures", pcfg.figures, "write figures/<id>.svg overlays");
  add_seed(pi);
  add_jobs(pi);

  // render
  auto* re = app.add_subcommand("render", "static figure of a shape with its skeleton (.svg or .png)");
  std::string re_shape, re_skel, re_csv, re_out;
  re->add_option("--shape", re_shape, "shape PNG")->required();
  re->add_option("--skeleton", re_skel, ".skel file")->required();
  re->add_option("--csv", re_csv, "parametric branches to overlay");
  re->add_option("--out", re_out, "figure path; .svg or .png")->required();

  // synth
  auto* sy = app.add_subcommand("synth", "write the built-in synthetic shape corpus as PNGs");
  std::string sy_out;
  int sy_size = 256;
  sy->add_option("--out", sy_out, "output directory")->required();
  sy->add_option("--size", sy_size, "canvas, px")->check(CLI::Range(110, 4096));

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    seed = resolve_seed(seed, args);

    if (sk->parsed()) {
      const auto eps = parse_epsilon(sk_eps);
      fs::create_directories(sk_out);
      const int bad = for_each_input(collect(sk_in, ".png", ".skel.png"), jobs, [&](const fs::path& p) {
        const auto id = p.stem().string();
        const auto img = read_png(p);
        const auto res = eps ? skeletonize_fixed(img, *eps, sk_step) : skeletonize_auto(img, sk_step);
        write_graph(fs::path(sk_out) / (id + ".skel"), res.graph);
        if (sk_svg)
          write_file_atomic(fs::path(sk_out) / (id + ".svg"), skeleton_svg(res.cleaned, res.graph));
        return id + ": " + std::to_string(res.graph.nodes.size()) + " nodes, " +
               std::to_string(branch_count(res.graph)) + " branches, epsilon " +
               format_number(res.epsilon) + (res.needs_review ? ", needs review" : "") +
               (res.clean.topology_changed ? ", topology changed by cleaning" : "");
      });
      return bad ? 1 : 0;
    }

    if (pa->parsed()) {
      fs::create_directories(pa_out);
      const int bad = for_each_input(collect(pa_in, ".skel"), jobs, [&](const fs::path& p) {
        const auto id = strip_suffix(p.filename().string(), ".skel");
        const auto res = parametrize(read_graph(p), merge);
        write_parametric_csv(fs::path(pa_out) / (id + ".csv"), res.skeleton);
        return id + ": " + std::to_string(res.skeleton.branches.size()) + " branches";
      });
      return bad ? 1 : 0;
    }

    if (ra->parsed()) {
      fs::create_directories(ra_out);
      const int bad = for_each_input(collect(ra_in, ".skel"), jobs, [&](const fs::path& p) {
        const auto id = strip_suffix(p.filename().string(), ".skel");
        std::optional<BinaryImage> mask;
        if (!ra_mask.empty())
          mask = read_png(fs::is_directory(ra_mask) ? fs::path(ra_mask) / (id + ".png") : fs::path(ra_mask));
        const int w = mask ? mask->width() : ra_size, h = mask ? mask->height() : ra_size;
        const auto img = render_skeleton_image(read_graph(p), w, h, {}, mask ? &*mask : nullptr);
        write_png(fs::path(ra_out) / (id + ".skel.png"), img);
        return id + ": " + std::to_string(img.count()) + " pixels";
      });
      return bad ? 1 : 0;
    }

    if (sa->parsed()) {
      fs::create_directories(sa_out);
      const int bad = for_each_input(collect(sa_in, ".png", ".skel.png"), jobs, [&](const fs::path& p) {
        const auto id = p.stem().string();
        const auto contour = extract_contour(clean_shape(read_png(p)).image);
        const auto pts = sample_point_cloud(contour, sa_flags.config(derive_seed(seed, id)));
        write_pts(fs::path(sa_out) / (id + ".pts"), pts);
        return id + ": " + std::to_string(pts.size()) + " points";
      });
      return bad ? 1 : 0;
    }

    if (la->parsed()) {
      const auto cloud = read_pts(la_cloud).points;
      const auto lab = label_skeleton_points(cloud, read_graph(la_skel), la_tau);
      if (fs::path(la_out).has_parent_path()) fs::create_directories(fs::path(la_out).parent_path());
      write_pts(la_out, lab.points, &lab.labels);
      const fs::path skel_out = strip_suffix(la_out, ".pts") + ".skel.pts";
      write_pts(skel_out, lab.skeletal());
      std::cout << lab.skeletal().size() << " of " << lab.points.size() << " points skeletal"
                << (lab.empty_skeleton ? " (empty skeleton)" : "") << '\n';
      return 0;
    }

    if (sp->parsed()) {
      std::vector<ShapeRecord> shapes;
      for (const auto& p : collect(sp_in, ".png", ".skel.png")) {
        const auto id = p.stem().string();
        shapes.push_back({id, class_of(id)});
      }
      const auto rows = make_split(std::move(shapes), ratios, seed);
      write_file_atomic(sp_out, format_split_manifest(rows));
      std::map<SplitPart, int> n;
      for (const auto& r : rows) ++n[r.part];
      std::cout << "train " << n[SplitPart::train] << ", val " << n[SplitPart::val] << ", test "
                << n[SplitPart::test] << '\n';
      return 0;
    }

    for (const auto& [cmd, track] : eval_cmds) {
      if (!cmd->parsed()) continue;
      const auto table = batch_evaluate(track, ev_pred, ev_gt, jobs);
      for (const auto& r : table.rows)
        if (r.error) std::cerr << "error: " << r.message << '\n';
      const auto csv = table.format_csv();
      if (ev_out.empty())
        std::cout << csv;
      else
        write_file_atomic(ev_out, csv);
      std::cerr << "mean " << metric_name(track) << " = "
                << (table.scored ? format_number(table.aggregate) : "n/a") << " over "
                << table.scored << " shapes (" << table.missing << " missing, " << table.errors
                << " errors)\n";
      return table.errors ? 1 : 0;
    }

    if (pi->parsed()) {
      pcfg.epsilon = parse_epsilon(pi_eps);
      pcfg.sampling = pi_flags.config(0);
      pcfg.seed = seed;
      pcfg.jobs = jobs;
      const auto res = run_pipeline(pi_in, pi_out, pcfg);
      for (const auto& s : res.shapes)
        if (!s.ok) std::cerr << s.shape_id << ": error: " << s.error << '\n';
      for (const auto& c : res.unsplit_classes)
        std::cerr << "class " << c << " has fewer than 3 shapes; assigned to train\n";
      std::cout << res.shapes.size() - res.failures() << " of " << res.shapes.size()
                << " shapes processed\n";
      return res.failures() ? 1 : 0;
    }

    if (re->parsed()) {
      const auto shape = read_png(re_shape);
      const auto g = read_graph(re_skel);
      std::optional<ParametricSkeleton> branches;
      if (!re_csv.empty()) branches = read_parametric_csv(re_csv);
      if (ends_with(re_out, ".svg")) {
        write_file_atomic(re_out, skeleton_svg(shape, g, branches ? &*branches : nullptr));
      } else if (ends_with(re_out, ".png")) {
        // Gray levels: background 0, shape 110, skeleton 255.
        const auto skel = render_skeleton_image(g, shape.width(), shape.height());
        std::vector<std::uint8_t> gray(shape.area());
        for (int y = 0; y < shape.height(); ++y)
          for (int x = 0; x < shape.width(); ++x)
            gray[std::size_t(y) * shape.width() + x] = skel.at(x, y) ? 255 : shape.at(x, y) ? 110 : 0;
        const auto bytes = encode_gray_png(shape.width(), shape.height(), gray);
        write_file_atomic(re_out, std::string(bytes.begin(), bytes.end()));
      } else {
        throw UsageError("--out must end in .svg or .png");
      }
      return 0;
    }

    if (sy->parsed()) {
      fs::create_directories(sy_out);
      const auto corpus = synthetic_corpus(sy_size);
      for (const auto& s : corpus) write_png(fs::path(sy_out) / (s.id + ".png"), s.image);
      std::cout << corpus.size() << " shapes written\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
