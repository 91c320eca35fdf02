#include <doctest.h>

#include <filesystem>
#include <random>

#include "skelbench/formats.hpp"
#include "skelbench/image_io.hpp"
#include "test_support.hpp"

using namespace skelbench;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  auto dir = fs::temp_directory_path() / "skelbench_formats";
  fs::create_directories(dir);
  return dir;
}

double awkward(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1000, 1000);
  switch (rng() % 4) {
    case 0: return u(rng);
    case 1: return std::round(u(rng));
    case 2: return u(rng) * 1e-12;
    default: return 0.1 * double(rng() % 100);
  }
}

}  // namespace

TEST_CASE("numbers round-trip in shortest form") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(2.5) == "2.5");
  CHECK(format_number(-3.0) == "-3");
  CHECK(format_number(0.1) == "0.1");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double v = awkward(rng);
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK_THROWS_AS(format_number(std::numeric_limits<double>::quiet_NaN()), Error);
  for (const char* bad : {"", "1.5x", "nan", "inf", "1,5", " 1"})
    CHECK_THROWS_AS(parse_number(bad), Error);
}

TEST_CASE(".pts round trip") {
  std::mt19937_64 rng(5);
  PointSet pts;
  std::vector<int> labels;
  for (int i = 0; i < 300; ++i) {
    pts.push_back({awkward(rng), awkward(rng)});
    labels.push_back(1 + int(rng() % 2));
  }
  const auto path = scratch() / "cloud.pts";
  const std::vector<int>* no_labels = nullptr;
  const std::vector<int>* with_labels = &labels;
  for (const std::vector<int>* lab : {no_labels, with_labels}) {
    write_pts(path, pts, lab);
    const auto first = read_text_file(path);
    const auto back = read_pts(path);
    CHECK(back.points == pts);
    CHECK(back.labels == (lab ? labels : std::vector<int>{}));
    write_pts(path, back.points, lab ? &back.labels : nullptr);
    CHECK(read_text_file(path) == first);
  }
  CHECK(parse_pts("1 2\n\n3 4\n").points.size() == 2);
  CHECK_THROWS_WITH_AS(parse_pts("1 2\n3 4 1\n"), doctest::Contains("line 2"), Error);
  CHECK_THROWS_AS(parse_pts("1\n"), Error);
  CHECK_THROWS_AS(parse_pts("1 2 x\n"), Error);
  const std::vector<int> short_labels{1};
  CHECK_THROWS_AS(format_pts(pts, &short_labels), Error);
}

TEST_CASE("skeleton graph round trip") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    SkeletonGraph g;
    const int n = 1 + int(rng() % 30);
    for (int i = 0; i < n; ++i)
      g.nodes.push_back({{awkward(rng), awkward(rng)}, std::abs(awkward(rng))});
    for (int i = 1; i < n; ++i) g.edges.emplace_back(int(rng() % i), i);
    g.normalize();
    const auto path = scratch() / "g.skel";
    write_graph(path, g);
    const auto text = read_text_file(path);
    const auto back = read_graph(path);
    CHECK(back.nodes == g.nodes);
    CHECK(back.edges == g.edges);
    write_graph(path, back);
    CHECK(read_text_file(path) == text);
  }
  CHECK(parse_graph("nodes 0 edges 0\n").nodes.empty());
  CHECK_THROWS_AS(parse_graph(""), Error);
  CHECK_THROWS_AS(parse_graph("nodes 1 edges 0\n0 0 -1\n"), Error);
  CHECK_THROWS_AS(parse_graph("nodes 2 edges 1\n0 0 1\n1 1 1\n1 0\n"), Error);
  CHECK_THROWS_AS(parse_graph("nodes 2 edges 1\n0 0 1\n1 1 1\n"), Error);
  CHECK_THROWS_AS(parse_graph("nodes 1 edges 0\n0 0 1\nextra\n"), Error);
}

TEST_CASE("parametric CSV round trip") {
  std::mt19937_64 rng(11);
  ParametricSkeleton s;
  for (int j = 0; j < 7; ++j) {
    BezierBranch b;
    for (auto& p : b.points) p = {awkward(rng), awkward(rng), std::abs(awkward(rng))};
    s.branches.push_back(b);
  }
  const auto path = scratch() / "p.csv";
  write_parametric_csv(path, s);
  const auto text = read_text_file(path);
  const auto back = read_parametric_csv(path);
  CHECK(back.branches == s.branches);
  CHECK(back.flatten() == s.flatten());
  write_parametric_csv(path, back);
  CHECK(read_text_file(path) == text);
  // One row per branch with 18 tab-separated fields.
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  CHECK(std::count(text.begin(), text.end(), '\t') == 7 * 17);
  CHECK(parse_parametric_csv("").branches.empty());
  CHECK_THROWS_AS(parse_parametric_csv("1\t2\t3\n"), Error);
}

TEST_CASE("split manifest round trip") {
  const std::vector<SplitEntry> rows{{"a-1", "a", SplitPart::train},
                                     {"a-2", "a", SplitPart::val},
                                     {"b-1", "b", SplitPart::test}};
  const auto text = format_split_manifest(rows);
  CHECK(text == "a-1\ta\ttrain\na-2\ta\tval\nb-1\tb\ttest\n");
  CHECK(parse_split_manifest(text) == rows);
  CHECK_THROWS_AS(parse_split_part("dev"), Error);
}

TEST_CASE("PNG round trip") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = 1 + int(rng() % 70), h = 1 + int(rng() % 70);
    BinaryImage img(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.set(x, y, rng() % 3 == 0);
    const auto path = scratch() / "i.png";
    write_png(path, img);
    const auto bytes = read_text_file(path);
    const auto back = read_png(path);
    CHECK(back == img);
    write_png(path, back);
    CHECK(read_text_file(path) == bytes);
  }
  const std::vector<std::uint8_t> gray{0, 127, 128, 255};
  const auto decoded = decode_png(encode_gray_png(4, 1, gray));
  CHECK_FALSE(decoded.at(0, 0));
  CHECK_FALSE(decoded.at(1, 0));
  CHECK(decoded.at(2, 0));
  CHECK(decoded.at(3, 0));
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_THROWS_AS(decode_png(junk), Error);
  write_file_atomic(scratch() / "trunc.png", read_text_file(scratch() / "i.png").substr(0, 40));
  CHECK_THROWS_AS(read_png(scratch() / "trunc.png"), Error);
}
