#include "skelbench/formats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace skelbench {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool blank(std::string_view line) { return split_ws(line).empty(); }

int parse_int(std::string_view token) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error("expected an integer, got '" + std::string(token) + "'");
  return v;
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw Error("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) throw Error("cannot serialize a non-finite number");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

double parse_number(std::string_view token) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v))
    throw Error("expected a finite number, got '" + std::string(token) + "'");
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------

std::string format_pts(const PointSet& points, const std::vector<int>* labels) {
  if (labels && labels->size() != points.size())
    throw Error("label count does not match point count");
  std::string out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    out += format_number(points[i].x);
    out += ' ';
    out += format_number(points[i].y);
    if (labels) {
      out += ' ';
      out += std::to_string((*labels)[i]);
    }
    out += '\n';
  }
  return out;
}

PtsData parse_pts(std::string_view text) {
  PtsData data;
  int columns = 0;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (blank(lines[n])) continue;
    const auto tok = split_ws(lines[n]);
    if (tok.size() != 2 && tok.size() != 3)
      fail_line(n + 1, "expected 'x y' or 'x y label'");
    if (columns == 0) columns = static_cast<int>(tok.size());
    if (static_cast<int>(tok.size()) != columns) fail_line(n + 1, "inconsistent column count");
    try {
      data.points.push_back({parse_number(tok[0]), parse_number(tok[1])});
      if (columns == 3) data.labels.push_back(parse_int(tok[2]));
    } catch (const Error& e) {
      fail_line(n + 1, e.what());
    }
  }
  return data;
}

PtsData read_pts(const std::filesystem::path& path) {
  try {
    return parse_pts(read_text_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_pts(const std::filesystem::path& path, const PointSet& points,
               const std::vector<int>* labels) {
  write_file_atomic(path, format_pts(points, labels));
}

// ---------------------------------------------------------------------------

std::string format_graph(const SkeletonGraph& g) {
  std::string out = "nodes " + std::to_string(g.nodes.size()) + " edges " +
                    std::to_string(g.edges.size()) + "\n";
  for (const auto& m : g.nodes) {
    out += format_number(m.position.x) + ' ' + format_number(m.position.y) + ' ' +
           format_number(m.r) + '\n';
  }
  for (auto [i, j] : g.edges) out += std::to_string(i) + ' ' + std::to_string(j) + '\n';
  return out;
}

SkeletonGraph parse_graph(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t n = 0;
  while (n < lines.size() && blank(lines[n])) ++n;
  if (n == lines.size()) throw Error("empty skeleton file");
  const auto head = split_ws(lines[n]);
  if (head.size() != 4 || head[0] != "nodes" || head[2] != "edges")
    fail_line(n + 1, "expected header 'nodes N edges M'");
  int node_count = 0, edge_count = 0;
  try {
    node_count = parse_int(head[1]);
    edge_count = parse_int(head[3]);
  } catch (const Error& e) {
    fail_line(n + 1, e.what());
  }
  if (node_count < 0 || edge_count < 0) fail_line(n + 1, "negative count");
  ++n;

  SkeletonGraph g;
  auto next_row = [&](std::size_t want) {
    while (n < lines.size() && blank(lines[n])) ++n;
    if (n == lines.size()) throw Error("unexpected end of skeleton file");
    auto tok = split_ws(lines[n]);
    if (tok.size() != want)
      fail_line(n + 1, "expected " + std::to_string(want) + " fields");
    ++n;
    return tok;
  };
  for (int i = 0; i < node_count; ++i) {
    const auto tok = next_row(3);
    try {
      const double r = parse_number(tok[2]);
      if (r < 0) throw Error("negative radius");
      g.nodes.push_back({{parse_number(tok[0]), parse_number(tok[1])}, r});
    } catch (const Error& e) {
      fail_line(n, e.what());
    }
  }
  for (int i = 0; i < edge_count; ++i) {
    const auto tok = next_row(2);
    try {
      g.edges.emplace_back(parse_int(tok[0]), parse_int(tok[1]));
    } catch (const Error& e) {
      fail_line(n, e.what());
    }
  }
  while (n < lines.size()) {
    if (!blank(lines[n])) fail_line(n + 1, "trailing content after the edge list");
    ++n;
  }
  const auto raw_edges = g.edges;
  g.normalize();
  if (g.edges != raw_edges)
    throw Error("edges must be unique pairs i < j in sorted order");
  return g;
}

SkeletonGraph read_graph(const std::filesystem::path& path) {
  try {
    return parse_graph(read_text_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_graph(const std::filesystem::path& path, const SkeletonGraph& g) {
  write_file_atomic(path, format_graph(g));
}

// ---------------------------------------------------------------------------

std::string format_parametric_csv(const ParametricSkeleton& s) {
  std::string out;
  for (const auto& b : s.branches) {
    bool first = true;
    for (const auto& p : b.points) {
      for (double v : {p.x, p.y, p.r}) {
        if (!first) out += '\t';
        out += format_number(v);
        first = false;
      }
    }
    out += '\n';
  }
  return out;
}

ParametricSkeleton parse_parametric_csv(std::string_view text) {
  std::vector<double> values;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (blank(lines[n])) continue;
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    const auto line = lines[n];
    while (true) {
      const std::size_t tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos));
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    if (fields.size() != kValuesPerBranch)
      fail_line(n + 1, "expected 18 tab-separated values, got " + std::to_string(fields.size()));
    try {
      for (auto f : fields) values.push_back(parse_number(f));
    } catch (const Error& e) {
      fail_line(n + 1, e.what());
    }
  }
  return ParametricSkeleton::unflatten(values);
}

ParametricSkeleton read_parametric_csv(const std::filesystem::path& path) {
  try {
    return parse_parametric_csv(read_text_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_parametric_csv(const std::filesystem::path& path, const ParametricSkeleton& s) {
  write_file_atomic(path, format_parametric_csv(s));
}

// ---------------------------------------------------------------------------

std::string_view to_string(SplitPart p) {
  switch (p) {
    case SplitPart::train:
      return "train";
    case SplitPart::val:
      return "val";
    case SplitPart::test:
      return "test";
  }
  return "train";
}

SplitPart parse_split_part(std::string_view s) {
  if (s == "train") return SplitPart::train;
  if (s == "val") return SplitPart::val;
  if (s == "test") return SplitPart::test;
  throw Error("unknown split '" + std::string(s) + "'");
}

std::string format_split_manifest(const std::vector<SplitEntry>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.shape_id;
    out += '\t';
    out += r.class_name;
    out += '\t';
    out += to_string(r.part);
    out += '\n';
  }
  return out;
}

std::vector<SplitEntry> parse_split_manifest(std::string_view text) {
  std::vector<SplitEntry> rows;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (blank(lines[n])) continue;
    const auto tok = split_ws(lines[n]);
    if (tok.size() != 3) fail_line(n + 1, "expected 'shape_id<TAB>class<TAB>split'");
    try {
      rows.push_back({std::string(tok[0]), std::string(tok[1]), parse_split_part(tok[2])});
    } catch (const Error& e) {
      fail_line(n + 1, e.what());
    }
  }
  return rows;
}

}  // namespace skelbench
