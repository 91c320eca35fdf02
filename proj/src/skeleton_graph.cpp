#include "skelbench/skeleton_graph.hpp"

#include <algorithm>
#include <string>

namespace skelbench {

std::vector<std::vector<int>> SkeletonGraph::adjacency() const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::vector<int> SkeletonGraph::degrees() const {
  std::vector<int> deg(nodes.size(), 0);
  for (auto [a, b] : edges) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

void SkeletonGraph::normalize() {
  const int n = static_cast<int>(nodes.size());
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw Error("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                  ") references a missing node");
    if (a == b) continue;
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  edges = std::move(out);
}

std::vector<int> SkeletonGraph::component_labels(int* count) const {
  const auto adj = adjacency();
  std::vector<int> label(nodes.size(), -1);
  int next = 0;
  std::vector<int> stack;
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(static_cast<int>(s));
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj[v]) {
        if (label[w] < 0) {
          label[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

bool SkeletonGraph::connected() const {
  int count = 0;
  component_labels(&count);
  return count <= 1;
}

bool SkeletonGraph::is_tree() const {
  return !nodes.empty() && connected() && edges.size() + 1 == nodes.size();
}

SkeletonGraph SkeletonGraph::induced(const std::vector<bool>& keep) const {
  SkeletonGraph out;
  std::vector<int> remap(nodes.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(nodes[i]);
  }
  for (auto [a, b] : edges) {
    if (remap[a] >= 0 && remap[b] >= 0) out.edges.emplace_back(remap[a], remap[b]);
  }
  out.normalize();
  return out;
}

std::vector<std::vector<int>> proto_branches(const SkeletonGraph& g) {
  const auto adj = g.adjacency();
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> chains;
  // Edge visitation keyed by (min, max) through a sorted edge list.
  auto edge_id = [&](int a, int b) {
    const Edge key{std::min(a, b), std::max(a, b)};
    return static_cast<std::size_t>(
        std::lower_bound(g.edges.begin(), g.edges.end(), key) - g.edges.begin());
  };
  std::vector<bool> used(g.edges.size(), false);

  auto walk = [&](int start, int first) {
    std::vector<int> chain{start};
    int prev = start, cur = first;
    used[edge_id(start, first)] = true;
    while (true) {
      chain.push_back(cur);
      if (adj[cur].size() != 2 || cur == start) break;
      const int next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
      const auto id = edge_id(cur, next);
      if (used[id]) break;
      used[id] = true;
      prev = cur;
      cur = next;
    }
    chains.push_back(std::move(chain));
  };

  for (int v = 0; v < n; ++v) {
    if (adj[v].size() == 2) continue;
    for (int w : adj[v]) {
      if (!used[edge_id(v, w)]) walk(v, w);
    }
  }
  // Remaining edges belong to cycles made only of degree-2 nodes.
  for (int v = 0; v < n; ++v) {
    for (int w : adj[v]) {
      if (!used[edge_id(v, w)]) walk(v, w);
    }
  }
  return chains;
}

int branch_count(const SkeletonGraph& g) {
  return static_cast<int>(proto_branches(g).size());
}

}  // namespace skelbench
