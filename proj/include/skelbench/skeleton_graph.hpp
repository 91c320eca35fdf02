#pragma once

#include <utility>
#include <vector>

#include "skelbench/types.hpp"

namespace skelbench {

using Edge = std::pair<int, int>;

/// Medial points plus adjacency. Edges are stored with first < second,
/// sorted, without duplicates or self-loops (see normalize()).
struct SkeletonGraph {
  std::vector<MedialPoint> nodes;
  std::vector<Edge> edges;

  bool empty() const { return nodes.empty(); }

  /// Sorted neighbor lists.
  std::vector<std::vector<int>> adjacency() const;
  std::vector<int> degrees() const;

  /// Canonicalizes edge storage; throws on out-of-range indices.
  void normalize();

  /// Component id per node, numbered in order of first appearance.
  std::vector<int> component_labels(int* count = nullptr) const;
  bool connected() const;
  bool is_tree() const;

  /// Keeps nodes with keep[i] true (original relative order) and the edges
  /// between them.
  SkeletonGraph induced(const std::vector<bool>& keep) const;

  friend bool operator==(const SkeletonGraph&, const SkeletonGraph&) = default;
};

/// Maximal chains whose interior nodes all have degree 2. Each chain is a
/// node sequence starting and ending at nodes of degree != 2 (or, for a pure
/// cycle, starting and ending at the same node). Every edge lies on exactly
/// one chain.
std::vector<std::vector<int>> proto_branches(const SkeletonGraph& g);

/// Number of proto-branches. An isolated node counts as zero branches.
int branch_count(const SkeletonGraph& g);

}  // namespace skelbench
