#include "skelbench/parametrize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "skelbench/geometry.hpp"

namespace skelbench {

SkeletonTree build_tree(const SkeletonGraph& graph) {
  SkeletonGraph g = graph;
  g.normalize();
  if (g.nodes.empty()) throw Error("empty skeleton");
  if (!g.connected()) throw Error("skeleton is not connected");
  if (g.edges.size() + 1 != g.nodes.size()) throw Error("shape is not simply connected");

  SkeletonTree t;
  t.nodes = g.nodes;
  const int n = static_cast<int>(g.nodes.size());
  t.root = 0;
  for (int v = 1; v < n; ++v)
    if (g.nodes[v].r > g.nodes[t.root].r) t.root = v;

  const auto adj = g.adjacency();
  t.parent.assign(n, -1);
  t.children.assign(n, {});
  std::vector<int> stack{t.root};
  std::vector<bool> seen(n, false);
  seen[t.root] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    t.preorder.push_back(v);
    for (int w : adj[v]) {
      if (seen[w]) continue;
      seen[w] = true;
      t.parent[w] = v;
      t.children[v].push_back(w);
    }
    // Reverse push so that the lowest-index child is visited first.
    for (auto it = t.children[v].rbegin(); it != t.children[v].rend(); ++it)
      stack.push_back(*it);
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

class Ancestry {
 public:
  explicit Ancestry(const SkeletonTree& t) : depth_(t.size(), 0) {
    const int n = static_cast<int>(t.size());
    int levels = 1;
    while ((1 << levels) < n) ++levels;
    up_.assign(levels, std::vector<int>(n, t.root));
    for (int v : t.preorder) {
      if (t.parent[v] >= 0) {
        up_[0][v] = t.parent[v];
        depth_[v] = depth_[t.parent[v]] + 1;
      }
    }
    for (int k = 1; k < levels; ++k)
      for (int v = 0; v < n; ++v) up_[k][v] = up_[k - 1][up_[k - 1][v]];
  }

  int lca(int a, int b) const {
    if (depth_[a] < depth_[b]) std::swap(a, b);
    for (int k = static_cast<int>(up_.size()) - 1; k >= 0; --k)
      if (depth_[a] - (1 << k) >= depth_[b]) a = up_[k][a];
    if (a == b) return a;
    for (int k = static_cast<int>(up_.size()) - 1; k >= 0; --k)
      if (up_[k][a] != up_[k][b]) {
        a = up_[k][a];
        b = up_[k][b];
      }
    return up_[0][a];
  }

 private:
  std::vector<int> depth_;
  std::vector<std::vector<int>> up_;
};

}  // namespace

std::vector<double> compute_wedf(const SkeletonTree& t) {
  const int n = static_cast<int>(t.size());
  if (n == 0) return {};

  // Integer shift so every disk lands on a non-negative canvas.
  double x0 = t.nodes[0].position.x, y0 = t.nodes[0].position.y, x1 = x0, y1 = y0;
  for (const auto& m : t.nodes) {
    x0 = std::min(x0, m.position.x - m.r);
    y0 = std::min(y0, m.position.y - m.r);
    x1 = std::max(x1, m.position.x + m.r);
    y1 = std::max(y1, m.position.y + m.r);
  }
  const double ox = std::floor(x0) - 2, oy = std::floor(y0) - 2;
  const int w = static_cast<int>(std::ceil(x1) - ox) + 3;
  const int h = static_cast<int>(std::ceil(y1) - oy) + 3;
  auto shifted = [&](int v) {
    MedialPoint m = t.nodes[v];
    m.position = {m.position.x - ox, m.position.y - oy};
    return m;
  };

  // (pixel, owner) pairs: a node owns its disk and the edges to its children.
  std::vector<std::pair<long, int>> owned;
  for (int v = 0; v < n; ++v) {
    visit_disk(shifted(v), w, h, [&](int x, int y) { owned.emplace_back(long(y) * w + x, v); });
    if (t.parent[v] >= 0) {
      const int p = t.parent[v];
      visit_capsule(shifted(p), shifted(v), w, h,
                    [&](int x, int y) { owned.emplace_back(long(y) * w + x, p); });
    }
  }

  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) rank[t.preorder[i]] = i;
  std::sort(owned.begin(), owned.end(), [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : rank[a.second] < rank[b.second];
  });
  owned.erase(std::unique(owned.begin(), owned.end()), owned.end());

  // A pixel counts for every node on the union of root paths of its owners:
  // +1 per owner, -1 per LCA of owners adjacent in preorder.
  const Ancestry anc(t);
  std::vector<long> delta(n, 0);
  for (std::size_t i = 0; i < owned.size(); ++i) {
    ++delta[owned[i].second];
    if (i > 0 && owned[i - 1].first == owned[i].first)
      --delta[anc.lca(owned[i - 1].second, owned[i].second)];
  }
  for (auto it = t.preorder.rbegin(); it != t.preorder.rend(); ++it)
    if (t.parent[*it] >= 0) delta[t.parent[*it]] += delta[*it];
  return {delta.begin(), delta.end()};
}

// ---------------------------------------------------------------------------

std::vector<MedialCurve> merge_branches(const SkeletonTree& t, std::span<const double> wedf,
                                        const MergeConfig& cfg) {
  const int n = static_cast<int>(t.size());
  if (wedf.size() != t.size()) throw Error("WEDF size does not match the tree");
  if (n == 1) return {{{t.root}, wedf[t.root]}};

  auto gap = [&](int hi, int lo) { return (wedf[hi] - wedf[lo]) / wedf[hi]; };
  // through[v] = the two neighbors whose edges continue through v, if any.
  std::vector<std::pair<int, int>> through(n, {-1, -1});
  for (int v = 0; v < n; ++v) {
    std::vector<int> kids = t.children[v];
    std::stable_sort(kids.begin(), kids.end(),
                     [&](int a, int b) { return wedf[a] > wedf[b]; });
    const int p = t.parent[v];
    if (t.degree(v) == 2) {
      through[v] = p >= 0 ? std::pair(p, kids[0]) : std::pair(kids[0], kids[1]);
    } else if (t.degree(v) >= 3) {
      if (p >= 0) {
        if (gap(v, kids[0]) <= cfg.tau_wedf && gap(kids[0], kids[1]) > cfg.tau_eq)
          through[v] = {p, kids[0]};
      } else if (gap(kids[1], kids[2]) > cfg.tau_eq) {
        through[v] = {kids[0], kids[1]};
      }
    }
  }
  auto continues = [&](int v, int from) {
    if (through[v].first == from) return through[v].second;
    if (through[v].second == from) return through[v].first;
    return -1;
  };

  std::vector<bool> used(n, false);  // edge (parent[c], c) keyed by c
  auto edge_key = [&](int a, int b) { return t.parent[a] == b ? a : b; };
  std::vector<MedialCurve> curves;
  for (int v : t.preorder) {
    std::vector<int> nbrs;
    if (t.parent[v] >= 0) nbrs.push_back(t.parent[v]);
    nbrs.insert(nbrs.end(), t.children[v].begin(), t.children[v].end());
    for (int u : nbrs) {
      if (used[edge_key(v, u)] || continues(v, u) >= 0) continue;
      MedialCurve c;
      c.nodes = {v};
      int prev = v, cur = u;
      while (true) {
        used[edge_key(prev, cur)] = true;
        c.nodes.push_back(cur);
        const int next = continues(cur, prev);
        if (next < 0) break;
        prev = cur;
        cur = next;
      }
      if (wedf[c.nodes.back()] > wedf[c.nodes.front()])
        std::reverse(c.nodes.begin(), c.nodes.end());
      for (int x : c.nodes) c.importance = std::max(c.importance, wedf[x]);
      curves.push_back(std::move(c));
    }
  }
  return curves;
}

// ---------------------------------------------------------------------------

namespace {

// Weight of the pull toward evenly spaced interior points for short chains.
constexpr double kShortChainRegularizer = 1e-6;
constexpr int kMaxRefineIterations = 500;
// Below this many samples, free parameters make the fit nearly interpolating.
constexpr int kMinRefinePoints = 4 * kControlPoints;

Eigen::Vector3d as_vec(const MedialPoint& m) { return {m.position.x, m.position.y, m.r}; }
Eigen::Vector3d as_vec(const ControlPoint& c) { return {c.x, c.y, c.r}; }

double bernstein(int n, int k, double t) {
  double c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c * std::pow(t, k) * std::pow(1 - t, n - k);
}

// Least squares for b_1..b_4 with fixed ends at the given parameters.
BezierBranch solve_interior(std::span<const MedialPoint> chain, const std::vector<double>& u) {
  const int n = static_cast<int>(chain.size());
  const Eigen::Vector3d pa = as_vec(chain.front()), pb = as_vec(chain.back());
  auto solve = [&](double lambda) {
    const int extra = lambda > 0 ? 4 : 0;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + extra, 4);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n + extra, 3);
    for (int i = 0; i < n; ++i) {
      const auto basis = bernstein5(u[i]);
      for (int k = 0; k < 4; ++k) A(i, k) = basis[k + 1];
      R.row(i) = (as_vec(chain[i]) - basis[0] * pa - basis[kBezierDegree] * pb).transpose();
    }
    const double s = std::sqrt(lambda);
    for (int k = 0; k < extra; ++k) {
      const double f = double(k + 1) / kBezierDegree;
      A(n + k, k) = s;
      R.row(n + k) = (s * ((1 - f) * pa + f * pb)).transpose();
    }
    const auto qr = A.colPivHouseholderQr();
    return std::pair(qr.rank(), Eigen::MatrixXd(qr.solve(R)));
  };
  auto [rank, X] = solve(n < kControlPoints ? kShortChainRegularizer : 0.0);
  if (rank < 4) X = solve(kShortChainRegularizer).second;

  BezierBranch out;
  const auto& a = chain.front();
  const auto& b = chain.back();
  out.points[0] = {a.position.x, a.position.y, a.r};
  out.points[kBezierDegree] = {b.position.x, b.position.y, b.r};
  for (int k = 0; k < 4; ++k) out.points[k + 1] = {X(k, 0), X(k, 1), X(k, 2)};
  return out;
}

double squared_error(const BezierBranch& b, std::span<const MedialPoint> chain,
                     const std::vector<double>& u) {
  double sum = 0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    sum += (as_vec(b.evaluate(u[i])) - as_vec(chain[i])).squaredNorm();
  return sum;
}

Eigen::Vector3d derivative(const BezierBranch& b, double t) {
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  for (int k = 0; k < kBezierDegree; ++k)
    d += kBezierDegree * bernstein(kBezierDegree - 1, k, t) *
         (as_vec(b.points[k + 1]) - as_vec(b.points[k]));
  return d;
}

// Levenberg-Marquardt over the interior control points and the interior
// parameters together. The normal equations are solved through the Schur
// complement of the (diagonal) parameter block.
void refine(std::span<const MedialPoint> chain, BezierBranch& best, std::vector<double>& u) {
  const int n = static_cast<int>(chain.size());
  const int m = n - 2;
  double err = squared_error(best, chain, u);
  double lambda = 1e-3;
  for (int iter = 0; iter < kMaxRefineIterations && err > 1e-24; ++iter) {
    Eigen::Matrix4d gram = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 12, 1> grad_b = Eigen::Matrix<double, 12, 1>::Zero();
    std::vector<Eigen::Matrix<double, 12, 1>> cross(m);
    std::vector<double> diag(m), grad_t(m);
    for (int j = 0; j < m; ++j) {
      const int i = j + 1;
      const auto basis = bernstein5(u[i]);
      const Eigen::Vector4d beta(basis[1], basis[2], basis[3], basis[4]);
      const Eigen::Vector3d e = as_vec(best.evaluate(u[i])) - as_vec(chain[i]);
      const Eigen::Vector3d d = derivative(best, u[i]);
      gram += beta * beta.transpose();
      for (int k = 0; k < 4; ++k) {
        grad_b.segment<3>(3 * k) += beta(k) * e;
        cross[j].segment<3>(3 * k) = beta(k) * d;
      }
      diag[j] = d.squaredNorm();
      grad_t[j] = d.dot(e);
    }
    Eigen::Matrix<double, 12, 12> E = Eigen::Matrix<double, 12, 12>::Zero();
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) E.block<3, 3>(3 * k, 3 * l) = gram(k, l) * Eigen::Matrix3d::Identity();

    bool improved = false;
    while (lambda < 1e12) {
      Eigen::Matrix<double, 12, 12> S = E;
      S.diagonal() *= 1 + lambda;
      Eigen::Matrix<double, 12, 1> rhs = -grad_b;
      std::vector<double> damped(m);
      for (int j = 0; j < m; ++j) {
        damped[j] = diag[j] * (1 + lambda) + 1e-12;
        S -= cross[j] * cross[j].transpose() / damped[j];
        rhs += cross[j] * (grad_t[j] / damped[j]);
      }
      const Eigen::Matrix<double, 12, 1> step = S.ldlt().solve(rhs);
      BezierBranch trial = best;
      for (int k = 0; k < 4; ++k) {
        trial.points[k + 1].x += step(3 * k);
        trial.points[k + 1].y += step(3 * k + 1);
        trial.points[k + 1].r += step(3 * k + 2);
      }
      std::vector<double> v = u;
      for (int j = 0; j < m; ++j)
        v[j + 1] = std::clamp(u[j + 1] - (grad_t[j] + cross[j].dot(step)) / damped[j], 0.0, 1.0);
      const double trial_err = squared_error(trial, chain, v);
      // Parameters must keep the chain order; folded steps count as failures.
      if (std::is_sorted(v.begin(), v.end()) && std::isfinite(trial_err) && trial_err < err) {
        const bool stalled = err - trial_err <= err * 1e-14;
        best = trial;
        u = std::move(v);
        err = trial_err;
        lambda = std::max(lambda / 3, 1e-12);
        improved = !stalled;
        break;
      }
      lambda *= 4;
    }
    if (!improved) break;
  }
}

}  // namespace

BezierFit fit_bezier_with_parameters(std::span<const MedialPoint> chain) {
  const int n = static_cast<int>(chain.size());
  if (n < 2) throw Error("Bezier fit needs at least two points");

  std::vector<double> u(n, 0.0);
  for (int i = 1; i < n; ++i) u[i] = u[i - 1] + distance(chain[i - 1].position, chain[i].position);
  if (u.back() > 0) {
    for (double& v : u) v /= u.back();
  } else {
    for (int i = 0; i < n; ++i) u[i] = double(i) / (n - 1);
  }
  u.back() = 1.0;

  const bool coincident = std::all_of(chain.begin(), chain.end(), [&](const MedialPoint& m) {
    return m == chain.front();
  });
  if (coincident) {
    BezierBranch b;
    b.points.fill({chain[0].position.x, chain[0].position.y, chain[0].r});
    return {b, std::move(u)};
  }

  BezierBranch best = solve_interior(chain, u);
  if (n >= kMinRefinePoints) {
    refine(chain, best, u);
    // Finish with the exact least-squares solution for the final parameters.
    const BezierBranch exact = solve_interior(chain, u);
    if (squared_error(exact, chain, u) <= squared_error(best, chain, u)) best = exact;
  }
  for (int k = 1; k < kBezierDegree; ++k) best.points[k].r = std::max(0.0, best.points[k].r);
  return {best, std::move(u)};
}

BezierBranch fit_bezier(std::span<const MedialPoint> chain) {
  return fit_bezier_with_parameters(chain).branch;
}

ParametricSkeleton order_and_flatten(std::vector<BezierBranch> branches,
                                     std::vector<double> importance) {
  if (branches.size() != importance.size())
    throw Error("need one importance value per branch");
  std::vector<std::size_t> order(branches.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (importance[i] != importance[j]) return importance[i] > importance[j];
    return branches[i] < branches[j];
  });
  ParametricSkeleton out;
  for (std::size_t i : order) {
    out.branches.push_back(branches[i]);
    out.importance.push_back(importance[i]);
  }
  return out;
}

Parametrization parametrize(const SkeletonGraph& g, const MergeConfig& cfg) {
  Parametrization out;
  out.tree = build_tree(g);
  out.wedf = compute_wedf(out.tree);
  out.curves = merge_branches(out.tree, out.wedf, cfg);
  std::vector<BezierBranch> branches;
  std::vector<double> importance;
  for (const auto& c : out.curves) {
    std::vector<MedialPoint> chain;
    for (int v : c.nodes) chain.push_back(out.tree.nodes[v]);
    if (chain.size() == 1) chain.push_back(chain.front());
    branches.push_back(fit_bezier(chain));
    importance.push_back(c.importance);
  }
  out.skeleton = order_and_flatten(std::move(branches), std::move(importance));
  return out;
}

}  // namespace skelbench
