#pragma once

// Exhaustive backward induction over the occurrence tree of a scalar system.
//
// Every node is one history of "disturbance now / not now" decisions. At a
// node (t, k) the next disturbance w_k lands at t with probability p(t, k).
// Value functions are scalar quadratics found by minimizing
//   q x² + r u² + (1 − p) V_calm(a x + b u) + p V_hit(a x + b u + w_k)
// directly in u. Nothing here uses the Riccati sweep or the library's
// disturbance-aware recursion, so it can serve as an oracle for both.

#include <functional>
#include <memory>
#include <vector>

namespace sparse_lqr::oracle {

struct ScalarSystem {
  double a = 1.0;
  double b = 1.0;
  double q = 1.0;
  double q_T = 1.0;
  double r = 1.0;
  int T = 1;
};

// xx·s² + x·s + c
struct Quadratic {
  double xx = 0.0;
  double x = 0.0;
  double c = 0.0;
  double operator()(double s) const { return xx * s * s + x * s + c; }
};

struct TreeNode {
  int t = 0;
  int k = 0;
  double p = 0.0;
  Quadratic value;
  // Optimal control u = gain·x + offset (unused at t = T).
  double gain = 0.0;
  double offset = 0.0;
  std::unique_ptr<TreeNode> calm;  // no disturbance at t
  std::unique_ptr<TreeNode> hit;   // w_k applied at t
};

using ProbabilityFn = std::function<double(int t, int k)>;

// w[k − 1] is the value applied when k remain.
inline std::unique_ptr<TreeNode> BuildTree(const ScalarSystem& sys,
                                           const std::vector<double>& w,
                                           const ProbabilityFn& prob, int t,
                                           int k) {
  auto node = std::make_unique<TreeNode>();
  node->t = t;
  node->k = k;
  if (t == sys.T) {
    node->value = {sys.q_T, 0.0, 0.0};
    return node;
  }
  node->p = k > 0 ? prob(t, k) : 0.0;

  // Expected next value as a quadratic in y = a x + b u.
  double alpha = 0.0, beta = 0.0, delta = 0.0;
  if (node->p < 1.0) {
    node->calm = BuildTree(sys, w, prob, t + 1, k);
    const Quadratic& v = node->calm->value;
    alpha += (1.0 - node->p) * v.xx;
    beta += (1.0 - node->p) * v.x;
    delta += (1.0 - node->p) * v.c;
  }
  if (node->p > 0.0) {
    node->hit = BuildTree(sys, w, prob, t + 1, k - 1);
    const Quadratic& v = node->hit->value;
    const double wk = w[k - 1];
    // v(y + w) = v.xx y² + (2 v.xx w + v.x) y + (v.xx w² + v.x w + v.c)
    alpha += node->p * v.xx;
    beta += node->p * (2.0 * v.xx * wk + v.x);
    delta += node->p * (v.xx * wk * wk + v.x * wk + v.c);
  }

  const double a = sys.a, b = sys.b;
  const double curvature = sys.r + alpha * b * b;
  const double g = -alpha * a * b / curvature;
  const double h = -beta * b / (2.0 * curvature);
  node->gain = g;
  node->offset = h;

  const double closed = a + b * g;
  node->value.xx = sys.q + sys.r * g * g + alpha * closed * closed;
  node->value.x =
      2.0 * sys.r * g * h + 2.0 * alpha * closed * b * h + beta * closed;
  node->value.c =
      sys.r * h * h + alpha * b * b * h * h + beta * b * h + delta;
  return node;
}

// Visits every node of the tree.
inline void ForEachNode(const TreeNode& node,
                        const std::function<void(const TreeNode&)>& visit) {
  visit(node);
  if (node.calm) ForEachNode(*node.calm, visit);
  if (node.hit) ForEachNode(*node.hit, visit);
}

// One realized occurrence schedule with its probability.
struct Path {
  double weight = 1.0;
  std::vector<int> times;
};

inline void EnumeratePaths(int T, const ProbabilityFn& prob, int t, int k,
                           Path current, std::vector<Path>& out) {
  if (t == T) {
    out.push_back(std::move(current));
    return;
  }
  const double p = k > 0 ? prob(t, k) : 0.0;
  if (p < 1.0) {
    Path calm = current;
    calm.weight *= 1.0 - p;
    EnumeratePaths(T, prob, t + 1, k, std::move(calm), out);
  }
  if (p > 0.0) {
    Path hit = std::move(current);
    hit.weight *= p;
    hit.times.push_back(t);
    EnumeratePaths(T, prob, t + 1, k - 1, std::move(hit), out);
  }
}

}  // namespace sparse_lqr::oracle
