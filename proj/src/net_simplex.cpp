#include "net_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subspace_ot/errors.hpp"

namespace sot::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Tree-based primal simplex state for the dense transportation problem.
// Nodes 0..n-1 are sources, n..n+m-1 sinks. Every tree edge is owned by
// its child node; the underlying arc always runs source -> sink.
struct SimplexState {
  int n = 0, m = 0;
  const MatrixXd* cost = nullptr;

  std::vector<int> parent, depth;
  std::vector<double> flow;  // flow on the edge to the parent
  std::vector<double> pi;    // node potentials
  // child lists as intrusive doubly-linked siblings
  std::vector<int> first_child, next_sib, prev_sib;

  bool is_row(int x) const { return x < n; }
  double arc_cost(int x, int p) const {
    return is_row(x) ? (*cost)(x, p - n) : (*cost)(p, x - n);
  }

  void attach(int child, int par) {
    parent[child] = par;
    prev_sib[child] = -1;
    next_sib[child] = first_child[par];
    if (first_child[par] >= 0) prev_sib[first_child[par]] = child;
    first_child[par] = child;
  }

  void detach(int child) {
    const int par = parent[child];
    if (prev_sib[child] >= 0) {
      next_sib[prev_sib[child]] = next_sib[child];
    } else {
      first_child[par] = next_sib[child];
    }
    if (next_sib[child] >= 0) prev_sib[next_sib[child]] = prev_sib[child];
    parent[child] = -1;
  }

  // Recomputes depth and potential below (and including) root_node whose
  // parent data is already final.
  void refresh_subtree(int root_node) {
    std::vector<int> stack{root_node};
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      const int p = parent[x];
      depth[x] = depth[p] + 1;
      pi[x] = is_row(x) ? arc_cost(x, p) + pi[p] : pi[p] - arc_cost(p, x);
      for (int c = first_child[x]; c >= 0; c = next_sib[c]) stack.push_back(c);
    }
  }
};

struct CycleEdge {
  int node;       // child node owning the tree edge
  bool decreases; // flow moves against the cycle direction
};

}  // namespace

TransportSolution network_simplex(const VectorXd& a_in, const VectorXd& b_in,
                                  const MatrixXd& cost) {
  const int n = static_cast<int>(a_in.size());
  const int m = static_cast<int>(b_in.size());
  if (n == 0 || m == 0) throw EmptyInput("transportation needs both marginals");
  if (cost.rows() != n || cost.cols() != m) {
    throw DimensionMismatch("cost matrix does not match marginals");
  }
  if (!cost.allFinite()) throw InvalidInput("non-finite cost entries");
  if (a_in.minCoeff() < 0 || b_in.minCoeff() < 0) {
    throw InfeasibleMarginals("negative weights");
  }
  const double sum_a = a_in.sum();
  const double sum_b = b_in.sum();
  if (sum_a <= 0 || sum_b <= 0) throw InfeasibleMarginals("zero total mass");
  if (std::abs(sum_a - sum_b) > 1e-8 * std::max(1.0, sum_a)) {
    throw InfeasibleMarginals("marginal totals differ");
  }
  VectorXd a = a_in;
  VectorXd b = b_in * (sum_a / sum_b);

  const int num_nodes = n + m;
  SimplexState st;
  st.n = n;
  st.m = m;
  st.cost = &cost;
  st.parent.assign(num_nodes, -1);
  st.depth.assign(num_nodes, 0);
  st.flow.assign(num_nodes, 0.0);
  st.pi.assign(num_nodes, 0.0);
  st.first_child.assign(num_nodes, -1);
  st.next_sib.assign(num_nodes, -1);
  st.prev_sib.assign(num_nodes, -1);

  // North-west corner rule: a staircase of n+m-1 basic arcs forming a
  // spanning tree (zero-flow arcs appear on simultaneous exhaustion).
  {
    VectorXd ra = a, rb = b;
    std::vector<std::pair<std::pair<int, int>, double>> basic;
    basic.reserve(num_nodes - 1);
    int i = 0, j = 0;
    for (int step = 0; step < num_nodes - 1; ++step) {
      const double t = std::min(ra(i), rb(j));
      basic.push_back({{i, j}, t});
      ra(i) -= t;
      rb(j) -= t;
      if (i < n - 1 && (j == m - 1 || ra(i) <= rb(j))) {
        ++i;
      } else {
        ++j;
      }
    }
    // Build the tree rooted at node 0 by BFS over the basic arcs.
    std::vector<std::vector<std::pair<int, double>>> adj(num_nodes);
    for (const auto& [arc, t] : basic) {
      const int r = arc.first, c = n + arc.second;
      adj[r].push_back({c, t});
      adj[c].push_back({r, t});
    }
    std::vector<int> order{0};
    std::vector<bool> seen(num_nodes, false);
    seen[0] = true;
    for (std::size_t q = 0; q < order.size(); ++q) {
      const int x = order[q];
      for (const auto& [y, t] : adj[x]) {
        if (seen[y]) continue;
        seen[y] = true;
        st.attach(y, x);
        st.flow[y] = t;
        order.push_back(y);
      }
    }
    st.depth[0] = 0;
    st.pi[0] = 0.0;
    for (std::size_t q = 1; q < order.size(); ++q) {
      const int x = order[q];
      const int p = st.parent[x];
      st.depth[x] = st.depth[p] + 1;
      st.pi[x] = st.is_row(x) ? st.arc_cost(x, p) + st.pi[p]
                              : st.pi[p] - st.arc_cost(p, x);
    }
  }

  const double cost_scale = 1.0 + cost.cwiseAbs().maxCoeff();
  const double eps_pivot = 1e-11 * cost_scale;
  const std::int64_t num_arcs = static_cast<std::int64_t>(n) * m;
  const std::int64_t block =
      std::max<std::int64_t>(64, static_cast<std::int64_t>(
                                     std::sqrt(static_cast<double>(num_arcs))));
  const std::int64_t max_pivots =
      std::max<std::int64_t>(200000, 200LL * num_nodes);

  std::int64_t scan_pos = 0;
  std::vector<CycleEdge> cycle_p, cycle_q;

  for (std::int64_t pivot = 0;; ++pivot) {
    if (pivot > max_pivots) {
      throw SolverStalled("network simplex exceeded the pivot budget");
    }
    // Block pricing: scan blocks of arcs until one holds a violating arc.
    int enter_i = -1, enter_j = -1;
    double best = -eps_pivot;
    std::int64_t scanned = 0;
    while (scanned < num_arcs) {
      const std::int64_t stop = std::min(num_arcs, scanned + block);
      for (; scanned < stop; ++scanned) {
        const std::int64_t id = (scan_pos + scanned) % num_arcs;
        const int i = static_cast<int>(id / m);
        const int j = static_cast<int>(id % m);
        const double r = cost(i, j) - st.pi[i] + st.pi[n + j];
        if (r < best) {
          best = r;
          enter_i = i;
          enter_j = j;
        }
      }
      if (enter_i >= 0) break;
    }
    scan_pos = (scan_pos + scanned) % num_arcs;
    if (enter_i < 0) break;  // optimal

    const int p = enter_i;
    const int q = n + enter_j;

    // Collect the cycle edges on both tree paths to the LCA. Flow is
    // pushed along the entering arc p -> q and returned through the tree.
    cycle_p.clear();
    cycle_q.clear();
    {
      int x = p, y = q;
      while (st.depth[x] > st.depth[y]) {
        cycle_p.push_back({x, st.is_row(x)});
        x = st.parent[x];
      }
      while (st.depth[y] > st.depth[x]) {
        cycle_q.push_back({y, !st.is_row(y)});
        y = st.parent[y];
      }
      while (x != y) {
        cycle_p.push_back({x, st.is_row(x)});
        cycle_q.push_back({y, !st.is_row(y)});
        x = st.parent[x];
        y = st.parent[y];
      }
    }

    // Ratio test. Ties resolved in favour of the edge that comes last in
    // the cycle orientation (apex -> p -> q -> apex), which keeps the
    // pivoting stable under degeneracy.
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    bool leave_on_p_side = false;
    for (auto it = cycle_p.rbegin(); it != cycle_p.rend(); ++it) {
      if (it->decreases && st.flow[it->node] <= theta) {
        theta = st.flow[it->node];
        leave = it->node;
        leave_on_p_side = true;
      }
    }
    for (const auto& e : cycle_q) {
      if (e.decreases && st.flow[e.node] <= theta) {
        theta = st.flow[e.node];
        leave = e.node;
        leave_on_p_side = false;
      }
    }
    if (leave < 0) {
      throw SolverStalled("degenerate cycle without a leaving arc");
    }

    if (theta > 0) {
      for (const auto& e : cycle_p) {
        st.flow[e.node] += e.decreases ? -theta : theta;
      }
      for (const auto& e : cycle_q) {
        st.flow[e.node] += e.decreases ? -theta : theta;
      }
    }

    // Re-hang the subtree cut off by the leaving edge: reverse the parent
    // chain from the entering endpoint down in that subtree, then attach
    // it through the entering arc.
    const int sub_end = leave_on_p_side ? p : q;
    const int new_parent = leave_on_p_side ? q : p;
    // Path sub_end -> ... -> leave (all inside the detached subtree).
    std::vector<int> path;
    for (int x = sub_end;; x = st.parent[x]) {
      path.push_back(x);
      if (x == leave) break;
    }
    // Detach and reverse: the old edge of path[t] becomes the edge of
    // path[t+1] with the same flow, seen from the other side.
    for (std::size_t t = 1; t < path.size(); ++t) st.detach(path[t]);
    st.detach(path.front());
    for (std::size_t t = path.size(); t-- > 1;) {
      st.attach(path[t], path[t - 1]);
      st.flow[path[t]] = st.flow[path[t - 1]];
    }
    st.attach(sub_end, new_parent);
    st.flow[sub_end] = theta;
    st.refresh_subtree(sub_end);
  }

  TransportSolution sol;
  sol.u = VectorXd::Zero(n);
  sol.v = VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) sol.u(i) = st.pi[i];
  for (int j = 0; j < m; ++j) sol.v(j) = -st.pi[n + j];
  sol.entries.reserve(num_nodes - 1);
  double total = 0.0;
  for (int x = 1; x < num_nodes; ++x) {
    const double f = st.flow[x];
    if (f <= 0.0) continue;
    const int pnode = st.parent[x];
    const int i = st.is_row(x) ? x : pnode;
    const int j = st.is_row(x) ? pnode - n : x - n;
    sol.entries.push_back({i, j, f});
    total += f * cost(i, j);
  }
  std::sort(sol.entries.begin(), sol.entries.end(),
            [](const FlowEntry& l, const FlowEntry& r) {
              return l.i != r.i ? l.i < r.i : l.j < r.j;
            });
  sol.cost = total;
  return sol;
}

}  // namespace sot::detail
