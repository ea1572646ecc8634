#include "subspace_ot/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "net_simplex.hpp"
#include "subspace_ot/util.hpp"

namespace sot {

namespace {

void check_weights(const VectorXd& w, const char* side) {
  if (w.size() == 0) throw EmptyInput(std::string(side) + " measure is empty");
  if (w.minCoeff() < 0) {
    throw InvalidInput(std::string(side) + " has negative weights");
  }
  if (std::abs(w.sum() - 1.0) > 1e-10) {
    std::ostringstream os;
    os << side << " weights sum to " << w.sum();
    throw InvalidInput(os.str());
  }
}

std::vector<int> sorted_order(const VectorXd& values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return values(a) != values(b) ? values(a) < values(b) : a < b;
  });
  return order;
}

void merge_entries(std::vector<PlanEntry>* entries) {
  std::sort(entries->begin(), entries->end(),
            [](const PlanEntry& l, const PlanEntry& r) {
              return l.i != r.i ? l.i < r.i : l.j < r.j;
            });
  std::vector<PlanEntry> merged;
  merged.reserve(entries->size());
  for (const auto& e : *entries) {
    if (e.mass <= 0) continue;
    if (!merged.empty() && merged.back().i == e.i && merged.back().j == e.j) {
      merged.back().mass += e.mass;
    } else {
      merged.push_back(e);
    }
  }
  entries->swap(merged);
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(MatrixXd pts, VectorXd w)
    : points(std::move(pts)), weights(std::move(w)) {
  if (points.rows() != weights.size()) {
    throw DimensionMismatch("points/weights row mismatch");
  }
  check_weights(weights, "measure");
  if (!points.allFinite()) throw InvalidInput("non-finite points");
}

DiscreteMeasure DiscreteMeasure::uniform(MatrixXd pts) {
  const Eigen::Index n = pts.rows();
  if (n == 0) throw EmptyInput("uniform measure needs points");
  return DiscreteMeasure(std::move(pts),
                         VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

VectorXd TransportPlan::row_sums() const {
  VectorXd s = VectorXd::Zero(rows);
  for (const auto& e : entries) s(e.i) += e.mass;
  return s;
}

VectorXd TransportPlan::col_sums() const {
  VectorXd s = VectorXd::Zero(cols);
  for (const auto& e : entries) s(e.j) += e.mass;
  return s;
}

void TransportPlan::validate(const VectorXd& a, const VectorXd& b,
                             double tol) const {
  if (a.size() != rows || b.size() != cols) {
    throw DimensionMismatch("plan marginals");
  }
  for (const auto& e : entries) {
    if (e.mass < 0) throw InfeasibleMarginals("negative plan mass");
  }
  const double row_err = (row_sums() - a).cwiseAbs().maxCoeff();
  const double col_err = (col_sums() - b).cwiseAbs().maxCoeff();
  if (row_err > tol || col_err > tol) {
    std::ostringstream os;
    os << "marginal error " << std::max(row_err, col_err);
    throw InfeasibleMarginals(os.str());
  }
}

double TransportPlan::quadratic_cost(const MatrixXd& x,
                                     const MatrixXd& y) const {
  double acc = 0.0;
  for (const auto& e : entries) {
    acc += e.mass * (x.row(e.i) - y.row(e.j)).squaredNorm();
  }
  return acc;
}

OtResult ot_1d(const VectorXd& x, const VectorXd& wx, const VectorXd& y,
               const VectorXd& wy) {
  if (x.size() != wx.size() || y.size() != wy.size()) {
    throw DimensionMismatch("ot_1d values/weights");
  }
  check_weights(wx, "source");
  check_weights(wy, "target");
  const auto ox = sorted_order(x);
  const auto oy = sorted_order(y);

  OtResult res;
  res.plan.rows = static_cast<int>(x.size());
  res.plan.cols = static_cast<int>(y.size());
  std::size_t i = 0, j = 0;
  double ra = wx(ox[0]);
  double rb = wy(oy[0]);
  double cost = 0.0;
  while (i < ox.size() && j < oy.size()) {
    const double take = std::min(ra, rb);
    if (take > 0) {
      const double diff = x(ox[i]) - y(oy[j]);
      cost += take * diff * diff;
      res.plan.entries.push_back({ox[i], oy[j], take});
    }
    ra -= take;
    rb -= take;
    if (ra <= 0) {
      ++i;
      if (i < ox.size()) ra = wx(ox[i]);
    }
    if (rb <= 0) {
      ++j;
      if (j < oy.size()) rb = wy(oy[j]);
    }
  }
  merge_entries(&res.plan.entries);
  res.cost = cost;
  return res;
}

OtResult ot_exact(const VectorXd& a, const VectorXd& b, const MatrixXd& cost,
                  const ExactSolverOptions& opts) {
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  if (n == 0 || m == 0) throw EmptyInput("ot_exact needs nonempty marginals");
  if (cost.rows() != n || cost.cols() != m) {
    throw DimensionMismatch("ot_exact cost matrix");
  }
  if (!cost.allFinite()) throw InvalidInput("ot_exact cost not finite");
  if (static_cast<std::int64_t>(n) * m > opts.size_limit) {
    std::ostringstream os;
    os << "instance " << n << "x" << m << " exceeds limit " << opts.size_limit;
    throw SizeLimitExceeded(os.str());
  }
  if (a.minCoeff() < 0 || b.minCoeff() < 0) {
    throw InfeasibleMarginals("negative weights");
  }
  const double sum_a = a.sum();
  const double sum_b = b.sum();
  if (sum_a <= 0 || std::abs(sum_a - sum_b) > 1e-8 * std::max(1.0, sum_a)) {
    throw InfeasibleMarginals("marginal totals differ");
  }

  OtResult res;
  bool uniform = !opts.force_simplex && n == m && n <= opts.jv_limit;
  if (uniform) {
    const double unit = sum_a / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n && uniform; ++i) {
      uniform = std::abs(a(i) - unit) <= 1e-12 && std::abs(b(i) - unit) <= 1e-12;
    }
  }
  if (uniform) {
    detail::AssignmentSolution sol = detail::jv_assignment(cost);
    res.plan.rows = static_cast<int>(n);
    res.plan.cols = static_cast<int>(m);
    const double unit = sum_a / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      res.plan.entries.push_back(
          {static_cast<int>(i), sol.row_to_col[i], unit});
    }
    merge_entries(&res.plan.entries);
    res.cost = sol.cost * unit;
    res.u = sol.u;
    res.v = sol.v;
  } else {
    detail::TransportSolution sol = detail::network_simplex(a, b, cost);
    res.plan.rows = static_cast<int>(n);
    res.plan.cols = static_cast<int>(m);
    for (const auto& e : sol.entries) {
      res.plan.entries.push_back({e.i, e.j, e.mass});
    }
    res.cost = sol.cost;
    res.u = sol.u;
    res.v = sol.v;
  }

  // Optimality certificate: dual feasibility plus a vanishing duality gap.
  const double cmax = cost.cwiseAbs().maxCoeff();
  double viol = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    viol = std::max(viol,
                    (res.u(i) + res.v.array() - cost.row(i).transpose().array())
                        .maxCoeff());
  }
  const double dual_value = a.dot(res.u) + b.dot(res.v);
  const double tol = 1e-6 * (1.0 + std::abs(res.cost));
  if (viol > 1e-7 * (1.0 + cmax) || std::abs(res.cost - dual_value) > tol) {
    throw SolverStalled("optimality certificate failed");
  }
  return res;
}

OtResult ot_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  const MatrixXd& cost, const ExactSolverOptions& opts) {
  return ot_exact(mu.weights, nu.weights, cost, opts);
}

double sliced_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                 int n_proj, std::uint64_t seed) {
  if (n_proj < 1) throw InvalidInput("n_proj must be >= 1");
  if (mu.dim() != nu.dim()) throw DimensionMismatch("sliced_w2 dimensions");
  const Eigen::Index d = mu.dim();
  double acc = 0.0;
  for (int t = 0; t < n_proj; ++t) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(t));
    std::normal_distribution<double> normal;
    VectorXd dir(d);
    double norm = 0.0;
    do {
      for (Eigen::Index r = 0; r < d; ++r) dir(r) = normal(rng);
      norm = dir.norm();
    } while (norm < 1e-12);
    dir /= norm;
    const VectorXd px = mu.points * dir;
    const VectorXd py = nu.points * dir;
    acc += ot_1d(px, mu.weights, py, nu.weights).cost;
  }
  return acc / static_cast<double>(n_proj);
}

FiberPartition quantile_fibers(const VectorXd& source_proj,
                               const VectorXd& source_w,
                               const VectorXd& target_proj,
                               const VectorXd& target_w, int bins) {
  if (bins < 1) throw InvalidInput("bins must be >= 1");
  FiberPartition part;
  part.source_bins.resize(bins);
  part.target_bins.resize(bins);
  part.source_edges = VectorXd::Zero(bins + 1);
  part.target_edges = VectorXd::Zero(bins + 1);

  auto split = [bins](const VectorXd& proj, const VectorXd& w,
                      std::vector<std::vector<std::pair<int, double>>>* out,
                      VectorXd* edges) {
    const auto order = sorted_order(proj);
    const double total = w.sum();
    (*edges)(0) = proj(order.front());
    (*edges)(bins) = proj(order.back());
    int b = 0;
    double consumed = 0.0;
    for (int idx : order) {
      double rem = w(idx);
      while (rem > 0) {
        if (b == bins - 1) {
          (*out)[b].push_back({idx, rem});
          consumed += rem;
          rem = 0;
          break;
        }
        const double cut = total * static_cast<double>(b + 1) /
                           static_cast<double>(bins);
        const double cap = cut - consumed;
        if (cap <= 1e-15 * total) {
          (*edges)(b + 1) = proj(idx);
          ++b;
          continue;
        }
        const double take = std::min(rem, cap);
        (*out)[b].push_back({idx, take});
        consumed += take;
        rem -= take;
      }
    }
  };
  split(source_proj, source_w, &part.source_bins, &part.source_edges);
  split(target_proj, target_w, &part.target_bins, &part.target_edges);
  return part;
}

namespace {

MatrixXd pairwise_sq_dist(const MatrixXd& x, const MatrixXd& y) {
  MatrixXd c(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    c.row(i) = (y.rowwise() - x.row(i)).rowwise().squaredNorm().transpose();
  }
  return c;
}

// Couples the fibers of two sub-measures given as (index, mass) lists.
// Returns entries in the original index spaces.
std::vector<PlanEntry> couple_fiber(
    const std::vector<std::pair<int, double>>& src,
    const std::vector<std::pair<int, double>>& tgt, const MatrixXd& src_pts,
    const MatrixXd& tgt_pts, const ExactSolverOptions& solver) {
  std::vector<PlanEntry> out;
  if (src.empty() || tgt.empty()) return out;
  if (src.size() == 1) {
    for (const auto& [j, mj] : tgt) out.push_back({src[0].first, j, mj});
    return out;
  }
  if (tgt.size() == 1) {
    for (const auto& [i, mi] : src) out.push_back({i, tgt[0].first, mi});
    return out;
  }
  VectorXd a(src.size()), b(tgt.size());
  MatrixXd xs(src.size(), src_pts.cols()), ys(tgt.size(), tgt_pts.cols());
  for (std::size_t i = 0; i < src.size(); ++i) {
    a(i) = src[i].second;
    xs.row(i) = src_pts.row(src[i].first);
  }
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    b(j) = tgt[j].second;
    ys.row(j) = tgt_pts.row(tgt[j].first);
  }
  // Normalize the fiber mass for the solver, then scale back.
  const double mass = a.sum();
  OtResult sub =
      ot_exact(a / mass, b / b.sum(), pairwise_sq_dist(xs, ys), solver);
  for (const auto& e : sub.plan.entries) {
    out.push_back({src[e.i].first, tgt[e.j].first, e.mass * mass});
  }
  return out;
}

}  // namespace

OtResult discrete_mk(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const Subspace& e, int bins) {
  DiscreteMkOptions opts;
  opts.bins = bins;
  return discrete_mk(mu, nu, e, opts);
}

OtResult discrete_mk(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const Subspace& e, const DiscreteMkOptions& opts) {
  if (mu.dim() != nu.dim() || mu.dim() != e.dim()) {
    throw DimensionMismatch("discrete_mk dimensions");
  }
  const Eigen::Index k = e.k();
  const MatrixXd v_e = e.v_e();
  const MatrixXd v_p = e.v_perp();
  const MatrixXd proj_s = mu.points * v_e;  // n x k
  const MatrixXd proj_t = nu.points * v_e;
  const MatrixXd perp_s = mu.points * v_p;
  const MatrixXd perp_t = nu.points * v_p;
  const MatrixXd& fiber_s = opts.fiber_full_cost ? mu.points : perp_s;
  const MatrixXd& fiber_t = opts.fiber_full_cost ? nu.points : perp_t;

  std::vector<PlanEntry> entries;

  if (k == 1 && !opts.exact_fibers) {
    const int bins =
        opts.bins > 0
            ? opts.bins
            : static_cast<int>(std::ceil(std::sqrt(
                  static_cast<double>(std::max(mu.size(), nu.size())))));
    FiberPartition part = quantile_fibers(proj_s.col(0), mu.weights,
                                          proj_t.col(0), nu.weights, bins);
    for (int b = 0; b < bins; ++b) {
      auto sub = couple_fiber(part.source_bins[b], part.target_bins[b],
                              fiber_s, fiber_t, opts.solver);
      entries.insert(entries.end(), sub.begin(), sub.end());
    }
  } else {
    // E-marginal plan, then re-coupling inside groups of exactly tied
    // projections; the E x E marginal measure is preserved verbatim.
    OtResult marginal;
    if (k == 1) {
      marginal = ot_1d(proj_s.col(0), mu.weights, proj_t.col(0), nu.weights);
    } else {
      marginal = ot_exact(mu.weights, nu.weights,
                          pairwise_sq_dist(proj_s, proj_t), opts.solver);
    }
    auto group_ids = [](const MatrixXd& proj) {
      std::vector<int> order(proj.rows());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (Eigen::Index c = 0; c < proj.cols(); ++c) {
          if (proj(a, c) != proj(b, c)) return proj(a, c) < proj(b, c);
        }
        return a < b;
      });
      std::vector<int> gid(proj.rows(), 0);
      int g = 0;
      for (std::size_t t = 0; t < order.size(); ++t) {
        if (t > 0 && (proj.row(order[t]) != proj.row(order[t - 1]))) ++g;
        gid[order[t]] = g;
      }
      return gid;
    };
    const auto gs = group_ids(proj_s);
    const auto gt = group_ids(proj_t);
    std::map<std::pair<int, int>, std::vector<PlanEntry>> buckets;
    for (const auto& en : marginal.plan.entries) {
      buckets[{gs[en.i], gt[en.j]}].push_back(en);
    }
    for (auto& [key, bucket] : buckets) {
      (void)key;
      if (bucket.size() == 1) {
        entries.push_back(bucket.front());
        continue;
      }
      // Aggregate per-index masses on both sides of the bucket, then
      // re-couple by fiber cost.
      std::map<int, double> src_mass, tgt_mass;
      for (const auto& en : bucket) {
        src_mass[en.i] += en.mass;
        tgt_mass[en.j] += en.mass;
      }
      std::vector<std::pair<int, double>> src(src_mass.begin(),
                                              src_mass.end());
      std::vector<std::pair<int, double>> tgt(tgt_mass.begin(),
                                              tgt_mass.end());
      auto sub = couple_fiber(src, tgt, fiber_s, fiber_t, opts.solver);
      entries.insert(entries.end(), sub.begin(), sub.end());
    }
  }

  OtResult res;
  res.plan.rows = static_cast<int>(mu.size());
  res.plan.cols = static_cast<int>(nu.size());
  res.plan.entries = std::move(entries);
  merge_entries(&res.plan.entries);
  res.plan.validate(mu.weights, nu.weights);
  res.cost = res.plan.quadratic_cost(mu.points, nu.points);
  return res;
}

BarycentricMap::BarycentricMap(const TransportPlan& plan,
                               std::vector<std::vector<LinearTransport>> maps)
    : maps_(std::move(maps)) {
  if (static_cast<int>(maps_.size()) != plan.rows) {
    throw DimensionMismatch("map table rows");
  }
  weights_.resize(plan.rows);
  flagged_.resize(plan.rows, false);
  VectorXd row = plan.row_sums();
  for (const auto& e : plan.entries) {
    if (e.mass <= 0) continue;
    if (e.j >= static_cast<int>(maps_[e.i].size()) ||
        maps_[e.i][e.j].matrix.size() == 0) {
      std::ostringstream os;
      os << "no map for component pair (" << e.i << ", " << e.j
         << ") with positive plan mass";
      throw UnassignedComponent(os.str());
    }
    weights_[e.i].push_back({e.j, e.mass / row(e.i)});
  }
  for (int i = 0; i < plan.rows; ++i) {
    if (weights_[i].empty()) flagged_[i] = true;
  }
}

VectorXd BarycentricMap::apply(const VectorXd& x, int source_component) const {
  if (source_component < 0 ||
      source_component >= static_cast<int>(weights_.size())) {
    throw UnassignedComponent("source component out of range");
  }
  if (flagged_[source_component]) return x;
  VectorXd out = VectorXd::Zero(x.size());
  for (const auto& [j, w] : weights_[source_component]) {
    out += w * maps_[source_component][j].apply(x);
  }
  return out;
}

bool BarycentricMap::flagged(int source_component) const {
  if (source_component < 0 ||
      source_component >= static_cast<int>(flagged_.size())) {
    throw UnassignedComponent("source component out of range");
  }
  return flagged_[source_component];
}

MatrixXd empirical_mi_cross_cov(const Gaussian& mu, const Gaussian& nu,
                                const Subspace& e, Eigen::Index n,
                                std::uint64_t seed) {
  if (n < 1) throw InvalidInput("need n >= 1 samples");
  if (mu.dim() != nu.dim() || mu.dim() != e.dim()) {
    throw DimensionMismatch("empirical_mi_cross_cov dimensions");
  }
  const MatrixXd xs = sample_gaussian(mu, n, mix_seed(seed, 17));
  const MatrixXd ys = sample_gaussian(nu, n, mix_seed(seed, 29));
  const MatrixXd px = xs * e.v_e();
  const MatrixXd py = ys * e.v_e();

  auto has_collision = [](const MatrixXd& p) {
    std::vector<int> order(p.rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        if (p(a, c) != p(b, c)) return p(a, c) < p(b, c);
      }
      return false;
    });
    for (std::size_t t = 1; t < order.size(); ++t) {
      if (p.row(order[t]) == p.row(order[t - 1])) return true;
    }
    return false;
  };
  if (has_collision(px) || has_collision(py)) {
    throw DegenerateProjection("samples share an E-projection");
  }

  const VectorXd w = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  OtResult matching;
  if (e.k() == 1) {
    matching = ot_1d(px.col(0), w, py.col(0), w);
  } else {
    matching = ot_exact(w, w, pairwise_sq_dist(px, py));
  }
  MatrixXd cross = MatrixXd::Zero(mu.dim(), mu.dim());
  for (const auto& en : matching.plan.entries) {
    cross += en.mass * xs.row(en.i).transpose() * ys.row(en.j);
  }
  return cross;
}

}  // namespace sot
