#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "subspace_ot/gaussian.hpp"
#include "subspace_ot/subspace.hpp"

namespace sot {

// Weighted point cloud; weights are nonnegative and sum to one.
struct DiscreteMeasure {
  MatrixXd points;   // n x d
  VectorXd weights;  // n

  DiscreteMeasure() = default;
  DiscreteMeasure(MatrixXd pts, VectorXd w);
  static DiscreteMeasure uniform(MatrixXd pts);

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

struct PlanEntry {
  int i;
  int j;
  double mass;
};

// Sparse coupling between two discrete measures.
struct TransportPlan {
  int rows = 0;
  int cols = 0;
  std::vector<PlanEntry> entries;

  VectorXd row_sums() const;
  VectorXd col_sums() const;
  // Throws InfeasibleMarginals when the marginals drift beyond tol.
  void validate(const VectorXd& a, const VectorXd& b, double tol = 1e-8) const;
  // Quadratic cost of the plan between two point clouds.
  double quadratic_cost(const MatrixXd& x, const MatrixXd& y) const;
};

struct OtResult {
  TransportPlan plan;
  double cost = 0.0;
  // Dual potentials certifying optimality (empty for ot_1d, where
  // optimality follows from the monotone structure).
  VectorXd u, v;
};

// 1D optimal transport by quantile matching: stable sort by
// (value, index), then the north-west corner rule on the sorted masses.
OtResult ot_1d(const VectorXd& x, const VectorXd& wx, const VectorXd& y,
               const VectorXd& wy);

struct ExactSolverOptions {
  // Hard cap on n*m for the dense solver.
  std::int64_t size_limit = 4000000;
  // Uniform equal-size instances up to this n go through the assignment
  // solver instead of the simplex.
  int jv_limit = 4096;
  bool force_simplex = false;
};

// Exact discrete OT with general marginals. The returned duals satisfy
// u_i + v_j <= c_ij with a complementary-slackness gap below
// 1e-6 * (1 + |cost|); the solver throws if it cannot certify that.
OtResult ot_exact(const VectorXd& a, const VectorXd& b, const MatrixXd& cost,
                  const ExactSolverOptions& opts = {});
OtResult ot_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  const MatrixXd& cost, const ExactSolverOptions& opts = {});

// Mean squared 1D OT cost over n_proj random unit directions
// (normalized Gaussian draws; direction t uses stream (seed, t)).
double sliced_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                 int n_proj, std::uint64_t seed);

// Equal-mass quantile partition on a scalar coordinate, with atom masses
// split at bin boundaries. Matched source/target bins carry equal mass.
struct FiberPartition {
  VectorXd source_edges;  // bins+1 coordinate cut points
  VectorXd target_edges;
  // per-bin lists of (point index, mass contributed to the bin)
  std::vector<std::vector<std::pair<int, double>>> source_bins;
  std::vector<std::vector<std::pair<int, double>>> target_bins;
};
FiberPartition quantile_fibers(const VectorXd& source_proj,
                               const VectorXd& source_w,
                               const VectorXd& target_proj,
                               const VectorXd& target_w, int bins);

struct DiscreteMkOptions {
  int bins = 0;                // <= 0: ceil(sqrt(n))
  bool fiber_full_cost = false;  // full-space instead of E-perp fiber costs
  // Couple fibers at exactly tied projections through the E-marginal plan
  // instead of quantile bins; preserves the E x E marginal measure exactly.
  bool exact_fibers = false;
  ExactSolverOptions solver{};
};

// Discrete Monge-Knothe lifting: optimal plan on the E projections,
// fibers re-coupled by exact OT on the complement coordinates. Cost is
// reported as the full-space quadratic cost of the assembled plan.
// k = 1 solves the projected problem by sorting; k > 1 by ot_exact.
OtResult discrete_mk(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const Subspace& e, int bins);
OtResult discrete_mk(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const Subspace& e, const DiscreteMkOptions& opts);

// Plan-weighted mixture of component maps: a point x of source component
// i maps to sum_j (P_ij / sum_j' P_ij') maps[i][j](x). Rows without mass
// map to the identity and are flagged.
class BarycentricMap {
 public:
  BarycentricMap(const TransportPlan& plan,
                 std::vector<std::vector<LinearTransport>> maps);

  VectorXd apply(const VectorXd& x, int source_component) const;
  bool flagged(int source_component) const;
  int components() const { return static_cast<int>(weights_.size()); }

 private:
  std::vector<std::vector<std::pair<int, double>>> weights_;  // (j, P_ij/row)
  std::vector<std::vector<LinearTransport>> maps_;
  std::vector<bool> flagged_;
};

// Empirical estimator of the Monge-Independent cross-covariance: n
// samples per side, E-projected OT matching lifted to the ambient space,
// cross-covariance of the lifted pairs. Throws DegenerateProjection on
// colliding projections.
MatrixXd empirical_mi_cross_cov(const Gaussian& mu, const Gaussian& nu,
                                const Subspace& e, Eigen::Index n,
                                std::uint64_t seed);

}  // namespace sot
