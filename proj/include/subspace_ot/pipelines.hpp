#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "subspace_ot/discrete.hpp"
#include "subspace_ot/gaussian.hpp"
#include "subspace_ot/subspace_select.hpp"

namespace sot {

struct GmmComponent {
  double weight = 0.0;
  Gaussian gaussian;
};

// Gaussian mixture with optional per-component class tags.
struct Gmm {
  std::vector<GmmComponent> components;
  std::vector<int> labels;  // empty or one tag per component

  void validate() const;
  int size() const { return static_cast<int>(components.size()); }
};

struct LabeledDataset {
  MatrixXd features;        // n x d
  std::vector<int> labels;  // empty when unlabeled

  bool labeled() const { return !labels.empty(); }
  void validate() const;
};

// --- synthetic Wishart-noise curves -------------------------------------

struct SyntheticConfig {
  Eigen::Index d1 = 4;       // signal dimension
  Eigen::Index d2 = 8;       // ambient dimension, d2 >= d1
  std::vector<double> eps_grid{0.01, 0.05, 0.1};
  int n_noise = 100;         // noise draws per level
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

// mean, p10, p25, p75, p90 over the noise draws
using CurveStats = std::array<double, 5>;

struct SyntheticRow {
  double eps = 0.0;
  int k = 0;
  CurveStats mi_minus_bures{};
  CurveStats mk_minus_bures{};
  CurveStats bures_value{};
};

// Embeds a normalized random signal pair into d2 dimensions, adds
// eps-scaled Wishart noise, and tabulates MI and MK costs through the
// first k canonical axes for k = 1..d2, against the full Bures cost.
std::vector<SyntheticRow> synthetic_noise_curves(const SyntheticConfig& cfg);

// Wishart(I_d, dof) draw: sum of dof outer products of standard normals.
SpdMatrix wishart(Eigen::Index d, Eigen::Index dof, std::mt19937_64* rng);

// --- GMM fitting ---------------------------------------------------------

struct GmmFitOptions {
  // Relative shrinkage: cov + shrinkage * (tr(cov)/d) * I, with a unit
  // scale fallback when the empirical covariance is exactly zero.
  double shrinkage = 1e-3;
};

// One component per class: empirical mean, biased (divisor n) covariance
// with shrinkage, weight proportional to class frequency.
Gmm fit_source_gmm(const LabeledDataset& data, const GmmFitOptions& opts = {});

struct KMeansResult {
  MatrixXd centers;            // k x d
  std::vector<int> assignment; // n
  std::vector<int> counts;     // k
};
// Seeded k-means++ with Lloyd refinement; keeps the lowest-inertia result
// out of n_init successful runs. Attempts that lose a cluster are retried
// up to `retries` times in total.
KMeansResult kmeans(const MatrixXd& points, int k, std::uint64_t seed,
                    int max_iters = 100, int retries = 8, int n_init = 4);

// Seeded k-means partition, then one empirical Gaussian per cluster.
Gmm fit_target_gmm(const LabeledDataset& data, int n_components,
                   std::uint64_t seed, const GmmFitOptions& opts = {});

// --- GMM domain adaptation ------------------------------------------------

struct GmmDaReport {
  // 1-NN accuracies on the target (NaN when target labels are absent).
  double accuracy_mk = 0.0;
  double accuracy_projected_bures = 0.0;
  double accuracy_full_bures = 0.0;
  TransportPlan plan_mk;
  TransportPlan plan_projected;
  TransportPlan plan_full;
  MatrixXd mapped_mk;         // source samples mapped by the MK routes
  MatrixXd mapped_projected;  // projected source mapped on E (n x k)
  MatrixXd mapped_full;
  std::vector<int> predicted_mk;
  std::vector<int> predicted_projected;
  std::vector<int> predicted_full;
};

// Pairwise MK costs between components, discrete OT plan on the mixture
// weights, P-barycentric projection of the component maps, and 1-NN label
// transfer, with projected-Bures and full-Bures baselines.
GmmDaReport gmm_da(const Gmm& source, const Gmm& target, const Subspace& e,
                   const LabeledDataset& source_data,
                   const LabeledDataset& target_data, unsigned threads = 1);

// --- color transfer --------------------------------------------------------

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;  // 3 * width * height, row-major, in [0, 1]

  int pixels() const { return width * height; }
};

enum class ColorMethod { kFullOt, kGrayMk, kSliced };

struct ColorTransferReport {
  double quantize_seconds = 0.0;
  double solve_seconds = 0.0;
  double apply_seconds = 0.0;
  // E-marginal matching of the gray detour, aggregated on (source gray,
  // target gray) value pairs; empty for the other methods.
  std::vector<std::pair<std::pair<double, double>, double>> gray_marginal;
};

struct ColorTransferResult {
  Image output;
  ColorTransferReport report;
};

// Palette transfer after k-means quantization. Pixels are rendered as
// their cluster center moved by the cluster's mapped displacement.
ColorTransferResult color_transfer(const Image& source, const Image& target,
                                   int n_clusters, ColorMethod method,
                                   std::uint64_t seed);

// Rec.601 luma direction, normalized to unit length.
VectorXd gray_axis();

// --- MK nearest neighbours --------------------------------------------------

// Ranks candidates by MK transport cost from the query through the
// subspace spanned by the top principal directions of the context
// covariance. Means are excluded; ties break by candidate index.
std::vector<int> mk_knn(const SpdMatrix& query,
                        const std::vector<SpdMatrix>& candidates,
                        const SpdMatrix& context, Eigen::Index k_sub,
                        int k_nn);

}  // namespace sot
