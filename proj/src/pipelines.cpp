#include "subspace_ot/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "subspace_ot/util.hpp"

namespace sot {

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// Linear-interpolation percentile of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

CurveStats stats_of(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  return {mean, percentile(v, 0.10), percentile(v, 0.25),
          percentile(v, 0.75), percentile(v, 0.90)};
}

}  // namespace

void Gmm::validate() const {
  if (components.empty()) throw InvalidInput("mixture has no components");
  double total = 0.0;
  const Eigen::Index d = components.front().gaussian.dim();
  for (const auto& c : components) {
    if (c.weight < 0) throw InvalidInput("negative mixture weight");
    if (c.gaussian.dim() != d) throw DimensionMismatch("mixture dimensions");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "mixture weights sum to " << total;
    throw InvalidInput(os.str());
  }
  if (!labels.empty() && labels.size() != components.size()) {
    throw InvalidInput("label count does not match component count");
  }
}

void LabeledDataset::validate() const {
  if (features.rows() == 0) throw EmptyInput("dataset has no rows");
  if (!features.allFinite()) throw InvalidInput("non-finite features");
  if (!labels.empty() &&
      labels.size() != static_cast<std::size_t>(features.rows())) {
    throw InvalidInput("label count does not match row count");
  }
}

void SyntheticConfig::validate() const {
  if (d1 < 1 || d2 < d1) throw InvalidInput("need 1 <= d1 <= d2");
  if (eps_grid.empty()) throw InvalidInput("empty eps grid");
  for (double e : eps_grid) {
    if (e < 0 || !std::isfinite(e)) throw InvalidInput("eps must be >= 0");
  }
  if (n_noise < 1) throw InvalidInput("need at least one noise draw");
}

SpdMatrix wishart(Eigen::Index d, Eigen::Index dof, std::mt19937_64* rng) {
  std::normal_distribution<double> normal;
  MatrixXd w = MatrixXd::Zero(d, d);
  for (Eigen::Index r = 0; r < dof; ++r) {
    VectorXd g(d);
    for (Eigen::Index i = 0; i < d; ++i) g(i) = normal(*rng);
    w.selfadjointView<Eigen::Lower>().rankUpdate(g);
  }
  MatrixXd full = w.selfadjointView<Eigen::Lower>();
  return SpdMatrix::trusted(full);
}

std::vector<SyntheticRow> synthetic_noise_curves(const SyntheticConfig& cfg) {
  cfg.validate();
  const Eigen::Index d1 = cfg.d1;
  const Eigen::Index d2 = cfg.d2;

  // Trace-normalized random signal blocks, deterministic in the seed.
  // Eigenvalues stay within a factor 4 so every signal direction carries
  // comparable energy.
  auto signal = [&](std::uint64_t stream) {
    auto rng = make_rng(cfg.seed, stream);
    std::normal_distribution<double> normal;
    MatrixXd g(d1, d1);
    for (Eigen::Index i = 0; i < d1; ++i) {
      for (Eigen::Index j = 0; j < d1; ++j) g(i, j) = normal(rng);
    }
    const MatrixXd q = polar_unitary(g);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    VectorXd ev(d1);
    for (Eigen::Index i = 0; i < d1; ++i) ev(i) = std::pow(2.0, unif(rng));
    MatrixXd m = q * ev.asDiagonal() * q.transpose();
    m *= static_cast<double>(d1) / m.trace();
    return m;
  };
  const MatrixXd a0 = signal(0xA0);
  const MatrixXd b0 = signal(0xB0);
  MatrixXd a_base = MatrixXd::Zero(d2, d2);
  MatrixXd b_base = MatrixXd::Zero(d2, d2);
  a_base.topLeftCorner(d1, d1) = a0;
  b_base.topLeftCorner(d1, d1) = b0;

  const std::size_t n_eps = cfg.eps_grid.size();
  const std::size_t tasks = n_eps * static_cast<std::size_t>(cfg.n_noise);
  // per task: d2 MI values, d2 MK values, 1 Bures value
  std::vector<std::vector<double>> mi(tasks), mk(tasks);
  std::vector<double> bures_vals(tasks);
  const MatrixXd eye = MatrixXd::Identity(d2, d2);

  parallel_for(tasks, cfg.threads, [&](std::size_t t) {
    const std::size_t eps_idx = t / static_cast<std::size_t>(cfg.n_noise);
    const double eps = cfg.eps_grid[eps_idx];
    auto rng = make_rng(cfg.seed, 0x1000 + t);
    const SpdMatrix s1 = wishart(d2, d2, &rng);
    const SpdMatrix s2 = wishart(d2, d2, &rng);
    const SpdMatrix a_eps =
        SpdMatrix::trusted(a_base + eps * s1.entries());
    const SpdMatrix b_eps =
        SpdMatrix::trusted(b_base + eps * s2.entries());
    const double bw = bures(a_eps, b_eps);
    bures_vals[t] = bw;
    mi[t].resize(d2);
    mk[t].resize(d2);
    const Gaussian ga = Gaussian::centered(a_eps);
    const Gaussian gb = Gaussian::centered(b_eps);
    for (Eigen::Index k = 1; k <= d2; ++k) {
      mk[t][k - 1] = mk_loss(a_eps, b_eps, eye, k);
      const Subspace axes = Subspace::canonical(d2, k);
      mi[t][k - 1] = mi_coupling(ga, gb, axes).cost();
    }
  });

  std::vector<SyntheticRow> rows;
  rows.reserve(n_eps * static_cast<std::size_t>(d2));
  for (std::size_t e = 0; e < n_eps; ++e) {
    for (Eigen::Index k = 1; k <= d2; ++k) {
      std::vector<double> mi_d, mk_d, bu_d;
      for (int r = 0; r < cfg.n_noise; ++r) {
        const std::size_t t = e * static_cast<std::size_t>(cfg.n_noise) +
                              static_cast<std::size_t>(r);
        mi_d.push_back(mi[t][k - 1] - bures_vals[t]);
        mk_d.push_back(mk[t][k - 1] - bures_vals[t]);
        bu_d.push_back(bures_vals[t]);
      }
      SyntheticRow row;
      row.eps = cfg.eps_grid[e];
      row.k = static_cast<int>(k);
      row.mi_minus_bures = stats_of(mi_d);
      row.mk_minus_bures = stats_of(mk_d);
      row.bures_value = stats_of(bu_d);
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

SpdMatrix shrunk_covariance(const MatrixXd& centered, const VectorXd& weights,
                            double shrinkage) {
  const Eigen::Index d = centered.cols();
  MatrixXd cov = centered.transpose() * weights.asDiagonal() * centered;
  cov = 0.5 * (cov + cov.transpose());
  const double tr = cov.trace();
  const double scale = tr > 0 ? tr / static_cast<double>(d) : 1.0;
  cov.diagonal().array() += shrinkage * scale;
  return SpdMatrix::trusted(cov);
}

GmmComponent component_from_rows(const MatrixXd& features,
                                 const std::vector<int>& rows, double weight,
                                 double shrinkage) {
  const Eigen::Index d = features.cols();
  const auto n = static_cast<double>(rows.size());
  VectorXd mean = VectorXd::Zero(d);
  for (int r : rows) mean += features.row(r).transpose();
  mean /= n;
  MatrixXd centered(rows.size(), d);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    centered.row(t) = features.row(rows[t]) - mean.transpose();
  }
  const VectorXd w = VectorXd::Constant(rows.size(), 1.0 / n);
  return GmmComponent{weight,
                      Gaussian(mean, shrunk_covariance(centered, w, shrinkage))};
}

}  // namespace

Gmm fit_source_gmm(const LabeledDataset& data, const GmmFitOptions& opts) {
  data.validate();
  if (!data.labeled()) throw InvalidInput("source fitting needs labels");
  std::map<int, std::vector<int>> by_class;
  for (Eigen::Index r = 0; r < data.features.rows(); ++r) {
    by_class[data.labels[r]].push_back(static_cast<int>(r));
  }
  const auto n = static_cast<double>(data.features.rows());
  Gmm gmm;
  for (const auto& [label, rows] : by_class) {
    if (rows.size() < 2) {
      std::ostringstream os;
      os << "class " << label << " has " << rows.size() << " sample(s)";
      throw TooFewSamples(os.str());
    }
    gmm.components.push_back(component_from_rows(
        data.features, rows, static_cast<double>(rows.size()) / n,
        opts.shrinkage));
    gmm.labels.push_back(label);
  }
  gmm.validate();
  return gmm;
}

KMeansResult kmeans(const MatrixXd& points, int k, std::uint64_t seed,
                    int max_iters, int retries, int n_init) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw InvalidInput("k must be >= 1");
  if (n < k) throw TooFewSamples("fewer points than clusters");

  KMeansResult best;
  double best_sse = std::numeric_limits<double>::infinity();
  int successes = 0;
  for (int attempt = 0; attempt <= retries && successes < n_init; ++attempt) {
    auto rng = make_rng(seed, 0xC0 + static_cast<std::uint64_t>(attempt));
    // k-means++ seeding
    MatrixXd centers(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    centers.row(0) = points.row(first(rng));
    VectorXd d2 =
        (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double total = d2.sum();
      Eigen::Index pick = 0;
      if (total > 0) {
        std::uniform_real_distribution<double> unif(0.0, total);
        double target = unif(rng);
        for (; pick < n - 1; ++pick) {
          target -= d2(pick);
          if (target <= 0) break;
        }
      } else {
        pick = first(rng);
      }
      centers.row(c) = points.row(pick);
      d2 = d2.cwiseMin(
          (points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> assignment(n, -1);
    std::vector<int> counts(k, 0);
    bool empty_cluster = false;
    for (int iter = 0; iter < max_iters; ++iter) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double dist =
              (points.row(i) - centers.row(c)).squaredNorm();
          if (dist < best_d) {
            best_d = dist;
            best = c;
          }
        }
        if (assignment[i] != best) {
          assignment[i] = best;
          changed = true;
        }
      }
      std::fill(counts.begin(), counts.end(), 0);
      for (Eigen::Index i = 0; i < n; ++i) ++counts[assignment[i]];
      empty_cluster =
          std::any_of(counts.begin(), counts.end(), [](int c) { return c == 0; });
      if (empty_cluster) break;
      MatrixXd next = MatrixXd::Zero(k, points.cols());
      for (Eigen::Index i = 0; i < n; ++i) {
        next.row(assignment[i]) += points.row(i);
      }
      for (int c = 0; c < k; ++c) next.row(c) /= counts[c];
      centers = next;
      if (!changed) break;
    }
    if (!empty_cluster) {
      ++successes;
      double sse = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        sse += (points.row(i) - centers.row(assignment[i])).squaredNorm();
      }
      if (sse < best_sse) {
        best_sse = sse;
        best = KMeansResult{std::move(centers), std::move(assignment),
                            std::move(counts)};
      }
    }
  }
  if (successes == 0) {
    throw EmptyCluster("k-means produced an empty cluster after retries");
  }
  return best;
}

Gmm fit_target_gmm(const LabeledDataset& data, int n_components,
                   std::uint64_t seed, const GmmFitOptions& opts) {
  data.validate();
  KMeansResult km = kmeans(data.features, n_components, seed);
  const auto n = static_cast<double>(data.features.rows());
  std::vector<std::vector<int>> rows(n_components);
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    rows[km.assignment[i]].push_back(static_cast<int>(i));
  }
  Gmm gmm;
  for (int c = 0; c < n_components; ++c) {
    gmm.components.push_back(component_from_rows(
        data.features, rows[c], static_cast<double>(rows[c].size()) / n,
        opts.shrinkage));
  }
  gmm.validate();
  return gmm;
}

namespace {

std::vector<int> nearest_neighbor_labels(const MatrixXd& queries,
                                         const MatrixXd& refs,
                                         const std::vector<int>& ref_labels) {
  std::vector<int> out(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    Eigen::Index best = 0;
    (refs.rowwise() - queries.row(q)).rowwise().squaredNorm().minCoeff(&best);
    out[q] = ref_labels[best];
  }
  return out;
}

double accuracy_of(const std::vector<int>& predicted,
                   const std::vector<int>& truth) {
  if (truth.empty()) return std::numeric_limits<double>::quiet_NaN();
  int hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace

GmmDaReport gmm_da(const Gmm& source, const Gmm& target, const Subspace& e,
                   const LabeledDataset& source_data,
                   const LabeledDataset& target_data, unsigned threads) {
  source.validate();
  target.validate();
  source_data.validate();
  target_data.validate();
  if (!source_data.labeled()) throw InvalidInput("source data needs labels");
  if (source.labels.empty()) {
    throw InvalidInput("source mixture needs component labels");
  }
  const int ns = source.size();
  const int nt = target.size();

  // Component of each source sample = index of its class component.
  std::map<int, int> class_to_comp;
  for (int c = 0; c < ns; ++c) class_to_comp[source.labels[c]] = c;
  std::vector<int> sample_comp(source_data.features.rows());
  for (Eigen::Index i = 0; i < source_data.features.rows(); ++i) {
    auto it = class_to_comp.find(source_data.labels[i]);
    if (it == class_to_comp.end()) {
      throw UnassignedComponent("sample label without a mixture component");
    }
    sample_comp[i] = it->second;
  }

  VectorXd ws(ns), wt(nt);
  for (int i = 0; i < ns; ++i) ws(i) = source.components[i].weight;
  for (int j = 0; j < nt; ++j) wt(j) = target.components[j].weight;

  MatrixXd cost_mk(ns, nt), cost_proj(ns, nt), cost_full(ns, nt);
  std::vector<std::vector<LinearTransport>> maps_mk(
      ns, std::vector<LinearTransport>(nt));
  std::vector<std::vector<LinearTransport>> maps_proj(
      ns, std::vector<LinearTransport>(nt));
  std::vector<std::vector<LinearTransport>> maps_full(
      ns, std::vector<LinearTransport>(nt));

  parallel_for(static_cast<std::size_t>(ns), threads, [&](std::size_t i) {
    const Gaussian& gi = source.components[i].gaussian;
    const Gaussian gi_proj = project_gaussian(gi, e);
    for (int j = 0; j < nt; ++j) {
      const Gaussian& gj = target.components[j].gaussian;
      maps_mk[i][j] = mk_map(gi, gj, e);
      cost_mk(i, j) = transport_cost(maps_mk[i][j], gi.cov, gj.cov);
      const Gaussian gj_proj = project_gaussian(gj, e);
      maps_proj[i][j] = monge_map(gi_proj, gj_proj);
      cost_proj(i, j) = wasserstein2_gaussian(gi_proj, gj_proj);
      maps_full[i][j] = monge_map(gi, gj);
      cost_full(i, j) = wasserstein2_gaussian(gi, gj);
    }
  });

  GmmDaReport rep;
  const OtResult ot_mk = ot_exact(ws, wt, cost_mk);
  const OtResult ot_proj = ot_exact(ws, wt, cost_proj);
  const OtResult ot_full = ot_exact(ws, wt, cost_full);
  rep.plan_mk = ot_mk.plan;
  rep.plan_projected = ot_proj.plan;
  rep.plan_full = ot_full.plan;

  const BarycentricMap bary_mk(ot_mk.plan, maps_mk);
  const BarycentricMap bary_proj(ot_proj.plan, maps_proj);
  const BarycentricMap bary_full(ot_full.plan, maps_full);

  const Eigen::Index n_src = source_data.features.rows();
  const MatrixXd src_proj = source_data.features * e.v_e();
  const MatrixXd tgt_proj = target_data.features * e.v_e();
  rep.mapped_mk.resize(n_src, source_data.features.cols());
  rep.mapped_projected.resize(n_src, e.k());
  rep.mapped_full.resize(n_src, source_data.features.cols());
  for (Eigen::Index i = 0; i < n_src; ++i) {
    const int c = sample_comp[i];
    rep.mapped_mk.row(i) =
        bary_mk.apply(source_data.features.row(i).transpose(), c).transpose();
    rep.mapped_projected.row(i) =
        bary_proj.apply(src_proj.row(i).transpose(), c).transpose();
    rep.mapped_full.row(i) =
        bary_full.apply(source_data.features.row(i).transpose(), c)
            .transpose();
  }

  rep.predicted_mk = nearest_neighbor_labels(
      target_data.features, rep.mapped_mk, source_data.labels);
  rep.predicted_projected = nearest_neighbor_labels(
      tgt_proj, rep.mapped_projected, source_data.labels);
  rep.predicted_full = nearest_neighbor_labels(
      target_data.features, rep.mapped_full, source_data.labels);

  rep.accuracy_mk = accuracy_of(rep.predicted_mk, target_data.labels);
  rep.accuracy_projected_bures =
      accuracy_of(rep.predicted_projected, target_data.labels);
  rep.accuracy_full_bures = accuracy_of(rep.predicted_full, target_data.labels);
  return rep;
}

VectorXd gray_axis() {
  VectorXd g(3);
  g << 0.299, 0.587, 0.114;
  return g / g.norm();
}

ColorTransferResult color_transfer(const Image& source, const Image& target,
                                   int n_clusters, ColorMethod method,
                                   std::uint64_t seed) {
  if (source.pixels() == 0 || target.pixels() == 0) {
    throw EmptyInput("empty image");
  }
  if (n_clusters < 1 || n_clusters > source.pixels() ||
      n_clusters > target.pixels()) {
    throw InvalidInput("cluster count outside [1, pixel count]");
  }

  auto to_matrix = [](const Image& img) {
    MatrixXd m(img.pixels(), 3);
    for (int p = 0; p < img.pixels(); ++p) {
      m(p, 0) = img.rgb[3 * p + 0];
      m(p, 1) = img.rgb[3 * p + 1];
      m(p, 2) = img.rgb[3 * p + 2];
    }
    return m;
  };

  ColorTransferResult result;
  auto t0 = std::chrono::steady_clock::now();
  const MatrixXd src_px = to_matrix(source);
  const MatrixXd tgt_px = to_matrix(target);
  // single k-means init: palette quantization does not need the optimum
  const KMeansResult km_s =
      kmeans(src_px, n_clusters, mix_seed(seed, 1), 100, 8, 1);
  const KMeansResult km_t =
      kmeans(tgt_px, n_clusters, mix_seed(seed, 2), 100, 8, 1);
  const auto ns = static_cast<double>(src_px.rows());
  const auto nt = static_cast<double>(tgt_px.rows());
  VectorXd ws(n_clusters), wt(n_clusters);
  for (int c = 0; c < n_clusters; ++c) {
    ws(c) = km_s.counts[c] / ns;
    wt(c) = km_t.counts[c] / nt;
  }
  result.report.quantize_seconds = elapsed_seconds(t0);

  t0 = std::chrono::steady_clock::now();
  MatrixXd displacement = MatrixXd::Zero(n_clusters, 3);
  auto barycentric_displacement = [&](const TransportPlan& plan) {
    MatrixXd disp = MatrixXd::Zero(n_clusters, 3);
    VectorXd row = plan.row_sums();
    for (const auto& en : plan.entries) {
      disp.row(en.i) += (en.mass / row(en.i)) *
                        (km_t.centers.row(en.j) - km_s.centers.row(en.i));
    }
    return disp;
  };

  switch (method) {
    case ColorMethod::kFullOt: {
      MatrixXd cost(n_clusters, n_clusters);
      for (int i = 0; i < n_clusters; ++i) {
        cost.row(i) = (km_t.centers.rowwise() - km_s.centers.row(i))
                          .rowwise()
                          .squaredNorm()
                          .transpose();
      }
      ExactSolverOptions solver;
      solver.size_limit =
          std::max<std::int64_t>(solver.size_limit,
                                 static_cast<std::int64_t>(n_clusters) *
                                     n_clusters);
      const OtResult ot = ot_exact(ws, wt, cost, solver);
      displacement = barycentric_displacement(ot.plan);
      break;
    }
    case ColorMethod::kGrayMk: {
      const Subspace gray = Subspace::from_basis(gray_axis());
      DiscreteMkOptions opts;
      opts.exact_fibers = true;
      const OtResult ot =
          discrete_mk(DiscreteMeasure(km_s.centers, ws),
                      DiscreteMeasure(km_t.centers, wt), gray, opts);
      displacement = barycentric_displacement(ot.plan);
      // E-marginal measure on (source gray, target gray) pairs.
      const VectorXd gs = km_s.centers * gray_axis();
      const VectorXd gt = km_t.centers * gray_axis();
      std::map<std::pair<double, double>, double> marg;
      for (const auto& en : ot.plan.entries) {
        marg[{gs(en.i), gt(en.j)}] += en.mass;
      }
      result.report.gray_marginal.assign(marg.begin(), marg.end());
      break;
    }
    case ColorMethod::kSliced: {
      const int n_proj = 100;
      for (int t = 0; t < n_proj; ++t) {
        auto rng = make_rng(seed, 0x51 + static_cast<std::uint64_t>(t));
        std::normal_distribution<double> normal;
        VectorXd dir(3);
        double norm = 0.0;
        do {
          for (int r = 0; r < 3; ++r) dir(r) = normal(rng);
          norm = dir.norm();
        } while (norm < 1e-12);
        dir /= norm;
        const OtResult ot =
            ot_1d(km_s.centers * dir, ws, km_t.centers * dir, wt);
        VectorXd row = ot.plan.row_sums();
        VectorXd shift = VectorXd::Zero(n_clusters);
        for (const auto& en : ot.plan.entries) {
          shift(en.i) += (en.mass / row(en.i)) *
                         ((km_t.centers.row(en.j) - km_s.centers.row(en.i)) *
                          dir)(0);
        }
        displacement += shift * dir.transpose() / static_cast<double>(n_proj);
      }
      break;
    }
  }
  result.report.solve_seconds = elapsed_seconds(t0);

  t0 = std::chrono::steady_clock::now();
  result.output.width = source.width;
  result.output.height = source.height;
  result.output.rgb.resize(source.rgb.size());
  for (int p = 0; p < source.pixels(); ++p) {
    const int c = km_s.assignment[p];
    for (int ch = 0; ch < 3; ++ch) {
      const double v = km_s.centers(c, ch) + displacement(c, ch);
      result.output.rgb[3 * p + ch] = std::clamp(v, 0.0, 1.0);
    }
  }
  result.report.apply_seconds = elapsed_seconds(t0);
  return result;
}

std::vector<int> mk_knn(const SpdMatrix& query,
                        const std::vector<SpdMatrix>& candidates,
                        const SpdMatrix& context, Eigen::Index k_sub,
                        int k_nn) {
  if (candidates.empty()) throw EmptyInput("no candidates");
  if (k_sub < 1 || k_sub > query.dim()) throw InvalidInput("k_sub outside [1, d]");
  const Subspace e = pca_subspace(context, k_sub);
  const Gaussian q = Gaussian::centered(query);
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (candidates[c].dim() != query.dim()) {
      throw DimensionMismatch("candidate dimension");
    }
    const Gaussian g = Gaussian::centered(candidates[c]);
    const double cost = transport_cost(mk_map(q, g, e), query, candidates[c]);
    ranked.push_back({cost, static_cast<int>(c)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& l, const auto& r) {
                     return l.first != r.first ? l.first < r.first
                                               : l.second < r.second;
                   });
  std::vector<int> out;
  const int take = std::min<int>(k_nn, static_cast<int>(ranked.size()));
  for (int t = 0; t < take; ++t) out.push_back(ranked[t].second);
  return out;
}

}  // namespace sot
