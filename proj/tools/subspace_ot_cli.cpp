// Command-line driver for the subspace-detour optimal transport library.
// Every command emits a JSON result envelope; tables and images go to the
// path given by --out.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "subspace_ot/discrete.hpp"
#include "subspace_ot/gaussian.hpp"
#include "subspace_ot/io.hpp"
#include "subspace_ot/pipelines.hpp"
#include "subspace_ot/subspace_select.hpp"
#include "subspace_ot/util.hpp"

namespace {

using sot::Gaussian;
using sot::MatrixXd;
using sot::ResultEnvelope;
using sot::SpdMatrix;
using sot::Subspace;
using sot::VectorXd;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start).count();
    start = now;
    return s;
  }
};

// Inputs shared by the Gaussian transport commands: either a pair of
// covariance CSV files (treated as centered Gaussians) or Gaussian JSON
// files, plus an optional subspace given as axes or a basis file.
struct PairInputs {
  std::string a_path, b_path;  // covariance CSVs
  std::string mu_path, nu_path;  // Gaussian JSONs
  std::string basis_path;
  std::string axes;
  double sym_tol = SpdMatrix::kDefaultSymTol;
  double eig_floor = SpdMatrix::kDefaultEigFloor;

  void add_pair_flags(CLI::App* cmd) {
    cmd->add_option("--a", a_path, "source covariance CSV");
    cmd->add_option("--b", b_path, "target covariance CSV");
    cmd->add_option("--mu", mu_path, "source Gaussian JSON");
    cmd->add_option("--nu", nu_path, "target Gaussian JSON");
    cmd->add_option("--sym-tol", sym_tol, "relative symmetry tolerance");
    cmd->add_option("--eig-floor", eig_floor,
                    "relative eigenvalue clipping threshold");
  }
  void add_subspace_flags(CLI::App* cmd) {
    cmd->add_option("--basis", basis_path,
                    "subspace basis CSV (columns are basis vectors)");
    cmd->add_option("--axes", axes, "1-based axis list, e.g. 1,2");
  }

  Gaussian load(const std::string& cov_path, const std::string& json_path,
                const char* side) const {
    if (!json_path.empty()) return sot::read_gaussian_json(json_path);
    if (cov_path.empty()) {
      throw sot::InvalidInput(std::string("missing input for ") + side);
    }
    const MatrixXd m = sot::read_matrix_csv(cov_path);
    return Gaussian::centered(SpdMatrix(m, sym_tol, eig_floor));
  }
  Gaussian source() const { return load(a_path, mu_path, "source"); }
  Gaussian target() const { return load(b_path, nu_path, "target"); }

  std::optional<Subspace> subspace(Eigen::Index d) const {
    if (!basis_path.empty()) {
      return Subspace::from_basis(sot::read_matrix_csv(basis_path));
    }
    if (!axes.empty()) {
      std::vector<int> parsed;
      std::stringstream ss(axes);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          parsed.push_back(std::stoi(tok) - 1);
        } catch (const std::exception&) {
          throw sot::ParseError("bad axis '" + tok + "'");
        }
      }
      return Subspace::from_axes(d, parsed);
    }
    return std::nullopt;
  }
  Subspace require_subspace(Eigen::Index d) const {
    auto s = subspace(d);
    if (!s) throw sot::InvalidInput("subspace required: pass --axes or --basis");
    return *s;
  }
};

nlohmann::json vector_to_json(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json plan_to_json(const sot::TransportPlan& plan) {
  nlohmann::json j;
  j["rows"] = plan.rows;
  j["cols"] = plan.cols;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : plan.entries) {
    entries.push_back({e.i, e.j, e.mass});
  }
  j["entries"] = std::move(entries);
  return j;
}

void emit(const ResultEnvelope& env, const std::string& out_path) {
  const std::string text = env.to_json().dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw sot::ParseError("cannot write " + out_path);
    out << text;
  }
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw sot::ParseError("bad number '" + tok + "'");
    }
  }
  return out;
}

std::vector<long> parse_long_list(const std::string& text) {
  std::vector<long> out;
  for (double v : parse_double_list(text)) out.push_back(std::lround(v));
  return out;
}

std::vector<int> labels_from_csv(const std::string& path) {
  const MatrixXd m = sot::read_matrix_csv(path);
  if (m.cols() != 1) throw sot::ParseError(path + ": labels need one column");
  std::vector<int> labels(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    labels[i] = static_cast<int>(std::lround(m(i, 0)));
  }
  return labels;
}

int run(int argc, char** argv) {
  CLI::App app{"subspace-detour optimal transport toolkit"};
  app.require_subcommand(1);

  std::string out_path;
  int threads_flag = 0;
  std::uint64_t seed = 0;
  app.add_option("--out", out_path, "output path (default: stdout)")
      ->configurable(false);
  app.add_option("--threads", threads_flag,
                 "worker cap (overrides SUBSPACE_OT_THREADS)");
  app.add_option("--seed", seed, "seed for stochastic commands");

  PairInputs pair;

  // --- closed-form transport commands ---
  auto* cmd_bures = app.add_subcommand("bures", "squared Bures metric");
  pair.add_pair_flags(cmd_bures);
  auto* cmd_monge = app.add_subcommand("monge", "optimal Gaussian map");
  pair.add_pair_flags(cmd_monge);
  auto* cmd_kr = app.add_subcommand("kr", "Knothe-Rosenblatt map");
  pair.add_pair_flags(cmd_kr);
  auto* cmd_mk = app.add_subcommand("mk", "Monge-Knothe map through E");
  pair.add_pair_flags(cmd_mk);
  pair.add_subspace_flags(cmd_mk);
  auto* cmd_mi = app.add_subcommand("mi", "Monge-Independent coupling");
  pair.add_pair_flags(cmd_mi);
  pair.add_subspace_flags(cmd_mi);

  // --- subspace selection ---
  auto* cmd_select = app.add_subcommand("select", "minimal MK subspace");
  pair.add_pair_flags(cmd_select);
  sot::SelectionConfig sel_cfg;
  long sel_k = 1;
  cmd_select->add_option("--k", sel_k, "subspace dimension");
  cmd_select->add_option("--eta", sel_cfg.eta, "step size");
  cmd_select->add_option("--max-iters", sel_cfg.max_iters, "iteration cap");
  cmd_select->add_option("--rel-tol,--tol", sel_cfg.rel_tol,
                         "stopping tolerance");
  cmd_select->add_option("--fd-step", sel_cfg.fd_step,
                         "finite-difference step");
  cmd_select->add_option("--restarts", sel_cfg.restarts, "random restarts");

  // --- pipelines ---
  auto* cmd_synth = app.add_subcommand("synthetic", "Wishart noise curves");
  sot::SyntheticConfig syn_cfg;
  long syn_d1 = 4, syn_d2 = 8;
  std::string syn_eps = "0.01,0.05,0.1";
  cmd_synth->add_option("--d1", syn_d1, "signal dimension");
  cmd_synth->add_option("--d2", syn_d2, "ambient dimension");
  cmd_synth->add_option("--eps", syn_eps, "noise levels, comma separated");
  cmd_synth->add_option("--n-noise", syn_cfg.n_noise, "draws per level");

  auto* cmd_gmm = app.add_subcommand("gmm-da", "GMM domain adaptation");
  std::string src_feat, src_lab, tgt_feat, tgt_lab;
  long gmm_k = 2;
  int gmm_components = 0;
  cmd_gmm->add_option("--source-features", src_feat)->required();
  cmd_gmm->add_option("--source-labels", src_lab)->required();
  cmd_gmm->add_option("--target-features", tgt_feat)->required();
  cmd_gmm->add_option("--target-labels", tgt_lab,
                      "optional, evaluation only");
  cmd_gmm->add_option("--k", gmm_k, "subspace dimension for Algorithm 1");
  cmd_gmm->add_option("--components", gmm_components,
                      "target mixture size (default: #classes)");
  pair.add_subspace_flags(cmd_gmm);

  auto* cmd_color = app.add_subcommand("color", "palette transfer");
  std::string color_src, color_tgt, color_method = "gray-mk";
  int color_clusters = 256;
  bool color_ascii = false;
  cmd_color->add_option("--source", color_src)->required();
  cmd_color->add_option("--target", color_tgt)->required();
  cmd_color->add_option("--clusters", color_clusters, "k-means palette size");
  cmd_color->add_option("--method", color_method, "full | gray-mk | sliced");
  cmd_color->add_flag("--ascii", color_ascii, "write P3 instead of P6");

  auto* cmd_knn = app.add_subcommand("knn", "MK nearest neighbours");
  std::string knn_query, knn_context;
  std::vector<std::string> knn_candidates;
  long knn_k_sub = 4;
  int knn_k = 5;
  cmd_knn->add_option("--query", knn_query)->required();
  cmd_knn->add_option("--candidates", knn_candidates, "covariance CSVs")
      ->required()
      ->expected(-1);
  cmd_knn->add_option("--context", knn_context)->required();
  cmd_knn->add_option("--k-sub", knn_k_sub, "context PCA dimension");
  cmd_knn->add_option("--k-nn", knn_k, "neighbours to return");

  auto* cmd_mi_limit =
      app.add_subcommand("mi-limit", "empirical MI convergence table");
  pair.add_pair_flags(cmd_mi_limit);
  pair.add_subspace_flags(cmd_mi_limit);
  std::string mi_ns = "100,400,1600,6400";
  int mi_seeds = 10;
  cmd_mi_limit->add_option("--n-grid", mi_ns, "sample sizes");
  cmd_mi_limit->add_option("--n-seeds", mi_seeds, "seeds per size");

  auto* cmd_mk_limit =
      app.add_subcommand("mk-limit", "weighted-map convergence table");
  pair.add_pair_flags(cmd_mk_limit);
  pair.add_subspace_flags(cmd_mk_limit);
  std::string mk_eps = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6";
  cmd_mk_limit->add_option("--eps-grid", mk_eps, "metric weights");

  // top-level flags (--seed, --out, --threads) may appear after the
  // subcommand name
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const unsigned threads = sot::resolve_thread_cap(threads_flag);

  ResultEnvelope env;
  env.config["seed"] = seed;
  env.config["threads"] = threads;
  Timer timer;
  try {
    if (cmd_bures->parsed()) {
      env.command = "bures";
      const Gaussian mu = pair.source();
      const Gaussian nu = pair.target();
      env.timing["parse_s"] = timer.lap();
      env.payload["distance"] = sot::bures(mu.cov, nu.cov);
      env.payload["wasserstein2"] = sot::wasserstein2_gaussian(mu, nu);
      env.timing["compute_s"] = timer.lap();
    } else if (cmd_monge->parsed() || cmd_kr->parsed()) {
      const bool is_kr = cmd_kr->parsed();
      env.command = is_kr ? "kr" : "monge";
      const Gaussian mu = pair.source();
      const Gaussian nu = pair.target();
      env.timing["parse_s"] = timer.lap();
      const sot::LinearTransport t =
          is_kr ? sot::kr_map(mu, nu) : sot::monge_map(mu, nu);
      env.payload["matrix"] = sot::matrix_to_json(t.matrix);
      env.payload["source_mean"] = vector_to_json(t.source_mean);
      env.payload["target_mean"] = vector_to_json(t.target_mean);
      env.payload["cost"] = sot::transport_cost(t, mu.cov, nu.cov);
      if (is_kr) {
        env.payload["kr_distance"] = sot::kr_distance(mu.cov, nu.cov);
      }
      env.timing["compute_s"] = timer.lap();
    } else if (cmd_mk->parsed()) {
      env.command = "mk";
      const Gaussian mu = pair.source();
      const Gaussian nu = pair.target();
      const Subspace e = pair.require_subspace(mu.dim());
      env.timing["parse_s"] = timer.lap();
      const sot::LinearTransport t = sot::mk_map(mu, nu, e);
      env.payload["matrix"] = sot::matrix_to_json(t.matrix);
      env.payload["cost"] = sot::transport_cost(t, mu.cov, nu.cov);
      env.payload["basis"] = sot::matrix_to_json(e.v_e());
      env.timing["compute_s"] = timer.lap();
    } else if (cmd_mi->parsed()) {
      env.command = "mi";
      const Gaussian mu = pair.source();
      const Gaussian nu = pair.target();
      const Subspace e = pair.require_subspace(mu.dim());
      env.timing["parse_s"] = timer.lap();
      const sot::GaussianCoupling c = sot::mi_coupling(mu, nu, e);
      env.payload["sigma"] = sot::matrix_to_json(c.sigma.entries());
      env.payload["cross"] = sot::matrix_to_json(c.cross_block());
      env.payload["cost"] = c.cost();
      env.timing["compute_s"] = timer.lap();
    } else if (cmd_select->parsed()) {
      env.command = "select";
      const Gaussian mu = pair.source();
      const Gaussian nu = pair.target();
      env.timing["parse_s"] = timer.lap();
      sel_cfg.k = sel_k;
      sel_cfg.seed = seed;
      sel_cfg.threads = threads;
      env.config["k"] = sel_k;
      env.config["eta"] = sel_cfg.eta;
      env.config["restarts"] = sel_cfg.restarts;
      const sot::SelectionResult res =
          sot::select_subspace(mu.cov, nu.cov, sel_cfg);
      env.payload["basis"] = sot::matrix_to_json(res.subspace.v_e());
      env.payload["loss_history"] = res.loss_history;
      env.payload["final_loss"] = res.final_loss;
      env.payload["restart_index"] = res.restart_index;
      env.timing["compute_s"] = timer.lap();
    } else if (cmd_synth->parsed()) {
      env.command = "synthetic";
      syn_cfg.d1 = syn_d1;
      syn_cfg.d2 = syn_d2;
      syn_cfg.eps_grid = parse_double_list(syn_eps);
      syn_cfg.seed = seed;
      syn_cfg.threads = threads;
      env.config["d1"] = syn_d1;
      env.config["d2"] = syn_d2;
      env.config["eps"] = syn_cfg.eps_grid;
      env.config["n_noise"] = syn_cfg.n_noise;
      env.timing["parse_s"] = timer.lap();
      const auto rows = sot::synthetic_noise_curves(syn_cfg);
      env.timing["compute_s"] = timer.lap();
      std::ostringstream csv;
      csv << "eps,k,mi_minus_bures_mean,mi_p10,mi_p25,mi_p75,mi_p90,"
             "mk_minus_bures_mean,mk_p10,mk_p25,mk_p75,mk_p90,"
             "bures_mean,bures_p10,bures_p25,bures_p75,bures_p90\n";
      char buf[64];
      auto put = [&](double v, bool last = false) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        csv << buf << (last ? '\n' : ',');
      };
      for (const auto& r : rows) {
        put(r.eps);
        csv << r.k << ',';
        for (double v : r.mi_minus_bures) put(v);
        for (double v : r.mk_minus_bures) put(v);
        for (std::size_t s = 0; s < r.bures_value.size(); ++s) {
          put(r.bures_value[s], s + 1 == r.bures_value.size());
        }
      }
      if (out_path.empty()) throw sot::InvalidInput("--out is required");
      std::ofstream table(out_path, std::ios::binary);
      if (!table) throw sot::ParseError("cannot write " + out_path);
      table << csv.str();
      env.payload["rows"] = rows.size();
      env.payload["table"] = out_path;
      env.timing["write_s"] = timer.lap();
      emit(env, "");
      return 0;
    } else if (cmd_gmm->parsed()) {
      env.command = "gmm-da";
      sot::LabeledDataset source{sot::read_matrix_csv(src_feat),
                                 labels_from_csv(src_lab)};
      sot::LabeledDataset target{sot::read_matrix_csv(tgt_feat), {}};
      if (!tgt_lab.empty()) target.labels = labels_from_csv(tgt_lab);
      env.timing["parse_s"] = timer.lap();
      const sot::Gmm src_gmm = sot::fit_source_gmm(source);
      const int n_comp =
          gmm_components > 0 ? gmm_components : src_gmm.size();
      sot::LabeledDataset target_unlabeled{target.features, {}};
      const sot::Gmm tgt_gmm =
          sot::fit_target_gmm(target_unlabeled, n_comp, seed);
      std::optional<Subspace> e = pair.subspace(source.features.cols());
      if (!e) {
        // Algorithm 1 between the pooled empirical covariances.
        const Subspace via_select = [&] {
          auto cov_of = [](const MatrixXd& f) {
            const VectorXd mean = f.colwise().mean();
            const MatrixXd c = f.rowwise() - mean.transpose();
            return SpdMatrix::trusted(
                (c.transpose() * c) / static_cast<double>(f.rows()));
          };
          sot::SelectionConfig cfg;
          cfg.k = gmm_k;
          cfg.seed = seed;
          cfg.threads = threads;
          return sot::select_subspace(cov_of(source.features),
                                      cov_of(target.features), cfg)
              .subspace;
        }();
        e = via_select;
      }
      env.config["k"] = e->k();
      env.config["components"] = n_comp;
      const sot::GmmDaReport rep =
          sot::gmm_da(src_gmm, tgt_gmm, *e, source, target, threads);
      env.payload["accuracy_mk"] = rep.accuracy_mk;
      env.payload["accuracy_projected_bures"] = rep.accuracy_projected_bures;
      env.payload["accuracy_full_bures"] = rep.accuracy_full_bures;
      env.payload["plan_mk"] = plan_to_json(rep.plan_mk);
      env.payload["basis"] = sot::matrix_to_json(e->v_e());
      env.payload["predicted_mk"] = rep.predicted_mk;
      env.timing["compute_s"] = timer.lap();
    } else if (cmd_color->parsed()) {
      env.command = "color";
      const sot::Image src = sot::read_ppm(color_src);
      const sot::Image tgt = sot::read_ppm(color_tgt);
      env.timing["parse_s"] = timer.lap();
      sot::ColorMethod method;
      if (color_method == "full") {
        method = sot::ColorMethod::kFullOt;
      } else if (color_method == "gray-mk") {
        method = sot::ColorMethod::kGrayMk;
      } else if (color_method == "sliced") {
        method = sot::ColorMethod::kSliced;
      } else {
        throw sot::InvalidInput("unknown method " + color_method);
      }
      env.config["clusters"] = color_clusters;
      env.config["method"] = color_method;
      const sot::ColorTransferResult res =
          sot::color_transfer(src, tgt, color_clusters, method, seed);
      env.timing["quantize_s"] = res.report.quantize_seconds;
      env.timing["solve_s"] = res.report.solve_seconds;
      env.timing["apply_s"] = res.report.apply_seconds;
      if (out_path.empty()) throw sot::InvalidInput("--out is required");
      sot::write_ppm(out_path, res.output, !color_ascii);
      env.payload["image"] = out_path;
      env.payload["width"] = res.output.width;
      env.payload["height"] = res.output.height;
      env.timing["write_s"] = timer.lap();
      emit(env, "");
      return 0;
    } else if (cmd_knn->parsed()) {
      env.command = "knn";
      const SpdMatrix query(sot::read_matrix_csv(knn_query));
      const SpdMatrix context(sot::read_matrix_csv(knn_context));
      std::vector<SpdMatrix> candidates;
      for (const auto& path : knn_candidates) {
        candidates.emplace_back(sot::read_matrix_csv(path));
      }
      env.timing["parse_s"] = timer.lap();
      env.config["k_sub"] = knn_k_sub;
      env.config["k_nn"] = knn_k;
      const auto ranking =
          sot::mk_knn(query, candidates, context, knn_k_sub, knn_k);
      env.payload["ranking"] = ranking;
      nlohmann::json names = nlohmann::json::array();
      for (int id : ranking) names.push_back(knn_candidates[id]);
      env.payload["files"] = names;
      env.timing["compute_s"] = timer.lap();
    } else if (cmd_mi_limit->parsed()) {
      env.command = "mi-limit";
      const Gaussian mu = pair.source();
      const Gaussian nu = pair.target();
      const Subspace e = pair.require_subspace(mu.dim());
      env.timing["parse_s"] = timer.lap();
      const auto ns = parse_long_list(mi_ns);
      env.config["n_grid"] = ns;
      env.config["n_seeds"] = mi_seeds;
      const MatrixXd c_ref = sot::mi_coupling(mu, nu, e).cross_block();
      std::ostringstream csv;
      csv << "n,seed,frob_error\n";
      std::vector<double> medians;
      for (long n : ns) {
        std::vector<double> errs;
        for (int s = 0; s < mi_seeds; ++s) {
          const MatrixXd c_hat = sot::empirical_mi_cross_cov(
              mu, nu, e, n, sot::mix_seed(seed, static_cast<std::uint64_t>(s)));
          const double err = (c_hat - c_ref).norm();
          errs.push_back(err);
          csv << n << ',' << s << ',' << err << '\n';
        }
        std::sort(errs.begin(), errs.end());
        const std::size_t mid = errs.size() / 2;
        medians.push_back(errs.size() % 2 == 1
                              ? errs[mid]
                              : 0.5 * (errs[mid - 1] + errs[mid]));
      }
      env.payload["median_frob_error"] = medians;
      env.payload["reference_norm"] = c_ref.norm();
      env.timing["compute_s"] = timer.lap();
      if (!out_path.empty()) {
        std::ofstream table(out_path, std::ios::binary);
        if (!table) throw sot::ParseError("cannot write " + out_path);
        table << csv.str();
        env.payload["table"] = out_path;
        env.timing["write_s"] = timer.lap();
        emit(env, "");
        return 0;
      }
    } else if (cmd_mk_limit->parsed()) {
      env.command = "mk-limit";
      const Gaussian mu = pair.source();
      const Gaussian nu = pair.target();
      const Subspace e = pair.require_subspace(mu.dim());
      env.timing["parse_s"] = timer.lap();
      const auto eps_grid = parse_double_list(mk_eps);
      env.config["eps_grid"] = eps_grid;
      const sot::LinearTransport t_mk = sot::mk_map(mu, nu, e);
      std::ostringstream csv;
      csv << "eps,frob_diff\n";
      std::vector<double> diffs;
      char buf[64];
      for (double eps : eps_grid) {
        const sot::LinearTransport t_eps =
            sot::weighted_monge_map(mu, nu, sot::WeightedMetric(e, eps));
        const double diff = (t_eps.matrix - t_mk.matrix).norm();
        diffs.push_back(diff);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", eps, diff);
        csv << buf;
      }
      env.payload["frob_diff"] = diffs;
      env.timing["compute_s"] = timer.lap();
      if (!out_path.empty()) {
        std::ofstream table(out_path, std::ios::binary);
        if (!table) throw sot::ParseError("cannot write " + out_path);
        table << csv.str();
        env.payload["table"] = out_path;
        env.timing["write_s"] = timer.lap();
        emit(env, "");
        return 0;
      }
    }
    emit(env, out_path);
    return 0;
  } catch (const sot::Error& e) {
    env.error = {{e.kind(), e.what()}};
    emit(env, out_path);
    return 1;
  } catch (const std::exception& e) {
    env.error = {{"Error", e.what()}};
    emit(env, out_path);
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
