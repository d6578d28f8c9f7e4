#include "qme/analysis.hpp"
#include "qme/embedding.hpp"
#include "qme/io.hpp"
#include "qme/models.hpp"
#include "qme/qcore.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace qme;
using ordered_json = nlohmann::ordered_json;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Clean twin of a dataset: inline trajectories when present, otherwise the
// file named by clean_reference (tried verbatim, then next to the data file).
std::vector<Trajectory> clean_twin_of(const DatasetFile& file, const std::string& data_path) {
  if (!file.clean_trajectories.empty()) return file.clean_trajectories;
  if (file.clean_reference.empty()) return {};
  namespace fs = std::filesystem;
  fs::path ref(file.clean_reference);
  if (!fs::exists(ref)) ref = fs::path(data_path).parent_path() / ref;
  if (!fs::exists(ref)) return {};
  return load_dataset(ref.string()).data.trajectories;
}

ordered_json complex_list(const Vec& v) {
  ordered_json out = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i)
    out.push_back(ordered_json::array({v(i).real(), v(i).imag()}));
  return out;
}

void emit_report(const std::string& path, const ordered_json& j) {
  const std::string text = j.dump(1) + "\n";
  if (!path.empty()) write_text_atomic(path, text);
  std::cout << text;
}

double real_expectation(const Mat& rho, const Mat& op) {
  return (rho * op).trace().real();
}

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat pauli_y() {
  Mat m(2, 2);
  m << Cplx(0, 0), Cplx(0, -1), Cplx(0, 1), Cplx(0, 0);
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// generate ------------------------------------------------------------------

struct GenerateArgs {
  std::string model = "finite";
  Index d_env = 2;
  double a_unit = 1.0;
  double a_diss = 0.1;
  double jc_gamma = 0.05;
  double jc_g = 2.5;
  double jc_alpha_re = 1.1;
  double jc_alpha_im = 0.0;
  Index jc_levels = 0;
  double sb_gamma = 0.05;
  double sb_g = 0.5;
  double sb_delta = 0.5;
  double sb_omega0 = 1.0;
  Index sb_levels = 8;
  Index L = 4;
  Index T = 200;
  double tau = 0.2;
  double sigma = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string out_clean;
  std::string out_test;
};

int run_generate(const GenerateArgs& a) {
  ModelSpec spec;
  spec.kind = a.model == "spin-boson" ? "spin_boson" : a.model;
  spec.d_env = a.d_env;
  spec.a_unit = a.a_unit;
  spec.a_diss = a.a_diss;
  spec.jc.gamma = a.jc_gamma;
  spec.jc.g = a.jc_g;
  spec.jc.alpha = Cplx(a.jc_alpha_re, a.jc_alpha_im);
  spec.jc.n_levels = a.jc_levels;
  spec.sb.gamma = a.sb_gamma;
  spec.sb.g = a.sb_g;
  spec.sb.delta = a.sb_delta;
  spec.sb.omega0 = a.sb_omega0;
  spec.sb.n_levels = a.sb_levels;

  const GeneratedData gen = generate_dataset(spec, a.L, a.T, a.tau, a.seed);
  Rng nrng = make_rng(a.seed, 2);
  const TrajectoryDataset noisy = add_noise(gen.train, a.sigma, nrng);
  const Trajectory noisy_test = add_noise(gen.test, a.sigma, nrng);

  save_dataset(a.out, noisy, a.out_clean, nullptr);
  if (!a.out_clean.empty()) save_dataset(a.out_clean, gen.train);
  if (!a.out_test.empty()) {
    TrajectoryDataset test = gen.train;
    test.noise_sigma = a.sigma;
    test.trajectories = {noisy_test};
    const std::vector<Trajectory> clean_twin{gen.test};
    save_dataset(a.out_test, test, "", &clean_twin);
  }

  ordered_json j;
  j["model"] = spec.kind;
  j["d"] = gen.train.d;
  j["L"] = a.L;
  j["T"] = a.T;
  j["tau"] = a.tau;
  j["noise_sigma"] = a.sigma;
  j["seed"] = a.seed;
  j["out"] = a.out;
  if (!a.out_clean.empty()) j["out_clean"] = a.out_clean;
  if (!a.out_test.empty()) j["out_test"] = a.out_test;
  std::cout << j.dump(1) << "\n";
  return 0;
}

// fit -----------------------------------------------------------------------

struct FitArgs {
  std::string data;
  Index K = 75;
  double sigma = -1.0;  // negative picks the dataset's recorded level
  bool project = false;
  std::string out_model;
  std::string report;
};

int run_fit(const FitArgs& a) {
  const Timer timer;
  const DatasetFile file = load_dataset(a.data);
  FitOptions opts;
  opts.threshold.sigma = a.sigma >= 0 ? a.sigma : file.data.noise_sigma;
  opts.project = a.project;
  const EmbeddingModel model = fit(file.data, a.K, opts);

  ordered_json report;
  report["r"] = model.r;
  report["d_env_eff"] = effective_env_dim(model.r, model.d);
  report["K"] = model.K;
  report["d"] = model.d;
  report["threshold_sigma"] = opts.threshold.sigma;
  report["eigenvalues"] = complex_list(model.eigenvalues);
  ordered_json svals = ordered_json::array();
  for (Index i = 0; i < model.singular_values.size(); ++i)
    svals.push_back(model.singular_values(i));
  report["singular_values"] = std::move(svals);

  if (file.data.model.kind == "finite") {
    report["natural_rank"] = natural_rank(file.data.d, file.data.model.d_env);
    Rng grng = make_rng(file.data.seed, 0);
    const GkslGenerator g = random_gksl(file.data.model.d, file.data.model.d_env,
                                        file.data.model.a_unit, file.data.model.a_diss,
                                        grng);
    Eigen::ComplexEigenSolver<Mat> es(propagator(gksl_superoperator(g), file.data.tau));
    const SpectrumMatch match = match_spectra(model.eigenvalues, es.eigenvalues());
    ordered_json sm;
    sm["max"] = match.max_distance;
    sm["mean"] = match.mean_distance;
    sm["unmatched_reference"] = static_cast<Index>(match.unmatched_reference.size());
    report["spectrum_match"] = std::move(sm);
  }

  if (!a.out_model.empty()) {
    TrainingInfo info;
    info.path = a.data;
    info.fingerprint = file_fingerprint(a.data);
    info.model = file.data.model;
    info.seed = file.data.seed;
    info.tau = file.data.tau;
    info.noise_sigma = file.data.noise_sigma;
    info.L = static_cast<Index>(file.data.trajectories.size());
    info.T = static_cast<Index>(file.data.trajectories.empty()
                                    ? 0
                                    : file.data.trajectories[0].size());
    save_model(a.out_model, model, &info);
    report["out_model"] = a.out_model;
  }
  report["runtime_s"] = timer.seconds();
  emit_report(a.report, report);
  return 0;
}

// predict -------------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string data;
  Index horizon = 0;  // 0 picks T - K
  std::string out_csv;
  std::string report;
};

int run_predict(const PredictArgs& a) {
  const ModelRecord rec = load_model(a.model);
  const DatasetFile file = load_dataset(a.data);
  if (file.data.trajectories.empty())
    throw std::runtime_error("predict: the data file holds no trajectory");
  const Trajectory& test = file.data.trajectories[0];
  const Index T = static_cast<Index>(test.size());
  const Index K = rec.model.K;
  if (T < K) throw std::runtime_error("predict: test trajectory shorter than K");
  if (a.horizon < 0) throw std::runtime_error("predict: horizon must be >= 1");
  const Index horizon = a.horizon > 0 ? a.horizon : T - K;
  if (horizon < 1) throw std::runtime_error("predict: horizon must be >= 1");

  Trajectory history(test.begin(), test.begin() + K);
  const Trajectory pred = predict_trajectory(rec.model, history, horizon);
  const Trajectory* clean =
      file.clean_trajectories.empty() ? nullptr : &file.clean_trajectories[0];

  std::vector<std::string> header{"step"};
  const Index d = rec.model.d;
  const bool bloch = d == 2;
  auto state_columns = [&](const std::string& prefix) {
    if (bloch) {
      header.push_back(prefix + "_sx");
      header.push_back(prefix + "_sy");
      header.push_back(prefix + "_sz");
      return;
    }
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        header.push_back(prefix + "_re_" + std::to_string(i) + "_" + std::to_string(j));
        header.push_back(prefix + "_im_" + std::to_string(i) + "_" + std::to_string(j));
      }
  };
  state_columns("pred");
  state_columns("test");
  if (clean) state_columns("clean");

  const Mat sx = pauli_x(), sy = pauli_y(), sz = pauli_z();
  auto state_values = [&](std::vector<std::string>& row, const Mat* s) {
    const size_t width = bloch ? 3 : static_cast<size_t>(2 * d * d);
    if (!s) {
      row.insert(row.end(), width, "");
      return;
    }
    if (bloch) {
      row.push_back(csv_num(real_expectation(*s, sx)));
      row.push_back(csv_num(real_expectation(*s, sy)));
      row.push_back(csv_num(real_expectation(*s, sz)));
      return;
    }
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        row.push_back(csv_num((*s)(i, j).real()));
        row.push_back(csv_num((*s)(i, j).imag()));
      }
  };

  std::vector<std::vector<std::string>> rows;
  for (Index n = 1; n <= horizon; ++n) {
    const Index k = K + n - 1;
    std::vector<std::string> row{std::to_string(k)};
    state_values(row, &pred[n - 1]);
    state_values(row, k < T ? &test[k] : nullptr);
    if (clean) state_values(row, k < T ? &(*clean)[k] : nullptr);
    rows.push_back(std::move(row));
  }
  if (!a.out_csv.empty()) write_csv(a.out_csv, header, rows);

  ordered_json j;
  j["K"] = K;
  j["horizon"] = horizon;
  j["r"] = rec.model.r;
  if (horizon >= T - K) {
    Trajectory pred_full = history;
    pred_full.insert(pred_full.end(), pred.begin(), pred.begin() + (T - K));
    j["d_test_noisy"] = dist_test(pred_full, test, K);
    if (clean) j["d_test_clean"] = dist_test(pred_full, *clean, K);
  }
  if (!a.out_csv.empty()) j["out_csv"] = a.out_csv;
  emit_report(a.report, j);
  return 0;
}

// denoise -------------------------------------------------------------------

struct DenoiseArgs {
  std::string data;
  Index K = 75;
  double sigma = -1.0;
  Index eta = 0;  // 0 selects the threshold rank
  bool project = false;
  std::string out;
  std::string report;
};

int run_denoise(const DenoiseArgs& a) {
  const Timer timer;
  const DatasetFile file = load_dataset(a.data);
  const HankelSet hs = build_shifted_and_stack(file.data.trajectories, a.K);
  Index eta = a.eta;
  ThresholdConfig cfg;
  cfg.sigma = a.sigma >= 0 ? a.sigma : file.data.noise_sigma;
  if (eta < 1) {
    Eigen::BDCSVD<Mat> svd(hs.h);
    eta = optimal_rank(svd.singularValues(), hs.h.rows(), hs.h.cols(), cfg);
    if (eta < 1) throw NoSignalError("denoise: no signal above noise threshold");
  }
  const DenoiseResult res = denoise(hs, eta, a.project);

  TrajectoryDataset out = file.data;
  out.trajectories = res.trajectories;
  save_dataset(a.out, out, file.clean_reference,
               file.clean_trajectories.empty() ? nullptr : &file.clean_trajectories);

  ordered_json j;
  j["eta"] = eta;
  j["K"] = a.K;
  j["threshold_sigma"] = cfg.sigma;
  j["out"] = a.out;
  const std::vector<Trajectory> clean = clean_twin_of(file, a.data);
  if (clean.size() == file.data.trajectories.size() && !clean.empty()) {
    j["dist_noisy_clean"] = dist_dataset(file.data.trajectories, clean);
    j["dist_denoised_clean"] = dist_dataset(res.trajectories, clean);
  }
  j["runtime_s"] = timer.seconds();
  emit_report(a.report, j);
  return 0;
}

// spectrum ------------------------------------------------------------------

struct SpectrumArgs {
  std::string model;
  std::string out_csv;
};

int run_spectrum(const SpectrumArgs& a) {
  const ModelRecord rec = load_model(a.model);
  std::vector<std::vector<std::string>> rows;
  for (Index i = 0; i < rec.model.eigenvalues.size(); ++i) {
    const Cplx z = rec.model.eigenvalues(i);
    rows.push_back({"reconstructed", std::to_string(i), csv_num(z.real()),
                    csv_num(z.imag()), csv_num(std::abs(z)), csv_num(std::arg(z))});
  }
  if (rec.has_training && rec.training.model.kind == "finite") {
    Rng grng = make_rng(rec.training.seed, 0);
    const GkslGenerator g =
        random_gksl(rec.training.model.d, rec.training.model.d_env,
                    rec.training.model.a_unit, rec.training.model.a_diss, grng);
    Eigen::ComplexEigenSolver<Mat> es(
        propagator(gksl_superoperator(g), rec.training.tau));
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Cplx z = es.eigenvalues()(i);
      rows.push_back({"channel", std::to_string(i), csv_num(z.real()), csv_num(z.imag()),
                      csv_num(std::abs(z)), csv_num(std::arg(z))});
    }
  }
  write_csv(a.out_csv, {"kind", "index", "re", "im", "modulus", "phase"}, rows);
  std::cout << "wrote " << rows.size() << " rows to " << a.out_csv << "\n";
  return 0;
}

// sweep ---------------------------------------------------------------------

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) seeds.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (seeds.empty()) throw std::runtime_error("sweep: empty seed list");
  return seeds;
}

int run_sweep_table1(const std::string& out_csv, const std::string& seeds_csv) {
  const auto sweep = sweep_finite_env({2, 3, 4, 5, 6}, {1e-1, 1e-2, 1e-3}, {150, 200},
                                      parse_seeds(seeds_csv));
  write_finite_env_csv(out_csv, sweep);
  std::cout << "wrote " << sweep.cells.size() << " cells to " << out_csv << "\n";
  return 0;
}

int run_sweep_fig3b(const std::string& out_csv, const std::string& seeds_csv) {
  const auto sweep = sweep_memory_depth(3, {5, 10, 15, 25, 50, 75, 100},
                                        {0.0, 1e-3, 1e-2, 1e-1}, parse_seeds(seeds_csv));
  write_memory_depth_csv(out_csv, sweep);
  std::cout << "wrote " << sweep.cells.size() << " cells to " << out_csv << "\n";
  return 0;
}

int run_sweep_fig3c(const std::string& out_csv, Index d_env, double sigma,
                    std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = "finite";
  spec.d_env = d_env;
  const GeneratedData gen = generate_dataset(spec, 4, 200, 0.2, seed);
  std::vector<std::vector<std::string>> rows;
  for (double s : std::vector<double>{0.0, sigma}) {
    Rng nrng = make_rng(seed, 2);
    const auto noisy = add_noise(gen.train, s, nrng);
    FitOptions opts;
    opts.threshold.sigma = s;
    const EmbeddingModel model = fit(noisy, 75, opts);
    for (Index i = 0; i < model.eigenvalues.size(); ++i)
      rows.push_back({csv_num(s), "reconstructed", std::to_string(i),
                      csv_num(model.eigenvalues(i).real()),
                      csv_num(model.eigenvalues(i).imag())});
  }
  Rng grng = make_rng(seed, 0);
  const GkslGenerator g = random_gksl(2, d_env, spec.a_unit, spec.a_diss, grng);
  Eigen::ComplexEigenSolver<Mat> es(propagator(gksl_superoperator(g), 0.2));
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    rows.push_back({"", "channel", std::to_string(i), csv_num(es.eigenvalues()(i).real()),
                    csv_num(es.eigenvalues()(i).imag())});
  write_csv(out_csv, {"sigma", "kind", "index", "re", "im"}, rows);
  std::cout << "wrote " << rows.size() << " rows to " << out_csv << "\n";
  return 0;
}

int run_sweep_fig3d(const std::string& out_csv, const std::string& seeds_csv) {
  const std::vector<Index> d_env_grid{2, 3};
  const std::vector<double> sigma_grid{1e-2, 1e-1};
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_csv);

  struct Cell {
    Index d_env;
    double sigma;
    std::uint64_t seed;
    Index eta = 0;
    double dist_noisy = 0, dist_denoised = 0;
    double runtime_s = 0;
    std::string error;
  };
  std::vector<Cell> cells;
  for (Index de : d_env_grid)
    for (double sigma : sigma_grid)
      for (std::uint64_t seed : seeds) cells.push_back({de, sigma, seed});

  parallel_for(static_cast<Index>(cells.size()), [&](Index i) {
    Cell& cell = cells[i];
    const Timer timer;
    try {
      ModelSpec spec;
      spec.kind = "finite";
      spec.d_env = cell.d_env;
      const GeneratedData gen = generate_dataset(spec, 4, 200, 0.2, cell.seed);
      Rng nrng = make_rng(cell.seed, 2);
      const auto noisy = add_noise(gen.train, cell.sigma, nrng);
      const HankelSet hs = build_shifted_and_stack(noisy.trajectories, 75);
      Eigen::BDCSVD<Mat> svd(hs.h);
      ThresholdConfig cfg;
      cfg.sigma = cell.sigma;
      cell.eta = optimal_rank(svd.singularValues(), hs.h.rows(), hs.h.cols(), cfg);
      if (cell.eta < 1) throw NoSignalError("no signal above noise threshold");
      const DenoiseResult res = denoise(hs, cell.eta);
      cell.dist_noisy = dist_dataset(noisy.trajectories, gen.train.trajectories);
      cell.dist_denoised = dist_dataset(res.trajectories, gen.train.trajectories);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.runtime_s = timer.seconds();
  });

  std::vector<std::vector<std::string>> rows;
  for (const Cell& c : cells)
    rows.push_back({std::to_string(c.d_env), csv_num(c.sigma), std::to_string(c.seed),
                    std::to_string(c.eta), csv_num(c.dist_noisy), csv_num(c.dist_denoised),
                    c.error.empty() ? (c.dist_denoised < c.dist_noisy ? "1" : "0") : "",
                    csv_num(c.runtime_s), c.error.empty() ? "ok" : c.error});
  write_csv(out_csv,
            {"d_env", "sigma", "seed", "eta", "dist_noisy_clean", "dist_denoised_clean",
             "improved", "runtime_s", "status"},
            rows);
  std::cout << "wrote " << cells.size() << " cells to " << out_csv << "\n";
  return 0;
}

int run_sweep_fig5(const std::string& out_csv, const std::string& seeds_csv) {
  const auto sweep = sweep_spin_boson_gamma({0.05, 0.1, 0.2, 0.4}, {200, 500, 800},
                                            parse_seeds(seeds_csv));
  write_spin_boson_csv(out_csv, sweep);
  std::cout << "wrote " << sweep.cells.size() << " cells to " << out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markovian-embedding reconstruction of non-Markovian quantum dynamics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cgen = app.add_subcommand("generate", "simulate a trajectory dataset");
  cgen->add_option("--model", gen.model, "finite | jc | spin-boson")
      ->check(CLI::IsMember({"finite", "jc", "spin-boson"}))
      ->required();
  cgen->add_option("--d-env", gen.d_env, "finite-environment dimension");
  cgen->add_option("--a-unit", gen.a_unit, "unitary part scale");
  cgen->add_option("--a-diss", gen.a_diss, "dissipative part scale");
  cgen->add_option("--jc-gamma", gen.jc_gamma, "cavity decay rate");
  cgen->add_option("--jc-g", gen.jc_g, "atom-mode coupling");
  cgen->add_option("--jc-alpha-re", gen.jc_alpha_re, "coherent amplitude, real part");
  cgen->add_option("--jc-alpha-im", gen.jc_alpha_im, "coherent amplitude, imag part");
  cgen->add_option("--jc-levels", gen.jc_levels, "mode truncation (0 = automatic)");
  cgen->add_option("--sb-gamma", gen.sb_gamma, "coupling spectrum width");
  cgen->add_option("--sb-g", gen.sb_g, "coupling strength");
  cgen->add_option("--sb-delta", gen.sb_delta, "tunneling amplitude");
  cgen->add_option("--sb-omega0", gen.sb_omega0, "coupling spectrum peak");
  cgen->add_option("--sb-levels", gen.sb_levels, "pseudomode truncation");
  cgen->add_option("--L", gen.L, "training trajectories")->check(CLI::PositiveNumber);
  cgen->add_option("--T", gen.T, "steps per trajectory")->check(CLI::PositiveNumber);
  cgen->add_option("--tau", gen.tau, "time step")->check(CLI::PositiveNumber);
  cgen->add_option("--sigma", gen.sigma, "measurement noise std (default 0)")
      ->check(CLI::NonNegativeNumber);
  cgen->add_option("--seed", gen.seed, "random seed");
  cgen->add_option("--out", gen.out, "noisy training dataset file")->required();
  cgen->add_option("--out-clean", gen.out_clean, "clean twin dataset file");
  cgen->add_option("--out-test", gen.out_test, "held-out test trajectory file");

  FitArgs fit_args;
  CLI::App* cfit = app.add_subcommand("fit", "reconstruct a Markovian embedding");
  cfit->add_option("--data", fit_args.data, "training dataset file")->required();
  cfit->add_option("--K", fit_args.K, "memory depth")->check(CLI::PositiveNumber);
  cfit->add_option("--sigma", fit_args.sigma,
                   "threshold noise std (default: dataset value)");
  cfit->add_flag("--project,!--no-project", fit_args.project,
                 "project predictions onto density matrices");
  cfit->add_option("--out-model", fit_args.out_model, "model file to write");
  cfit->add_option("--report", fit_args.report, "JSON report path");

  PredictArgs pred;
  CLI::App* cpred = app.add_subcommand("predict", "roll a fitted model forward");
  cpred->add_option("--model", pred.model, "model file")->required();
  cpred->add_option("--data", pred.data, "test dataset file")->required();
  cpred->add_option("--horizon", pred.horizon, "steps to predict (default T-K)");
  cpred->add_option("--out-csv", pred.out_csv, "per-step CSV path");
  cpred->add_option("--report", pred.report, "JSON report path");

  DenoiseArgs den;
  CLI::App* cden = app.add_subcommand("denoise", "project a dataset onto its signal rank");
  cden->add_option("--data", den.data, "noisy dataset file")->required();
  cden->add_option("--K", den.K, "memory depth")->check(CLI::PositiveNumber);
  cden->add_option("--sigma", den.sigma, "threshold noise std (default: dataset value)");
  cden->add_option("--eta", den.eta, "rank override (default: threshold rank)");
  cden->add_flag("--project", den.project, "project states onto density matrices");
  cden->add_option("--out", den.out, "denoised dataset file")->required();
  cden->add_option("--report", den.report, "JSON report path");

  SpectrumArgs spec_args;
  CLI::App* cspec = app.add_subcommand("spectrum", "dump model and channel eigenvalues");
  cspec->add_option("--model", spec_args.model, "model file")->required();
  cspec->add_option("--out-csv", spec_args.out_csv, "CSV path")->required();

  CLI::App* csweep = app.add_subcommand("sweep", "grid experiments");
  csweep->require_subcommand(1);
  std::string sweep_out;
  std::string t1_seeds = "1,2,3,4,5";
  std::string f3b_seeds = "1,2,3";
  std::string f3d_seeds = "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20";
  std::string f5_seeds = "1";
  Index fig3c_denv = 2;
  double fig3c_sigma = 1e-2;
  std::uint64_t fig3c_seed = 1;
  CLI::App* ct1 = csweep->add_subcommand(
      "table1", "effective environment dimension over (d_env, sigma, T)");
  CLI::App* c3b = csweep->add_subcommand("fig3b", "prediction error versus memory depth");
  CLI::App* c3c = csweep->add_subcommand("fig3c", "reconstructed versus exact spectrum");
  CLI::App* c3d = csweep->add_subcommand("fig3d", "denoising improvement grid");
  CLI::App* c5 = csweep->add_subcommand("fig5", "spin-boson rank versus gamma and K");
  for (CLI::App* c : {ct1, c3b, c3c, c3d, c5})
    c->add_option("--out-csv", sweep_out, "CSV path")->required();
  ct1->add_option("--seeds", t1_seeds, "comma-separated seed list");
  c3b->add_option("--seeds", f3b_seeds, "comma-separated seed list");
  c3d->add_option("--seeds", f3d_seeds, "comma-separated seed list");
  c5->add_option("--seeds", f5_seeds, "comma-separated seed list");
  c3c->add_option("--d-env", fig3c_denv, "environment dimension");
  c3c->add_option("--sigma", fig3c_sigma, "noisy counterpart level");
  c3c->add_option("--seed", fig3c_seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cgen) return run_generate(gen);
    if (*cfit) return run_fit(fit_args);
    if (*cpred) return run_predict(pred);
    if (*cden) return run_denoise(den);
    if (*cspec) return run_spectrum(spec_args);
    if (*ct1) return run_sweep_table1(sweep_out, t1_seeds);
    if (*c3b) return run_sweep_fig3b(sweep_out, f3b_seeds);
    if (*c3c) return run_sweep_fig3c(sweep_out, fig3c_denv, fig3c_sigma, fig3c_seed);
    if (*c3d) return run_sweep_fig3d(sweep_out, f3d_seeds);
    if (*c5) return run_sweep_fig5(sweep_out, f5_seeds);
  } catch (const NoSignalError& e) {
    std::cerr << "error: no signal above noise threshold (" << e.what() << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
