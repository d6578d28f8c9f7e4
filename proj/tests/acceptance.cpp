// End-to-end acceptance checks, one summary line per criterion. Exit status
// is nonzero when any criterion fails, so CI can gate on this binary alone.

#include "qme/analysis.hpp"
#include "qme/embedding.hpp"
#include "qme/io.hpp"
#include "qme/models.hpp"
#include "qme/qcore.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace qme;

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %02d %s%s%s\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

template <typename Fn>
void criterion(int idx, const std::string& name, Fn fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(idx, name, false, std::string("exception: ") + e.what());
  }
}

std::vector<std::uint64_t> seed_range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

const FiniteEnvCell* find_cell(const FiniteEnvSweep& sweep, Index d_env, double sigma,
                               Index T, std::uint64_t seed) {
  for (const auto& c : sweep.cells)
    if (c.d_env == d_env && c.sigma == sigma && c.T == T && c.seed == seed) return &c;
  return nullptr;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Mat random_density(Index d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = Cplx(gauss(rng), gauss(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// (d_env, sigma, T) -> expected majority of the effective environment
// dimension, on the acceptance slice of the reconstruction grid.
struct GridExpectation {
  Index d_env;
  double sigma;
  Index T;
  Index expected;
};

// --- criteria 1-4: one shared reconstruction sweep -------------------------

FiniteEnvSweep g_recon;    // d_env in {2,3,4}, sigma in {0, 1e-3, 1e-2}, T in {150,200}
FiniteEnvSweep g_recon56;  // d_env in {5,6} at sigma = 1e-3, T = 200

void run_reconstruction_sweeps() {
  const auto seeds = seed_range(1, 5);
  g_recon = sweep_finite_env({2, 3, 4}, {0.0, 1e-3, 1e-2}, {150, 200}, seeds);
  g_recon56 = sweep_finite_env({5, 6}, {1e-3}, {200}, seeds);
}

void criterion_effective_dimension() {
  std::vector<GridExpectation> grid;
  for (Index de : {2, 3, 4})
    for (double sg : {1e-3, 1e-2})
      for (Index t : {150, 200}) grid.push_back({de, sg, t, de});
  grid.push_back({5, 1e-3, 200, 5});
  grid.push_back({6, 1e-3, 200, 6});

  int ok_cells = 0;
  std::string first_bad;
  for (const auto& g : grid) {
    const FiniteEnvSweep& src = g.d_env >= 5 ? g_recon56 : g_recon;
    int votes = 0, present = 0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const FiniteEnvCell* c = find_cell(src, g.d_env, g.sigma, g.T, s);
      if (!c || !c->error.empty()) continue;
      ++present;
      if (c->d_env_eff == g.expected) ++votes;
    }
    if (present == 5 && votes >= 3) {
      ++ok_cells;
    } else if (first_bad.empty()) {
      std::ostringstream os;
      os << "d_env=" << g.d_env << " sigma=" << g.sigma << " T=" << g.T << " votes "
         << votes << "/" << present;
      first_bad = os.str();
    }
  }
  report(1, "effective environment dimension by majority over seeds",
         ok_cells == static_cast<int>(grid.size()),
         std::to_string(ok_cells) + "/" + std::to_string(grid.size()) +
             " grid cells" + (first_bad.empty() ? "" : ", first miss " + first_bad));
}

void criterion_spectrum(int idx, double sigma, double bound, const std::string& name) {
  double worst = 0.0;
  int cells = 0;
  bool clean = true;
  for (Index de : {2, 3}) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const FiniteEnvCell* c = find_cell(g_recon, de, sigma, 200, s);
      if (!c || !c->error.empty()) {
        clean = false;
        continue;
      }
      ++cells;
      worst = std::max(worst, c->spectrum_max);
    }
  }
  report(idx, name, clean && cells == 10 && worst < bound,
         "max matched distance " + fmt(worst) + " over " + std::to_string(cells) +
             " fits, bound " + fmt(bound));
}

void criterion_rank_bound() {
  const auto seeds = seed_range(1, 20);
  FiniteEnvSweep sweep = sweep_finite_env({2, 3, 4, 5, 6}, {0.0}, {200}, seeds);
  int ok = 0, total = 0;
  Index worst_r = 0, worst_nat = 0;
  for (const auto& c : sweep.cells) {
    ++total;
    if (c.error.empty() && c.r <= c.natural) {
      ++ok;
    } else if (worst_nat == 0) {
      worst_r = c.r;
      worst_nat = c.natural;
    }
  }
  report(4, "embedding rank never exceeds the joint vectorized dimension", ok == total,
         std::to_string(ok) + "/" + std::to_string(total) + " noiseless fits" +
             (ok == total ? ""
                          : ", first violation r=" + std::to_string(worst_r) + " > " +
                                std::to_string(worst_nat)));
}

// --- criterion 5: denoising ------------------------------------------------

void criterion_denoising() {
  int cells_ok = 0, cell_count = 0;
  std::string detail;
  for (Index de : {2, 3}) {
    for (double sigma : {1e-2, 1e-1}) {
      int improved = 0;
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ModelSpec spec;
        spec.d_env = de;
        GeneratedData gen = generate_dataset(spec, 4, 200, 0.2, seed);
        Rng noise = make_rng(seed, 2);
        TrajectoryDataset noisy = add_noise(gen.train, sigma, noise);
        HankelSet hs = build_shifted_and_stack(noisy.trajectories, 75);
        Eigen::BDCSVD<Mat> svd(hs.h, Eigen::ComputeThinU | Eigen::ComputeThinV);
        ThresholdConfig cfg;
        cfg.sigma = sigma;
        Index eta = optimal_rank(svd.singularValues(), hs.h.rows(), hs.h.cols(), cfg);
        if (eta < 1) continue;
        DenoiseResult den = denoise(hs, eta);
        const double before = dist_dataset(noisy.trajectories, gen.train.trajectories);
        const double after = dist_dataset(den.trajectories, gen.train.trajectories);
        if (after < before) ++improved;
      }
      ++cell_count;
      if (improved >= 18) ++cells_ok;
      detail += (detail.empty() ? "" : ", ") + std::to_string(improved) + "/20";
    }
  }
  report(5, "rank-truncated denoising moves data toward the clean trajectories",
         cells_ok == cell_count, detail + " improved (need >= 18 each)");
}

// --- criteria 6 and 10a: prediction saturation in the window length --------

MemoryDepthSweep g_depth;

void criterion_prediction_saturation() {
  g_depth = sweep_memory_depth(3, {5, 75}, {0.0, 1e-3, 1e-2}, seed_range(1, 10));
  std::map<std::pair<double, std::uint64_t>, std::pair<double, double>> by_run;
  bool complete = true;
  for (const auto& c : g_depth.cells) {
    if (!c.error.empty()) {
      complete = false;
      continue;
    }
    auto& slot = by_run[{c.sigma, c.seed}];
    if (c.K == 5) slot.first = c.d_pred_clean;
    if (c.K == 75) slot.second = c.d_pred_clean;
  }
  int ok = 0;
  for (const auto& [key, v] : by_run)
    if (v.second <= v.first) ++ok;
  report(6, "longer history windows never hurt held-out prediction",
         complete && ok == static_cast<int>(by_run.size()) && by_run.size() == 30,
         std::to_string(ok) + "/" + std::to_string(by_run.size()) +
             " (sigma, seed) runs with error(K=75) <= error(K=5)");
}

// --- criterion 7: lossy-cavity embedding stays compact ----------------------

void criterion_cavity_compactness() {
  ModelSpec spec;
  spec.kind = "jc";
  const Index levels = jc_levels(spec.jc);
  const Index bound = (2 * levels) * (2 * levels);
  Index worst = 0;
  int ok = 0, total = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    GeneratedData gen = generate_dataset(spec, 2, 1000, 0.03, seed);
    for (double sigma : {0.0, 1e-3, 1e-2}) {
      TrajectoryDataset data = gen.train;
      if (sigma > 0) {
        Rng noise = make_rng(seed, 2);
        data = add_noise(gen.train, sigma, noise);
      }
      FitOptions opts;
      opts.threshold.sigma = sigma;
      EmbeddingModel model = fit(data.trajectories, 100, opts);
      ++total;
      worst = std::max(worst, model.r);
      if (model.r < bound) ++ok;
    }
  }
  report(7, "atom-cavity data embeds below the truncated joint dimension", ok == total,
         "max r " + std::to_string(worst) + " < " + std::to_string(bound) + " in " +
             std::to_string(ok) + "/" + std::to_string(total) + " fits");
}

// --- criteria 8 and 10b: spin-boson rank vs coupling width ------------------

SpinBosonSweep g_sb;

void criterion_spin_boson() {
  g_sb = sweep_spin_boson_gamma({0.05, 0.1, 0.2, 0.4}, {500}, {1});
  SpinBosonSweep tail = sweep_spin_boson_gamma({0.4}, {800}, {1});

  std::map<double, Index> r_at_500;
  bool clean = true;
  for (const auto& c : g_sb.cells) {
    if (!c.error.empty()) clean = false;
    r_at_500[c.gamma] = c.r;
  }
  Index r_800 = -1;
  for (const auto& c : tail.cells) {
    if (!c.error.empty()) clean = false;
    r_800 = c.r;
  }
  bool monotone = true;
  std::string ranks;
  Index prev = -1;
  for (double g : {0.05, 0.1, 0.2, 0.4}) {
    const Index r = r_at_500.count(g) ? r_at_500[g] : -1;
    if (prev >= 0 && r > prev) monotone = false;
    prev = r;
    ranks += (ranks.empty() ? "" : ",") + std::to_string(r);
  }
  const bool saturated = r_at_500.count(0.4) && r_at_500[0.4] == r_800;
  report(8, "spin-boson rank falls with the coupling width and saturates in K",
         clean && monotone && saturated,
         "r(K=500)=[" + ranks + "], r(gamma=0.4,K=800)=" + std::to_string(r_800));
  for (const auto& c : tail.cells) g_sb.cells.push_back(c);
}

// --- criterion 9: algebraic property suite -----------------------------------

void criterion_properties() {
  int ok = 0, total = 0;
  std::string bad;
  auto check = [&](bool cond, const char* label) {
    ++total;
    if (cond) {
      ++ok;
    } else if (bad.empty()) {
      bad = label;
    }
  };

  // encoder * decoder = identity on a real reconstruction
  {
    ModelSpec spec;
    GeneratedData gen = generate_dataset(spec, 4, 200, 0.2, 1);
    EmbeddingModel m = fit(gen.train.trajectories, 75);
    Mat ed = m.encoder * m.decoder;
    check((ed - Mat::Identity(m.r, m.r)).cwiseAbs().maxCoeff() < 1e-8,
          "encoder*decoder=I");
  }

  // vectorize/devectorize roundtrip
  {
    Rng rng(7);
    Mat rho = random_density(3, rng);
    check((devectorize(vectorize(rho), 3) - rho).cwiseAbs().maxCoeff() == 0.0,
          "vec roundtrip");
  }

  // channel is trace preserving and completely positive for joint dim <= 6
  for (Index de : {2, 3}) {
    Rng rng = make_rng(11, 0);
    GkslGenerator gen = random_gksl(2, de, 1.0, 0.1, rng);
    Mat phi = propagator(gksl_superoperator(gen), 0.2);
    const Index n = 2 * de;
    Vec tr_vec = vectorize(Mat::Identity(n, n));
    check((tr_vec.adjoint() * phi - tr_vec.adjoint()).cwiseAbs().maxCoeff() < 1e-10,
          "trace preservation");
    Mat choi = Mat::Zero(n * n, n * n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        Mat e = Mat::Zero(n, n);
        e(i, j) = 1.0;
        choi.block(i * n, j * n, n, n) = devectorize(phi * vectorize(e), n);
      }
    check((choi - choi.adjoint()).cwiseAbs().maxCoeff() < 1e-10, "choi hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(choi);
    check(es.eigenvalues().minCoeff() > -1e-10, "choi psd");
  }

  // two half steps compose into one full step
  {
    Rng rng = make_rng(3, 0);
    GkslGenerator gen = random_gksl(2, 2, 1.0, 0.1, rng);
    Mat l = gksl_superoperator(gen);
    Mat half = propagator(l, 0.2);
    check((half * half - propagator(l, 0.4)).cwiseAbs().maxCoeff() < 1e-8,
          "semigroup composition");
  }

  // exact contraction oracle: spectrum {1, p, p, p} recovered to 1e-8
  {
    const double p = 0.9;
    Mat m_map = p * Mat::Identity(4, 4);
    Vec half_id = vectorize(0.5 * Mat::Identity(2, 2));
    Vec tr_row = Vec::Zero(4);
    tr_row(0) = tr_row(3) = 1.0;
    m_map += (1.0 - p) * half_id * tr_row.transpose();
    Rng rng(13);
    std::vector<Trajectory> trajs;
    for (int l = 0; l < 4; ++l) {
      Trajectory t{random_density(2, rng)};
      for (int k = 1; k < 30; ++k)
        t.push_back(devectorize(m_map * vectorize(t.back()), 2));
      trajs.push_back(std::move(t));
    }
    EmbeddingModel model = fit(trajs, 1);
    Vec expected(4);
    expected << Cplx(1.0), Cplx(p), Cplx(p), Cplx(p);
    SpectrumMatch match = match_spectra(model.eigenvalues, expected);
    check(model.r == 4 && match.max_distance < 1e-8, "contraction oracle");
  }

  // aspect-ratio factor at beta = 1
  check(std::abs(threshold_coefficient(1.0) - 4.0 / std::sqrt(3.0)) < 1e-12,
        "threshold f(1)");

  // single-pseudomode correlation approximates the integrated bath correlation
  {
    const SpinBosonConfig cfg;
    const double omega =
        std::sqrt(cfg.omega0 * cfg.omega0 - 0.25 * cfg.gamma * cfg.gamma);
    const double lam2 = spin_boson_correlation(cfg, 0.0).real();
    double num = 0, den = 0;
    for (int i = 0; i <= 200; ++i) {
      const double t = 20.0 * i / 200.0;
      const Cplx exact = spin_boson_correlation(cfg, t);
      const Cplx pm = lam2 * std::exp(Cplx(-0.5 * cfg.gamma * t, -omega * t));
      num += std::norm(pm - exact);
      den += std::norm(exact);
    }
    check(std::sqrt(num / den) < 0.05, "pseudomode correlation");
  }

  report(9, "algebraic property suite", ok == total,
         std::to_string(ok) + "/" + std::to_string(total) + " properties" +
             (bad.empty() ? "" : ", first failure: " + bad));
}

// --- criterion 10: CSV emission of the sweep grids ---------------------------

bool csv_is_rectangular(const std::string& path, std::size_t expected_rows) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  std::size_t rows = 0, header_commas = 0;
  while (std::getline(in, line)) {
    const std::size_t commas =
        static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (rows == 0)
      header_commas = commas;
    else if (commas != header_commas)
      return false;
    ++rows;
  }
  return rows == expected_rows + 1 && header_commas > 0;
}

void criterion_csv_emission() {
  const std::string depth_path = "acceptance_memory_depth.csv";
  const std::string sb_path = "acceptance_spin_boson.csv";
  write_memory_depth_csv(depth_path, g_depth);
  write_spin_boson_csv(sb_path, g_sb);
  const bool depth_ok = csv_is_rectangular(depth_path, g_depth.cells.size());
  const bool sb_ok = csv_is_rectangular(sb_path, g_sb.cells.size());
  report(10, "sweep grids export as rectangular CSV", depth_ok && sb_ok,
         depth_path + " (" + std::to_string(g_depth.cells.size()) + " rows), " +
             sb_path + " (" + std::to_string(g_sb.cells.size()) + " rows)");
}

}  // namespace

int main() {
  run_reconstruction_sweeps();
  criterion(1, "effective environment dimension", [] { criterion_effective_dimension(); });
  criterion(2, "noiseless spectrum recovery", [] {
    criterion_spectrum(2, 0.0, 1e-6, "noiseless fits land on the exact channel spectrum");
  });
  criterion(3, "noisy spectrum recovery", [] {
    criterion_spectrum(3, 1e-2, 5e-2, "noisy fits stay close to the exact channel spectrum");
  });
  criterion(4, "rank bound", [] { criterion_rank_bound(); });
  criterion(5, "denoising", [] { criterion_denoising(); });
  criterion(6, "prediction saturation", [] { criterion_prediction_saturation(); });
  criterion(7, "cavity compactness", [] { criterion_cavity_compactness(); });
  criterion(8, "spin-boson monotonicity", [] { criterion_spin_boson(); });
  criterion(9, "property suite", [] { criterion_properties(); });
  criterion(10, "csv emission", [] { criterion_csv_emission(); });

  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
