#include "qme/analysis.hpp"

#include "qme/qcore.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace qme {

double dist_test(const Trajectory& t1, const Trajectory& t2, Index K) {
  const Index T = static_cast<Index>(t1.size());
  if (t2.size() != t1.size()) throw std::invalid_argument("dist_test: length mismatch");
  if (T <= K) throw std::invalid_argument("dist_test: need T > K");
  double acc = 0;
  for (Index k = K; k < T; ++k) acc += trace_distance(t1[k], t2[k]);
  return acc / static_cast<double>(T - K);
}

double dist_dataset(const std::vector<Trajectory>& s1, const std::vector<Trajectory>& s2) {
  if (s1.size() != s2.size() || s1.empty())
    throw std::invalid_argument("dist_dataset: trajectory count mismatch");
  double acc = 0;
  Index count = 0;
  for (size_t l = 0; l < s1.size(); ++l) {
    if (s1[l].size() != s2[l].size())
      throw std::invalid_argument("dist_dataset: trajectory length mismatch");
    for (size_t k = 0; k < s1[l].size(); ++k) acc += trace_distance(s1[l][k], s2[l][k]);
    count += static_cast<Index>(s1[l].size());
  }
  return acc / static_cast<double>(count);
}

double dist_dataset(const TrajectoryDataset& s1, const TrajectoryDataset& s2) {
  return dist_dataset(s1.trajectories, s2.trajectories);
}

namespace {

// Shortest-augmenting-path assignment on an n x m cost matrix, n <= m.
// Returns the matched column per row.
std::vector<Index> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const Index n = cost.rows(), m = cost.cols();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<Index> p(m + 1, 0), way(m + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      Index j1 = 0;
      double delta = kInf;
      for (Index j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> row_to_col(n, -1);
  for (Index j = 1; j <= m; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

SpectrumMatch match_spectra(const Vec& recovered, const Vec& reference) {
  SpectrumMatch out;
  const Index nr = recovered.size(), nf = reference.size();
  if (nr == 0 || nf == 0) {
    for (Index i = 0; i < nr; ++i) out.unmatched_recovered.push_back(i);
    for (Index j = 0; j < nf; ++j) out.unmatched_reference.push_back(j);
    return out;
  }

  const bool swapped = nr > nf;  // assignment wants rows <= columns
  const Vec& a = swapped ? reference : recovered;
  const Vec& b = swapped ? recovered : reference;
  Eigen::MatrixXd cost(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) cost(i, j) = std::abs(a(i) - b(j));

  const std::vector<Index> row_to_col = min_cost_assignment(cost);
  std::vector<char> b_used(b.size(), 0);
  for (Index i = 0; i < a.size(); ++i) {
    const Index j = row_to_col[i];
    b_used[j] = 1;
    out.pairs.emplace_back(swapped ? j : i, swapped ? i : j);
    out.pair_distance.push_back(cost(i, j));
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  // keep distances aligned with the sorted pair order
  std::vector<double> dist(out.pairs.size());
  for (size_t k = 0; k < out.pairs.size(); ++k) {
    const Index i = swapped ? out.pairs[k].second : out.pairs[k].first;
    const Index j = swapped ? out.pairs[k].first : out.pairs[k].second;
    dist[k] = cost(i, j);
  }
  out.pair_distance = std::move(dist);

  for (double gap : out.pair_distance) {
    out.max_distance = std::max(out.max_distance, gap);
    out.total_cost += gap;
  }
  out.mean_distance = out.total_cost / static_cast<double>(out.pair_distance.size());
  for (Index j = 0; j < b.size(); ++j)
    if (!b_used[j]) (swapped ? out.unmatched_recovered : out.unmatched_reference).push_back(j);
  return out;
}

void parallel_for(Index n, const std::function<void(Index)>& fn) {
  if (n <= 0) return;
  const Index workers =
      std::min<Index>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (Index w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (Index i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Prediction error against the held-out trajectory: encode the first K noisy
// test states, roll the model forward, compare the tail.
double predict_tail_error(const EmbeddingModel& model, const Trajectory& history_source,
                          const Trajectory& target, Index K) {
  Trajectory history(history_source.begin(), history_source.begin() + K);
  const Trajectory pred =
      predict_trajectory(model, history, static_cast<Index>(target.size()) - K);
  double acc = 0;
  for (size_t k = 0; k < pred.size(); ++k)
    acc += trace_distance(pred[k], target[K + static_cast<Index>(k)]);
  return acc / static_cast<double>(pred.size());
}

}  // namespace

FiniteEnvSweep sweep_finite_env(const std::vector<Index>& d_env_grid,
                                const std::vector<double>& sigma_grid,
                                const std::vector<Index>& t_grid,
                                const std::vector<std::uint64_t>& seeds, Index L,
                                double tau, Index K) {
  if (d_env_grid.empty() || sigma_grid.empty() || t_grid.empty() || seeds.empty())
    throw std::invalid_argument("sweep_finite_env: empty grid");
  FiniteEnvSweep sweep;
  sweep.L = L;
  sweep.tau = tau;
  sweep.K = K;
  for (Index de : d_env_grid)
    for (double sigma : sigma_grid)
      for (Index T : t_grid)
        for (std::uint64_t seed : seeds) {
          FiniteEnvCell cell;
          cell.d_env = de;
          cell.sigma = sigma;
          cell.T = T;
          cell.seed = seed;
          sweep.cells.push_back(cell);
        }

  parallel_for(static_cast<Index>(sweep.cells.size()), [&](Index idx) {
    FiniteEnvCell& cell = sweep.cells[idx];
    const Timer timer;
    try {
      ModelSpec spec;
      spec.kind = "finite";
      spec.d_env = cell.d_env;
      const auto gen = generate_dataset(spec, sweep.L, cell.T, sweep.tau, cell.seed);
      Rng nrng = make_rng(cell.seed, 2);
      const auto noisy = add_noise(gen.train, cell.sigma, nrng);
      const Trajectory noisy_test = add_noise(gen.test, cell.sigma, nrng);

      FitOptions opts;
      opts.threshold.sigma = cell.sigma;
      const EmbeddingModel model = fit(noisy, sweep.K, opts);
      cell.r = model.r;
      cell.d_env_eff = effective_env_dim(model.r, 2);
      cell.natural = natural_rank(2, cell.d_env);

      Rng grng = make_rng(cell.seed, 0);
      const GkslGenerator g = random_gksl(2, cell.d_env, spec.a_unit, spec.a_diss, grng);
      Eigen::ComplexEigenSolver<Mat> es(propagator(gksl_superoperator(g), sweep.tau));
      const SpectrumMatch match = match_spectra(model.eigenvalues, es.eigenvalues());
      cell.spectrum_max = match.max_distance;
      cell.spectrum_mean = match.mean_distance;
      cell.unmatched_ref = static_cast<Index>(match.unmatched_reference.size());

      cell.d_pred_clean = predict_tail_error(model, noisy_test, gen.test, sweep.K);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.runtime_s = timer.seconds();
  });
  return sweep;
}

MemoryDepthSweep sweep_memory_depth(Index d_env, const std::vector<Index>& k_grid,
                                    const std::vector<double>& sigma_grid,
                                    const std::vector<std::uint64_t>& seeds, Index L,
                                    Index T, double tau) {
  if (k_grid.empty() || sigma_grid.empty() || seeds.empty())
    throw std::invalid_argument("sweep_memory_depth: empty grid");
  MemoryDepthSweep sweep;
  sweep.d_env = d_env;
  sweep.L = L;
  sweep.T = T;
  sweep.tau = tau;
  for (Index K : k_grid)
    for (double sigma : sigma_grid)
      for (std::uint64_t seed : seeds) {
        MemoryDepthCell cell;
        cell.K = K;
        cell.sigma = sigma;
        cell.seed = seed;
        sweep.cells.push_back(cell);
      }

  parallel_for(static_cast<Index>(sweep.cells.size()), [&](Index idx) {
    MemoryDepthCell& cell = sweep.cells[idx];
    const Timer timer;
    try {
      ModelSpec spec;
      spec.kind = "finite";
      spec.d_env = sweep.d_env;
      const auto gen = generate_dataset(spec, sweep.L, sweep.T, sweep.tau, cell.seed);
      Rng nrng = make_rng(cell.seed, 2);
      const auto noisy = add_noise(gen.train, cell.sigma, nrng);
      const Trajectory noisy_test = add_noise(gen.test, cell.sigma, nrng);

      FitOptions opts;
      opts.threshold.sigma = cell.sigma;
      const EmbeddingModel model = fit(noisy, cell.K, opts);
      cell.r = model.r;
      cell.d_pred_clean = predict_tail_error(model, noisy_test, gen.test, cell.K);
      cell.d_pred_noisy = predict_tail_error(model, noisy_test, noisy_test, cell.K);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.runtime_s = timer.seconds();
  });
  return sweep;
}

SpinBosonSweep sweep_spin_boson_gamma(const std::vector<double>& gamma_grid,
                                      const std::vector<Index>& k_grid,
                                      const std::vector<std::uint64_t>& seeds, Index L,
                                      Index T, double tau, double sigma_threshold) {
  if (gamma_grid.empty() || k_grid.empty() || seeds.empty())
    throw std::invalid_argument("sweep_spin_boson_gamma: empty grid");
  SpinBosonSweep sweep;
  sweep.L = L;
  sweep.T = T;
  sweep.tau = tau;
  sweep.sigma_threshold = sigma_threshold;
  for (double gamma : gamma_grid)
    for (Index K : k_grid)
      for (std::uint64_t seed : seeds) {
        SpinBosonCell cell;
        cell.gamma = gamma;
        cell.K = K;
        cell.seed = seed;
        sweep.cells.push_back(cell);
      }

  parallel_for(static_cast<Index>(sweep.cells.size()), [&](Index idx) {
    SpinBosonCell& cell = sweep.cells[idx];
    const Timer timer;
    try {
      ModelSpec spec;
      spec.kind = "spin_boson";
      spec.sb.gamma = cell.gamma;
      const auto gen = generate_dataset(spec, sweep.L, sweep.T, sweep.tau, cell.seed);

      FitOptions opts;
      opts.threshold.sigma = sweep.sigma_threshold;
      const EmbeddingModel model = fit(gen.train, cell.K, opts);
      cell.r = model.r;
      cell.d_pred_clean = predict_tail_error(model, gen.test, gen.test, cell.K);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.runtime_s = timer.seconds();
  });
  return sweep;
}

}  // namespace qme
