#pragma once

#include "qme/embedding.hpp"
#include "qme/models.hpp"
#include "qme/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qme {

// Mean trace distance over the tail k = K..T-1 of two equal-length
// trajectories.
double dist_test(const Trajectory& t1, const Trajectory& t2, Index K);

// Mean trace distance over all L*T paired states.
double dist_dataset(const std::vector<Trajectory>& s1, const std::vector<Trajectory>& s2);
double dist_dataset(const TrajectoryDataset& s1, const TrajectoryDataset& s2);

// Minimal-total-distance pairing between two eigenvalue lists (optimal
// bipartite assignment on |a - b|, never greedy). min(size) pairs are formed;
// the rest is reported unmatched.
struct SpectrumMatch {
  std::vector<std::pair<Index, Index>> pairs;  // (recovered index, reference index)
  std::vector<double> pair_distance;
  double max_distance = 0.0;
  double mean_distance = 0.0;
  double total_cost = 0.0;
  std::vector<Index> unmatched_recovered;
  std::vector<Index> unmatched_reference;
};

SpectrumMatch match_spectra(const Vec& recovered, const Vec& reference);

// Runs fn(0..n-1) on a few threads; every index writes only its own slot, so
// results never depend on scheduling.
void parallel_for(Index n, const std::function<void(Index)>& fn);

// One cell of the finite-environment reconstruction sweep. `error` is empty
// on success; a failed cell never aborts the sweep.
struct FiniteEnvCell {
  Index d_env = 0;
  double sigma = 0.0;
  Index T = 0;
  std::uint64_t seed = 0;
  Index r = 0;
  Index d_env_eff = 0;
  Index natural = 0;
  double spectrum_max = 0.0;   // matched distance to the exact channel spectrum
  double spectrum_mean = 0.0;
  Index unmatched_ref = 0;
  double d_pred_clean = 0.0;   // prediction from the noisy test history vs clean test
  double runtime_s = 0.0;
  std::string error;
};

struct FiniteEnvSweep {
  Index L = 4;
  double tau = 0.2;
  Index K = 75;
  std::vector<FiniteEnvCell> cells;
};

// Grid: every (d_env, sigma, T, seed) combination. Per cell: generate clean
// data, add noise (stream 2 of the seed), fit with the matching threshold,
// record rank, effective dimension, spectrum match and prediction error.
FiniteEnvSweep sweep_finite_env(const std::vector<Index>& d_env_grid,
                                const std::vector<double>& sigma_grid,
                                const std::vector<Index>& t_grid,
                                const std::vector<std::uint64_t>& seeds, Index L = 4,
                                double tau = 0.2, Index K = 75);

struct MemoryDepthCell {
  Index K = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  Index r = 0;
  double d_pred_clean = 0.0;
  double d_pred_noisy = 0.0;
  double runtime_s = 0.0;
  std::string error;
};

struct MemoryDepthSweep {
  Index d_env = 3;
  Index L = 4;
  Index T = 200;
  double tau = 0.2;
  std::vector<MemoryDepthCell> cells;
};

// Memory-depth scan at fixed model: the same noisy data (per sigma and seed)
// refit for every K, recording prediction error against the clean and the
// noisy held-out trajectory.
MemoryDepthSweep sweep_memory_depth(Index d_env, const std::vector<Index>& k_grid,
                                    const std::vector<double>& sigma_grid,
                                    const std::vector<std::uint64_t>& seeds, Index L = 4,
                                    Index T = 200, double tau = 0.2);

struct SpinBosonCell {
  double gamma = 0.0;
  Index K = 0;
  std::uint64_t seed = 0;
  Index r = 0;
  double d_pred_clean = 0.0;
  double runtime_s = 0.0;
  std::string error;
};

struct SpinBosonSweep {
  Index L = 4;
  Index T = 1000;
  double tau = 0.15;
  double sigma_threshold = 1e-6;
  std::vector<SpinBosonCell> cells;
};

// Spin-boson memory scan over the coupling-spectrum width gamma: noiseless
// pseudomode data, rank cut at the numerical-error threshold sigma_threshold.
SpinBosonSweep sweep_spin_boson_gamma(const std::vector<double>& gamma_grid,
                                      const std::vector<Index>& k_grid,
                                      const std::vector<std::uint64_t>& seeds, Index L = 4,
                                      Index T = 1000, double tau = 0.15,
                                      double sigma_threshold = 1e-6);

}  // namespace qme
