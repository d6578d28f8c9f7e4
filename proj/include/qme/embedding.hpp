#pragma once

#include "qme/models.hpp"
#include "qme/types.hpp"

#include <utility>
#include <vector>

namespace qme {

// Hard-threshold configuration. sigma > 0 selects the noise-calibrated
// threshold; sigma = 0 falls back to floor * (largest singular value).
struct ThresholdConfig {
  double sigma = 0.0;
  double floor = 1e-12;
};

// Stacked delay-embedding matrices over a set of trajectories. Each H column
// is one time window of K consecutive vectorized states, oldest block on top.
// X/Y drop the last/first window per trajectory, so no column pair ever
// straddles a trajectory boundary.
struct HankelSet {
  Index K = 0;
  Index d = 0;
  Mat h;  // (K d^2) x N, N = sum_i (T_i - K + 1)
  Mat x;  // (K d^2) x (N - L)
  Mat y;
  std::vector<Index> traj_of_col;  // trajectory index per H column
  std::vector<Index> traj_cols;    // H columns contributed per trajectory
  std::vector<Index> traj_len;     // T_i
};

// Window matrix of a single trajectory: column j stacks
// vec(rho(j)), ..., vec(rho(j+K-1)) top to bottom, j = 0..T-K.
Mat build_hankel(const Trajectory& traj, Index K);

HankelSet build_shifted_and_stack(const std::vector<Trajectory>& trajs, Index K);

// Aspect-ratio factor f(beta) of the optimal singular-value hard threshold,
// beta = min(m,n)/max(m,n).
double threshold_coefficient(double beta);

// Threshold value: sigma * sqrt(2) * sqrt(max(m,n)) * f(beta), or the
// relative floor when sigma = 0 (`largest` is the top singular value).
double hard_threshold(double largest, Index m, Index n, const ThresholdConfig& cfg);

// Number of singular values >= the threshold (ties kept). `svals` descending.
Index optimal_rank(const RVec& svals, Index m, Index n, const ThresholdConfig& cfg);

struct DenoiseResult {
  Mat h_denoised;
  std::vector<Trajectory> trajectories;
};

// Rank-eta truncation of H plus per-trajectory reassembly: state k is read
// from the first block row while k <= T-K and from the last column beyond
// that. `project` maps each reassembled state to the closest density matrix.
DenoiseResult denoise(const HankelSet& hs, Index eta, bool project = false);

// Reconstructed embedding: s(k+1) = diag(eigenvalues) s(k), window ~ D s(k),
// s(k) = E window. Eigenvalues descend in modulus, ties descend in phase.
struct EmbeddingModel {
  Index r = 0;
  Index K = 0;
  Index d = 0;
  Vec eigenvalues;       // r entries
  Mat decoder;           // (K d^2) x r
  Mat encoder;           // r x (K d^2)
  RVec singular_values;  // full spectrum of H, kept for diagnostics
  ThresholdConfig threshold;
  bool project = false;  // project predictions to density matrices
};

struct FitOptions {
  ThresholdConfig threshold;
  bool project = false;
  // Form the full one-step matrix Y * pinv(X) and eigendecompose it instead
  // of the reduced-space computation. Exact but quadratic in K d^2; kept as a
  // cross-check of the default route.
  bool full_pinv_route = false;
};

EmbeddingModel fit(const std::vector<Trajectory>& trajs, Index K,
                   const FitOptions& opts = {});
EmbeddingModel fit(const TrajectoryDataset& data, Index K, const FitOptions& opts = {});

// One state n >= 1 steps after the newest entry of `history` (exactly K
// states, oldest first).
Mat predict(const EmbeddingModel& model, const Trajectory& history, Index n);

// States n = 1..n_steps, each decoded from diag(eigenvalues)^n applied to the
// one encoded history; the model never re-encodes its own output.
Trajectory predict_trajectory(const EmbeddingModel& model, const Trajectory& history,
                              Index n_steps);

// Throws DegenerateSpectrumError when cond(w) > 1e12; `eigs` only feeds the
// reported cluster.
void check_eigenvector_conditioning(const Mat& w, const Vec& eigs);

// Smallest environment dimension an embedding of rank r admits for a
// d-dimensional system: ceil(sqrt(r)/d).
Index effective_env_dim(Index r, Index d);

// Vectorized joint-dynamics rank d^2 d_env^2, the baseline r is compared to.
Index natural_rank(Index d, Index d_env);

}  // namespace qme
