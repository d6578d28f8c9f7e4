#pragma once

#include "qme/qcore.hpp"

namespace qme {

Mat kron(const Mat& a, const Mat& b);

// n^2 - 1 traceless Hermitian matrices with tr(F_i F_j) = delta_ij.
std::vector<Mat> gellmann_basis(Index n);

struct GkslGenerator {
  Index d = 2;
  Index d_env = 2;
  double a_unit = 1.0;
  double a_diss = 0.1;
  Mat hamiltonian;  // (d d_env) x (d d_env), Hermitian
  Mat gamma;        // (n^2 - 1) x (n^2 - 1) PSD, n = d d_env
};

// H = (A + A^dag)/2 with A standard complex Ginibre; gamma = B B^dag / (n^2 - 1)^2
// from a fresh Ginibre B of side n^2 - 1.
GkslGenerator random_gksl(Index d, Index d_env, double a_unit, double a_diss, Rng& rng);

// Generator matrix acting on row-major vectorized joint states:
//   -i a_unit (H (x) I - I (x) H^T)
//   + a_diss sum_ij gamma_ij (F_i (x) conj(F_j) - 1/2 {F_j^dag F_i, .}).
Mat gksl_superoperator(const GkslGenerator& gen);

// Plain Lindblad form with explicit collapse operators, unit rates.
Mat lindblad_superoperator(const Mat& h, const std::vector<Mat>& collapse);

Mat propagator(const Mat& l_vec, double tau);

// Unique fixed point of the generator, validated as a density matrix.
// Throws DegenerateStationaryError when the kernel is not one-dimensional
// (more than one eigenvalue inside |lambda| < 1e-9). d_total < 0 infers the
// dimension from the matrix side.
Mat stationary_state(const Mat& l_vec, Index d_total = -1);

// T reduced system states from stepping the vectorized joint state with a
// fixed one-step propagator phi.
Trajectory simulate_joint(const Mat& phi, const Mat& joint0, Index d, Index d_env, Index T);

// T reduced system states: joint state |psi><psi| (x) Tr_S[stationary],
// stepped T-1 times by exp(tau L).
Trajectory simulate_finite_env(const GkslGenerator& gen, const Vec& psi, Index T, double tau);

struct JcConfig {
  double gamma = 0.05;   // cavity decay rate
  double g = 2.5;        // atom-mode coupling
  Cplx alpha = Cplx(1.1, 0.0);
  Index n_levels = 0;    // 0 selects truncation_level(alpha, 0.95)
};

// Smallest n with cumulative Poisson(|alpha|^2) mass over k < n at least `mass`.
Index truncation_level(Cplx alpha, double mass);

// Truncated coherent state, renormalized after truncation.
Vec coherent_state(Cplx alpha, Index n_levels);

Index jc_levels(const JcConfig& cfg);

// Atom (x) mode, H = a^dag a + sigma_z/2 + (g/2)(sigma_+ a + sigma_- a^dag),
// collapse sqrt(gamma) a.
Mat jc_superoperator(const JcConfig& cfg);

// Initial state |psi><psi| (x) |alpha><alpha|.
Trajectory simulate_jc(const JcConfig& cfg, const Vec& psi, Index T, double tau);

struct SpinBosonConfig {
  double gamma = 0.05;   // spectral width
  double g = 0.5;        // aggregated coupling
  double delta = 0.5;    // tunneling matrix element
  double omega0 = 1.0;   // resonance frequency
  Index n_levels = 8;    // pseudomode truncation
};

// Bath correlation C(t) = int_0^inf J(w)/pi e^{-iwt} dw for the Lorentzian-type
// spectral density J(w) = gamma g^2 w / ((w^2 - omega0)^2 + gamma^2 w^2).
Cplx spin_boson_correlation(const SpinBosonConfig& cfg, double t);

// Atom (x) damped pseudomode replacing the continuum bath:
// H = sigma_z/2 + Delta sigma_x/2 + Omega a^dag a + lambda sigma_z (a + a^dag),
// Omega = sqrt(omega0^2 - gamma^2/4), lambda^2 = C(0), collapse sqrt(gamma) a.
// Requires the underdamped regime omega0 > gamma/2.
Mat spin_boson_pseudomode(const SpinBosonConfig& cfg);

// Initial state |psi><psi| (x) |vac><vac|.
Trajectory simulate_spin_boson(const SpinBosonConfig& cfg, const Vec& psi, Index T, double tau);

// Model description carried in dataset metadata; sufficient to regenerate.
struct ModelSpec {
  std::string kind = "finite";  // "finite" | "jc" | "spin_boson"
  Index d = 2;
  Index d_env = 2;
  double a_unit = 1.0;
  double a_diss = 0.1;
  JcConfig jc;
  SpinBosonConfig sb;
};

struct TrajectoryDataset {
  Index d = 0;
  double tau = 0.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  ModelSpec model;
  std::vector<Trajectory> trajectories;  // L training trajectories
};

struct GeneratedData {
  TrajectoryDataset train;  // L clean trajectories
  Trajectory test;          // one held-out clean trajectory, same model and length
};

// L + 1 clean trajectories from one generator with a fresh Haar-random initial
// system state each; the last draw becomes the held-out test trajectory. The
// propagator is built once per dataset. The generator draw uses stream 0 of
// `seed`, initial states stream 1, so the generator can be replayed on its own.
GeneratedData generate_dataset(const ModelSpec& model, Index L, Index T, double tau,
                               std::uint64_t seed);

// i.i.d. Gaussian perturbation of strength sigma on the real and the imaginary
// part of every matrix entry, diagonals included. sigma = 0 returns an exact copy.
Trajectory add_noise(const Trajectory& traj, double sigma, Rng& rng);
TrajectoryDataset add_noise(const TrajectoryDataset& ds, double sigma, Rng& rng);

}  // namespace qme
