#include "qme/models.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace qme {

Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b); }

std::vector<Mat> gellmann_basis(Index n) {
  if (n < 2) throw std::invalid_argument("gellmann_basis: n must be at least 2");
  std::vector<Mat> basis;
  basis.reserve(n * n - 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < n; ++j) {
    for (Index k = j + 1; k < n; ++k) {
      Mat x = Mat::Zero(n, n);
      x(j, k) = inv_sqrt2;
      x(k, j) = inv_sqrt2;
      basis.push_back(x);
      Mat y = Mat::Zero(n, n);
      y(j, k) = Cplx(0, -inv_sqrt2);
      y(k, j) = Cplx(0, inv_sqrt2);
      basis.push_back(y);
    }
  }
  for (Index l = 1; l < n; ++l) {
    Mat z = Mat::Zero(n, n);
    const double w = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Index m = 0; m < l; ++m) z(m, m) = w;
    z(l, l) = -static_cast<double>(l) * w;
    basis.push_back(z);
  }
  return basis;
}

static Mat ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> g;
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Cplx(g(rng), g(rng));
  return m;
}

GkslGenerator random_gksl(Index d, Index d_env, double a_unit, double a_diss, Rng& rng) {
  if (d < 2 || d_env < 1) throw std::invalid_argument("random_gksl: bad dimensions");
  const Index n = d * d_env;
  GkslGenerator gen;
  gen.d = d;
  gen.d_env = d_env;
  gen.a_unit = a_unit;
  gen.a_diss = a_diss;
  Mat a = ginibre(n, n, rng);
  gen.hamiltonian = 0.5 * (a + a.adjoint());
  Mat b = ginibre(n * n - 1, n * n - 1, rng);
  const double m = static_cast<double>(n * n - 1);
  // 1/m^2 keeps the dissipative rates of order a_diss/n, so memory effects
  // stay resolvable over the sampled window at every environment dimension.
  gen.gamma = b * b.adjoint() / (m * m);
  return gen;
}

Mat lindblad_superoperator(const Mat& h, const std::vector<Mat>& collapse) {
  const Index n = h.rows();
  if (h.cols() != n) throw std::invalid_argument("lindblad_superoperator: H not square");
  const Mat id = Mat::Identity(n, n);
  Mat l = Cplx(0, -1) * (kron(h, id) - kron(id, h.transpose()));
  for (const Mat& c : collapse) {
    if (c.rows() != n || c.cols() != n)
      throw std::invalid_argument("lindblad_superoperator: collapse shape mismatch");
    const Mat cc = c.adjoint() * c;
    l += kron(c, c.conjugate()) - 0.5 * kron(cc, id) - 0.5 * kron(id, cc.transpose());
  }
  return l;
}

Mat gksl_superoperator(const GkslGenerator& gen) {
  const Index n = gen.d * gen.d_env;
  if (gen.hamiltonian.rows() != n || gen.hamiltonian.cols() != n)
    throw std::invalid_argument("gksl_superoperator: Hamiltonian shape mismatch");
  if (gen.gamma.rows() != n * n - 1 || gen.gamma.cols() != n * n - 1)
    throw std::invalid_argument("gksl_superoperator: gamma shape mismatch");

  const Mat id = Mat::Identity(n, n);
  Mat l = Cplx(0, -gen.a_unit) *
          (kron(gen.hamiltonian, id) - kron(id, gen.hamiltonian.transpose()));

  // Regrouped double sum: with G_i = sum_j conj(gamma_ij) F_j the dissipator is
  // sum_i [F_i (x) conj(G_i)] - 1/2 {K, .} where K = sum_i G_i^dag F_i.
  const std::vector<Mat> f = gellmann_basis(n);
  Mat jump = Mat::Zero(n * n, n * n);
  Mat k_sum = Mat::Zero(n, n);
  for (Index i = 0; i < n * n - 1; ++i) {
    Mat g_i = Mat::Zero(n, n);
    for (Index j = 0; j < n * n - 1; ++j) g_i += std::conj(gen.gamma(i, j)) * f[j];
    jump += kron(f[i], g_i.conjugate());
    k_sum += g_i.adjoint() * f[i];
  }
  l += gen.a_diss * (jump - 0.5 * kron(k_sum, id) - 0.5 * kron(id, k_sum.transpose()));
  return l;
}

Mat propagator(const Mat& l_vec, double tau) { return matrix_exponential(tau * l_vec); }

Mat stationary_state(const Mat& l_vec, Index d_total) {
  const Index n2 = l_vec.rows();
  const Index n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n2))));
  if (l_vec.cols() != n2 || n * n != n2)
    throw std::invalid_argument("stationary_state: not a superoperator shape");
  if (d_total >= 0 && d_total != n)
    throw std::invalid_argument("stationary_state: d_total does not match the matrix");

  Eigen::ComplexEigenSolver<Mat> es(l_vec);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("stationary_state: eigendecomposition failed");
  Index imin = 0;
  int null_dim = 0;
  for (Index i = 0; i < n2; ++i) {
    if (std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(imin))) imin = i;
    if (std::abs(es.eigenvalues()(i)) < 1e-9) ++null_dim;
  }
  if (null_dim > 1)
    throw DegenerateStationaryError(
        "stationary_state: " + std::to_string(null_dim) + "-dimensional null space",
        null_dim);

  Mat rho = devectorize(es.eigenvectors().col(imin), n);
  // The eigenvector carries an arbitrary complex phase. For a genuine fixed
  // point rho = c * rho_st with tr(rho_st) = 1, so dividing by the trace both
  // removes the phase and normalizes; hermitizing afterwards only cleans dust.
  const Cplx tr = rho.trace();
  if (std::abs(tr) < 1e-12 * rho.norm())
    throw DegenerateStationaryError("stationary_state: traceless null vector", 1);
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint());
  const DensityCheck c = check_density(rho);
  if (c.min_eig < -kStateTol)
    throw std::runtime_error("stationary_state: fixed point is not PSD, min eigenvalue " +
                             std::to_string(c.min_eig));
  return rho;
}

Trajectory simulate_joint(const Mat& phi, const Mat& joint0, Index d, Index d_env,
                          Index T) {
  if (T < 1) throw std::invalid_argument("simulate: T must be positive");
  Trajectory out;
  out.reserve(T);
  Vec v = vectorize(joint0);
  out.push_back(partial_trace_env(joint0, d, d_env));
  for (Index k = 1; k < T; ++k) {
    v = phi * v;
    out.push_back(partial_trace_env(devectorize(v, d * d_env), d, d_env));
  }
  return out;
}

static void check_psi(const Vec& psi, Index d, const char* who) {
  if (psi.size() != d) throw std::invalid_argument(std::string(who) + ": psi has wrong length");
  if (std::abs(psi.norm() - 1.0) > 1e-8)
    throw std::invalid_argument(std::string(who) + ": psi is not normalized");
}

Trajectory simulate_finite_env(const GkslGenerator& gen, const Vec& psi, Index T, double tau) {
  check_psi(psi, gen.d, "simulate_finite_env");
  const Mat l = gksl_superoperator(gen);
  const Mat env0 = partial_trace_sys(stationary_state(l), gen.d, gen.d_env);
  const Mat joint0 = kron(Mat(psi * psi.adjoint()), env0);
  return simulate_joint(propagator(l, tau), joint0, gen.d, gen.d_env, T);
}

Index truncation_level(Cplx alpha, double mass) {
  if (!(mass > 0.0) || mass >= 1.0)
    throw std::invalid_argument("truncation_level: mass must lie in (0, 1)");
  const double lam = std::norm(alpha);
  double term = std::exp(-lam);
  double cum = term;
  Index n = 1;
  while (cum < mass && n < 4096) {
    term *= lam / static_cast<double>(n);
    cum += term;
    ++n;
  }
  return n;
}

Vec coherent_state(Cplx alpha, Index n_levels) {
  if (n_levels < 1) throw std::invalid_argument("coherent_state: n_levels must be positive");
  Vec c(n_levels);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (Index k = 1; k < n_levels; ++k)
    c(k) = c(k - 1) * alpha / std::sqrt(static_cast<double>(k));
  return c / c.norm();
}

Index jc_levels(const JcConfig& cfg) {
  return cfg.n_levels > 0 ? cfg.n_levels : truncation_level(cfg.alpha, 0.95);
}

static Mat lowering_operator(Index n) {
  Mat a = Mat::Zero(n, n);
  for (Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

Mat jc_superoperator(const JcConfig& cfg) {
  if (cfg.gamma < 0) throw std::invalid_argument("jc_superoperator: gamma must be >= 0");
  const Index n = jc_levels(cfg);
  const Mat a = lowering_operator(n);
  const Mat id2 = Mat::Identity(2, 2);
  const Mat idn = Mat::Identity(n, n);
  Mat sz = Mat::Zero(2, 2), sp = Mat::Zero(2, 2);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  sp(0, 1) = 1.0;  // (sigma_x + i sigma_y)/2
  const Mat h = kron(id2, Mat(a.adjoint() * a)) + 0.5 * kron(sz, idn) +
                0.5 * cfg.g * (kron(sp, a) + kron(Mat(sp.adjoint()), Mat(a.adjoint())));
  const Mat c = std::sqrt(cfg.gamma) * kron(id2, a);
  return lindblad_superoperator(h, {c});
}

Trajectory simulate_jc(const JcConfig& cfg, const Vec& psi, Index T, double tau) {
  check_psi(psi, 2, "simulate_jc");
  const Index n = jc_levels(cfg);
  const Vec mode = coherent_state(cfg.alpha, n);
  const Mat joint0 = kron(Mat(psi * psi.adjoint()), Mat(mode * mode.adjoint()));
  return simulate_joint(propagator(jc_superoperator(cfg), tau), joint0, 2, n, T);
}

namespace {

// Adaptive Simpson on [a, b] for a complex integrand.
template <class F>
Cplx simpson_rec(const F& f, double a, double b, Cplx fa, Cplx fm, Cplx fb, Cplx whole,
                 double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const Cplx flm = f(lm), frm = f(rm);
  const Cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Cplx delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
Cplx integrate(const F& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const Cplx fa = f(a), fm = f(m), fb = f(b);
  const Cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

double spectral_density(const SpinBosonConfig& cfg, double w) {
  const double num = cfg.gamma * cfg.g * cfg.g * w;
  const double d1 = w * w - cfg.omega0;
  return num / (d1 * d1 + cfg.gamma * cfg.gamma * w * w);
}

}  // namespace

Cplx spin_boson_correlation(const SpinBosonConfig& cfg, double t) {
  // J decays like gamma g^2 / w^3, so the dropped tail beyond the cutoff is
  // below gamma g^2 / (2 pi cutoff^2), under 1e-7 for the parameters in use.
  const double cutoff = std::max(200.0, 50.0 * std::sqrt(std::abs(cfg.omega0)));
  auto f = [&](double w) {
    return spectral_density(cfg, w) / M_PI * std::exp(Cplx(0, -w * t));
  };
  return integrate(f, 0.0, cutoff, 1e-10);
}

Mat spin_boson_pseudomode(const SpinBosonConfig& cfg) {
  if (cfg.omega0 <= 0.5 * cfg.gamma)
    throw std::invalid_argument("spin_boson_pseudomode: overdamped regime omega0 <= gamma/2");
  if (cfg.n_levels < 1)
    throw std::invalid_argument("spin_boson_pseudomode: n_levels must be positive");
  const double omega = std::sqrt(cfg.omega0 * cfg.omega0 - 0.25 * cfg.gamma * cfg.gamma);
  const double lambda = std::sqrt(spin_boson_correlation(cfg, 0.0).real());
  const Index n = cfg.n_levels;
  const Mat a = lowering_operator(n);
  const Mat id2 = Mat::Identity(2, 2);
  const Mat idn = Mat::Identity(n, n);
  Mat sz = Mat::Zero(2, 2), sx = Mat::Zero(2, 2);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  sx(0, 1) = 1.0;
  sx(1, 0) = 1.0;
  const Mat h = 0.5 * kron(sz, idn) + 0.5 * cfg.delta * kron(sx, idn) +
                omega * kron(id2, Mat(a.adjoint() * a)) +
                lambda * kron(sz, Mat(a + a.adjoint()));
  const Mat c = std::sqrt(cfg.gamma) * kron(id2, a);
  return lindblad_superoperator(h, {c});
}

Trajectory simulate_spin_boson(const SpinBosonConfig& cfg, const Vec& psi, Index T,
                               double tau) {
  check_psi(psi, 2, "simulate_spin_boson");
  const Index n = cfg.n_levels;
  Vec vac = Vec::Zero(n);
  vac(0) = 1.0;
  const Mat joint0 = kron(Mat(psi * psi.adjoint()), Mat(vac * vac.adjoint()));
  return simulate_joint(propagator(spin_boson_pseudomode(cfg), tau), joint0, 2, n, T);
}

GeneratedData generate_dataset(const ModelSpec& model, Index L, Index T, double tau,
                               std::uint64_t seed) {
  if (L < 1 || T < 2) throw std::invalid_argument("generate_dataset: need L >= 1, T >= 2");
  if (!(tau > 0)) throw std::invalid_argument("generate_dataset: tau must be positive");

  TrajectoryDataset ds;
  ds.tau = tau;
  ds.seed = seed;
  ds.model = model;

  Mat phi, env0;
  Index d = 0, d_env = 0;
  if (model.kind == "finite") {
    Rng rng_gen = make_rng(seed, 0);
    const GkslGenerator gen =
        random_gksl(model.d, model.d_env, model.a_unit, model.a_diss, rng_gen);
    const Mat l = gksl_superoperator(gen);
    env0 = partial_trace_sys(stationary_state(l), gen.d, gen.d_env);
    phi = propagator(l, tau);
    d = gen.d;
    d_env = gen.d_env;
  } else if (model.kind == "jc") {
    d = 2;
    d_env = jc_levels(model.jc);
    const Vec mode = coherent_state(model.jc.alpha, d_env);
    env0 = mode * mode.adjoint();
    phi = propagator(jc_superoperator(model.jc), tau);
  } else if (model.kind == "spin_boson") {
    d = 2;
    d_env = model.sb.n_levels;
    Vec vac = Vec::Zero(d_env);
    vac(0) = 1.0;
    env0 = vac * vac.adjoint();
    phi = propagator(spin_boson_pseudomode(model.sb), tau);
  } else {
    throw std::invalid_argument("generate_dataset: unknown model kind '" + model.kind + "'");
  }

  ds.d = d;
  Rng rng_init = make_rng(seed, 1);
  ds.trajectories.reserve(L);
  GeneratedData out;
  for (Index i = 0; i <= L; ++i) {
    const Vec psi = sample_pure_state(d, rng_init);
    const Mat joint0 = kron(Mat(psi * psi.adjoint()), env0);
    Trajectory traj = simulate_joint(phi, joint0, d, d_env, T);
    if (i < L)
      ds.trajectories.push_back(std::move(traj));
    else
      out.test = std::move(traj);
  }
  out.train = std::move(ds);
  return out;
}

Trajectory add_noise(const Trajectory& traj, double sigma, Rng& rng) {
  if (sigma < 0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  Trajectory out = traj;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> g;
  for (auto& rho : out)
    for (Index i = 0; i < rho.rows(); ++i)
      for (Index j = 0; j < rho.cols(); ++j)
        rho(i, j) += Cplx(sigma * g(rng), sigma * g(rng));
  return out;
}

TrajectoryDataset add_noise(const TrajectoryDataset& ds, double sigma, Rng& rng) {
  if (sigma < 0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  TrajectoryDataset out = ds;
  out.noise_sigma = sigma;
  if (sigma == 0.0) return out;
  for (auto& traj : out.trajectories) traj = add_noise(traj, sigma, rng);
  return out;
}

}  // namespace qme
