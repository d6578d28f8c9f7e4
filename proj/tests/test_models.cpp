#include "qme/models.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace qme;
using namespace qme::test;

namespace {

Vec vec_identity(Index n) { return vectorize(Mat::Identity(n, n)); }

// Direct evaluation of the generator action on a state, the literal double sum.
Mat gksl_action(const GkslGenerator& gen, const Mat& rho) {
  const Index n = gen.d * gen.d_env;
  const auto f = gellmann_basis(n);
  const Mat& h = gen.hamiltonian;
  Mat out = Cplx(0, -gen.a_unit) * (h * rho - rho * h);
  for (Index i = 0; i < n * n - 1; ++i)
    for (Index j = 0; j < n * n - 1; ++j) {
      const Cplx w = gen.a_diss * gen.gamma(i, j);
      const Mat fji = f[j].adjoint() * f[i];
      out += w * (f[i] * rho * f[j].adjoint() - 0.5 * (fji * rho + rho * fji));
    }
  return out;
}

// Choi matrix of a superoperator in the row-major vectorization.
Mat choi(const Mat& phi, Index n) {
  Mat c(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k)
      for (Index j = 0; j < n; ++j)
        for (Index l = 0; l < n; ++l) c(i * n + k, j * n + l) = phi(k * n + l, i * n + j);
  return c;
}

double sigma_x(const Mat& rho) { return 2.0 * rho(0, 1).real(); }
double sigma_y(const Mat& rho) { return -2.0 * rho(0, 1).imag(); }

Mat pauli(char which) {
  Mat m = Mat::Zero(2, 2);
  switch (which) {
    case 'x': m(0, 1) = 1; m(1, 0) = 1; break;
    case 'y': m(0, 1) = Cplx(0, -1); m(1, 0) = Cplx(0, 1); break;
    case 'z': m(0, 0) = 1; m(1, 1) = -1; break;
    case '+': m(0, 1) = 1; break;
    case '-': m(1, 0) = 1; break;
  }
  return m;
}

}  // namespace

TEST_CASE("gellmann basis is orthonormal, traceless, Hermitian") {
  for (Index n : {2, 3, 6}) {
    const auto f = gellmann_basis(n);
    REQUIRE(static_cast<Index>(f.size()) == n * n - 1);
    for (size_t i = 0; i < f.size(); ++i) {
      CHECK(std::abs(f[i].trace()) < 1e-14);
      CHECK(max_abs_diff(f[i], f[i].adjoint()) < 1e-14);
      for (size_t j = i; j < f.size(); ++j) {
        const Cplx ip = (f[i].adjoint() * f[j]).trace();
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("random_gksl invariants across seeds and dimensions") {
  for (Index de = 2; de <= 6; ++de) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(derive_seed(seed, de));
      const auto gen = random_gksl(2, de, 1.0, 0.1, rng);
      const Index n = 2 * de;
      REQUIRE(gen.hamiltonian.rows() == n);
      REQUIRE(gen.gamma.rows() == n * n - 1);
      CHECK(max_abs_diff(gen.hamiltonian, gen.hamiltonian.adjoint()) < 1e-14);
      CHECK(max_abs_diff(gen.gamma, gen.gamma.adjoint()) < 1e-14);
      Eigen::SelfAdjointEigenSolver<Mat> es(gen.gamma, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
  }
  Rng r1(5), r2(5);
  const auto g1 = random_gksl(2, 3, 1.0, 0.1, r1);
  const auto g2 = random_gksl(2, 3, 1.0, 0.1, r2);
  CHECK(max_abs_diff(g1.hamiltonian, g2.hamiltonian) == 0.0);
  CHECK(max_abs_diff(g1.gamma, g2.gamma) == 0.0);
}

TEST_CASE("gksl_superoperator matches the literal double-sum action") {
  Rng rng(31);
  const auto gen = random_gksl(2, 2, 1.0, 0.1, rng);
  const Mat l = gksl_superoperator(gen);
  for (int it = 0; it < 20; ++it) {
    const Mat rho = random_complex(4, 4, rng);
    const Vec via_l = l * vectorize(rho);
    const Vec direct = vectorize(gksl_action(gen, rho));
    CHECK((via_l - direct).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("generators annihilate the trace from the left") {
  Rng rng(41);
  for (Index de : {2, 3}) {
    const auto gen = random_gksl(2, de, 1.0, 0.1, rng);
    const Mat l = gksl_superoperator(gen);
    const Index n = 2 * de;
    CHECK((vec_identity(n).adjoint() * l).cwiseAbs().maxCoeff() < 1e-10 * l.norm());
    const Mat phi = propagator(l, 0.2);
    CHECK((vec_identity(n).adjoint() * phi - vec_identity(n).adjoint()).cwiseAbs().maxCoeff() <
          1e-10 * phi.norm());
  }
}

TEST_CASE("zero amplitudes give the zero generator") {
  Rng rng(43);
  const auto gen = random_gksl(2, 2, 0.0, 0.0, rng);
  CHECK(gksl_superoperator(gen).norm() == 0.0);
}

TEST_CASE("propagator semigroup and spectrum") {
  Rng rng(47);
  const auto gen = random_gksl(2, 2, 1.0, 0.1, rng);
  const Mat l = gksl_superoperator(gen);
  CHECK(max_abs_diff(propagator(l, 0.0), Mat::Identity(16, 16)) < 1e-14);
  CHECK(max_abs_diff(propagator(l, 0.3), propagator(l, 0.1) * propagator(l, 0.2)) < 1e-9);

  const Mat phi = propagator(l, 0.2);
  Eigen::ComplexEigenSolver<Mat> es(phi);
  double closest_to_one = 1e9;
  for (Index i = 0; i < 16; ++i) {
    CHECK(std::abs(es.eigenvalues()(i)) <= 1.0 + 1e-9);
    closest_to_one = std::min(closest_to_one, std::abs(es.eigenvalues()(i) - 1.0));
  }
  CHECK(closest_to_one < 1e-9);
}

TEST_CASE("propagator is completely positive for joint dimensions up to 6") {
  Rng rng(53);
  for (Index de : {2, 3}) {
    const auto gen = random_gksl(2, de, 1.0, 0.1, rng);
    const Mat phi = propagator(gksl_superoperator(gen), 0.2);
    const Mat c = choi(phi, 2 * de);
    CHECK(max_abs_diff(c, c.adjoint()) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("amplitude damping closed form") {
  const double gamma = 0.37;
  const Mat c = std::sqrt(gamma) * pauli('+');  // |0><1|, decay of the |1> population
  const Mat l = lindblad_superoperator(Mat::Zero(2, 2), {c});
  Rng rng(59);
  const Mat rho0 = random_density(2, rng);
  for (double t : {0.1, 0.5, 2.0}) {
    const Mat rho = devectorize(Vec(propagator(l, t) * vectorize(rho0)), 2);
    CHECK(std::abs(rho(1, 1) - rho0(1, 1) * std::exp(-gamma * t)) < 1e-10);
    CHECK(std::abs(rho(0, 1) - rho0(0, 1) * std::exp(-0.5 * gamma * t)) < 1e-10);
    CHECK(std::abs(rho(0, 0) - (1.0 - rho(1, 1).real())) < 1e-10);
  }
}

TEST_CASE("stationary state of amplitude damping is the ground state") {
  const Mat c = pauli('+');
  const Mat l = lindblad_superoperator(Mat::Zero(2, 2), {c});
  Mat ground = Mat::Zero(2, 2);
  ground(0, 0) = 1.0;
  CHECK(max_abs_diff(stationary_state(l, 2), ground) < 1e-10);
}

TEST_CASE("stationary state of the depolarizing dissipator is maximally mixed") {
  const std::vector<Mat> cs = {pauli('x'), pauli('y'), pauli('z')};
  const Mat l = lindblad_superoperator(Mat::Zero(2, 2), cs);
  CHECK(max_abs_diff(stationary_state(l), 0.5 * Mat::Identity(2, 2)) < 1e-10);
}

TEST_CASE("stationary state of random generators has a small residual") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(seed, 900));
    const auto gen = random_gksl(2, 2, 1.0, 0.1, rng);
    const Mat l = gksl_superoperator(gen);
    const Mat st = stationary_state(l);
    CHECK(is_density(st, 1e-8));
    CHECK((l * vectorize(st)).norm() <= 1e-8 * l.norm());
  }
}

TEST_CASE("stationary state rejects degenerate kernels") {
  // purely unitary generator: every energy eigenprojector is a fixed point
  const Mat l = lindblad_superoperator(pauli('z'), {});
  CHECK_THROWS_AS(stationary_state(l), DegenerateStationaryError);
  try {
    stationary_state(l);
  } catch (const DegenerateStationaryError& e) {
    CHECK(e.null_dim == 2);
  }
  CHECK_THROWS_AS(stationary_state(Mat::Zero(16, 16)), DegenerateStationaryError);
}

TEST_CASE("simulate_finite_env produces valid states starting at psi") {
  for (Index de = 2; de <= 4; ++de) {
    for (std::uint64_t seed = 0; seed < (de == 4 ? 4u : 8u); ++seed) {
      Rng rng(derive_seed(seed, 100 + de));
      const auto gen = random_gksl(2, de, 1.0, 0.1, rng);
      const Vec psi = sample_pure_state(2, rng);
      const auto traj = simulate_finite_env(gen, psi, 30, 0.2);
      REQUIRE(traj.size() == 30);
      CHECK(max_abs_diff(traj[0], psi * psi.adjoint()) < 1e-10);
      for (const Mat& s : traj) CHECK(is_density(s, kStateTol));
    }
  }
}

TEST_CASE("simulate_finite_env propagates the degenerate-kernel error when a_diss=0") {
  Rng rng(61);
  auto gen = random_gksl(2, 2, 1.0, 0.0, rng);
  const Vec psi = sample_pure_state(2, rng);
  CHECK_THROWS_AS(simulate_finite_env(gen, psi, 5, 0.2), DegenerateStationaryError);
}

TEST_CASE("decoupled unitary joint dynamics keeps the system pure") {
  Rng rng(67);
  auto gen = random_gksl(2, 3, 1.0, 0.0, rng);
  // H = H_S (x) I decouples the environment entirely
  gen.hamiltonian = kron(random_hermitian(2, rng), Mat::Identity(3, 3));
  const Mat phi = propagator(gksl_superoperator(gen), 0.2);
  const Vec psi = sample_pure_state(2, rng);
  const Mat joint0 = kron(Mat(psi * psi.adjoint()), Mat::Identity(3, 3) / 3.0);
  const auto traj = simulate_joint(phi, joint0, 2, 3, 40);
  for (const Mat& s : traj) CHECK(purity(s) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("step composition: k small steps equal one large step") {
  Rng rng(71);
  const auto gen = random_gksl(2, 2, 1.0, 0.1, rng);
  const Vec psi = sample_pure_state(2, rng);
  const auto fine = simulate_finite_env(gen, psi, 13, 0.1);
  const auto coarse = simulate_finite_env(gen, psi, 5, 0.3);
  for (int k = 0; k < 5; ++k) CHECK(max_abs_diff(coarse[k], fine[3 * k]) < 1e-8);
}

TEST_CASE("truncation_level frozen values") {
  CHECK(truncation_level(Cplx(1.1, 0), 0.95) == 4);
  CHECK(truncation_level(Cplx(0, 0), 0.95) == 1);
  CHECK(truncation_level(Cplx(0, 1.1), 0.95) == 4);  // depends on |alpha| only
  CHECK(truncation_level(Cplx(1.1, 0), 0.999) >= truncation_level(Cplx(1.1, 0), 0.95));
  CHECK_THROWS_AS(truncation_level(Cplx(1.1, 0), 1.5), std::invalid_argument);
}

TEST_CASE("coherent state statistics") {
  CHECK(max_abs_diff(coherent_state(Cplx(0, 0), 5), Vec::Unit(5, 0)) == 0.0);

  const Vec c = coherent_state(Cplx(1.1, 0), 10);
  CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-14));
  double mean_n = 0;
  for (Index n = 0; n < 10; ++n) mean_n += n * std::norm(c(n));
  CHECK(std::abs(mean_n - 1.21) < 1e-3);

  // Poissonian photon statistics at negligible truncation
  const Vec big = coherent_state(Cplx(1.1, 0), 40);
  const double lam = 1.21;
  double pmf = std::exp(-lam);
  for (Index n = 0; n < 12; ++n) {
    CHECK(std::abs(std::norm(big(n)) - pmf) < 1e-12);
    pmf *= lam / static_cast<double>(n + 1);
  }
}

TEST_CASE("jc generator preserves trace; auto truncation resolves to 4") {
  JcConfig cfg;
  CHECK(jc_levels(cfg) == 4);
  const Mat l = jc_superoperator(cfg);
  REQUIRE(l.rows() == 64);
  CHECK((vec_identity(8).adjoint() * l).cwiseAbs().maxCoeff() < 1e-10 * l.norm());
}

TEST_CASE("free atom evolution in closed form") {
  // g=0, gamma=0: only H_atom = sigma_z/2 acts on the system factor
  JcConfig cfg;
  cfg.g = 0.0;
  cfg.gamma = 0.0;
  Rng rng(73);
  const Vec psi = sample_pure_state(2, rng);
  const double tau = 0.1;
  const auto traj = simulate_jc(cfg, psi, 51, tau);
  const double sx0 = sigma_x(traj[0]), sy0 = sigma_y(traj[0]);
  for (int k = 0; k <= 50; ++k) {
    const double t = tau * k;
    CHECK(std::abs(sigma_x(traj[k]) - (std::cos(t) * sx0 - std::sin(t) * sy0)) < 1e-8);
  }
}

TEST_CASE("jc channel is unitary when gamma=0") {
  JcConfig cfg;
  cfg.gamma = 0.0;
  const Mat phi = propagator(jc_superoperator(cfg), 0.03);
  Eigen::ComplexEigenSolver<Mat> es(phi, false);
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    CHECK(std::abs(std::abs(es.eigenvalues()(i)) - 1.0) < 1e-9);
}

TEST_CASE("simulate_jc stays physical at the working point") {
  JcConfig cfg;  // gamma=0.05, g=2.5, alpha=1.1, auto levels
  Rng rng(79);
  const Vec psi = sample_pure_state(2, rng);
  const auto traj = simulate_jc(cfg, psi, 1000, 0.03);
  REQUIRE(traj.size() == 1000);
  for (const Mat& s : traj) CHECK(is_density(s, kStateTol));
}

TEST_CASE("jc truncation self-convergence beyond twice the auto level") {
  // Doubling from the auto level (4 -> 8) still shifts <sigma_x> by ~0.4 at
  // alpha=1.1: the 95% mass rule under-resolves the excitation ladder. One
  // further doubling is converged; that is the level pair frozen here.
  JcConfig c8;
  c8.n_levels = 8;
  JcConfig c16;
  c16.n_levels = 16;
  Rng rng(123);
  const Vec psi = sample_pure_state(2, rng);
  const auto t8 = simulate_jc(c8, psi, 1000, 0.03);
  const auto t16 = simulate_jc(c16, psi, 1000, 0.03);
  double sup = 0;
  for (int k = 0; k < 1000; ++k)
    sup = std::max(sup, std::abs(sigma_x(t8[k]) - sigma_x(t16[k])));
  CHECK(sup < 1e-3);
}

TEST_CASE("pseudomode correlation matches the quadrature of the bath correlation") {
  const SpinBosonConfig cfg;  // gamma=0.05, g=0.5, omega0=1
  const double omega = std::sqrt(cfg.omega0 * cfg.omega0 - 0.25 * cfg.gamma * cfg.gamma);
  const double lam2 = spin_boson_correlation(cfg, 0.0).real();
  CHECK(lam2 == doctest::Approx(0.1230487650).epsilon(1e-6));
  double num = 0, den = 0;
  for (int i = 0; i <= 200; ++i) {
    const double t = 20.0 * i / 200.0;
    const Cplx exact = spin_boson_correlation(cfg, t);
    const Cplx pm = lam2 * std::exp(Cplx(-0.5 * cfg.gamma * t, -omega * t));
    num += std::norm(pm - exact);
    den += std::norm(exact);
  }
  CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("overdamped pseudomode parameters are rejected") {
  SpinBosonConfig cfg;
  cfg.omega0 = 0.01;
  cfg.gamma = 0.05;
  CHECK_THROWS_AS(spin_boson_pseudomode(cfg), std::invalid_argument);
}

TEST_CASE("spin-boson atom decouples at g=0") {
  SpinBosonConfig cfg;
  cfg.g = 0.0;
  Rng rng(83);
  const Vec psi = sample_pure_state(2, rng);
  const auto traj = simulate_spin_boson(cfg, psi, 100, 0.15);
  for (const Mat& s : traj) CHECK(purity(s) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("simulate_spin_boson stays physical and builds correlations") {
  const SpinBosonConfig cfg;
  Rng rng(89);
  const Vec psi = sample_pure_state(2, rng);
  const auto traj = simulate_spin_boson(cfg, psi, 300, 0.15);
  for (const Mat& s : traj) CHECK(is_density(s, kStateTol));
  CHECK(purity(traj[0]) == doctest::Approx(1.0).epsilon(1e-10));
  double min_purity = 1.0;
  for (const Mat& s : traj) min_purity = std::min(min_purity, purity(s));
  CHECK(min_purity < 1.0 - 1e-3);
}

TEST_CASE("add_noise statistics, determinism, copy semantics") {
  ModelSpec spec;
  spec.kind = "finite";
  const auto clean = generate_dataset(spec, 3, 200, 0.2, 17).train;

  Rng rng0(99);
  const auto same = add_noise(clean, 0.0, rng0);
  for (size_t l = 0; l < clean.trajectories.size(); ++l)
    for (size_t k = 0; k < clean.trajectories[l].size(); ++k)
      CHECK(max_abs_diff(same.trajectories[l][k], clean.trajectories[l][k]) == 0.0);

  const double sigma = 0.05;
  Rng r1(7), r2(7);
  const auto n1 = add_noise(clean, sigma, r1);
  const auto n2 = add_noise(clean, sigma, r2);
  double sum = 0, sum2 = 0;
  Index count = 0;
  bool herm_broken = false;
  for (size_t l = 0; l < clean.trajectories.size(); ++l)
    for (size_t k = 0; k < clean.trajectories[l].size(); ++k) {
      const Mat diff = n1.trajectories[l][k] - clean.trajectories[l][k];
      CHECK(max_abs_diff(n1.trajectories[l][k], n2.trajectories[l][k]) == 0.0);
      if (check_density(n1.trajectories[l][k]).herm_dev > 1e-6) herm_broken = true;
      for (Index i = 0; i < diff.rows(); ++i)
        for (Index j = 0; j < diff.cols(); ++j) {
          sum += diff(i, j).real() + diff(i, j).imag();
          sum2 += std::norm(diff(i, j));
          count += 2;
        }
    }
  const double mean = sum / count;
  const double std_hat = std::sqrt(sum2 / count);
  CHECK(std::abs(mean) < 5.0 * sigma / std::sqrt(static_cast<double>(count)));
  CHECK(std::abs(std_hat - sigma) / sigma < 0.03);
  CHECK(herm_broken);
  CHECK(n1.noise_sigma == sigma);
  CHECK(clean.noise_sigma == 0.0);

  // trajectory-level overload is the same draw sequence
  Rng r3(7), r4(7);
  const auto t1 = add_noise(clean.trajectories[0], sigma, r3);
  const auto d1 = add_noise(clean, sigma, r4);
  for (size_t k = 0; k < t1.size(); ++k)
    CHECK(max_abs_diff(t1[k], d1.trajectories[0][k]) == 0.0);
}

TEST_CASE("generate_dataset structure and determinism") {
  ModelSpec spec;
  spec.kind = "finite";
  spec.d_env = 2;
  const auto gen = generate_dataset(spec, 3, 25, 0.2, 5);
  const auto& ds = gen.train;
  REQUIRE(ds.trajectories.size() == 3);
  REQUIRE(gen.test.size() == 25);
  CHECK(ds.d == 2);
  CHECK(ds.tau == 0.2);
  CHECK(ds.seed == 5);
  for (const auto& traj : ds.trajectories) {
    REQUIRE(traj.size() == 25);
    for (const Mat& s : traj) CHECK(is_density(s, kStateTol));
  }
  for (const Mat& s : gen.test) CHECK(is_density(s, kStateTol));
  // fresh Haar initial state per trajectory, test included
  for (size_t a = 0; a < ds.trajectories.size(); ++a) {
    CHECK(max_abs_diff(ds.trajectories[a][0], gen.test[0]) > 1e-3);
    for (size_t b = a + 1; b < ds.trajectories.size(); ++b)
      CHECK(max_abs_diff(ds.trajectories[a][0], ds.trajectories[b][0]) > 1e-3);
  }

  const auto again = generate_dataset(spec, 3, 25, 0.2, 5);
  for (size_t l = 0; l < ds.trajectories.size(); ++l)
    for (size_t k = 0; k < ds.trajectories[l].size(); ++k)
      CHECK(max_abs_diff(again.train.trajectories[l][k], ds.trajectories[l][k]) == 0.0);
  for (size_t k = 0; k < gen.test.size(); ++k)
    CHECK(max_abs_diff(again.test[k], gen.test[k]) == 0.0);

  const auto other = generate_dataset(spec, 3, 25, 0.2, 6);
  CHECK(max_abs_diff(other.train.trajectories[0][1], ds.trajectories[0][1]) > 1e-6);

  ModelSpec bad;
  bad.kind = "unknown";
  CHECK_THROWS_AS(generate_dataset(bad, 1, 5, 0.1, 1), std::invalid_argument);

  ModelSpec jc;
  jc.kind = "jc";
  const auto jds = generate_dataset(jc, 1, 10, 0.03, 2).train;
  CHECK(jds.d == 2);
  REQUIRE(jds.trajectories.size() == 1);

  ModelSpec sb;
  sb.kind = "spin_boson";
  const auto sds = generate_dataset(sb, 1, 10, 0.15, 2).train;
  CHECK(sds.d == 2);
}
