#include "qme/qcore.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <limits>

namespace qme {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  // splitmix64 step on a tag-shifted base
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t base, std::uint64_t tag) {
  return Rng(derive_seed(base, tag));
}

Vec vectorize(const Mat& rho) {
  const Index d = rho.rows();
  if (rho.cols() != d) throw std::invalid_argument("vectorize: matrix must be square");
  Vec v(d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) v(i * d + j) = rho(i, j);
  return v;
}

Mat devectorize(const Vec& v, Index d) {
  if (v.size() != d * d)
    throw std::invalid_argument("devectorize: length " + std::to_string(v.size()) +
                                " does not match dimension " + std::to_string(d));
  Mat rho(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) rho(i, j) = v(i * d + j);
  return rho;
}

static void check_joint(const Mat& rho_se, Index d, Index d_env, const char* who) {
  if (d < 1 || d_env < 1 || rho_se.rows() != d * d_env || rho_se.cols() != d * d_env)
    throw std::invalid_argument(std::string(who) + ": matrix does not match d * d_env");
}

Mat partial_trace_env(const Mat& rho_se, Index d, Index d_env) {
  check_joint(rho_se, d, d_env, "partial_trace_env");
  Mat out = Mat::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index e = 0; e < d_env; ++e) out(i, j) += rho_se(i * d_env + e, j * d_env + e);
  return out;
}

Mat partial_trace_sys(const Mat& rho_se, Index d, Index d_env) {
  check_joint(rho_se, d, d_env, "partial_trace_sys");
  Mat out = Mat::Zero(d_env, d_env);
  for (Index a = 0; a < d_env; ++a)
    for (Index b = 0; b < d_env; ++b)
      for (Index i = 0; i < d; ++i) out(a, b) += rho_se(i * d_env + a, i * d_env + b);
  return out;
}

double trace_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("trace_distance: shape mismatch");
  Eigen::JacobiSVD<Mat> svd(a - b);
  return svd.singularValues().sum();
}

double purity(const Mat& rho) { return (rho * rho).trace().real(); }

Mat project_to_density(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("project_to_density: not square");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
  RVec lam = es.eigenvalues().cwiseMax(0.0);
  const double tr = lam.sum();
  if (tr <= 0.0)
    throw NoSignalError("project_to_density: no positive spectral weight after clipping");
  lam /= tr;
  return es.eigenvectors() * lam.cast<Cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Mat pinv(const Mat& m, double tol) {
  if (tol < 0)
    tol = static_cast<double>(std::max(m.rows(), m.cols())) *
          std::numeric_limits<double>::epsilon();
  const bool small = std::min(m.rows(), m.cols()) <= 32;
  Mat u, v;
  RVec s;
  if (small) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  } else {
    Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  }
  const double cut = s.size() > 0 ? tol * s(0) : 0.0;
  RVec inv = RVec::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return v * inv.cast<Cplx>().asDiagonal() * u.adjoint();
}

Vec sample_pure_state(Index d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("sample_pure_state: d must be positive");
  std::normal_distribution<double> gauss;
  Vec psi(d);
  double n = 0.0;
  do {
    for (Index i = 0; i < d; ++i) psi(i) = Cplx(gauss(rng), gauss(rng));
    n = psi.norm();
  } while (n == 0.0);
  return psi / n;
}

Mat matrix_exponential(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exponential: not square");
  return m.exp();
}

DensityCheck check_density(const Mat& rho) {
  DensityCheck c;
  c.herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  c.trace_dev = std::abs(rho.trace() - Cplx(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()),
                                        Eigen::EigenvaluesOnly);
  c.min_eig = es.eigenvalues().minCoeff();
  return c;
}

bool is_density(const Mat& rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) return false;
  const DensityCheck c = check_density(rho);
  return c.herm_dev <= tol && c.trace_dev <= tol && c.min_eig >= -tol;
}

}  // namespace qme
