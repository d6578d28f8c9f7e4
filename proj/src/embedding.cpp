#include "qme/embedding.hpp"

#include "qme/qcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qme {

namespace {

// Thin SVD; Jacobi for small problems, divide-and-conquer otherwise.
void svd_thin(const Mat& a, Mat& u, RVec& s, Mat& v) {
  if (std::min(a.rows(), a.cols()) <= 32) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  } else {
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  }
}

Index checked_dim(const Trajectory& traj, Index K, const char* who) {
  const Index T = static_cast<Index>(traj.size());
  if (K < 1) throw std::invalid_argument(std::string(who) + ": K must be >= 1");
  if (T <= K) throw std::invalid_argument(std::string(who) + ": need T > K");
  const Index d = traj[0].rows();
  for (const Mat& s : traj)
    if (s.rows() != d || s.cols() != d)
      throw std::invalid_argument(std::string(who) + ": ragged state dimensions");
  return d;
}

// Descending modulus, ties broken by descending phase in (-pi, pi].
std::vector<Index> spectral_order(const Vec& lam) {
  std::vector<Index> idx(lam.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const double ma = std::abs(lam(a)), mb = std::abs(lam(b));
    if (ma != mb) return ma > mb;
    return std::arg(lam(a)) > std::arg(lam(b));
  });
  return idx;
}

}  // namespace

Mat build_hankel(const Trajectory& traj, Index K) {
  const Index d = checked_dim(traj, K, "build_hankel");
  const Index T = static_cast<Index>(traj.size());
  const Index d2 = d * d;
  Mat h(K * d2, T - K + 1);
  for (Index j = 0; j + K <= T; ++j)
    for (Index b = 0; b < K; ++b) h.block(b * d2, j, d2, 1) = vectorize(traj[j + b]);
  return h;
}

HankelSet build_shifted_and_stack(const std::vector<Trajectory>& trajs, Index K) {
  if (trajs.empty()) throw std::invalid_argument("build_shifted_and_stack: empty dataset");
  HankelSet hs;
  hs.K = K;
  hs.d = checked_dim(trajs[0], K, "build_shifted_and_stack");
  const Index d2 = hs.d * hs.d;

  Index n_cols = 0;
  for (const Trajectory& traj : trajs) {
    const Index d_i = checked_dim(traj, K, "build_shifted_and_stack");
    if (d_i != hs.d)
      throw std::invalid_argument("build_shifted_and_stack: mixed system dimensions");
    n_cols += static_cast<Index>(traj.size()) - K + 1;
  }

  hs.h.resize(K * d2, n_cols);
  hs.x.resize(K * d2, n_cols - static_cast<Index>(trajs.size()));
  hs.y.resize(K * d2, hs.x.cols());
  hs.traj_of_col.reserve(n_cols);

  Index col = 0, col_xy = 0;
  for (size_t i = 0; i < trajs.size(); ++i) {
    const Mat block = build_hankel(trajs[i], K);
    const Index c = block.cols();
    hs.h.middleCols(col, c) = block;
    hs.x.middleCols(col_xy, c - 1) = block.leftCols(c - 1);
    hs.y.middleCols(col_xy, c - 1) = block.rightCols(c - 1);
    for (Index j = 0; j < c; ++j) hs.traj_of_col.push_back(static_cast<Index>(i));
    hs.traj_cols.push_back(c);
    hs.traj_len.push_back(static_cast<Index>(trajs[i].size()));
    col += c;
    col_xy += c - 1;
  }
  return hs;
}

double threshold_coefficient(double beta) {
  if (!(beta > 0) || beta > 1)
    throw std::invalid_argument("threshold_coefficient: beta must lie in (0, 1]");
  const double num = 8.0 * beta;
  const double den = (beta + 1.0) + std::sqrt(beta * beta + 14.0 * beta + 1.0);
  return std::sqrt(2.0 * (beta + 1.0) + num / den);
}

double hard_threshold(double largest, Index m, Index n, const ThresholdConfig& cfg) {
  if (m < 1 || n < 1) throw std::invalid_argument("hard_threshold: need m, n >= 1");
  if (cfg.sigma < 0) throw std::invalid_argument("hard_threshold: sigma must be >= 0");
  if (!(cfg.floor > 0)) throw std::invalid_argument("hard_threshold: floor must be > 0");
  if (cfg.sigma == 0.0) return cfg.floor * largest;
  const double big = static_cast<double>(std::max(m, n));
  const double beta = static_cast<double>(std::min(m, n)) / big;
  return cfg.sigma * std::sqrt(2.0) * std::sqrt(big) * threshold_coefficient(beta);
}

Index optimal_rank(const RVec& svals, Index m, Index n, const ThresholdConfig& cfg) {
  for (Index i = 1; i < svals.size(); ++i)
    if (svals(i) > svals(i - 1))
      throw std::invalid_argument("optimal_rank: singular values must descend");
  if (svals.size() == 0 || svals(0) == 0.0) return 0;
  const double thr = hard_threshold(svals(0), m, n, cfg);
  Index r = 0;
  while (r < svals.size() && svals(r) >= thr) ++r;
  return r;
}

DenoiseResult denoise(const HankelSet& hs, Index eta, bool project) {
  const Index m = hs.h.rows(), n = hs.h.cols();
  if (eta < 1 || eta > std::min(m, n))
    throw std::invalid_argument("denoise: eta out of range");
  Mat u, v;
  RVec s;
  svd_thin(hs.h, u, s, v);
  DenoiseResult res;
  res.h_denoised = u.leftCols(eta) * s.head(eta).asDiagonal() * v.leftCols(eta).adjoint();

  const Index d2 = hs.d * hs.d;
  Index offset = 0;
  for (size_t i = 0; i < hs.traj_len.size(); ++i) {
    const Index T = hs.traj_len[i];
    const Index c = hs.traj_cols[i];  // T - K + 1
    Trajectory traj(T);
    for (Index k = 0; k < T; ++k) {
      Vec slot;
      if (k < c)  // first block row covers windows starting at 0..T-K
        slot = res.h_denoised.block(0, offset + k, d2, 1);
      else  // remaining states sit below the first block of the last column
        slot = res.h_denoised.block((k - c + 1) * d2, offset + c - 1, d2, 1);
      traj[k] = devectorize(slot, hs.d);
      if (project) traj[k] = project_to_density(traj[k]);
    }
    res.trajectories.push_back(std::move(traj));
    offset += c;
  }
  return res;
}

void check_eigenvector_conditioning(const Mat& w, const Vec& eigs) {
  Eigen::JacobiSVD<Mat> svd(w);
  const RVec& s = svd.singularValues();
  if (s.size() == 0) return;
  const double smin = s(s.size() - 1);
  const double cond = smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond > 1e12)) return;

  // Report the tightest eigenvalue cluster as the likely degeneracy.
  std::vector<Cplx> cluster;
  if (eigs.size() >= 2) {
    double min_gap = std::numeric_limits<double>::infinity();
    Index pa = 0, pb = 1;
    for (Index i = 0; i < eigs.size(); ++i)
      for (Index j = i + 1; j < eigs.size(); ++j) {
        const double gap = std::abs(eigs(i) - eigs(j));
        if (gap < min_gap) {
          min_gap = gap;
          pa = i;
          pb = j;
        }
      }
    for (Index i = 0; i < eigs.size(); ++i)
      if (std::min(std::abs(eigs(i) - eigs(pa)), std::abs(eigs(i) - eigs(pb))) <=
          10.0 * min_gap)
        cluster.push_back(eigs(i));
  } else if (eigs.size() == 1) {
    cluster.push_back(eigs(0));
  }
  throw DegenerateSpectrumError(
      "eigenvector basis condition number " + std::to_string(cond) +
          " exceeds 1e12; eigenvalue cluster of size " + std::to_string(cluster.size()),
      std::move(cluster), cond);
}

EmbeddingModel fit(const std::vector<Trajectory>& trajs, Index K, const FitOptions& opts) {
  const HankelSet hs = build_shifted_and_stack(trajs, K);
  const Index m = hs.h.rows(), n = hs.h.cols();

  Mat u, v;
  RVec s;
  svd_thin(hs.h, u, s, v);

  const Index r = optimal_rank(s, m, n, opts.threshold);
  if (r == 0) throw NoSignalError("fit: every singular value sits below the threshold");
  if (hs.x.cols() < r)
    throw std::invalid_argument("fit: fewer shifted columns than the estimated rank");

  EmbeddingModel model;
  model.r = r;
  model.K = K;
  model.d = hs.d;
  model.singular_values = s;
  model.threshold = opts.threshold;
  model.project = opts.project;

  const Mat ur = u.leftCols(r);
  Vec lam;
  if (opts.full_pinv_route) {
    const Mat xd = ur * (ur.adjoint() * hs.x);
    const Mat yd = ur * (ur.adjoint() * hs.y);
    const Mat mbar = yd * pinv(xd);
    Eigen::ComplexEigenSolver<Mat> es(mbar);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("fit: eigendecomposition failed");
    const std::vector<Index> order = spectral_order(es.eigenvalues());
    const Mat w_inv = es.eigenvectors().partialPivLu().inverse();
    lam.resize(r);
    model.decoder.resize(m, r);
    model.encoder.resize(r, m);
    for (Index i = 0; i < r; ++i) {
      lam(i) = es.eigenvalues()(order[i]);
      model.decoder.col(i) = es.eigenvectors().col(order[i]);
      model.encoder.row(i) = w_inv.row(order[i]);
    }
  } else {
    const Mat gx = ur.adjoint() * hs.x;
    const Mat gy = ur.adjoint() * hs.y;
    Mat ux, vx;
    RVec sx;
    svd_thin(gx, ux, sx, vx);
    const Mat atil = ux.leftCols(r).adjoint() * gy * vx.leftCols(r) *
                     sx.head(r).cwiseInverse().asDiagonal();
    Eigen::ComplexEigenSolver<Mat> es(atil);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("fit: eigendecomposition failed");
    const std::vector<Index> order = spectral_order(es.eigenvalues());
    lam.resize(r);
    Mat w(r, r);
    for (Index i = 0; i < r; ++i) {
      lam(i) = es.eigenvalues()(order[i]);
      w.col(i) = es.eigenvectors().col(order[i]);
    }
    check_eigenvector_conditioning(w, lam);
    const Mat uxr = ur * ux.leftCols(r);  // m x r
    model.decoder = uxr * w;
    model.encoder = w.partialPivLu().solve(uxr.adjoint());
  }
  model.eigenvalues = std::move(lam);
  return model;
}

EmbeddingModel fit(const TrajectoryDataset& data, Index K, const FitOptions& opts) {
  return fit(data.trajectories, K, opts);
}

namespace {

Vec encode_history(const EmbeddingModel& model, const Trajectory& history) {
  if (static_cast<Index>(history.size()) != model.K)
    throw std::invalid_argument("predict: history must hold exactly K states");
  const Index d2 = model.d * model.d;
  Vec window(model.K * d2);
  for (Index b = 0; b < model.K; ++b) {
    const Mat& s = history[b];
    if (s.rows() != model.d || s.cols() != model.d)
      throw std::invalid_argument("predict: history state dimension mismatch");
    window.segment(b * d2, d2) = vectorize(s);
  }
  return model.encoder * window;
}

Mat decode_newest(const EmbeddingModel& model, const Vec& s) {
  const Index d2 = model.d * model.d;
  const Vec block = model.decoder.bottomRows(d2) * s;
  Mat state = devectorize(block, model.d);
  if (model.project) state = project_to_density(state);
  return state;
}

}  // namespace

Mat predict(const EmbeddingModel& model, const Trajectory& history, Index n) {
  if (n < 1) throw std::invalid_argument("predict: n must be >= 1");
  const Vec s0 = encode_history(model, history);
  Vec powers(model.r);
  for (Index i = 0; i < model.r; ++i)
    powers(i) = std::pow(model.eigenvalues(i), static_cast<double>(n));
  return decode_newest(model, powers.cwiseProduct(s0));
}

Trajectory predict_trajectory(const EmbeddingModel& model, const Trajectory& history,
                              Index n_steps) {
  if (n_steps < 1) throw std::invalid_argument("predict_trajectory: n_steps must be >= 1");
  const Vec s0 = encode_history(model, history);
  Trajectory out;
  out.reserve(n_steps);
  Vec powers = Vec::Ones(model.r);
  for (Index n = 1; n <= n_steps; ++n) {
    powers = powers.cwiseProduct(model.eigenvalues);
    out.push_back(decode_newest(model, powers.cwiseProduct(s0)));
  }
  return out;
}

Index effective_env_dim(Index r, Index d) {
  if (r < 1 || d < 2) throw std::invalid_argument("effective_env_dim: need r >= 1, d >= 2");
  Index de = 1;
  while (d * d * de * de < r) ++de;
  return de;
}

Index natural_rank(Index d, Index d_env) {
  if (d < 1 || d_env < 1) throw std::invalid_argument("natural_rank: dimensions >= 1");
  return d * d * d_env * d_env;
}

}  // namespace qme
