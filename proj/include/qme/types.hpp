#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qme {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

using Rng = std::mt19937_64;

// One system trajectory, states at k = 0..T-1 on a fixed time grid.
using Trajectory = std::vector<Mat>;

// Simulator outputs and projected states satisfy the density-matrix
// invariants within this bound. Noisy data is exempt.
inline constexpr double kStateTol = 1e-10;

// Independent reproducible stream number `tag` under one base seed, so a
// single draw (e.g. the generator) can be replayed without the others.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);
Rng make_rng(std::uint64_t base, std::uint64_t tag);

// Thrown when nothing remains above a noise threshold or after clipping.
struct NoSignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when the generator has no unique fixed point.
struct DegenerateStationaryError : std::runtime_error {
  DegenerateStationaryError(const std::string& what, int null_dim_)
      : std::runtime_error(what), null_dim(null_dim_) {}
  int null_dim;
};

// Thrown when an eigenvector basis is too ill-conditioned to trust.
struct DegenerateSpectrumError : std::runtime_error {
  DegenerateSpectrumError(const std::string& what, std::vector<Cplx> cluster_,
                          double condition_)
      : std::runtime_error(what), cluster(std::move(cluster_)), condition(condition_) {}
  std::vector<Cplx> cluster;
  double condition;
};

}  // namespace qme
