#pragma once

#include "qme/types.hpp"

namespace qme {

// Row-major vectorization: component i*d + j of the result is rho(i, j).
// Every superoperator in this library acts on states in this convention.
Vec vectorize(const Mat& rho);
Mat devectorize(const Vec& v, Index d);

// Reduced states of a bipartite system with ordering system (x) environment,
// joint index i*d_env + e.
Mat partial_trace_env(const Mat& rho_se, Index d, Index d_env);
Mat partial_trace_sys(const Mat& rho_se, Index d, Index d_env);

// Trace norm ||a - b||_1, the sum of singular values of the difference.
double trace_distance(const Mat& a, const Mat& b);

double purity(const Mat& rho);

// Nearest state: hermitize, clip negative eigenvalues, renormalize the trace.
// Throws NoSignalError when nothing positive remains.
Mat project_to_density(const Mat& m);

// Moore-Penrose pseudoinverse. Singular values below tol * largest are
// zeroed; tol < 0 selects the default max(rows, cols) * machine epsilon.
Mat pinv(const Mat& m, double tol = -1.0);

// Haar-random pure state: i.i.d. standard complex Gaussian vector, normalized.
Vec sample_pure_state(Index d, Rng& rng);

// Scaling-and-squaring with degree-13 Pade.
Mat matrix_exponential(const Mat& m);

struct DensityCheck {
  double herm_dev = 0;   // max entry of |rho - rho^dag|
  double trace_dev = 0;  // |tr(rho) - 1|
  double min_eig = 0;    // smallest eigenvalue of the hermitized matrix
};
DensityCheck check_density(const Mat& rho);
bool is_density(const Mat& rho, double tol = kStateTol);

}  // namespace qme
