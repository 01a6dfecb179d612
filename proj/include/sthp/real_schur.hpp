#ifndef STHP_REAL_SCHUR_HPP
#define STHP_REAL_SCHUR_HPP

#include <Eigen/Dense>

#include <stdexcept>

namespace sthp {

struct SchurFailure : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/// A = Q S Q^T with Q orthogonal and S quasi upper triangular. 2x2 diagonal
/// blocks only carry complex conjugate pairs; blocks with real eigenvalues are
/// split by a rotation.
struct RealSchurResult
{
  Eigen::MatrixXd Q;
  Eigen::MatrixXd S;
  int iterations = 0;
};

/// Householder Hessenberg reduction followed by Francis double shift QR.
/// Subdiagonal entries below tol * ||H||_F are deflated. Throws SchurFailure
/// after max_sweeps_per_row * n iterations.
RealSchurResult real_schur(const Eigen::MatrixXd &A, double tol = 1e-12, int max_sweeps_per_row = 40);

/// Size (1 or 2) of the diagonal block starting at j.
int schur_block_size(const Eigen::MatrixXd &S, int j);

} // namespace sthp

#endif
