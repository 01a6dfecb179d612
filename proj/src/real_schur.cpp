#include "sthp/real_schur.hpp"

#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <string>

namespace sthp {

namespace {

// Reflector I - 2 v v^T / (v^T v) mapping x onto a multiple of e_1. Returns false
// when x is already zero.
template <int R>
bool householder(const Eigen::Matrix<double, R, 1> &x, Eigen::Matrix<double, R, 1> &v)
{
  const double nx = x.norm();
  if (nx == 0.0)
    return false;
  v = x;
  v(0) += x(0) >= 0.0 ? nx : -nx;
  return v.squaredNorm() > 0.0;
}

template <int R>
void reflect_rows(Eigen::MatrixXd &H, int r0, int c0, int c1, const Eigen::Matrix<double, R, 1> &v)
{
  const double beta = 2.0 / v.squaredNorm();
  for (int c = c0; c <= c1; ++c) {
    double s = 0.0;
    for (int k = 0; k < R; ++k)
      s += v(k) * H(r0 + k, c);
    s *= beta;
    for (int k = 0; k < R; ++k)
      H(r0 + k, c) -= s * v(k);
  }
}

template <int R>
void reflect_cols(Eigen::MatrixXd &H, int c0, int r0, int r1, const Eigen::Matrix<double, R, 1> &v)
{
  const double beta = 2.0 / v.squaredNorm();
  for (int r = r0; r <= r1; ++r) {
    double s = 0.0;
    for (int k = 0; k < R; ++k)
      s += H(r, c0 + k) * v(k);
    s *= beta;
    for (int k = 0; k < R; ++k)
      H(r, c0 + k) -= s * v(k);
  }
}

void hessenberg(Eigen::MatrixXd &H, Eigen::MatrixXd &Q)
{
  const int n = static_cast<int>(H.rows());
  for (int k = 0; k + 2 < n; ++k) {
    const int len = n - k - 1;
    Eigen::VectorXd x = H.col(k).segment(k + 1, len);
    const double nx = x.norm();
    if (nx == 0.0)
      continue;
    Eigen::VectorXd v = x;
    v(0) += x(0) >= 0.0 ? nx : -nx;
    const double beta = 2.0 / v.squaredNorm();
    // H <- P H P, Q <- Q P
    Eigen::RowVectorXd w = beta * (v.transpose() * H.block(k + 1, k, len, n - k));
    H.block(k + 1, k, len, n - k) -= v * w;
    Eigen::VectorXd u = beta * (H.block(0, k + 1, n, len) * v);
    H.block(0, k + 1, n, len) -= u * v.transpose();
    Eigen::VectorXd q = beta * (Q.block(0, k + 1, n, len) * v);
    Q.block(0, k + 1, n, len) -= q * v.transpose();
    H.col(k).segment(k + 2, len - 1).setZero();
  }
}

// rotate a 2x2 block at (i, i) with real eigenvalues to upper triangular form
void split_block(Eigen::MatrixXd &S, Eigen::MatrixXd &Q, int i)
{
  const int n = static_cast<int>(S.rows());
  const double p = 0.5 * (S(i, i) - S(i + 1, i + 1));
  const double q = p * p + S(i + 1, i) * S(i, i + 1);
  if (q < 0.0)
    return;
  const double z = std::sqrt(q);
  Eigen::JacobiRotation<double> rot;
  rot.makeGivens(p >= 0.0 ? p + z : p - z, S(i + 1, i));
  S.rightCols(n - i).applyOnTheLeft(i, i + 1, rot.adjoint());
  S.topRows(i + 2).applyOnTheRight(i, i + 1, rot);
  S(i + 1, i) = 0.0;
  Q.applyOnTheRight(i, i + 1, rot);
}

} // namespace

RealSchurResult real_schur(const Eigen::MatrixXd &A, double tol, int max_sweeps_per_row)
{
  if (A.rows() != A.cols())
    throw std::invalid_argument("real_schur: matrix is not square");
  const int n = static_cast<int>(A.rows());
  RealSchurResult res;
  res.S = A;
  res.Q = Eigen::MatrixXd::Identity(n, n);
  if (n == 0)
    return res;
  Eigen::MatrixXd &H = res.S;
  Eigen::MatrixXd &Q = res.Q;
  hessenberg(H, Q);

  const double scale = H.norm();
  const double eps = tol * (scale > 0.0 ? scale : 1.0);
  const int cap = max_sweeps_per_row * n;
  int hi = n - 1, since_deflation = 0;
  while (hi >= 0) {
    int l = hi;
    while (l > 0 && std::abs(H(l, l - 1)) > eps)
      --l;
    if (l > 0)
      H(l, l - 1) = 0.0;
    if (l == hi) {
      hi -= 1;
      since_deflation = 0;
      continue;
    }
    if (l == hi - 1) {
      hi -= 2;
      since_deflation = 0;
      continue;
    }
    if (++res.iterations > cap)
      throw SchurFailure("real_schur: QR iteration did not converge after " + std::to_string(cap) + " sweeps");
    ++since_deflation;

    double s, t;
    if (since_deflation % 11 == 10) {
      // exceptional shift
      const double w = std::abs(H(hi, hi - 1)) + std::abs(H(hi - 1, hi - 2));
      s = 1.5 * w + H(hi, hi);
      t = w * w;
    } else {
      s = H(hi - 1, hi - 1) + H(hi, hi);
      t = H(hi - 1, hi - 1) * H(hi, hi) - H(hi - 1, hi) * H(hi, hi - 1);
    }
    double x = H(l, l) * H(l, l) + H(l, l + 1) * H(l + 1, l) - s * H(l, l) + t;
    double y = H(l + 1, l) * (H(l, l) + H(l + 1, l + 1) - s);
    double z = H(l + 1, l) * H(l + 2, l + 1);
    for (int k = l; k + 2 <= hi; ++k) {
      Eigen::Vector3d v;
      if (householder<3>(Eigen::Vector3d(x, y, z), v)) {
        reflect_rows<3>(H, k, std::max(l, k - 1), n - 1, v);
        reflect_cols<3>(H, k, 0, std::min(k + 3, hi), v);
        reflect_cols<3>(Q, k, 0, n - 1, v);
      }
      if (k > l) {
        H(k + 1, k - 1) = 0.0;
        H(k + 2, k - 1) = 0.0;
      }
      x = H(k + 1, k);
      y = H(k + 2, k);
      z = k + 3 <= hi ? H(k + 3, k) : 0.0;
    }
    Eigen::Vector2d v;
    if (householder<2>(Eigen::Vector2d(x, y), v)) {
      reflect_rows<2>(H, hi - 1, hi - 2, n - 1, v);
      reflect_cols<2>(H, hi - 1, 0, hi, v);
      reflect_cols<2>(Q, hi - 1, 0, n - 1, v);
    }
    H(hi, hi - 2) = 0.0;
  }

  for (int j = 0; j < n; ++j)
    for (int i = j + 2; i < n; ++i)
      H(i, j) = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    if (H(i + 1, i) != 0.0) {
      split_block(H, Q, i);
      ++i;
    }
  return res;
}

int schur_block_size(const Eigen::MatrixXd &S, int j)
{
  return (j + 1 < S.rows() && S(j + 1, j) != 0.0) ? 2 : 1;
}

} // namespace sthp
