#include "sthp/real_schur.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

using namespace sthp;

namespace {

std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v)
{
  std::sort(v.begin(), v.end(), [](auto a, auto b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  return v;
}

std::vector<std::complex<double>> schur_eigenvalues(const Eigen::MatrixXd &S)
{
  std::vector<std::complex<double>> ev;
  const int n = static_cast<int>(S.rows());
  for (int j = 0; j < n;) {
    if (schur_block_size(S, j) == 1) {
      ev.emplace_back(S(j, j), 0.0);
      ++j;
      continue;
    }
    const double a = S(j, j), b = S(j, j + 1), c = S(j + 1, j), d = S(j + 1, j + 1);
    const std::complex<double> disc = std::sqrt(std::complex<double>(0.25 * (a - d) * (a - d) + b * c));
    ev.push_back(0.5 * (a + d) + disc);
    ev.push_back(0.5 * (a + d) - disc);
    j += 2;
  }
  return ev;
}

void check_decomposition(const Eigen::MatrixXd &A)
{
  const int n = static_cast<int>(A.rows());
  const auto res = real_schur(A);
  const double scale = std::max(1.0, A.norm());
  CHECK((res.Q.transpose() * res.Q - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-12 * n);
  CHECK((res.Q * res.S * res.Q.transpose() - A).norm() < 1e-12 * n * scale);
  // quasi triangular, no adjacent 2x2 blocks, blocks carry complex pairs
  for (int j = 0; j < n; ++j)
    for (int i = j + 2; i < n; ++i)
      CHECK(res.S(i, j) == 0.0);
  for (int j = 0; j + 2 < n; ++j)
    CHECK((res.S(j + 1, j) == 0.0 || res.S(j + 2, j + 1) == 0.0));
  for (int j = 0; j < n;) {
    const int b = schur_block_size(res.S, j);
    if (b == 2) {
      const double a = res.S(j, j), bb = res.S(j, j + 1), c = res.S(j + 1, j), d = res.S(j + 1, j + 1);
      CHECK(0.25 * (a - d) * (a - d) + bb * c < 0.0);
    }
    j += b;
  }
  // eigenvalues against Eigen's solver
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  std::vector<std::complex<double>> ref(es.eigenvalues().data(), es.eigenvalues().data() + n);
  const auto mine = sorted(schur_eigenvalues(res.S));
  ref = sorted(ref);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(mine[i] - ref[i]) < 1e-8 * scale);
}

} // namespace

TEST_CASE("random dense matrices")
{
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int n : {1, 2, 3, 5, 10, 40, 120}) {
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < A.size(); ++i)
      A.data()[i] = nd(rng);
    check_decomposition(A);
  }
}

TEST_CASE("structured matrices")
{
  // rotation blocks only
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(6, 6);
  for (int b = 0; b < 3; ++b) {
    R(2 * b, 2 * b + 1) = 1.0 + b;
    R(2 * b + 1, 2 * b) = -(1.0 + b);
  }
  check_decomposition(R);
  // already upper triangular
  Eigen::MatrixXd U = Eigen::MatrixXd::Random(8, 8).triangularView<Eigen::Upper>();
  check_decomposition(U);
  // zero, identity, repeated eigenvalue Jordan block
  check_decomposition(Eigen::MatrixXd::Zero(5, 5));
  check_decomposition(Eigen::MatrixXd::Identity(5, 5));
  Eigen::MatrixXd J = 2.0 * Eigen::MatrixXd::Identity(6, 6);
  J.diagonal(1).setOnes();
  check_decomposition(J);
  // companion matrix of (x-1)(x-2)...(x-6)
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(6, 6);
  const double coef[6] = {720, -1764, 1624, -735, 175, -21};
  for (int i = 1; i < 6; ++i)
    C(i, i - 1) = 1.0;
  for (int i = 0; i < 6; ++i)
    C(i, 5) = -coef[i];
  check_decomposition(C);
  // nonsymmetric with positive definite symmetric part (the temporal pencil case)
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd K(30, 30);
  for (int i = 0; i < K.size(); ++i)
    K.data()[i] = nd(rng);
  const Eigen::MatrixXd P = K * K.transpose() / 30.0 + Eigen::MatrixXd::Identity(30, 30) + (K - K.transpose());
  check_decomposition(P);
  const auto res = real_schur(P);
  for (int j = 0; j < 30; ++j)
    CHECK(res.S(j, j) > 0.0);
}

TEST_CASE("errors")
{
  CHECK_THROWS_AS(real_schur(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(20, 20);
  CHECK_THROWS_AS(real_schur(A, 1e-12, 0), SchurFailure);
  CHECK(real_schur(Eigen::MatrixXd(0, 0)).S.size() == 0);
}
