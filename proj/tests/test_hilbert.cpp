#include "sthp/fractional_norms.hpp"
#include "sthp/hilbert.hpp"

#include "doctest.h"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace sthp;

namespace {

// Richardson-extrapolated series oracle; truncation error decays like K^-2
TemporalMatrices extrapolated_oracle(const TemporalBasis &basis, double &spread)
{
  const auto a = oracle::series_hilbert_matrices(basis, 8192);
  const auto b = oracle::series_hilbert_matrices(basis, 16384);
  TemporalMatrices r;
  r.M_ht_ext = (4.0 * b.M_ht_ext - a.M_ht_ext) / 3.0;
  r.A_ht_ext = (4.0 * b.A_ht_ext - a.A_ht_ext) / 3.0;
  spread = std::max((r.M_ht_ext - b.M_ht_ext).cwiseAbs().maxCoeff(), (r.A_ht_ext - b.A_ht_ext).cwiseAbs().maxCoeff());
  return r;
}

} // namespace

TEST_CASE("kernel values")
{
  CHECK(hilbert_kernel(1.5, 0.5, 2.0) == doctest::Approx(std::log(std::tan(std::numbers::pi / 8))).epsilon(1e-14));
  CHECK(hilbert_kernel(1.5, 0.5, 2.0) == doctest::Approx(-0.881374).epsilon(1e-6));
  CHECK(hilbert_kernel(0.3, 0.9, 1.7) == doctest::Approx(hilbert_kernel(0.9, 0.3, 1.7)).epsilon(1e-15));
  CHECK_THROWS_AS(hilbert_kernel(0.4, 0.4, 1.0), std::domain_error);
  CHECK(hilbert_kernel(0.4, 0.4 + 1e-12, 1.0) < -25.0);
}

TEST_CASE("entries agree with the series oracle")
{
  const std::vector<TemporalMesh> meshes = {
    TemporalMesh({0, 0.25, 0.5, 1}, {1, 2, 3}),
    TemporalMesh({0, 0.7, 2.0}, {6, 3}),
    TemporalMesh({0, 0.0961, 0.31, 1, 2}, {1, 4, 6, 6}),
    TemporalMesh({0, 0.2, 0.45, 0.6, 1.0}, {5, 1, 2, 6}),
  };
  for (const auto &mesh : meshes) {
    const TemporalBasis basis(mesh);
    const auto A = assemble_hilbert(basis);
    double spread = 0.0;
    const auto S = extrapolated_oracle(basis, spread);
    CHECK(spread < 1e-7);
    CHECK((A.M_ht_ext - S.M_ht_ext).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((A.A_ht_ext - S.A_ht_ext).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("A_ht symmetric positive definite, M_ht positive")
{
  for (const auto &spec : {TemporalMeshSpec{1.0, 0.17, 1.0, 8, 0}, TemporalMeshSpec{2.0, 0.31, 2.0, 5, 2}}) {
    const TemporalBasis basis(build_mesh(spec));
    const auto mats = assemble_hilbert(basis);
    const double sym = (mats.A_ht - mats.A_ht.transpose()).cwiseAbs().maxCoeff() / mats.A_ht.cwiseAbs().maxCoeff();
    CHECK(sym < 1e-9);
    const Eigen::MatrixXd As = 0.5 * (mats.A_ht + mats.A_ht.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(As);
    CHECK(llt.info() == Eigen::Success);
    const Eigen::MatrixXd Ms = 0.5 * (mats.M_ht + mats.M_ht.transpose());
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd x(basis.size());
      for (auto &v : x)
        v = nd(rng);
      CHECK(x.dot(Ms * x) > 0.0);
    }
  }
}

TEST_CASE("first Fourier mode energy")
{
  const double T = 2.0;
  const TemporalBasis basis(uniform_mesh(T, 1, 18));
  const double c = std::sqrt(2.0 / T), w = std::numbers::pi / (2.0 * T);
  const auto x = quasi_interpolant(
    basis, [&](double t) { return c * std::sin(w * t); }, [&](double t) { return c * w * std::cos(w * t); });
  const auto mats = assemble_hilbert(basis);
  CHECK(std::abs(x.dot(mats.A_ht * x) - 0.785398163397) < 1e-6);
}

TEST_CASE("quadratic forms match the Fourier-side norm")
{
  const TemporalBasis basis(build_mesh({1.0, 0.3, 1.5, 4, 0}));
  const auto mats = assemble_hilbert(basis);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x(basis.size());
    for (auto &v : x)
      v = nd(rng);
    const auto s = oracle::expansion_sine_coefficients(basis, x, 16384);
    oracle::FourierExpansion e{0.0, 1.0, std::vector<double>(s.data(), s.data() + s.size())};
    const double h12 = oracle::h12_norm(e);
    CHECK(std::abs(x.dot(mats.A_ht * x) - h12 * h12) < 1e-6 * std::max(1.0, h12 * h12));
  }
}

TEST_CASE("nested spaces give identical quadratic forms")
{
  const TemporalBasis coarse(TemporalMesh({0, 0.3, 1.0}, {3, 4}));
  const TemporalBasis fine(TemporalMesh({0, 0.1, 0.3, 0.6, 1.0}, {3, 3, 4, 4}));
  const auto Mc = assemble_hilbert(coarse);
  const auto Mf = assemble_hilbert(fine);
  // prolongation: coarse basis functions are piecewise polynomials on the fine mesh
  Eigen::MatrixXd P(fine.size(), coarse.size());
  for (int k = 0; k < coarse.size(); ++k)
    P.col(k) = quasi_interpolant(
      fine, [&](double t) { return coarse.eval(k, t, 0); }, [&](double t) { return coarse.eval(k, t, 1); });
  CHECK((P.transpose() * Mf.A_ht * P - Mc.A_ht).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((P.transpose() * Mf.M_ht * P - Mc.M_ht).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("quadrature order doubling")
{
  const TemporalBasis basis(build_mesh({3.0, 0.17, 1.0, 10, 3}));
  HilbertQuadConfig doubled;
  doubled.scale = 2;
  const auto a = assemble_hilbert(basis);
  const auto b = assemble_hilbert(basis, doubled);
  CHECK((a.M_ht_ext - b.M_ht_ext).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.A_ht_ext - b.A_ht_ext).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("binary dump round trip")
{
  const TemporalBasis basis(build_mesh({1.0, 0.5, 1.0, 3, 0}));
  const auto mats = assemble_hilbert(basis);
  CHECK(mats.M_ht_ext.cols() == basis.size() + 1);
  const std::string path = "hilbert_roundtrip.bin";
  write_hilbert_matrices(path, mats);
  const auto back = read_hilbert_matrices(path);
  CHECK(back.mesh_hash == basis.mesh().hash());
  CHECK(back.M_ht == mats.M_ht);
  CHECK(back.A_ht == mats.A_ht);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_hilbert_matrices("does_not_exist.bin"), std::runtime_error);
}
