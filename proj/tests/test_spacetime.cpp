#include "sthp/quadrature.hpp"
#include "sthp/real_schur.hpp"
#include "sthp/spacetime.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace sthp;

namespace {

struct Setup
{
  TemporalBasis basis;
  TemporalMatrices tm;
  SpatialSystem sx;
};

Setup make_1d(int m, int p, int n, double T = 2.0)
{
  TemporalBasis basis(uniform_mesh(T, m, p));
  auto tm = assemble_hilbert(basis);
  return {std::move(basis), std::move(tm), assemble_spatial(uniform_interval_mesh(0.0, 1.0, n))};
}

Eigen::MatrixXd random_matrix(std::mt19937_64 &rng, int r, int c)
{
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(r, c);
  for (int i = 0; i < X.size(); ++i)
    X.data()[i] = nd(rng);
  return X;
}

// value of the unconstrained projection at (t, vertex v)
double projection_value(const Eigen::MatrixXd &C, const TemporalBasis &basis, double t, int v)
{
  double s = C(v, basis.size()) * basis.eval(TemporalBasis::initial_vertex, t, 0);
  for (int l = 0; l < basis.size(); ++l)
    s += C(v, l) * basis.eval(l, t, 0);
  return s;
}

// integrals of the extended temporal basis functions
Eigen::VectorXd temporal_integrals(const TemporalBasis &basis)
{
  const int M = basis.size();
  Eigen::VectorXd r(M + 1);
  for (int l = -1; l < M; ++l) {
    double s = 0.0;
    for (int e = 0; e < basis.mesh().num_elements(); ++e) {
      const auto rule = map_rule(gauss_legendre(basis.mesh().degree(e) + 1), basis.mesh().left(e), basis.mesh().right(e));
      for (std::size_t q = 0; q < rule.weights.size(); ++q)
        s += rule.weights[q] * basis.eval(l, rule.points[q], 0);
    }
    r(l < 0 ? M : l) = s;
  }
  return r;
}

void check_constant(const Eigen::MatrixXd &C, const TemporalBasis &basis, const SpatialMesh &mesh)
{
  for (double t : {0.0, 0.07, 0.6, 1.3, 2.0})
    for (int v = 0; v < mesh.num_vertices(); ++v)
      CHECK(projection_value(C, basis, t, v) == doctest::Approx(1.0).epsilon(1e-12));
}

} // namespace

TEST_CASE("projection reproduces constants and tensor polynomials")
{
  {
    const auto s = make_1d(3, 2, 8);
    const auto C = project_rhs([](double, const Point2 &) { return 1.0; }, s.basis, s.sx);
    check_constant(C, s.basis, s.sx.mesh);
  }
  {
    TemporalBasis basis(build_mesh({2.0, 0.4, 1.0, 4, 1}));
    const auto sx = assemble_spatial(refine_uniform(lshape_mesh()));
    const auto C = project_rhs([](double, const Point2 &) { return 1.0; }, basis, sx);
    check_constant(C, basis, sx.mesh);
    // integral of Pi g over Q
    const Eigen::VectorXd ones_x = sx.M_full * Eigen::VectorXd::Ones(sx.mesh.num_vertices());
    const Eigen::VectorXd int_t = temporal_integrals(basis);
    CHECK(ones_x.dot(C * int_t) == doctest::Approx(6.0).epsilon(1e-10));
  }
  {
    // degree 2 in t, linear in x, with p = 2
    const auto s = make_1d(3, 2, 5);
    const auto g = [](double t, const Point2 &x) { return (1.0 + t - 0.5 * t * t) * (0.3 + 2.0 * x[0]); };
    const auto C = project_rhs(g, s.basis, s.sx);
    for (double t : {0.0, 0.3, 1.1, 2.0})
      for (int v = 0; v < s.sx.mesh.num_vertices(); ++v)
        CHECK(projection_value(C, s.basis, t, v) == doctest::Approx(g(t, s.sx.mesh.vertices[v])).epsilon(1e-12));
  }
}

TEST_CASE("Kronecker operator")
{
  std::mt19937_64 rng(11);
  TemporalBasis basis(build_mesh({2.0, 0.5, 1.0, 3, 1}));
  const auto tm = assemble_hilbert(basis);
  const auto sx = assemble_spatial(refine_uniform(lshape_mesh()));
  const KroneckerOperator op(tm, sx);
  const Eigen::MatrixXd B = op.dense();
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(op.size());
  e1(0) = 1.0;
  CHECK((op.apply(e1) - B.col(0)).norm() < 1e-12);
  const Eigen::VectorXd x = random_matrix(rng, static_cast<int>(op.size()), 1).col(0);
  CHECK((op.apply(x) - B * x).norm() < 1e-11 * (B * x).norm());
  CHECK((Eigen::MatrixXd(op.sparse()) - B).norm() < 1e-13 * B.norm());
  // symmetric part positive definite
  const Eigen::MatrixXd Bs = 0.5 * (B + B.transpose());
  CHECK(Eigen::LLT<Eigen::MatrixXd>(Bs).info() == Eigen::Success);
  CHECK_THROWS_AS(op.dense(10), std::length_error);

  TemporalMatrices bad = tm;
  bad.M_ht.conservativeResize(tm.M_ht.rows() - 1, tm.M_ht.cols());
  CHECK_THROWS_AS(KroneckerOperator(bad, sx), std::invalid_argument);
  CHECK_THROWS_AS(op.apply(Eigen::VectorXd(Eigen::VectorXd::Zero(3))), std::invalid_argument);
}

TEST_CASE("parametric IVP")
{
  TemporalBasis basis(build_mesh({2.0, 0.3, 1.0, 4, 2}));
  const auto tm = assemble_hilbert(basis);
  {
    const auto u = solve_parametric_ivp(0.0, [](double) { return 1.0; }, basis, tm);
    for (double t : basis.mesh().breakpoints())
      CHECK(basis.evaluate(u, t).first == doctest::Approx(t).epsilon(1e-10));
  }
  {
    const auto u = solve_parametric_ivp(1.0, [](double t) { return 1.0 + t; }, basis, tm);
    for (double t : {0.01, 0.5, 1.3, 2.0})
      CHECK(std::abs(basis.evaluate(u, t).first - t) < 1e-10);
  }
  CHECK_THROWS_AS(solve_parametric_ivp(-1.0, [](double) { return 1.0; }, basis, tm), std::invalid_argument);
  // p refinement on one element towards 1 - exp(-t)
  double prev = 1.0;
  for (int p = 2; p <= 8; p += 2) {
    TemporalBasis b1(uniform_mesh(2.0, 1, p));
    const auto u = solve_parametric_ivp(1.0, [](double) { return 1.0; }, b1, assemble_hilbert(b1));
    double err = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double t = 0.01 * i;
      err = std::max(err, std::abs(b1.evaluate(u, t).first - (1.0 - std::exp(-t))));
    }
    CHECK(err < 0.2 * prev);
    prev = err;
  }
  CHECK(prev < 1e-7);
}

TEST_CASE("strategies agree and residuals vanish")
{
  std::mt19937_64 rng(5);
  {
    const auto s = make_1d(17, 1, 64); // (M,N) = (17,63)
    const Eigen::MatrixXd G = random_matrix(rng, s.sx.size(), s.basis.size());
    SolverStrategy ref;
    ref.kind = SolverKind::reference_dense;
    const auto a = solve(s.tm, s.sx, G, ref);
    const auto b = solve(s.tm, s.sx, G);
    CHECK((a.U - b.U).norm() < 1e-8 * a.U.norm());
    CHECK(a.residual < 1e-10);
    CHECK(b.residual < 1e-10);
    CHECK(a.used == SolverKind::reference_dense);
    CHECK(b.used == SolverKind::bartels_stewart);
  }
  {
    // hp mesh in time (2x2 Schur blocks present) on an L-shape
    TemporalBasis basis(build_mesh({2.0, 0.3, 1.5, 4, 1}));
    const auto tm = assemble_hilbert(basis);
    const auto sx = assemble_spatial(refine_uniform(lshape_mesh()));
    const Eigen::LLT<Eigen::MatrixXd> llt(tm.A_ht);
    const Eigen::MatrixXd C0 = llt.matrixL().solve(tm.M_ht.transpose());
    const auto sch = real_schur(llt.matrixL().solve(C0.transpose()).transpose());
    int blocks = 0;
    for (int j = 0; j + 1 < sch.S.rows(); ++j)
      blocks += sch.S(j + 1, j) != 0.0;
    CHECK(blocks > 0);
    const Eigen::MatrixXd G = random_matrix(rng, sx.size(), basis.size());
    SolverStrategy ref;
    ref.kind = SolverKind::reference_dense;
    const auto a = solve(tm, sx, G, ref);
    const auto b = solve(tm, sx, G);
    CHECK((a.U - b.U).norm() < 1e-8 * a.U.norm());
    CHECK(b.residual < 1e-10);
  }
  {
    // level 1 of the uniform 1D study: MN = 12
    const auto s = make_1d(4, 1, 4);
    const auto C = project_rhs([](double, const Point2 &) { return 1.0; }, s.basis, s.sx);
    const auto G = rhs_from_projection(C, s.tm, s.sx);
    SolverStrategy ref;
    ref.kind = SolverKind::reference_dense;
    CHECK(solve(s.tm, s.sx, G, ref).residual < 1e-12);
    CHECK(solve(s.tm, s.sx, G).residual < 1e-12);
  }
}

TEST_CASE("zero data gives the zero solution")
{
  const auto s = make_1d(5, 2, 10);
  const Eigen::MatrixXd G = Eigen::MatrixXd::Zero(s.sx.size(), s.basis.size());
  for (auto kind : {SolverKind::reference_dense, SolverKind::bartels_stewart}) {
    SolverStrategy st;
    st.kind = kind;
    const auto sol = solve(s.tm, s.sx, G, st);
    CHECK(sol.U.cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(solve(s.tm, s.sx, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
  CHECK(solver_kind_from_string("bartels-stewart") == SolverKind::bartels_stewart);
  CHECK(to_string(SolverKind::reference_dense) == "reference-dense");
  CHECK_THROWS_AS(solver_kind_from_string("gmres"), std::invalid_argument);
}

TEST_CASE("manufactured t x (1-x)")
{
  // g = x(1-x) + 2t; P1 in space is nodally exact in 1D for the steady part
  const auto s = make_1d(2, 2, 64);
  const auto g = [](double t, const Point2 &x) { return x[0] * (1.0 - x[0]) + 2.0 * t; };
  const auto G = rhs_from_projection(project_rhs(g, s.basis, s.sx, {8, 0, 6}), s.tm, s.sx);
  const auto sol = solve(s.tm, s.sx, G);
  double err = 0.0;
  for (double t : {0.25, 1.0, 2.0})
    for (double x : {0.125, 0.5, 0.75}) {
      const double u = t * x * (1.0 - x);
      err = std::max(err, std::abs(evaluate_solution(sol, s.basis, s.sx, t, {x, 0.0}) - u));
      CHECK(evaluate_solution(sol, s.basis, s.sx, t, {x, 0.0}, 1) == doctest::Approx(x * (1.0 - x)).epsilon(1e-3));
    }
  CHECK(err < 1e-4);
  CHECK(evaluate_solution(sol, s.basis, s.sx, 0.0, {0.5, 0.0}) == 0.0);
  CHECK_THROWS_AS(evaluate_solution(sol, s.basis, s.sx, 3.0, {0.5, 0.0}), std::out_of_range);
  CHECK_THROWS_AS(evaluate_solution(sol, s.basis, s.sx, 1.0, {1.5, 0.0}), std::out_of_range);
}

TEST_CASE("discrete stability under refinement")
{
  std::mt19937_64 rng(9);
  std::vector<double> ratios;
  for (int L = 1; L <= 4; ++L) {
    const int n = 1 << (L + 1);
    const auto s = make_1d(n, 1, n);
    // random g in the discrete space, measured in L2(Q)
    const Eigen::MatrixXd C = random_matrix(rng, s.sx.mesh.num_vertices(), s.basis.size() + 1);
    const Eigen::MatrixXd Mt = temporal_mass_extended(s.basis);
    const double gnorm = std::sqrt((C.transpose() * s.sx.M_full * C * Mt).trace());
    const auto sol = solve(s.tm, s.sx, rhs_from_projection(C, s.tm, s.sx));
    const Eigen::MatrixXd Mt0 = Mt.topLeftCorner(s.basis.size(), s.basis.size());
    const double unorm = std::sqrt((sol.U.transpose() * s.sx.M * sol.U * Mt0).trace());
    ratios.push_back(unorm / gnorm);
  }
  for (double r : ratios) {
    CHECK(r > 0.0);
    CHECK(r < 2.0 * ratios.front());
  }
}

TEST_CASE("solution dump round trip")
{
  const auto s = make_1d(3, 2, 6);
  std::mt19937_64 rng(1);
  SpaceTimeSolution sol;
  sol.U = random_matrix(rng, s.sx.size(), s.basis.size());
  const auto path = (std::filesystem::temp_directory_path() / "sthp_solution_test.bin").string();
  write_solution(path, sol, s.basis.mesh().hash(), mesh_hash(s.sx.mesh));
  const auto d = read_solution(path);
  CHECK(d.U == sol.U);
  CHECK(d.temporal_hash == s.basis.mesh().hash());
  CHECK(d.spatial_hash == mesh_hash(s.sx.mesh));
  CHECK(mesh_hash(s.sx.mesh) != mesh_hash(refine_uniform(s.sx.mesh)));
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_solution(path), std::runtime_error);
}
