#include "sthp/spacetime.hpp"

#include "sthp/quadrature.hpp"
#include "sthp/real_schur.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sthp {

namespace {

using ColSparse = Eigen::SparseMatrix<double>;

// temporal quadrature of element e used for data integrals
MappedRule element_rule(const TemporalBasis &basis, int e, const ProjectionOptions &opt)
{
  const auto &mesh = basis.mesh();
  const int n = mesh.degree(e) + opt.temporal_extra;
  if (e == 0 && opt.first_element_levels > 0)
    return geometric_composite(n, mesh.left(0), mesh.right(0), 0.5, opt.first_element_levels);
  return map_rule(gauss_legendre_cached(n), mesh.left(e), mesh.right(e));
}

int extended_index(int dof, int M)
{
  return dof == TemporalBasis::initial_vertex ? M : dof;
}

void check_dimensions(const TemporalMatrices &tm, const SpatialSystem &sx)
{
  const auto M = tm.A_ht.rows();
  if (tm.A_ht.cols() != M || tm.M_ht.rows() != M || tm.M_ht.cols() != M)
    throw std::invalid_argument("space-time operator: temporal matrices must be square of equal size");
  if (sx.M.rows() != sx.size() || sx.A.rows() != sx.size() || sx.M.cols() != sx.size() || sx.A.cols() != sx.size())
    throw std::invalid_argument("space-time operator: spatial matrices do not match the free vertex count");
}

} // namespace

Eigen::MatrixXd temporal_mass_extended(const TemporalBasis &basis)
{
  const auto &mesh = basis.mesh();
  const int M = basis.size();
  Eigen::MatrixXd Mt = Eigen::MatrixXd::Zero(M + 1, M + 1);
  std::vector<double> vals, dts;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto &dofs = basis.element_dofs(e);
    const int nl = static_cast<int>(dofs.size());
    vals.resize(nl);
    dts.resize(nl);
    const auto rule = map_rule(gauss_legendre_cached(mesh.degree(e) + 2), mesh.left(e), mesh.right(e));
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      basis.eval_local(e, rule.points[q], vals.data(), dts.data());
      for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b)
          Mt(extended_index(dofs[a], M), extended_index(dofs[b], M)) += rule.weights[q] * vals[a] * vals[b];
    }
  }
  return Mt;
}

Eigen::MatrixXd project_rhs(const SpaceTimeFunction &g, const TemporalBasis &basis, const SpatialSystem &sx,
                            const ProjectionOptions &opt)
{
  const auto &mesh = basis.mesh();
  const auto &smesh = sx.mesh;
  const int M = basis.size();
  const int Nall = smesh.num_vertices();
  const int nloc = smesh.dim == 1 ? 2 : 3;
  const auto squad = spatial_quadrature(smesh, opt.spatial_degree);

  Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(Nall, M + 1);
  Eigen::VectorXd b(Nall);
  std::vector<double> vals, dts;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto &dofs = basis.element_dofs(e);
    const int nl = static_cast<int>(dofs.size());
    vals.resize(nl);
    dts.resize(nl);
    const auto rule = element_rule(basis, e, opt);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double t = rule.points[q];
      b.setZero();
      for (std::size_t s = 0; s < squad.size(); ++s) {
        const double w = squad.weights[s] * g(t, squad.points[s]);
        const auto &cell = smesh.cells[squad.cell[s]];
        for (int k = 0; k < nloc; ++k)
          b(cell[k]) += w * squad.shape[s][k];
      }
      basis.eval_local(e, t, vals.data(), dts.data());
      for (int a = 0; a < nl; ++a)
        moments.col(extended_index(dofs[a], M)) += (rule.weights[q] * vals[a]) * b;
    }
  }

  Eigen::SimplicialLDLT<ColSparse> mx(ColSparse(sx.M_full));
  if (mx.info() != Eigen::Success)
    throw std::runtime_error("project_rhs: spatial mass matrix factorization failed");
  const Eigen::MatrixXd X = mx.solve(moments);
  const Eigen::LDLT<Eigen::MatrixXd> mt(temporal_mass_extended(basis));
  return mt.solve(X.transpose()).transpose();
}

Eigen::MatrixXd rhs_from_projection(const Eigen::MatrixXd &projection, const TemporalMatrices &tm,
                                    const SpatialSystem &sx)
{
  const auto M = tm.M_ht_ext.rows();
  if (tm.M_ht_ext.cols() != M + 1 || projection.cols() != M + 1 || projection.rows() != sx.M_rows.cols())
    throw std::invalid_argument("rhs_from_projection: dimension mismatch");
  return sx.M_rows * projection * tm.M_ht_ext.transpose();
}

KroneckerOperator::KroneckerOperator(const TemporalMatrices &tm, const SpatialSystem &sx)
    : At_(tm.A_ht), Mt_(tm.M_ht), Mx_(sx.M), Ax_(sx.A)
{
  check_dimensions(tm, sx);
}

Eigen::MatrixXd KroneckerOperator::apply(const Eigen::MatrixXd &X) const
{
  if (X.rows() != spatial_size() || X.cols() != temporal_size())
    throw std::invalid_argument("KroneckerOperator::apply: expected an N x M array");
  return Mx_ * X * At_.transpose() + Ax_ * X * Mt_.transpose();
}

Eigen::VectorXd KroneckerOperator::apply(const Eigen::VectorXd &x) const
{
  if (x.size() != size())
    throw std::invalid_argument("KroneckerOperator::apply: vector length is not M*N");
  const Eigen::MatrixXd Y = apply(Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(x.data(), spatial_size(), temporal_size())));
  return Eigen::Map<const Eigen::VectorXd>(Y.data(), Y.size());
}

Eigen::MatrixXd KroneckerOperator::dense(long max_size) const
{
  if (size() > max_size)
    throw std::length_error("KroneckerOperator::dense: " + std::to_string(size()) + " unknowns exceed the limit "
                            + std::to_string(max_size));
  const int N = spatial_size(), M = temporal_size();
  const Eigen::MatrixXd Mx = Eigen::MatrixXd(Mx_), Ax = Eigen::MatrixXd(Ax_);
  Eigen::MatrixXd B(size(), size());
  for (int k = 0; k < M; ++k)
    for (int l = 0; l < M; ++l)
      B.block(static_cast<long>(k) * N, static_cast<long>(l) * N, N, N) = At_(k, l) * Mx + Mt_(k, l) * Ax;
  return B;
}

Eigen::SparseMatrix<double> KroneckerOperator::sparse() const
{
  const int N = spatial_size(), M = temporal_size();
  // union pattern of M_x and A_x
  const ColSparse Mx(Mx_), Ax(Ax_);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(M) * M * (Mx.nonZeros() + Ax.nonZeros()));
  for (int k = 0; k < M; ++k)
    for (int l = 0; l < M; ++l) {
      const long r0 = static_cast<long>(k) * N, c0 = static_cast<long>(l) * N;
      for (int c = 0; c < N; ++c) {
        for (ColSparse::InnerIterator it(Mx, c); it; ++it)
          trip.emplace_back(r0 + it.row(), c0 + c, At_(k, l) * it.value());
        for (ColSparse::InnerIterator it(Ax, c); it; ++it)
          trip.emplace_back(r0 + it.row(), c0 + c, Mt_(k, l) * it.value());
      }
    }
  Eigen::SparseMatrix<double> B(size(), size());
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

std::string to_string(SolverKind kind)
{
  return kind == SolverKind::reference_dense ? "reference-dense" : "bartels-stewart";
}

SolverKind solver_kind_from_string(const std::string &name)
{
  if (name == "reference-dense" || name == "dense")
    return SolverKind::reference_dense;
  if (name == "bartels-stewart" || name == "bs")
    return SolverKind::bartels_stewart;
  throw std::invalid_argument("unknown solver strategy '" + name + "' (expected reference-dense or bartels-stewart)");
}

double relative_residual(const KroneckerOperator &op, const Eigen::MatrixXd &U, const Eigen::MatrixXd &G)
{
  const double r = (op.apply(U) - G).norm();
  const double g = G.norm();
  return g > 0.0 ? r / g : r;
}

namespace {

Eigen::MatrixXd solve_reference(const KroneckerOperator &op, const Eigen::MatrixXd &G, const SolverStrategy &s)
{
  const long n = op.size();
  if (n > s.memory_guard)
    throw std::length_error("reference solver: " + std::to_string(n)
                            + " unknowns exceed the memory guard; use bartels-stewart");
  const Eigen::Map<const Eigen::VectorXd> g(G.data(), G.size());
  Eigen::VectorXd x;
  if (n <= s.dense_limit) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.dense(s.dense_limit));
    x = lu.solve(g);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(op.sparse());
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("reference solver: sparse LU failed: " + lu.lastErrorMessage());
    x = lu.solve(g);
  }
  if (!x.allFinite())
    throw std::runtime_error("reference solver: singular system matrix");
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), G.rows(), G.cols());
}

// M_x X A_t + A_x X M_t^T = G with A_t = L L^T.
//   Z = U L,  C = L^-1 M_t^T L^-T = Q S Q^T,  X = Z Q
//   M_x X + A_x X S = G L^-T Q, swept column block by column block.
Eigen::MatrixXd solve_bartels_stewart(const TemporalMatrices &tm, const SpatialSystem &sx, const Eigen::MatrixXd &G,
                                      const SolverStrategy &s)
{
  const int M = static_cast<int>(tm.A_ht.rows());
  const int N = sx.size();
  const Eigen::MatrixXd As = 0.5 * (tm.A_ht + tm.A_ht.transpose());
  const Eigen::LLT<Eigen::MatrixXd> llt(As);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("bartels-stewart: temporal stiffness matrix is not positive definite");
  const auto L = llt.matrixL();
  const Eigen::MatrixXd X1 = L.solve(tm.M_ht.transpose());
  const Eigen::MatrixXd C = L.solve(X1.transpose()).transpose();
  const auto schur = real_schur(C, s.schur_tol, s.schur_sweeps_per_row);
  const Eigen::MatrixXd &S = schur.S;
  const Eigen::MatrixXd H = L.solve(G.transpose()).transpose() * schur.Q;

  const ColSparse Mx(sx.M), Ax(sx.A);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, M);

  Eigen::SimplicialLDLT<ColSparse> ldlt;
  bool ldlt_analyzed = false;
  Eigen::SparseLU<ColSparse> lu;
  bool lu_analyzed = false;
  // 2N blocks share one pattern (all four A slots stored even when a
  // coefficient vanishes), so the symbolic analysis is done once
  ColSparse K2;

  Eigen::VectorXd acc(N), rhs(N);
  for (int j = 0; j < M;) {
    const int bs = schur_block_size(S, j);
    if (bs == 1) {
      acc.setZero();
      for (int i = 0; i < j; ++i)
        if (S(i, j) != 0.0)
          acc += S(i, j) * X.col(i);
      rhs = H.col(j) - Ax * acc;
      const ColSparse K = Mx + S(j, j) * Ax;
      if (!ldlt_analyzed) {
        ldlt.analyzePattern(K);
        ldlt_analyzed = true;
      }
      ldlt.factorize(K);
      if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("bartels-stewart: spatial block factorization failed at column " + std::to_string(j));
      X.col(j) = ldlt.solve(rhs);
      j += 1;
      continue;
    }
    Eigen::VectorXd r2(2 * N);
    for (int c = 0; c < 2; ++c) {
      acc.setZero();
      for (int i = 0; i < j; ++i)
        if (S(i, j + c) != 0.0)
          acc += S(i, j + c) * X.col(i);
      r2.segment(c * N, N) = H.col(j + c) - Ax * acc;
    }
    const double a = S(j, j), b = S(j + 1, j), c = S(j, j + 1), d = S(j + 1, j + 1);
    // rows j: M x_j + A (a x_j + b x_{j+1}); rows j+1: M x_{j+1} + A (c x_j + d x_{j+1})
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * (Mx.nonZeros() + Ax.nonZeros()));
    for (int col = 0; col < N; ++col) {
      for (ColSparse::InnerIterator it(Mx, col); it; ++it) {
        trip.emplace_back(it.row(), col, it.value());
        trip.emplace_back(N + it.row(), N + col, it.value());
      }
      for (ColSparse::InnerIterator it(Ax, col); it; ++it) {
        trip.emplace_back(it.row(), col, a * it.value());
        trip.emplace_back(it.row(), N + col, b * it.value());
        trip.emplace_back(N + it.row(), col, c * it.value());
        trip.emplace_back(N + it.row(), N + col, d * it.value());
      }
    }
    K2.resize(2 * N, 2 * N);
    K2.setFromTriplets(trip.begin(), trip.end());
    if (!lu_analyzed) {
      lu.analyzePattern(K2);
      lu_analyzed = true;
    }
    lu.factorize(K2);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("bartels-stewart: 2x2 block factorization failed at column " + std::to_string(j));
    const Eigen::VectorXd x2 = lu.solve(r2);
    X.col(j) = x2.head(N);
    X.col(j + 1) = x2.tail(N);
    j += 2;
  }
  // U = Z L^-1 = X Q^T L^-1
  const Eigen::MatrixXd Z = X * schur.Q.transpose();
  return L.transpose().solve(Z.transpose()).transpose();
}

} // namespace

SpaceTimeSolution solve(const TemporalMatrices &tm, const SpatialSystem &sx, const Eigen::MatrixXd &G,
                        const SolverStrategy &strategy)
{
  const KroneckerOperator op(tm, sx);
  if (G.rows() != op.spatial_size() || G.cols() != op.temporal_size())
    throw std::invalid_argument("solve: right-hand side must be N x M");
  SpaceTimeSolution sol;
  sol.used = strategy.kind;
  if (strategy.kind == SolverKind::bartels_stewart) {
    try {
      sol.U = solve_bartels_stewart(tm, sx, G, strategy);
    } catch (const SchurFailure &e) {
      if (op.size() > strategy.memory_guard)
        throw;
      sol.warnings.push_back(std::string(e.what()) + "; falling back to the reference solver");
      sol.used = SolverKind::reference_dense;
      sol.U = solve_reference(op, G, strategy);
    }
  } else {
    sol.U = solve_reference(op, G, strategy);
  }
  if (!sol.U.allFinite())
    throw std::runtime_error("solve: non-finite solution (singular factorization)");
  sol.residual = relative_residual(op, sol.U, G);
  if (sol.residual > strategy.residual_tol)
    sol.warnings.push_back("relative residual " + std::to_string(sol.residual) + " above tolerance");
  return sol;
}

Eigen::VectorXd solution_slice(const SpaceTimeSolution &sol, const TemporalBasis &basis, const SpatialSystem &sx,
                               double t, int derivative)
{
  const auto &mesh = basis.mesh();
  const int e = mesh.locate(t);
  const auto &dofs = basis.element_dofs(e);
  std::vector<double> vals(dofs.size()), dts(dofs.size());
  basis.eval_local(e, t, vals.data(), dts.data());
  Eigen::VectorXd free = Eigen::VectorXd::Zero(sx.size());
  for (std::size_t a = 0; a < dofs.size(); ++a)
    if (dofs[a] != TemporalBasis::initial_vertex)
      free += (derivative == 0 ? vals[a] : dts[a]) * sol.U.col(dofs[a]);
  Eigen::VectorXd all = Eigen::VectorXd::Zero(sx.mesh.num_vertices());
  for (int i = 0; i < sx.size(); ++i)
    all(sx.vertex_of_dof[i]) = free(i);
  return all;
}

double evaluate_solution(const SpaceTimeSolution &sol, const TemporalBasis &basis, const SpatialSystem &sx,
                         double t, const Point2 &x, int derivative)
{
  const auto &m = sx.mesh;
  if (t < 0.0 || t > basis.mesh().final_time())
    throw std::out_of_range("evaluate_solution: time outside (0,T)");
  // barycentric search; fine for diagnostics
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto &cell = m.cells[c];
    double lam[3] = {0, 0, 0};
    if (m.dim == 1) {
      const double a = m.vertices[cell[0]][0], b = m.vertices[cell[1]][0];
      if (x[0] < std::min(a, b) - 1e-14 || x[0] > std::max(a, b) + 1e-14)
        continue;
      lam[1] = (x[0] - a) / (b - a);
      lam[0] = 1.0 - lam[1];
    } else {
      const auto &p0 = m.vertices[cell[0]], &p1 = m.vertices[cell[1]], &p2 = m.vertices[cell[2]];
      const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
      lam[1] = ((x[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (x[1] - p0[1])) / det;
      lam[2] = ((p1[0] - p0[0]) * (x[1] - p0[1]) - (x[0] - p0[0]) * (p1[1] - p0[1])) / det;
      lam[0] = 1.0 - lam[1] - lam[2];
      if (std::min({lam[0], lam[1], lam[2]}) < -1e-12)
        continue;
    }
    const Eigen::VectorXd v = solution_slice(sol, basis, sx, t, derivative);
    double r = 0.0;
    for (int k = 0; k < (m.dim == 1 ? 2 : 3); ++k)
      r += lam[k] * v(cell[k]);
    return r;
  }
  throw std::out_of_range("evaluate_solution: point outside the spatial domain");
}

Eigen::VectorXd solve_parametric_ivp(double mu, const std::function<double(double)> &f, const TemporalBasis &basis,
                                     const TemporalMatrices &tm, const ProjectionOptions &opt)
{
  if (!(mu >= 0.0))
    throw std::invalid_argument("solve_parametric_ivp: mu must be nonnegative");
  const auto &mesh = basis.mesh();
  const int M = basis.size();
  if (tm.A_ht.rows() != M || tm.M_ht_ext.rows() != M || tm.M_ht_ext.cols() != M + 1)
    throw std::invalid_argument("solve_parametric_ivp: temporal matrices do not match the basis");
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(M + 1);
  std::vector<double> vals, dts;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto &dofs = basis.element_dofs(e);
    vals.resize(dofs.size());
    dts.resize(dofs.size());
    const auto rule = element_rule(basis, e, opt);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      basis.eval_local(e, rule.points[q], vals.data(), dts.data());
      const double w = rule.weights[q] * f(rule.points[q]);
      for (std::size_t a = 0; a < dofs.size(); ++a)
        moments(extended_index(dofs[a], M)) += w * vals[a];
    }
  }
  const Eigen::VectorXd c = Eigen::LDLT<Eigen::MatrixXd>(temporal_mass_extended(basis)).solve(moments);
  const Eigen::VectorXd rhs = tm.M_ht_ext * c;
  const Eigen::MatrixXd K = tm.A_ht + mu * tm.M_ht;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(K).solve(rhs);
}

std::uint64_t mesh_hash(const SpatialMesh &mesh)
{
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const void *data, std::size_t n) {
    const auto *bytes = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  mix(&mesh.dim, sizeof mesh.dim);
  for (const auto &v : mesh.vertices)
    mix(v.data(), sizeof(double) * 2);
  for (const auto &c : mesh.cells)
    mix(c.data(), sizeof(int) * 3);
  return h;
}

void write_solution(const std::string &path, const SpaceTimeSolution &sol, std::uint64_t temporal_hash,
                    std::uint64_t spatial_hash)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("write_solution: cannot open " + path);
  const std::int64_t M = sol.U.cols(), N = sol.U.rows();
  f.write(reinterpret_cast<const char *>(&M), sizeof M);
  f.write(reinterpret_cast<const char *>(&N), sizeof N);
  f.write(reinterpret_cast<const char *>(&temporal_hash), sizeof temporal_hash);
  f.write(reinterpret_cast<const char *>(&spatial_hash), sizeof spatial_hash);
  f.write(reinterpret_cast<const char *>(sol.U.data()), sizeof(double) * sol.U.size());
  if (!f)
    throw std::runtime_error("write_solution: write failed for " + path);
}

SolutionDump read_solution(const std::string &path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("read_solution: cannot open " + path);
  std::int64_t M = -1, N = -1;
  SolutionDump d;
  f.read(reinterpret_cast<char *>(&M), sizeof M);
  f.read(reinterpret_cast<char *>(&N), sizeof N);
  f.read(reinterpret_cast<char *>(&d.temporal_hash), sizeof d.temporal_hash);
  f.read(reinterpret_cast<char *>(&d.spatial_hash), sizeof d.spatial_hash);
  if (!f || M < 0 || N < 0)
    throw std::runtime_error("read_solution: bad header in " + path);
  d.U.resize(N, M);
  f.read(reinterpret_cast<char *>(d.U.data()), sizeof(double) * d.U.size());
  if (!f)
    throw std::runtime_error("read_solution: truncated file " + path);
  return d;
}

} // namespace sthp
