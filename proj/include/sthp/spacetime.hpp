#ifndef STHP_SPACETIME_HPP
#define STHP_SPACETIME_HPP

#include "sthp/hilbert.hpp"
#include "sthp/spatial.hpp"
#include "sthp/temporal.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sthp {

using SpaceTimeFunction = std::function<double(double t, const Point2 &x)>;

/// Quadrature used for right-hand side moments.
struct ProjectionOptions
{
  int temporal_extra = 8;   // Gauss points per element: p_j + temporal_extra
  int first_element_levels = 0; // > 0: geometric composite on the first element (data singular at t = 0)
  int spatial_degree = 4;
};

/// Plain L2 mass matrix of the temporal space without initial condition; the
/// hat at t = 0 is the last index M.
Eigen::MatrixXd temporal_mass_extended(const TemporalBasis &basis);

/// Space-time L2 projection of g onto the unconstrained tensor space. Returns
/// an N_all x (M+1) array: row = mesh vertex, column = temporal dof (M is the
/// t = 0 hat).
Eigen::MatrixXd project_rhs(const SpaceTimeFunction &g, const TemporalBasis &basis, const SpatialSystem &sx,
                            const ProjectionOptions &opt = {});

/// Moments <Pi g, H_T phi_k psi_i> for free vertices i: N x M.
Eigen::MatrixXd rhs_from_projection(const Eigen::MatrixXd &projection, const TemporalMatrices &tm,
                                    const SpatialSystem &sx);

/// x -> (A_ht kron M_x + M_ht kron A_x) x with x = vec(X), X of size N x M
/// (space index fastest).
class KroneckerOperator
{
public:
  KroneckerOperator(const TemporalMatrices &tm, const SpatialSystem &sx);

  int temporal_size() const { return static_cast<int>(At_.rows()); }
  int spatial_size() const { return static_cast<int>(Mx_.rows()); }
  long size() const { return static_cast<long>(temporal_size()) * spatial_size(); }

  Eigen::MatrixXd apply(const Eigen::MatrixXd &X) const;
  Eigen::VectorXd apply(const Eigen::VectorXd &x) const;

  /// Explicit matrix; throws std::length_error above max_size unknowns.
  Eigen::MatrixXd dense(long max_size = 20000) const;
  Eigen::SparseMatrix<double> sparse() const;

private:
  Eigen::MatrixXd At_, Mt_;
  SparseMatrix Mx_, Ax_;
};

enum class SolverKind
{
  reference_dense,
  bartels_stewart
};

std::string to_string(SolverKind kind);
/// Throws std::invalid_argument for unknown names.
SolverKind solver_kind_from_string(const std::string &name);

struct SolverStrategy
{
  SolverKind kind = SolverKind::bartels_stewart;
  double residual_tol = 1e-10;
  double schur_tol = 1e-12;
  int schur_sweeps_per_row = 40;
  // reference path: dense LU up to this many unknowns, sparse LU of the same
  // matrix above
  long dense_limit = 6000;
  // refuse to materialize anything above this size
  long memory_guard = 20000000;

  bool operator==(const SolverStrategy &) const = default;
};

struct SpaceTimeSolution
{
  Eigen::MatrixXd U; // N x M, column l holds the spatial coefficients of phi_l
  double residual = 0.0;
  SolverKind used = SolverKind::bartels_stewart;
  std::vector<std::string> warnings;

  int temporal_size() const { return static_cast<int>(U.cols()); }
  int spatial_size() const { return static_cast<int>(U.rows()); }
};

/// Solve the Petrov-Galerkin system for the right-hand side G (N x M). Throws
/// std::runtime_error when a factorization breaks down and std::length_error
/// when the memory guard refuses the reference path.
SpaceTimeSolution solve(const TemporalMatrices &tm, const SpatialSystem &sx, const Eigen::MatrixXd &G,
                        const SolverStrategy &strategy = {});

/// ||B u - G|| / ||G|| (||B u|| when G = 0).
double relative_residual(const KroneckerOperator &op, const Eigen::MatrixXd &U, const Eigen::MatrixXd &G);

/// Vertex values (all vertices, zero on the Dirichlet boundary) of u or d/dt u at time t.
Eigen::VectorXd solution_slice(const SpaceTimeSolution &sol, const TemporalBasis &basis, const SpatialSystem &sx,
                               double t, int derivative);

/// Point evaluation; throws std::out_of_range outside the space-time cylinder.
double evaluate_solution(const SpaceTimeSolution &sol, const TemporalBasis &basis, const SpatialSystem &sx,
                         double t, const Point2 &x, int derivative = 0);

/// (A_ht + mu M_ht) u = rhs with rhs_k = <Pi f, H_T phi_k>, Pi the temporal L2
/// projection onto the unconstrained space.
Eigen::VectorXd solve_parametric_ivp(double mu, const std::function<double(double)> &f, const TemporalBasis &basis,
                                     const TemporalMatrices &tm, const ProjectionOptions &opt = {});

std::uint64_t mesh_hash(const SpatialMesh &mesh);

/// Binary dump: int64 M, int64 N, uint64 temporal hash, uint64 spatial hash,
/// then U column by column.
void write_solution(const std::string &path, const SpaceTimeSolution &sol, std::uint64_t temporal_hash,
                    std::uint64_t spatial_hash);
struct SolutionDump
{
  Eigen::MatrixXd U;
  std::uint64_t temporal_hash = 0;
  std::uint64_t spatial_hash = 0;
};
SolutionDump read_solution(const std::string &path);

} // namespace sthp

#endif
