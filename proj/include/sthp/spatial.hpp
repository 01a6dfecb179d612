#ifndef STHP_SPATIAL_HPP
#define STHP_SPATIAL_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

namespace sthp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Point2 = std::array<double, 2>;

/// P1 mesh of an interval (dim 1, cells use the first two entries, the third is
/// -1, second coordinate 0) or a triangulation (dim 2). Triangles are stored
/// as (newest vertex, refinement edge endpoints).
struct SpatialMesh
{
  int dim = 1;
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<char> boundary; // per vertex, Dirichlet flag

  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_free() const;
  double cell_diameter(int c) const;
  double cell_measure(int c) const;
  double hx() const;
  double measure() const;
  /// Smallest interior angle over all triangles, in radians (dim 2 only).
  double min_angle() const;
  /// Distance of cell c to the origin.
  double distance_to_origin(int c) const;
};

SpatialMesh uniform_interval_mesh(double x0, double x1, int n_elements);

/// L-shaped domain (-1,1)^2 \ [0,1]^2. Each of the three unit squares is split
/// through its centre into four triangles whose refinement edges are the square
/// sides, so h_x = 1 and two bisection generations halve it.
SpatialMesh lshape_mesh();

/// Newest vertex bisection of the marked cells plus conformity closure. In 1D
/// the marked intervals are halved.
SpatialMesh refine_marked(const SpatialMesh &mesh, const std::vector<char> &marked);

/// 1D: halve every interval. 2D: two bisection generations (quarter-area children).
SpatialMesh refine_uniform(const SpatialMesh &mesh);

/// Bisect until every triangle w satisfies
///   diam(w) <= c * h * max(dist(w,0), h^{1/beta})^{1-beta}   for dist(w,0) <= R,
///   diam(w) <= c * h                                         otherwise.
/// Throws std::invalid_argument for beta outside (0,1] or R <= 0, and
/// std::runtime_error if the input mesh is not conforming.
SpatialMesh refine_graded(const SpatialMesh &mesh, double target_hx, double beta, double R, double c = 1.0);

/// Throws std::runtime_error naming the first hanging vertex or over-shared edge.
void check_conforming(const SpatialMesh &mesh);

/// Plain text: header line, vertices (x y boundary), cells.
void write_mesh_text(std::ostream &out, const SpatialMesh &mesh);

/// Symmetric positive definite coefficient A(x) of the spatial operator.
using Coefficient = std::function<Eigen::Matrix2d(const Point2 &)>;

/// Mass and stiffness matrices on the free (non-Dirichlet) vertices, plus the
/// unconstrained mass matrix used by the right-hand side projection.
struct SpatialSystem
{
  SpatialMesh mesh;
  SparseMatrix M;      // N x N
  SparseMatrix A;      // N x N
  SparseMatrix M_full; // all vertices
  SparseMatrix A_full;
  SparseMatrix M_rows; // free rows of M_full, N x N_all
  std::vector<int> dof_of_vertex; // -1 on the Dirichlet boundary
  std::vector<int> vertex_of_dof;

  int size() const { return static_cast<int>(vertex_of_dof.size()); }
};

/// Local P1 mass and stiffness of cell c (upper-left 2x2 block in 1D).
void p1_element_matrices(const SpatialMesh &mesh, int c, const Coefficient &coefficient, Eigen::Matrix3d &M,
                         Eigen::Matrix3d &A);

/// Assemble P1 matrices. A null coefficient means the identity. Throws
/// std::runtime_error naming the cell for degenerate elements.
SpatialSystem assemble_spatial(const SpatialMesh &mesh, const Coefficient &coefficient = nullptr);

/// Quadrature points over the whole mesh with the P1 shape values of the
/// owning cell (entry 2 unused in 1D).
struct SpatialQuadrature
{
  std::vector<Point2> points;
  std::vector<double> weights;
  std::vector<int> cell;
  std::vector<std::array<double, 3>> shape;

  std::size_t size() const { return weights.size(); }
};

/// Gauss rule per interval or collapsed rule per triangle exact for `degree`.
SpatialQuadrature spatial_quadrature(const SpatialMesh &mesh, int degree);

/// Value of the P1 function with vertex values `values` at quadrature point q.
inline double p1_value(const SpatialMesh &mesh, const SpatialQuadrature &quad, std::size_t q,
                       const double *values)
{
  const auto &c = mesh.cells[quad.cell[q]];
  const auto &s = quad.shape[q];
  double v = s[0] * values[c[0]] + s[1] * values[c[1]];
  if (mesh.dim == 2)
    v += s[2] * values[c[2]];
  return v;
}

} // namespace sthp

#endif
