#ifndef STHP_TEMPORAL_HPP
#define STHP_TEMPORAL_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sthp {

/// Parameters of a geometric temporal mesh on (0,T): m1 elements graded
/// geometrically towards t=0 on (0,T1), T1 = min(1,T), followed by m2
/// uniform elements on (T1,T).
struct TemporalMeshSpec
{
  double T = 1.0;
  double sigma = 0.5;
  double mu_hp = 1.0;
  int m1 = 3;
  int m2 = 0;
};

/// Partition 0 = t_0 < ... < t_m = T of (0,T) with one polynomial degree per
/// element. Elements are indexed from 0 here; element e covers (t_e, t_{e+1}).
class TemporalMesh
{
public:
  TemporalMesh() = default;
  TemporalMesh(std::vector<double> breakpoints, std::vector<int> degrees);

  int num_elements() const { return static_cast<int>(degrees_.size()); }
  double final_time() const { return breakpoints_.back(); }
  double left(int e) const { return breakpoints_[e]; }
  double right(int e) const { return breakpoints_[e + 1]; }
  double length(int e) const { return breakpoints_[e + 1] - breakpoints_[e]; }
  int degree(int e) const { return degrees_[e]; }
  double k_max() const;
  int max_degree() const;

  /// Dimension of the trial space (vertex at t=0 excluded): sum of the degrees.
  int dofs() const;

  const std::vector<double> &breakpoints() const { return breakpoints_; }
  const std::vector<int> &degrees() const { return degrees_; }

  /// Index of the element containing t; breakpoints belong to the element on
  /// their right except t = T.
  int locate(double t) const;

  /// Table with columns j, t_j, k_j, p_j.
  std::string table() const;

  /// FNV-1a hash of breakpoints and degrees, used in binary dump headers.
  std::uint64_t hash() const;

private:
  std::vector<double> breakpoints_;
  std::vector<int> degrees_;
};

/// Geometric mesh with degrees p_1 = 1, p_j = floor(mu_hp*j) for 2<=j<=m1 and
/// floor(mu_hp*m1) on the uniform part. Throws std::invalid_argument for
/// sigma outside (0,1), m1 <= 2, mu_hp < 1, or when the mesh cannot reach T
/// (T > 1 with m2 = 0).
TemporalMesh build_mesh(const TemporalMeshSpec &spec);

TemporalMesh uniform_mesh(double T, int m, int p);

/// Advisory checks of the slope and uniform-element conditions for an
/// analytic forcing with constants (delta, epsilon). Returns human readable
/// warnings; an empty result means both conditions hold.
std::vector<std::string> check_parameter_conditions(const TemporalMeshSpec &spec, double delta, double epsilon);

/// Legendre polynomials L_0..L_n at x.
void legendre_values(int n, double x, double *out);

/// Lobatto shapes N_1..N_{p+1} on [-1,1] and their xi-derivatives. N_1, N_2
/// are the vertex hats, N_l = int_{-1}^{xi} L_{l-2} for l >= 3.
void lobatto_shapes(int p, double xi, double *values, double *derivatives);

/// Continuous piecewise polynomial basis vanishing at t=0. Vertex functions
/// of t_1..t_m come first, then the bubbles element by element.
class TemporalBasis
{
public:
  static constexpr int initial_vertex = -1;

  explicit TemporalBasis(TemporalMesh mesh);

  const TemporalMesh &mesh() const { return mesh_; }
  int size() const { return size_; }

  /// Global index of local shape `local` (0 = left vertex, 1 = right vertex,
  /// 2.. = bubbles) on element e, or initial_vertex for the hat at t=0.
  int global_dof(int e, int local) const { return connectivity_[e][local]; }
  const std::vector<int> &element_dofs(int e) const { return connectivity_[e]; }

  /// Value (derivative = 0) or time derivative (derivative = 1) of a global
  /// basis function (initial_vertex: the hat at t = 0). Throws
  /// std::out_of_range for an invalid index.
  double eval(int dof, double t, int derivative) const;

  /// All local shapes of element e at physical time t, with d/dt derivatives.
  void eval_local(int e, double t, double *values, double *derivatives) const;

  /// Value and derivative of sum_k coeffs[k] phi_k at t.
  std::pair<double, double> evaluate(const Eigen::VectorXd &coeffs, double t) const;

private:
  TemporalMesh mesh_;
  int size_ = 0;
  std::vector<std::vector<int>> connectivity_;
};

/// Quasi-interpolant: nodal at the breakpoints, and on every element the
/// derivative is the L2 projection of v' onto degree p_e - 1. Requires v(0)=0.
Eigen::VectorXd quasi_interpolant(const TemporalBasis &basis,
                                  const std::function<double(double)> &v,
                                  const std::function<double(double)> &dv);

} // namespace sthp

#endif
