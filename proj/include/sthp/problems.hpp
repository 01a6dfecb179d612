#ifndef STHP_PROBLEMS_HPP
#define STHP_PROBLEMS_HPP

#include "sthp/spacetime.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace sthp {

/// Batched evaluation of u and d/dt u on a fixed set of spatial points.
class SliceEvaluator
{
public:
  virtual ~SliceEvaluator() = default;
  /// u(s, q) and du(s, q) at spatial point s and time ts[q].
  virtual void eval(const std::vector<double> &ts, Eigen::MatrixXd &u, Eigen::MatrixXd &du) const = 0;
};

/// Hint for integrating the first temporal element when d/dt u is not smooth at t = 0.
enum class InitialLayer
{
  none,
  sqrt_like,  // bounded, d/dt u ~ 1 - c sqrt(t): geometric composite
  power       // d/dt u ~ t^(-alpha): substitution t = t_1 s^k
};

struct ManufacturedProblem
{
  std::string name;
  int dim = 1;
  double T = 2.0;
  std::string domain; // "interval" (0,1) or "lshape"
  SpaceTimeFunction g;
  SpaceTimeFunction u;
  SpaceTimeFunction du_dt;
  int series_truncation = 0;
  InitialLayer layer = InitialLayer::none;
  std::function<std::unique_ptr<SliceEvaluator>(const std::vector<Point2> &)> slice;

  /// Uses `slice` if set, otherwise pointwise calls of u and du_dt.
  std::unique_ptr<SliceEvaluator> make_slice(const std::vector<Point2> &points) const;
};

/// g = 1 on (0,2)x(0,1) with the truncated sine series solution.
ManufacturedProblem problem_u1(int truncation = 1000);
/// L-shape, t e^{-t} times the corner singular function plus a smooth part.
ManufacturedProblem problem_u2();
/// As u2 with temporal factor t^{3/5} e^{-t}.
ManufacturedProblem problem_u3();

/// Registry lookup ("u1", "u2", "u3"); throws std::invalid_argument otherwise.
ManufacturedProblem make_problem(const std::string &name);
std::vector<std::string> problem_names();

/// User supplied problem; du_dt may be empty for data-only use.
ManufacturedProblem make_generic_problem(std::string name, int dim, double T, std::string domain, SpaceTimeFunction g,
                                         SpaceTimeFunction u, SpaceTimeFunction du_dt);

/// C^2 cutoff: 1 for r <= 1/4, quintic blend, 0 for r > 3/4. d1, d2 receive
/// the first two radial derivatives when non-null.
double cutoff(double r, double *d1 = nullptr, double *d2 = nullptr);

/// Angle in (0, 2 pi], counterclockwise from the positive x1 axis.
double angle(const Point2 &x);

/// r^{2/3} sin(2/3 (theta - pi/2)); zero at the origin.
double corner_singular_function(const Point2 &x);

/// cutoff * corner singular function and its Laplacian.
double singular_profile(const Point2 &x);
double singular_profile_laplacian(const Point2 &x);

} // namespace sthp

#endif
