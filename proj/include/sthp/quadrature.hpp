#ifndef STHP_QUADRATURE_HPP
#define STHP_QUADRATURE_HPP

#include <array>
#include <functional>
#include <vector>

namespace sthp {

/// Quadrature rule on the reference interval [-1,1].
struct QuadratureRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
  int degree_exactness = 0;

  std::size_t size() const { return weights.size(); }
};

/// Rule on (0,1) for the weight ln(x): sum_i weights[i] * q(nodes[i])
/// reproduces the integral of q(x) ln(x) over (0,1) for deg q <= max_poly_degree.
/// The weights are therefore all negative.
struct LogWeightedRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
  int max_poly_degree = 0;

  std::size_t size() const { return weights.size(); }
};

struct TriangleRule
{
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int degree_exactness = 0;

  std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre rule on [-1,1] computed by Newton iteration on the
/// Legendre polynomial. Throws std::invalid_argument for n == 0.
QuadratureRule gauss_legendre(int n);

/// Cached variant; the returned reference stays valid for the program lifetime.
const QuadratureRule &gauss_legendre_cached(int n);

/// n-point Gauss rule for the weight ln(x) on (0,1), exact for polynomials of
/// degree <= 2n-1. Built from modified moments against shifted Legendre
/// polynomials (modified Chebyshev algorithm) followed by Golub-Welsch.
LogWeightedRule log_weighted_rule(int n);

const LogWeightedRule &log_weighted_rule_cached(int n);

/// Collapsed (Duffy) tensor Gauss rule on the triangle (0,0),(1,0),(0,1) exact
/// for total degree `degree`.
TriangleRule triangle_rule(int degree);

/// Affinely mapped quadrature of f over (a,b).
double integrate_1d(const QuadratureRule &rule, const std::function<double(double)> &f, double a, double b);

/// Physical points and weights of a 1D rule mapped to (a,b).
struct MappedRule
{
  std::vector<double> points;
  std::vector<double> weights;
};

MappedRule map_rule(const QuadratureRule &rule, double a, double b);

/// Composite Gauss rule on (a,b) whose sub-intervals shrink geometrically by
/// `ratio` towards `a`; the innermost piece has length (b-a)*ratio^levels.
MappedRule geometric_composite(int n, double a, double b, double ratio, int levels);

} // namespace sthp

#endif
