#ifndef STHP_FRACTIONAL_NORMS_HPP
#define STHP_FRACTIONAL_NORMS_HPP

// Series and quadrature oracles for H^{1/2}_{0,} norms and the modified
// Hilbert transform. Test-only: the solver never links against these.

#include "sthp/hilbert.hpp"
#include "sthp/temporal.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <vector>

namespace sthp::oracle {

/// v(t) = sum_k coeffs[k] V_k(t), V_k = sqrt(2/(b-a)) sin((pi/2 + k pi)(t-a)/(b-a)).
struct FourierExpansion
{
  double a = 0.0;
  double b = 1.0;
  std::vector<double> coeffs;

  double length() const { return b - a; }
  double frequency(int k) const; // sqrt(lambda_k)
  double value(double t) const;
  double derivative(double t) const;
  /// sum_k coeffs[k] sqrt(2/(b-a)) cos((pi/2 + k pi)(t-a)/(b-a))
  double hilbert_transform(double t) const;
};

double sine_mode(int k, double a, double b, double t);
double cosine_mode(int k, double a, double b, double t);

FourierExpansion fourier_coefficients(const std::function<double(double)> &v, double a, double b, int K,
                                      int quad_n);

/// Random expansion with coefficients ~ N(0,1) * (k+1)^(-decay).
FourierExpansion random_expansion(std::mt19937_64 &rng, double a, double b, int K, double decay);

double l2_norm(const FourierExpansion &e);
double h12_norm(const FourierExpansion &e);
double h1_seminorm(const FourierExpansion &e); // ||d/dt v||_{L2}

/// Pointwise series evaluation of H_T v at t.
double hilbert_transform_series(const FourierExpansion &e, double t);

/// <d/dt v, H_T v> and <v, H_T v> evaluated by composite Gauss quadrature of the
/// pointwise series (independent of the norm formula).
double ellipticity_form_quadrature(const FourierExpansion &e, int pieces, int n);
double positivity_form_quadrature(const FourierExpansion &e, int pieces, int n);
double symmetry_form_quadrature(const FourierExpansion &w, const FourierExpansion &v, int pieces, int n);

/// Slobodetskii triple norm. Throws std::domain_error when |v(a)| > 1e-12 since
/// the weighted term diverges.
double slobodetskii_triple_norm(const std::function<double(double)> &v, double a, double b, int n);
double slobodetskii_seminorm_sq(const std::function<double(double)> &v, double a, double b, int n);

struct PoincareReport
{
  // ratio lhs / rhs for the three inequalities; all <= 1, equality for V_0
  double l2_vs_h12 = 0.0;
  double h12_vs_h1 = 0.0;
  double l2_vs_h1 = 0.0;
};

PoincareReport check_poincare(const FourierExpansion &e);

/// ||v||_{H^{1/2}} <= sqrt(||v|| ||v'||); returns (lhs, rhs).
std::pair<double, double> check_interpolation_inequality(const FourierExpansion &e);

/// Returns (|v|^2_{H^{1/2}(a,b)}, right-hand side of the localization bound at tau).
std::pair<double, double> check_localization(const std::function<double(double)> &v, double a, double b,
                                             double tau, int n);

/// Exact sine and cosine coefficients (first K modes) of a global temporal basis
/// function or its derivative, from closed-form Legendre/Bessel integrals.
/// dof = -1 selects the hat function at t = 0.
struct ModeCoefficients
{
  Eigen::VectorXd sine;   // int phi V_n
  Eigen::VectorXd cosine; // int phi W_n
};

ModeCoefficients basis_mode_coefficients(const TemporalBasis &basis, int dof, int derivative, int K);

/// Sine coefficients of sum_k x_k phi_k.
Eigen::VectorXd expansion_sine_coefficients(const TemporalBasis &basis, const Eigen::VectorXd &x, int K);

/// M_ht and A_ht (extended by the t=0 column) from the truncated series
/// sum_n (phi_k, V_n)(b, W_n).
TemporalMatrices series_hilbert_matrices(const TemporalBasis &basis, int K);

} // namespace sthp::oracle

#endif
