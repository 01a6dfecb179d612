#include "sthp/fractional_norms.hpp"

#include "sthp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace sthp::oracle {

namespace {

constexpr double pi = std::numbers::pi;

double mode_omega(int k, double L)
{
  return (0.5 * pi + k * pi) / L;
}

template <class F>
double composite_gauss(F &&f, double a, double b, int pieces, int n)
{
  const auto &g = gauss_legendre_cached(n);
  double sum = 0.0;
  const double len = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * len;
    const double h = 0.5 * len;
    for (std::size_t q = 0; q < g.size(); ++q)
      sum += h * g.weights[q] * f(lo + h * (g.nodes[q] + 1.0));
  }
  return sum;
}

// Legendre expansion of local shape `local` (0-based) of a degree-p element,
// in the reference variable; derivative == 1 gives d/dxi.
std::vector<double> shape_legendre(int local, int derivative)
{
  if (local == 0)
    return derivative ? std::vector<double>{-0.5} : std::vector<double>{0.5, -0.5};
  if (local == 1)
    return derivative ? std::vector<double>{0.5} : std::vector<double>{0.5, 0.5};
  const int l = local + 1; // N_l
  std::vector<double> c(l, 0.0);
  if (derivative) {
    c[l - 2] = 1.0;
  } else {
    c[l - 1] = 1.0 / (2 * l - 3);
    c[l - 3] = -1.0 / (2 * l - 3);
  }
  return c;
}

// spherical Bessel functions j_0..j_N at x > 0
void spherical_bessel(int N, double x, double *j)
{
  if (x < 1.0) {
    // power series, terms decay like x^2/(4k(n+k))
    double lead = 1.0; // x^n / (2n+1)!!
    for (int n = 0; n <= N; ++n) {
      if (n > 0)
        lead *= x / (2 * n + 1);
      double term = 1.0, sum = 1.0;
      for (int k = 1; k < 40; ++k) {
        term *= -0.5 * x * x / (k * (2.0 * n + 2 * k + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum))
          break;
      }
      j[n] = lead * sum;
    }
    return;
  }
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  if (x >= N) {
    j[0] = j0;
    if (N >= 1)
      j[1] = j1;
    for (int n = 1; n < N; ++n)
      j[n + 1] = (2 * n + 1) / x * j[n] - j[n - 1];
    return;
  }
  // Miller: downward recurrence, normalized by the larger of j0, j1
  const int start = N + 20 + static_cast<int>(x);
  std::vector<double> f(start + 2, 0.0);
  f[start] = 1e-30;
  for (int n = start; n >= 1; --n) {
    f[n - 1] = (2 * n + 1) / x * f[n] - f[n + 1];
    if (std::abs(f[n - 1]) > 1e100)
      for (int k = n - 1; k <= start; ++k)
        f[k] *= 1e-100;
  }
  const double scale = std::abs(j0) > std::abs(j1) ? j0 / f[0] : j1 / f[1];
  for (int n = 0; n <= N; ++n)
    j[n] = f[n] * scale;
}

} // namespace

double FourierExpansion::frequency(int k) const
{
  return mode_omega(k, length());
}

double sine_mode(int k, double a, double b, double t)
{
  return std::sqrt(2.0 / (b - a)) * std::sin(mode_omega(k, b - a) * (t - a));
}

double cosine_mode(int k, double a, double b, double t)
{
  return std::sqrt(2.0 / (b - a)) * std::cos(mode_omega(k, b - a) * (t - a));
}

double FourierExpansion::value(double t) const
{
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    s += coeffs[k] * sine_mode(static_cast<int>(k), a, b, t);
  return s;
}

double FourierExpansion::derivative(double t) const
{
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    s += coeffs[k] * frequency(static_cast<int>(k)) * cosine_mode(static_cast<int>(k), a, b, t);
  return s;
}

double FourierExpansion::hilbert_transform(double t) const
{
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    s += coeffs[k] * cosine_mode(static_cast<int>(k), a, b, t);
  return s;
}

double hilbert_transform_series(const FourierExpansion &e, double t)
{
  return e.hilbert_transform(t);
}

FourierExpansion fourier_coefficients(const std::function<double(double)> &v, double a, double b, int K, int quad_n)
{
  if (K < 1)
    throw std::invalid_argument("fourier_coefficients: K must be >= 1");
  FourierExpansion e{a, b, std::vector<double>(K)};
  const int pieces = std::max(1, K / 4);
  for (int k = 0; k < K; ++k)
    e.coeffs[k] = composite_gauss([&](double t) { return v(t) * sine_mode(k, a, b, t); }, a, b, pieces, quad_n);
  return e;
}

FourierExpansion random_expansion(std::mt19937_64 &rng, double a, double b, int K, double decay)
{
  std::normal_distribution<double> normal;
  FourierExpansion e{a, b, std::vector<double>(K)};
  for (int k = 0; k < K; ++k)
    e.coeffs[k] = normal(rng) * std::pow(k + 1.0, -decay);
  return e;
}

double l2_norm(const FourierExpansion &e)
{
  double s = 0.0;
  for (double c : e.coeffs)
    s += c * c;
  return std::sqrt(s);
}

double h12_norm(const FourierExpansion &e)
{
  double s = 0.0;
  for (std::size_t k = 0; k < e.coeffs.size(); ++k)
    s += e.frequency(static_cast<int>(k)) * e.coeffs[k] * e.coeffs[k];
  return std::sqrt(s);
}

double h1_seminorm(const FourierExpansion &e)
{
  double s = 0.0;
  for (std::size_t k = 0; k < e.coeffs.size(); ++k) {
    const double w = e.frequency(static_cast<int>(k));
    s += w * w * e.coeffs[k] * e.coeffs[k];
  }
  return std::sqrt(s);
}

double ellipticity_form_quadrature(const FourierExpansion &e, int pieces, int n)
{
  return composite_gauss([&](double t) { return e.derivative(t) * e.hilbert_transform(t); }, e.a, e.b, pieces, n);
}

double positivity_form_quadrature(const FourierExpansion &e, int pieces, int n)
{
  return composite_gauss([&](double t) { return e.value(t) * e.hilbert_transform(t); }, e.a, e.b, pieces, n);
}

double symmetry_form_quadrature(const FourierExpansion &w, const FourierExpansion &v, int pieces, int n)
{
  return composite_gauss([&](double t) { return w.derivative(t) * v.hilbert_transform(t); }, w.a, w.b, pieces, n);
}

double slobodetskii_seminorm_sq(const std::function<double(double)> &v, double a, double b, int n)
{
  // both triangles are equal; on s > t write s = t + (b - t) xi
  const auto &g = gauss_legendre_cached(n);
  double sum = 0.0;
  const double ht = 0.5 * (b - a);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double t = a + ht * (g.nodes[i] + 1.0);
    const double vt = v(t);
    const double len = b - t;
    double inner = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double xi = 0.5 * (g.nodes[j] + 1.0);
      const double s = t + len * xi;
      const double q = (v(s) - vt) / (s - t);
      inner += 0.5 * g.weights[j] * q * q;
    }
    sum += ht * g.weights[i] * inner * len;
  }
  return 2.0 * sum;
}

double slobodetskii_triple_norm(const std::function<double(double)> &v, double a, double b, int n)
{
  if (std::abs(v(a)) > 1e-12)
    throw std::domain_error("slobodetskii_triple_norm: v(a) != 0, the weighted term diverges");
  const auto &g = gauss_legendre_cached(n);
  const double h = 0.5 * (b - a);
  double l2 = 0.0, weighted = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    const double t = a + h * (g.nodes[q] + 1.0);
    const double vt = v(t);
    l2 += h * g.weights[q] * vt * vt;
    weighted += h * g.weights[q] * vt * vt / (t - a);
  }
  return std::sqrt(l2 + slobodetskii_seminorm_sq(v, a, b, n) + weighted);
}

PoincareReport check_poincare(const FourierExpansion &e)
{
  const double c = std::sqrt(2.0 * e.length() / pi);
  const double l2 = l2_norm(e), h12 = h12_norm(e), h1 = h1_seminorm(e);
  PoincareReport r;
  r.l2_vs_h12 = l2 / (c * h12);
  r.h12_vs_h1 = h12 / (c * h1);
  r.l2_vs_h1 = l2 / (c * c * h1);
  return r;
}

std::pair<double, double> check_interpolation_inequality(const FourierExpansion &e)
{
  return {h12_norm(e), std::sqrt(l2_norm(e) * h1_seminorm(e))};
}

std::pair<double, double> check_localization(const std::function<double(double)> &v, double a, double b,
                                             double tau, int n)
{
  const double lhs = slobodetskii_seminorm_sq(v, a, b, n);
  const auto &g = gauss_legendre_cached(n);
  double left = 0.0, right = 0.0;
  const double hl = 0.5 * (tau - a), hr = 0.5 * (b - tau);
  for (std::size_t q = 0; q < g.size(); ++q) {
    const double t = a + hl * (g.nodes[q] + 1.0);
    left += hl * g.weights[q] * v(t) * v(t) / (tau - t);
    const double s = tau + hr * (g.nodes[q] + 1.0);
    right += hr * g.weights[q] * v(s) * v(s) / (s - tau);
  }
  const double rhs
    = slobodetskii_seminorm_sq(v, a, tau, n) + 4.0 * left + 4.0 * right + slobodetskii_seminorm_sq(v, tau, b, n);
  return {lhs, rhs};
}

ModeCoefficients basis_mode_coefficients(const TemporalBasis &basis, int dof, int derivative, int K)
{
  const auto &mesh = basis.mesh();
  const double T = mesh.final_time();
  const double norm = std::sqrt(2.0 / T);
  ModeCoefficients out{Eigen::VectorXd::Zero(K), Eigen::VectorXd::Zero(K)};
  const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto &dofs = basis.element_dofs(e);
    const auto it = std::find(dofs.begin(), dofs.end(), dof);
    if (it == dofs.end())
      continue;
    const int local = static_cast<int>(it - dofs.begin());
    const double h = 0.5 * mesh.length(e);
    const double mid = 0.5 * (mesh.left(e) + mesh.right(e));
    auto c = shape_legendre(local, derivative);
    if (derivative)
      for (double &x : c)
        x /= h;
    std::vector<double> jn(c.size());
    for (int k = 0; k < K; ++k) {
      const double omega = mode_omega(k, T);
      const double kappa = omega * h;
      // int_{-1}^{1} L_n(xi) e^{i kappa xi} dxi = 2 i^n j_n(kappa)
      spherical_bessel(static_cast<int>(c.size()) - 1, kappa, jn.data());
      std::complex<double> ref = 0.0;
      for (std::size_t n = 0; n < c.size(); ++n)
        if (c[n] != 0.0)
          ref += c[n] * 2.0 * ipow[n % 4] * jn[n];
      const std::complex<double> full = h * std::exp(std::complex<double>(0.0, omega * mid)) * ref;
      out.sine[k] += norm * full.imag();
      out.cosine[k] += norm * full.real();
    }
  }
  return out;
}

Eigen::VectorXd expansion_sine_coefficients(const TemporalBasis &basis, const Eigen::VectorXd &x, int K)
{
  Eigen::VectorXd s = Eigen::VectorXd::Zero(K);
  for (int k = 0; k < basis.size(); ++k)
    if (x[k] != 0.0)
      s += x[k] * basis_mode_coefficients(basis, k, 0, K).sine;
  return s;
}

TemporalMatrices series_hilbert_matrices(const TemporalBasis &basis, int K)
{
  const int M = basis.size();
  Eigen::MatrixXd S(K, M), C(K, M + 1), D(K, M + 1);
  for (int k = 0; k <= M; ++k) {
    const int dof = k == M ? TemporalBasis::initial_vertex : k;
    const auto v = basis_mode_coefficients(basis, dof, 0, K);
    const auto d = basis_mode_coefficients(basis, dof, 1, K);
    if (k < M)
      S.col(k) = v.sine;
    C.col(k) = v.cosine;
    D.col(k) = d.cosine;
  }
  TemporalMatrices out;
  out.M_ht_ext = S.transpose() * C;
  out.A_ht_ext = S.transpose() * D;
  out.M_ht = out.M_ht_ext.leftCols(M);
  out.A_ht = out.A_ht_ext.leftCols(M);
  out.mesh_hash = basis.mesh().hash();
  return out;
}

} // namespace sthp::oracle
