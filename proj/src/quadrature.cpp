#include "sthp/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sthp {

QuadratureRule gauss_legendre(int n)
{
  if (n <= 0)
    throw std::invalid_argument("gauss_legendre: number of points must be positive, got " + std::to_string(n));

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.degree_exactness = 2 * n - 1;

  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15)
        break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1)
    rule.nodes[n / 2] = 0.0;
  return rule;
}

const QuadratureRule &gauss_legendre_cached(int n)
{
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[n];
  if (!slot)
    slot = std::make_unique<QuadratureRule>(gauss_legendre(n));
  return *slot;
}

LogWeightedRule log_weighted_rule(int n)
{
  if (n <= 0)
    throw std::invalid_argument("log_weighted_rule: number of points must be positive, got " + std::to_string(n));

  // modified moments of -ln(x) against monic shifted Legendre polynomials
  const int nm = 2 * n;
  std::vector<double> nu(nm);
  nu[0] = 1.0;
  double central_binomial = 1.0; // C(2k,k)
  for (int k = 1; k < nm; ++k) {
    central_binomial *= 2.0 * (2 * k - 1) / k;
    nu[k] = ((k % 2 == 0) ? 1.0 : -1.0) / (double(k) * (k + 1) * central_binomial);
  }

  // recurrence of the monic shifted Legendre polynomials on (0,1)
  std::vector<double> a(nm, 0.5), b(nm, 0.0);
  for (int k = 1; k < nm; ++k)
    b[k] = double(k) * k / (4.0 * (4.0 * k * k - 1.0));

  std::vector<double> alpha(n), beta(n);
  std::vector<double> sig_prev(nm + 1, 0.0), sig(nm + 1, 0.0), sig_next(nm + 1, 0.0);
  for (int l = 0; l < nm; ++l)
    sig[l] = nu[l];
  alpha[0] = a[0] + nu[1] / nu[0];
  beta[0] = nu[0];

  for (int k = 1; k < n; ++k) {
    std::fill(sig_next.begin(), sig_next.end(), 0.0);
    for (int l = k; l < nm - k; ++l) {
      sig_next[l] = sig[l + 1] - (alpha[k - 1] - a[l]) * sig[l] - beta[k - 1] * sig_prev[l] + b[l] * sig[l - 1];
    }
    alpha[k] = a[k] + sig_next[k + 1] / sig_next[k] - sig[k] / sig[k - 1];
    beta[k] = sig_next[k] / sig[k - 1];
    if (!(beta[k] > 0.0) || !std::isfinite(alpha[k]))
      throw std::runtime_error("log_weighted_rule: moment recursion broke down for n = " + std::to_string(n));
    sig_prev.swap(sig);
    sig.swap(sig_next);
  }

  Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k)
    diag[k] = alpha[k];
  for (int k = 1; k < n; ++k)
    sub[k - 1] = std::sqrt(beta[k]);

  LogWeightedRule rule;
  rule.max_poly_degree = 2 * n - 1;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = alpha[0];
    rule.weights[0] = -beta[0];
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("log_weighted_rule: eigen-decomposition failed for n = " + std::to_string(n));
    for (int k = 0; k < n; ++k) {
      const double v0 = solver.eigenvectors()(0, k);
      rule.nodes[k] = solver.eigenvalues()[k];
      rule.weights[k] = -beta[0] * v0 * v0;
    }
  }
  for (double x : rule.nodes)
    if (!(x > 0.0 && x < 1.0))
      throw std::runtime_error("log_weighted_rule: node outside (0,1) for n = " + std::to_string(n));
  return rule;
}

const LogWeightedRule &log_weighted_rule_cached(int n)
{
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<LogWeightedRule>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[n];
  if (!slot)
    slot = std::make_unique<LogWeightedRule>(log_weighted_rule(n));
  return *slot;
}

TriangleRule triangle_rule(int degree)
{
  if (degree < 0)
    throw std::invalid_argument("triangle_rule: negative degree");
  const int n = (degree + 3) / 2;
  const auto &g = gauss_legendre_cached(n);
  TriangleRule rule;
  rule.degree_exactness = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    const double xi = 0.5 * (g.nodes[i] + 1.0);
    const double wi = 0.5 * g.weights[i];
    for (int j = 0; j < n; ++j) {
      const double eta = 0.5 * (g.nodes[j] + 1.0);
      const double wj = 0.5 * g.weights[j];
      rule.points.push_back({xi, eta * (1.0 - xi)});
      rule.weights.push_back(wi * wj * (1.0 - xi));
    }
  }
  return rule;
}

double integrate_1d(const QuadratureRule &rule, const std::function<double(double)> &f, double a, double b)
{
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

MappedRule map_rule(const QuadratureRule &rule, double a, double b)
{
  MappedRule out;
  out.points.resize(rule.size());
  out.weights.resize(rule.size());
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    out.points[i] = mid + half * rule.nodes[i];
    out.weights[i] = half * rule.weights[i];
  }
  return out;
}

MappedRule geometric_composite(int n, double a, double b, double ratio, int levels)
{
  const auto &g = gauss_legendre_cached(n);
  MappedRule out;
  const auto append = [&](double lo, double hi) {
    auto piece = map_rule(g, lo, hi);
    out.points.insert(out.points.end(), piece.points.begin(), piece.points.end());
    out.weights.insert(out.weights.end(), piece.weights.begin(), piece.weights.end());
  };
  double hi = b;
  const double len = b - a;
  for (int k = 1; k <= levels; ++k) {
    const double lo = a + len * std::pow(ratio, k);
    append(lo, hi);
    hi = lo;
  }
  append(a, hi);
  return out;
}

} // namespace sthp
