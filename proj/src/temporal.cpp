#include "sthp/temporal.hpp"

#include "sthp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sthp {

TemporalMesh::TemporalMesh(std::vector<double> breakpoints, std::vector<int> degrees)
  : breakpoints_(std::move(breakpoints))
  , degrees_(std::move(degrees))
{
  if (breakpoints_.size() < 2 || breakpoints_.size() != degrees_.size() + 1)
    throw std::invalid_argument("TemporalMesh: need m+1 breakpoints for m degrees");
  if (breakpoints_.front() != 0.0)
    throw std::invalid_argument("TemporalMesh: first breakpoint must be 0");
  for (std::size_t j = 1; j < breakpoints_.size(); ++j)
    if (!(breakpoints_[j] > breakpoints_[j - 1]))
      throw std::invalid_argument("TemporalMesh: breakpoints must be strictly increasing");
  for (int p : degrees_)
    if (p < 1)
      throw std::invalid_argument("TemporalMesh: polynomial degrees must be >= 1");
}

double TemporalMesh::k_max() const
{
  double k = 0.0;
  for (int e = 0; e < num_elements(); ++e)
    k = std::max(k, length(e));
  return k;
}

int TemporalMesh::max_degree() const
{
  return *std::max_element(degrees_.begin(), degrees_.end());
}

int TemporalMesh::dofs() const
{
  return std::accumulate(degrees_.begin(), degrees_.end(), 0);
}

int TemporalMesh::locate(double t) const
{
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  int e = static_cast<int>(it - breakpoints_.begin()) - 1;
  return std::clamp(e, 0, num_elements() - 1);
}

std::string TemporalMesh::table() const
{
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%4s %22s %22s %4s\n", "j", "t_j", "k_j", "p_j");
  out << line;
  std::snprintf(line, sizeof line, "%4d %22.15e %22s %4s\n", 0, 0.0, "-", "-");
  out << line;
  for (int e = 0; e < num_elements(); ++e) {
    std::snprintf(line, sizeof line, "%4d %22.15e %22.15e %4d\n", e + 1, right(e), length(e), degree(e));
    out << line;
  }
  return out.str();
}

std::uint64_t TemporalMesh::hash() const
{
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const void *data, std::size_t n) {
    const auto *bytes = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (double t : breakpoints_)
    mix(&t, sizeof t);
  for (int p : degrees_)
    mix(&p, sizeof p);
  return h;
}

TemporalMesh build_mesh(const TemporalMeshSpec &spec)
{
  if (!(spec.T > 0.0))
    throw std::invalid_argument("build_mesh: T must be positive");
  if (!(spec.sigma > 0.0 && spec.sigma < 1.0))
    throw std::invalid_argument("build_mesh: grading parameter sigma must lie in (0,1)");
  if (spec.m1 <= 2)
    throw std::invalid_argument("build_mesh: m1 must be greater than 2");
  if (spec.mu_hp < 1.0)
    throw std::invalid_argument("build_mesh: slope parameter mu_hp must be >= 1");
  if (spec.m2 < 0)
    throw std::invalid_argument("build_mesh: m2 must be non-negative");

  const double T1 = std::min(1.0, spec.T);
  if (spec.T <= 1.0 && spec.m2 != 0)
    throw std::invalid_argument("build_mesh: m2 must be 0 when T <= 1");
  if (spec.T > 1.0 && spec.m2 == 0)
    throw std::invalid_argument("build_mesh: m2 = 0 leaves (T1,T) uncovered; the mesh would end at t = 1 instead of T");

  std::vector<double> t{0.0};
  std::vector<int> p;
  for (int j = 1; j <= spec.m1; ++j) {
    t.push_back(T1 * std::pow(spec.sigma, spec.m1 - j));
    p.push_back(j == 1 ? 1 : static_cast<int>(std::floor(spec.mu_hp * j)));
  }
  const int pT = static_cast<int>(std::floor(spec.mu_hp * spec.m1));
  for (int j = spec.m1 + 1; j <= spec.m1 + spec.m2; ++j) {
    t.push_back((spec.T - T1) / spec.m2 * (j - spec.m1) + T1);
    p.push_back(pT);
  }
  t.back() = spec.T;
  return TemporalMesh(std::move(t), std::move(p));
}

TemporalMesh uniform_mesh(double T, int m, int p)
{
  if (!(T > 0.0) || m < 1 || p < 1)
    throw std::invalid_argument("uniform_mesh: need T > 0, m >= 1, p >= 1");
  std::vector<double> t(m + 1);
  for (int j = 0; j <= m; ++j)
    t[j] = T * j / m;
  t.back() = T;
  return TemporalMesh(std::move(t), std::vector<int>(m, p));
}

std::vector<std::string> check_parameter_conditions(const TemporalMeshSpec &spec, double delta, double epsilon)
{
  std::vector<std::string> warnings;
  const double mu_min = (1.0 - spec.sigma) * delta / (2.0 * std::pow(spec.sigma, (3.0 + epsilon) / 2.0));
  if (!(spec.mu_hp > mu_min)) {
    std::ostringstream msg;
    msg << "slope parameter mu_hp = " << spec.mu_hp << " does not exceed " << mu_min;
    warnings.push_back(msg.str());
  }
  const double T1 = std::min(1.0, spec.T);
  if (spec.T > 1.0) {
    const double m2_min = (spec.T - T1) / 4.0 * delta
                          * std::pow(spec.sigma, -(1.0 + epsilon) / (2.0 * std::floor(spec.mu_hp)));
    if (!(spec.m2 > m2_min)) {
      std::ostringstream msg;
      msg << "m2 = " << spec.m2 << " does not exceed " << m2_min;
      warnings.push_back(msg.str());
    }
  }
  return warnings;
}

void legendre_values(int n, double x, double *out)
{
  out[0] = 1.0;
  if (n >= 1)
    out[1] = x;
  for (int k = 2; k <= n; ++k)
    out[k] = ((2 * k - 1) * x * out[k - 1] - (k - 1) * out[k - 2]) / k;
}

void lobatto_shapes(int p, double xi, double *values, double *derivatives)
{
  double L[64];
  std::vector<double> heap;
  double *leg = L;
  if (p + 1 > 63) {
    heap.resize(p + 2);
    leg = heap.data();
  }
  legendre_values(std::max(p, 1), xi, leg);
  values[0] = 0.5 * (1.0 - xi);
  values[1] = 0.5 * (1.0 + xi);
  derivatives[0] = -0.5;
  derivatives[1] = 0.5;
  for (int l = 3; l <= p + 1; ++l) {
    // int_{-1}^{xi} L_{l-2} = (L_{l-1} - L_{l-3}) / (2l - 3)
    values[l - 1] = (leg[l - 1] - leg[l - 3]) / (2 * l - 3);
    derivatives[l - 1] = leg[l - 2];
  }
}

TemporalBasis::TemporalBasis(TemporalMesh mesh)
  : mesh_(std::move(mesh))
{
  const int m = mesh_.num_elements();
  connectivity_.resize(m);
  int next_bubble = m;
  for (int e = 0; e < m; ++e) {
    auto &dofs = connectivity_[e];
    dofs.resize(mesh_.degree(e) + 1);
    dofs[0] = (e == 0) ? initial_vertex : e - 1;
    dofs[1] = e;
    for (int l = 2; l <= mesh_.degree(e); ++l)
      dofs[l] = next_bubble++;
  }
  size_ = next_bubble;
}

void TemporalBasis::eval_local(int e, double t, double *values, double *derivatives) const
{
  const double h = 0.5 * mesh_.length(e);
  const double xi = (t - 0.5 * (mesh_.left(e) + mesh_.right(e))) / h;
  lobatto_shapes(mesh_.degree(e), xi, values, derivatives);
  for (int l = 0; l <= mesh_.degree(e); ++l)
    derivatives[l] /= h;
}

double TemporalBasis::eval(int dof, double t, int derivative) const
{
  if (dof < initial_vertex || dof >= size_)
    throw std::out_of_range("TemporalBasis::eval: dof index " + std::to_string(dof) + " out of range");
  const int e = mesh_.locate(t);
  const auto &dofs = connectivity_[e];
  const auto it = std::find(dofs.begin(), dofs.end(), dof);
  if (it == dofs.end())
    return 0.0;
  std::vector<double> val(dofs.size()), der(dofs.size());
  eval_local(e, t, val.data(), der.data());
  const auto l = it - dofs.begin();
  return derivative == 0 ? val[l] : der[l];
}

std::pair<double, double> TemporalBasis::evaluate(const Eigen::VectorXd &coeffs, double t) const
{
  const int e = mesh_.locate(t);
  const auto &dofs = connectivity_[e];
  std::vector<double> val(dofs.size()), der(dofs.size());
  eval_local(e, t, val.data(), der.data());
  double v = 0.0, dv = 0.0;
  for (std::size_t l = 0; l < dofs.size(); ++l) {
    if (dofs[l] < 0)
      continue;
    v += coeffs[dofs[l]] * val[l];
    dv += coeffs[dofs[l]] * der[l];
  }
  return {v, dv};
}

Eigen::VectorXd quasi_interpolant(const TemporalBasis &basis,
                                  const std::function<double(double)> &v,
                                  const std::function<double(double)> &dv)
{
  const auto &mesh = basis.mesh();
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(basis.size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int p = mesh.degree(e);
    coeffs[basis.global_dof(e, 1)] = v(mesh.right(e));
    if (p < 2)
      continue;
    // bubble coefficient of N_l equals the Legendre coefficient of order l-2
    // of the reference derivative
    const auto &g = gauss_legendre_cached(2 * p + 8);
    const double h = 0.5 * mesh.length(e);
    const double mid = 0.5 * (mesh.left(e) + mesh.right(e));
    std::vector<double> leg(p + 1);
    std::vector<double> moments(p, 0.0);
    for (std::size_t q = 0; q < g.size(); ++q) {
      legendre_values(p - 1, g.nodes[q], leg.data());
      const double dref = h * dv(mid + h * g.nodes[q]);
      for (int n = 1; n < p; ++n)
        moments[n] += g.weights[q] * dref * leg[n];
    }
    for (int n = 1; n < p; ++n)
      coeffs[basis.global_dof(e, n + 1)] = 0.5 * (2 * n + 1) * moments[n];
  }
  return coeffs;
}

} // namespace sthp
