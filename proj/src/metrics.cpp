#include "sthp/metrics.hpp"

#include "sthp/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace sthp {

namespace {

MappedRule first_element_rule(double t1, int n, InitialLayer layer, const ErrorQuadrature &q)
{
  switch (layer) {
  case InitialLayer::sqrt_like:
    return geometric_composite(n, 0.0, t1, 0.5, q.geometric_levels);
  case InitialLayer::power: {
    const auto &g = gauss_legendre_cached(q.factor * q.power_points);
    MappedRule r;
    const double k = q.power_exponent;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = 0.5 * (g.nodes[i] + 1.0);
      r.points.push_back(t1 * std::pow(s, k));
      r.weights.push_back(0.5 * g.weights[i] * k * t1 * std::pow(s, k - 1.0));
    }
    return r;
  }
  case InitialLayer::none:
    break;
  }
  return map_rule(gauss_legendre_cached(n), 0.0, t1);
}

MappedRule temporal_rule(const TemporalMesh &mesh, int e, InitialLayer layer, const ErrorQuadrature &q)
{
  const int n = q.factor * (mesh.degree(e) + q.temporal_extra);
  if (e == 0)
    return first_element_rule(mesh.right(0), n, layer, q);
  return map_rule(gauss_legendre_cached(n), mesh.left(e), mesh.right(e));
}

ErrorParts integrate_error(const SpaceTimeSolution &sol, const TemporalBasis &basis, const SpatialSystem &sx,
                           const ManufacturedProblem &prob, const ErrorQuadrature &quad)
{
  const auto &mesh = basis.mesh();
  const auto &smesh = sx.mesh;
  if (sol.U.rows() != sx.size() || sol.U.cols() != basis.size())
    throw std::invalid_argument("error_functional: solution does not match the discretization");
  const int sdeg = smesh.dim == 1 ? 2 * quad.factor * quad.spatial_points_1d - 1 : quad.factor * quad.spatial_degree;
  const auto squad = spatial_quadrature(smesh, sdeg);
  const auto Qx = static_cast<Eigen::Index>(squad.size());

  // quadrature point values from free vertex values
  std::vector<Eigen::Triplet<double>> trip;
  const int nloc = smesh.dim == 1 ? 2 : 3;
  for (Eigen::Index s = 0; s < Qx; ++s) {
    const auto &cell = smesh.cells[squad.cell[s]];
    for (int k = 0; k < nloc; ++k) {
      const int d = sx.dof_of_vertex[cell[k]];
      if (d >= 0)
        trip.emplace_back(s, d, squad.shape[s][k]);
    }
  }
  SparseMatrix P(Qx, sx.size());
  P.setFromTriplets(trip.begin(), trip.end());
  const Eigen::Map<const Eigen::VectorXd> wx(squad.weights.data(), Qx);

  const auto slice = prob.make_slice(squad.points);
  const std::size_t batch = std::max<std::size_t>(1, static_cast<std::size_t>(4000000 / std::max<Eigen::Index>(Qx, 1)));

  double l2 = 0.0, l2dt = 0.0;
  std::vector<double> vals, dts;
  Eigen::MatrixXd u, du;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto &dofs = basis.element_dofs(e);
    const int nl = static_cast<int>(dofs.size());
    vals.resize(nl);
    dts.resize(nl);
    const auto rule = temporal_rule(mesh, e, prob.layer, quad);
    for (std::size_t q0 = 0; q0 < rule.points.size(); q0 += batch) {
      const std::size_t nq = std::min(batch, rule.points.size() - q0);
      const std::vector<double> ts(rule.points.begin() + q0, rule.points.begin() + q0 + nq);
      slice->eval(ts, u, du);
      Eigen::MatrixXd V = Eigen::MatrixXd::Zero(sx.size(), nq), dV = Eigen::MatrixXd::Zero(sx.size(), nq);
      for (std::size_t q = 0; q < nq; ++q) {
        basis.eval_local(e, ts[q], vals.data(), dts.data());
        for (int a = 0; a < nl; ++a)
          if (dofs[a] != TemporalBasis::initial_vertex) {
            V.col(q) += vals[a] * sol.U.col(dofs[a]);
            dV.col(q) += dts[a] * sol.U.col(dofs[a]);
          }
      }
      u -= P * V;
      du -= P * dV;
      for (std::size_t q = 0; q < nq; ++q) {
        const double wt = rule.weights[q0 + q];
        l2 += wt * wx.dot(u.col(q).cwiseAbs2());
        l2dt += wt * wx.dot(du.col(q).cwiseAbs2());
      }
    }
  }
  if (!std::isfinite(l2) || !std::isfinite(l2dt))
    throw std::runtime_error("error_functional: non-finite integrand (singular exact solution sampled?)");
  return {std::sqrt(std::max(l2, 0.0)), std::sqrt(std::max(l2dt, 0.0))};
}

} // namespace

ErrorQuadrature ErrorQuadrature::doubled() const
{
  ErrorQuadrature d = *this;
  d.factor *= 2;
  d.doubling_tolerance = 0.0;
  return d;
}

double ErrorParts::value() const
{
  return std::sqrt(l2 * l2_dt);
}

ErrorParts error_functional(const SpaceTimeSolution &sol, const TemporalBasis &basis, const SpatialSystem &sx,
                            const ManufacturedProblem &prob, const ErrorQuadrature &quad)
{
  const auto parts = integrate_error(sol, basis, sx, prob, quad);
  if (quad.doubling_tolerance > 0.0) {
    const auto fine = integrate_error(sol, basis, sx, prob, quad.doubled());
    const double a = parts.value(), b = fine.value();
    if (std::abs(a - b) > quad.doubling_tolerance * std::max(std::abs(b), 1e-300))
      throw std::runtime_error("error_functional: quadrature not converged under order doubling (" + std::to_string(a)
                               + " vs " + std::to_string(b) + ")");
  }
  return parts;
}

ErrorParts temporal_error_functional(const Eigen::VectorXd &coeffs, const TemporalBasis &basis,
                                     const std::function<double(double)> &u, const std::function<double(double)> &du,
                                     InitialLayer layer, const ErrorQuadrature &quad)
{
  const auto &mesh = basis.mesh();
  double l2 = 0.0, l2dt = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto rule = temporal_rule(mesh, e, layer, quad);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto [v, dv] = basis.evaluate(coeffs, rule.points[q]);
      const double a = u(rule.points[q]) - v, b = du(rule.points[q]) - dv;
      l2 += rule.weights[q] * a * a;
      l2dt += rule.weights[q] * b * b;
    }
  }
  return {std::sqrt(l2), std::sqrt(l2dt)};
}

std::vector<double> eoc(const std::vector<StudyRecord> &records)
{
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> r(records.size(), nan);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto &a = records[i - 1], &b = records[i];
    if (!(a.error > 0.0 && b.error > 0.0) || a.h_x == b.h_x || !(a.h_x > 0.0 && b.h_x > 0.0))
      continue;
    r[i] = std::log(a.error / b.error) / std::log(a.h_x / b.h_x);
  }
  return r;
}

std::vector<double> eoc_dofs(const std::vector<StudyRecord> &records, int dim)
{
  if (dim < 1)
    throw std::invalid_argument("eoc_dofs: dimension must be >= 1");
  auto widths = records;
  for (auto &r : widths)
    r.h_x = r.MN > 0 ? std::pow(static_cast<double>(r.MN), -1.0 / (dim + 1)) : 0.0;
  return eoc(widths);
}

LinearFit least_squares(const std::vector<double> &x, const std::vector<double> &y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares: need at least two points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = x[i];
    A(i, 1) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  LinearFit f;
  f.slope = c(0);
  f.intercept = c(1);
  f.residual = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
  return f;
}

ExpFit exp_fit(const std::vector<StudyRecord> &records, double threshold)
{
  std::vector<double> x, y;
  for (const auto &r : records) {
    x.push_back(std::sqrt(static_cast<double>(r.M)));
    y.push_back(std::log(r.error));
  }
  const auto f = least_squares(x, y);
  return {-f.slope, f.residual, f.residual < threshold};
}

LinearFit algebraic_fit_in_M(const std::vector<StudyRecord> &records)
{
  std::vector<double> x, y;
  for (const auto &r : records) {
    x.push_back(std::log(static_cast<double>(r.M)));
    y.push_back(std::log(r.error));
  }
  return least_squares(x, y);
}

LinearFit rate_in_MN(const std::vector<StudyRecord> &records)
{
  std::vector<double> x, y;
  for (const auto &r : records) {
    x.push_back(std::log(static_cast<double>(r.MN)));
    y.push_back(std::log(r.error));
  }
  auto f = least_squares(x, y);
  f.slope = -f.slope;
  return f;
}

void write_records_csv(std::ostream &out, const std::vector<StudyRecord> &records, int dim, bool with_timings)
{
  out << "MN,M,N,h_x,k_max,error,eoc,eoc_h,wall_time\n";
  const auto rates = eoc_dofs(records, dim);
  const auto rates_h = eoc(records);
  char buf[256];
  const auto put = [&](double v) {
    if (std::isnan(v))
      out << "-";
    else {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf;
    }
    out << ",";
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &r = records[i];
    std::snprintf(buf, sizeof buf, "%ld,%d,%d,%.17g,%.17g,%.17g,", r.MN, r.M, r.N, r.h_x, r.k_max, r.error);
    out << buf;
    put(rates[i]);
    put(rates_h[i]);
    if (with_timings) {
      std::snprintf(buf, sizeof buf, "%.3f", r.wall_time);
      out << buf;
    } else {
      out << "-";
    }
    out << "\n";
  }
}

} // namespace sthp
