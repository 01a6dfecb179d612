#include "sthp/problems.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sthp {

namespace {

constexpr double pi = std::numbers::pi;

class PointwiseSlice final : public SliceEvaluator
{
public:
  PointwiseSlice(SpaceTimeFunction u, SpaceTimeFunction du, std::vector<Point2> pts)
      : u_(std::move(u)), du_(std::move(du)), pts_(std::move(pts))
  {
  }

  void eval(const std::vector<double> &ts, Eigen::MatrixXd &u, Eigen::MatrixXd &du) const override
  {
    const auto n = static_cast<Eigen::Index>(pts_.size());
    u.resize(n, static_cast<Eigen::Index>(ts.size()));
    du.resize(n, static_cast<Eigen::Index>(ts.size()));
    for (std::size_t q = 0; q < ts.size(); ++q)
      for (Eigen::Index s = 0; s < n; ++s) {
        u(s, q) = u_(ts[q], pts_[s]);
        du(s, q) = du_ ? du_(ts[q], pts_[s]) : 0.0;
      }
  }

private:
  SpaceTimeFunction u_, du_;
  std::vector<Point2> pts_;
};

// ---- u1 -------------------------------------------------------------------

double u1_value(int K, double t, double x, int derivative)
{
  double s = 0.0;
  for (int eta = 1; eta <= K; ++eta) {
    const double k = 2.0 * eta - 1.0;
    const double e = std::exp(-pi * pi * k * k * t);
    const double amp = derivative == 0 ? 4.0 * (1.0 - e) / (pi * pi * pi * k * k * k) : 4.0 * e / (pi * k);
    s += amp * std::sin(pi * k * x);
  }
  return s;
}

// u(s, q) = sum_k sin(pi k x_s) a_k(t_q): one matrix product per batch
class U1Slice final : public SliceEvaluator
{
public:
  U1Slice(int K, const std::vector<Point2> &pts) : K_(K), S_(pts.size(), K)
  {
    for (std::size_t s = 0; s < pts.size(); ++s)
      for (int eta = 1; eta <= K; ++eta)
        S_(s, eta - 1) = std::sin(pi * (2.0 * eta - 1.0) * pts[s][0]);
  }

  void eval(const std::vector<double> &ts, Eigen::MatrixXd &u, Eigen::MatrixXd &du) const override
  {
    Eigen::MatrixXd A(K_, ts.size()), B(K_, ts.size());
    for (std::size_t q = 0; q < ts.size(); ++q)
      for (int eta = 1; eta <= K_; ++eta) {
        const double k = 2.0 * eta - 1.0;
        const double e = std::exp(-pi * pi * k * k * ts[q]);
        A(eta - 1, q) = 4.0 * (1.0 - e) / (pi * pi * pi * k * k * k);
        B(eta - 1, q) = 4.0 * e / (pi * k);
      }
    u.noalias() = S_ * A;
    du.noalias() = S_ * B;
  }

private:
  int K_;
  Eigen::MatrixXd S_;
};

// ---- u2 / u3 --------------------------------------------------------------

struct Temporal
{
  double alpha; // t^alpha e^{-t}
  double value(double t) const { return std::pow(t, alpha) * std::exp(-t); }
  double derivative(double t) const
  {
    if (t == 0.0)
      return alpha == 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return std::exp(-t) * (alpha * std::pow(t, alpha - 1.0) - std::pow(t, alpha));
  }
};

// (1/100) t sin(pi x1) sin(pi x2) exp(-t q(x)), q = (x1-1/4)^2 + (x2+1/4)^2
double ureg(double t, const Point2 &x)
{
  const double q = (x[0] - 0.25) * (x[0] - 0.25) + (x[1] + 0.25) * (x[1] + 0.25);
  return 0.01 * t * std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::exp(-t * q);
}

double ureg_dt(double t, const Point2 &x)
{
  const double q = (x[0] - 0.25) * (x[0] - 0.25) + (x[1] + 0.25) * (x[1] + 0.25);
  return 0.01 * std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::exp(-t * q) * (1.0 - t * q);
}

double ureg_laplacian(double t, const Point2 &x)
{
  const double gx = 2.0 * (x[0] - 0.25), gy = 2.0 * (x[1] + 0.25);
  const double q = 0.25 * (gx * gx + gy * gy);
  const double s1 = std::sin(pi * x[0]), s2 = std::sin(pi * x[1]);
  const double f = s1 * s2;
  const double fx = pi * std::cos(pi * x[0]) * s2, fy = pi * s1 * std::cos(pi * x[1]);
  const double E = std::exp(-t * q);
  // Laplacian of f E with grad E = -t E grad q, Laplacian of q = 4
  return 0.01 * t * E * (-2.0 * pi * pi * f - 2.0 * t * (fx * gx + fy * gy) + f * (t * t * (gx * gx + gy * gy) - 4.0 * t));
}

class CornerSlice final : public SliceEvaluator
{
public:
  CornerSlice(Temporal tf, const std::vector<Point2> &pts) : tf_(tf), n_(pts.size())
  {
    f_.resize(n_);
    q_.resize(n_);
    phi_.resize(n_);
    for (std::size_t s = 0; s < n_; ++s) {
      const auto &x = pts[s];
      f_(s) = 0.01 * std::sin(pi * x[0]) * std::sin(pi * x[1]);
      q_(s) = (x[0] - 0.25) * (x[0] - 0.25) + (x[1] + 0.25) * (x[1] + 0.25);
      phi_(s) = singular_profile(x);
    }
  }

  void eval(const std::vector<double> &ts, Eigen::MatrixXd &u, Eigen::MatrixXd &du) const override
  {
    u.resize(n_, ts.size());
    du.resize(n_, ts.size());
    for (std::size_t q = 0; q < ts.size(); ++q) {
      const double t = ts[q];
      const double tau = tf_.value(t), dtau = tf_.derivative(t);
      for (std::size_t s = 0; s < n_; ++s) {
        const double E = f_(s) * std::exp(-t * q_(s));
        u(s, q) = t * E + tau * phi_(s);
        du(s, q) = E * (1.0 - t * q_(s)) + dtau * phi_(s);
      }
    }
  }

private:
  Temporal tf_;
  std::size_t n_;
  Eigen::VectorXd f_, q_, phi_;
};

ManufacturedProblem corner_problem(std::string name, double alpha)
{
  const Temporal tf{alpha};
  ManufacturedProblem p;
  p.name = std::move(name);
  p.dim = 2;
  p.T = 2.0;
  p.domain = "lshape";
  p.u = [tf](double t, const Point2 &x) { return ureg(t, x) + tf.value(t) * singular_profile(x); };
  p.du_dt = [tf](double t, const Point2 &x) { return ureg_dt(t, x) + tf.derivative(t) * singular_profile(x); };
  p.g = [tf](double t, const Point2 &x) {
    return ureg_dt(t, x) - ureg_laplacian(t, x) + tf.derivative(t) * singular_profile(x)
           - tf.value(t) * singular_profile_laplacian(x);
  };
  p.layer = alpha < 1.0 ? InitialLayer::power : InitialLayer::none;
  p.slice = [tf](const std::vector<Point2> &pts) { return std::make_unique<CornerSlice>(tf, pts); };
  return p;
}

} // namespace

std::unique_ptr<SliceEvaluator> ManufacturedProblem::make_slice(const std::vector<Point2> &points) const
{
  if (slice)
    return slice(points);
  return std::make_unique<PointwiseSlice>(u, du_dt, points);
}

ManufacturedProblem problem_u1(int truncation)
{
  if (truncation < 1)
    throw std::invalid_argument("problem_u1: truncation must be >= 1");
  ManufacturedProblem p;
  p.name = "u1";
  p.dim = 1;
  p.T = 2.0;
  p.domain = "interval";
  p.series_truncation = truncation;
  p.g = [](double, const Point2 &) { return 1.0; };
  p.u = [truncation](double t, const Point2 &x) { return u1_value(truncation, t, x[0], 0); };
  p.du_dt = [truncation](double t, const Point2 &x) { return u1_value(truncation, t, x[0], 1); };
  p.layer = InitialLayer::sqrt_like;
  p.slice = [truncation](const std::vector<Point2> &pts) { return std::make_unique<U1Slice>(truncation, pts); };
  return p;
}

ManufacturedProblem problem_u2()
{
  return corner_problem("u2", 1.0);
}

ManufacturedProblem problem_u3()
{
  return corner_problem("u3", 0.6);
}

ManufacturedProblem make_problem(const std::string &name)
{
  if (name == "u1")
    return problem_u1();
  if (name == "u2")
    return problem_u2();
  if (name == "u3")
    return problem_u3();
  throw std::invalid_argument("unknown problem '" + name + "' (expected u1, u2 or u3)");
}

std::vector<std::string> problem_names()
{
  return {"u1", "u2", "u3"};
}

ManufacturedProblem make_generic_problem(std::string name, int dim, double T, std::string domain, SpaceTimeFunction g,
                                         SpaceTimeFunction u, SpaceTimeFunction du_dt)
{
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("make_generic_problem: dimension must be 1 or 2");
  if (!(T > 0.0))
    throw std::invalid_argument("make_generic_problem: T must be positive");
  ManufacturedProblem p;
  p.name = std::move(name);
  p.dim = dim;
  p.T = T;
  p.domain = std::move(domain);
  p.g = std::move(g);
  p.u = std::move(u);
  p.du_dt = std::move(du_dt);
  return p;
}

double cutoff(double r, double *d1, double *d2)
{
  double v = 0.0, a = 0.0, b = 0.0;
  if (r <= 0.25) {
    v = 1.0;
  } else if (r <= 0.75) {
    v = 27.0 / 8 + r * (-135.0 / 4 + r * (180.0 + r * (-440.0 + r * (480.0 - 192.0 * r))));
    a = -135.0 / 4 + r * (360.0 + r * (-1320.0 + r * (1920.0 - 960.0 * r)));
    b = 360.0 + r * (-2640.0 + r * (5760.0 - 3840.0 * r));
  }
  if (d1)
    *d1 = a;
  if (d2)
    *d2 = b;
  return v;
}

double angle(const Point2 &x)
{
  double th = std::atan2(x[1], x[0]);
  if (th <= 0.0)
    th += 2.0 * pi;
  return th;
}

double corner_singular_function(const Point2 &x)
{
  const double r = std::hypot(x[0], x[1]);
  if (r == 0.0)
    return 0.0;
  return std::pow(r, 2.0 / 3.0) * std::sin(2.0 / 3.0 * (angle(x) - 0.5 * pi));
}

double singular_profile(const Point2 &x)
{
  const double r = std::hypot(x[0], x[1]);
  if (r > 0.75)
    return 0.0;
  return cutoff(r) * corner_singular_function(x);
}

double singular_profile_laplacian(const Point2 &x)
{
  // S harmonic: Lap(eta S) = S (eta'' + eta'/r) + 2 eta' dS/dr
  const double r = std::hypot(x[0], x[1]);
  if (r <= 0.25 || r > 0.75)
    return 0.0;
  double d1, d2;
  cutoff(r, &d1, &d2);
  const double sn = std::sin(2.0 / 3.0 * (angle(x) - 0.5 * pi));
  const double S = std::pow(r, 2.0 / 3.0) * sn;
  const double dS = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0) * sn;
  return S * (d2 + d1 / r) + 2.0 * d1 * dS;
}

} // namespace sthp
