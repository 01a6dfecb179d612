#include "sthp/hilbert.hpp"

#include "sthp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace sthp {

namespace {

constexpr double pi = std::numbers::pi;

// ln(tan z / z) for z in [0, pi/4]
double log_tan_ratio(double z)
{
  if (z < 1e-5)
    return z * z / 3.0;
  return std::log(std::tan(z) / z);
}

// ln(sin y / y) for y in [0, pi/2]
double log_sin_ratio(double y)
{
  if (y < 1e-5)
    return -y * y / 6.0;
  return std::log(std::sin(y) / y);
}

// Gauss order resolving ln|x - x0| on [-1,1] to ~1e-16 when x0 lies at distance
// delta (in half-lengths) outside the interval
int near_singular_order(double delta, int cap)
{
  if (!(delta > 0.0))
    return cap;
  const double rho = 1.0 + delta + std::sqrt(delta * (2.0 + delta));
  const int n = static_cast<int>(std::ceil(std::log(1e16) / (2.0 * std::log(rho))));
  return std::min(n, cap);
}

struct UnitRule
{
  std::vector<double> x, w;
};

// Gauss rule on (0,1)
UnitRule unit_gauss(int n)
{
  const auto &g = gauss_legendre_cached(n);
  UnitRule r;
  for (std::size_t q = 0; q < g.size(); ++q) {
    r.x.push_back(0.5 * (g.nodes[q] + 1.0));
    r.w.push_back(0.5 * g.weights[q]);
  }
  return r;
}

struct PairGeometry
{
  double T;
  double ai, bi, aj, bj;
  double hi() const { return 0.5 * (bi - ai); }
  double hj() const { return 0.5 * (bj - aj); }
};

enum SingularTerm : unsigned { kDist = 1u, kSum = 2u, kEnd = 4u };

// K minus the terms flagged in `special`
double regular_part(double s, double t, double T, unsigned special)
{
  const double c = pi / (4.0 * T);
  const double d = std::abs(t - s);
  const double sg = s + t;
  double v = std::log(c) + log_tan_ratio(c * d) + log_sin_ratio(c * sg) - log_sin_ratio(c * (2.0 * T - sg));
  if (!(special & kDist))
    v += std::log(d);
  if (!(special & kSum))
    v += std::log(sg);
  if (!(special & kEnd))
    v -= std::log(2.0 * T - sg);
  return v;
}

// integral of G(a,b) ln(a+b) over (0,A)x(0,B), split into two Duffy triangles
template <class Map>
void corner_rule(KernelPoints &out, double A, double B, double sign, int n_log, int n_gauss, int cap, Map map)
{
  const auto &lr = log_weighted_rule_cached(n_log);
  const auto gx = unit_gauss(n_gauss);
  for (int region = 0; region < 2; ++region) {
    // region 0: a = A x, b = B x y ; region 1: a = A x y, b = B x
    const double ratio = region == 0 ? A / B : B / A;
    const auto gy = unit_gauss(std::max(n_gauss, near_singular_order(2.0 * ratio, cap)));
    for (std::size_t iy = 0; iy < gy.x.size(); ++iy) {
      const double y = gy.x[iy];
      const double log_rest = region == 0 ? std::log(A + B * y) : std::log(A * y + B);
      const auto emit = [&](double x, double weight) {
        const double a = region == 0 ? A * x : A * x * y;
        const double b = region == 0 ? B * x * y : B * x;
        const auto [s, t] = map(a, b);
        out.push(s, t, sign * A * B * x * weight * gy.w[iy]);
      };
      for (std::size_t ix = 0; ix < lr.size(); ++ix)
        emit(lr.nodes[ix], lr.weights[ix]);
      for (std::size_t ix = 0; ix < gx.x.size(); ++ix)
        emit(gx.x[ix], gx.w[ix] * log_rest);
    }
  }
}

// integral of F(s,t) ln|s-t| over I x I, I = (mid-h, mid+h)
void diagonal_rule(KernelPoints &out, double mid, double h, int n_log, int n_gauss)
{
  const auto &lr = log_weighted_rule_cached(n_log);
  const auto gw = unit_gauss(n_gauss);
  const auto &gi = gauss_legendre_cached(n_gauss);
  // d = h u, u = 2 w in (0,2): ln d = ln(2h) + ln w
  std::vector<double> wx, ww;
  for (std::size_t q = 0; q < lr.size(); ++q) {
    wx.push_back(lr.nodes[q]);
    ww.push_back(2.0 * lr.weights[q]);
  }
  const double log2h = std::log(2.0 * h);
  for (std::size_t q = 0; q < gw.x.size(); ++q) {
    wx.push_back(gw.x[q]);
    ww.push_back(2.0 * log2h * gw.w[q]);
  }
  for (std::size_t q = 0; q < wx.size(); ++q) {
    const double u = 2.0 * wx[q];
    const double len = 2.0 - u; // inner variable on (-1, 1-u)
    for (std::size_t r = 0; r < gi.size(); ++r) {
      const double xi = -1.0 + 0.5 * len * (gi.nodes[r] + 1.0);
      const double w = ww[q] * 0.5 * len * gi.weights[r] * h * h;
      out.push(mid + h * xi, mid + h * (xi + u), w);
      out.push(mid + h * (xi + u), mid + h * xi, w);
    }
  }
}

} // namespace

double hilbert_kernel(double s, double t, double T)
{
  if (s == t)
    throw std::domain_error("hilbert_kernel: evaluated on the diagonal s == t");
  if (s + t <= 0.0 || s + t >= 2.0 * T)
    throw std::domain_error("hilbert_kernel: s + t must lie in (0, 2T)");
  const double c = pi / (4.0 * T);
  return std::log(std::tan(c * (s + t)) * std::tan(c * std::abs(t - s)));
}

KernelPoints kernel_pair_rule(const TemporalMesh &mesh, int i, int j, const HilbertQuadConfig &cfg)
{
  const int m = mesh.num_elements();
  const double T = mesh.final_time();
  const PairGeometry g{T, mesh.left(i), mesh.right(i), mesh.left(j), mesh.right(j)};
  const int pi_ = mesh.degree(i), pj = mesh.degree(j);
  const int cap = cfg.max_order;
  const int n_gauss = std::min(cap, cfg.scale * (pi_ + pj + cfg.gauss_extra));
  const int n_log = std::min(cap, cfg.scale * (std::max(pi_, pj) + cfg.log_extra));

  unsigned special = 0;
  if (std::abs(i - j) <= 1)
    special |= kDist;
  if (i == 0 && j == 0)
    special |= kSum;
  if (i == m - 1 && j == m - 1)
    special |= kEnd;

  KernelPoints out;

  // regular remainder by tensor Gauss, order raised for nearby log singularities
  int ns = n_gauss, nt = n_gauss;
  const auto bump = [&](double dist) {
    ns = std::max(ns, std::min(cap, cfg.scale * near_singular_order(dist / g.hi(), cap)));
    nt = std::max(nt, std::min(cap, cfg.scale * near_singular_order(dist / g.hj(), cap)));
  };
  if (!(special & kDist))
    bump(j > i ? g.aj - g.bi : g.ai - g.bj);
  if (!(special & kSum))
    bump(g.ai + g.aj);
  if (!(special & kEnd))
    bump(2.0 * T - g.bi - g.bj);
  {
    const auto &rs = gauss_legendre_cached(ns);
    const auto &rt = gauss_legendre_cached(nt);
    const double ms = 0.5 * (g.ai + g.bi), mt = 0.5 * (g.aj + g.bj);
    for (std::size_t a = 0; a < rs.size(); ++a) {
      const double s = ms + g.hi() * rs.nodes[a];
      for (std::size_t b = 0; b < rt.size(); ++b) {
        const double t = mt + g.hj() * rt.nodes[b];
        const double w = rs.weights[a] * rt.weights[b] * g.hi() * g.hj();
        out.push(s, t, w * regular_part(s, t, T, special));
      }
    }
  }

  if (special & kDist) {
    if (i == j) {
      diagonal_rule(out, 0.5 * (g.ai + g.bi), g.hi(), n_log, n_gauss);
    } else if (j == i + 1) {
      const double P = g.bi;
      corner_rule(out, g.bi - g.ai, g.bj - g.aj, 1.0, n_log, n_gauss, cap,
                  [P](double a, double b) { return std::pair{P - a, P + b}; });
    } else {
      const double P = g.ai;
      corner_rule(out, g.bi - g.ai, g.bj - g.aj, 1.0, n_log, n_gauss, cap,
                  [P](double a, double b) { return std::pair{P + a, P - b}; });
    }
  }
  if (special & kSum) {
    corner_rule(out, g.bi, g.bj, 1.0, n_log, n_gauss, cap, [](double a, double b) { return std::pair{a, b}; });
  }
  if (special & kEnd) {
    corner_rule(out, T - g.ai, T - g.aj, -1.0, n_log, n_gauss, cap,
                [T](double a, double b) { return std::pair{T - a, T - b}; });
  }
  return out;
}

TemporalMatrices assemble_hilbert(const TemporalBasis &basis, const HilbertQuadConfig &cfg)
{
  const auto &mesh = basis.mesh();
  const int M = basis.size();
  const int m = mesh.num_elements();
  const int pmax = mesh.max_degree();

  TemporalMatrices out;
  out.M_ht_ext = Eigen::MatrixXd::Zero(M, M + 1);
  out.A_ht_ext = Eigen::MatrixXd::Zero(M, M + 1);
  out.mesh_hash = mesh.hash();

  std::vector<double> vs(pmax + 1), ds(pmax + 1), vt(pmax + 1), dt(pmax + 1);
  Eigen::MatrixXd Mloc(pmax + 1, pmax + 1), Aloc(pmax + 1, pmax + 1);

  for (int i = 0; i < m; ++i) {
    const auto &rows = basis.element_dofs(i);
    const int ni = static_cast<int>(rows.size());
    for (int j = 0; j < m; ++j) {
      const auto &cols = basis.element_dofs(j);
      const int nj = static_cast<int>(cols.size());
      const auto pts = kernel_pair_rule(mesh, i, j, cfg);
      Mloc.setZero();
      Aloc.setZero();
      for (std::size_t q = 0; q < pts.size(); ++q) {
        basis.eval_local(i, pts.s[q], vs.data(), ds.data());
        basis.eval_local(j, pts.t[q], vt.data(), dt.data());
        const double w = pts.w[q];
        for (int a = 0; a < ni; ++a) {
          const double wa = w * ds[a];
          for (int b = 0; b < nj; ++b) {
            Mloc(a, b) += wa * vt[b];
            Aloc(a, b) += wa * dt[b];
          }
        }
      }
      for (int a = 0; a < ni; ++a) {
        if (rows[a] < 0)
          continue;
        for (int b = 0; b < nj; ++b) {
          const int col = cols[b] < 0 ? M : cols[b];
          out.M_ht_ext(rows[a], col) -= Mloc(a, b) / pi;
          out.A_ht_ext(rows[a], col) -= Aloc(a, b) / pi;
        }
      }
    }
  }
  out.M_ht = out.M_ht_ext.leftCols(M);
  out.A_ht = out.A_ht_ext.leftCols(M);
  return out;
}

void write_hilbert_matrices(const std::string &path, const TemporalMatrices &mats)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("write_hilbert_matrices: cannot open " + path);
  const std::int64_t M = mats.M_ht.rows();
  f.write(reinterpret_cast<const char *>(&M), sizeof M);
  f.write(reinterpret_cast<const char *>(&mats.mesh_hash), sizeof mats.mesh_hash);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (const auto *mat : {&mats.M_ht, &mats.A_ht}) {
    const RowMajor r = *mat;
    f.write(reinterpret_cast<const char *>(r.data()), sizeof(double) * r.size());
  }
  if (!f)
    throw std::runtime_error("write_hilbert_matrices: write failed for " + path);
}

TemporalMatrices read_hilbert_matrices(const std::string &path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("read_hilbert_matrices: cannot open " + path);
  std::int64_t M = 0;
  TemporalMatrices mats;
  f.read(reinterpret_cast<char *>(&M), sizeof M);
  f.read(reinterpret_cast<char *>(&mats.mesh_hash), sizeof mats.mesh_hash);
  if (!f || M < 0)
    throw std::runtime_error("read_hilbert_matrices: bad header in " + path);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor r(M, M);
  f.read(reinterpret_cast<char *>(r.data()), sizeof(double) * r.size());
  mats.M_ht = r;
  f.read(reinterpret_cast<char *>(r.data()), sizeof(double) * r.size());
  mats.A_ht = r;
  if (!f)
    throw std::runtime_error("read_hilbert_matrices: truncated file " + path);
  return mats;
}

} // namespace sthp
