#include "sthp/verify.hpp"

#include "sthp/fractional_norms.hpp"

#include <Eigen/Cholesky>

#include <cstdio>
#include <random>

namespace sthp {

namespace {

std::string line(bool ok, const char *what, double value, double tol)
{
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %s: %.3e (tolerance %.1e)", ok ? "PASS" : "FAIL", what, value, tol);
  return buf;
}

} // namespace

VerifyReport verify_discretization(const StudyConfig &config, std::uint64_t seed)
{
  VerifyReport rep;
  const auto add = [&rep](bool ok, const char *what, double value, double tol) {
    rep.lines.push_back(line(ok, what, value, tol));
    rep.ok = rep.ok && ok;
  };
  const auto L = build_level(config, config.first_level);
  const auto &tm = L.tm;

  if (L.basis.size() <= 120) {
    // Richardson extrapolation of two truncations (error ~ K^-2)
    const auto a = oracle::series_hilbert_matrices(L.basis, 8192);
    const auto b = oracle::series_hilbert_matrices(L.basis, 16384);
    const Eigen::MatrixXd Mo = (4.0 * b.M_ht_ext - a.M_ht_ext) / 3.0;
    const Eigen::MatrixXd Ao = (4.0 * b.A_ht_ext - a.A_ht_ext) / 3.0;
    const double d = std::max((Mo - tm.M_ht_ext).cwiseAbs().maxCoeff(), (Ao - tm.A_ht_ext).cwiseAbs().maxCoeff());
    add(d < 1e-6, "Hilbert matrices vs series oracle", d, 1e-6);
  } else {
    rep.lines.push_back("SKIP Hilbert matrices vs series oracle: M > 120");
  }

  const double asym = (tm.A_ht - tm.A_ht.transpose()).cwiseAbs().maxCoeff() / tm.A_ht.cwiseAbs().maxCoeff();
  add(asym < 1e-9, "A_ht relative asymmetry", asym, 1e-9);
  const Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (tm.A_ht + tm.A_ht.transpose()));
  rep.lines.push_back(llt.info() == Eigen::Success ? "PASS A_ht positive definite" : "FAIL A_ht positive definite");
  rep.ok = rep.ok && llt.info() == Eigen::Success;

  const long MN = static_cast<long>(L.basis.size()) * L.sx.size();
  if (MN <= 6000) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd G(L.sx.size(), L.basis.size());
    for (Eigen::Index i = 0; i < G.size(); ++i)
      G.data()[i] = nd(rng);
    SolverStrategy ref = config.strategy, bs = config.strategy;
    ref.kind = SolverKind::reference_dense;
    bs.kind = SolverKind::bartels_stewart;
    const auto u0 = solve(tm, L.sx, G, ref);
    const auto u1 = solve(tm, L.sx, G, bs);
    const double d = (u0.U - u1.U).norm() / u0.U.norm();
    add(d < 1e-8, "Bartels-Stewart vs reference solver", d, 1e-8);
  } else {
    rep.lines.push_back("SKIP Bartels-Stewart vs reference solver: M*N > 6000");
  }
  return rep;
}

} // namespace sthp
