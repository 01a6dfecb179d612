#ifndef STHP_HILBERT_HPP
#define STHP_HILBERT_HPP

#include "sthp/temporal.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sthp {

/// Orders used by the element-pair quadrature. `scale` multiplies every
/// order; tests assemble with scale 2 to check convergence.
struct HilbertQuadConfig
{
  int gauss_extra = 6; // smooth part: p_i + p_j + gauss_extra per direction
  int log_extra = 4;   // log rules: max(p_i,p_j) + log_extra
  int scale = 1;
  int max_order = 160;
};

/// Matrices of the modified Hilbert transform on the temporal trial space.
/// Row k is the test function (the one H_T acts on), column l the trial
/// function: M_ht(k,l) = <phi_l, H_T phi_k>, A_ht(k,l) = <d/dt phi_l, H_T phi_k>.
/// The *_ext variants carry one more column, index M, for the hat function at
/// t=0 (needed when projecting right-hand sides).
struct TemporalMatrices
{
  Eigen::MatrixXd M_ht;
  Eigen::MatrixXd A_ht;
  Eigen::MatrixXd M_ht_ext;
  Eigen::MatrixXd A_ht_ext;
  std::uint64_t mesh_hash = 0;
};

/// ln[tan(pi(s+t)/(4T)) tan(pi|t-s|/(4T))]. Throws std::domain_error for s == t
/// and for s + t in {0, 2T}.
double hilbert_kernel(double s, double t, double T);

/// Weighted points (s,t,w) approximating the integral of K(s,t) F(s,t) over
/// element pair I_i x I_j for polynomial F of the pair's degrees.
struct KernelPoints
{
  std::vector<double> s, t, w;
  void push(double s_, double t_, double w_)
  {
    s.push_back(s_);
    t.push_back(t_);
    w.push_back(w_);
  }
  std::size_t size() const { return w.size(); }
};

KernelPoints kernel_pair_rule(const TemporalMesh &mesh, int i, int j, const HilbertQuadConfig &cfg = {});

TemporalMatrices assemble_hilbert(const TemporalBasis &basis, const HilbertQuadConfig &cfg = {});

/// Row-major binary dump: header (int64 M, uint64 mesh hash), then M_ht, then A_ht.
void write_hilbert_matrices(const std::string &path, const TemporalMatrices &mats);
TemporalMatrices read_hilbert_matrices(const std::string &path);

} // namespace sthp

#endif
