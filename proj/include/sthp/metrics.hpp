#ifndef STHP_METRICS_HPP
#define STHP_METRICS_HPP

#include "sthp/problems.hpp"
#include "sthp/spacetime.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace sthp {

struct ErrorQuadrature
{
  int temporal_extra = 8;       // Gauss points per element: factor * (p_j + temporal_extra)
  int factor = 1;
  int geometric_levels = 40;    // first element, InitialLayer::sqrt_like
  int power_points = 64;        // first element, InitialLayer::power
  double power_exponent = 5.0;  // t = t_1 s^k
  int spatial_degree = 6;       // triangles
  int spatial_points_1d = 10;   // Gauss points per interval
  // > 0: recompute with doubled orders and throw if the value moves by more
  // than this relative amount
  double doubling_tolerance = 0.0;

  ErrorQuadrature doubled() const;
  bool operator==(const ErrorQuadrature &) const = default;
};

struct ErrorParts
{
  double l2 = 0.0;    // ||u - u_h||_{L2(Q)}
  double l2_dt = 0.0; // ||d/dt (u - u_h)||_{L2(Q)}
  double value() const;
};

/// [u - u_h] = sqrt(||u - u_h|| ||d/dt(u - u_h)||) by element-wise tensor quadrature.
ErrorParts error_functional(const SpaceTimeSolution &sol, const TemporalBasis &basis, const SpatialSystem &sx,
                            const ManufacturedProblem &prob, const ErrorQuadrature &quad = {});

/// Same functional for a purely temporal error u - sum_k c_k phi_k.
ErrorParts temporal_error_functional(const Eigen::VectorXd &coeffs, const TemporalBasis &basis,
                                     const std::function<double(double)> &u, const std::function<double(double)> &du,
                                     InitialLayer layer = InitialLayer::none, const ErrorQuadrature &quad = {});

struct StudyRecord
{
  long MN = 0;
  int M = 0;
  int N = 0;
  double h_x = 0.0;
  double k_max = 0.0;
  double error = 0.0;
  double wall_time = 0.0;
};

/// eoc_i = log(e_{i-1}/e_i) / log(h_{i-1}/h_i); entry 0 and undefined rates
/// (zero errors, equal widths) are NaN.
std::vector<double> eoc(const std::vector<StudyRecord> &records);

/// Same formula with the effective width h = (MN)^{-1/(dim+1)} of a space-time
/// mesh; for tensor P1 in 1D this is 2 log(e_{i-1}/e_i) / log(MN_i/MN_{i-1}).
std::vector<double> eoc_dofs(const std::vector<StudyRecord> &records, int dim);

struct LinearFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0; // root mean square of the fit residuals
};

LinearFit least_squares(const std::vector<double> &x, const std::vector<double> &y);

/// log e against sqrt(M): returns b = -slope.
struct ExpFit
{
  double b = 0.0;
  double residual = 0.0;
  bool good = false; // residual below `threshold`
};
ExpFit exp_fit(const std::vector<StudyRecord> &records, double threshold = 0.1);

/// log e against log M (the algebraic alternative to exp_fit).
LinearFit algebraic_fit_in_M(const std::vector<StudyRecord> &records);

/// Rate r in e ~ (MN)^{-r} from a least squares fit over the records.
LinearFit rate_in_MN(const std::vector<StudyRecord> &records);

/// Delimited text with header MN,M,N,h_x,k_max,error,eoc,eoc_h,wall_time where
/// eoc is eoc_dofs(records, dim) and eoc_h the mesh width based rate. Timings are
/// written as "-" unless `with_timings`, so the file stays reproducible.
void write_records_csv(std::ostream &out, const std::vector<StudyRecord> &records, int dim, bool with_timings);

} // namespace sthp

#endif
