#ifndef STHP_STUDY_HPP
#define STHP_STUDY_HPP

#include "sthp/metrics.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sthp {

enum class TimeScheme
{
  uniform, // m = ceil(T / (k_ratio h_x)) elements of degree `degree`
  pfem,    // `elements` elements of degree max(1, floor(p_log ln N))
  hp       // geometric mesh, m1 = floor(m1_log ln N)
};

enum class SpaceScheme
{
  uniform, // 1D: 2^{L+1} intervals; 2D: L uniform refinements of the L-shape
  graded   // 2D only: refine_graded(lshape, 2^{-L}, beta, R)
};

struct StudyConfig
{
  std::string name = "study";
  std::string problem = "u1";
  int first_level = 1;
  int last_level = 4;

  TimeScheme time = TimeScheme::uniform;
  int degree = 1;
  double k_ratio = 2.0;
  int elements = 4;
  double p_log = 0.5;
  double sigma = 0.5;
  double mu_hp = 1.0;
  double m1_log = 1.0;
  int m2 = 1;

  SpaceScheme space = SpaceScheme::uniform;
  double beta = 0.6;
  double R = 0.25;

  SolverStrategy strategy;

  ErrorQuadrature quadrature;
  int projection_first_levels = -1; // -1: 30 when the forcing is singular at t = 0, else 0

  bool operator==(const StudyConfig &) const = default;
};

/// Parse or validation error; `line` is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(int line, const std::string &field, const std::string &message);
  int line() const { return line_; }
  const std::string &field() const { return field_; }

private:
  int line_;
  std::string field_;
};

/// Key-value text with [sections]; '#' and ';' start comments. Unknown keys,
/// malformed numbers and out of range parameters throw ConfigError.
StudyConfig parse_config(std::istream &in);
StudyConfig load_config(const std::string &path);
/// Throws ConfigError for inconsistent parameters (field named, line 0).
void validate(const StudyConfig &config);
/// Canonical form: every key, fixed order, round-trip exact numbers.
std::string normalized(const StudyConfig &config);

std::string to_string(TimeScheme s);
std::string to_string(SpaceScheme s);

/// Discretization of one refinement level.
struct Level
{
  int level = 0;
  double h_x = 0.0;
  SpatialSystem sx;
  TemporalBasis basis;
  TemporalMatrices tm;
};

/// Spatial mesh of a level (cheap compared to the full Level).
SpatialMesh level_mesh(const StudyConfig &config, int level);
TemporalMesh level_temporal_mesh(const StudyConfig &config, int N, double h_x);
Level build_level(const StudyConfig &config, int level);

struct LevelOutcome
{
  int level = 0;
  enum class Status
  {
    ok,
    skipped,
    failed
  } status = Status::ok;
  std::string message;
  std::vector<std::string> warnings;
};

struct StudyResult
{
  std::vector<StudyRecord> records;
  std::vector<LevelOutcome> outcomes;
  int dim = 1;
  /// 0 all levels solved, 2 some level skipped or failed.
  int exit_code() const;
};

struct RunOptions
{
  std::ostream *log = nullptr; // one line per level when set
};

/// Runs the levels in order. A level that hits the memory guard or throws is
/// recorded in `outcomes` and the study continues with the next level.
StudyResult run_study(const StudyConfig &config, const RunOptions &options = {});

/// Fixed-width table with columns MN, M, N, h_x, k_max, error, eoc (effective
/// space-time width); errors as %.3e, widths as %.5f, missing eoc as "-".
std::string emit_table(const std::vector<StudyRecord> &records, int dim);

/// Two columns (MN error) per line, %.17g.
std::string plot_data(const std::vector<StudyRecord> &records);

} // namespace sthp

#endif
