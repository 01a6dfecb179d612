#include "sthp/study.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sthp {

ConfigError::ConfigError(int line, const std::string &field, const std::string &message)
  : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + message)
  , line_(line)
  , field_(field)
{
}

std::string to_string(TimeScheme s)
{
  switch (s) {
  case TimeScheme::uniform:
    return "uniform";
  case TimeScheme::pfem:
    return "pfem";
  case TimeScheme::hp:
    return "hp";
  }
  return "?";
}

std::string to_string(SpaceScheme s)
{
  return s == SpaceScheme::uniform ? "uniform" : "graded";
}

namespace {

std::string trim(const std::string &s)
{
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string format_double(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
T parse_number(const std::string &text, const std::string &field)
{
  T v{};
  const auto *end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end)
    throw ConfigError(0, field, "cannot read '" + text + "' as a number");
  return v;
}

struct Field
{
  std::function<void(StudyConfig &, const std::string &)> set;
  std::function<std::string(const StudyConfig &)> get;
};

template <class T>
Field number(T StudyConfig::*member, const std::string &key)
{
  return {[member, key](StudyConfig &c, const std::string &v) { c.*member = parse_number<T>(v, key); },
          [member](const StudyConfig &c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(c.*member);
            else
              return std::to_string(c.*member);
          }};
}

template <class T, class S>
Field nested(S StudyConfig::*outer, T S::*member, const std::string &key)
{
  return {[outer, member, key](StudyConfig &c, const std::string &v) { c.*outer.*member = parse_number<T>(v, key); },
          [outer, member](const StudyConfig &c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(c.*outer.*member);
            else
              return std::to_string(c.*outer.*member);
          }};
}

// ordered: the normalized form follows this list
const std::vector<std::pair<std::string, Field>> &fields()
{
  static const std::vector<std::pair<std::string, Field>> f = {
      {"study.name", {[](StudyConfig &c, const std::string &v) { c.name = v; }, [](const StudyConfig &c) { return c.name; }}},
      {"study.problem",
       {[](StudyConfig &c, const std::string &v) { c.problem = v; }, [](const StudyConfig &c) { return c.problem; }}},
      {"study.first_level", number(&StudyConfig::first_level, "study.first_level")},
      {"study.last_level", number(&StudyConfig::last_level, "study.last_level")},
      {"time.scheme",
       {[](StudyConfig &c, const std::string &v) {
          if (v == "uniform")
            c.time = TimeScheme::uniform;
          else if (v == "pfem")
            c.time = TimeScheme::pfem;
          else if (v == "hp")
            c.time = TimeScheme::hp;
          else
            throw ConfigError(0, "time.scheme", "expected uniform, pfem or hp, got '" + v + "'");
        },
        [](const StudyConfig &c) { return to_string(c.time); }}},
      {"time.degree", number(&StudyConfig::degree, "time.degree")},
      {"time.k_ratio", number(&StudyConfig::k_ratio, "time.k_ratio")},
      {"time.elements", number(&StudyConfig::elements, "time.elements")},
      {"time.p_log", number(&StudyConfig::p_log, "time.p_log")},
      {"time.sigma", number(&StudyConfig::sigma, "time.sigma")},
      {"time.mu_hp", number(&StudyConfig::mu_hp, "time.mu_hp")},
      {"time.m1_log", number(&StudyConfig::m1_log, "time.m1_log")},
      {"time.m2", number(&StudyConfig::m2, "time.m2")},
      {"space.scheme",
       {[](StudyConfig &c, const std::string &v) {
          if (v == "uniform")
            c.space = SpaceScheme::uniform;
          else if (v == "graded")
            c.space = SpaceScheme::graded;
          else
            throw ConfigError(0, "space.scheme", "expected uniform or graded, got '" + v + "'");
        },
        [](const StudyConfig &c) { return to_string(c.space); }}},
      {"space.beta", number(&StudyConfig::beta, "space.beta")},
      {"space.R", number(&StudyConfig::R, "space.R")},
      {"solver.strategy",
       {[](StudyConfig &c, const std::string &v) {
          try {
            c.strategy.kind = solver_kind_from_string(v);
          } catch (const std::invalid_argument &e) {
            throw ConfigError(0, "solver.strategy", e.what());
          }
        },
        [](const StudyConfig &c) { return to_string(c.strategy.kind); }}},
      {"solver.residual_tol", nested(&StudyConfig::strategy, &SolverStrategy::residual_tol, "solver.residual_tol")},
      {"solver.schur_tol", nested(&StudyConfig::strategy, &SolverStrategy::schur_tol, "solver.schur_tol")},
      {"solver.schur_sweeps_per_row",
       nested(&StudyConfig::strategy, &SolverStrategy::schur_sweeps_per_row, "solver.schur_sweeps_per_row")},
      {"solver.dense_limit", nested(&StudyConfig::strategy, &SolverStrategy::dense_limit, "solver.dense_limit")},
      {"solver.memory_guard", nested(&StudyConfig::strategy, &SolverStrategy::memory_guard, "solver.memory_guard")},
      {"quadrature.temporal_extra",
       nested(&StudyConfig::quadrature, &ErrorQuadrature::temporal_extra, "quadrature.temporal_extra")},
      {"quadrature.geometric_levels",
       nested(&StudyConfig::quadrature, &ErrorQuadrature::geometric_levels, "quadrature.geometric_levels")},
      {"quadrature.power_points",
       nested(&StudyConfig::quadrature, &ErrorQuadrature::power_points, "quadrature.power_points")},
      {"quadrature.power_exponent",
       nested(&StudyConfig::quadrature, &ErrorQuadrature::power_exponent, "quadrature.power_exponent")},
      {"quadrature.spatial_degree",
       nested(&StudyConfig::quadrature, &ErrorQuadrature::spatial_degree, "quadrature.spatial_degree")},
      {"quadrature.spatial_points_1d",
       nested(&StudyConfig::quadrature, &ErrorQuadrature::spatial_points_1d, "quadrature.spatial_points_1d")},
      {"quadrature.doubling_tolerance",
       nested(&StudyConfig::quadrature, &ErrorQuadrature::doubling_tolerance, "quadrature.doubling_tolerance")},
      {"quadrature.projection_first_levels",
       number(&StudyConfig::projection_first_levels, "quadrature.projection_first_levels")},
  };
  return f;
}

int problem_dim(const std::string &name)
{
  return make_problem(name).dim;
}

} // namespace

void validate(const StudyConfig &c)
{
  const auto fail = [](const std::string &field, const std::string &msg) { throw ConfigError(0, field, msg); };
  if (c.name.empty() || c.name.find_first_of("/\\ ") != std::string::npos)
    fail("study.name", "must be non-empty without spaces or path separators");
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), c.problem) == names.end())
    fail("study.problem", "unknown problem '" + c.problem + "' (expected u1, u2 or u3)");
  if (c.first_level < 0)
    fail("study.first_level", "must be >= 0");
  if (c.last_level < c.first_level)
    fail("study.last_level", "must be >= first_level");
  if (c.last_level > 30)
    fail("study.last_level", "must be <= 30");
  if (c.degree < 1)
    fail("time.degree", "must be >= 1");
  if (!(c.k_ratio > 0.0))
    fail("time.k_ratio", "must be positive");
  if (c.elements < 1)
    fail("time.elements", "must be >= 1");
  if (!(c.p_log > 0.0))
    fail("time.p_log", "must be positive");
  if (!(c.sigma > 0.0 && c.sigma < 1.0))
    fail("time.sigma", "grading parameter sigma must lie in (0,1)");
  if (!(c.mu_hp >= 1.0))
    fail("time.mu_hp", "slope parameter mu_hp must be >= 1");
  if (!(c.m1_log > 0.0))
    fail("time.m1_log", "must be positive");
  if (c.m2 < 0)
    fail("time.m2", "must be >= 0");
  const int dim = problem_dim(c.problem);
  if (c.space == SpaceScheme::graded && dim != 2)
    fail("space.scheme", "graded meshes need a two-dimensional problem");
  if (!(c.beta > 0.0 && c.beta <= 1.0))
    fail("space.beta", "must lie in (0,1]");
  if (!(c.R > 0.0))
    fail("space.R", "must be positive");
  if (!(c.strategy.residual_tol > 0.0))
    fail("solver.residual_tol", "must be positive");
  if (!(c.strategy.schur_tol > 0.0))
    fail("solver.schur_tol", "must be positive");
  if (c.strategy.schur_sweeps_per_row < 1)
    fail("solver.schur_sweeps_per_row", "must be >= 1");
  if (c.strategy.dense_limit < 1)
    fail("solver.dense_limit", "must be >= 1");
  if (c.strategy.memory_guard < 1)
    fail("solver.memory_guard", "must be >= 1");
  const auto &q = c.quadrature;
  if (q.temporal_extra < 0)
    fail("quadrature.temporal_extra", "must be >= 0");
  if (q.geometric_levels < 1)
    fail("quadrature.geometric_levels", "must be >= 1");
  if (q.power_points < 1)
    fail("quadrature.power_points", "must be >= 1");
  if (!(q.power_exponent >= 1.0))
    fail("quadrature.power_exponent", "must be >= 1");
  if (q.spatial_degree < 1)
    fail("quadrature.spatial_degree", "must be >= 1");
  if (q.spatial_points_1d < 1)
    fail("quadrature.spatial_points_1d", "must be >= 1");
  if (!(q.doubling_tolerance >= 0.0))
    fail("quadrature.doubling_tolerance", "must be >= 0");
  if (q.factor != 1)
    fail("quadrature.factor", "must be 1");
  if (c.projection_first_levels < -1)
    fail("quadrature.projection_first_levels", "must be >= -1");
}

StudyConfig parse_config(std::istream &in)
{
  StudyConfig c;
  std::map<std::string, int> seen;
  std::string section, raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty())
      continue;
    if (text.front() == '[') {
      if (text.back() != ']')
        throw ConfigError(line, "section", "missing ']' in '" + text + "'");
      section = trim(text.substr(1, text.size() - 2));
      static const char *known[] = {"study", "time", "space", "solver", "quadrature"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known))
        throw ConfigError(line, "section", "unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "syntax", "expected 'key = value', got '" + text + "'");
    if (section.empty())
      throw ConfigError(line, "syntax", "key outside of a [section]");
    const std::string key = section + "." + trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const auto &fs = fields();
    const auto it = std::find_if(fs.begin(), fs.end(), [&](const auto &f) { return f.first == key; });
    if (it == fs.end())
      throw ConfigError(line, key, "unknown key");
    if (seen.count(key))
      throw ConfigError(line, key, "duplicate key (first set on line " + std::to_string(seen[key]) + ")");
    seen[key] = line;
    if (value.empty())
      throw ConfigError(line, key, "missing value");
    try {
      it->second.set(c, value);
    } catch (const ConfigError &e) {
      throw ConfigError(line, key, std::string(e.what()).substr(key.size() + 2));
    }
  }
  try {
    validate(c);
  } catch (const ConfigError &e) {
    const auto it = seen.find(e.field());
    const std::string msg = std::string(e.what()).substr(e.field().size() + 2);
    throw ConfigError(it == seen.end() ? 0 : it->second, e.field(), msg);
  }
  return c;
}

StudyConfig load_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError(0, "file", "cannot open '" + path + "'");
  return parse_config(in);
}

std::string normalized(const StudyConfig &config)
{
  std::ostringstream out;
  std::string section;
  for (const auto &[key, f] : fields()) {
    const auto dot = key.find('.');
    const auto sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty())
        out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << f.get(config) << "\n";
  }
  return out.str();
}

// ---- levels -----------------------------------------------------------------

namespace {

double nominal_width(int dim, int level)
{
  return dim == 1 ? std::ldexp(1.0, -(level + 1)) : std::ldexp(1.0, -level);
}

} // namespace

SpatialMesh level_mesh(const StudyConfig &config, int level)
{
  const auto prob = make_problem(config.problem);
  const double h = nominal_width(prob.dim, level);
  if (prob.dim == 1)
    return uniform_interval_mesh(0.0, 1.0, 1 << (level + 1));
  if (config.space == SpaceScheme::graded)
    return refine_graded(lshape_mesh(), h, config.beta, config.R);
  auto mesh = lshape_mesh();
  for (int i = 0; i < level; ++i)
    mesh = refine_uniform(mesh);
  return mesh;
}

TemporalMesh level_temporal_mesh(const StudyConfig &config, int N, double h_x)
{
  const double T = make_problem(config.problem).T;
  const double lnN = std::log(static_cast<double>(std::max(N, 1)));
  switch (config.time) {
  case TimeScheme::uniform: {
    const int m = std::max(1, static_cast<int>(std::ceil(T / (config.k_ratio * h_x) - 1e-9)));
    return uniform_mesh(T, m, config.degree);
  }
  case TimeScheme::pfem:
    return uniform_mesh(T, config.elements, std::max(1, static_cast<int>(std::floor(config.p_log * lnN))));
  case TimeScheme::hp: {
    TemporalMeshSpec spec{T, config.sigma, config.mu_hp, static_cast<int>(std::floor(config.m1_log * lnN)),
                          T > 1.0 ? config.m2 : 0};
    return build_mesh(spec);
  }
  }
  throw std::logic_error("level_temporal_mesh: unknown scheme");
}

Level build_level(const StudyConfig &config, int level)
{
  const int dim = make_problem(config.problem).dim;
  Level L{level, 0.0, assemble_spatial(level_mesh(config, level)), TemporalBasis(TemporalMesh({0.0, 1.0}, {1})), {}};
  L.h_x = L.sx.mesh.hx();
  L.basis = TemporalBasis(level_temporal_mesh(config, L.sx.size(), nominal_width(dim, level)));
  L.tm = assemble_hilbert(L.basis);
  return L;
}

int StudyResult::exit_code() const
{
  for (const auto &o : outcomes)
    if (o.status != LevelOutcome::Status::ok)
      return 2;
  return 0;
}

StudyResult run_study(const StudyConfig &config, const RunOptions &options)
{
  validate(config);
  const auto prob = make_problem(config.problem);
  StudyResult result;
  result.dim = prob.dim;
  ProjectionOptions popt;
  popt.first_element_levels = config.projection_first_levels >= 0 ? config.projection_first_levels
                                                                  : (prob.layer == InitialLayer::power ? 30 : 0);

  for (int level = config.first_level; level <= config.last_level; ++level) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    LevelOutcome out;
    out.level = level;
    try {
      auto smesh = level_mesh(config, level);
      const int N = smesh.num_free();
      const auto tmesh = level_temporal_mesh(config, N, nominal_width(prob.dim, level));
      const long MN = static_cast<long>(tmesh.dofs()) * N;
      if (MN > config.strategy.memory_guard) {
        out.status = LevelOutcome::Status::skipped;
        out.message = "M*N = " + std::to_string(MN) + " exceeds the memory guard "
                      + std::to_string(config.strategy.memory_guard);
      } else {
        const auto sx = assemble_spatial(smesh);
        const TemporalBasis basis(tmesh);
        const auto tm = assemble_hilbert(basis);
        const auto G = rhs_from_projection(project_rhs(prob.g, basis, sx, popt), tm, sx);
        const auto sol = solve(tm, sx, G, config.strategy);
        out.warnings = sol.warnings;
        const auto err = error_functional(sol, basis, sx, prob, config.quadrature);
        StudyRecord r;
        r.MN = MN;
        r.M = basis.size();
        r.N = sx.size();
        r.h_x = sx.mesh.hx();
        r.k_max = tmesh.k_max();
        r.error = err.value();
        r.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
        result.records.push_back(r);
      }
    } catch (const std::length_error &e) {
      out.status = LevelOutcome::Status::skipped;
      out.message = e.what();
    } catch (const std::exception &e) {
      out.status = LevelOutcome::Status::failed;
      out.message = e.what();
    }
    if (options.log) {
      char buf[256];
      if (out.status == LevelOutcome::Status::ok) {
        const auto &r = result.records.back();
        std::snprintf(buf, sizeof buf, "level %d: M=%d N=%d error %.4e\n", level, r.M, r.N, r.error);
      } else {
        std::snprintf(buf, sizeof buf, "level %d: %s: %s\n", level,
                      out.status == LevelOutcome::Status::skipped ? "skipped" : "failed", out.message.c_str());
      }
      *options.log << buf;
      for (const auto &w : out.warnings)
        *options.log << "  warning: " << w << "\n";
      options.log->flush();
    }
    result.outcomes.push_back(std::move(out));
  }
  return result;
}

std::string emit_table(const std::vector<StudyRecord> &records, int dim)
{
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%12s %8s %10s %9s %9s %11s %6s\n", "MN", "M", "N", "h_x", "k_max", "error", "eoc");
  out << buf;
  const auto rates = records.empty() ? std::vector<double>{} : eoc_dofs(records, dim);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &r = records[i];
    char rate[32] = "-";
    if (!std::isnan(rates[i]))
      std::snprintf(rate, sizeof rate, "%.2f", rates[i]);
    std::snprintf(buf, sizeof buf, "%12ld %8d %10d %9.5f %9.5f %11.3e %6s\n", r.MN, r.M, r.N, r.h_x, r.k_max, r.error,
                  rate);
    out << buf;
  }
  return out.str();
}

std::string plot_data(const std::vector<StudyRecord> &records)
{
  std::ostringstream out;
  char buf[96];
  for (const auto &r : records) {
    std::snprintf(buf, sizeof buf, "%ld %.17g\n", r.MN, r.error);
    out << buf;
  }
  return out.str();
}

} // namespace sthp
