// Refinement study driver: sthp_study CONFIG [--levels a-b] [--strategy s]
// [--out dir] [--seed n] [--verify] [--timings]

#include "sthp/study.hpp"
#include "sthp/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

bool parse_levels(const std::string &text, int &a, int &b)
{
  const auto dash = text.find('-');
  try {
    std::size_t used = 0;
    if (dash == std::string::npos) {
      a = b = std::stoi(text, &used);
      return used == text.size();
    }
    a = std::stoi(text.substr(0, dash), &used);
    if (used != dash)
      return false;
    const auto rest = text.substr(dash + 1);
    b = std::stoi(rest, &used);
    return used == rest.size();
  } catch (const std::exception &) {
    return false;
  }
}

void write_file(const std::filesystem::path &p, const std::string &text)
{
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + p.string());
  out << text;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Space-time Galerkin refinement studies for the heat equation"};
  std::string config_path, levels, strategy, out_dir = ".";
  std::uint64_t seed = 1;
  bool verify = false, timings = false, print_config = false;
  app.add_option("config", config_path, "study configuration file")->required();
  app.add_option("--levels", levels, "level range a-b (or a single level)");
  app.add_option("--strategy", strategy, "solver: bartels-stewart | reference-dense");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for the randomized verification checks");
  app.add_flag("--verify", verify, "run oracle cross-checks on the first level before solving");
  app.add_flag("--timings", timings, "include wall times in the record file");
  app.add_flag("--print-config", print_config, "print the normalized configuration and exit");
  CLI11_PARSE(app, argc, argv);

  sthp::StudyConfig config;
  try {
    config = sthp::load_config(config_path);
    if (!levels.empty()) {
      int a = 0, b = 0;
      if (!parse_levels(levels, a, b))
        throw sthp::ConfigError(0, "--levels", "expected a-b, got '" + levels + "'");
      config.first_level = a;
      config.last_level = b;
    }
    if (!strategy.empty()) {
      try {
        config.strategy.kind = sthp::solver_kind_from_string(strategy);
      } catch (const std::invalid_argument &e) {
        throw sthp::ConfigError(0, "--strategy", e.what());
      }
    }
    sthp::validate(config);
  } catch (const sthp::ConfigError &e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return 1;
  }

  if (print_config) {
    std::cout << sthp::normalized(config);
    return 0;
  }

  if (verify) {
    const auto rep = sthp::verify_discretization(config, seed);
    for (const auto &l : rep.lines)
      std::cerr << "verify: " << l << "\n";
    if (!rep.ok) {
      std::cerr << "verification failed; no levels solved\n";
      return 2;
    }
  }

  sthp::RunOptions opt;
  opt.log = &std::cerr;
  const auto result = sthp::run_study(config, opt);

  const std::filesystem::path dir(out_dir);
  try {
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    sthp::write_records_csv(csv, result.records, result.dim, timings);
    write_file(dir / (config.name + ".csv"), csv.str());
    write_file(dir / (config.name + ".txt"), sthp::emit_table(result.records, result.dim));
    write_file(dir / (config.name + ".dat"), sthp::plot_data(result.records));
  } catch (const std::exception &e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  std::cout << sthp::emit_table(result.records, result.dim);
  for (const auto &o : result.outcomes)
    if (o.status != sthp::LevelOutcome::Status::ok)
      std::cout << "level " << o.level << " "
                << (o.status == sthp::LevelOutcome::Status::skipped ? "skipped" : "failed") << ": " << o.message
                << "\n";
  return result.exit_code();
}
