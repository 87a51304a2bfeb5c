// vsfp: batch runner for repeated-game learning experiments.
//
//   vsfp simulate --config cfg.json [--out DIR] [--jobs N] [--stride full|geometric]
//   vsfp reproduce --scenario NAME [--scenarios-dir DIR] [--out DIR] [--jobs N]
//
// Exit codes: 0 success, 1 runtime or threshold failure, 2 config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "vsfp/config.hpp"
#include "vsfp/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;

int cmd_simulate(const std::string& config_path, const std::string& out, int jobs,
                 const std::string& stride) {
  vsfp::ExperimentConfig cfg;
  try {
    cfg = vsfp::load_config(config_path);
    if (stride == "full") cfg.stride = vsfp::LogStride::full;
    if (stride == "geometric") {
      if (cfg.analysis.noise || cfg.analysis.monitor || cfg.analysis.tracking) {
        throw vsfp::ConfigError("stride", "analyses need stride 'full'");
      }
      cfg.stride = vsfp::LogStride::geometric;
    }
  } catch (const vsfp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const auto dir = out.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out);
    const auto result = vsfp::simulate(cfg, dir, jobs);
    const auto& agg = result.summary.at("aggregate");
    std::cout << "name " << cfg.name << "  config " << cfg.hash << "  N " << cfg.N << "  seeds "
              << cfg.seeds.size() << '\n'
              << "mean e_N " << agg.at("mean_e_N").get<double>() << "  median e_N "
              << agg.at("median_e_N").get<double>() << "  max tail max "
              << agg.at("max_tail_max").get<double>() << '\n'
              << "outputs in " << dir.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

int cmd_reproduce(const std::string& scenario, const std::string& dir, const std::string& out,
                  int jobs) {
  nlohmann::json def;
  try {
    def = vsfp::read_json(std::filesystem::path(dir) / (scenario + ".json"));
  } catch (const vsfp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  vsfp::ScenarioReport report;
  try {
    report = vsfp::reproduce(def, jobs, &std::cerr);
  } catch (const vsfp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kFailure;
  }
  for (const auto& c : report.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.metric << " = " << c.value << ' ' << c.relation
              << ' ' << c.threshold << '\n';
  }
  if (report.details.contains("measured_limit")) {
    std::cout << "measured limit " << report.details.at("measured_limit").get<double>() << '\n';
  }
  std::cout << scenario << ": " << (report.pass() ? "PASS" : "FAIL") << '\n';
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream f(std::filesystem::path(out) / (scenario + "_report.json"));
    f << report.to_json().dump(2) << '\n';
  }
  if (!report.pass()) {
    for (const auto& c : report.checks) {
      if (!c.pass) std::cerr << "threshold violated: " << c.metric << " = " << c.value << '\n';
    }
    return kFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated-game learning experiments: simulation and canned reproductions"};
  app.require_subcommand(1);
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  std::string config_path, out, stride;
  auto* sim = app.add_subcommand("simulate", "Run an experiment config");
  sim->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sim->add_option("--out", out, "Output directory (default: config output_dir)");
  sim->add_option("--jobs", jobs, "Seeds run in parallel")->check(CLI::PositiveNumber);
  sim->add_option("--stride", stride, "Trajectory logging stride")
      ->check(CLI::IsMember({"full", "geometric"}));

  std::string scenario, scenarios_dir = VSFP_SCENARIO_DIR, report_out;
  auto* rep = app.add_subcommand("reproduce", "Run a canned scenario against its thresholds");
  rep->add_option("--scenario", scenario, "Scenario name")
      ->required()
      ->check(CLI::IsMember({"example1", "example2", "consistency_sweep", "bounds_check"}));
  rep->add_option("--scenarios-dir", scenarios_dir, "Directory of scenario definitions");
  rep->add_option("--out", report_out, "Directory for the JSON report");
  rep->add_option("--jobs", jobs, "Seeds run in parallel")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (*sim) return cmd_simulate(config_path, out, jobs, stride);
  return cmd_reproduce(scenario, scenarios_dir, report_out, jobs);
}
