#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vsfp/config.hpp"
#include "vsfp/ctanalysis.hpp"
#include "vsfp/engine.hpp"

namespace vsfp {

struct WindowCheck {
  double a = 0.0;
  double b = 0.0;
  double deviation = 0.0;
  double bound = 0.0;
  double Delta = 0.0;
  double delta_sup = 0.0;
};

struct SeedSummary {
  std::uint64_t seed = 0;
  double e_N = 0.0;
  double pi_bar = 0.0;
  double tail_max = 0.0;
  std::vector<TailStatistic> tails;
  /// Share of odd (even) stages with realized payoff 1.
  double odd_payoff_one = 0.0;
  double even_payoff_one = 0.0;
  std::optional<double> monitor_tail_phi;
  std::vector<double> unit_window_Delta;
  std::vector<WindowCheck> tracking;
};

/// Runs `seeds` on up to `jobs` threads. `per_seed` runs on the worker right
/// after each trajectory, before it is dropped. Results keep seed order.
std::vector<SeedSummary> run_seeds(
    const PayoffMatrix& pm, const StrategySpec& learner, const StrategySpec& adversary,
    const SimplexPoint& prior, std::int64_t N, const std::vector<std::uint64_t>& seeds,
    const RunOptions& options, int jobs,
    const std::function<void(const Trajectory&, SeedSummary&)>& per_seed = {});

SeedSummary summarize(const Trajectory& traj);

/// DI problem matching a VSFP learner spec.
DIProblem di_problem(const PayoffMatrix& pm, const StrategySpec& learner);

/// Psi(t) and Psi(t + T) along an Euler solution started at w0 at time t,
/// with the bound e^{-T} Psi(t) + 1 / beta_{m(t)}.
struct DecayCheck {
  double psi_start = 0.0;
  double psi_end = 0.0;
  double bound = 0.0;
};
DecayCheck lyapunov_decay(const DIProblem& prob, const StateTriple& w0, double t, double T,
                          double h, const SelectionPolicy& policy);

/// Tracking solution against a full-stride stochastic path on [a, b]:
/// sup ||w - v|| and R(a, b) with L(s) = prob.lipschitz(s).
WindowCheck tracking_window(const DIProblem& prob, const InterpolatedPath& path,
                            const NoiseRecord& noise, double a, double b, double h);

/// Output of `simulate`: per-seed CSV plus metadata sidecar, and a summary.
struct SimulateResult {
  std::vector<SeedSummary> seeds;
  nlohmann::json summary;
};
SimulateResult simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                        int jobs);

nlohmann::json trajectory_metadata(const ExperimentConfig& cfg, std::uint64_t seed);

/// One thresholded metric of a reproduction scenario.
struct ScenarioCheck {
  std::string metric;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  ///< "<=" or ">="
  bool pass = false;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<ScenarioCheck> checks;
  nlohmann::json details;
  bool pass() const;
  nlohmann::json to_json() const;
};

/// Runs a canned scenario definition (see scenarios/*.json).
ScenarioReport reproduce(const nlohmann::json& scenario, int jobs,
                         std::ostream* progress = nullptr);

/// (a + b) / 2 with a = 1/2 - 1/(1 + e^{1/3}), b = 1/2 - 1/(1 + e^{2/3}).
double example2_limit();

}  // namespace vsfp
