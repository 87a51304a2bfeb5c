#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsfp/game.hpp"
#include "vsfp/strategies.hpp"

namespace vsfp {

enum class LogStride { full, geometric };

struct RunOptions {
  LogStride stride = LogStride::geometric;
  /// Stages at which the tail statistic max_{N_c/2 <= n <= N_c} e_n is
  /// tracked; the horizon N is always added.
  std::vector<std::int64_t> checkpoints;
  /// Opaque label copied into the run metadata.
  std::string config_hash;
};

/// One logged stage n (1-based).
struct StageRecord {
  std::int64_t n = 0;
  std::size_t i = 0;
  std::size_t l = 0;
  double payoff = 0.0;
  std::vector<double> learner_mix;
  std::vector<double> adversary_mix;
  std::vector<double> x_bar;
  std::vector<double> y_bar;
  double pi_bar = 0.0;
  double regret = 0.0;

  StateTriple state() const;
};

struct TailStatistic {
  std::int64_t checkpoint = 0;
  double tail_max = 0.0;
};

/// Record of one repeated-game run. Pure actions are kept for every stage;
/// full records follow the logging stride.
struct Trajectory {
  PayoffMatrix game;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::int64_t horizon = 0;
  LogStride stride = LogStride::geometric;
  std::vector<std::uint16_t> learner_actions;
  std::vector<std::uint16_t> adversary_actions;
  std::vector<StageRecord> records;
  std::vector<TailStatistic> tails;

  /// Record of stage n; requires full stride.
  const StageRecord& at(std::int64_t n) const;
  double tail_max() const { return tails.back().tail_max; }
  const StageRecord& last() const { return records.back(); }
};

/// Error raised inside the stage loop, tagged with the failing stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::int64_t stage, const std::string& what)
      : std::runtime_error("stage " + std::to_string(stage) + ": " + what), stage_(stage) {}
  std::int64_t stage() const { return stage_; }

 private:
  std::int64_t stage_;
};

/// Plays N stages. Learner and nature sample from independent streams
/// derived from `seed`.
Trajectory run(const PayoffMatrix& pm, const StrategySpec& learner,
               const StrategySpec& adversary, const SimplexPoint& prior, std::int64_t N,
               std::uint64_t seed, const RunOptions& options = {});

/// U_n = (delta_{i_n} - x_mix_n, delta_{l_n} - y_mix_n, pi(i_n, l_n) - pi(x_mix_n, y_mix_n)),
/// the martingale increment of the recursion rescaled by 1 / gamma_n.
struct NoiseRecord {
  std::int64_t first_stage = 1;
  std::vector<std::vector<double>> increments;

  /// U_n for stage n.
  const std::vector<double>& at(std::int64_t n) const {
    return increments.at(static_cast<std::size_t>(n - first_stage));
  }
  std::int64_t last_stage() const {
    return first_stage + static_cast<std::int64_t>(increments.size()) - 1;
  }
};

class NoiseUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

NoiseRecord extract_noise(const Trajectory& traj);

struct RegretSeries {
  std::vector<std::int64_t> stages;
  std::vector<double> values;
  double tail_max = 0.0;
};

RegretSeries regret_series(const Trajectory& traj, int stride);

/// Recomputes pi_bar_N from the pure-action log by direct summation.
double recompute_average_payoff(const Trajectory& traj);

/// CSV: n,i,l,payoff,x_bar_*,y_bar_*,pi_bar,e_n
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
std::string trajectory_csv_header(std::size_t n_rows, std::size_t n_cols);

}  // namespace vsfp
