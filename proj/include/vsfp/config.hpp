#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vsfp/engine.hpp"
#include "vsfp/game.hpp"
#include "vsfp/strategies.hpp"

namespace vsfp {

/// Rejected configuration; `field` is the dotted path of the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct AnalysisToggles {
  bool noise = false;
  bool monitor = false;
  bool tracking = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  PayoffMatrix game = PayoffMatrix::matching_pennies();
  StrategySpec learner;
  StrategySpec adversary = StrategySpec::alternating();
  SimplexPoint prior;
  std::int64_t N = 0;
  std::vector<std::uint64_t> seeds;
  LogStride stride = LogStride::geometric;
  std::vector<std::int64_t> checkpoints;
  AnalysisToggles analysis;
  std::string output_dir = "out";
  /// FNV-1a of the canonical JSON form.
  std::string hash;
};

/// Game from either "matching_pennies", {"rows": [[...]]} or
/// {"random": {"rows": R, "cols": C, "seed": S}} (entries uniform in [-1, 1]).
PayoffMatrix parse_game(const nlohmann::json& j, const std::string& field = "game");
PayoffMatrix random_game(std::size_t rows, std::size_t cols, std::uint64_t seed);

BetaSchedule parse_schedule(const nlohmann::json& j, const std::string& field);
StrategySpec parse_strategy(const nlohmann::json& j, const std::string& field);

/// Validates every field; throws ConfigError naming the first bad one.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& text);

}  // namespace vsfp
