#include "vsfp/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vsfp/rng.hpp"

namespace vsfp {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& key, const std::string& field) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(field + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(number(j[k], field + "[" + std::to_string(k) + "]"));
  }
  return out;
}

SimplexPoint simplex(const json& j, const std::string& field, std::size_t dim) {
  auto w = numbers(j, field);
  if (w.size() != dim) {
    throw ConfigError(field, "expected " + std::to_string(dim) + " entries, got " +
                                 std::to_string(w.size()));
  }
  try {
    return SimplexPoint(std::move(w));
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

std::string string_field(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

}  // namespace

PayoffMatrix random_game(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 3));
  std::vector<double> entries(rows * cols);
  for (auto& e : entries) e = 2.0 * uniform01(rng) - 1.0;
  return PayoffMatrix(rows, cols, std::move(entries));
}

PayoffMatrix parse_game(const json& j, const std::string& field) {
  if (j.is_string()) {
    if (j.get<std::string>() == "matching_pennies") return PayoffMatrix::matching_pennies();
    throw ConfigError(field, "unknown named game '" + j.get<std::string>() + "'");
  }
  if (!j.is_object()) throw ConfigError(field, "expected a name or an object");
  if (j.contains("rows")) {
    const auto& rows = j.at("rows");
    if (!rows.is_array() || rows.empty()) throw ConfigError(field + ".rows", "expected a matrix");
    std::vector<std::vector<double>> m;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m.push_back(numbers(rows[i], field + ".rows[" + std::to_string(i) + "]"));
    }
    try {
      return PayoffMatrix(m);
    } catch (const std::exception& e) {
      throw ConfigError(field + ".rows", e.what());
    }
  }
  if (j.contains("random")) {
    const auto& r = j.at("random");
    const std::string f = field + ".random";
    const double rows = number(require(r, "rows", f), f + ".rows");
    const double cols = number(require(r, "cols", f), f + ".cols");
    const double seed = number(require(r, "seed", f), f + ".seed");
    if (rows < 1 || cols < 2 || rows != std::floor(rows) || cols != std::floor(cols)) {
      throw ConfigError(f, "rows >= 1 and cols >= 2 must be integers");
    }
    if (seed < 0 || seed != std::floor(seed)) throw ConfigError(f + ".seed", "must be an integer >= 0");
    return random_game(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                       static_cast<std::uint64_t>(seed));
  }
  throw ConfigError(field, "expected 'rows' or 'random'");
}

BetaSchedule parse_schedule(const json& j, const std::string& field) {
  const std::string kind = string_field(require(j, "kind", field), field + ".kind");
  try {
    if (kind == "constant") return BetaSchedule::constant(number(require(j, "beta", field), field + ".beta"));
    if (kind == "power") {
      const double nu = number(require(j, "nu", field), field + ".nu");
      if (!(nu > 0.0 && nu < 1.0)) {
        std::ostringstream os;
        os << "beta_n = n^nu requires 0 < nu < 1 (nu < 1 constraint), got " << nu;
        throw ConfigError(field + ".nu", os.str());
      }
      return BetaSchedule::power(nu);
    }
    if (kind == "linear") return BetaSchedule::linear(number(require(j, "slope", field), field + ".slope"));
    if (kind == "table") return BetaSchedule::table(numbers(require(j, "values", field), field + ".values"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field + ".kind", "unknown schedule kind '" + kind + "'");
}

StrategySpec parse_strategy(const json& j, const std::string& field) {
  const std::string kind_name = string_field(require(j, "kind", field), field + ".kind");
  StrategySpec spec;
  try {
    spec.kind = strategy_kind_from_string(kind_name);
  } catch (const std::exception& e) {
    throw ConfigError(field + ".kind", e.what());
  }
  if (j.contains("beta")) spec.schedule = BetaSchedule::constant(number(j.at("beta"), field + ".beta"));
  if (j.contains("schedule")) spec.schedule = parse_schedule(j.at("schedule"), field + ".schedule");
  if (j.contains("rho")) {
    const std::string rho = string_field(j.at("rho"), field + ".rho");
    if (rho == "entropy") {
      spec.rho = PerturbationFunction::entropy();
    } else if (rho == "log_barrier") {
      spec.rho = PerturbationFunction::log_barrier();
    } else {
      throw ConfigError(field + ".rho", "unknown perturbation '" + rho + "'");
    }
  }
  if (j.contains("prior_blending")) {
    if (!j.at("prior_blending").is_boolean()) throw ConfigError(field + ".prior_blending", "expected a boolean");
    spec.use_prior_blending = j.at("prior_blending").get<bool>();
  }
  if (j.contains("mix")) {
    auto w = numbers(j.at("mix"), field + ".mix");
    try {
      spec.fixed_mix = SimplexPoint(std::move(w));
    } catch (const std::exception& e) {
      throw ConfigError(field + ".mix", e.what());
    }
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
  return spec;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  ExperimentConfig cfg;
  if (j.contains("name")) cfg.name = string_field(j.at("name"), "name");
  cfg.game = parse_game(require(j, "game", "config"));
  cfg.learner = parse_strategy(require(j, "learner", "config"), "learner");
  if (!cfg.learner.is_learner()) throw ConfigError("learner.kind", "not a learner strategy");
  cfg.adversary = parse_strategy(require(j, "adversary", "config"), "adversary");
  if (!cfg.adversary.is_adversary()) throw ConfigError("adversary.kind", "not an adversary strategy");
  const std::size_t I = cfg.game.rows();
  const std::size_t L = cfg.game.cols();
  if (cfg.learner.fixed_mix && cfg.learner.fixed_mix->size() != I) {
    throw ConfigError("learner.mix", "dimension must match the game rows");
  }
  if (cfg.adversary.fixed_mix && cfg.adversary.fixed_mix->size() != L) {
    throw ConfigError("adversary.mix", "dimension must match the game columns");
  }
  cfg.prior = j.contains("prior") ? simplex(j.at("prior"), "prior", L) : SimplexPoint::uniform(L);

  const double N = number(require(j, "N", "config"), "N");
  if (N < 1 || N != std::floor(N) || N > 1e10) throw ConfigError("N", "must be an integer >= 1");
  cfg.N = static_cast<std::int64_t>(N);

  const auto& seeds = require(j, "seeds", "config");
  if (!seeds.is_array()) throw ConfigError("seeds", "expected an array of integers");
  if (seeds.empty()) throw ConfigError("seeds", "seed list is empty; at least one seed is required");
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (!seeds[k].is_number_unsigned()) {
      throw ConfigError("seeds[" + std::to_string(k) + "]", "expected an integer >= 0");
    }
    cfg.seeds.push_back(seeds[k].get<std::uint64_t>());
  }

  if (j.contains("stride")) {
    const std::string s = string_field(j.at("stride"), "stride");
    if (s == "full") {
      cfg.stride = LogStride::full;
    } else if (s == "geometric") {
      cfg.stride = LogStride::geometric;
    } else {
      throw ConfigError("stride", "expected 'full' or 'geometric'");
    }
  }
  if (j.contains("checkpoints")) {
    for (double c : numbers(j.at("checkpoints"), "checkpoints")) {
      if (c < 1 || c > N || c != std::floor(c)) {
        throw ConfigError("checkpoints", "checkpoints must be integers in [1, N]");
      }
      cfg.checkpoints.push_back(static_cast<std::int64_t>(c));
    }
  }
  if (j.contains("analysis")) {
    const auto& a = j.at("analysis");
    if (!a.is_object()) throw ConfigError("analysis", "expected an object");
    for (auto [key, flag] : {std::pair{"noise", &cfg.analysis.noise},
                             std::pair{"monitor", &cfg.analysis.monitor},
                             std::pair{"tracking", &cfg.analysis.tracking}}) {
      if (!a.contains(key)) continue;
      if (!a.at(key).is_boolean()) throw ConfigError(std::string("analysis.") + key, "expected a boolean");
      *flag = a.at(key).get<bool>();
    }
    const bool any = cfg.analysis.noise || cfg.analysis.monitor || cfg.analysis.tracking;
    if (any && cfg.stride != LogStride::full) {
      throw ConfigError("stride", "noise, monitor and tracking analyses need stride 'full'");
    }
    if ((cfg.analysis.monitor || cfg.analysis.tracking) && cfg.learner.kind != StrategyKind::vsfp) {
      throw ConfigError("analysis", "monitor and tracking apply to a vsfp learner only");
    }
    if ((cfg.analysis.monitor || cfg.analysis.tracking) &&
        cfg.learner.schedule->kind() != BetaSchedule::Kind::power) {
      throw ConfigError("analysis", "monitor and tracking windows need a power schedule");
    }
  }
  if (j.contains("output_dir")) cfg.output_dir = string_field(j.at("output_dir"), "output_dir");
  cfg.hash = fnv1a_hex(j.dump());
  return cfg;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_json(path)); }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vsfp
