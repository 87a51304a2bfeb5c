#include "vsfp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "vsfp/rng.hpp"

namespace vsfp {

using nlohmann::json;

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string stride_name(LogStride s) { return s == LogStride::full ? "full" : "geometric"; }

json strategy_json(const StrategySpec& s) {
  json j{{"kind", to_string(s.kind)}};
  if (s.schedule) j["schedule"] = s.schedule->describe();
  if (s.fixed_mix) j["mix"] = std::vector<double>(s.fixed_mix->weights().begin(), s.fixed_mix->weights().end());
  if (s.is_learner() && s.kind != StrategyKind::iid_mixed) {
    j["rho"] = s.rho.name;
    j["prior_blending"] = s.blends_prior();
  }
  return j;
}

json seed_json(const SeedSummary& s) {
  json tails = json::array();
  for (const auto& t : s.tails) tails.push_back({{"checkpoint", t.checkpoint}, {"tail_max", t.tail_max}});
  json j{{"seed", s.seed},           {"e_N", s.e_N},
         {"pi_bar", s.pi_bar},       {"tail_max", s.tail_max},
         {"tails", tails},           {"odd_payoff_one", s.odd_payoff_one},
         {"even_payoff_one", s.even_payoff_one}};
  if (s.monitor_tail_phi) j["monitor_tail_phi"] = *s.monitor_tail_phi;
  if (!s.unit_window_Delta.empty()) j["unit_window_Delta"] = s.unit_window_Delta;
  if (!s.tracking.empty()) {
    json w = json::array();
    for (const auto& c : s.tracking) {
      w.push_back({{"a", c.a}, {"b", c.b}, {"deviation", c.deviation}, {"bound", c.bound},
                   {"Delta", c.Delta}, {"delta_sup", c.delta_sup}});
    }
    j["tracking"] = w;
  }
  return j;
}

ScenarioCheck check(std::string metric, double value, double threshold, bool upper = true) {
  ScenarioCheck c{std::move(metric), value, threshold, upper ? "<=" : ">=", false};
  c.pass = upper ? value <= threshold : value >= threshold;
  return c;
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(where + "." + key, "missing numeric threshold");
  }
  return j.at(key).get<double>();
}

std::vector<std::uint64_t> get_seeds(const json& j, const std::string& where) {
  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
    throw ConfigError(where + ".seeds", "seed list is empty; at least one seed is required");
  }
  return j.at("seeds").get<std::vector<std::uint64_t>>();
}

}  // namespace

SeedSummary summarize(const Trajectory& traj) {
  SeedSummary s;
  s.seed = traj.seed;
  s.e_N = traj.last().regret;
  s.pi_bar = traj.last().pi_bar;
  s.tail_max = traj.tail_max();
  s.tails = traj.tails;
  std::int64_t odd = 0, even = 0, odd_hits = 0, even_hits = 0;
  for (std::size_t k = 0; k < traj.learner_actions.size(); ++k) {
    const bool hit = traj.game(traj.learner_actions[k], traj.adversary_actions[k]) == 1.0;
    if (k % 2 == 0) {  // stage k + 1 is odd
      ++odd;
      odd_hits += hit;
    } else {
      ++even;
      even_hits += hit;
    }
  }
  s.odd_payoff_one = odd ? static_cast<double>(odd_hits) / static_cast<double>(odd) : 0.0;
  s.even_payoff_one = even ? static_cast<double>(even_hits) / static_cast<double>(even) : 0.0;
  return s;
}

std::vector<SeedSummary> run_seeds(const PayoffMatrix& pm, const StrategySpec& learner,
                                   const StrategySpec& adversary, const SimplexPoint& prior,
                                   std::int64_t N, const std::vector<std::uint64_t>& seeds,
                                   const RunOptions& options, int jobs,
                                   const std::function<void(const Trajectory&, SeedSummary&)>& per_seed) {
  std::vector<SeedSummary> out(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= seeds.size()) return;
      try {
        const Trajectory traj = run(pm, learner, adversary, prior, N, seeds[k], options);
        out[k] = summarize(traj);
        if (per_seed) per_seed(traj, out[k]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = seeds.size();
      }
    }
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(seeds.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

DIProblem di_problem(const PayoffMatrix& pm, const StrategySpec& learner) {
  if (!learner.schedule) throw std::invalid_argument("di_problem: learner has no beta schedule");
  return DIProblem{pm, *learner.schedule, learner.rho, HarmonicClock::shared()};
}

DecayCheck lyapunov_decay(const DIProblem& prob, const StateTriple& w0, double t, double T,
                          double h, const SelectionPolicy& policy) {
  std::vector<double> knots;
  for (std::int64_t n = prob.clock->m(t) + 1; prob.clock->tau(n) < t + T; ++n) {
    knots.push_back(prob.clock->tau(n));
  }
  const auto curve = euler_solve(prob, w0, t, t + T, h, policy, knots);
  DecayCheck d;
  d.psi_start = lyapunov_phi(prob, t, w0);
  d.psi_end = lyapunov_phi(prob, t + T, curve.states.back());
  d.bound = std::exp(-T) * d.psi_start + 1.0 / prob.beta_at(t);
  return d;
}

WindowCheck tracking_window(const DIProblem& prob, const InterpolatedPath& path,
                            const NoiseRecord& noise, double a, double b, double h) {
  const auto target = TrackingTarget::denoised(path, noise, a);
  const auto curve = tracking_solve(prob, target, a, b, h);
  WindowCheck w;
  w.a = a;
  w.b = b;
  w.deviation = sup_deviation(curve, [&path](double s) { return path.value(s); });
  w.Delta = delta_accumulation(noise, path, a, b - a);
  // gamma_bar is nonincreasing, so its sup on [a, b] is at a.
  w.delta_sup = state_space_diameter(prob.pm) * path.gamma_bar(a);
  const auto knots = path.knot_times(a, b);
  w.bound = deviation_bound(schedule_lipschitz(prob), w.delta_sup, w.Delta, a, b, knots);
  return w;
}

json trajectory_metadata(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::vector<std::string> columns;
  std::stringstream header(trajectory_csv_header(cfg.game.rows(), cfg.game.cols()));
  for (std::string col; std::getline(header, col, ',');) columns.push_back(col);
  return json{{"schema", "vsfp.trajectory/1"},
              {"name", cfg.name},
              {"config_hash", cfg.hash},
              {"seed", seed},
              {"N", cfg.N},
              {"stride", stride_name(cfg.stride)},
              {"rows", cfg.game.rows()},
              {"cols", cfg.game.cols()},
              {"learner", strategy_json(cfg.learner)},
              {"adversary", strategy_json(cfg.adversary)},
              {"prior", std::vector<double>(cfg.prior.weights().begin(), cfg.prior.weights().end())},
              {"columns", columns}};
}

SimulateResult simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int jobs) {
  std::filesystem::create_directories(out_dir);
  RunOptions options{cfg.stride, cfg.checkpoints, cfg.hash};
  std::optional<DIProblem> prob;
  double nu = 0.0;
  if (cfg.analysis.monitor || cfg.analysis.tracking) {
    prob = di_problem(cfg.game, cfg.learner);
    nu = cfg.learner.schedule->parameter();
  }

  auto per_seed = [&](const Trajectory& traj, SeedSummary& s) {
    const std::string stem = cfg.name + "_seed" + std::to_string(traj.seed);
    {
      std::ofstream csv(out_dir / (stem + ".csv"));
      write_trajectory_csv(traj, csv);
      std::ofstream meta(out_dir / (stem + ".meta.json"));
      meta << trajectory_metadata(cfg, traj.seed).dump(2) << '\n';
      if (!csv || !meta) throw std::runtime_error("cannot write outputs under " + out_dir.string());
    }
    if (cfg.analysis.noise || cfg.analysis.tracking) {
      const auto noise = extract_noise(traj);
      const auto path = interpolate(traj);
      if (cfg.analysis.noise) {
        for (double t = 1.0; t + 1.0 <= path.end(); t += 1.0) {
          s.unit_window_Delta.push_back(delta_accumulation(noise, path, t, 1.0));
        }
      }
      if (cfg.analysis.tracking) {
        for (int k : {5, 10, 20}) {
          const double a = window_start(nu, k);
          const double b = window_start(nu, k + 1);
          if (b > path.end()) break;
          s.tracking.push_back(tracking_window(*prob, path, noise, a, b, 1e-3));
        }
      }
    }
    if (cfg.analysis.monitor) {
      const auto report = consistency_monitor(traj, *prob, nu);
      s.monitor_tail_phi = report.tail_phi;
      std::ofstream mon(out_dir / (stem + "_monitor.csv"));
      write_monitor_csv(report, mon);
    }
  };

  SimulateResult result;
  result.seeds = run_seeds(cfg.game, cfg.learner, cfg.adversary, cfg.prior, cfg.N, cfg.seeds,
                           options, jobs, per_seed);

  std::vector<double> e_N, tails;
  json seeds = json::array();
  for (const auto& s : result.seeds) {
    e_N.push_back(s.e_N);
    tails.push_back(s.tail_max);
    seeds.push_back(seed_json(s));
  }
  result.summary = json{{"schema", "vsfp.summary/1"},
                        {"name", cfg.name},
                        {"config_hash", cfg.hash},
                        {"N", cfg.N},
                        {"stride", stride_name(cfg.stride)},
                        {"seeds", seeds},
                        {"aggregate",
                         {{"mean_e_N", mean(e_N)},
                          {"median_e_N", median(e_N)},
                          {"mean_tail_max", mean(tails)},
                          {"max_tail_max", *std::max_element(tails.begin(), tails.end())}}}};
  std::ofstream summary(out_dir / (cfg.name + "_summary.json"));
  summary << result.summary.dump(2) << '\n';
  if (!summary) throw std::runtime_error("cannot write summary under " + out_dir.string());
  return result;
}

double example2_limit() {
  const double a = 0.5 - 1.0 / (1.0 + std::exp(1.0 / 3.0));
  const double b = 0.5 - 1.0 / (1.0 + std::exp(2.0 / 3.0));
  return 0.5 * (a + b);
}

bool ScenarioReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ScenarioCheck& c) { return c.pass; });
}

json ScenarioReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) {
    cs.push_back({{"metric", c.metric}, {"value", c.value}, {"relation", c.relation},
                  {"threshold", c.threshold}, {"pass", c.pass}});
  }
  return json{{"schema", "vsfp.report/1"}, {"scenario", scenario}, {"pass", pass()},
              {"checks", cs}, {"details", details}};
}

namespace {

ScenarioReport reproduce_example1(const json& sc, int jobs) {
  const auto cfg = parse_config(sc.at("config"));
  const auto& th = sc.at("thresholds");
  const auto runs = run_seeds(cfg.game, cfg.learner, cfg.adversary, cfg.prior, cfg.N, cfg.seeds,
                              {cfg.stride, cfg.checkpoints, cfg.hash}, jobs);
  ScenarioReport r{"example1", {}, json::object()};
  const double limit = get_number(th, "limit", "thresholds");
  const double slack = get_number(th, "slack", "thresholds");
  double worst_pi = 0.0, worst_err = 0.0;
  for (const auto& s : runs) {
    worst_pi = std::max(worst_pi, std::abs(s.pi_bar));
    worst_err = std::max(worst_err, std::abs(s.e_N - limit));
  }
  r.checks.push_back(check("abs_pi_bar_N", worst_pi, get_number(th, "pi_bar_abs", "thresholds")));
  r.checks.push_back(check("abs_e_N_minus_limit", worst_err, 1.0 / (2.0 * cfg.N) + slack));
  r.details = {{"measured_limit", runs.front().e_N}, {"N", cfg.N}};
  return r;
}

ScenarioReport reproduce_example2(const json& sc, int jobs) {
  const auto cfg = parse_config(sc.at("config"));
  const auto& th = sc.at("thresholds");
  const auto runs = run_seeds(cfg.game, cfg.learner, cfg.adversary, cfg.prior, cfg.N, cfg.seeds,
                              {cfg.stride, cfg.checkpoints, cfg.hash}, jobs);
  std::vector<double> e, odd, even;
  for (const auto& s : runs) {
    e.push_back(s.e_N);
    odd.push_back(s.odd_payoff_one);
    even.push_back(s.even_payoff_one);
  }
  const double target = example2_limit();
  const double odd_target = 1.0 / (1.0 + std::exp(1.0 / 3.0));
  const double even_target = 1.0 / (1.0 + std::exp(2.0 / 3.0));
  ScenarioReport r{"example2", {}, json::object()};
  r.checks.push_back(check("abs_mean_e_N_minus_limit", std::abs(mean(e) - target),
                           get_number(th, "limit_tolerance", "thresholds")));
  r.checks.push_back(check("abs_odd_payoff_one_minus_target", std::abs(mean(odd) - odd_target),
                           get_number(th, "frequency_tolerance", "thresholds")));
  r.checks.push_back(check("abs_even_payoff_one_minus_target", std::abs(mean(even) - even_target),
                           get_number(th, "frequency_tolerance", "thresholds")));
  r.details = {{"measured_limit", mean(e)}, {"target_limit", target},
               {"odd_payoff_one", mean(odd)}, {"even_payoff_one", mean(even)}, {"seeds", runs.size()}};
  return r;
}

ScenarioReport reproduce_sweep(const json& sc, int jobs, std::ostream* progress) {
  const auto& th = sc.at("thresholds");
  const double tail_threshold = get_number(th, "tail_max", "thresholds");
  const auto seeds = get_seeds(sc, "scenario");
  const auto N = static_cast<std::int64_t>(get_number(sc, "N", "scenario"));
  const auto checkpoints = sc.at("checkpoints").get<std::vector<std::int64_t>>();
  ScenarioReport r{"consistency_sweep", {}, json::array()};
  for (std::size_t g = 0; g < sc.at("games").size(); ++g) {
    const auto pm = parse_game(sc.at("games")[g], "games[" + std::to_string(g) + "]");
    const auto prior = SimplexPoint::uniform(pm.cols());
    for (double nu : sc.at("nus").get<std::vector<double>>()) {
      const auto learner = StrategySpec::vsfp(BetaSchedule::power(nu));
      for (const auto& adv_json : sc.at("adversaries")) {
        json a = adv_json;
        if (a.value("kind", "") == "iid_mixed" && a.value("mix", json()) == json("uniform")) {
          a["mix"] = std::vector<double>(pm.cols(), 1.0 / static_cast<double>(pm.cols()));
        }
        const auto adversary = parse_strategy(a, "adversaries");
        const auto runs = run_seeds(pm, learner, adversary, prior, N, seeds,
                                    {LogStride::geometric, checkpoints, ""}, jobs);
        std::ostringstream cell;
        cell << "game" << g << "/nu=" << nu << "/" << to_string(adversary.kind);
        double worst = -INFINITY;
        std::vector<double> medians;
        for (std::size_t c = 0; c < runs.front().tails.size(); ++c) {
          std::vector<double> at_c;
          for (const auto& s : runs) at_c.push_back(s.tails[c].tail_max);
          medians.push_back(median(at_c));
        }
        for (const auto& s : runs) worst = std::max(worst, s.tail_max);
        double increase = -INFINITY;
        for (std::size_t c = 1; c < medians.size(); ++c) increase = std::max(increase, medians[c] - medians[c - 1]);
        r.checks.push_back(check("tail_max[" + cell.str() + "]", worst, tail_threshold));
        r.checks.push_back(check("median_tail_increase[" + cell.str() + "]", increase,
                                 get_number(th, "median_increase", "thresholds")));
        r.details.push_back({{"cell", cell.str()}, {"worst_tail_max", worst}, {"median_tails", medians}});
        if (progress) *progress << cell.str() << " worst tail max " << worst << '\n';
      }
    }
  }
  return r;
}

ScenarioReport reproduce_bounds(const json& sc, int jobs, std::ostream* progress) {
  const auto& th = sc.at("thresholds");
  const double h = get_number(sc, "h", "scenario");
  const double nu = get_number(sc, "nu", "scenario");
  const double slack = get_number(th, "slack_per_h", "thresholds") * h;
  ScenarioReport r{"bounds_check", {}, json::object()};

  // Lyapunov decay along Euler solutions from pinned random starts.
  const auto& ly = sc.at("lyapunov");
  double worst_excess = -INFINITY;
  int decay_cases = 0;
  for (std::size_t g = 0; g < ly.at("games").size(); ++g) {
    const auto pm = parse_game(ly.at("games")[g], "lyapunov.games");
    const DIProblem prob{pm, BetaSchedule::power(nu)};
    Rng rng(derive_seed(ly.at("start_seed").get<std::uint64_t>(), g));
    const std::size_t L = pm.cols();
    std::vector<SelectionPolicy> policies{
        SelectionPolicy::constant(SimplexPoint::vertex(L, 0)), SelectionPolicy::worst_case_vertex(),
        SelectionPolicy::sequence([L](double s, std::span<const double>) {
          std::vector<double> tau(L);
          for (std::size_t l = 0; l < L; ++l) tau[l] = 1.0 + std::sin(3.0 * s + 2.0 * static_cast<double>(l));
          double sum = std::accumulate(tau.begin(), tau.end(), 0.0);
          for (double& v : tau) v /= sum;
          return SimplexPoint(std::move(tau));
        })};
    for (int start = 0; start < ly.at("starts").get<int>(); ++start) {
      StateTriple w0{SimplexPoint(sample_simplex(pm.rows(), rng)), SimplexPoint(sample_simplex(L, rng)),
                     (2.0 * uniform01(rng) - 1.0) * pm.sup_norm()};
      for (double t : ly.at("t").get<std::vector<double>>()) {
        for (double T : ly.at("T").get<std::vector<double>>()) {
          for (const auto& policy : policies) {
            const auto d = lyapunov_decay(prob, w0, t, T, h, policy);
            worst_excess = std::max(worst_excess, d.psi_end - d.bound);
            ++decay_cases;
          }
        }
      }
    }
  }
  r.checks.push_back(check("lyapunov_excess_over_bound", worst_excess, slack));

  // Tracking solutions against stochastic VSFP paths.
  const auto& tr = sc.at("tracking");
  const auto pm = parse_game(tr.at("game"), "tracking.game");
  const auto learner = StrategySpec::vsfp(BetaSchedule::power(nu));
  json adv = tr.at("adversary");
  const auto adversary = parse_strategy(adv, "tracking.adversary");
  const auto ks = tr.at("k").get<std::vector<int>>();
  const int k_top = *std::max_element(ks.begin(), ks.end());
  const auto clock = HarmonicClock::shared();
  const auto N = clock->m(window_start(nu, k_top + 1)) + 2;
  const DIProblem prob = di_problem(pm, learner);
  std::mutex mu;
  double worst_ratio = -INFINITY;
  double worst_tracking_excess = -INFINITY;
  int windows = 0;
  run_seeds(pm, learner, adversary, SimplexPoint::uniform(pm.cols()), N, get_seeds(tr, "tracking"),
            {LogStride::full, {}, ""}, jobs, [&](const Trajectory& traj, SeedSummary&) {
              const auto noise = extract_noise(traj);
              const auto path = interpolate(traj);
              for (int k : ks) {
                const auto w = tracking_window(prob, path, noise, window_start(nu, k), window_start(nu, k + 1), h);
                std::lock_guard lock(mu);
                worst_tracking_excess = std::max(worst_tracking_excess, w.deviation - w.bound);
                worst_ratio = std::max(worst_ratio, w.deviation / w.bound);
                ++windows;
              }
            });
  r.checks.push_back(check("tracking_excess_over_R", worst_tracking_excess, slack));
  r.details = {{"lyapunov_cases", decay_cases}, {"tracking_windows", windows},
               {"max_deviation_over_R", worst_ratio}};
  if (progress) *progress << "bounds_check: " << decay_cases << " decay cases, " << windows << " windows\n";
  return r;
}

}  // namespace

ScenarioReport reproduce(const json& scenario, int jobs, std::ostream* progress) {
  const std::string name = scenario.value("scenario", "");
  try {
    if (name == "example1") return reproduce_example1(scenario, jobs);
    if (name == "example2") return reproduce_example2(scenario, jobs);
    if (name == "consistency_sweep") return reproduce_sweep(scenario, jobs, progress);
    if (name == "bounds_check") return reproduce_bounds(scenario, jobs, progress);
  } catch (const json::exception& e) {
    throw ConfigError("scenario", std::string("malformed scenario definition: ") + e.what());
  }
  throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

}  // namespace vsfp
