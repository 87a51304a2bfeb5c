#include "vsfp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "vsfp/rng.hpp"

namespace vsfp {

StateTriple StageRecord::state() const {
  return StateTriple{SimplexPoint(x_bar), SimplexPoint(y_bar), pi_bar};
}

const StageRecord& Trajectory::at(std::int64_t n) const {
  if (stride != LogStride::full) {
    throw std::logic_error("Trajectory::at: stage lookup needs a full-stride trajectory");
  }
  if (n < 1 || n > horizon) throw std::out_of_range("Trajectory::at: stage out of range");
  return records[static_cast<std::size_t>(n - 1)];
}

namespace {

std::vector<std::int64_t> geometric_log_stages(std::int64_t N) {
  std::vector<std::int64_t> stages{1};
  double level = 1.0;
  while (true) {
    level *= 1.05;
    const auto n = static_cast<std::int64_t>(std::ceil(level - 1e-9));
    if (n >= N) break;
    if (n > stages.back()) stages.push_back(n);
  }
  if (stages.back() != N) stages.push_back(N);
  return stages;
}

}  // namespace

Trajectory run(const PayoffMatrix& pm, const StrategySpec& learner,
               const StrategySpec& adversary, const SimplexPoint& prior, std::int64_t N,
               std::uint64_t seed, const RunOptions& options) {
  if (N < 1) throw std::invalid_argument("run: N must be >= 1");
  if (!learner.is_learner()) throw std::invalid_argument("run: learner spec is not a learner");
  if (!adversary.is_adversary()) {
    throw std::invalid_argument("run: adversary spec is not an adversary");
  }
  learner.validate();
  adversary.validate();
  const std::size_t I = pm.rows();
  const std::size_t L = pm.cols();
  if (prior.size() != L) throw std::invalid_argument("run: prior dimension must match columns");
  if (learner.fixed_mix && learner.fixed_mix->size() != I) {
    throw std::invalid_argument("run: learner fixed_mix dimension must match rows");
  }
  if (adversary.fixed_mix && adversary.fixed_mix->size() != L) {
    throw std::invalid_argument("run: adversary fixed_mix dimension must match columns");
  }
  if (adversary.kind == StrategyKind::alternating && L < 2) {
    throw std::invalid_argument("run: alternating adversary needs two columns");
  }

  Trajectory traj{pm, seed, options.config_hash, N, options.stride, {}, {}, {}, {}};
  traj.learner_actions.reserve(static_cast<std::size_t>(N));
  traj.adversary_actions.reserve(static_cast<std::size_t>(N));

  std::vector<std::int64_t> checkpoints = options.checkpoints;
  checkpoints.push_back(N);
  std::erase_if(checkpoints, [N](std::int64_t c) { return c < 1 || c > N; });
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  for (auto c : checkpoints) {
    traj.tails.push_back({c, -std::numeric_limits<double>::infinity()});
  }

  std::vector<std::int64_t> log_stages;
  if (options.stride == LogStride::geometric) log_stages = geometric_log_stages(N);
  std::size_t next_log = 0;
  if (options.stride == LogStride::full) traj.records.reserve(static_cast<std::size_t>(N));

  Rng learner_rng(derive_seed(seed, 1));
  Rng adversary_rng(derive_seed(seed, 2));

  const auto entries = pm.entries();
  std::vector<double> x_bar(I, 0.0);
  std::vector<double> y_bar(L, 0.0);
  double pi_bar = 0.0;
  std::vector<double> belief(L);
  std::vector<double> scores(I);
  std::vector<double> x_mix(I);
  std::vector<double> y_mix(L);
  std::vector<double> col_payoffs(L);

  const bool blend = learner.blends_prior();
  const bool fast_logit = (learner.kind == StrategyKind::sfp || learner.kind == StrategyKind::vsfp) &&
                          learner.rho.is_entropy;

  auto row_scores = [&](const std::vector<double>& y) {
    for (std::size_t i = 0; i < I; ++i) {
      const double* row = &entries[i * L];
      double s = 0.0;
      for (std::size_t l = 0; l < L; ++l) s += row[l] * y[l];
      scores[i] = s;
    }
  };

  std::int64_t stage = 1;
  try {
    for (std::int64_t n = 0; n < N; ++n) {
      stage = n + 1;
      // Belief after n completed stages; y_bar_0 is the prior.
      for (std::size_t l = 0; l < L; ++l) {
        const double emp = n == 0 ? prior[l] : y_bar[l];
        belief[l] = blend ? (prior[l] + static_cast<double>(n) * emp) / (static_cast<double>(n) + 1.0)
                          : emp;
      }

      switch (learner.kind) {
        case StrategyKind::fp: {
          row_scores(belief);
          std::size_t best = 0;
          for (std::size_t i = 1; i < I; ++i) {
            if (scores[i] > scores[best]) best = i;
          }
          std::fill(x_mix.begin(), x_mix.end(), 0.0);
          x_mix[best] = 1.0;
          break;
        }
        case StrategyKind::sfp:
        case StrategyKind::vsfp: {
          const double beta = (*learner.schedule)(std::max<std::int64_t>(n, 1));
          if (fast_logit) {
            row_scores(belief);
            logit_scores(scores, beta, x_mix);
          } else {
            double sum = 0.0;
            for (double b : belief) sum += b;
            std::vector<double> normalized(belief);
            for (double& b : normalized) b /= sum;
            const auto br = smooth_best_response(pm, SimplexPoint(std::move(normalized)), beta,
                                                 learner.rho);
            std::copy(br.weights().begin(), br.weights().end(), x_mix.begin());
          }
          break;
        }
        case StrategyKind::iid_mixed:
          std::copy(learner.fixed_mix->weights().begin(), learner.fixed_mix->weights().end(),
                    x_mix.begin());
          break;
        default:
          break;
      }

      switch (adversary.kind) {
        case StrategyKind::alternating:
          std::fill(y_mix.begin(), y_mix.end(), 0.0);
          y_mix[stage % 2 == 1 ? 0 : 1] = 1.0;
          break;
        case StrategyKind::iid_mixed:
          std::copy(adversary.fixed_mix->weights().begin(), adversary.fixed_mix->weights().end(),
                    y_mix.begin());
          break;
        case StrategyKind::best_response_adversary: {
          std::fill(col_payoffs.begin(), col_payoffs.end(), 0.0);
          for (std::size_t i = 0; i < I; ++i) {
            const double* row = &entries[i * L];
            for (std::size_t l = 0; l < L; ++l) col_payoffs[l] += x_mix[i] * row[l];
          }
          std::size_t worst = 0;
          for (std::size_t l = 1; l < L; ++l) {
            if (col_payoffs[l] < col_payoffs[worst]) worst = l;
          }
          std::fill(y_mix.begin(), y_mix.end(), 0.0);
          y_mix[worst] = 1.0;
          break;
        }
        default:
          break;
      }

      const std::size_t i = sample_index(x_mix, uniform01(learner_rng));
      const std::size_t l = sample_index(y_mix, uniform01(adversary_rng));
      const double payoff = entries[i * L + l];
      const double step = 1.0 / static_cast<double>(stage);
      for (std::size_t k = 0; k < I; ++k) {
        x_bar[k] += ((k == i ? 1.0 : 0.0) - x_bar[k]) * step;
      }
      for (std::size_t k = 0; k < L; ++k) {
        y_bar[k] += ((k == l ? 1.0 : 0.0) - y_bar[k]) * step;
      }
      pi_bar += (payoff - pi_bar) * step;

      row_scores(y_bar);
      const double e = *std::max_element(scores.begin(), scores.end()) - pi_bar;

      for (auto& t : traj.tails) {
        if (stage <= t.checkpoint && 2 * stage >= t.checkpoint) t.tail_max = std::max(t.tail_max, e);
      }

      traj.learner_actions.push_back(static_cast<std::uint16_t>(i));
      traj.adversary_actions.push_back(static_cast<std::uint16_t>(l));

      bool log = options.stride == LogStride::full;
      if (!log && next_log < log_stages.size() && log_stages[next_log] == stage) {
        log = true;
        ++next_log;
      }
      if (log) {
        traj.records.push_back(StageRecord{stage, i, l, payoff, x_mix, y_mix, x_bar, y_bar,
                                           pi_bar, e});
      }
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& ex) {
    throw StageError(stage, ex.what());
  }
  return traj;
}

NoiseRecord extract_noise(const Trajectory& traj) {
  if (traj.stride != LogStride::full ||
      traj.records.size() != static_cast<std::size_t>(traj.horizon)) {
    throw NoiseUnavailable("extract_noise: mixed actions were not logged at every stage");
  }
  const auto& pm = traj.game;
  const std::size_t I = pm.rows();
  const std::size_t L = pm.cols();
  NoiseRecord noise;
  noise.first_stage = 1;
  noise.increments.reserve(traj.records.size());
  for (const auto& r : traj.records) {
    if (r.learner_mix.size() != I || r.adversary_mix.size() != L) {
      throw NoiseUnavailable("extract_noise: stage " + std::to_string(r.n) +
                             " lacks a declared mixed action");
    }
    std::vector<double> u(I + L + 1);
    for (std::size_t k = 0; k < I; ++k) u[k] = (k == r.i ? 1.0 : 0.0) - r.learner_mix[k];
    for (std::size_t k = 0; k < L; ++k) u[I + k] = (k == r.l ? 1.0 : 0.0) - r.adversary_mix[k];
    // Independent draws: E[pi(i, l) | F_n] = pi(x_mix, y_mix).
    double expected = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t l = 0; l < L; ++l) {
        expected += r.learner_mix[i] * r.adversary_mix[l] * pm(i, l);
      }
    }
    u[I + L] = r.payoff - expected;
    noise.increments.push_back(std::move(u));
  }
  return noise;
}

RegretSeries regret_series(const Trajectory& traj, int stride) {
  if (stride < 1) throw std::invalid_argument("regret_series: stride must be >= 1");
  RegretSeries series;
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    if (k % static_cast<std::size_t>(stride) == 0 || k + 1 == traj.records.size()) {
      series.stages.push_back(traj.records[k].n);
      series.values.push_back(traj.records[k].regret);
    }
  }
  series.tail_max = traj.tail_max();
  return series;
}

double recompute_average_payoff(const Trajectory& traj) {
  // Kahan summation so the check is limited by the incremental average only.
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t k = 0; k < traj.learner_actions.size(); ++k) {
    const double v = traj.game(traj.learner_actions[k], traj.adversary_actions[k]) - comp;
    const double t = sum + v;
    comp = (t - sum) - v;
    sum = t;
  }
  return sum / static_cast<double>(traj.learner_actions.size());
}

std::string trajectory_csv_header(std::size_t n_rows, std::size_t n_cols) {
  std::string h = "n,i,l,payoff";
  for (std::size_t k = 0; k < n_rows; ++k) h += ",x_bar_" + std::to_string(k);
  for (std::size_t k = 0; k < n_cols; ++k) h += ",y_bar_" + std::to_string(k);
  h += ",pi_bar,e_n";
  return h;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << trajectory_csv_header(traj.game.rows(), traj.game.cols()) << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& r : traj.records) {
    out << r.n << ',' << r.i << ',' << r.l << ',' << r.payoff;
    for (double v : r.x_bar) out << ',' << v;
    for (double v : r.y_bar) out << ',' << v;
    out << ',' << r.pi_bar << ',' << r.regret << '\n';
  }
  out.precision(old_precision);
}

}  // namespace vsfp
