#include "vsfp/strategies.hpp"

#include <algorithm>
#include <stdexcept>

namespace vsfp {

SimplexPoint BeliefState::blended() const {
  if (prior.size() != empirical.size()) {
    throw std::invalid_argument("BeliefState: prior and empirical dimensions differ");
  }
  const double n = static_cast<double>(step);
  std::vector<double> g(prior.size());
  for (std::size_t l = 0; l < g.size(); ++l) {
    g[l] = (prior[l] + n * empirical[l]) / (n + 1.0);
  }
  return SimplexPoint(std::move(g));
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::fp: return "fp";
    case StrategyKind::sfp: return "sfp";
    case StrategyKind::vsfp: return "vsfp";
    case StrategyKind::alternating: return "alternating";
    case StrategyKind::iid_mixed: return "iid_mixed";
    case StrategyKind::best_response_adversary: return "best_response_adversary";
  }
  return "unknown";
}

StrategyKind strategy_kind_from_string(const std::string& name) {
  for (auto k : {StrategyKind::fp, StrategyKind::sfp, StrategyKind::vsfp,
                 StrategyKind::alternating, StrategyKind::iid_mixed,
                 StrategyKind::best_response_adversary}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown strategy kind '" + name + "'");
}

StrategySpec StrategySpec::fp() { return StrategySpec{}; }

StrategySpec StrategySpec::sfp(double beta) {
  StrategySpec s;
  s.kind = StrategyKind::sfp;
  s.schedule = BetaSchedule::constant(beta);
  return s;
}

StrategySpec StrategySpec::vsfp(BetaSchedule schedule) {
  StrategySpec s;
  s.kind = StrategyKind::vsfp;
  s.schedule = std::move(schedule);
  return s;
}

StrategySpec StrategySpec::alternating() {
  StrategySpec s;
  s.kind = StrategyKind::alternating;
  return s;
}

StrategySpec StrategySpec::iid_mixed(SimplexPoint mix) {
  StrategySpec s;
  s.kind = StrategyKind::iid_mixed;
  s.fixed_mix = std::move(mix);
  return s;
}

StrategySpec StrategySpec::best_response_adversary() {
  StrategySpec s;
  s.kind = StrategyKind::best_response_adversary;
  return s;
}

bool StrategySpec::blends_prior() const {
  return use_prior_blending.value_or(kind == StrategyKind::fp);
}

bool StrategySpec::is_learner() const {
  return kind == StrategyKind::fp || kind == StrategyKind::sfp || kind == StrategyKind::vsfp ||
         kind == StrategyKind::iid_mixed;
}

bool StrategySpec::is_adversary() const {
  return kind == StrategyKind::alternating || kind == StrategyKind::iid_mixed ||
         kind == StrategyKind::best_response_adversary;
}

void StrategySpec::validate() const {
  switch (kind) {
    case StrategyKind::sfp:
      if (!schedule || schedule->kind() != BetaSchedule::Kind::constant) {
        throw std::invalid_argument("sfp requires a constant beta schedule");
      }
      break;
    case StrategyKind::vsfp:
      if (!schedule || schedule->kind() == BetaSchedule::Kind::constant) {
        throw std::invalid_argument("vsfp requires a nonconstant beta schedule");
      }
      break;
    case StrategyKind::iid_mixed:
      if (!fixed_mix) throw std::invalid_argument("iid_mixed requires fixed_mix");
      break;
    default:
      break;
  }
}

SimplexPoint fp_action(const PayoffMatrix& pm, const BeliefState& belief) {
  if (belief.prior.size() != pm.cols()) {
    throw std::invalid_argument("fp_action: belief dimension does not match payoff columns");
  }
  // Exact ties only; the lowest index wins.
  const auto br = best_response_set(pm, belief.blended(), 0.0);
  return SimplexPoint::vertex(pm.rows(), br.front());
}

SimplexPoint sfp_action(const PayoffMatrix& pm, const SimplexPoint& y_bar, double beta,
                        const PerturbationFunction& rho) {
  if (rho.is_entropy) return logit(pm, y_bar, beta);
  return smooth_best_response(pm, y_bar, beta, rho);
}

SimplexPoint vsfp_action(const PayoffMatrix& pm, const SimplexPoint& y_bar, std::int64_t n,
                         const BetaSchedule& schedule, const PerturbationFunction& rho) {
  if (n < 1) throw std::invalid_argument("vsfp_action: n must be >= 1");
  return sfp_action(pm, y_bar, schedule(n), rho);
}

SimplexPoint learner_action(const PayoffMatrix& pm, const StrategySpec& spec,
                            const BeliefState& belief) {
  switch (spec.kind) {
    case StrategyKind::fp: {
      if (spec.blends_prior()) return fp_action(pm, belief);
      const auto br = best_response_set(pm, belief.empirical, 0.0);
      return SimplexPoint::vertex(pm.rows(), br.front());
    }
    case StrategyKind::sfp:
    case StrategyKind::vsfp: {
      const SimplexPoint target = spec.blends_prior() ? belief.blended() : belief.empirical;
      return vsfp_action(pm, target, std::max<std::int64_t>(belief.step, 1), *spec.schedule,
                         spec.rho);
    }
    case StrategyKind::iid_mixed:
      return *spec.fixed_mix;
    default:
      throw std::invalid_argument("learner_action: '" + to_string(spec.kind) +
                                  "' is not a learner strategy");
  }
}

SimplexPoint adversary_action(const PayoffMatrix& pm, const StrategySpec& spec, std::int64_t n,
                              const AdversaryView& view) {
  if (n < 1) throw std::invalid_argument("adversary_action: n must be >= 1");
  switch (spec.kind) {
    case StrategyKind::alternating:
      return SimplexPoint::vertex(pm.cols(), n % 2 == 1 ? 0 : 1);
    case StrategyKind::iid_mixed:
      return *spec.fixed_mix;
    case StrategyKind::best_response_adversary: {
      if (view.learner_mix == nullptr) {
        throw std::invalid_argument("best_response_adversary needs the learner's mixed action");
      }
      const auto cols = pm.column_payoffs(view.learner_mix->weights());
      const auto it = std::min_element(cols.begin(), cols.end());
      return SimplexPoint::vertex(pm.cols(), static_cast<std::size_t>(it - cols.begin()));
    }
    default:
      throw std::invalid_argument("adversary_action: '" + to_string(spec.kind) +
                                  "' is not an adversary strategy");
  }
}

}  // namespace vsfp
