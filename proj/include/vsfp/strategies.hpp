#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "vsfp/game.hpp"
#include "vsfp/smooth_response.hpp"

namespace vsfp {

/// FP belief: prior y_bar_0 blended with the empirical average after n stages.
struct BeliefState {
  SimplexPoint prior;
  SimplexPoint empirical;
  std::int64_t step = 0;

  /// gamma_n = prior / (n + 1) + n * empirical / (n + 1).
  SimplexPoint blended() const;
};

enum class StrategyKind {
  fp,
  sfp,
  vsfp,
  alternating,
  iid_mixed,
  best_response_adversary,
};

std::string to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(const std::string& name);

struct StrategySpec {
  StrategyKind kind = StrategyKind::fp;
  /// SFP: constant; VSFP: nonconstant.
  std::optional<BetaSchedule> schedule;
  /// IIDMixed only.
  std::optional<SimplexPoint> fixed_mix;
  PerturbationFunction rho = PerturbationFunction::entropy();
  /// Respond to the prior-blended gamma_n instead of y_bar_n. Defaults to on for FP.
  std::optional<bool> use_prior_blending;

  static StrategySpec fp();
  static StrategySpec sfp(double beta);
  static StrategySpec vsfp(BetaSchedule schedule);
  static StrategySpec alternating();
  static StrategySpec iid_mixed(SimplexPoint mix);
  static StrategySpec best_response_adversary();

  bool blends_prior() const;
  bool is_learner() const;
  bool is_adversary() const;
  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;
};

/// Vertex best response to the blended belief, lowest index on ties.
SimplexPoint fp_action(const PayoffMatrix& pm, const BeliefState& belief);
SimplexPoint sfp_action(const PayoffMatrix& pm, const SimplexPoint& y_bar, double beta,
                        const PerturbationFunction& rho = PerturbationFunction::entropy());
SimplexPoint vsfp_action(const PayoffMatrix& pm, const SimplexPoint& y_bar, std::int64_t n,
                         const BetaSchedule& schedule,
                         const PerturbationFunction& rho = PerturbationFunction::entropy());

/// Learner mixed action for stage belief.step + 1. SFP/VSFP respond to
/// belief.empirical unless the StrategySpec enables prior blending.
SimplexPoint learner_action(const PayoffMatrix& pm, const StrategySpec& spec,
                            const BeliefState& belief);

/// What nature may condition on at stage n.
struct AdversaryView {
  /// The learner's declared mixed action for the current stage.
  const SimplexPoint* learner_mix = nullptr;
};

/// Mixed action of nature at stage n >= 1.
SimplexPoint adversary_action(const PayoffMatrix& pm, const StrategySpec& spec, std::int64_t n,
                              const AdversaryView& view);

}  // namespace vsfp
