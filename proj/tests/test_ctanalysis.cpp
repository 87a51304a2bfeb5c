#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "vsfp/config.hpp"
#include "vsfp/ctanalysis.hpp"
#include "vsfp/experiment.hpp"
#include "vsfp/rng.hpp"

using namespace vsfp;

namespace {
const PayoffMatrix kPennies = PayoffMatrix::matching_pennies();

Trajectory vsfp_run(const PayoffMatrix& pm, const StrategySpec& adv, std::int64_t N, std::uint64_t seed,
                    double nu = 0.5) {
  return run(pm, StrategySpec::vsfp(BetaSchedule::power(nu)), adv, SimplexPoint::uniform(pm.cols()), N,
             seed, {LogStride::full, {}, ""});
}

double norm(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}
}  // namespace

TEST(HarmonicClock, KnotsAndInverse) {
  const auto clock = HarmonicClock::shared();
  EXPECT_EQ(clock->tau(0), 0.0);
  for (std::int64_t n = 1; n < 5000; ++n) {
    ASSERT_NEAR(clock->tau(n + 1) - clock->tau(n), 1.0 / (n + 1), 1e-15);
    ASSERT_EQ(clock->m(clock->tau(n)), n);
  }
  EXPECT_EQ(clock->m(0.5), 0);
  EXPECT_EQ(clock->m(3.0), 10);
  EXPECT_THROW(HarmonicClock(100).m(10.0), std::out_of_range);
}

TEST(HarmonicClock, CorrectSandwichHolds) {
  // tau_n in [log(n+1), 1 + log n] gives e^{s-1} <= m(s) + 1 and m(s) <= e^s - 1.
  const auto clock = HarmonicClock::shared();
  for (int s = 1; s <= 14; ++s) {
    const double m = static_cast<double>(clock->m(s));
    EXPECT_LE(m, std::exp(s) - 1.0);
    EXPECT_GE(m, std::exp(s - 1.0) - 1.0);
  }
}

TEST(InterpolatedPath, KnotIdentityAndAffineMidpoints) {
  const auto t = vsfp_run(kPennies, StrategySpec::iid_mixed(SimplexPoint::uniform(2)), 2000, 3);
  const auto path = interpolate(t);
  const auto& clock = path.clock();
  for (std::int64_t n = 1; n <= 2000; n += 37) {
    EXPECT_EQ(path.value(clock.tau(n)), path.knot(n));
  }
  for (std::int64_t n = 1; n < 2000; n += 53) {
    const auto mid = path.value(0.5 * (clock.tau(n) + clock.tau(n + 1)));
    for (std::size_t k = 0; k < mid.size(); ++k) {
      ASSERT_NEAR(mid[k], 0.5 * (path.knot(n)[k] + path.knot(n + 1)[k]), 1e-12);
    }
  }
  EXPECT_THROW(path.value(path.end() + 1.0), std::out_of_range);
}

TEST(InterpolatedPath, HeldValueWithinDeltaOfPath) {
  const auto t = vsfp_run(kPennies, StrategySpec::best_response_adversary(), 3000, 4);
  const auto path = interpolate(t);
  const double c = state_space_diameter(kPennies);
  Rng rng(1);
  for (int k = 0; k < 2000; ++k) {
    const double s = path.start() + uniform01(rng) * (path.end() - path.start());
    ASSERT_LE(norm(path.value(s), path.held(s)), c * path.gamma_bar(s) + 1e-12);
  }
}

TEST(InterpolatedPath, RequiresFullStride) {
  const auto t = run(kPennies, StrategySpec::sfp(2.0), StrategySpec::alternating(), SimplexPoint::uniform(2),
                     100, 1);
  EXPECT_THROW(interpolate(t), std::invalid_argument);
}

TEST(DeltaAccumulation, ZeroNoiseAndSingleSpike) {
  const auto t = run(kPennies, StrategySpec::fp(), StrategySpec::alternating(), SimplexPoint::uniform(2),
                     500, 1, {LogStride::full, {}, ""});
  auto noise = extract_noise(t);
  const auto path = interpolate(t);
  EXPECT_EQ(delta_accumulation(noise, path, 1.5, 2.0), 0.0);
  // One nonzero increment U_k fully inside the window contributes gamma_k |U_k|.
  const std::int64_t k = 40;
  noise.increments[k - 1] = {0.0, 0.0, 3.0, -4.0, 0.0};
  const double t0 = path.clock().tau(k - 2);
  EXPECT_NEAR(delta_accumulation(noise, path, t0, 1.0), 5.0 / k, 1e-14);
}

TEST(DeltaAccumulation, MedianDecaysAlongTime) {
  std::vector<double> early, late;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const auto t = run(kPennies, StrategySpec::sfp(2.0), StrategySpec::iid_mixed(SimplexPoint::uniform(2)),
                       SimplexPoint::uniform(2), 30000, seed, {LogStride::full, {}, ""});
    const auto noise = extract_noise(t);
    const auto path = interpolate(t);
    early.push_back(delta_accumulation(noise, path, 2.0, 1.0));
    late.push_back(delta_accumulation(noise, path, 8.0, 1.0));
  }
  std::sort(early.begin(), early.end());
  std::sort(late.begin(), late.end());
  // Increments are O(1) with weights 1/n, n ~ e^t: Delta scales like e^{-t/2}.
  EXPECT_LE(late[16], early[16] * std::exp(-(8.0 - 2.0) / 2.0) * 3.0);
}

TEST(LyapunovPhi, ExamplesAndClamp) {
  const DIProblem prob{kPennies, BetaSchedule::power(0.5)};
  const StateTriple v{SimplexPoint::uniform(2), SimplexPoint::uniform(2), 0.0};
  // m(0.5) = 0 so beta = beta_1 = 1.
  EXPECT_NEAR(lyapunov_phi(prob, 0.5, v), 1.19315, 1e-5);
  const StateTriple top{SimplexPoint::uniform(2), SimplexPoint({0.99, 0.01}), 1.0};
  const DIProblem sharp{kPennies, BetaSchedule::constant(200.0)};
  EXPECT_EQ(lyapunov_phi(sharp, 1.0, top), 0.0);
}

TEST(LyapunovPhi, ConvergesToRegretMapAsBetaGrows) {
  const DIProblem prob{random_game(3, 3, 2), BetaSchedule::power(0.5)};
  Rng rng(3);
  for (double s : {2.0, 6.0, 12.0}) {
    const double beta = prob.beta_at(s);
    for (int k = 0; k < 50; ++k) {
      const StateTriple v{SimplexPoint(sample_simplex(3, rng)), SimplexPoint(sample_simplex(3, rng)),
                          (2 * uniform01(rng) - 1) * prob.pm.sup_norm()};
      const double g = std::max(0.0, best_response_value(prob.pm, v.y) - v.pi);
      const double phi = lyapunov_phi(prob, s, v);
      ASSERT_GE(phi, g - 1e-14);
      ASSERT_LE(phi - g, std::log(3.0) / beta + 1e-14);
    }
  }
}

TEST(LyapunovPhi, LipschitzInYPiIndependentOfBeta) {
  const auto pm = random_game(3, 4, 5);
  Rng rng(4);
  for (double beta : {1.0, 10.0, 100.0}) {
    const DIProblem prob{pm, BetaSchedule::constant(beta)};
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
      const auto x = SimplexPoint::uniform(3);
      const StateTriple a{x, SimplexPoint(sample_simplex(4, rng)), (2 * uniform01(rng) - 1) * pm.sup_norm()};
      const StateTriple b{x, SimplexPoint(sample_simplex(4, rng)), (2 * uniform01(rng) - 1) * pm.sup_norm()};
      double d1 = std::abs(a.pi - b.pi);
      for (std::size_t l = 0; l < 4; ++l) d1 += std::abs(a.y[l] - b.y[l]);
      worst = std::max(worst, std::abs(lyapunov_phi(prob, 1.0, a) - lyapunov_phi(prob, 1.0, b)) / d1);
    }
    EXPECT_LE(worst, pm.sup_norm() + 1.0);
  }
}

TEST(DIProblem, VelocityBoundAndAffineInSelection) {
  const DIProblem prob{random_game(3, 3, 6), BetaSchedule::power(0.5)};
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const StateTriple v{SimplexPoint(sample_simplex(3, rng)), SimplexPoint(sample_simplex(3, rng)),
                        (2 * uniform01(rng) - 1) * prob.pm.sup_norm()};
    const auto w = v.flatten();
    const SimplexPoint t1(sample_simplex(3, rng)), t2(sample_simplex(3, rng));
    const auto f1 = prob.velocity(2.0, w, t1);
    const auto f2 = prob.velocity(2.0, w, t2);
    std::vector<double> zero(f1.size(), 0.0);
    ASSERT_LE(norm(f1, zero), prob.velocity_bound());
    std::vector<double> mid(3);
    for (int l = 0; l < 3; ++l) mid[l] = 0.5 * (t1[l] + t2[l]);
    const auto fm = prob.velocity(2.0, w, SimplexPoint(mid));
    for (std::size_t j = 0; j < fm.size(); ++j) ASSERT_NEAR(fm[j], 0.5 * (f1[j] + f2[j]), 1e-14);
  }
}

TEST(EulerSolve, ConstantSelectionMatchesClosedFormFirstOrder) {
  const DIProblem prob{kPennies, BetaSchedule::power(0.5)};
  const SimplexPoint tau({0.8, 0.2});
  const StateTriple w0{SimplexPoint::uniform(2), SimplexPoint({0.1, 0.9}), 0.0};
  auto defect = [&](double h) {
    const auto c = euler_solve(prob, w0, 1.0, 3.0, h, SelectionPolicy::constant(tau));
    const double exact = 0.8 + (0.1 - 0.8) * std::exp(-2.0);
    return std::abs(c.states.back()[2] - exact);
  };
  const double d1 = defect(1e-2), d2 = defect(5e-3);
  EXPECT_LT(d1, 1e-2);
  EXPECT_NEAR(d1 / d2, 2.0, 0.1);
}

TEST(EulerSolve, FixedPointIsStationary) {
  const DIProblem prob{kPennies, BetaSchedule::constant(3.0)};
  const SimplexPoint tau({0.3, 0.7});
  const auto br = logit(kPennies, tau, 3.0);
  const StateTriple w0{br, tau, bilinear_payoff(kPennies, br, tau)};
  const auto c = euler_solve(prob, w0, 1.0, 2.0, 1e-3, SelectionPolicy::constant(tau));
  EXPECT_LT(norm(c.states.back(), w0.flatten()), 1e-12);
}

TEST(EulerSolve, IncrementsAreSelectedVelocitiesAndStayInM) {
  const DIProblem prob{random_game(3, 3, 8), BetaSchedule::power(0.5)};
  const StateTriple w0{SimplexPoint({0.7, 0.2, 0.1}), SimplexPoint({0.1, 0.1, 0.8}), 0.2};
  const auto c = euler_solve(prob, w0, 2.0, 3.0, 1e-2, SelectionPolicy::worst_case_vertex(),
                             std::vector<double>{2.345});
  ASSERT_EQ(c.selections.size() + 1, c.states.size());
  for (std::size_t k = 0; k + 1 < c.states.size(); ++k) {
    const auto f = prob.velocity(c.times[k], c.states[k], c.selections[k]);
    const double dt = c.times[k + 1] - c.times[k];
    for (std::size_t j = 0; j < f.size(); ++j) ASSERT_NEAR(c.states[k + 1][j] - c.states[k][j], dt * f[j], 1e-12);
    ASSERT_TRUE(in_state_space(prob.pm, c.state(k + 1)));
    ASSERT_LT(c.selections[k].vertex_index(), 3u);
  }
  EXPECT_THROW(euler_solve(prob, w0, 2.0, 3.0, 2.0, SelectionPolicy::worst_case_vertex()), std::invalid_argument);
}

TEST(EulerSolve, LyapunovDecayWithRichardsonStepConstant) {
  const DIProblem prob{kPennies, BetaSchedule::power(0.5)};
  const StateTriple w0{SimplexPoint::uniform(2), SimplexPoint({0.9, 0.1}), -0.5};
  for (double t : {1.0, 2.0, 4.0}) {
    for (double T : {1.0, 2.0}) {
      const auto d1 = lyapunov_decay(prob, w0, t, T, 2e-3, SelectionPolicy::worst_case_vertex());
      const auto d2 = lyapunov_decay(prob, w0, t, T, 1e-3, SelectionPolicy::worst_case_vertex());
      const double c_h = std::abs(d1.psi_end - d2.psi_end) / 1e-3;
      EXPECT_LE(d2.psi_end, d2.bound + std::max(c_h, 1.0) * 1e-3);
    }
  }
}

TEST(ClosestSelection, MatchesGridSearch) {
  const DIProblem prob{random_game(2, 3, 9), BetaSchedule::constant(2.0)};
  const StateTriple v{SimplexPoint({0.4, 0.6}), SimplexPoint({0.2, 0.3, 0.5}), 0.1};
  const auto w = v.flatten();
  const auto br = prob.response(1.0, v.y);
  const std::vector<double> target{0.1, -0.1, 0.4, -0.2, 0.3, 0.05};
  const auto tau = closest_selection(prob, br, w, target);
  auto objective = [&](const SimplexPoint& t) { return norm(prob.velocity_with(br, w, t), target); };
  double best = 1e300;
  for (int a = 0; a <= 400; ++a)
    for (int b = 0; a + b <= 400; ++b) best = std::min(best, objective(SimplexPoint({a / 400.0, b / 400.0, 1 - (a + b) / 400.0})));
  EXPECT_LE(objective(tau), best + 1e-12);
  EXPECT_GE(objective(tau), best - 1e-3);
}

TEST(TrackingSolve, ReproducesASolutionCurve) {
  const DIProblem prob{kPennies, BetaSchedule::power(0.5)};
  const StateTriple w0{SimplexPoint({0.3, 0.7}), SimplexPoint({0.6, 0.4}), 0.2};
  const auto curve = euler_solve(prob, w0, 2.0, 3.0, 1e-3, SelectionPolicy::worst_case_vertex());
  const auto tracked = tracking_solve(prob, TrackingTarget::from_curve(curve), 2.0, 3.0, 1e-3);
  EXPECT_LT(sup_deviation(tracked, [&](double s) { return curve.value(s); }), 1e-2);
}

TEST(TrackingSolve, OffsetTargetStaysWithinGronwall) {
  const DIProblem prob{kPennies, BetaSchedule::power(0.5)};
  const StateTriple w0{SimplexPoint({0.3, 0.7}), SimplexPoint({0.6, 0.4}), 0.2};
  const double a = 2.0, b = 2.5, h = 1e-3, d = 0.05;
  const auto curve = euler_solve(prob, w0, a, b, h, SelectionPolicy::constant(SimplexPoint({0.2, 0.8})));
  auto shifted = TrackingTarget::from_curve(curve);
  const auto position = shifted.position;
  shifted.position = [position, d](double s) {
    auto v = position(s);
    v.back() += d;
    return v;
  };
  const auto tracked = tracking_solve(prob, shifted, a, b, h);
  const double growth = std::exp(integrate(schedule_lipschitz(prob), a, b));
  EXPECT_LE(sup_deviation(tracked, shifted.position), d * growth + 10 * h);
}

TEST(TrackingSolve, StochasticPathWithinDeviationBound) {
  const double nu = 0.5;
  const auto learner = StrategySpec::vsfp(BetaSchedule::power(nu));
  const DIProblem prob = di_problem(kPennies, learner);
  const auto N = HarmonicClock::shared()->m(window_start(nu, 11)) + 2;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto t = vsfp_run(kPennies, StrategySpec::best_response_adversary(), N, seed);
    const auto noise = extract_noise(t);
    const auto path = interpolate(t);
    for (int k : {5, 10}) {
      const auto w = tracking_window(prob, path, noise, window_start(nu, k), window_start(nu, k + 1), 1e-3);
      EXPECT_LE(w.deviation, w.bound + 1e-2);
    }
  }
}

TEST(DeviationBound, Examples) {
  const auto L = exponential_lipschitz(0.5);
  EXPECT_EQ(deviation_bound(L, 0.0, 0.0, 1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(deviation_bound([](double) { return 0.0; }, 0.3, 0.7, 1.0, 2.0), 0.7);
  EXPECT_NEAR(integrate(L, 1.0, 3.0), exponential_lipschitz_integral(0.5, 1.0, 3.0), 1e-8);
  // exp(int_{S_k}^{S_{k+1}} e^{nu s}) stays below a k-independent constant.
  double worst = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double a = window_start(0.5, k), b = window_start(0.5, k + 1);
    const double g = std::exp(exponential_lipschitz_integral(0.5, a, b));
    EXPECT_LE(g, std::exp((b - a) * std::exp(0.5 * b)) + 1e-9);
    worst = std::max(worst, g);
  }
  EXPECT_LE(worst, std::exp(std::exp(1.0) / 0.5));
}

TEST(Membership, PerturbedSolutionIdentity) {
  const auto pm = random_game(3, 3, 11);
  const auto learner = StrategySpec::vsfp(BetaSchedule::power(0.5));
  const auto t = vsfp_run(pm, StrategySpec::iid_mixed(SimplexPoint({0.5, 0.2, 0.3})), 5000, 12);
  const DIProblem prob = di_problem(pm, learner);
  const auto noise = extract_noise(t);
  const auto path = interpolate(t);
  Rng rng(13);
  for (int k = 0; k < 1000; ++k) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(uniform01(rng) * 4998);
    const double s = path.clock().tau(n) + (0.1 + 0.8 * uniform01(rng)) / (n + 1);
    const auto m = check_membership(prob, path, noise, s);
    ASSERT_LE(m.residual, 1e-9);
    ASSERT_LE(m.simplex_gap, 1e-9);
  }
}

TEST(Monitor, VsfpAgainstAlternatingDecays) {
  const auto learner = StrategySpec::vsfp(BetaSchedule::power(0.5));
  const DIProblem prob = di_problem(kPennies, learner);
  const std::int64_t N = HarmonicClock::shared()->m(window_start(0.5, 50)) + 2;
  int below = 0;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const auto t = vsfp_run(kPennies, StrategySpec::alternating(), N, seed);
    const auto report = consistency_monitor(t, prob, 0.5, 0.05, 50);
    below += report.rows.back().phi < 0.05;
    if (seed == 0) {
      EXPECT_DOUBLE_EQ(report.r, 1.1);
      EXPECT_EQ(report.rows.back().k, 50);
      EXPECT_TRUE(report.case_b);
      std::ostringstream os;
      write_monitor_csv(report, os);
      EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "k,S_k,phi,H_k,eta_k,bound");
    }
  }
  EXPECT_EQ(below, 32);
}

TEST(Monitor, ExampleTwoTailDoesNotVanish) {
  auto learner = StrategySpec::vsfp(BetaSchedule::linear(1.0));
  learner.use_prior_blending = true;
  const auto t = run(kPennies, learner, StrategySpec::alternating(), SimplexPoint({1.0 / 3, 2.0 / 3}), 200000, 1,
                     {LogStride::full, {}, ""});
  const DIProblem prob = di_problem(kPennies, learner);
  const auto report = consistency_monitor(t, prob, 0.5);
  EXPECT_FALSE(report.decays);
  // Phi tracks the regret map, whose limit on this path is (a + b) / 2.
  EXPECT_NEAR(report.rows.back().phi, example2_limit(), 0.05);
}

TEST(Monitor, RejectsShortTrajectories) {
  const auto learner = StrategySpec::vsfp(BetaSchedule::power(0.5));
  const auto t = vsfp_run(kPennies, StrategySpec::alternating(), 100, 1);
  EXPECT_THROW(consistency_monitor(t, di_problem(kPennies, learner), 0.5, 0.05, 50), std::invalid_argument);
}
