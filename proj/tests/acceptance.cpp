// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion.
//   acceptance [--only K]
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vsfp/config.hpp"
#include "vsfp/ctanalysis.hpp"
#include "vsfp/engine.hpp"
#include "vsfp/experiment.hpp"
#include "vsfp/rng.hpp"
#include "vsfp/seqcert.hpp"
#include "vsfp/smooth_response.hpp"

using namespace vsfp;

namespace {

// Tolerances, pinned.
constexpr double kExample1Slack = 1e-10;
constexpr double kExample1Seconds = 1.0;
constexpr double kExample2Tolerance = 0.01;
constexpr double kSweepTailMax = 0.05;
constexpr double kSfpSlack = 0.02;
constexpr double kEulerStep = 1e-3;
constexpr double kStepSlack = 10.0;
constexpr double kExponentTolerance = 0.1;
constexpr double kRecursionTarget = 1e-3;
constexpr double kLogitTolerance = 1e-8;
constexpr double kGradientRelTolerance = 1e-4;
constexpr double kMembershipTolerance = 1e-9;

const std::vector<std::uint64_t> kSeeds = [] {
  std::vector<std::uint64_t> s(32);
  std::iota(s.begin(), s.end(), 101);
  return s;
}();

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const PayoffMatrix kPennies = PayoffMatrix::matching_pennies();
const PayoffMatrix kRandom3 = random_game(3, 3, 2024);
const SimplexPoint kThirds({1.0 / 3.0, 2.0 / 3.0});

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::int64_t N = 10000;
  const auto traj = run(kPennies, StrategySpec::fp(), StrategySpec::alternating(), kThirds, N, 1);
  const double secs = seconds_since(t0);
  const double pi = traj.last().pi_bar;
  const double e = traj.last().regret;
  const bool pass = pi == 0.0 && std::abs(e - 0.5) <= 1.0 / (2.0 * N) + kExample1Slack &&
                    secs < kExample1Seconds;
  return {pass, fmt("pi_bar_N=%.17g e_N=%.17g runtime=%.3fs", pi, e, secs)};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  auto learner = StrategySpec::vsfp(BetaSchedule::linear(1.0));
  learner.use_prior_blending = true;
  const auto runs = run_seeds(kPennies, learner, StrategySpec::alternating(), kThirds, 1000000,
                              kSeeds, {}, 1);
  std::vector<double> e, odd, even;
  for (const auto& s : runs) {
    e.push_back(s.e_N);
    odd.push_back(s.odd_payoff_one);
    even.push_back(s.even_payoff_one);
  }
  const double a = 0.5 - 1.0 / (1.0 + std::exp(1.0 / 3.0));
  const double b = 0.5 - 1.0 / (1.0 + std::exp(2.0 / 3.0));
  const double target = 0.5 * (a + b);
  const double odd_target = 1.0 / (1.0 + std::exp(1.0 / 3.0));
  const double even_target = 1.0 / (1.0 + std::exp(2.0 / 3.0));
  const bool pass = std::abs(mean(e) - target) <= kExample2Tolerance &&
                    std::abs(mean(odd) - odd_target) <= kExample2Tolerance &&
                    std::abs(mean(even) - even_target) <= kExample2Tolerance;
  return {pass, fmt("mean e_N=%.5f (target %.5f) odd=%.5f (%.5f) even=%.5f (%.5f) runtime=%.1fs",
                    mean(e), target, mean(odd), odd_target, mean(even), even_target,
                    seconds_since(t0))};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  double worst = -INFINITY;
  std::string worst_cell, monotone_breaks;
  const std::pair<const char*, const PayoffMatrix*> games[] = {{"pennies", &kPennies},
                                                               {"random3x3", &kRandom3}};
  for (const auto& [gname, pm] : games) {
    const std::size_t L = pm->cols();
    const std::pair<const char*, StrategySpec> adversaries[] = {
        {"alternating", StrategySpec::alternating()},
        {"iid", StrategySpec::iid_mixed(SimplexPoint::uniform(L))},
        {"best_response", StrategySpec::best_response_adversary()}};
    for (double nu : {0.3, 0.5, 0.8}) {
      for (const auto& [aname, adv] : adversaries) {
        const auto runs = run_seeds(*pm, StrategySpec::vsfp(BetaSchedule::power(nu)), adv,
                                    SimplexPoint::uniform(L), 1000000, kSeeds,
                                    {LogStride::geometric, {10000, 100000}, ""}, 1);
        std::vector<double> med;
        for (std::size_t c = 0; c < 3; ++c) {
          std::vector<double> v;
          for (const auto& s : runs) v.push_back(s.tails[c].tail_max);
          med.push_back(median(v));
        }
        for (const auto& s : runs) {
          pass = pass && s.tail_max <= kSweepTailMax;
          if (s.tail_max > worst) {
            worst = s.tail_max;
            worst_cell = fmt("%s/nu=%.1f/%s", gname, nu, aname);
          }
        }
        if (med[1] > med[0] || med[2] > med[1]) {
          pass = false;
          monotone_breaks += fmt(" %s/nu=%.1f/%s[%.4g,%.4g,%.4g]", gname, nu, aname, med[0], med[1], med[2]);
        }
      }
    }
  }
  return {pass, fmt("worst tail max %.5f at %s; median nonincreasing violations:%s runtime=%.1fs",
                    worst, worst_cell.c_str(),
                    monotone_breaks.empty() ? " none" : monotone_breaks.c_str(), seconds_since(t0))};
}

Outcome criterion4() {
  bool within = true;
  std::vector<double> means;
  std::string detail;
  for (double beta : {5.0, 20.0, 100.0}) {
    const auto runs = run_seeds(kPennies, StrategySpec::sfp(beta),
                                StrategySpec::best_response_adversary(), SimplexPoint::uniform(2),
                                1000000, kSeeds, {}, 1);
    std::vector<double> tails;
    for (const auto& s : runs) tails.push_back(s.tail_max);
    const double worst = *std::max_element(tails.begin(), tails.end());
    const double bound = std::log(2.0) / beta + kSfpSlack;
    within = within && worst <= bound;
    means.push_back(mean(tails));
    detail += fmt("beta=%g: max %.5f mean %.5f bound %.5f; ", beta, worst, means.back(), bound);
  }
  const bool decreasing = means[1] < means[0] && means[2] < means[1];
  detail += decreasing ? "mean tail max decreasing in beta" : "mean tail max NOT decreasing in beta";
  return {within && decreasing, detail};
}

Outcome criterion5() {
  int cases = 0;
  double worst_excess = -INFINITY;
  const PayoffMatrix* games[] = {&kPennies, &kRandom3};
  for (std::size_t g = 0; g < 2; ++g) {
    const PayoffMatrix& pm = *games[g];
    const std::size_t L = pm.cols();
    const DIProblem prob{pm, BetaSchedule::power(0.5)};
    const SelectionPolicy policies[] = {
        SelectionPolicy::constant(SimplexPoint::vertex(L, L - 1)),
        SelectionPolicy::worst_case_vertex(),
        SelectionPolicy::sequence([L](double s, std::span<const double>) {
          std::vector<double> tau(L);
          for (std::size_t l = 0; l < L; ++l) tau[l] = 1.0 + std::cos(5.0 * s + static_cast<double>(l));
          const double sum = std::accumulate(tau.begin(), tau.end(), 0.0);
          for (double& v : tau) v /= sum;
          return SimplexPoint(std::move(tau));
        })};
    Rng rng(derive_seed(55, g));
    for (int start = 0; start < 6; ++start) {
      const StateTriple w0{SimplexPoint(sample_simplex(pm.rows(), rng)),
                           SimplexPoint(sample_simplex(L, rng)),
                           (2.0 * uniform01(rng) - 1.0) * pm.sup_norm()};
      for (double t : {1.0, 2.0, 4.0}) {
        for (double T : {1.0, 2.0}) {
          for (const auto& policy : policies) {
            const auto d = lyapunov_decay(prob, w0, t, T, kEulerStep, policy);
            worst_excess = std::max(worst_excess, d.psi_end - d.bound);
            ++cases;
          }
        }
      }
    }
  }
  return {worst_excess <= kStepSlack * kEulerStep,
          fmt("%d cases; max Psi(t+T) - bound = %.3g (allowed %.3g)", cases, worst_excess,
              kStepSlack * kEulerStep)};
}

Outcome criterion6() {
  const double nu = 0.5;
  const auto learner = StrategySpec::vsfp(BetaSchedule::power(nu));
  const DIProblem prob = di_problem(kPennies, learner);
  const std::int64_t N = HarmonicClock::shared()->m(window_start(nu, 21)) + 2;
  int windows = 0, ok = 0;
  double worst_ratio = 0.0;
  double max_dev = 0.0;
  run_seeds(kPennies, learner, StrategySpec::iid_mixed(SimplexPoint::uniform(2)),
            SimplexPoint::uniform(2), N, kSeeds, {LogStride::full, {}, ""}, 1,
            [&](const Trajectory& traj, SeedSummary&) {
              const auto noise = extract_noise(traj);
              const auto path = interpolate(traj);
              for (int k : {5, 10, 20}) {
                const auto w = tracking_window(prob, path, noise, window_start(nu, k),
                                               window_start(nu, k + 1), kEulerStep);
                ++windows;
                ok += w.deviation <= w.bound + kStepSlack * kEulerStep;
                worst_ratio = std::max(worst_ratio, w.deviation / w.bound);
                max_dev = std::max(max_dev, w.deviation);
              }
            });
  return {ok == windows, fmt("%d/%d windows within R(a,b)+10h; max deviation %.4g; max deviation/R %.3g",
                             ok, windows, max_dev, worst_ratio)};
}

Outcome criterion7() {
  const int K = 10000;
  const double nu = 0.5;
  std::vector<double> lambda_b(K), eta_b(K), lambda_a(K, 0.5), eta_a(K);
  for (int k = 1; k <= K; ++k) {
    lambda_b[k - 1] = std::exp(-1.0 / (nu * k));
    eta_b[k - 1] = std::pow(static_cast<double>(k), -3.0);
    eta_a[k - 1] = 1.0 / k;
  }
  const auto cert_b = sequence_certificate(lambda_b, eta_b, 1.0, K);
  std::vector<double> ks, hs;
  for (int k = 1; k <= K; ++k) {
    ks.push_back(k);
    hs.push_back(cert_b.H[k]);
  }
  const double exponent = fit_power_law(ks, hs);
  const auto cert_a = sequence_certificate(lambda_a, eta_a, 1.0, K);
  // Direct iteration of Phi_{k+1} = lambda Phi_k + eta_{k+1} as a cross-check.
  double phi_a = 1.0, phi_b = 1.0;
  for (int k = 1; k <= K; ++k) {
    phi_a = lambda_a[k - 1] * phi_a + eta_a[k - 1];
    phi_b = lambda_b[k - 1] * phi_b + eta_b[k - 1];
  }
  const bool pass = std::abs(exponent + 1.0 / nu) <= kExponentTolerance && cert_a.case_a &&
                    cert_b.case_b && cert_a.bound[K] < kRecursionTarget &&
                    cert_b.bound[K] < kRecursionTarget &&
                    std::abs(cert_a.bound[K] - phi_a) <= 1e-12 && std::abs(cert_b.bound[K] - phi_b) <= 1e-12;
  return {pass, fmt("H_k exponent %.4f (target %.1f); case a bound %.3g flag %d; case b bound %.3g flag %d",
                    exponent, -1.0 / nu, cert_a.bound[K], cert_a.case_a, cert_b.bound[K], cert_b.case_b)};
}

Outcome criterion8() {
  Rng rng(derive_seed(8, 0));
  auto generic_entropy = PerturbationFunction::entropy();
  generic_entropy.is_entropy = false;  // force the Newton path
  double worst_logit = 0.0;
  double worst_grad = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t I = 2 + trial % 3, L = 2 + (trial / 3) % 3;
    const PayoffMatrix pm = random_game(I, L, 1000 + trial);
    const SimplexPoint y(sample_simplex(L, rng));
    const double beta = 0.1 + 20.0 * uniform01(rng);
    const auto newton = smooth_best_response(pm, y, beta, generic_entropy);
    const auto closed = logit(pm, y, beta);
    for (std::size_t i = 0; i < I; ++i) worst_logit = std::max(worst_logit, std::abs(newton[i] - closed[i]));

    // Envelope theorem: d/dy_l Pi~(y) = pi(br(y), l).
    const auto rho = trial % 2 ? PerturbationFunction::log_barrier() : PerturbationFunction::entropy();
    const SimplexPoint yg(sample_simplex(L, rng));
    const auto br = smooth_best_response(pm, yg, beta, rho);
    const auto grad = pm.column_payoffs(br.weights());
    // Directional derivatives along tangent directions e_l - e_0.
    for (std::size_t l = 1; l < L; ++l) {
      const double eps = 1e-6 * std::min(yg[0], yg[l]);
      auto plus = std::vector<double>(yg.weights().begin(), yg.weights().end());
      auto minus = plus;
      plus[l] += eps, plus[0] -= eps, minus[l] -= eps, minus[0] += eps;
      const double fd = (perturbed_value(pm, SimplexPoint(plus), beta, rho) -
                         perturbed_value(pm, SimplexPoint(minus), beta, rho)) / (2.0 * eps);
      const double exact = grad[l] - grad[0];
      const double scale = std::max(1.0, std::max(std::abs(grad[l]), std::abs(grad[0])));
      worst_grad = std::max(worst_grad, std::abs(fd - exact) / scale);
    }
  }

  // Perturbed-solution membership at non-knot times.
  double worst_residual = 0.0, worst_gap = 0.0;
  int samples = 0;
  const PayoffMatrix* games[] = {&kPennies, &kRandom3};
  for (std::size_t g = 0; g < 2; ++g) {
    const PayoffMatrix& pm = *games[g];
    const auto learner = StrategySpec::vsfp(BetaSchedule::power(0.5));
    const DIProblem prob = di_problem(pm, learner);
    for (const auto& adv : {StrategySpec::iid_mixed(SimplexPoint::uniform(pm.cols())),
                            StrategySpec::best_response_adversary()}) {
      const auto traj = run(pm, learner, adv, SimplexPoint::uniform(pm.cols()), 20000, 300 + g,
                            {LogStride::full, {}, ""});
      const auto noise = extract_noise(traj);
      const auto path = interpolate(traj);
      Rng srng(derive_seed(9, g));
      for (int k = 0; k < 1000; ++k) {
        // Uniform stage, then a uniform interior point of its interval.
        const std::int64_t n = 1 + static_cast<std::int64_t>(uniform01(srng) * (traj.horizon - 1));
        const double lo = path.clock().tau(n), hi = path.clock().tau(n + 1);
        const double s = lo + (0.05 + 0.9 * uniform01(srng)) * (hi - lo);
        const auto m = check_membership(prob, path, noise, s);
        worst_residual = std::max(worst_residual, m.residual);
        worst_gap = std::max(worst_gap, m.simplex_gap);
        ++samples;
      }
    }
  }
  const bool pass = worst_logit <= kLogitTolerance && worst_grad <= kGradientRelTolerance &&
                    worst_residual <= kMembershipTolerance && worst_gap <= kMembershipTolerance;
  return {pass, fmt("newton-vs-logit %.2g; envelope gradient rel err %.2g; membership residual %.2g, "
                    "simplex gap %.2g over %d times",
                    worst_logit, worst_grad, worst_residual, worst_gap, samples)};
}

Outcome criterion9() {
  const auto clock = HarmonicClock::shared();
  bool pass = true;
  std::string detail;
  for (int s = 1; s <= 12; ++s) {
    const double m = static_cast<double>(clock->m(s));
    const double lo = (std::exp(1.0) - 1.0) / std::exp(1.0) * std::exp(s);
    const double hi = std::exp(s) - 1.0;
    const bool ok = lo <= m && m <= hi;
    pass = pass && ok;
    if (!ok) detail += fmt("s=%d: m=%.0f not in [%.2f, %.2f]; ", s, m, lo, hi);
  }
  if (pass) detail = "all s in 1..12 inside the sandwich";
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--only") == 0 && k + 1 < argc) only = std::atoi(argv[++k]);
  }
  const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3,
                                               criterion4, criterion5, criterion6,
                                               criterion7, criterion8, criterion9};
  bool all = true;
  for (int k = 1; k <= 9; ++k) {
    if (only != 0 && only != k) continue;
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
