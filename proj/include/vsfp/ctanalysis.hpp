#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vsfp/engine.hpp"
#include "vsfp/game.hpp"
#include "vsfp/seqcert.hpp"
#include "vsfp/smooth_response.hpp"

namespace vsfp {

/// Knot times tau_n = sum_{i<=n} 1/i of the step sizes gamma_n = 1/n and the
/// inverse m(s) = sup{ j : tau_j <= s }. Immutable once built.
class HarmonicClock {
 public:
  explicit HarmonicClock(std::int64_t horizon);

  /// Shared instance covering stages up to 2^21 (s up to about 15).
  static std::shared_ptr<const HarmonicClock> shared();

  std::int64_t horizon() const { return static_cast<std::int64_t>(taus_.size()) - 1; }
  /// tau_0 = 0.
  double tau(std::int64_t n) const;
  std::int64_t m(double s) const;
  /// gamma_bar(s) = gamma_{m(s)+1}.
  double gamma_bar(double s) const { return 1.0 / static_cast<double>(m(s) + 1); }

 private:
  std::vector<double> taus_;
};

/// sqrt(2 + 2 + (2 |pi|)^2), the diameter bound of M used for delta(s).
double state_space_diameter(const PayoffMatrix& pm);

/// Affine interpolation of (v_n) at the knots tau_n, over stages [first, last].
class InterpolatedPath {
 public:
  InterpolatedPath(std::vector<std::vector<double>> knots, std::int64_t first_stage,
                   std::size_t n_rows, std::shared_ptr<const HarmonicClock> clock);

  double start() const { return clock_->tau(first_); }
  double end() const { return clock_->tau(last_stage()); }
  std::int64_t first_stage() const { return first_; }
  std::int64_t last_stage() const { return first_ + static_cast<std::int64_t>(knots_.size()) - 1; }
  std::size_t n_rows() const { return n_rows_; }
  const HarmonicClock& clock() const { return *clock_; }

  const std::vector<double>& knot(std::int64_t n) const;
  /// v(s), flattened (x, y, pi).
  std::vector<double> value(double s) const;
  /// Right derivative (v_{n+1} - v_n) / gamma_{n+1} on [tau_n, tau_{n+1}).
  std::vector<double> slope(double s) const;
  /// v_bar(s) = v_{m(s)}.
  const std::vector<double>& held(double s) const;
  std::int64_t m(double s) const;
  double gamma_bar(double s) const { return clock_->gamma_bar(s); }
  /// Knot times strictly inside (a, b).
  std::vector<double> knot_times(double a, double b) const;

 private:
  std::int64_t clamp_stage(double s) const;

  std::vector<std::vector<double>> knots_;
  std::int64_t first_;
  std::size_t n_rows_;
  std::shared_ptr<const HarmonicClock> clock_;
};

/// Requires a full-stride trajectory; `last_stage` of 0 means the horizon.
InterpolatedPath interpolate(const Trajectory& traj, std::int64_t first_stage = 1,
                             std::int64_t last_stage = 0,
                             std::shared_ptr<const HarmonicClock> clock = HarmonicClock::shared());

/// sup_{h in [0, T]} || int_t^{t+h} U_bar(s) ds ||, U_bar = U_{m(s)+1}.
double delta_accumulation(const NoiseRecord& noise, const InterpolatedPath& path, double t,
                          double T);

/// The inclusion w' in F(t, w) = F_{m(t)}(w) with
/// F_n(x, y, pi) = { (br(y, beta_n) - x, tau - y, pi(br(y, beta_n), tau) - pi) : tau in Y }.
struct DIProblem {
  PayoffMatrix pm;
  BetaSchedule schedule;
  PerturbationFunction rho = PerturbationFunction::entropy();
  std::shared_ptr<const HarmonicClock> clock = HarmonicClock::shared();

  std::size_t dim() const { return pm.rows() + pm.cols() + 1; }
  double beta_at(double s) const;
  SimplexPoint response(double s, const SimplexPoint& y) const;
  /// Selected velocity f(s, w, tau).
  std::vector<double> velocity(double s, std::span<const double> w, const SimplexPoint& tau) const;
  /// Same, with br(y, beta_{m(s)}) supplied by the caller.
  std::vector<double> velocity_with(const SimplexPoint& br, std::span<const double> w,
                                    const SimplexPoint& tau) const;
  /// Uniform bound 2 + 2|pi| + sqrt(2) on selected velocities.
  double velocity_bound() const;
  /// Lipschitz modulus of w -> F(s, w) in the Hausdorff metric.
  double lipschitz(double s) const;
};

/// Phi(s, x, y, pi) = max(0, Pi~(y, beta_{m(s)}) - pi).
double lyapunov_phi(const DIProblem& prob, double s, const StateTriple& v);
double lyapunov_phi(const DIProblem& prob, double s, std::span<const double> w);

struct SelectionPolicy {
  enum class Kind { constant, worst_case_vertex, sequence };
  Kind kind = Kind::constant;
  SimplexPoint fixed;
  std::function<SimplexPoint(double s, std::span<const double> w)> supplier;

  static SelectionPolicy constant(SimplexPoint tau);
  /// Vertex of Y maximizing Phi one step ahead.
  static SelectionPolicy worst_case_vertex();
  static SelectionPolicy sequence(std::function<SimplexPoint(double, std::span<const double>)> fn);
};

struct SolutionCurve {
  std::size_t n_rows = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  /// Selection used on [times[k], times[k+1]).
  std::vector<SimplexPoint> selections;

  StateTriple state(std::size_t k) const { return StateTriple::unflatten(states[k], n_rows); }
  /// Linear interpolation between grid points.
  std::vector<double> value(double s) const;
};

class StateEscape : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Explicit Euler on [a, b] with per-step selections; steps are cut at
/// `breakpoints` inside (a, b).
SolutionCurve euler_solve(const DIProblem& prob, const StateTriple& w0, double a, double b,
                          double h, const SelectionPolicy& policy,
                          std::span<const double> breakpoints = {});

/// Reference path W for tracking: position and right derivative.
struct TrackingTarget {
  std::function<std::vector<double>(double)> position;
  std::function<std::vector<double>(double)> velocity;
  std::vector<double> breakpoints;

  /// W = v, W' = slope of v.
  static TrackingTarget from_path(const InterpolatedPath& path);
  /// W(s) = v(s) - int_a^s U_bar, so W'(s) lies in F(s, v_bar(s)).
  static TrackingTarget denoised(const InterpolatedPath& path, const NoiseRecord& noise, double a);
  static TrackingTarget from_curve(const SolutionCurve& curve);
};

/// Minimizer over tau in Y of || f(s, w, tau) - target_velocity || for a
/// velocity affine in tau (projected gradient).
SimplexPoint closest_selection(const DIProblem& prob, const SimplexPoint& br,
                               std::span<const double> w, std::span<const double> target_velocity);

/// Euler solution from W(a) whose selection tracks W' at every step.
SolutionCurve tracking_solve(const DIProblem& prob, const TrackingTarget& target, double a,
                             double b, double h);

/// sup over the grid of || curve(s) - path(s) ||.
double sup_deviation(const SolutionCurve& curve,
                     const std::function<std::vector<double>(double)>& path);

/// R(a, b) = Delta e^{int L} + delta_sup (e^{int L} - 1).
double deviation_bound(const ScalarFn& L_fn, double delta_sup, double Delta_ab, double a,
                       double b, std::span<const double> breakpoints = {});
/// s -> prob.lipschitz(s), piecewise constant between knots.
ScalarFn schedule_lipschitz(const DIProblem& prob);
/// s -> e^{nu s}.
ScalarFn exponential_lipschitz(double nu);
/// Closed form of int_a^b e^{nu s} ds.
double exponential_lipschitz_integral(double nu, double a, double b);

/// Solve v' - U_bar = f(s, v_bar(s), tau) for tau and report membership in F.
struct MembershipCheck {
  std::vector<double> tau;
  double residual = 0.0;     ///< mismatch outside the tau-determined block
  double simplex_gap = 0.0;  ///< distance of tau from Y
};
MembershipCheck check_membership(const DIProblem& prob, const InterpolatedPath& path,
                                 const NoiseRecord& noise, double s);

struct MonitorRow {
  int k = 0;
  double S_k = 0.0;
  double phi = 0.0;
  double H_k = 0.0;
  double eta_k = 0.0;
  double bound = 0.0;
};

struct MonitorReport {
  double nu = 0.0;
  double r = 0.0;
  double L_phi = 0.0;
  double tolerance = 0.0;
  std::vector<MonitorRow> rows;
  double tail_phi = 0.0;  ///< max Phi over the final quarter of k
  bool decays = false;
  bool case_a = false;
  bool case_b = false;
};

/// S_k = sum_{i<=k} T_i with T_i = 1 / (nu i); evaluates Phi(S_k, v(S_k))
/// and the recursion bound with lambda(T) = e^{-T},
/// eta_{k+1} = T_{k+1} / beta_{m(S_k)} + L_phi k^{-r}.
MonitorReport consistency_monitor(const Trajectory& traj, const DIProblem& prob, double nu,
                                  double tolerance = 0.05, int k_max = 0);

/// S_k for T_i = 1 / (nu i).
double window_start(double nu, int k);

void write_monitor_csv(const MonitorReport& report, std::ostream& out);

}  // namespace vsfp
