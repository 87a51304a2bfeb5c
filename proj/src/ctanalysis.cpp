#include "vsfp/ctanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace vsfp {

// --- HarmonicClock --------------------------------------------------------

HarmonicClock::HarmonicClock(std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("HarmonicClock: horizon must be >= 1");
  taus_.resize(static_cast<std::size_t>(horizon) + 1);
  taus_[0] = 0.0;
  for (std::size_t n = 1; n < taus_.size(); ++n) {
    taus_[n] = taus_[n - 1] + 1.0 / static_cast<double>(n);
  }
}

std::shared_ptr<const HarmonicClock> HarmonicClock::shared() {
  static const auto clock = std::make_shared<const HarmonicClock>(std::int64_t{1} << 21);
  return clock;
}

double HarmonicClock::tau(std::int64_t n) const {
  if (n < 0 || n > horizon()) throw std::out_of_range("HarmonicClock::tau: n beyond horizon");
  return taus_[static_cast<std::size_t>(n)];
}

std::int64_t HarmonicClock::m(double s) const {
  const auto it = std::upper_bound(taus_.begin(), taus_.end(), s);
  if (it == taus_.end()) throw std::out_of_range("HarmonicClock::m: s beyond clock horizon");
  return static_cast<std::int64_t>(it - taus_.begin()) - 1;
}

double state_space_diameter(const PayoffMatrix& pm) {
  const double p = 2.0 * pm.sup_norm();
  return std::sqrt(4.0 + p * p);
}

// --- InterpolatedPath -----------------------------------------------------

InterpolatedPath::InterpolatedPath(std::vector<std::vector<double>> knots,
                                   std::int64_t first_stage, std::size_t n_rows,
                                   std::shared_ptr<const HarmonicClock> clock)
    : knots_(std::move(knots)), first_(first_stage), n_rows_(n_rows), clock_(std::move(clock)) {
  if (knots_.size() < 2) throw std::invalid_argument("InterpolatedPath: need two or more knots");
  if (first_ < 1) throw std::invalid_argument("InterpolatedPath: stages start at 1");
  if (last_stage() > clock_->horizon()) {
    throw std::invalid_argument("InterpolatedPath: clock horizon shorter than the path");
  }
}

const std::vector<double>& InterpolatedPath::knot(std::int64_t n) const {
  if (n < first_ || n > last_stage()) throw std::out_of_range("InterpolatedPath::knot");
  return knots_[static_cast<std::size_t>(n - first_)];
}

std::int64_t InterpolatedPath::m(double s) const { return clock_->m(s); }

std::int64_t InterpolatedPath::clamp_stage(double s) const {
  constexpr double kSlack = 1e-12;
  if (s < start() - kSlack || s > end() + kSlack) {
    throw std::out_of_range("InterpolatedPath: time " + std::to_string(s) + " outside [" +
                            std::to_string(start()) + ", " + std::to_string(end()) + "]");
  }
  return std::clamp(clock_->m(std::clamp(s, start(), end())), first_, last_stage());
}

std::vector<double> InterpolatedPath::value(double s) const {
  const std::int64_t n = clamp_stage(s);
  if (n == last_stage()) return knots_.back();
  const auto& a = knot(n);
  const auto& b = knot(n + 1);
  const double w = (s - clock_->tau(n)) * static_cast<double>(n + 1);
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + w * (b[k] - a[k]);
  return out;
}

std::vector<double> InterpolatedPath::slope(double s) const {
  const std::int64_t n = std::min(clamp_stage(s), last_stage() - 1);
  const auto& a = knot(n);
  const auto& b = knot(n + 1);
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = (b[k] - a[k]) * static_cast<double>(n + 1);
  return out;
}

const std::vector<double>& InterpolatedPath::held(double s) const { return knot(clamp_stage(s)); }

std::vector<double> InterpolatedPath::knot_times(double a, double b) const {
  std::vector<double> out;
  for (std::int64_t n = first_; n <= last_stage(); ++n) {
    const double t = clock_->tau(n);
    if (t > a && t < b) out.push_back(t);
  }
  return out;
}

InterpolatedPath interpolate(const Trajectory& traj, std::int64_t first_stage,
                             std::int64_t last_stage, std::shared_ptr<const HarmonicClock> clock) {
  if (last_stage == 0) last_stage = traj.horizon;
  if (first_stage < 1 || last_stage > traj.horizon || last_stage <= first_stage) {
    throw std::invalid_argument("interpolate: invalid stage window");
  }
  if (traj.stride != LogStride::full) {
    throw std::invalid_argument("interpolate: stride too coarse, every stage of the window must be logged");
  }
  std::vector<std::vector<double>> knots;
  knots.reserve(static_cast<std::size_t>(last_stage - first_stage + 1));
  for (std::int64_t n = first_stage; n <= last_stage; ++n) {
    const auto& r = traj.at(n);
    std::vector<double> w(r.x_bar);
    w.insert(w.end(), r.y_bar.begin(), r.y_bar.end());
    w.push_back(r.pi_bar);
    knots.push_back(std::move(w));
  }
  return InterpolatedPath(std::move(knots), first_stage, traj.game.rows(), std::move(clock));
}

double delta_accumulation(const NoiseRecord& noise, const InterpolatedPath& path, double t,
                          double T) {
  if (T < 0.0) throw std::invalid_argument("delta_accumulation: T must be >= 0");
  const double stop = t + T;
  if (t < path.start() - 1e-12 || stop > path.end() + 1e-12) {
    throw std::out_of_range("delta_accumulation: window not covered by the trajectory");
  }
  const auto& clock = path.clock();
  std::vector<double> acc;
  double best = 0.0;
  double cur = t;
  while (cur < stop) {
    const std::int64_t m = clock.m(cur);
    const double next = std::min(clock.tau(m + 1), stop);
    if (m + 1 > noise.last_stage() || m + 1 < noise.first_stage) {
      throw NoiseUnavailable("delta_accumulation: noise missing for stage " + std::to_string(m + 1));
    }
    const auto& u = noise.at(m + 1);
    if (acc.empty()) acc.assign(u.size(), 0.0);
    double sq = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      acc[k] += (next - cur) * u[k];
      sq += acc[k] * acc[k];
    }
    best = std::max(best, std::sqrt(sq));
    cur = next;
  }
  return best;
}

// --- DIProblem --------------------------------------------------------------

double DIProblem::beta_at(double s) const {
  return schedule(std::max<std::int64_t>(clock->m(s), 1));
}

SimplexPoint DIProblem::response(double s, const SimplexPoint& y) const {
  const double beta = beta_at(s);
  if (rho.is_entropy) return logit(pm, y, beta);
  return smooth_best_response(pm, y, beta, rho);
}

std::vector<double> DIProblem::velocity_with(const SimplexPoint& br, std::span<const double> w,
                                             const SimplexPoint& tau) const {
  const std::size_t I = pm.rows();
  const std::size_t L = pm.cols();
  if (w.size() != I + L + 1 || br.size() != I || tau.size() != L) {
    throw std::invalid_argument("DIProblem::velocity: dimension mismatch");
  }
  std::vector<double> f(I + L + 1);
  for (std::size_t i = 0; i < I; ++i) f[i] = br[i] - w[i];
  for (std::size_t l = 0; l < L; ++l) f[I + l] = tau[l] - w[I + l];
  f[I + L] = bilinear_payoff(pm, br, tau) - w[I + L];
  return f;
}

std::vector<double> DIProblem::velocity(double s, std::span<const double> w,
                                        const SimplexPoint& tau) const {
  const std::size_t I = pm.rows();
  const SimplexPoint y({w.begin() + static_cast<std::ptrdiff_t>(I),
                        w.begin() + static_cast<std::ptrdiff_t>(I + pm.cols())});
  return velocity_with(response(s, y), w, tau);
}

double DIProblem::velocity_bound() const { return 2.0 + 2.0 * pm.sup_norm() + std::sqrt(2.0); }

double DIProblem::lipschitz(double s) const {
  // |br(y) - br(y')| <= beta |P|_2 / lambda |y - y'| and |P tau| <= max column norm.
  const double br_lip = beta_at(s) * pm.frobenius_norm() / rho.lambda;
  double kappa = 0.0;
  for (std::size_t l = 0; l < pm.cols(); ++l) {
    double c = 0.0;
    for (std::size_t i = 0; i < pm.rows(); ++i) c += pm(i, l) * pm(i, l);
    kappa = std::max(kappa, std::sqrt(c));
  }
  const double y_coef = 1.0 + br_lip * (1.0 + kappa);
  return std::sqrt(2.0 + y_coef * y_coef);
}

double lyapunov_phi(const DIProblem& prob, double s, const StateTriple& v) {
  if (s < 0.0) throw std::invalid_argument("lyapunov_phi: s must be >= 0");
  return std::max(0.0, perturbed_value(prob.pm, v.y, prob.beta_at(s), prob.rho) - v.pi);
}

double lyapunov_phi(const DIProblem& prob, double s, std::span<const double> w) {
  return lyapunov_phi(prob, s, StateTriple::unflatten(w, prob.pm.rows()));
}

// --- Euler integration ----------------------------------------------------

SelectionPolicy SelectionPolicy::constant(SimplexPoint tau) {
  SelectionPolicy p;
  p.kind = Kind::constant;
  p.fixed = std::move(tau);
  return p;
}

SelectionPolicy SelectionPolicy::worst_case_vertex() {
  SelectionPolicy p;
  p.kind = Kind::worst_case_vertex;
  return p;
}

SelectionPolicy SelectionPolicy::sequence(
    std::function<SimplexPoint(double, std::span<const double>)> fn) {
  SelectionPolicy p;
  p.kind = Kind::sequence;
  p.supplier = std::move(fn);
  return p;
}

std::vector<double> SolutionCurve::value(double s) const {
  if (s <= times.front()) return states.front();
  if (s >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double w = (s - times[k]) / (times[k + 1] - times[k]);
  std::vector<double> out(states[k].size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = states[k][j] + w * (states[k + 1][j] - states[k][j]);
  }
  return out;
}

namespace {

constexpr double kRoundingTol = 1e-12;

std::vector<double> time_grid(double a, double b, double h, std::span<const double> breakpoints) {
  if (!(h > 0.0) || !(b > a)) throw std::invalid_argument("time grid: need h > 0 and b > a");
  if (h > 1.0) throw std::invalid_argument("time grid: Euler step must be <= 1 to stay in M");
  std::vector<double> grid;
  const auto steps = static_cast<std::int64_t>(std::ceil((b - a) / h - 1e-9));
  for (std::int64_t k = 0; k < steps; ++k) grid.push_back(a + static_cast<double>(k) * h);
  for (double c : breakpoints) {
    if (c > a && c < b) grid.push_back(c);
  }
  grid.push_back(b);
  std::sort(grid.begin(), grid.end());
  std::vector<double> out{grid.front()};
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] - out.back() > 1e-12 * std::max(1.0, std::abs(grid[k]))) out.push_back(grid[k]);
  }
  out.back() = b;
  return out;
}

void renormalize_block(std::vector<double>& w, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    if (w[k] < -kRoundingTol) throw StateEscape("Euler state left the simplex");
    w[k] = std::max(w[k], 0.0);
    sum += w[k];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw StateEscape("Euler state left the simplex");
  for (std::size_t k = begin; k < end; ++k) w[k] /= sum;
}

/// Absorbs rounding so the state stays in M; anything larger is a bug.
void project_to_state_space(const PayoffMatrix& pm, std::vector<double>& w) {
  const std::size_t I = pm.rows();
  const std::size_t L = pm.cols();
  renormalize_block(w, 0, I);
  renormalize_block(w, I, I + L);
  double& pi = w[I + L];
  if (std::abs(pi) > pm.sup_norm() + kRoundingTol) {
    throw StateEscape("Euler state payoff coordinate left [-|pi|, |pi|]");
  }
  pi = std::clamp(pi, -pm.sup_norm(), pm.sup_norm());
}

SimplexPoint y_block(const DIProblem& prob, std::span<const double> w) {
  const std::size_t I = prob.pm.rows();
  return SimplexPoint({w.begin() + static_cast<std::ptrdiff_t>(I),
                       w.begin() + static_cast<std::ptrdiff_t>(I + prob.pm.cols())});
}

void validate_start(const DIProblem& prob, const StateTriple& w0) {
  if (!in_state_space(prob.pm, w0)) throw std::invalid_argument("euler_solve: w0 outside M");
}

}  // namespace

SolutionCurve euler_solve(const DIProblem& prob, const StateTriple& w0, double a, double b,
                          double h, const SelectionPolicy& policy,
                          std::span<const double> breakpoints) {
  validate_start(prob, w0);
  const std::size_t L = prob.pm.cols();
  SolutionCurve curve;
  curve.n_rows = prob.pm.rows();
  curve.times = time_grid(a, b, h, breakpoints);
  curve.states.reserve(curve.times.size());
  curve.states.push_back(w0.flatten());
  for (std::size_t k = 0; k + 1 < curve.times.size(); ++k) {
    const double s = curve.times[k];
    const double dt = curve.times[k + 1] - s;
    const auto& w = curve.states.back();
    const SimplexPoint br = prob.response(s, y_block(prob, w));

    auto advance = [&](const SimplexPoint& tau) {
      const auto f = prob.velocity_with(br, w, tau);
      std::vector<double> next(w.size());
      for (std::size_t j = 0; j < w.size(); ++j) next[j] = w[j] + dt * f[j];
      project_to_state_space(prob.pm, next);
      return next;
    };

    SimplexPoint tau;
    std::vector<double> next;
    switch (policy.kind) {
      case SelectionPolicy::Kind::constant:
        tau = policy.fixed;
        next = advance(tau);
        break;
      case SelectionPolicy::Kind::sequence:
        tau = policy.supplier(s, w);
        next = advance(tau);
        break;
      case SelectionPolicy::Kind::worst_case_vertex: {
        double worst = -1.0;
        for (std::size_t l = 0; l < L; ++l) {
          auto candidate_tau = SimplexPoint::vertex(L, l);
          auto candidate = advance(candidate_tau);
          const double phi = lyapunov_phi(prob, curve.times[k + 1], candidate);
          if (phi > worst) {
            worst = phi;
            tau = std::move(candidate_tau);
            next = std::move(candidate);
          }
        }
        break;
      }
    }
    curve.selections.push_back(std::move(tau));
    curve.states.push_back(std::move(next));
  }
  return curve;
}

// --- Tracking -------------------------------------------------------------

TrackingTarget TrackingTarget::from_path(const InterpolatedPath& path) {
  auto shared = std::make_shared<const InterpolatedPath>(path);
  TrackingTarget t;
  t.position = [shared](double s) { return shared->value(s); };
  t.velocity = [shared](double s) { return shared->slope(s); };
  t.breakpoints = path.knot_times(path.start(), path.end());
  return t;
}

TrackingTarget TrackingTarget::denoised(const InterpolatedPath& path, const NoiseRecord& noise,
                                        double a) {
  struct State {
    InterpolatedPath path;
    std::int64_t m0;
    std::vector<std::vector<double>> prefix;  // int_{tau_m0}^{tau_{m0+j}} U_bar
    std::vector<std::vector<double>> noise;   // U_{m0+j+1}
    std::vector<double> offset;               // int_{tau_m0}^{a} U_bar
  };
  const std::int64_t m0 = path.m(a);
  const std::int64_t last = path.last_stage();
  if (noise.first_stage > m0 + 1 || noise.last_stage() < last) {
    throw NoiseUnavailable("TrackingTarget::denoised: noise does not cover the path");
  }
  auto st = std::make_shared<State>(State{path, m0, {}, {}, {}});
  const auto& clock = path.clock();
  const std::size_t d = path.knot(last).size();
  st->prefix.push_back(std::vector<double>(d, 0.0));
  for (std::int64_t n = m0; n < last; ++n) {
    const auto& u = noise.at(n + 1);
    st->noise.push_back(u);
    auto next = st->prefix.back();
    const double len = clock.tau(n + 1) - clock.tau(n);
    for (std::size_t k = 0; k < d; ++k) next[k] += len * u[k];
    st->prefix.push_back(std::move(next));
  }
  auto integral_from_knot = [st](double s) {
    const auto& clk = st->path.clock();
    const std::int64_t m = std::min(st->path.m(s), st->path.last_stage());
    const std::size_t j = static_cast<std::size_t>(m - st->m0);
    std::vector<double> out = st->prefix[j];
    if (j < st->noise.size()) {
      const double len = s - clk.tau(m);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += len * st->noise[j][k];
    }
    return out;
  };
  st->offset = integral_from_knot(a);

  TrackingTarget t;
  t.position = [st, integral_from_knot](double s) {
    auto v = st->path.value(s);
    const auto acc = integral_from_knot(s);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= acc[k] - st->offset[k];
    return v;
  };
  t.velocity = [st](double s) {
    auto v = st->path.slope(s);
    const std::int64_t m = std::min(st->path.m(s), st->path.last_stage() - 1);
    const auto& u = st->noise.at(static_cast<std::size_t>(m - st->m0));
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= u[k];
    return v;
  };
  t.breakpoints = path.knot_times(a, path.end());
  return t;
}

TrackingTarget TrackingTarget::from_curve(const SolutionCurve& curve) {
  auto shared = std::make_shared<const SolutionCurve>(curve);
  TrackingTarget t;
  t.position = [shared](double s) { return shared->value(s); };
  t.velocity = [shared](double s) {
    const auto& times = shared->times;
    auto it = std::upper_bound(times.begin(), times.end(), s);
    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    k = std::min(k, times.size() - 2);
    const double dt = times[k + 1] - times[k];
    std::vector<double> v(shared->states[k].size());
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = (shared->states[k + 1][j] - shared->states[k][j]) / dt;
    }
    return v;
  };
  t.breakpoints = curve.times;
  return t;
}

SimplexPoint closest_selection(const DIProblem& prob, const SimplexPoint& br,
                               std::span<const double> w, std::span<const double> target_velocity) {
  const std::size_t I = prob.pm.rows();
  const std::size_t L = prob.pm.cols();
  // Only the y and pi blocks depend on tau:
  //   |tau - p|^2 + (q.tau - c)^2, p = y + d_y, q = P^T br, c = pi + d_pi.
  const auto q = prob.pm.column_payoffs(br.weights());
  std::vector<double> p(L);
  for (std::size_t l = 0; l < L; ++l) p[l] = w[I + l] + target_velocity[I + l];
  const double c = w[I + L] + target_velocity[I + L];
  const double qq = std::inner_product(q.begin(), q.end(), q.begin(), 0.0);
  const double step = 1.0 / (1.0 + qq);

  std::vector<double> tau = project_to_simplex(p);
  std::vector<double> trial(L);
  constexpr int kMaxIterations = 100000;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double resid = std::inner_product(q.begin(), q.end(), tau.begin(), 0.0) - c;
    for (std::size_t l = 0; l < L; ++l) trial[l] = tau[l] - step * ((tau[l] - p[l]) + q[l] * resid);
    auto next = project_to_simplex(trial);
    double change = 0.0;
    for (std::size_t l = 0; l < L; ++l) change = std::max(change, std::abs(next[l] - tau[l]));
    tau = std::move(next);
    if (change <= 1e-13) return SimplexPoint(std::move(tau));
  }
  throw std::runtime_error("closest_selection: projected gradient did not converge");
}

SolutionCurve tracking_solve(const DIProblem& prob, const TrackingTarget& target, double a,
                             double b, double h) {
  const auto start = target.position(a);
  SolutionCurve curve;
  curve.n_rows = prob.pm.rows();
  curve.times = time_grid(a, b, h, target.breakpoints);
  curve.states.push_back(start);
  project_to_state_space(prob.pm, curve.states.back());
  for (std::size_t k = 0; k + 1 < curve.times.size(); ++k) {
    const double s = curve.times[k];
    const double dt = curve.times[k + 1] - s;
    const auto& w = curve.states.back();
    const SimplexPoint br = prob.response(s, y_block(prob, w));
    const auto d = target.velocity(s);
    SimplexPoint tau = closest_selection(prob, br, w, d);
    const auto f = prob.velocity_with(br, w, tau);
    std::vector<double> next(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) next[j] = w[j] + dt * f[j];
    project_to_state_space(prob.pm, next);
    curve.selections.push_back(std::move(tau));
    curve.states.push_back(std::move(next));
  }
  return curve;
}

double sup_deviation(const SolutionCurve& curve,
                     const std::function<std::vector<double>(double)>& path) {
  double best = 0.0;
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    const auto p = path(curve.times[k]);
    double sq = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double d = curve.states[k][j] - p[j];
      sq += d * d;
    }
    best = std::max(best, std::sqrt(sq));
  }
  return best;
}

double deviation_bound(const ScalarFn& L_fn, double delta_sup, double Delta_ab, double a,
                       double b, std::span<const double> breakpoints) {
  const double growth = std::exp(integrate(L_fn, a, b, 1e-8, breakpoints));
  return Delta_ab * growth + delta_sup * (growth - 1.0);
}

ScalarFn schedule_lipschitz(const DIProblem& prob) {
  return [prob](double s) { return prob.lipschitz(s); };
}

ScalarFn exponential_lipschitz(double nu) {
  return [nu](double s) { return std::exp(nu * s); };
}

double exponential_lipschitz_integral(double nu, double a, double b) {
  return (std::exp(nu * b) - std::exp(nu * a)) / nu;
}

MembershipCheck check_membership(const DIProblem& prob, const InterpolatedPath& path,
                                 const NoiseRecord& noise, double s) {
  const std::size_t I = prob.pm.rows();
  const std::size_t L = prob.pm.cols();
  const std::int64_t n = path.m(s);
  auto vel = path.slope(s);
  const auto& u = noise.at(n + 1);
  for (std::size_t k = 0; k < vel.size(); ++k) vel[k] -= u[k];
  const auto& held = path.held(s);
  const SimplexPoint br = prob.response(s, y_block(prob, held));

  MembershipCheck out;
  out.tau.resize(L);
  double tau_sum = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    out.tau[l] = vel[I + l] + held[I + l];
    tau_sum += out.tau[l];
    out.simplex_gap = std::max(out.simplex_gap, -out.tau[l]);
  }
  out.simplex_gap = std::max(out.simplex_gap, std::abs(tau_sum - 1.0));
  for (std::size_t i = 0; i < I; ++i) {
    out.residual = std::max(out.residual, std::abs(vel[i] - (br[i] - held[i])));
  }
  double payoff = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t l = 0; l < L; ++l) payoff += br[i] * prob.pm(i, l) * out.tau[l];
  }
  out.residual = std::max(out.residual, std::abs(vel[I + L] - (payoff - held[I + L])));
  return out;
}

// --- Consistency monitor --------------------------------------------------

double window_start(double nu, int k) {
  double s = 0.0;
  for (int i = 1; i <= k; ++i) s += 1.0 / (nu * i);
  return s;
}

MonitorReport consistency_monitor(const Trajectory& traj, const DIProblem& prob, double nu,
                                  double tolerance, int k_max) {
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("consistency_monitor: nu must be in (0, 1)");
  const InterpolatedPath path = interpolate(traj, 1, 0, prob.clock);

  MonitorReport report;
  report.nu = nu;
  report.tolerance = tolerance;
  report.r = std::min(1.1, 0.5 * (1.0 + (nu + 1.0) / (2.0 * nu)));
  // Euclidean constant: |dPhi| <= |pi| |dy|_1 + |dpi| <= (|pi| + 1) sqrt(|L| + 1) |dw|_2.
  report.L_phi = (prob.pm.sup_norm() + 1.0) * std::sqrt(static_cast<double>(prob.pm.cols() + 1));

  std::vector<double> S{0.0};
  for (int k = 1;; ++k) {
    const double s = S.back() + 1.0 / (nu * k);
    if (s > path.end()) break;
    S.push_back(s);
    if (k_max > 0 && k == k_max) break;
  }
  const int k_last = static_cast<int>(S.size()) - 1;
  if (k_max > 0 && k_last < k_max) {
    throw std::invalid_argument("consistency_monitor: trajectory too short for k = " +
                                std::to_string(k_max));
  }
  if (k_last < 2) throw std::invalid_argument("consistency_monitor: trajectory too short");

  std::vector<double> lambda;
  std::vector<double> eta;
  for (int k = 1; k <= k_last; ++k) {
    MonitorRow row;
    row.k = k;
    row.S_k = S[static_cast<std::size_t>(k)];
    row.phi = lyapunov_phi(prob, row.S_k, path.value(row.S_k));
    if (k > 1) {
      const double T_k = 1.0 / (nu * k);
      const double S_prev = S[static_cast<std::size_t>(k - 1)];
      row.eta_k = T_k / prob.beta_at(S_prev) +
                  report.L_phi * std::pow(static_cast<double>(k - 1), -report.r);
      eta.push_back(row.eta_k);
      lambda.push_back(std::exp(-T_k));
    }
    report.rows.push_back(row);
  }
  const auto cert = sequence_certificate(lambda, eta, report.rows.front().phi,
                                         static_cast<int>(lambda.size()));
  for (std::size_t j = 0; j < report.rows.size(); ++j) {
    report.rows[j].H_k = cert.H[j];
    report.rows[j].bound = cert.bound[j];
  }
  report.case_a = cert.case_a;
  report.case_b = cert.case_b;
  const std::size_t tail_begin = report.rows.size() - std::max<std::size_t>(1, report.rows.size() / 4);
  for (std::size_t j = tail_begin; j < report.rows.size(); ++j) {
    report.tail_phi = std::max(report.tail_phi, report.rows[j].phi);
  }
  report.decays = report.tail_phi <= tolerance;
  return report;
}

void write_monitor_csv(const MonitorReport& report, std::ostream& out) {
  out << "k,S_k,phi,H_k,eta_k,bound\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : report.rows) {
    out << r.k << ',' << r.S_k << ',' << r.phi << ',' << r.H_k << ',' << r.eta_k << ','
        << r.bound << '\n';
  }
  out.precision(old_precision);
}

}  // namespace vsfp
