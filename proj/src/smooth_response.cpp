#include "vsfp/smooth_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "linalg.hpp"
#include "vsfp/rng.hpp"

namespace vsfp {

PerturbationFunction PerturbationFunction::entropy() {
  PerturbationFunction rho;
  rho.name = "entropy";
  rho.value = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
      if (v > 0.0) s -= v * std::log(v);
    }
    return s;
  };
  rho.gradient = [](std::span<const double> x) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = -std::log(x[i]) - 1.0;
    return g;
  };
  rho.hessian = [](std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> h(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = -1.0 / x[i];
    return h;
  };
  rho.lambda = 1.0;
  rho.max_value = [](std::size_t dim) { return std::log(static_cast<double>(dim)); };
  rho.is_entropy = true;
  return rho;
}

PerturbationFunction PerturbationFunction::log_barrier() {
  PerturbationFunction rho;
  rho.name = "log_barrier";
  rho.value = [](std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    double s = n * std::log(n);
    for (double v : x) s += std::log(v);
    return s;
  };
  rho.gradient = [](std::span<const double> x) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 1.0 / x[i];
    return g;
  };
  rho.hessian = [](std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> h(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = -1.0 / (x[i] * x[i]);
    return h;
  };
  rho.lambda = 1.0;
  rho.max_value = [](std::size_t) { return 0.0; };
  return rho;
}

BetaSchedule BetaSchedule::constant(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("BetaSchedule: constant beta must be > 0");
  }
  return BetaSchedule(Kind::constant, beta, {});
}

BetaSchedule BetaSchedule::power(double nu) {
  if (!(nu > 0.0 && nu < 1.0)) {
    throw std::invalid_argument("BetaSchedule: power exponent nu must satisfy 0 < nu < 1");
  }
  return BetaSchedule(Kind::power, nu, {});
}

BetaSchedule BetaSchedule::linear(double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope)) {
    throw std::invalid_argument("BetaSchedule: linear slope must be > 0");
  }
  return BetaSchedule(Kind::linear, slope, {});
}

BetaSchedule BetaSchedule::table(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("BetaSchedule: empty table");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0) || !std::isfinite(values[k])) {
      throw std::invalid_argument("BetaSchedule: table values must be > 0");
    }
    if (k > 0 && values[k] < values[k - 1]) {
      throw std::invalid_argument("BetaSchedule: table must be nondecreasing");
    }
  }
  return BetaSchedule(Kind::table, 0.0, std::move(values));
}

double BetaSchedule::operator()(std::int64_t n) const {
  const double m = static_cast<double>(std::max<std::int64_t>(n, 1));
  switch (kind_) {
    case Kind::constant:
      return param_;
    case Kind::power:
      return std::pow(m, param_);
    case Kind::linear:
      return param_ * m;
    case Kind::table: {
      const auto idx = static_cast<std::size_t>(std::max<std::int64_t>(n, 1) - 1);
      return table_[std::min(idx, table_.size() - 1)];
    }
  }
  return param_;
}

std::string BetaSchedule::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::constant: os << "constant(" << param_ << ")"; break;
    case Kind::power: os << "power(nu=" << param_ << ")"; break;
    case Kind::linear: os << "linear(" << param_ << ")"; break;
    case Kind::table: os << "table(" << table_.size() << " values)"; break;
  }
  return os.str();
}

void logit_scores(std::span<const double> scores, double beta, std::span<double> out) {
  if (!(beta > 0.0)) throw std::invalid_argument("logit: beta must be > 0");
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(beta * (scores[i] - top));
    sum += out[i];
  }
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] /= sum;
}

SimplexPoint logit(const PayoffMatrix& pm, const SimplexPoint& y, double beta) {
  const auto scores = pm.row_payoffs(y.weights());
  std::vector<double> out(scores.size());
  logit_scores(scores, beta, out);
  return SimplexPoint(std::move(out));
}

namespace {

constexpr int kNewtonIterations = 200;
constexpr double kStationarityTol = 1e-10;

std::vector<double> softmax(const std::vector<double>& z) {
  std::vector<double> x(z.size());
  logit_scores(z, 1.0, x);
  return x;
}

}  // namespace

SimplexPoint smooth_best_response(const PayoffMatrix& pm, const SimplexPoint& y, double beta,
                                  const PerturbationFunction& rho) {
  if (!(beta > 0.0)) throw std::invalid_argument("smooth_best_response: beta must be > 0");
  const auto u = pm.row_payoffs(y.weights());
  const std::size_t n = u.size();

  // Newton on the tangent space, expressed in logit coordinates z so the
  // iterate x = softmax(z) stays interior without a barrier.
  auto objective = [&](const std::vector<double>& x) {
    return std::inner_product(u.begin(), u.end(), x.begin(), 0.0) + rho.value(x) / beta;
  };

  std::vector<double> z(n, 0.0);
  std::vector<double> x = softmax(z);
  double f = objective(x);
  for (int iter = 0; iter < kNewtonIterations; ++iter) {
    const auto grad = rho.gradient(x);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = u[i] + grad[i] / beta;
    const double c_mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(n);
    double stationarity = 0.0;
    for (double ci : c) stationarity = std::max(stationarity, std::abs(ci - c_mean));
    // For beta < 1 the residual is on the scale of grad(rho) / beta; measure it there.
    stationarity *= std::min(1.0, beta);
    if (stationarity <= kStationarityTol) return SimplexPoint(x);

    // KKT system [H -1; 1^T 0][dx; mu] = [-c; 0].
    const auto hess = rho.hessian(x);
    std::vector<double> kkt((n + 1) * (n + 1), 0.0);
    std::vector<double> rhs(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) kkt[i * (n + 1) + j] = hess[i * n + j] / beta;
      kkt[i * (n + 1) + n] = -1.0;
      kkt[n * (n + 1) + i] = 1.0;
      rhs[i] = -c[i];
    }
    std::vector<double> dz(n);
    std::vector<double> dx(n);
    bool newton_ok = true;
    try {
      const auto sol = detail::solve_dense(kkt, rhs);
      for (std::size_t i = 0; i < n; ++i) {
        dx[i] = sol[i];
        dz[i] = sol[i] / x[i];
        if (!std::isfinite(dz[i])) newton_ok = false;
      }
    } catch (const std::runtime_error&) {
      newton_ok = false;
    }
    double slope = newton_ok ? std::inner_product(c.begin(), c.end(), dx.begin(), 0.0) : -1.0;
    if (!(slope > 0.0)) {
      // Gradient ascent in z: dz = c - c_mean, and J dz = x o (dz - <x, dz>).
      for (std::size_t i = 0; i < n; ++i) dz[i] = c[i] - c_mean;
      const double xdz = std::inner_product(x.begin(), x.end(), dz.begin(), 0.0);
      for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] * (dz[i] - xdz);
      slope = std::inner_product(c.begin(), c.end(), dx.begin(), 0.0);
    }

    double step = 1.0;
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(f) + 1.0);
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      std::vector<double> z_try(n);
      for (std::size_t i = 0; i < n; ++i) z_try[i] = z[i] + step * dz[i];
      auto x_try = softmax(z_try);
      const double f_try = objective(x_try);
      if (std::isfinite(f_try) && f_try >= f + 1e-4 * step * slope - slack) {
        const double z_mean =
            std::accumulate(z_try.begin(), z_try.end(), 0.0) / static_cast<double>(n);
        for (auto& v : z_try) v -= z_mean;
        z = std::move(z_try);
        x = std::move(x_try);
        f = f_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  throw NonConvergence("smooth_best_response: no stationary point within iteration cap (beta=" +
                       std::to_string(beta) + ", rho=" + rho.name + ")");
}

double perturbed_value(const PayoffMatrix& pm, const SimplexPoint& y, double beta,
                       const PerturbationFunction& rho) {
  if (!(beta > 0.0)) throw std::invalid_argument("perturbed_value: beta must be > 0");
  if (rho.is_entropy) {
    const auto s = pm.row_payoffs(y.weights());
    const double top = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double v : s) sum += std::exp(beta * (v - top));
    return top + std::log(sum) / beta;
  }
  const auto br = smooth_best_response(pm, y, beta, rho);
  return bilinear_payoff(pm, br, y) + rho.value(br.weights()) / beta;
}

double lipschitz_certificate(const PayoffMatrix& pm, double beta,
                             const PerturbationFunction& rho, int n_samples,
                             std::uint64_t rng_seed) {
  if (!(beta > 0.0)) throw std::invalid_argument("lipschitz_certificate: beta must be > 0");
  if (n_samples < 2) throw std::invalid_argument("lipschitz_certificate: n_samples must be >= 2");
  Rng rng(rng_seed);
  double best = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    SimplexPoint y(sample_simplex(pm.cols(), rng));
    auto other = sample_simplex(pm.cols(), rng);
    if (k % 2 == 1) {
      // Nearby pair: probes the local slope rather than a chord.
      for (std::size_t l = 0; l < other.size(); ++l) other[l] = 0.999 * y[l] + 0.001 * other[l];
    }
    SimplexPoint y2(std::move(other));
    double dy = 0.0;
    for (std::size_t l = 0; l < y.size(); ++l) dy += (y[l] - y2[l]) * (y[l] - y2[l]);
    dy = std::sqrt(dy);
    if (dy < 1e-12) continue;
    const auto b1 = smooth_best_response(pm, y, beta, rho);
    const auto b2 = smooth_best_response(pm, y2, beta, rho);
    double dx = 0.0;
    for (std::size_t i = 0; i < b1.size(); ++i) dx += (b1[i] - b2[i]) * (b1[i] - b2[i]);
    best = std::max(best, std::sqrt(dx) / dy);
  }
  return best;
}

}  // namespace vsfp
