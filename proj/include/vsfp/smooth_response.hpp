#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsfp/game.hpp"

namespace vsfp {

/// Raised when the smooth best response iteration fails to reach stationarity.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A good perturbation function rho on Int(X): strongly concave on the
/// tangent space with modulus `lambda`, gradient blowing up at the boundary.
struct PerturbationFunction {
  std::string name;
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  /// Dense row-major Hessian.
  std::function<std::vector<double>(std::span<const double>)> hessian;
  double lambda = 1.0;
  /// sup of rho over the simplex of dimension `dim`, when finite.
  std::function<double(std::size_t dim)> max_value;
  /// Smooth best response is the logit map.
  bool is_entropy = false;

  /// rho(x) = -sum x_i log x_i; lambda = 1.
  static PerturbationFunction entropy();
  /// rho(x) = sum log x_i + |I| log |I| (zero at the barycenter); lambda = 1.
  static PerturbationFunction log_barrier();
};

/// Smoothing-parameter sequence (beta_n)_{n >= 1}.
class BetaSchedule {
 public:
  enum class Kind { constant, power, linear, table };

  static BetaSchedule constant(double beta);
  /// beta_n = n^nu with 0 < nu < 1.
  static BetaSchedule power(double nu);
  /// beta_n = slope * n. Grows too fast for consistency; used for the
  /// counterexample runs.
  static BetaSchedule linear(double slope);
  /// beta_n = values[n-1]; the last value is held past the end.
  static BetaSchedule table(std::vector<double> values);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  const std::vector<double>& values() const { return table_; }

  /// beta_n; stages n < 1 use beta_1.
  double operator()(std::int64_t n) const;
  std::string describe() const;

 private:
  BetaSchedule(Kind kind, double param, std::vector<double> table)
      : kind_(kind), param_(param), table_(std::move(table)) {}

  Kind kind_;
  double param_;
  std::vector<double> table_;
};

/// Logit map L(beta, y)_i proportional to exp(beta * pi(i, y)).
SimplexPoint logit(const PayoffMatrix& pm, const SimplexPoint& y, double beta);
/// Softmax of beta * scores with the max shifted out; writes into `out`.
void logit_scores(std::span<const double> scores, double beta, std::span<double> out);

/// Unique maximizer of pi(x, y) + rho(x) / beta over Int(X).
SimplexPoint smooth_best_response(const PayoffMatrix& pm, const SimplexPoint& y, double beta,
                                  const PerturbationFunction& rho);

/// max_x pi(x, y) + rho(x) / beta.
double perturbed_value(const PayoffMatrix& pm, const SimplexPoint& y, double beta,
                       const PerturbationFunction& rho);

/// Empirical max of |br(y) - br(y')| / |y - y'| over `n_samples` random pairs.
double lipschitz_certificate(const PayoffMatrix& pm, double beta,
                             const PerturbationFunction& rho, int n_samples,
                             std::uint64_t rng_seed);

}  // namespace vsfp
