#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vsfp {

/// Absolute tolerance on the coordinate sum of a mixed strategy.
inline constexpr double kSimplexTolerance = 1e-12;

/// A mixed strategy: a probability vector over a finite action set.
///
/// Construction renormalizes inputs whose coordinate sum is within
/// kSimplexTolerance of one and rejects anything further off, or any
/// negative coordinate.
class SimplexPoint {
 public:
  SimplexPoint() = default;
  explicit SimplexPoint(std::vector<double> weights);

  static SimplexPoint vertex(std::size_t dim, std::size_t index);
  static SimplexPoint uniform(std::size_t dim);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  /// Index of the coordinate equal to one, or size() when not a vertex.
  std::size_t vertex_index() const;
  bool is_interior() const;

 private:
  std::vector<double> weights_;
};

/// Payoff of player 1 over I x L, stored row-major.
class PayoffMatrix {
 public:
  PayoffMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  explicit PayoffMatrix(const std::vector<std::vector<double>>& rows);

  static PayoffMatrix matching_pennies();

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t l) const { return entries_[i * cols_ + l]; }
  std::span<const double> entries() const { return entries_; }

  /// max_{i,l} |pi(i,l)|
  double sup_norm() const { return sup_norm_; }
  /// Frobenius norm, an upper bound on the spectral norm.
  double frobenius_norm() const;

  /// Row payoffs pi(i, y) for every pure action i.
  std::vector<double> row_payoffs(std::span<const double> y) const;
  /// Column payoffs pi(x, l) for every pure action l of the opponent.
  std::vector<double> column_payoffs(std::span<const double> x) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
  double sup_norm_ = 0.0;
};

/// v_n = (x_bar, y_bar, pi_bar), a point of M = X x Y x [-|pi|, |pi|].
struct StateTriple {
  SimplexPoint x;
  SimplexPoint y;
  double pi = 0.0;

  /// Flattened coordinates (x..., y..., pi).
  std::vector<double> flatten() const;
  static StateTriple unflatten(std::span<const double> w, std::size_t n_rows);
};

/// Checks pi in [-sup_norm, sup_norm] and matching dimensions.
bool in_state_space(const PayoffMatrix& pm, const StateTriple& v, double tol = kSimplexTolerance);

double bilinear_payoff(const PayoffMatrix& pm, const SimplexPoint& x, const SimplexPoint& y);
double best_response_value(const PayoffMatrix& pm, const SimplexPoint& y);
std::vector<std::size_t> best_response_set(const PayoffMatrix& pm, const SimplexPoint& y,
                                            double tol);
/// Average regret e_n = Pi(y_bar) - pi_bar.
double regret(const PayoffMatrix& pm, const SimplexPoint& y_bar, double pi_bar);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

}  // namespace vsfp
