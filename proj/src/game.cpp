#include "vsfp/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vsfp {

SimplexPoint::SimplexPoint(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw std::invalid_argument("SimplexPoint: empty weight vector");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("SimplexPoint: coordinates must be finite and nonnegative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("SimplexPoint: coordinates sum to " + std::to_string(sum));
  }
  if (sum != 1.0) {
    for (double& w : weights_) w /= sum;
  }
}

SimplexPoint SimplexPoint::vertex(std::size_t dim, std::size_t index) {
  if (index >= dim) throw std::out_of_range("SimplexPoint::vertex: index out of range");
  std::vector<double> w(dim, 0.0);
  w[index] = 1.0;
  return SimplexPoint(std::move(w));
}

SimplexPoint SimplexPoint::uniform(std::size_t dim) {
  return SimplexPoint(std::vector<double>(dim, 1.0 / static_cast<double>(dim)));
}

std::size_t SimplexPoint::vertex_index() const {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == 1.0) return i;
  }
  return weights_.size();
}

bool SimplexPoint::is_interior() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w > 0.0; });
}

PayoffMatrix::PayoffMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ < 2 || cols_ < 2) {
    throw std::invalid_argument("PayoffMatrix: need at least 2 rows and 2 columns");
  }
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("PayoffMatrix: entry count does not match dimensions");
  }
  for (double e : entries_) {
    if (!std::isfinite(e)) throw std::invalid_argument("PayoffMatrix: non-finite entry");
    sup_norm_ = std::max(sup_norm_, std::abs(e));
  }
}

namespace {
std::vector<double> flatten_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) {
      throw std::invalid_argument("PayoffMatrix: ragged rows");
    }
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}
}  // namespace

PayoffMatrix::PayoffMatrix(const std::vector<std::vector<double>>& rows)
    : PayoffMatrix(rows.size(), rows.empty() ? 0 : rows.front().size(), flatten_rows(rows)) {}

PayoffMatrix PayoffMatrix::matching_pennies() { return PayoffMatrix(2, 2, {1.0, 0.0, 0.0, 1.0}); }

double PayoffMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double e : entries_) s += e * e;
  return std::sqrt(s);
}

std::vector<double> PayoffMatrix::row_payoffs(std::span<const double> y) const {
  if (y.size() != cols_) throw std::invalid_argument("row_payoffs: dimension mismatch");
  std::vector<double> out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = &entries_[i * cols_];
    double s = 0.0;
    for (std::size_t l = 0; l < cols_; ++l) s += row[l] * y[l];
    out[i] = s;
  }
  return out;
}

std::vector<double> PayoffMatrix::column_payoffs(std::span<const double> x) const {
  if (x.size() != rows_) throw std::invalid_argument("column_payoffs: dimension mismatch");
  std::vector<double> out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = &entries_[i * cols_];
    for (std::size_t l = 0; l < cols_; ++l) out[l] += x[i] * row[l];
  }
  return out;
}

std::vector<double> StateTriple::flatten() const {
  std::vector<double> w;
  w.reserve(x.size() + y.size() + 1);
  w.insert(w.end(), x.weights().begin(), x.weights().end());
  w.insert(w.end(), y.weights().begin(), y.weights().end());
  w.push_back(pi);
  return w;
}

StateTriple StateTriple::unflatten(std::span<const double> w, std::size_t n_rows) {
  if (w.size() < n_rows + 3) throw std::invalid_argument("StateTriple::unflatten: too short");
  const std::size_t n_cols = w.size() - n_rows - 1;
  return StateTriple{SimplexPoint({w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n_rows)}),
                     SimplexPoint({w.begin() + static_cast<std::ptrdiff_t>(n_rows),
                                   w.begin() + static_cast<std::ptrdiff_t>(n_rows + n_cols)}),
                     w.back()};
}

bool in_state_space(const PayoffMatrix& pm, const StateTriple& v, double tol) {
  return v.x.size() == pm.rows() && v.y.size() == pm.cols() &&
         std::abs(v.pi) <= pm.sup_norm() + tol;
}

double bilinear_payoff(const PayoffMatrix& pm, const SimplexPoint& x, const SimplexPoint& y) {
  if (x.size() != pm.rows() || y.size() != pm.cols()) {
    throw std::invalid_argument("bilinear_payoff: dimension mismatch");
  }
  const auto rows = pm.row_payoffs(y.weights());
  return std::inner_product(rows.begin(), rows.end(), x.weights().begin(), 0.0);
}

double best_response_value(const PayoffMatrix& pm, const SimplexPoint& y) {
  const auto rows = pm.row_payoffs(y.weights());
  return *std::max_element(rows.begin(), rows.end());
}

std::vector<std::size_t> best_response_set(const PayoffMatrix& pm, const SimplexPoint& y,
                                            double tol) {
  if (tol < 0.0) throw std::invalid_argument("best_response_set: tol must be >= 0");
  const auto rows = pm.row_payoffs(y.weights());
  const double best = *std::max_element(rows.begin(), rows.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= best - tol) out.push_back(i);
  }
  return out;
}

double regret(const PayoffMatrix& pm, const SimplexPoint& y_bar, double pi_bar) {
  return best_response_value(pm, y_bar) - pi_bar;
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - theta, 0.0);
  return out;
}

}  // namespace vsfp
