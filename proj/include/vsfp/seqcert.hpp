#pragma once

#include <functional>
#include <span>
#include <vector>

namespace vsfp {

using ScalarFn = std::function<double(double)>;

/// Adaptive Simpson quadrature of f over [a, b] to relative tolerance
/// `rel_tol`. Interior `breakpoints` (discontinuities of f) split the range.
double integrate(const ScalarFn& f, double a, double b, double rel_tol = 1e-8,
                 std::span<const double> breakpoints = {});

/// Output of the Phi-recursion certificate
///   Phi_{k+1} <= lambda_k Phi_k + eta_{k+1}.
/// Index k runs 0..K; entry 0 is the initial state.
struct SequenceCertificate {
  std::vector<double> log_H;    ///< log H_k, H_k = prod_{i<k} lambda_i
  std::vector<double> H;        ///< H_k (may underflow to 0)
  std::vector<double> H_tilde;  ///< H_k * sum_{1<=i<=k} eta_i / H_i
  std::vector<double> bound;    ///< H_k * Phi_0 + H_tilde_k
  bool case_a = false;          ///< constant lambda and eta -> 0
  bool case_b = false;          ///< H_k -> 0 and eta summable
};

/// `lambda` holds lambda_0..lambda_{K-1}; `eta` holds eta_1..eta_K.
SequenceCertificate sequence_certificate(std::span<const double> lambda,
                                         std::span<const double> eta, double phi0, int K);

/// Least-squares slope of log(values) against log(ks).
double fit_power_law(std::span<const double> ks, std::span<const double> values);

/// Data for the bound ||y(s)|| <= y0 exp(int_a^s f) + int_a^s g(u) exp(int_u^s f) du.
struct GronwallInstance {
  ScalarFn f;
  ScalarFn g;
  double a = 0.0;
  double b = 1.0;
  double y0 = 0.0;
};

/// Piecewise-linear interpolant through (grid, values); grid increasing.
ScalarFn tabulated(std::vector<double> grid, std::vector<double> values);

double gronwall_bound(const GronwallInstance& inst, double s);

}  // namespace vsfp
