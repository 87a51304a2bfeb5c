#include "vsfp/seqcert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsfp {

namespace {

struct Simpson {
  const ScalarFn& f;
  double tol;
  int evaluations = 0;

  double eval(double x) {
    ++evaluations;
    return f(x);
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double eps,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
  }
};

double integrate_piece(const ScalarFn& f, double a, double b, double rel_tol) {
  if (b <= a) return 0.0;
  // Coarse composite estimate sets the absolute target.
  constexpr int kPanels = 16;
  const double h = (b - a) / kPanels;
  std::vector<double> fx(2 * kPanels + 1);
  for (int k = 0; k <= 2 * kPanels; ++k) fx[k] = f(a + 0.5 * h * k);
  double coarse = 0.0;
  double coarse_abs = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    coarse += h / 6.0 * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
    coarse_abs += h / 6.0 *
                  (std::abs(fx[2 * p]) + 4.0 * std::abs(fx[2 * p + 1]) + std::abs(fx[2 * p + 2]));
  }
  const double eps = std::max(rel_tol * std::abs(coarse), 1e-15 * coarse_abs);
  Simpson s{f, eps};
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double pa = a + h * p;
    const double pb = pa + h;
    const double whole = h / 6.0 * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
    total += s.recurse(pa, pb, fx[2 * p], fx[2 * p + 1], fx[2 * p + 2], whole, eps / kPanels, 40);
  }
  return total;
}

}  // namespace

double integrate(const ScalarFn& f, double a, double b, double rel_tol,
                 std::span<const double> breakpoints) {
  if (b < a) return -integrate(f, b, a, rel_tol, breakpoints);
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    if (hi <= lo) continue;
    if (breakpoints.empty()) {
      total += integrate_piece(f, lo, hi, rel_tol);
      continue;
    }
    // Sample just inside the piece so a jump at a cut belongs to one side only.
    const double inset = 1e-12 * (hi - lo);
    const ScalarFn inner = [&f, lo, hi, inset](double x) {
      return f(std::clamp(x, lo + inset, hi - inset));
    };
    total += integrate_piece(inner, lo, hi, rel_tol);
  }
  return total;
}

SequenceCertificate sequence_certificate(std::span<const double> lambda,
                                         std::span<const double> eta, double phi0, int K) {
  if (K < 1) throw std::invalid_argument("sequence_certificate: K must be >= 1");
  if (lambda.size() < static_cast<std::size_t>(K) || eta.size() < static_cast<std::size_t>(K)) {
    throw std::invalid_argument("sequence_certificate: sequences shorter than K");
  }
  for (int k = 0; k < K; ++k) {
    if (!(lambda[k] > 0.0 && lambda[k] < 1.0)) {
      throw std::invalid_argument("sequence_certificate: lambda_k must lie in (0, 1)");
    }
    if (!(eta[k] >= 0.0)) throw std::invalid_argument("sequence_certificate: eta_k must be >= 0");
  }
  SequenceCertificate cert;
  cert.log_H.assign(K + 1, 0.0);
  cert.H.assign(K + 1, 1.0);
  cert.H_tilde.assign(K + 1, 0.0);
  cert.bound.assign(K + 1, phi0);
  for (int k = 1; k <= K; ++k) {
    cert.log_H[k] = cert.log_H[k - 1] + std::log(lambda[k - 1]);
    cert.H[k] = std::exp(cert.log_H[k]);
    // H~_k = lambda_{k-1} H~_{k-1} + eta_k avoids forming 1 / H_i.
    cert.H_tilde[k] = lambda[k - 1] * cert.H_tilde[k - 1] + eta[k - 1];
    cert.bound[k] = cert.H[k] * phi0 + cert.H_tilde[k];
  }

  const bool constant_lambda = std::all_of(lambda.begin(), lambda.begin() + K, [&](double l) {
    return std::abs(l - lambda[0]) <= 1e-15 * lambda[0];
  });
  // Tail decay exponent of eta over the second half of the range.
  std::vector<double> ks;
  std::vector<double> tail;
  bool tail_zero = true;
  for (int k = std::max(1, K / 2); k <= K; ++k) {
    if (eta[k - 1] > 0.0) {
      ks.push_back(k);
      tail.push_back(eta[k - 1]);
      tail_zero = false;
    }
  }
  double decay = 0.0;
  if (!tail_zero && ks.size() >= 2) decay = -fit_power_law(ks, tail);
  const bool vanishing = tail_zero || decay > 0.05;
  const bool summable = tail_zero || decay > 1.05;
  cert.case_a = constant_lambda && vanishing;
  cert.case_b = cert.log_H[K] < std::log(1e-3) && summable;
  return cert;
}

double fit_power_law(std::span<const double> ks, std::span<const double> values) {
  if (ks.size() != values.size() || ks.size() < 2) {
    throw std::invalid_argument("fit_power_law: need two or more matched points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ks.size());
  for (std::size_t k = 0; k < ks.size(); ++k) {
    const double x = std::log(ks[k]);
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalarFn tabulated(std::vector<double> grid, std::vector<double> values) {
  if (grid.size() != values.size() || grid.size() < 2) {
    throw std::invalid_argument("tabulated: need two or more matched points");
  }
  return [grid = std::move(grid), values = std::move(values)](double s) {
    if (s <= grid.front()) return values.front();
    if (s >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - grid.begin());
    const double w = (s - grid[k - 1]) / (grid[k] - grid[k - 1]);
    return (1.0 - w) * values[k - 1] + w * values[k];
  };
}

double gronwall_bound(const GronwallInstance& inst, double s) {
  if (s < inst.a || s > inst.b) throw std::invalid_argument("gronwall_bound: s outside [a, b]");
  if (inst.y0 < 0.0) throw std::invalid_argument("gronwall_bound: y0 must be >= 0");
  const double F_s = integrate(inst.f, inst.a, s);
  auto integrand = [&](double u) {
    const double g = inst.g(u);
    if (g == 0.0) return 0.0;
    return g * std::exp(integrate(inst.f, u, s));
  };
  return inst.y0 * std::exp(F_s) + integrate(integrand, inst.a, s);
}

}  // namespace vsfp
