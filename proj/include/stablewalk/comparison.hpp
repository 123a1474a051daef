#pragma once

// Multiscale comparison machinery: for a symmetric rate p in DAN(alpha) and
// the canonical rate q(z) = |z|^{-(1+alpha)}, a certified constant kappa with
//
//   sum_{z<=n} q(z) phi(z)  <=  kappa  sum_{z<=n} p(z) phi(z)
//
// for all K-subpolynomial phi, verified up to a finite scale horizon. The
// certificate is built from a geometric scale sequence b_n ~ b^n, interval
// families A_n, B_n, D_n and the constants Gamma_1, Gamma_2, ell_1, ell_2,
// theta; feasibility needs theta = 2 K ell_2 Gamma_2 < 1, which always holds
// for b close enough to 1.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stablewalk/errors.hpp"
#include "stablewalk/rates.hpp"

namespace stablewalk {

struct MultiscaleParameters {
  double b = 0.0;
  double delta = 0.0;  // b - 1
  double alpha = 0.0;
  double K = 0.0;
  double a = 0.0;  // 1 + b - b^2, in (0,1)
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  int l1 = 0;
  int l2 = 0;
  int k0 = 0;
  double theta = 0.0;  // 2 K l2 Gamma2
  int m = -1;          // burn-in index, -1 until computed
  std::vector<std::int64_t> scale;  // scale[i] = b_{i+1} = floor(b^{i+1+k0})

  int horizon() const { return int(scale.size()) - 2; }

  std::int64_t b_n(int n) const {
    if (n < 1 || std::size_t(n) > scale.size())
      throw parameter_error("scale index out of stored horizon");
    return scale[std::size_t(n) - 1];
  }

  std::int64_t a_n(int n) const { return b_n(n) + b_n(n + 1) - b_n(n + 2); }

  // A_n = {a_n+1..b_n}, B_n = {b_{n+1}+1..b_{n+2}}, D_n = {b_{n+1}-b_n+1..b_{n+2}-a_n-1}
  std::pair<std::int64_t, std::int64_t> interval_a(int n) const { return {a_n(n) + 1, b_n(n)}; }
  std::pair<std::int64_t, std::int64_t> interval_b(int n) const {
    return {b_n(n + 1) + 1, b_n(n + 2)};
  }
  std::pair<std::int64_t, std::int64_t> interval_d(int n) const {
    return {b_n(n + 1) - b_n(n) + 1, b_n(n + 2) - a_n(n) - 1};
  }
};

struct ComparisonCertificate {
  MultiscaleParameters params;
  double kappa = 0.0;        // for the original (unrescaled) rate p
  double c1 = 0.0;           // finite-window constant from the envelope bound
  double rescale = 0.0;      // tail constant used to normalize p to c = 1
  std::int64_t verified_up_to = 0;  // comparison certified for n <= this value
};

struct ComparisonOptions {
  std::int64_t rescale_reference_x = 10000;  // where the tail constant is read off
};

/// Closed-form constants of the multiscale argument at ratio b (without the
/// burn-in index m, which depends on the rate).
inline MultiscaleParameters compute_constants(double b, double alpha, double K,
                                              int horizon = 900) {
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  if (!(b > 1.0) || !(b < golden))
    throw parameter_error("compute_constants: b must lie in (1, (1+sqrt 5)/2) so that a > 0");
  if (!(alpha > 0.0) || !(alpha < 2.0))
    throw parameter_error("compute_constants: alpha must lie in (0, 2)");
  if (!(K >= 0.5)) throw parameter_error("compute_constants: K must be >= 1/2");
  if (horizon < 8) throw parameter_error("compute_constants: horizon too small");
  MultiscaleParameters p;
  p.b = b;
  p.delta = b - 1.0;
  p.alpha = alpha;
  p.K = K;
  p.a = 1.0 + b - b * b;
  const double logb = std::log1p(p.delta);
  p.gamma1 = (std::pow(b, -alpha) - std::pow(b, -2.0 * alpha)) /
             (alpha * (std::pow(p.a, -alpha) - 1.0));
  p.gamma2 = std::pow((b - 1.0) * (2.0 * b + 1.0) / b, 1.0 + alpha);
  p.l1 = int(std::ceil(-std::log(p.a) / logb)) + 1;
  p.l2 = int(std::ceil(std::log(2.0 * b + 1.0) / logb));
  p.theta = 2.0 * K * double(p.l2) * p.gamma2;
  p.k0 = int(std::ceil(std::log(2.0 / p.delta) / logb));
  while (std::pow(b, double(p.k0)) <= 2.0 / p.delta) ++p.k0;
  // store b_n = floor(b^{n+k0}) while it stays exactly representable; for
  // large b this caps the usable horizon well below the request
  p.scale.reserve(std::size_t(horizon) + 2);
  for (int n = 1; n <= horizon + 2; ++n) {
    const double v = std::exp(double(n + p.k0) * logb);
    if (v > 9.0e15) break;
    p.scale.push_back(std::int64_t(std::floor(v)));
  }
  if (p.scale.size() < 10)
    throw accuracy_error("compute_constants: fewer than 10 scales fit the exact integer range");
  for (std::size_t i = 1; i < p.scale.size(); ++i)
    if (p.scale[i] <= p.scale[i - 1])
      throw accuracy_error("compute_constants: scale sequence not strictly increasing");
  return p;
}

/// First b on the dyadic grid 1 + 2^-j with theta < 1. Terminates because
/// ell_2 Gamma_2 -> 0 as b -> 1; the budget guard only trips on
/// misconfiguration.
inline MultiscaleParameters select_b(double K, double alpha, int horizon = 900,
                                     int max_grid = 48) {
  for (int j = 1; j <= max_grid; ++j) {
    const double b = 1.0 + std::ldexp(1.0, -j);
    MultiscaleParameters p = compute_constants(b, alpha, K, horizon);
    if (p.theta < 1.0) return p;
  }
  throw infeasible_error("select_b: no grid point with theta < 1 within the search budget");
}

namespace detail {

// interval sum of the canonical rate q(z) = z^{-(1+alpha)}
inline double q_interval(std::int64_t lo, std::int64_t hi, double alpha) {
  if (hi < lo) return 0.0;
  return power_tail_sum(lo, alpha) - power_tail_sum(hi + 1, alpha);
}

inline double rescale_factor(const TransitionRate& p, const ComparisonOptions& opt) {
  const double c = p.tail_constant(opt.rescale_reference_x);
  if (!(c > 0.0) || !std::isfinite(c))
    throw infeasible_error("comparison: tail constant at the reference point is not positive; "
                           "rate is not usable as a DAN(alpha) input");
  return c;
}

}  // namespace detail

/// Burn-in index: the smallest m such that every scale n in [m, usable
/// horizon] satisfies the finite-n counterparts of the multiscale
/// hypotheses, with factor-2 slack on the two ratio conditions:
///   a_n > 0 strictly increasing, p(A_n) > 0,
///   A_n disjoint from A_{n+l1}, D_n disjoint from D_{n+l2},
///   q(B_n)/p(A_n) <= 2 Gamma_1, q(b_{n+1})/q(b_{n+2}-a_n) <= 2 Gamma_2.
/// Stores m into params and returns it.
inline int burn_in_index(MultiscaleParameters& params, const TransitionRate& p, int horizon,
                         const ComparisonOptions& opt = {}) {
  if (horizon > params.horizon()) horizon = params.horizon();
  const double alpha = params.alpha;
  const double c = detail::rescale_factor(p, opt);
  const int usable = horizon - std::max(params.l1, params.l2) - 3;
  if (usable < 2) throw parameter_error("burn_in_index: horizon too small");
  std::vector<bool> ok(std::size_t(usable) + 1, false);
  std::string first_fail;
  for (int n = 1; n <= usable; ++n) {
    const auto an = params.a_n(n);
    if (!(an > 0 && params.a_n(n + 1) > an)) continue;
    const auto [alo, ahi] = params.interval_a(n);
    const double pa = p.interval_sum(alo, ahi) / c;
    if (!(pa > 0.0)) continue;
    if (params.a_n(n + params.l1) < params.b_n(n)) continue;  // A_n overlaps A_{n+l1}
    const auto [dlo, dhi] = params.interval_d(n);
    (void)dlo;
    if (params.b_n(n + params.l2 + 1) - params.b_n(n + params.l2) < dhi) continue;
    const auto [blo, bhi] = params.interval_b(n);
    const double qb = detail::q_interval(blo, bhi, alpha);
    if (qb / pa > 2.0 * params.gamma1) continue;
    const double qtop = std::pow(double(params.b_n(n + 1)), -(1.0 + alpha));
    const double qbot = std::pow(double(params.b_n(n + 2) - an), -(1.0 + alpha));
    if (qtop / qbot > 2.0 * params.gamma2) continue;
    ok[std::size_t(n)] = true;
  }
  int m = -1;
  for (int n = usable; n >= 1 && ok[std::size_t(n)]; --n) m = n;
  if (m < 0)
    throw infeasible_error("burn_in_index: no scale index satisfies all hypotheses up to the "
                           "horizon (last failing index " + std::to_string(usable) + ")");
  params.m = m;
  return m;
}

/// Dirichlet sum D_p(A) = sum_{x in A} p(x) phi(x).
inline double dirichlet_sum(const TransitionRate& p, const SubpolynomialFunction& phi,
                            std::span<const std::int64_t> a) {
  double acc = 0.0;
  for (const auto x : a) {
    if (x < 1 || std::size_t(x) > phi.domain_max())
      throw parameter_error("dirichlet_sum: phi undefined at x = " + std::to_string(x));
    acc += p(x) * phi.values[std::size_t(x) - 1];
  }
  return acc;
}

inline double dirichlet_sum(const TransitionRate& p, const SubpolynomialFunction& phi,
                            std::int64_t lo, std::int64_t hi) {
  double acc = 0.0;
  for (std::int64_t x = std::max<std::int64_t>(lo, 1);
       x <= std::min<std::int64_t>(hi, std::int64_t(phi.domain_max())); ++x)
    acc += p(x) * phi.values[std::size_t(x) - 1];
  return acc;
}

/// Certified kappa: with theta < 1 and a burn-in index on the horizon,
///   kappa = (2 K l1 Gamma1 + C1) / (1 - theta)
/// for the rate rescaled to unit tail constant; the returned kappa is mapped
/// back to the original normalization and records the rescale factor.
inline ComparisonCertificate certificate_kappa(const MultiscaleParameters& params,
                                               const TransitionRate& p,
                                               const ComparisonOptions& opt = {}) {
  if (!(params.theta < 1.0))
    throw infeasible_error("certificate_kappa: theta = " + std::to_string(params.theta) +
                           " >= 1, pick a smaller b");
  if (params.m < 1)
    throw infeasible_error("certificate_kappa: burn-in index not computed (run burn_in_index)");
  const double c = detail::rescale_factor(p, opt);
  const double p1 = p(1) / c;
  if (!(p1 > 0.0)) throw infeasible_error("certificate_kappa: p(1) must be positive");
  const double nu = 1.0 + std::log(params.K) / std::log(2.0);
  const std::int64_t bm1 = params.b_n(params.m + 1);
  if (bm1 > 50'000'000)
    throw capacity_error("certificate_kappa: envelope window " + std::to_string(bm1) +
                         " too large to sum directly");
  double window = 0.0;
  for (std::int64_t x = 1; x <= bm1; ++x)
    window += std::pow(double(x), nu - 1.0 - params.alpha);
  const double c1 = 2.0 * params.K * window / p1;
  const double kappa_scaled =
      (2.0 * params.K * double(params.l1) * params.gamma1 + c1) / (1.0 - params.theta);
  ComparisonCertificate cert;
  cert.params = params;
  cert.c1 = c1;
  cert.rescale = c;
  cert.kappa = kappa_scaled / c;
  const int usable = params.horizon() - std::max(params.l1, params.l2) - 3;
  cert.verified_up_to = params.b_n(usable);
  if (!(cert.kappa > 0.0) || !std::isfinite(cert.kappa))
    throw infeasible_error("certificate_kappa: assembled kappa is not finite and positive");
  return cert;
}

struct NamedPhi {
  std::string name;
  SubpolynomialFunction phi;
};

struct PhiComparison {
  std::string name;
  double sup_ratio = 0.0;
  std::int64_t argmax_n = 0;
};

struct ComparisonReport {
  std::vector<PhiComparison> per_phi;
  double family_sup = 0.0;
  std::optional<double> kappa;  // certificate value when supplied
  bool within_kappa = true;
};

/// Empirical ratios sup_{n <= n_max} D_q(I_n) / D_p(I_n) per phi, where
/// I_n = {1..n} and phi is zero-extended past its stored domain. Every phi
/// must pass its claimed subpolynomiality check on the window first.
inline ComparisonReport verify_comparison(const TransitionRate& p, double alpha,
                                          const std::vector<NamedPhi>& family,
                                          std::int64_t n_max,
                                          std::optional<double> kappa = std::nullopt) {
  if (n_max < 1) throw parameter_error("verify_comparison: n_max must be >= 1");
  ComparisonReport rep;
  rep.kappa = kappa;
  for (const auto& [name, phi] : family) {
    const auto check = check_subpolynomial(phi, phi.K, std::size_t(n_max));
    if (!check.pass)
      throw contract_error("verify_comparison: phi '" + name + "' fails K-subpolynomiality at (" +
                           std::to_string(check.x) + ", " + std::to_string(check.y) + ")");
    double dq = 0.0, dp = 0.0, sup = 0.0;
    std::int64_t arg = 0;
    const std::int64_t top = std::min<std::int64_t>(n_max, std::int64_t(phi.domain_max()));
    for (std::int64_t n = 1; n <= top; ++n) {
      const double v = phi.values[std::size_t(n) - 1];
      dq += std::pow(double(n), -(1.0 + alpha)) * v;
      dp += p(n) * v;
      if (dq > 0.0 && !(dp > 0.0))
        throw structural_error("verify_comparison: D_p vanishes while D_q > 0 at n = " +
                               std::to_string(n));
      if (dp > 0.0 && dq / dp > sup) {
        sup = dq / dp;
        arg = n;
      }
    }
    rep.per_phi.push_back({name, sup, arg});
    rep.family_sup = std::max(rep.family_sup, sup);
  }
  if (kappa) rep.within_kappa = rep.family_sup <= *kappa;
  return rep;
}

/// Increment profile of a function on Lambda_n:
///   phi(k) = sum_{x=-n}^{n-k} (f(x+k) - f(x))^2,  k = 1..2n,
/// zero past 2n. Always 2-subpolynomial.
inline SubpolynomialFunction dirichlet_profile(std::span<const double> f) {
  if (f.size() < 2 || f.size() % 2 == 0)
    throw parameter_error("dirichlet_profile: f must live on a box {-n..n} (odd size >= 3)");
  const std::size_t len = f.size();
  SubpolynomialFunction phi;
  phi.K = 2.0;
  phi.values.assign(len - 1, 0.0);
  for (std::size_t k = 1; k < len; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + k < len; ++i) {
      const double d = f[i + k] - f[i];
      acc += d * d;
    }
    phi.values[k - 1] = acc;
  }
  return phi;
}

}  // namespace stablewalk
