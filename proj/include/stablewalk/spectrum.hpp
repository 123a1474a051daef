#pragma once

// Spectral-gap computation for reversible generators and the box-scaling
// sweep. The gap is the smallest eigenvalue of -L on the mu-mean-zero
// subspace, computed by the variational characterization: a dense symmetric
// eigensolve below a size threshold, a deflated Lanczos iteration above it.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablewalk/eigensolver.hpp"
#include "stablewalk/errors.hpp"
#include "stablewalk/generator.hpp"
#include "stablewalk/rates.hpp"

namespace stablewalk {

enum class GapMethod { automatic, dense, iterative };

struct GapOptions {
  double tol_dense = 1e-10;
  double tol_iterative = 1e-8;
  std::size_t dense_limit = 4096;
  GapMethod method = GapMethod::automatic;
  std::size_t max_iter = 500;
  std::uint64_t seed = 0x5eedULL;
};

struct SpectralReport {
  double gap = 0.0;
  int box_radius = -1;
  std::string rate_desc;
  std::string method;  // "dense" | "iterative"
  double residual = 0.0;
  std::size_t states = 0;
};

struct GapEigenpair {
  double gap = 0.0;
  std::vector<double> f;  // eigenfunction in original coordinates
  double residual = 0.0;
  std::string method;
};

namespace detail {

inline GapEigenpair gap_dense(const Generator& g, const GapOptions& opt) {
  auto s = g.symmetrized_dense();
  EigenSystem es = eigh(std::move(s), g.dim);
  const double lam = es.values[1];
  auto v = es.eigenvector(1);
  // residual ||S v - lam v||
  auto s2 = g.symmetrized_dense();
  double res = 0.0;
  for (std::size_t i = 0; i < g.dim; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.dim; ++j) acc += s2[i * g.dim + j] * v[j];
    const double r = acc - lam * v[i];
    res += r * r;
  }
  res = std::sqrt(res);
  if (res > opt.tol_dense * std::max(1.0, g.trace_neg_l()))
    throw convergence_error("dense eigensolve residual above tolerance", res);
  GapEigenpair out;
  out.gap = lam;
  out.residual = res;
  out.method = "dense";
  out.f.resize(g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) out.f[i] = v[i] / std::sqrt(g.mu[i]);
  return out;
}

inline GapEigenpair gap_iterative(const Generator& g, const GapOptions& opt) {
  std::vector<double> kernel(g.dim);
  double nrm = 0.0;
  for (std::size_t i = 0; i < g.dim; ++i) {
    kernel[i] = std::sqrt(g.mu[i]);
    nrm += g.mu[i];
  }
  nrm = std::sqrt(nrm);
  for (auto& x : kernel) x /= nrm;
  const std::vector<std::vector<double>> deflate{kernel};
  LanczosOptions lo;
  lo.tol = opt.tol_iterative;
  lo.max_iter = opt.max_iter;
  lo.seed = opt.seed;
  auto res = lanczos_smallest(
      [&g](const double* x, double* y) { g.apply_symmetrized(x, y); }, g.dim, deflate, lo);
  GapEigenpair out;
  out.gap = res.value;
  out.residual = res.residual;
  out.method = "iterative";
  out.f.resize(g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) out.f[i] = res.vector[i] / std::sqrt(g.mu[i]);
  return out;
}

}  // namespace detail

/// Gap together with its eigenfunction (original coordinates).
inline GapEigenpair gap_eigenpair(const Generator& g, const GapOptions& opt = {}) {
  if (g.dim < 2)
    throw structural_error("spectral gap undefined on a single-state space");
  if (!g.irreducible())
    throw structural_error("spectral gap: generator is reducible (zero eigenvalue not simple)");
  const bool dense = opt.method == GapMethod::dense ||
                     (opt.method == GapMethod::automatic && g.dim <= opt.dense_limit);
  return dense ? detail::gap_dense(g, opt) : detail::gap_iterative(g, opt);
}

inline SpectralReport spectral_gap(const Generator& g, const GapOptions& opt = {}) {
  auto pair = gap_eigenpair(g, opt);
  SpectralReport rep;
  rep.gap = pair.gap;
  rep.box_radius = g.box_radius;
  rep.rate_desc = g.rate_desc;
  rep.method = pair.method;
  rep.residual = pair.residual;
  rep.states = g.dim;
  return rep;
}

/// Rayleigh quotient of the centered indicator of {x > 0} on Lambda_n,
/// the test function of the upper-bound argument. Requires a walk generator.
inline double upper_bound_test_function(const Generator& g) {
  if (g.box_radius < 1 || g.dim != std::size_t(2 * g.box_radius + 1))
    throw contract_error("upper_bound_test_function: not a walk generator on a box");
  const int n = g.box_radius;
  std::vector<double> f(g.dim, 0.0);
  const double v = std::sqrt(double(2 * n + 1) / double(n));
  for (int x = 1; x <= n; ++x) f[std::size_t(x + n)] = v;
  return rayleigh_quotient(g, f);
}

struct SweepRow {
  int n = 0;
  std::size_t states = 0;
  double gap = 0.0;
  double gap_times_scale = 0.0;
  std::string method;
  double residual = 0.0;
  std::string error;  // non-empty when this point failed
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double slope = 0.0;       // least-squares slope of log gap vs log(2n+1)
  double intercept = 0.0;
  double scaled_min = 0.0;  // extremes of gap * (2n+1)^alpha over good rows
  double scaled_max = 0.0;
  double alpha = 0.0;
  std::size_t failures = 0;
};

/// Gap sweep over boxes with the scaling diagnostic of the gap inequality:
/// slope of log lambda_n against log(2n+1) and the window of
/// lambda_n (2n+1)^alpha.
inline SweepResult gap_scaling_sweep(const TransitionRate& p, const std::vector<int>& n_values,
                                     const GapOptions& opt = {}) {
  if (n_values.empty()) throw parameter_error("gap_scaling_sweep: empty n range");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw parameter_error("gap_scaling_sweep: n values must be increasing");
  SweepResult out;
  out.alpha = p.alpha();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t good = 0;
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  for (int n : n_values) {
    SweepRow row;
    row.n = n;
    row.states = std::size_t(2 * n + 1);
    try {
      auto g = build_walk_generator(p, n);
      auto rep = spectral_gap(g, opt);
      row.gap = rep.gap;
      row.method = rep.method;
      row.residual = rep.residual;
      row.gap_times_scale = rep.gap * std::pow(double(2 * n + 1), out.alpha);
      const double x = std::log(double(2 * n + 1)), y = std::log(rep.gap);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++good;
      smin = std::min(smin, row.gap_times_scale);
      smax = std::max(smax, row.gap_times_scale);
    } catch (const error& e) {
      row.error = e.what();
      ++out.failures;
    }
    out.rows.push_back(std::move(row));
  }
  if (good >= 2) {
    const double denom = double(good) * sxx - sx * sx;
    out.slope = (double(good) * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / double(good);
  }
  out.scaled_min = smin;
  out.scaled_max = smax;
  return out;
}

}  // namespace stablewalk
