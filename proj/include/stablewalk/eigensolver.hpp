#pragma once

// Dense symmetric eigensolver (Householder tridiagonalization followed by
// implicit-shift QL with eigenvector accumulation) and an inverse-free
// Lanczos solver for the smallest eigenvalue with explicit deflation.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stablewalk/errors.hpp"

namespace stablewalk {

/// Full eigendecomposition of a symmetric matrix. values are ascending;
/// vector k occupies column k of the row-major matrix `vectors`
/// (component i at vectors[i * dim + k]).
struct EigenSystem {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<double> vectors;

  std::vector<double> eigenvector(std::size_t k) const {
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = vectors[i * dim + k];
    return v;
  }
};

namespace detail {

inline double hypot2(double a, double b) { return std::hypot(a, b); }

// Householder reduction to tridiagonal form, in place, with accumulation of
// the orthogonal transform in z (so that A = Z T Z^T on exit).
inline void tridiagonalize(std::vector<double>& z, std::size_t n, std::vector<double>& d,
                           std::vector<double>& e) {
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(z[i * n + k]);
      if (scale == 0.0) {
        e[i] = z[i * n + l];
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          z[i * n + k] /= scale;
          h += z[i * n + k] * z[i * n + k];
        }
        double f = z[i * n + l];
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z[i * n + l] = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          z[j * n + i] = z[i * n + j] / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += z[j * n + k] * z[i * n + k];
          for (std::size_t k = j + 1; k <= l; ++k) g += z[k * n + j] * z[i * n + k];
          e[j] = g / h;
          f += e[j] * z[i * n + j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = z[i * n + j];
          g = e[j] - hh * f;
          e[j] = g;
          for (std::size_t k = 0; k <= j; ++k)
            z[j * n + k] -= f * e[k] + g * z[i * n + k];
        }
      }
    } else {
      e[i] = z[i * n + l];
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += z[i * n + k] * z[k * n + j];
        for (std::size_t k = 0; k < i; ++k) z[k * n + j] -= g * z[k * n + i];
      }
    }
    d[i] = z[i * n + i];
    z[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      z[j * n + i] = 0.0;
      z[i * n + j] = 0.0;
    }
  }
}

// Implicit-shift QL on the tridiagonal (d, e) rotating the columns of z.
inline void ql_implicit(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                        std::size_t n) {
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    std::size_t iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60)
          throw convergence_error("symmetric QL iteration failed to converge", std::abs(e[l]));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = z[k * n + i + 1];
            z[k * n + i + 1] = s * z[k * n + i] + c * f;
            z[k * n + i] = c * z[k * n + i] - s * f;
          }
        }
        if (r == 0.0 && m - l > 1) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Eigendecomposition of a symmetric matrix given row-major. The input is
/// consumed. Eigenvalues come out ascending with matching vectors.
inline EigenSystem eigh(std::vector<double> a, std::size_t n) {
  if (n == 0 || a.size() != n * n) throw parameter_error("eigh: bad dimensions");
  std::vector<double> d, e;
  detail::tridiagonalize(a, n, d, e);
  detail::ql_implicit(d, e, a, n);
  // sort ascending, permuting columns
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });
  EigenSystem out;
  out.dim = n;
  out.values.resize(n);
  out.vectors.assign(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[idx[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + k] = a[i * n + idx[k]];
  }
  return out;
}

using ApplyFn = std::function<void(const double*, double*)>;

struct LanczosOptions {
  double tol = 1e-8;          // certified residual ||Av - lambda v||
  std::size_t max_iter = 500;
  std::uint64_t seed = 0x5eedULL;
};

struct LanczosResult {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Smallest eigenvalue of a symmetric operator restricted to the orthogonal
/// complement of `deflate` (vectors assumed mutually orthonormal). Lanczos
/// with full reorthogonalization; raises convergence_error with the best
/// residual when the budget runs out.
inline LanczosResult lanczos_smallest(const ApplyFn& apply, std::size_t dim,
                                      std::span<const std::vector<double>> deflate,
                                      const LanczosOptions& opt = {}) {
  if (dim == 0) throw parameter_error("lanczos_smallest: empty operator");
  const std::size_t maxit = std::min(opt.max_iter, dim);
  auto project = [&](std::vector<double>& v) {
    for (const auto& w : deflate) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += w[i] * v[i];
      for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * w[i];
    }
  };
  std::uint64_t s = opt.seed;
  std::vector<double> v(dim);
  for (auto& x : v) x = double(detail::splitmix64(s) >> 11) * 0x1.0p-53 - 0.5;
  project(v);
  double nrm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  if (nrm == 0.0) throw parameter_error("lanczos_smallest: start vector annihilated by deflation");
  for (auto& x : v) x /= nrm;

  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> w(dim), scratch(dim), best_vec;
  double best_val = 0.0, best_res = std::numeric_limits<double>::infinity();

  auto certify = [&](double lam, const std::vector<double>& y) {
    const std::size_t k = y.size();
    std::vector<double> x(dim, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t p = 0; p < dim; ++p) x[p] += y[i] * basis[i][p];
    double xn = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (auto& t : x) t /= xn;
    apply(x.data(), scratch.data());
    double res = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double r = scratch[i] - lam * x[i];
      res += r * r;
    }
    res = std::sqrt(res);
    if (res < best_res) {
      best_res = res;
      best_val = lam;
      best_vec = std::move(x);
    }
  };

  for (std::size_t j = 0; j < maxit; ++j) {
    basis.push_back(v);
    apply(v.data(), w.data());
    double a = 0.0;
    for (std::size_t i = 0; i < dim; ++i) a += v[i] * w[i];
    alpha.push_back(a);
    for (std::size_t i = 0; i < dim; ++i) w[i] -= a * v[i];
    if (j > 0)
      for (std::size_t i = 0; i < dim; ++i) w[i] -= beta[j - 1] * basis[j - 1][i];
    project(w);
    // full reorthogonalization against the Krylov basis
    for (const auto& u : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += u[i] * w[i];
      for (std::size_t i = 0; i < dim; ++i) w[i] -= dot * u[i];
    }
    const double b = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    // smallest Ritz pair of the (j+1) x (j+1) tridiagonal
    const std::size_t k = j + 1;
    std::vector<double> tz(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      tz[i * k + i] = alpha[i];
      if (i + 1 < k) {
        tz[i * k + i + 1] = beta[i];
        tz[(i + 1) * k + i] = beta[i];
      }
    }
    EigenSystem ritz = eigh(std::move(tz), k);
    const std::vector<double> y = ritz.eigenvector(0);
    const bool exhausted = b <= 1e-13;
    if (b * std::abs(y[k - 1]) <= 0.5 * opt.tol || exhausted || k == maxit) {
      certify(ritz.values[0], y);
      if (best_res <= opt.tol) return {best_val, best_vec, best_res, k};
      if (exhausted) break;  // Krylov space is invariant; nothing more to gain
    }
    if (exhausted) break;
    beta.push_back(b);
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / b;
  }
  if (best_res <= opt.tol) return {best_val, best_vec, best_res, basis.size()};
  throw convergence_error("lanczos_smallest: residual " + std::to_string(best_res) +
                              " above tolerance " + std::to_string(opt.tol) + " after " +
                              std::to_string(basis.size()) + " iterations",
                          best_res);
}

}  // namespace stablewalk
