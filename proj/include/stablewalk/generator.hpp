#pragma once

// Reversible generators in sparse form: off-diagonal jump rates r(x,y),
// exit rates gamma(x) = sum_y r(x,y) and an equilibrium measure mu
// satisfying detailed balance mu(x) r(x,y) = mu(y) r(y,x). The matrix acts
// as L f(x) = sum_y r(x,y) (f(y) - f(x)); rows of L sum to zero by
// construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "stablewalk/errors.hpp"
#include "stablewalk/rates.hpp"

namespace stablewalk {

struct Generator {
  std::size_t dim = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rates;  // sorted by column
  std::vector<double> exit_rate;
  std::vector<double> mu;
  std::vector<std::string> labels;
  int box_radius = -1;  // >= 1 for walk generators on Lambda_n
  std::string rate_desc;

  void init(std::size_t n) {
    dim = n;
    rates.assign(n, {});
    exit_rate.assign(n, 0.0);
    mu.assign(n, 1.0 / double(n));
    labels.assign(n, {});
  }

  void add_rate(std::size_t i, std::size_t j, double r) {
    if (r > 0.0) rates[i].emplace_back(std::uint32_t(j), r);
  }

  /// Sort rows, merge duplicate columns, compute exit rates.
  void finalize() {
    for (std::size_t i = 0; i < dim; ++i) {
      auto& row = rates[i];
      std::sort(row.begin(), row.end());
      std::size_t out = 0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (out > 0 && row[out - 1].first == row[k].first)
          row[out - 1].second += row[k].second;
        else
          row[out++] = row[k];
      }
      row.resize(out);
      double g = 0.0;
      for (const auto& [j, r] : row) g += r;
      exit_rate[i] = g;
    }
  }

  double rate_at(std::size_t i, std::size_t j) const {
    const auto& row = rates[i];
    auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(std::uint32_t(j), 0.0),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    return (it != row.end() && it->first == j) ? it->second : 0.0;
  }

  /// max_i |sum_j L_ij| over rows of L (conservativeness).
  double row_sum_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double s = -exit_rate[i];
      for (const auto& [j, r] : rates[i]) s += r;
      worst = std::max(worst, std::abs(s));
    }
    return worst;
  }

  /// max over edges of |mu(x) r(x,y) - mu(y) r(y,x)| relative to the edge flow.
  double detailed_balance_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      for (const auto& [j, r] : rates[i]) {
        const double fwd = mu[i] * r;
        const double bwd = mu[j] * rate_at(j, i);
        const double scale = std::max(fwd, bwd);
        if (scale > 0.0) worst = std::max(worst, std::abs(fwd - bwd) / scale);
      }
    return worst;
  }

  /// Union-find over positive-rate edges.
  bool irreducible() const {
    std::vector<std::uint32_t> parent(dim);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    };
    for (std::size_t i = 0; i < dim; ++i)
      for (const auto& [j, r] : rates[i]) {
        (void)r;
        const auto a = find(std::uint32_t(i)), b = find(j);
        if (a != b) parent[a] = b;
      }
    const auto root = find(0);
    for (std::size_t i = 1; i < dim; ++i)
      if (find(std::uint32_t(i)) != root) return false;
    return true;
  }

  /// Dense S = D^{1/2} (-L) D^{-1/2}, D = diag(mu); symmetric with the same
  /// spectrum as -L and kernel spanned by sqrt(mu).
  std::vector<double> symmetrized_dense() const {
    std::vector<double> s(dim * dim, 0.0);
    std::vector<double> sq(dim);
    for (std::size_t i = 0; i < dim; ++i) sq[i] = std::sqrt(mu[i]);
    for (std::size_t i = 0; i < dim; ++i) {
      s[i * dim + i] = exit_rate[i];
      for (const auto& [j, r] : rates[i]) s[i * dim + j] = -sq[i] * r / sq[j];
    }
    // enforce exact symmetry against roundoff in the similarity transform
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i + 1; j < dim; ++j) {
        const double v = 0.5 * (s[i * dim + j] + s[j * dim + i]);
        s[i * dim + j] = v;
        s[j * dim + i] = v;
      }
    return s;
  }

  /// y = S x for the symmetrized matrix, without materializing it.
  void apply_symmetrized(const double* x, double* y) const {
    std::vector<double> sq(dim);
    for (std::size_t i = 0; i < dim; ++i) sq[i] = std::sqrt(mu[i]);
    for (std::size_t i = 0; i < dim; ++i) {
      double acc = exit_rate[i] * x[i];
      for (const auto& [j, r] : rates[i]) acc -= sq[i] * r / sq[j] * x[j];
      y[i] = acc;
    }
  }

  /// (-L f)(x) = gamma(x) f(x) - sum_y r(x,y) f(y), original coordinates.
  std::vector<double> apply_neg_l(const std::vector<double>& f) const {
    std::vector<double> out(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      double acc = exit_rate[i] * f[i];
      for (const auto& [j, r] : rates[i]) acc -= r * f[j];
      out[i] = acc;
    }
    return out;
  }

  double trace_neg_l() const {
    return std::accumulate(exit_rate.begin(), exit_rate.end(), 0.0);
  }
};

/// Random walk with rate p(.) restricted to the box Lambda_n = {-n..n}.
/// Jumps that would leave the box are suppressed; the uniform measure is
/// the unique equilibrium.
inline Generator build_walk_generator(const TransitionRate& p, int n) {
  if (n < 1) throw parameter_error("build_walk_generator: box radius must be >= 1");
  if (!(p(1) > 0.0))
    throw structural_error("build_walk_generator: p(1) = 0, restricted walk is not irreducible");
  const std::size_t dim = std::size_t(2 * n + 1);
  Generator g;
  g.init(dim);
  g.box_radius = n;
  g.rate_desc = p.describe();
  for (int x = -n; x <= n; ++x) {
    g.labels[std::size_t(x + n)] = std::to_string(x);
    for (int y = -n; y <= n; ++y)
      if (y != x) g.add_rate(std::size_t(x + n), std::size_t(y + n), p(y - x));
  }
  g.finalize();
  return g;
}

/// Dirichlet form D(f) = (1/2) sum_{x,y} mu(x) r(x,y) (f(y)-f(x))^2.
inline double dirichlet_form(const Generator& g, const std::vector<double>& f) {
  if (f.size() != g.dim) throw parameter_error("dirichlet_form: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < g.dim; ++i)
    for (const auto& [j, r] : g.rates[i]) {
      const double d = f[j] - f[i];
      acc += g.mu[i] * r * d * d;
    }
  return 0.5 * acc;
}

/// D(f - mean) / ||f - mean||^2 in L^2(mu); an upper bound for the gap.
inline double rayleigh_quotient(const Generator& g, const std::vector<double>& f) {
  if (f.size() != g.dim) throw parameter_error("rayleigh_quotient: size mismatch");
  double mean = 0.0;
  for (std::size_t i = 0; i < g.dim; ++i) mean += g.mu[i] * f[i];
  double norm2 = 0.0, sup = 0.0;
  std::vector<double> fb(g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) {
    fb[i] = f[i] - mean;
    norm2 += g.mu[i] * fb[i] * fb[i];
    sup = std::max(sup, std::abs(f[i]));
  }
  if (norm2 <= 1e-28 * std::max(1.0, sup * sup))
    throw parameter_error("rayleigh_quotient: f is constant mu-a.e.");
  return dirichlet_form(g, fb) / norm2;
}

}  // namespace stablewalk
