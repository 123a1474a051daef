#pragma once

// Canonical ensembles for interacting particle systems on Lambda_n:
// exclusion (hard-core occupation, uniform equilibrium) and zero-range
// (unbounded occupation, product-form equilibrium 1/g(k)! up to
// normalization). States are enumerated in lexicographic order with exact
// combinatorial rank/unrank maps so generator layouts are reproducible.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "stablewalk/errors.hpp"
#include "stablewalk/generator.hpp"
#include "stablewalk/rates.hpp"
#include "stablewalk/spectrum.hpp"

namespace stablewalk {

namespace detail {

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (r > (std::uint64_t(-1) / (n - k + i)))
      throw capacity_error("binomial coefficient overflows 64 bits");
    r = r * (n - k + i) / i;
  }
  return r;
}

}  // namespace detail

/// Occupation states eta in {0,1}^{Lambda_n} with a fixed particle number,
/// stored as bitmasks (bit i = site -n+i occupied), enumerated in
/// lexicographic order of the occupied-position tuples.
struct ExclusionEnsemble {
  int n = 0;
  int ell = 0;
  std::size_t count = 0;
  std::vector<std::uint32_t> states;

  int sites() const { return 2 * n + 1; }

  std::size_t rank(std::uint32_t mask) const {
    const int w = sites();
    std::size_t r = 0;
    int remaining = ell;
    for (int i = 0; i < w && remaining > 0; ++i) {
      if (mask & (1u << i)) {
        --remaining;
      } else {
        r += detail::binomial(std::uint64_t(w - 1 - i), std::uint64_t(remaining - 1));
      }
    }
    return r;
  }

  std::uint32_t unrank(std::size_t r) const {
    const int w = sites();
    std::uint32_t mask = 0;
    int remaining = ell;
    for (int i = 0; i < w && remaining > 0; ++i) {
      const std::uint64_t c = detail::binomial(std::uint64_t(w - 1 - i), std::uint64_t(remaining - 1));
      if (r < c) {
        mask |= (1u << i);
        --remaining;
      } else {
        r -= c;
      }
    }
    return mask;
  }
};

inline ExclusionEnsemble enumerate_exclusion(int n, int ell) {
  if (n < 1 || n > 14) throw parameter_error("enumerate_exclusion: need 1 <= n <= 14");
  const int w = 2 * n + 1;
  if (ell < 0 || ell > w)
    throw parameter_error("enumerate_exclusion: ell must lie in {0.." + std::to_string(w) + "}");
  ExclusionEnsemble e;
  e.n = n;
  e.ell = ell;
  e.count = std::size_t(detail::binomial(std::uint64_t(w), std::uint64_t(ell)));
  e.states.resize(e.count);
  for (std::size_t r = 0; r < e.count; ++r) e.states[r] = e.unrank(r);
  return e;
}

/// Exclusion generator: eta -> eta^{x,y} at rate p(y-x) eta_x (1-eta_y).
/// Uniform equilibrium (p symmetric). Single-state ensembles have no gap.
inline Generator build_exclusion_generator(const TransitionRate& p, const ExclusionEnsemble& e) {
  if (e.count < 2)
    throw structural_error("exclusion ensemble with ell = " + std::to_string(e.ell) +
                           " has a single state; gap undefined");
  const int w = e.sites();
  Generator g;
  g.init(e.count);
  g.box_radius = -1;
  g.rate_desc = p.describe();
  for (std::size_t s = 0; s < e.count; ++s) {
    const std::uint32_t mask = e.states[s];
    std::string lab(std::size_t(w), '0');
    for (int i = 0; i < w; ++i)
      if (mask & (1u << i)) lab[std::size_t(i)] = '1';
    g.labels[s] = lab;
    for (int x = 0; x < w; ++x) {
      if (!(mask & (1u << x))) continue;
      for (int y = 0; y < w; ++y) {
        if (y == x || (mask & (1u << y))) continue;
        const double r = p(y - x);
        if (r <= 0.0) continue;
        const std::uint32_t swapped = (mask & ~(1u << x)) | (1u << y);
        g.add_rate(s, e.rank(swapped), r);
      }
    }
  }
  g.finalize();
  return g;
}

struct AldousRow {
  int ell = 0;
  std::size_t states = 0;
  double gap = 0.0;
  double deviation = 0.0;
};

struct AldousReport {
  int n = 0;
  double walk_gap = 0.0;
  std::vector<AldousRow> rows;
  double worst_deviation = 0.0;
  bool pass = false;
};

/// Exclusion gap equals the walk gap on every level set (the interchange
/// inequality, an equality on weighted graphs). Checks all ell in {1..2n}.
inline AldousReport verify_aldous(const TransitionRate& p, int n, double tol,
                                  const GapOptions& opt = {}) {
  AldousReport rep;
  rep.n = n;
  rep.walk_gap = spectral_gap(build_walk_generator(p, n), opt).gap;
  for (int ell = 1; ell <= 2 * n; ++ell) {
    try {
      const auto e = enumerate_exclusion(n, ell);
      const auto g = build_exclusion_generator(p, e);
      const double gap = spectral_gap(g, opt).gap;
      const double dev = std::abs(gap - rep.walk_gap);
      rep.rows.push_back({ell, e.count, gap, dev});
      rep.worst_deviation = std::max(rep.worst_deviation, dev);
    } catch (const error& err) {
      throw structural_error("verify_aldous failed at (n=" + std::to_string(n) +
                             ", ell=" + std::to_string(ell) + "): " + err.what());
    }
  }
  rep.pass = rep.worst_deviation <= tol;
  return rep;
}

/// Occupation states xi in N_0^{Lambda_n} with sum ell, lexicographic order.
struct ZeroRangeEnsemble {
  int n = 0;
  int ell = 0;
  std::size_t count = 0;
  std::vector<std::uint8_t> flat;  // count x sites, row-major

  int sites() const { return 2 * n + 1; }

  const std::uint8_t* state(std::size_t r) const { return flat.data() + r * std::size_t(sites()); }

  std::size_t rank(const std::uint8_t* xi) const {
    const int w = sites();
    std::size_t r = 0;
    int rem = ell;
    for (int i = 0; i + 1 < w; ++i) {
      for (int v = 0; v < xi[i]; ++v)
        r += detail::binomial(std::uint64_t(rem - v + w - i - 2), std::uint64_t(w - i - 2));
      rem -= xi[i];
    }
    return r;
  }
};

inline ZeroRangeEnsemble enumerate_zero_range(int n, int ell,
                                              std::size_t state_budget = 2'000'000) {
  if (n < 1) throw parameter_error("enumerate_zero_range: need n >= 1");
  if (ell < 0 || ell > 255) throw parameter_error("enumerate_zero_range: need 0 <= ell <= 255");
  const int w = 2 * n + 1;
  const std::uint64_t cnt = detail::binomial(std::uint64_t(ell + w - 1), std::uint64_t(w - 1));
  if (cnt > state_budget)
    throw capacity_error("enumerate_zero_range: " + std::to_string(cnt) +
                         " states exceed the budget of " + std::to_string(state_budget));
  ZeroRangeEnsemble e;
  e.n = n;
  e.ell = ell;
  e.count = std::size_t(cnt);
  e.flat.assign(e.count * std::size_t(w), 0);
  std::vector<std::uint8_t> cur(std::size_t(w), 0);
  cur[std::size_t(w) - 1] = std::uint8_t(ell);
  for (std::size_t r = 0;; ++r) {
    std::copy(cur.begin(), cur.end(), e.flat.begin() + std::ptrdiff_t(r * std::size_t(w)));
    // next composition in lex order: bump the rightmost position that can move left
    int i = w - 1;
    while (i > 0 && cur[std::size_t(i)] == 0) --i;
    if (i == 0) break;  // (ell, 0, ..., 0) is last
    const int carry = cur[std::size_t(i)];
    cur[std::size_t(i)] = 0;
    cur[std::size_t(i - 1)] += 1;
    if (i < w - 1)
      cur[std::size_t(w) - 1] = std::uint8_t(carry - 1);
    else if (carry > 1)
      cur[std::size_t(w) - 1] = std::uint8_t(carry - 1);
  }
  return e;
}

/// Interaction rate g with g(0) = 0 and g(k) > 0 for k >= 1.
class InteractionRate {
public:
  enum class Kind { linear, indicator, table };

  static InteractionRate linear() { return InteractionRate(Kind::linear, {}); }
  static InteractionRate indicator() { return InteractionRate(Kind::indicator, {}); }
  static InteractionRate table(std::vector<double> values) {
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v))
        throw parameter_error("interaction rate table: g(k) must be positive for k >= 1");
    if (values.empty()) throw parameter_error("interaction rate table: empty");
    return InteractionRate(Kind::table, std::move(values));
  }

  Kind kind() const { return kind_; }

  double operator()(int k) const {
    if (k <= 0) return 0.0;
    switch (kind_) {
      case Kind::linear: return double(k);
      case Kind::indicator: return 1.0;
      case Kind::table:
        if (std::size_t(k) > values_.size())
          throw parameter_error("interaction rate table: g undefined at k = " + std::to_string(k));
        return values_[std::size_t(k) - 1];
    }
    return 0.0;
  }

  /// log of g(k)! = g(1) ... g(k), with g(0)! = 1.
  double log_factorial(int k) const {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += std::log((*this)(j));
    return acc;
  }

  /// sup_k |g(k+1) - g(k)| over {0..kmax} (Andjel's condition diagnostic).
  double andjel_sup(int kmax) const {
    double sup = 0.0;
    for (int k = 0; k < kmax; ++k) sup = std::max(sup, std::abs((*this)(k + 1) - (*this)(k)));
    return sup;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::linear: return "g(k)=k";
      case Kind::indicator: return "g(k)=1{k>=1}";
      case Kind::table: return "g table(" + std::to_string(values_.size()) + ")";
    }
    return {};
  }

  std::size_t table_range() const { return values_.size(); }

private:
  InteractionRate(Kind k, std::vector<double> v) : kind_(k), values_(std::move(v)) {}
  Kind kind_;
  std::vector<double> values_;
};

struct ZeroRangeMeasure {
  std::vector<double> weights;  // normalized, strictly positive
  double log_z = 0.0;
  double z = 0.0;
};

/// Product-form equilibrium mu(xi) = Z^{-1} prod_x 1/g(xi_x)!, computed in
/// log space.
inline ZeroRangeMeasure zero_range_measure(const InteractionRate& g, const ZeroRangeEnsemble& e) {
  const int w = e.sites();
  std::vector<double> lf(std::size_t(e.ell) + 1, 0.0);
  for (int k = 1; k <= e.ell; ++k) lf[std::size_t(k)] = lf[std::size_t(k) - 1] + std::log(g(k));
  ZeroRangeMeasure m;
  m.weights.resize(e.count);
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < e.count; ++r) {
    const auto* xi = e.state(r);
    double lw = 0.0;
    for (int i = 0; i < w; ++i) lw -= lf[xi[std::size_t(i)]];
    m.weights[r] = lw;
    max_lw = std::max(max_lw, lw);
  }
  double sum = 0.0;
  for (auto& lw : m.weights) {
    lw = std::exp(lw - max_lw);
    sum += lw;
  }
  for (auto& v : m.weights) v /= sum;
  m.log_z = std::log(sum) + max_lw;
  m.z = std::exp(m.log_z);
  return m;
}

/// Zero-range generator: xi -> xi^{x,y} at rate g(xi_x) p(y-x), reversible
/// for the product measure. Detailed balance is verified entrywise during
/// construction.
inline Generator build_zero_range_generator(const TransitionRate& p, const InteractionRate& g,
                                            const ZeroRangeEnsemble& e,
                                            const ZeroRangeMeasure& m) {
  if (e.count < 2)
    throw structural_error("zero-range ensemble with ell = " + std::to_string(e.ell) +
                           " has a single state; gap undefined");
  if (m.weights.size() != e.count)
    throw contract_error("build_zero_range_generator: measure does not match the ensemble");
  const int w = e.sites();
  Generator gen;
  gen.init(e.count);
  gen.rate_desc = p.describe() + ", " + g.describe();
  gen.mu = m.weights;
  std::vector<std::uint8_t> tmp(std::size_t(w), 0);
  for (std::size_t s = 0; s < e.count; ++s) {
    const auto* xi = e.state(s);
    std::string lab;
    for (int i = 0; i < w; ++i) {
      if (i) lab += '|';
      lab += std::to_string(int(xi[std::size_t(i)]));
    }
    gen.labels[s] = lab;
    for (int x = 0; x < w; ++x) {
      if (xi[std::size_t(x)] == 0) continue;
      const double gx = g(xi[std::size_t(x)]);
      for (int y = 0; y < w; ++y) {
        if (y == x) continue;
        const double r = gx * p(y - x);
        if (r <= 0.0) continue;
        std::copy(xi, xi + w, tmp.begin());
        tmp[std::size_t(x)] -= 1;
        tmp[std::size_t(y)] += 1;
        const std::size_t t = e.rank(tmp.data());
        // mu(xi) g(xi_x) = mu(xi^{x,y}) g(xi_y + 1)
        const double lhs = m.weights[s] * gx;
        const double rhs = m.weights[t] * g(xi[std::size_t(y)] + 1);
        if (std::abs(lhs - rhs) > 1e-10 * std::max(lhs, rhs))
          throw structural_error("zero-range construction: detailed balance violated at state " +
                                 lab + ", move " + std::to_string(x) + "->" + std::to_string(y));
        gen.add_rate(s, t, r);
      }
    }
  }
  gen.finalize();
  return gen;
}

/// Theorem-3 case of an interaction rate: uniform increment growth
/// (case i, with witnessed eps0 and l0) or the pure indicator (case ii).
struct Theorem3Case {
  bool case_i = false;
  double eps0 = 0.0;
  int l0 = 0;
};

inline Theorem3Case classify_interaction(const InteractionRate& g, int scan_range = 64) {
  switch (g.kind()) {
    case InteractionRate::Kind::linear:
      return {true, 0.5, 1};
    case InteractionRate::Kind::indicator:
      return {false, 0.0, 0};
    case InteractionRate::Kind::table: {
      const int range = std::min<int>(scan_range, int(g.table_range()));
      for (int l0 = 1; l0 <= range / 2; ++l0) {
        double worst = std::numeric_limits<double>::infinity();
        for (int l = 0; l + l0 <= range; ++l) worst = std::min(worst, g(l + l0) - g(l));
        if (worst > 0.0) return {true, 0.5 * worst, l0};
      }
      throw classification_error(
          "interaction rate fits neither gap-theorem case on the stored range: no uniform "
          "increment witness and not the indicator");
    }
  }
  throw classification_error("unknown interaction kind");
}

struct Theorem3Row {
  int n = 0;
  int ell = 0;
  std::size_t states = 0;
  double gap = 0.0;
  double normalized_gap = 0.0;
  std::string method;
  double residual = 0.0;
};

struct Theorem3Report {
  Theorem3Case classification;
  double alpha = 0.0;
  std::vector<Theorem3Row> rows;
  double normalized_min = 0.0;
};

/// Gap table for the zero-range process with the theorem's normalization:
/// gap * (2n+1)^alpha for case i, gap * (2n+1)^alpha (1+rho)^2 for case ii
/// where rho = ell/(2n+1).
inline Theorem3Report theorem3_check(const TransitionRate& p, const InteractionRate& g,
                                     const std::vector<int>& n_values,
                                     const std::vector<int>& ell_values,
                                     const GapOptions& opt = {}) {
  Theorem3Report rep;
  rep.classification = classify_interaction(g);
  rep.alpha = p.alpha();
  double nmin = std::numeric_limits<double>::infinity();
  for (int n : n_values)
    for (int ell : ell_values) {
      const auto e = enumerate_zero_range(n, ell);
      const auto m = zero_range_measure(g, e);
      const auto gen = build_zero_range_generator(p, g, e, m);
      const auto sp = spectral_gap(gen, opt);
      Theorem3Row row;
      row.n = n;
      row.ell = ell;
      row.states = e.count;
      row.gap = sp.gap;
      row.method = sp.method;
      row.residual = sp.residual;
      const double rho = double(ell) / double(2 * n + 1);
      row.normalized_gap = sp.gap * std::pow(double(2 * n + 1), rep.alpha);
      if (!rep.classification.case_i) row.normalized_gap *= (1.0 + rho) * (1.0 + rho);
      nmin = std::min(nmin, row.normalized_gap);
      rep.rows.push_back(std::move(row));
    }
  rep.normalized_min = nmin;
  return rep;
}

struct MovingLemmaResult {
  double phi_xz = 0.0;
  double phi_xy = 0.0;
  double phi_yz = 0.0;
  bool pass = false;
};

/// Two-step path bound phi^{x,z}(f) <= 2 (phi^{x,y}(f) + phi^{y,z}(f)) with
/// phi^{x,y}(f) = int g(xi_x) (f(xi^{x,y}) - f(xi))^2 dmu.
inline MovingLemmaResult moving_lemma_check(const InteractionRate& g, const ZeroRangeEnsemble& e,
                                            const ZeroRangeMeasure& m,
                                            const std::vector<double>& f, int x, int y, int z) {
  const int w = e.sites();
  auto site = [&](int s) {
    if (s < -e.n || s > e.n)
      throw parameter_error("moving_lemma_check: site outside the box");
    return s + e.n;
  };
  const int xi_ = site(x), yi_ = site(y), zi_ = site(z);
  if (f.size() != e.count) throw parameter_error("moving_lemma_check: f size mismatch");
  auto phi = [&](int from, int to) {
    if (from == to) return 0.0;
    double acc = 0.0;
    std::vector<std::uint8_t> tmp(std::size_t(w), 0);
    for (std::size_t s = 0; s < e.count; ++s) {
      const auto* xi = e.state(s);
      if (xi[std::size_t(from)] == 0) continue;
      std::copy(xi, xi + w, tmp.begin());
      tmp[std::size_t(from)] -= 1;
      tmp[std::size_t(to)] += 1;
      const double d = f[e.rank(tmp.data())] - f[s];
      acc += m.weights[s] * g(xi[std::size_t(from)]) * d * d;
    }
    return acc;
  };
  MovingLemmaResult r;
  r.phi_xz = phi(xi_, zi_);
  r.phi_xy = phi(xi_, yi_);
  r.phi_yz = phi(yi_, zi_);
  r.pass = r.phi_xz <= 2.0 * (r.phi_xy + r.phi_yz) + 1e-12 * (1.0 + r.phi_xz);
  return r;
}

}  // namespace stablewalk
