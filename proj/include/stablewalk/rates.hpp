#pragma once

// Symmetric jump rates on the integers with heavy-tail metadata, plus the
// subpolynomial-function calculus used by the Dirichlet comparison machinery.
//
// A rate p is symmetric (p(z) = p(-z)), vanishes at 0 and has finite total
// mass. The stability index alpha in (0,2) classifies the tail: p lies in the
// normal domain of attraction of an alpha-stable law when
// x^alpha * sum_{y>=x} p(y) converges to a constant c in (0,inf).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stablewalk/errors.hpp"

namespace stablewalk {

enum class RateKind { power_law, q_zero, lacunary, table };

enum class TableTail { undeclared, zero, power_law };

namespace detail {

// sum_{y>=x} y^{-(1+alpha)}: direct terms up to X0, Euler-Maclaurin beyond.
// Absolute error below 1e-15 relative for X0 >= 32.
inline double power_tail_sum(std::int64_t x, double alpha) {
  const double s = 1.0 + alpha;
  const std::int64_t x0 = std::max<std::int64_t>(x, 32);
  double acc = 0.0;
  for (std::int64_t y = x; y < x0; ++y) acc += std::pow(double(y), -s);
  const double v = double(x0);
  acc += std::pow(v, 1.0 - s) / (s - 1.0);
  acc += 0.5 * std::pow(v, -s);
  acc += s * std::pow(v, -s - 1.0) / 12.0;
  acc -= s * (s + 1.0) * (s + 2.0) * std::pow(v, -s - 3.0) / 720.0;
  acc += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) *
         std::pow(v, -s - 5.0) / 30240.0;
  return acc;
}

}  // namespace detail

/// Certified two-sided enclosure of a tail sum.
struct TailBounds {
  double lower = 0.0;
  double upper = 0.0;
  double mid() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
};

class TransitionRate {
public:
  static TransitionRate power_law(double alpha) {
    require_alpha(alpha);
    TransitionRate r;
    r.kind_ = RateKind::power_law;
    r.alpha_ = alpha;
    return r;
  }

  static TransitionRate q_zero(double alpha) {
    require_alpha(alpha);
    TransitionRate r;
    r.kind_ = RateKind::q_zero;
    r.alpha_ = alpha;
    return r;
  }

  /// Rate supported on the anchor sequence: p(z_l) = z_l^-a - z_{l+1}^-a.
  /// Anchors must be strictly increasing with z_1 = 1. Only the first
  /// size()-1 anchors carry a rate; queries past the last anchor raise
  /// accuracy_error (the continuation is unspecified).
  static TransitionRate lacunary(double alpha, std::vector<std::int64_t> anchors) {
    require_alpha(alpha);
    if (anchors.size() < 2 || anchors.front() != 1)
      throw parameter_error("lacunary rate: need at least two anchors starting at 1");
    for (std::size_t i = 1; i < anchors.size(); ++i)
      if (anchors[i] <= anchors[i - 1])
        throw parameter_error("lacunary rate: anchors must be strictly increasing");
    TransitionRate r;
    r.kind_ = RateKind::lacunary;
    r.alpha_ = alpha;
    r.anchors_ = std::move(anchors);
    return r;
  }

  /// Default adversarial sequence z_l = l^2 (ratios z_{l+1}/z_l -> 1).
  static TransitionRate lacunary_squares(double alpha, std::int64_t count = 70000) {
    std::vector<std::int64_t> z(count);
    for (std::int64_t l = 1; l <= count; ++l) z[l - 1] = l * l;
    return lacunary(alpha, std::move(z));
  }

  /// Rate given by a value table p(1..horizon) with a declared tail rule.
  /// For TableTail::power_law, p(z) = tail_coeff * z^{-(1+alpha)} beyond the
  /// horizon. alpha is used for tail handling and DAN diagnostics only.
  static TransitionRate table(std::vector<double> values, double alpha = 1.0,
                              TableTail tail = TableTail::undeclared,
                              double tail_coeff = 0.0) {
    if (values.empty()) throw parameter_error("table rate: empty value table");
    for (double v : values)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw parameter_error("table rate: values must be finite and nonnegative");
    if (tail == TableTail::power_law) {
      require_alpha(alpha);
      if (!(tail_coeff > 0.0))
        throw parameter_error("table rate: power-law tail needs a positive coefficient");
    }
    TransitionRate r;
    r.kind_ = RateKind::table;
    r.alpha_ = alpha;
    r.table_ = std::move(values);
    r.tail_rule_ = tail;
    r.tail_coeff_ = tail_coeff;
    r.table_suffix_.assign(r.table_.size() + 1, 0.0);
    for (std::size_t i = r.table_.size(); i-- > 0;)
      r.table_suffix_[i] = r.table_suffix_[i + 1] + r.table_[i];
    return r;
  }

  /// Parse a two-column text table "z p(z)", z >= 1, '#' comments allowed.
  /// Symmetry is implicit; missing z get rate 0. Reports line numbers on
  /// malformed input.
  static TransitionRate load_table(std::istream& in, double alpha = 1.0,
                                   TableTail tail = TableTail::undeclared,
                                   double tail_coeff = 0.0) {
    std::vector<double> vals;
    std::vector<bool> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::int64_t z;
      double v;
      if (!(ls >> z)) {
        std::string rest;
        if (ls.clear(), ls >> rest)
          throw parse_error("rate table line " + std::to_string(lineno) + ": expected integer z");
        continue;  // blank or comment-only line
      }
      if (!(ls >> v))
        throw parse_error("rate table line " + std::to_string(lineno) + ": missing rate value");
      std::string extra;
      if (ls >> extra)
        throw parse_error("rate table line " + std::to_string(lineno) + ": trailing tokens");
      if (z < 1)
        throw parse_error("rate table line " + std::to_string(lineno) + ": z must be positive");
      if (!(v >= 0.0) || !std::isfinite(v))
        throw parse_error("rate table line " + std::to_string(lineno) + ": bad rate value");
      if (std::size_t(z) > vals.size()) {
        vals.resize(std::size_t(z), 0.0);
        seen.resize(std::size_t(z), false);
      }
      if (seen[std::size_t(z) - 1])
        throw parse_error("rate table line " + std::to_string(lineno) + ": duplicate z = " +
                          std::to_string(z));
      seen[std::size_t(z) - 1] = true;
      vals[std::size_t(z) - 1] = v;
    }
    if (vals.empty()) throw parse_error("rate table: no entries");
    return table(std::move(vals), alpha, tail, tail_coeff);
  }

  RateKind kind() const { return kind_; }
  double alpha() const { return alpha_; }

  /// p(z) for any integer z; symmetric, p(0) = 0.
  double operator()(std::int64_t z) const {
    if (z == 0) return 0.0;
    const std::int64_t a = z < 0 ? -z : z;
    switch (kind_) {
      case RateKind::power_law:
        return std::pow(double(a), -(1.0 + alpha_));
      case RateKind::q_zero:
        return std::pow(double(a), -alpha_) - std::pow(double(a) + 1.0, -alpha_);
      case RateKind::lacunary: {
        if (a >= anchors_.back())
          throw accuracy_error("lacunary rate: z = " + std::to_string(a) +
                               " is at or beyond the last stored anchor " +
                               std::to_string(anchors_.back()));
        auto it = std::lower_bound(anchors_.begin(), anchors_.end(), a);
        if (it == anchors_.end() || *it != a) return 0.0;
        const std::int64_t next = *(it + 1);
        return std::pow(double(a), -alpha_) - std::pow(double(next), -alpha_);
      }
      case RateKind::table:
        if (std::size_t(a) <= table_.size()) return table_[std::size_t(a) - 1];
        if (tail_rule_ == TableTail::power_law)
          return tail_coeff_ * std::pow(double(a), -(1.0 + alpha_));
        return 0.0;  // zero rule; undeclared treated as unsupported
    }
    return 0.0;
  }

  /// sum_{y >= x} p(y) over positive y, analytic where the kind allows.
  double tail_sum(std::int64_t x) const {
    if (x < 1) throw parameter_error("tail_sum: x must be >= 1");
    switch (kind_) {
      case RateKind::power_law:
        return detail::power_tail_sum(x, alpha_);
      case RateKind::q_zero:
        return std::pow(double(x), -alpha_);  // exact telescoping
      case RateKind::lacunary: {
        // exact telescoping: tail = (first anchor >= x)^(-alpha), valid on
        // any continuation of the sequence up to the last stored anchor
        if (x > anchors_.back())
          throw accuracy_error("lacunary rate: tail requested at x = " + std::to_string(x) +
                               " beyond the last stored anchor");
        auto it = std::lower_bound(anchors_.begin(), anchors_.end(), x);
        return std::pow(double(*it), -alpha_);
      }
      case RateKind::table: {
        const double in_horizon =
            std::size_t(x) <= table_.size() ? table_suffix_[std::size_t(x) - 1] : 0.0;
        switch (tail_rule_) {
          case TableTail::zero:
            return in_horizon;
          case TableTail::power_law: {
            const std::int64_t start = std::max<std::int64_t>(x, std::int64_t(table_.size()) + 1);
            return in_horizon + tail_coeff_ * detail::power_tail_sum(start, alpha_);
          }
          case TableTail::undeclared:
            throw accuracy_error(
                "table rate: tail rule undeclared beyond horizon " + std::to_string(table_.size()) +
                "; in-horizon partial sum from x is " + std::to_string(in_horizon));
        }
        return in_horizon;
      }
    }
    return 0.0;
  }

  /// Certified enclosure of tail_sum: partial summation plus integral
  /// sandwich for the power-tail remainder.
  TailBounds tail_sum_bounds(std::int64_t x) const {
    switch (kind_) {
      case RateKind::q_zero:
      case RateKind::lacunary: {
        const double t = tail_sum(x);  // telescoping, exact
        return {t, t};
      }
      case RateKind::power_law: {
        const std::int64_t x1 = std::max<std::int64_t>(x, 4096);
        double partial = 0.0;
        for (std::int64_t y = x; y < x1; ++y) partial += std::pow(double(y), -(1.0 + alpha_));
        const double integral = std::pow(double(x1), -alpha_) / alpha_;
        return {partial + integral, partial + integral + std::pow(double(x1), -(1.0 + alpha_))};
      }
      case RateKind::table: {
        if (tail_rule_ == TableTail::zero) {
          const double t = tail_sum(x);
          return {t, t};
        }
        if (tail_rule_ == TableTail::power_law) {
          const double in_horizon =
              std::size_t(x) <= table_.size() ? table_suffix_[std::size_t(x) - 1] : 0.0;
          const std::int64_t start = std::max<std::int64_t>(x, std::int64_t(table_.size()) + 1);
          const double integral = tail_coeff_ * std::pow(double(start), -alpha_) / alpha_;
          return {in_horizon + integral,
                  in_horizon + integral + tail_coeff_ * std::pow(double(start), -(1.0 + alpha_))};
        }
        throw accuracy_error("table rate: certified tail needs a declared tail rule");
      }
    }
    return {};
  }

  /// sum over z in [lo, hi] of p(z), positive z.
  double interval_sum(std::int64_t lo, std::int64_t hi) const {
    if (hi < lo) return 0.0;
    if (lo < 1) throw parameter_error("interval_sum: lo must be >= 1");
    return tail_sum(lo) - tail_sum(hi + 1);
  }

  /// x^alpha * sum_{y>=x} p(y): the quantity whose limit defines membership
  /// in the stable domain of attraction.
  double tail_constant(std::int64_t x) const {
    if (x < 1) throw parameter_error("tail_constant: x must be >= 1");
    return std::pow(double(x), alpha_) * tail_sum(x);
  }

  /// Total jump mass sum_{z != 0} p(z) (both signs).
  double total_rate() const { return 2.0 * tail_sum(1); }

  /// Limiting tail constant c, when the kind determines it.
  std::optional<double> dan_constant() const {
    switch (kind_) {
      case RateKind::power_law:
        return 1.0 / alpha_;
      case RateKind::q_zero:
      case RateKind::lacunary:
        return 1.0;
      case RateKind::table:
        if (tail_rule_ == TableTail::power_law) return tail_coeff_ / alpha_;
        return std::nullopt;  // zero tail is not in DAN; undeclared is unknown
    }
    return std::nullopt;
  }

  bool in_dan() const { return dan_constant().has_value(); }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case RateKind::power_law: os << "power_law(alpha=" << alpha_ << ")"; break;
      case RateKind::q_zero: os << "q_zero(alpha=" << alpha_ << ")"; break;
      case RateKind::lacunary:
        os << "lacunary(alpha=" << alpha_ << ", anchors=" << anchors_.size() << ")";
        break;
      case RateKind::table:
        os << "table(horizon=" << table_.size() << ")";
        break;
    }
    return os.str();
  }

  const std::vector<std::int64_t>& anchors() const { return anchors_; }
  std::int64_t table_horizon() const { return std::int64_t(table_.size()); }
  TableTail tail_rule() const { return tail_rule_; }
  double tail_coeff() const { return tail_coeff_; }

private:
  static void require_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 2.0))
      throw parameter_error("stability index alpha must lie in (0, 2)");
  }

  RateKind kind_ = RateKind::power_law;
  double alpha_ = 1.0;
  std::vector<std::int64_t> anchors_;
  std::vector<double> table_;
  std::vector<double> table_suffix_;
  TableTail tail_rule_ = TableTail::undeclared;
  double tail_coeff_ = 0.0;
};

/// Nonnegative function on {1..N} with a claimed subadditivity constant K:
/// phi(x+y) <= K (phi(x) + phi(y)). values[i] holds phi(i+1).
struct SubpolynomialFunction {
  std::vector<double> values;
  double K = 1.0;

  double operator()(std::size_t x) const {
    if (x < 1 || x > values.size())
      throw parameter_error("subpolynomial function: x = " + std::to_string(x) +
                            " outside domain {1.." + std::to_string(values.size()) + "}");
    return values[x - 1];
  }

  std::size_t domain_max() const { return values.size(); }

  /// Growth exponent nu = 1 + log K / log 2 of the polynomial envelope.
  double nu() const { return 1.0 + std::log(K) / std::log(2.0); }

  template <class F>
  static SubpolynomialFunction from_function(F&& f, std::size_t n, double claimed_k) {
    SubpolynomialFunction phi;
    phi.K = claimed_k;
    phi.values.resize(n);
    for (std::size_t x = 1; x <= n; ++x) {
      const double v = f(x);
      if (!(v >= 0.0))
        throw parameter_error("subpolynomial function: phi must be nonnegative");
      phi.values[x - 1] = v;
    }
    return phi;
  }
};

/// Outcome of a subpolynomiality or envelope scan. On failure (x, y) is the
/// first violating pair ((x, 0) for the envelope check).
struct SubpolyVerdict {
  bool pass = true;
  std::size_t x = 0;
  std::size_t y = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Exhaustive scan of phi(x+y) <= K (phi(x) + phi(y)) over x + y <= N.
inline SubpolyVerdict check_subpolynomial(const SubpolynomialFunction& phi, double K,
                                          std::size_t N) {
  N = std::min(N, phi.domain_max());
  for (std::size_t s = 2; s <= N; ++s) {
    const double lhs = phi.values[s - 1];
    for (std::size_t x = 1; 2 * x <= s; ++x) {
      const double rhs = K * (phi.values[x - 1] + phi.values[s - x - 1]);
      if (lhs > rhs) return {false, x, s - x, lhs, rhs};
    }
  }
  return {};
}

/// Envelope bound phi(x) <= 2 K phi(1) x^nu on {1..N}, nu = 1 + log K/log 2.
/// Requires phi to pass check_subpolynomial with the same K first.
inline SubpolyVerdict lemma1_bound_check(const SubpolynomialFunction& phi, double K,
                                         std::size_t N) {
  const auto sub = check_subpolynomial(phi, K, N);
  if (!sub.pass)
    throw contract_error("lemma1_bound_check: phi is not K-subpolynomial on the window (first "
                         "violation at x=" + std::to_string(sub.x) + ", y=" + std::to_string(sub.y) +
                         ")");
  N = std::min(N, phi.domain_max());
  const double nu = 1.0 + std::log(K) / std::log(2.0);
  const double base = 2.0 * K * phi.values[0];
  for (std::size_t x = 1; x <= N; ++x) {
    const double bound = base * std::pow(double(x), nu);
    if (phi.values[x - 1] > bound) return {false, x, 0, phi.values[x - 1], bound};
  }
  return {};
}

}  // namespace stablewalk
