#pragma once

// Return-probability kinetics on a truncated lattice: exact semigroup
// evolution by uniformization (Poisson-weighted powers of the jump kernel,
// positivity-preserving, with explicit series truncation), seeded Monte
// Carlo trajectories, log-log decay fits, the psi(t) = sum f_t^2 functional
// with its dissipation identity, and the block Poincare bound.
//
// Jumps leaving the box {-L..L} are absorbed and accounted in leaked_mass,
// so the truncated semigroup stays symmetric and substochastic; the
// reversibility identity psi(t) = f_{2t}(0) holds exactly for it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "stablewalk/errors.hpp"
#include "stablewalk/rates.hpp"

namespace stablewalk {

struct SemigroupState {
  std::int64_t box_radius = 0;
  std::vector<double> values;  // index x + box_radius
  double time = 0.0;
  double leaked_mass = 0.0;

  double at(std::int64_t x) const {
    if (x < -box_radius || x > box_radius) return 0.0;
    return values[std::size_t(x + box_radius)];
  }
};

struct EvolveOptions {
  double series_tol = 1e-12;  // Poisson tail mass dropped by truncation
  double leak_budget = 1e-6;  // raise truncation_error past this leakage
};

namespace detail {

inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / double(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= double(n);
}

// In-box application of the jump kernel: (Kv)(x) = sum_y p(x-y) v(y) over
// x, y in the box. Sparse kernels go directly, dense ones through a padded
// radix-2 FFT.
class BoxConvolver {
public:
  BoxConvolver(const TransitionRate& p, std::int64_t box_radius) : l_(box_radius) {
    kernel_.assign(std::size_t(4 * l_ + 1), 0.0);
    for (std::int64_t z = -2 * l_; z <= 2 * l_; ++z)
      kernel_[std::size_t(z + 2 * l_)] = p(z);
    std::size_t nnz = 0;
    for (double v : kernel_)
      if (v != 0.0) ++nnz;
    use_fft_ = nnz > 64;
    if (use_fft_) {
      fft_n_ = 1;
      while (fft_n_ < std::size_t(6 * l_ + 1)) fft_n_ <<= 1;
      khat_.assign(fft_n_, {0.0, 0.0});
      for (std::size_t i = 0; i < kernel_.size(); ++i) khat_[i] = kernel_[i];
      fft_radix2(khat_, false);
      buf_.assign(fft_n_, {0.0, 0.0});
    } else {
      offsets_.reserve(nnz);
      for (std::int64_t z = -2 * l_; z <= 2 * l_; ++z)
        if (kernel_[std::size_t(z + 2 * l_)] != 0.0)
          offsets_.emplace_back(z, kernel_[std::size_t(z + 2 * l_)]);
    }
  }

  void apply(const std::vector<double>& in, std::vector<double>& out) const {
    const std::size_t n = std::size_t(2 * l_ + 1);
    out.assign(n, 0.0);
    if (!use_fft_) {
      for (const auto& [z, w] : offsets_) {
        const std::int64_t lo = std::max<std::int64_t>(0, -z);
        const std::int64_t hi = std::min<std::int64_t>(std::int64_t(n) - 1, std::int64_t(n) - 1 - z);
        for (std::int64_t y = lo; y <= hi; ++y) out[std::size_t(y + z)] += w * in[std::size_t(y)];
      }
      return;
    }
    auto& b = buf_;
    std::fill(b.begin(), b.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) b[i] = in[i];
    fft_radix2(b, false);
    for (std::size_t i = 0; i < fft_n_; ++i) b[i] *= khat_[i];
    fft_radix2(b, true);
    for (std::size_t i = 0; i < n; ++i) out[i] = b[i + std::size_t(2 * l_)].real();
  }

private:
  std::int64_t l_;
  std::vector<double> kernel_;
  bool use_fft_ = false;
  std::size_t fft_n_ = 0;
  std::vector<std::complex<double>> khat_;
  mutable std::vector<std::complex<double>> buf_;
  std::vector<std::pair<std::int64_t, double>> offsets_;
};

// sum_{z=1}^{k} p(z) without needing a declared tail rule for table rates.
inline double prefix_rate_sum(const TransitionRate& p, std::int64_t k) {
  if (k <= 0) return 0.0;
  if (p.kind() == RateKind::table) {
    double acc = 0.0;
    const std::int64_t top = std::min(k, p.table_horizon());
    for (std::int64_t z = 1; z <= top; ++z) acc += p(z);
    if (k > p.table_horizon() && p.tail_rule() == TableTail::power_law)
      acc += p.tail_coeff() * (power_tail_sum(p.table_horizon() + 1, p.alpha()) -
                               power_tail_sum(k + 1, p.alpha()));
    return acc;  // undeclared and zero tails both contribute nothing here
  }
  return p.tail_sum(1) - p.tail_sum(k + 1);
}

// total jump rate consistent with the dynamics (undeclared table tails act
// as zero for evolution)
inline double dynamic_total_rate(const TransitionRate& p) {
  if (p.kind() == RateKind::table && p.tail_rule() == TableTail::undeclared)
    return 2.0 * prefix_rate_sum(p, p.table_horizon());
  return p.total_rate();
}

inline std::vector<double> poisson_pmf(double lambda, std::size_t kmax) {
  std::vector<double> w(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double lp = -lambda + double(k) * std::log(lambda) - std::lgamma(double(k) + 1.0);
    w[k] = std::exp(lp);
  }
  return w;
}

inline std::size_t poisson_cutoff(double lambda, double tol) {
  if (lambda <= 0.0) return 0;
  std::size_t k = std::size_t(lambda);
  double cum = 0.0;
  std::size_t i = 0;
  for (;; ++i) {
    const double lp = -lambda + double(i) * std::log(lambda) - std::lgamma(double(i) + 1.0);
    cum += std::exp(lp);
    if (i >= k && 1.0 - cum <= tol) break;
    if (i > 20 * (k + 10))
      throw accuracy_error("poisson_cutoff: series did not close; lambda = " +
                           std::to_string(lambda));
  }
  return i;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double u01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Evolve from an arbitrary initial state for several time offsets in one
/// uniformization pass. Offsets must be nondecreasing and nonnegative.
inline std::vector<SemigroupState> evolve_semigroup_grid(const TransitionRate& p,
                                                         const SemigroupState& initial,
                                                         const std::vector<double>& offsets,
                                                         const EvolveOptions& opt = {}) {
  if (offsets.empty()) throw parameter_error("evolve_semigroup_grid: no offsets");
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!(offsets[i] >= 0.0)) throw parameter_error("evolve_semigroup_grid: negative time");
    if (i > 0 && offsets[i] < offsets[i - 1])
      throw parameter_error("evolve_semigroup_grid: offsets must be nondecreasing");
  }
  const std::int64_t l = initial.box_radius;
  const std::size_t n = std::size_t(2 * l + 1);
  if (initial.values.size() != n) throw parameter_error("evolve_semigroup_grid: bad state size");
  const double gamma = detail::dynamic_total_rate(p);
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw parameter_error("evolve_semigroup_grid: total jump rate must be positive and finite");

  const detail::BoxConvolver conv(p, l);
  const double tmax = offsets.back();
  const std::size_t kmax = detail::poisson_cutoff(gamma * tmax, opt.series_tol);
  std::vector<std::vector<double>> pmf;
  pmf.reserve(offsets.size());
  for (double t : offsets)
    pmf.push_back(t > 0.0 ? detail::poisson_pmf(gamma * t, kmax) : std::vector<double>{});

  std::vector<SemigroupState> out(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    out[i].box_radius = l;
    out[i].time = initial.time + offsets[i];
    out[i].values.assign(n, 0.0);
  }
  std::vector<double> v = initial.values, next(n);
  for (std::size_t k = 0;; ++k) {
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      if (offsets[i] == 0.0) {
        if (k == 0) out[i].values = v;
        continue;
      }
      const double w = pmf[i][k];
      if (w > 0.0) {
        auto& o = out[i].values;
        for (std::size_t x = 0; x < n; ++x) o[x] += w * v[x];
      }
    }
    if (k == kmax) break;
    conv.apply(v, next);
    const double inv = 1.0 / gamma;
    for (std::size_t x = 0; x < n; ++x) {
      double t = next[x] * inv;
      if (t < 0.0) {
        if (t < -1e-13) throw accuracy_error("uniformization produced a negative probability");
        t = 0.0;
      }
      v[x] = t;
    }
  }
  for (auto& s : out) {
    double mass = 0.0;
    for (auto& x : s.values) {
      if (x < 0.0) x = 0.0;
      mass += x;
    }
    s.leaked_mass = 1.0 - mass;
    if (s.leaked_mass < 0.0) s.leaked_mass = 0.0;
    if (s.leaked_mass > opt.leak_budget)
      throw truncation_error("evolve_semigroup: leaked mass " + std::to_string(s.leaked_mass) +
                             " at t = " + std::to_string(s.time) +
                             " exceeds the budget; increase L_box");
  }
  return out;
}

/// f_t = P_t(0, .) on the box {-L..L} starting from the point mass at 0.
inline SemigroupState evolve_semigroup(const TransitionRate& p, double t, std::int64_t l_box,
                                       const EvolveOptions& opt = {}) {
  if (l_box < 1) throw parameter_error("evolve_semigroup: box radius must be >= 1");
  if (!(t >= 0.0)) throw parameter_error("evolve_semigroup: time must be nonnegative");
  SemigroupState init;
  init.box_radius = l_box;
  init.values.assign(std::size_t(2 * l_box + 1), 0.0);
  init.values[std::size_t(l_box)] = 1.0;
  return evolve_semigroup_grid(p, init, {t}, opt).front();
}

/// Delta-start evolution sampled at several times in one pass.
inline std::vector<SemigroupState> evolve_semigroup(const TransitionRate& p,
                                                    const std::vector<double>& times,
                                                    std::int64_t l_box,
                                                    const EvolveOptions& opt = {}) {
  if (l_box < 1) throw parameter_error("evolve_semigroup: box radius must be >= 1");
  SemigroupState init;
  init.box_radius = l_box;
  init.values.assign(std::size_t(2 * l_box + 1), 0.0);
  init.values[std::size_t(l_box)] = 1.0;
  return evolve_semigroup_grid(p, init, times, opt);
}

inline SemigroupState evolve_from(const TransitionRate& p, const SemigroupState& state, double dt,
                                  const EvolveOptions& opt = {}) {
  return evolve_semigroup_grid(p, state, {dt}, opt).front();
}

/// psi(t) = sum_x f_t(x)^2; equals f_{2t}(0) by reversibility.
inline double psi_functional(const SemigroupState& s) {
  double acc = 0.0;
  for (double v : s.values) acc += v * v;
  return acc;
}

struct ReturnEstimate {
  double t = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct McOptions {
  std::int64_t alias_horizon = 4096;  // body of the jump distribution
  std::size_t chunk = 4096;           // samples per RNG stream
};

namespace detail {

// Walker alias table over {0..n-1}.
class AliasTable {
public:
  explicit AliasTable(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * double(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back(), l = large.back();
      small.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = std::uint32_t(l);
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0;
    for (std::size_t i : small) prob_[i] = 1.0;
  }

  std::size_t sample(std::mt19937_64& rng) const {
    const double u = u01(rng) * double(prob_.size());
    std::size_t i = std::size_t(u);
    if (i >= prob_.size()) i = prob_.size() - 1;
    return (u - double(i)) < prob_[i] ? i : alias_[i];
  }

private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Samples |z| from the jump law p(.)/gamma; the caller flips the sign.
class JumpSampler {
public:
  JumpSampler(const TransitionRate& p, const McOptions& opt) : p_(p), alpha_(p.alpha()) {
    kind_ = p.kind();
    if (kind_ == RateKind::q_zero) return;   // exact inverse transform
    if (kind_ == RateKind::lacunary) return; // exact inverse over anchors
    std::int64_t zmax = opt.alias_horizon;
    if (kind_ == RateKind::table) {
      zmax = p.table_horizon();
      if (p.tail_rule() == TableTail::undeclared && opt.alias_horizon > zmax)
        throw sampling_error("jump sampling: table tail undeclared beyond horizon " +
                             std::to_string(zmax));
      tail_coeff_ = p.tail_rule() == TableTail::power_law ? p.tail_coeff() : 0.0;
    } else {
      tail_coeff_ = 1.0;  // power law
    }
    zmax_ = zmax;
    std::vector<double> w(std::size_t(zmax_), 0.0);
    for (std::int64_t z = 1; z <= zmax_; ++z) w[std::size_t(z - 1)] = p(z);
    body_mass_ = 0.0;
    for (double x : w) body_mass_ += x;
    tail_mass_ = tail_coeff_ > 0.0 ? tail_coeff_ * power_tail_sum(zmax_ + 1, alpha_) : 0.0;
    body_ = std::make_unique<AliasTable>(w);
    if (tail_mass_ > 0.0) {
      const double m = double(zmax_ + 1);
      const double q0m = std::pow(m, -alpha_) - std::pow(m + 1.0, -alpha_);
      reject_c_ = std::pow(m, -(1.0 + alpha_)) / q0m;  // sup of q/q0 on the tail
    }
  }

  std::int64_t sample_abs(std::mt19937_64& rng) const {
    if (kind_ == RateKind::q_zero) {
      const double v = 1.0 - u01(rng);  // (0,1]
      return std::int64_t(std::pow(v, -1.0 / alpha_));
    }
    if (kind_ == RateKind::lacunary) {
      const auto& anchors = p_.anchors();
      const double v = 1.0 - u01(rng);
      const double w = std::pow(v, -1.0 / alpha_);
      // largest anchor <= w
      auto it = std::upper_bound(anchors.begin(), anchors.end(), std::int64_t(w));
      if (it == anchors.begin()) return anchors.front();
      const std::size_t idx = std::size_t(it - anchors.begin()) - 1;
      if (idx + 1 >= anchors.size())
        throw sampling_error("jump sampling: lacunary draw past the stored anchors");
      return anchors[idx];
    }
    const double u = u01(rng) * (body_mass_ + tail_mass_);
    if (u < body_mass_ || tail_mass_ == 0.0)
      return std::int64_t(body_->sample(rng)) + 1;
    // exact tail draw by rejection from the telescoping envelope
    const double m = double(zmax_ + 1);
    for (int tries = 0; tries < 10000; ++tries) {
      const double v = (1.0 - u01(rng)) * std::pow(m, -alpha_);
      const std::int64_t z = std::int64_t(std::pow(v, -1.0 / alpha_));
      const double q0z = std::pow(double(z), -alpha_) - std::pow(double(z) + 1.0, -alpha_);
      const double accept =
          std::pow(double(z), -(1.0 + alpha_)) / (reject_c_ * q0z);
      if (u01(rng) < accept) return z;
    }
    throw accuracy_error("jump sampling: tail rejection failed to terminate");
  }

private:
  const TransitionRate& p_;
  double alpha_;
  RateKind kind_;
  std::int64_t zmax_ = 0;
  double body_mass_ = 0.0;
  double tail_mass_ = 0.0;
  double tail_coeff_ = 0.0;
  double reject_c_ = 0.0;
  std::unique_ptr<AliasTable> body_;
};

}  // namespace detail

/// Monte Carlo estimate of P^0(y(t) = 0) at each requested time, from
/// `samples` continuous-time trajectories on the full lattice. Deterministic
/// for a fixed seed: trajectories are dealt to fixed-size chunks with
/// per-chunk RNG streams derived from the master seed.
inline std::vector<ReturnEstimate> mc_return_probability(const TransitionRate& p,
                                                         std::vector<double> times,
                                                         std::size_t samples, std::uint64_t seed,
                                                         const McOptions& opt = {}) {
  if (samples < 1) throw parameter_error("mc_return_probability: need samples >= 1");
  if (times.empty()) throw parameter_error("mc_return_probability: no times");
  std::sort(times.begin(), times.end());
  if (!(times.front() >= 0.0)) throw parameter_error("mc_return_probability: negative time");
  const double gamma = detail::dynamic_total_rate(p);
  const detail::JumpSampler sampler(p, opt);
  std::vector<std::size_t> hits(times.size(), 0);
  const std::size_t chunks = (samples + opt.chunk - 1) / opt.chunk;
  for (std::size_t c = 0; c < chunks; ++c) {
    std::mt19937_64 rng(detail::mix_seed(seed, c));
    const std::size_t lo = c * opt.chunk, hi = std::min(samples, lo + opt.chunk);
    for (std::size_t s = lo; s < hi; ++s) {
      std::int64_t pos = 0;
      double tcur = 0.0;
      std::size_t idx = 0;
      while (idx < times.size()) {
        const double dt = -std::log(1.0 - detail::u01(rng)) / gamma;
        tcur += dt;
        while (idx < times.size() && times[idx] < tcur) {
          if (pos == 0) ++hits[idx];
          ++idx;
        }
        if (idx >= times.size()) break;
        const std::int64_t z = sampler.sample_abs(rng);
        pos += (rng() & 1u) ? z : -z;
      }
    }
  }
  std::vector<ReturnEstimate> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double phat = double(hits[i]) / double(samples);
    out[i] = {times[i], phat, std::sqrt(phat * (1.0 - phat) / double(samples))};
  }
  return out;
}

struct DecayFit {
  std::vector<double> times;
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t window_lo = 0;  // index range [lo, hi) of the fit window
  std::size_t window_hi = 0;
};

/// Least-squares slope of log value against log time over the window
/// [t_min, t_max]. Needs at least 3 positive points in the window.
inline DecayFit decay_exponent_fit(const std::vector<double>& times,
                                   const std::vector<double>& values, double t_min,
                                   double t_max) {
  if (times.size() != values.size())
    throw parameter_error("decay_exponent_fit: times/values size mismatch");
  DecayFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  bool started = false;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_min || times[i] > t_max) continue;
    if (!started) {
      fit.window_lo = i;
      started = true;
    }
    fit.window_hi = i + 1;
    if (!(values[i] > 0.0))
      throw parameter_error("decay_exponent_fit: nonpositive value inside the fit window at t = " +
                            std::to_string(times[i]));
    const double x = std::log(times[i]), y = std::log(values[i]);
    fit.times.push_back(times[i]);
    fit.values.push_back(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 3) throw parameter_error("decay_exponent_fit: fewer than 3 points in the window");
  const double denom = double(count) * sxx - sx * sx;
  fit.slope = (double(count) * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / double(count);
  return fit;
}

struct DissipationCheck {
  double finite_difference = 0.0;  // centered d psi / dt
  double dirichlet_double_sum = 0.0;  // sum_{x,y in box} p(y-x)(f(y)-f(x))^2
  double absorption = 0.0;            // 2 sum_x leak_rate(x) f(x)^2
  double measured_prefactor = 0.0;    // fd / dirichlet_double_sum
  double relative_error = 0.0;
  bool pass = false;
};

/// Checks d/dt psi(t) = -(S + absorption) with S the in-box Dirichlet double
/// sum, by centered finite difference around t + dt. The measured prefactor
/// fd/S is reported; it approaches -1 on large boxes (per-pair counting of
/// the double sum).
inline DissipationCheck psi_dissipation_check(const TransitionRate& p, const SemigroupState& s,
                                              double dt, double rel_tol = 1e-5,
                                              const EvolveOptions& opt = {}) {
  const double gamma = detail::dynamic_total_rate(p);
  if (!(dt > 0.0) || dt * gamma > 0.25)
    throw parameter_error("psi_dissipation_check: dt too large for the total rate");
  auto states = evolve_semigroup_grid(p, s, {dt, 2.0 * dt}, opt);
  const auto& mid = states[0].values;
  const std::int64_t l = s.box_radius;
  const std::size_t n = mid.size();

  const detail::BoxConvolver conv(p, l);
  std::vector<double> kf;
  conv.apply(mid, kf);
  double sum_gf2 = 0.0, sum_fkf = 0.0, absorb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t x = std::int64_t(i) - l;
    const double gbox = detail::prefix_rate_sum(p, l - x) + detail::prefix_rate_sum(p, l + x);
    sum_gf2 += gbox * mid[i] * mid[i];
    sum_fkf += mid[i] * kf[i];
    absorb += (gamma - gbox) * mid[i] * mid[i];
  }
  DissipationCheck out;
  out.dirichlet_double_sum = 2.0 * (sum_gf2 - sum_fkf);
  out.absorption = 2.0 * absorb;
  out.finite_difference = (psi_functional(states[1]) - psi_functional(s)) / (2.0 * dt);
  out.measured_prefactor = out.finite_difference / out.dirichlet_double_sum;
  const double rhs = -(out.dirichlet_double_sum + out.absorption);
  out.relative_error = std::abs(out.finite_difference - rhs) / std::max(std::abs(rhs), 1e-300);
  out.pass = out.relative_error <= rel_tol;
  return out;
}

struct BlockBound {
  std::int64_t block_lo = 0;  // leftmost site of the block
  double mass = 0.0;
  double sum_sq = 0.0;
  double dirichlet = 0.0;  // (1/2) sum over in-block pairs
  double bound = 0.0;      // dirichlet / gap + mass^2 / width
  bool holds = false;
};

struct BlockProjectionReport {
  int n = 0;
  double gap_lower_bound = 0.0;
  std::vector<BlockBound> blocks;
  double psi = 0.0;
  double total_bound = 0.0;
  bool all_hold = false;
};

/// Poincare bound per block of width 2n+1 tiling the box:
///   sum_B f^2 <= D_B(f) / lambda + (sum_B f)^2 / (2n+1),
/// with D_B the in-block Dirichlet form and lambda a lower bound on the
/// walk gap on Lambda_n (the computed gap, or kappa_1 (2n+1)^{-alpha}).
inline BlockProjectionReport block_projection_bound(const TransitionRate& p,
                                                    const SemigroupState& s, int n,
                                                    double gap_lower_bound) {
  if (n < 1) throw parameter_error("block_projection_bound: n must be >= 1");
  if (!(gap_lower_bound > 0.0))
    throw parameter_error("block_projection_bound: need a positive gap lower bound");
  const std::size_t width = std::size_t(2 * n + 1);
  const std::size_t total = s.values.size();
  if (total % width != 0)
    throw alignment_error("block_projection_bound: box of " + std::to_string(total) +
                          " sites is not tiled by blocks of width " + std::to_string(width));
  BlockProjectionReport rep;
  rep.n = n;
  rep.gap_lower_bound = gap_lower_bound;
  rep.all_hold = true;
  for (std::size_t b = 0; b < total / width; ++b) {
    const double* f = s.values.data() + b * width;
    BlockBound bb;
    bb.block_lo = std::int64_t(b * width) - s.box_radius;
    for (std::size_t i = 0; i < width; ++i) {
      bb.mass += f[i];
      bb.sum_sq += f[i] * f[i];
    }
    double d = 0.0;
    for (std::size_t i = 0; i < width; ++i)
      for (std::size_t j = i + 1; j < width; ++j) {
        const double diff = f[j] - f[i];
        d += p(std::int64_t(j) - std::int64_t(i)) * diff * diff;
      }
    bb.dirichlet = d;  // ordered double sum / 2 = unordered sum
    bb.bound = bb.dirichlet / gap_lower_bound + bb.mass * bb.mass / double(width);
    bb.holds = bb.sum_sq <= bb.bound * (1.0 + 1e-12) + 1e-15;
    rep.all_hold = rep.all_hold && bb.holds;
    rep.psi += bb.sum_sq;
    rep.total_bound += bb.bound;
    rep.blocks.push_back(bb);
  }
  return rep;
}

}  // namespace stablewalk
