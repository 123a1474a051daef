#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "stablewalk/eigensolver.hpp"
#include "stablewalk/generator.hpp"
#include "stablewalk/spectrum.hpp"

using namespace stablewalk;

namespace {

double rnd01(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return double((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
}

TransitionRate nn_rate() { return TransitionRate::table({1.0}, 1.0, TableTail::zero); }

}  // namespace

TEST_CASE("walk generator structure", "[spectrum]") {
  auto p = TransitionRate::power_law(1.0);
  auto g = build_walk_generator(p, 3);
  CHECK(g.dim == 7);
  CHECK(g.box_radius == 3);
  CHECK(g.row_sum_residual() <= 1e-13 * g.trace_neg_l());
  CHECK(g.detailed_balance_residual() == 0.0);  // symmetric rates, uniform mu
  CHECK(g.irreducible());
  CHECK(g.rate_at(0, 6) == p(6));
  CHECK(g.labels[0] == "-3");
  CHECK(g.labels[6] == "3");
  // kernel: (-L) 1 = 0 to machine precision
  const auto lf = g.apply_neg_l(std::vector<double>(g.dim, 1.0));
  for (double v : lf) CHECK(std::abs(v) <= 1e-13 * g.trace_neg_l());
  // equilibrium uniform
  for (double m : g.mu) CHECK(m == Catch::Approx(1.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("walk generator needs p(1) > 0", "[spectrum]") {
  auto dead = TransitionRate::table({0.0, 1.0}, 1.0, TableTail::zero);
  CHECK_THROWS_AS(build_walk_generator(dead, 2), structural_error);
  CHECK_THROWS_AS(build_walk_generator(TransitionRate::power_law(1.0), 0), parameter_error);
}

TEST_CASE("frozen spectral gaps for the power law", "[spectrum]") {
  auto p = TransitionRate::power_law(1.0);
  // independently computed by a dense eigensolver oracle
  const std::pair<int, double> expected[] = {{1, 1.5},
                                             {2, 0.996693953351},
                                             {4, 0.595031192718},
                                             {8, 0.329080924790}};
  for (const auto& [n, gap] : expected) {
    const auto rep = spectral_gap(build_walk_generator(p, n));
    CHECK(rep.gap == Catch::Approx(gap).margin(2e-9));
    CHECK(rep.method == "dense");
    CHECK(rep.residual <= 1e-10);
    CHECK(rep.states == std::size_t(2 * n + 1));
  }
}

TEST_CASE("nearest-neighbor path and complete graph", "[spectrum]") {
  // P3 path: spectrum {0, 1, 3}
  const auto rep = spectral_gap(build_walk_generator(nn_rate(), 1));
  CHECK(rep.gap == Catch::Approx(1.0).epsilon(1e-12));

  // complete graph on 2n+1 states at constant rate 1: gap = 2n+1 exactly
  for (int n : {2, 5}) {
    auto c = TransitionRate::table(std::vector<double>(std::size_t(2 * n), 1.0), 1.0,
                                   TableTail::zero);
    const auto r = spectral_gap(build_walk_generator(c, n));
    CHECK(r.gap == Catch::Approx(double(2 * n + 1)).epsilon(1e-12));
  }
}

TEST_CASE("dense and iterative paths agree", "[spectrum]") {
  auto p = TransitionRate::power_law(1.0);
  for (int n : {4, 8, 16}) {
    auto g = build_walk_generator(p, n);
    GapOptions dense;
    dense.method = GapMethod::dense;
    GapOptions iter;
    iter.method = GapMethod::iterative;
    const double a = spectral_gap(g, dense).gap;
    const double b = spectral_gap(g, iter).gap;
    CHECK(std::abs(a - b) <= 1e-8);
  }
}

TEST_CASE("injected rate asymmetry breaks detailed balance", "[spectrum]") {
  Generator g;
  g.init(3);
  g.add_rate(0, 1, 1.0);
  g.add_rate(1, 0, 2.0);  // asymmetric against the uniform measure
  g.add_rate(1, 2, 1.0);
  g.add_rate(2, 1, 1.0);
  g.finalize();
  CHECK(g.detailed_balance_residual() >= 0.5);
}

TEST_CASE("reducible generator is rejected", "[spectrum]") {
  Generator g;
  g.init(4);
  g.add_rate(0, 1, 1.0);
  g.add_rate(1, 0, 1.0);
  g.add_rate(2, 3, 1.0);
  g.add_rate(3, 2, 1.0);
  g.finalize();
  CHECK_FALSE(g.irreducible());
  CHECK_THROWS_AS(spectral_gap(g), structural_error);
}

TEST_CASE("rayleigh quotient", "[spectrum]") {
  auto g = build_walk_generator(nn_rate(), 1);
  CHECK(rayleigh_quotient(g, {-1.0, 0.0, 1.0}) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(rayleigh_quotient(g, {2.0, 2.0, 2.0}), parameter_error);

  auto gp = build_walk_generator(TransitionRate::power_law(1.0), 6);
  const auto pair = gap_eigenpair(gp);
  CHECK(rayleigh_quotient(gp, pair.f) == Catch::Approx(pair.gap).epsilon(1e-10));

  // variational principle on random functions
  std::uint64_t s = 99;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> f(gp.dim);
    for (auto& v : f) v = 2.0 * rnd01(s) - 1.0;
    CHECK(rayleigh_quotient(gp, f) >= pair.gap * (1.0 - 1e-9));
  }
}

TEST_CASE("indicator test function bounds the gap", "[spectrum]") {
  // single crossing bond: D = p(1)*(2n+1)/(n*(2n+1)) ... hand formula 17/72 at n=8
  auto g = build_walk_generator(nn_rate(), 8);
  const double v = upper_bound_test_function(g);
  CHECK(v == Catch::Approx(17.0 / 72.0).epsilon(1e-13));
  CHECK(v >= spectral_gap(g).gap);

  auto p = TransitionRate::power_law(1.0);
  for (int n : {8, 16, 32, 64}) {
    auto gw = build_walk_generator(p, n);
    const double u = upper_bound_test_function(gw);
    CHECK(u >= spectral_gap(gw).gap);
    // window frozen from the derivation sweep: values 12.13 .. 20.21
    const double scaled = u * double(2 * n + 1);
    CHECK(scaled >= 11.0);
    CHECK(scaled <= 21.0);
  }

  Generator notwalk;
  notwalk.init(3);
  notwalk.add_rate(0, 1, 1.0);
  notwalk.add_rate(1, 0, 1.0);
  notwalk.add_rate(1, 2, 1.0);
  notwalk.add_rate(2, 1, 1.0);
  notwalk.finalize();
  CHECK_THROWS_AS(upper_bound_test_function(notwalk), contract_error);
}

TEST_CASE("symmetrized matrix is symmetric and spectra match", "[spectrum]") {
  // walk with non-uniform equilibrium does not arise; check on a generator
  // built by hand with detailed balance
  Generator g;
  g.init(3);
  g.mu = {0.2, 0.3, 0.5};
  // rates satisfying mu_i r_ij = mu_j r_ji
  g.add_rate(0, 1, 3.0);
  g.add_rate(1, 0, 2.0);
  g.add_rate(1, 2, 5.0);
  g.add_rate(2, 1, 3.0);
  g.finalize();
  CHECK(g.detailed_balance_residual() <= 1e-15);
  // raw similarity transform is symmetric to 1e-12 relative
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double sij = -std::sqrt(g.mu[i]) * g.rate_at(i, j) / std::sqrt(g.mu[j]);
      const double sji = -std::sqrt(g.mu[j]) * g.rate_at(j, i) / std::sqrt(g.mu[i]);
      worst = std::max(worst, std::abs(sij - sji));
      scale = std::max(scale, std::abs(sij));
    }
  CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("eigenvalue sum equals the trace", "[spectrum]") {
  auto g = build_walk_generator(TransitionRate::power_law(1.0), 8);
  auto es = eigh(g.symmetrized_dense(), g.dim);
  const double sum = std::accumulate(es.values.begin(), es.values.end(), 0.0);
  CHECK(sum == Catch::Approx(g.trace_neg_l()).epsilon(1e-10));
}

TEST_CASE("gap is monotone under rate domination", "[spectrum]") {
  std::uint64_t s = 1234;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> vals(8);
    for (auto& v : vals) v = 0.05 + rnd01(s);
    auto p = TransitionRate::table(vals, 1.0, TableTail::zero);
    auto bumped = vals;
    bumped[0] += 0.5;  // nearest-neighbor perturbation
    auto p2 = TransitionRate::table(bumped, 1.0, TableTail::zero);
    const double a = spectral_gap(build_walk_generator(p, 4)).gap;
    const double b = spectral_gap(build_walk_generator(p2, 4)).gap;
    CHECK(a <= b + 1e-12);
  }
}

TEST_CASE("scaling sweep: slopes and failure marking", "[spectrum]") {
  std::vector<int> ns;
  for (int n = 4; n <= 64; ++n) ns.push_back(n);

  const auto nn = gap_scaling_sweep(nn_rate(), ns);
  CHECK(std::abs(nn.slope + 2.0) <= 0.10);

  // complete graph at every box size: gap = 2n+1, slope +1
  auto c = TransitionRate::table(std::vector<double>(128, 1.0), 1.0, TableTail::zero);
  const auto cg = gap_scaling_sweep(c, {4, 8, 16, 32});
  CHECK(cg.slope == Catch::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(gap_scaling_sweep(nn_rate(), {}), parameter_error);
  CHECK_THROWS_AS(gap_scaling_sweep(nn_rate(), {4, 4}), parameter_error);

  // points that need rate values past the stored anchors fail individually;
  // the sweep continues and marks them
  auto tiny = TransitionRate::lacunary(1.0, {1, 4, 9, 16, 25});
  const auto sweep = gap_scaling_sweep(tiny, {2, 4, 20});
  CHECK(sweep.failures == 1);
  CHECK(sweep.rows[2].error != "");
  CHECK(sweep.rows[0].error == "");
}
