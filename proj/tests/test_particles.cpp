#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>

#include "stablewalk/particles.hpp"

using namespace stablewalk;

namespace {

double rnd01(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return double((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
}

}  // namespace

TEST_CASE("exclusion enumeration and ranking", "[particles]") {
  CHECK(enumerate_exclusion(1, 2).count == 3);
  CHECK(enumerate_exclusion(2, 2).count == 10);
  CHECK(enumerate_exclusion(1, 0).count == 1);
  CHECK(enumerate_exclusion(3, 3).count == 35);
  CHECK_THROWS_AS(enumerate_exclusion(1, 4), parameter_error);
  CHECK_THROWS_AS(enumerate_exclusion(1, -1), parameter_error);

  for (int ell = 0; ell <= 5; ++ell) {
    const auto e = enumerate_exclusion(2, ell);
    for (std::size_t r = 0; r < e.count; ++r) {
      CHECK(e.rank(e.states[r]) == r);
      CHECK(e.unrank(r) == e.states[r]);
      CHECK(std::popcount(e.states[r]) == ell);
    }
    // lexicographic order of occupied-position tuples is strictly increasing
    for (std::size_t r = 1; r < e.count; ++r) CHECK(e.states[r] != e.states[r - 1]);
  }
}

TEST_CASE("single-particle exclusion is the walk", "[particles]") {
  auto p = TransitionRate::power_law(1.0);
  const auto e = enumerate_exclusion(2, 1);
  const auto gx = build_exclusion_generator(p, e);
  const auto gw = build_walk_generator(p, 2);
  REQUIRE(gx.dim == gw.dim);
  for (std::size_t i = 0; i < gw.dim; ++i)
    for (std::size_t j = 0; j < gw.dim; ++j)
      CHECK(gx.rate_at(i, j) == gw.rate_at(i, j));
}

TEST_CASE("exclusion generator basics", "[particles]") {
  auto p = TransitionRate::power_law(1.0);
  const auto e = enumerate_exclusion(1, 2);
  const auto g = build_exclusion_generator(p, e);
  CHECK(g.dim == 3);
  CHECK(g.row_sum_residual() <= 1e-13 * g.trace_neg_l());
  CHECK(g.detailed_balance_residual() == 0.0);
  CHECK(spectral_gap(g).gap == Catch::Approx(1.5).epsilon(1e-12));

  CHECK_THROWS_AS(build_exclusion_generator(p, enumerate_exclusion(1, 0)), structural_error);
  CHECK_THROWS_AS(build_exclusion_generator(p, enumerate_exclusion(1, 3)), structural_error);
}

TEST_CASE("interchange equality at small volume", "[particles]") {
  auto p = TransitionRate::power_law(1.0);
  const auto rep = verify_aldous(p, 2, 1e-8);
  CHECK(rep.pass);
  CHECK(rep.worst_deviation <= 1e-10);
  CHECK(rep.rows.size() == 4);
  CHECK(rep.rows[0].deviation <= 1e-12);  // ell = 1 is the walk itself

  auto nn = TransitionRate::table({1.0}, 1.0, TableTail::zero);
  CHECK(verify_aldous(nn, 3, 1e-8).pass);
}

TEST_CASE("particle-hole symmetry of exclusion gaps", "[particles]") {
  auto p = TransitionRate::power_law(1.0);
  for (int n : {2, 3})
    for (int ell = 1; ell <= n; ++ell) {
      const double a =
          spectral_gap(build_exclusion_generator(p, enumerate_exclusion(n, ell))).gap;
      const double b =
          spectral_gap(build_exclusion_generator(p, enumerate_exclusion(n, 2 * n + 1 - ell))).gap;
      CHECK(a == Catch::Approx(b).margin(1e-10));
    }
}

TEST_CASE("zero-range enumeration and ranking", "[particles]") {
  CHECK(enumerate_zero_range(1, 2).count == 6);
  CHECK(enumerate_zero_range(1, 1).count == 3);
  CHECK(enumerate_zero_range(1, 0).count == 1);
  CHECK(enumerate_zero_range(2, 6).count == 210);
  CHECK_THROWS_AS(enumerate_zero_range(2, 30, 1000), capacity_error);

  for (auto [n, ell] : {std::pair{1, 3}, std::pair{2, 2}}) {
    const auto e = enumerate_zero_range(n, ell);
    const int w = e.sites();
    for (std::size_t r = 0; r < e.count; ++r) {
      CHECK(e.rank(e.state(r)) == r);
      int sum = 0;
      for (int i = 0; i < w; ++i) sum += e.state(r)[i];
      CHECK(sum == ell);
    }
  }
}

TEST_CASE("zero-range equilibrium measures", "[particles]") {
  const auto e = enumerate_zero_range(1, 3);

  // indicator interaction: all factorials are 1, uniform measure
  const auto mu_ind = zero_range_measure(InteractionRate::indicator(), e);
  for (double w : mu_ind.weights) CHECK(w == Catch::Approx(1.0 / double(e.count)).epsilon(1e-12));
  CHECK(mu_ind.z == Catch::Approx(double(e.count)).epsilon(1e-12));

  // linear interaction: weights proportional to multinomial 1/prod(xi!)
  const auto mu_lin = zero_range_measure(InteractionRate::linear(), e);
  double total = 0.0;
  for (double w : mu_lin.weights) total += w;
  CHECK(total == Catch::Approx(1.0).margin(1e-12));
  auto fact = [](int k) { return k <= 1 ? 1.0 : k == 2 ? 2.0 : 6.0; };
  for (std::size_t r = 0; r < e.count; ++r) {
    double unnorm = 1.0;
    for (int i = 0; i < e.sites(); ++i) unnorm /= fact(e.state(r)[i]);
    CHECK(mu_lin.weights[r] == Catch::Approx(unnorm / mu_lin.z).epsilon(1e-12));
  }
}

TEST_CASE("linear zero-range gap equals the walk gap", "[particles]") {
  auto p = TransitionRate::power_law(1.0);
  for (int n : {1, 2}) {
    const double walk = spectral_gap(build_walk_generator(p, n)).gap;
    for (int ell = 1; ell <= 4; ++ell) {
      const auto e = enumerate_zero_range(n, ell);
      const auto m = zero_range_measure(InteractionRate::linear(), e);
      const auto g = build_zero_range_generator(p, InteractionRate::linear(), e, m);
      CHECK(g.detailed_balance_residual() <= 1e-12);
      CHECK(spectral_gap(g).gap == Catch::Approx(walk).margin(1e-9));
    }
  }
}

TEST_CASE("indicator zero-range with one particle is the walk", "[particles]") {
  auto p = TransitionRate::power_law(1.0);
  const auto e = enumerate_zero_range(1, 1);
  const auto m = zero_range_measure(InteractionRate::indicator(), e);
  const auto g = build_zero_range_generator(p, InteractionRate::indicator(), e, m);
  const double walk = spectral_gap(build_walk_generator(p, 1)).gap;
  CHECK(spectral_gap(g).gap == Catch::Approx(walk).epsilon(1e-12));
}

TEST_CASE("inconsistent measure is caught at construction", "[particles]") {
  auto p = TransitionRate::power_law(1.0);
  const auto e = enumerate_zero_range(1, 2);
  auto m = zero_range_measure(InteractionRate::linear(), e);
  m.weights[0] *= 2.0;  // break detailed balance
  CHECK_THROWS_AS(build_zero_range_generator(p, InteractionRate::linear(), e, m),
                  structural_error);
}

TEST_CASE("interaction rate classification", "[particles]") {
  const auto lin = classify_interaction(InteractionRate::linear());
  CHECK(lin.case_i);
  CHECK(lin.l0 == 1);
  CHECK(lin.eps0 > 0.0);

  const auto ind = classify_interaction(InteractionRate::indicator());
  CHECK_FALSE(ind.case_i);

  // strictly growing table: case i with a scanned witness
  const auto grow = classify_interaction(InteractionRate::table({1.0, 1.5, 2.0, 2.5, 3.0, 3.5}));
  CHECK(grow.case_i);
  CHECK(grow.eps0 > 0.0);

  // oscillating table: no uniform increment at any shift
  CHECK_THROWS_AS(classify_interaction(InteractionRate::table({1.0, 2.0, 1.0, 2.0, 1.0, 2.0})),
                  classification_error);
}

TEST_CASE("interaction rate contracts", "[particles]") {
  CHECK(InteractionRate::linear()(0) == 0.0);
  CHECK(InteractionRate::linear()(3) == 3.0);
  CHECK(InteractionRate::indicator()(5) == 1.0);
  CHECK(InteractionRate::linear().andjel_sup(64) == 1.0);
  CHECK(InteractionRate::indicator().andjel_sup(64) == 1.0);
  CHECK_THROWS_AS(InteractionRate::table({1.0, 0.0}), parameter_error);
  CHECK_THROWS_AS(InteractionRate::table({})(1), parameter_error);
  CHECK_THROWS_AS(InteractionRate::table({1.0})(5), parameter_error);
}

TEST_CASE("zero-range gap table with the theorem normalization", "[particles]") {
  auto p = TransitionRate::power_law(1.0);
  const auto rep = theorem3_check(p, InteractionRate::indicator(), {1, 2}, {1, 2, 3});
  CHECK_FALSE(rep.classification.case_i);
  CHECK(rep.normalized_min > 0.0);
  for (const auto& row : rep.rows) {
    CHECK(row.gap > 0.0);
    const double rho = double(row.ell) / double(2 * row.n + 1);
    CHECK(row.normalized_gap ==
          Catch::Approx(row.gap * double(2 * row.n + 1) * (1.0 + rho) * (1.0 + rho))
              .epsilon(1e-12));
  }
  // one particle: the walk gap exactly
  const double walk1 = spectral_gap(build_walk_generator(p, 1)).gap;
  CHECK(rep.rows[0].gap == Catch::Approx(walk1).margin(1e-10));
}

TEST_CASE("complete-graph zero-range reference scalings", "[particles]") {
  // constant rate on the box = complete graph on 2n+1 sites
  for (int n : {1, 2, 3}) {
    auto c = TransitionRate::table(std::vector<double>(std::size_t(2 * n), 1.0), 1.0,
                                   TableTail::zero);
    const int sites = 2 * n + 1;
    {
      // case i (g = k): independent particles, gap = walk gap = number of sites
      const auto e = enumerate_zero_range(n, 2);
      const auto m = zero_range_measure(InteractionRate::linear(), e);
      const auto g = build_zero_range_generator(c, InteractionRate::linear(), e, m);
      CHECK(spectral_gap(g).gap == Catch::Approx(double(sites)).epsilon(1e-10));
    }
    {
      // case ii: gap * (1+rho)^2 / sites stays in a fixed window
      const auto e = enumerate_zero_range(n, 4);
      const auto m = zero_range_measure(InteractionRate::indicator(), e);
      const auto g = build_zero_range_generator(c, InteractionRate::indicator(), e, m);
      const double rho = 4.0 / double(sites);
      const double scaled = spectral_gap(g).gap * (1.0 + rho) * (1.0 + rho) / double(sites);
      CHECK(scaled > 0.5);
      CHECK(scaled < 2.5);
    }
  }
}

TEST_CASE("two-step path bound for the zero-range Dirichlet pieces", "[particles]") {
  auto glin = InteractionRate::linear();
  const auto e = enumerate_zero_range(1, 2);
  const auto m = zero_range_measure(glin, e);

  // constant f: everything vanishes
  const std::vector<double> cf(e.count, 2.0);
  const auto null = moving_lemma_check(glin, e, m, cf, -1, 0, 1);
  CHECK(null.pass);
  CHECK(null.phi_xz == 0.0);

  // random f over all ordered site triples
  std::uint64_t s = 2024;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> f(e.count);
    for (auto& v : f) v = 2.0 * rnd01(s) - 1.0;
    for (int x = -1; x <= 1; ++x)
      for (int y = -1; y <= 1; ++y)
        for (int z = -1; z <= 1; ++z) {
          if (x == y || y == z) continue;
          CHECK(moving_lemma_check(glin, e, m, f, x, y, z).pass);
        }
    // degenerate triple x = z: left side is the null move
    const auto deg = moving_lemma_check(glin, e, m, f, 1, 0, 1);
    CHECK(deg.phi_xz == 0.0);
    CHECK(deg.pass);
  }
}
