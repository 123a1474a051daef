#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "stablewalk/rates.hpp"

using namespace stablewalk;

TEST_CASE("power-law rate evaluation", "[rates]") {
  auto q = TransitionRate::power_law(1.0);
  CHECK(q(1) == 1.0);
  CHECK(q(2) == 0.25);
  CHECK(q(-2) == 0.25);
  CHECK(q(0) == 0.0);
  auto qh = TransitionRate::power_law(0.5);
  CHECK(qh(4) == Catch::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("alpha outside (0,2) is rejected", "[rates]") {
  CHECK_THROWS_AS(TransitionRate::power_law(0.0), parameter_error);
  CHECK_THROWS_AS(TransitionRate::power_law(2.0), parameter_error);
  CHECK_THROWS_AS(TransitionRate::power_law(-1.0), parameter_error);
  CHECK_THROWS_AS(TransitionRate::q_zero(2.5), parameter_error);
}

TEST_CASE("power-law tail constant approaches 1/alpha", "[rates]") {
  auto q = TransitionRate::power_law(1.0);
  // x^alpha * tail -> 1/alpha; at x = 1e4 within 1%
  CHECK(q.tail_constant(10000) == Catch::Approx(1.0).margin(0.01));
  // monotone decrease toward the limit, within the remainder bound 1/(2x)
  double prev = 2.0;
  for (std::int64_t x : {100, 1000, 10000}) {
    const double v = q.tail_constant(x);
    CHECK(v > 1.0);
    CHECK(v <= 1.0 + 1.0 / double(x));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("certified tail bounds enclose the point value", "[rates]") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    auto q = TransitionRate::power_law(alpha);
    for (std::int64_t x : {1, 7, 100, 5000, 20000}) {
      const auto b = q.tail_sum_bounds(x);
      const double v = q.tail_sum(x);
      CHECK(b.lower <= v);
      CHECK(v <= b.upper);
      CHECK(b.width() >= 0.0);
    }
  }
}

TEST_CASE("power-law tail matches brute force", "[rates]") {
  auto q = TransitionRate::power_law(1.5);
  double brute = 0.0;
  for (std::int64_t y = 3; y <= 2000000; ++y) brute += std::pow(double(y), -2.5);
  // remainder beyond the brute-force horizon
  brute += std::pow(2000000.0, -1.5) / 1.5;
  CHECK(q.tail_sum(3) == Catch::Approx(brute).epsilon(1e-9));
}

TEST_CASE("q0 rate: values and power-law equivalence", "[rates]") {
  auto q0 = TransitionRate::q_zero(1.0);
  CHECK(q0(1) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(q0(2) == Catch::Approx(1.0 / 6.0).epsilon(1e-15));
  // q0(z) = alpha z^{-(1+alpha)} (1 + O(1/z)); within 0.2% at z = 1000
  CHECK(q0(1000) / (1.0 * std::pow(1000.0, -2.0)) == Catch::Approx(1.0).margin(0.002));
  // telescoping tail is exact
  CHECK(q0.tail_sum(1) == 1.0);
  CHECK(q0.tail_sum(10) == Catch::Approx(0.1).epsilon(1e-15));

  // sup and inf of q0/q over z <= 1e4 both finite and positive
  auto q = TransitionRate::power_law(1.0);
  double lo = 1e300, hi = 0.0;
  for (std::int64_t z = 1; z <= 10000; ++z) {
    const double r = q0(z) / q(z);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1e300);
  CHECK(hi == Catch::Approx(1.0).margin(0.01));  // q0/q -> alpha = 1, sup near small z... at z=1: 0.5/1
  CHECK(lo >= 0.5);
}

TEST_CASE("lacunary rate on the square anchors", "[rates]") {
  auto p = TransitionRate::lacunary_squares(1.0, 1000);
  CHECK(p(1) == Catch::Approx(0.75).epsilon(1e-15));
  CHECK(p(2) == 0.0);
  CHECK(p(3) == 0.0);
  CHECK(p(4) == Catch::Approx(0.25 - 1.0 / 9.0).epsilon(1e-14));
  CHECK(p(-4) == p(4));

  // telescoping: tail at every anchor equals z_l^{-alpha} exactly
  for (std::int64_t l : {1, 2, 3, 10, 31}) {
    const std::int64_t z = l * l;
    CHECK(p.tail_sum(z) == Catch::Approx(1.0 / double(z)).epsilon(1e-15));
    CHECK(p.tail_constant(z) == Catch::Approx(1.0).epsilon(1e-15));
  }
  // consistency: partial anchor sums telescope against the tail
  double partial = 0.0;
  for (std::int64_t l = 2; l < 30; ++l) partial += p(l * l);
  CHECK(partial + p.tail_sum(30 * 30) == Catch::Approx(p.tail_sum(4)).epsilon(1e-14));

  // queries past the stored anchors carry no silent answer
  auto tiny = TransitionRate::lacunary(1.0, {1, 4, 9, 16, 25});
  CHECK(tiny(16) == Catch::Approx(1.0 / 16.0 - 1.0 / 25.0));
  CHECK_THROWS_AS(tiny(25), accuracy_error);
  CHECK_THROWS_AS(tiny.tail_sum(26), accuracy_error);
}

TEST_CASE("lacunary anchors must increase from 1", "[rates]") {
  CHECK_THROWS_AS(TransitionRate::lacunary(1.0, {1, 4, 4, 9}), parameter_error);
  CHECK_THROWS_AS(TransitionRate::lacunary(1.0, {2, 4, 9}), parameter_error);
  CHECK_THROWS_AS(TransitionRate::lacunary(1.0, {1}), parameter_error);
}

TEST_CASE("rate symmetry and total mass", "[rates]") {
  const auto rates = {TransitionRate::power_law(0.7), TransitionRate::q_zero(1.3),
                      TransitionRate::lacunary_squares(1.0, 100)};
  for (const auto& p : rates) {
    CHECK(p(0) == 0.0);
    CHECK(p(1) > 0.0);
    for (std::int64_t z = 1; z <= 50; ++z) CHECK(p(z) == p(-z));
    CHECK(std::isfinite(p.total_rate()));
    CHECK(p.total_rate() == Catch::Approx(2.0 * p.tail_sum(1)).epsilon(1e-15));
    CHECK(p.in_dan());
  }
}

TEST_CASE("table rates and tail rules", "[rates]") {
  auto zero = TransitionRate::table({1.0, 0.5, 0.25}, 1.0, TableTail::zero);
  CHECK(zero(1) == 1.0);
  CHECK(zero(4) == 0.0);
  CHECK(zero.tail_sum(2) == 0.75);
  CHECK_FALSE(zero.in_dan());

  auto ext = TransitionRate::table({1.0, 0.25}, 1.0, TableTail::power_law, 2.0);
  CHECK(ext(3) == Catch::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(ext.in_dan());
  CHECK(ext.dan_constant().value() == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(ext.tail_sum(3) == Catch::Approx(2.0 * (detail::power_tail_sum(3, 1.0))).epsilon(1e-12));

  auto und = TransitionRate::table({1.0, 0.5});
  CHECK(und(2) == 0.5);
  CHECK(und(3) == 0.0);  // dynamics treat the undeclared tail as empty
  CHECK_THROWS_AS(und.tail_sum(1), accuracy_error);
  CHECK_FALSE(und.in_dan());
}

TEST_CASE("rate table parsing reports line numbers", "[rates]") {
  std::istringstream good("# demo\n1 1.0\n3 0.125\n\n2 0.5\n");
  auto p = TransitionRate::load_table(good, 1.0, TableTail::zero);
  CHECK(p(1) == 1.0);
  CHECK(p(2) == 0.5);
  CHECK(p(3) == 0.125);
  CHECK(p(-3) == 0.125);

  std::istringstream dup("1 1.0\n1 0.5\n");
  CHECK_THROWS_WITH(TransitionRate::load_table(dup), Catch::Matchers::ContainsSubstring("line 2"));
  std::istringstream negz("-1 1.0\n");
  CHECK_THROWS_AS(TransitionRate::load_table(negz), parse_error);
  std::istringstream missing("1\n");
  CHECK_THROWS_WITH(TransitionRate::load_table(missing),
                    Catch::Matchers::ContainsSubstring("line 1"));
  std::istringstream badv("1 -0.5\n");
  CHECK_THROWS_AS(TransitionRate::load_table(badv), parse_error);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(TransitionRate::load_table(empty), parse_error);
}

TEST_CASE("subpolynomiality scan", "[rates]") {
  const std::size_t n = 64;
  auto sq = SubpolynomialFunction::from_function(
      [](std::size_t x) { return double(x) * double(x); }, n, 2.0);
  CHECK(check_subpolynomial(sq, 2.0, n).pass);

  const auto fail = check_subpolynomial(sq, 1.0, n);
  CHECK_FALSE(fail.pass);
  CHECK(fail.x == 1);
  CHECK(fail.y == 1);
  CHECK(fail.lhs == 4.0);
  CHECK(fail.rhs == 2.0);

  auto expo = SubpolynomialFunction::from_function(
      [](std::size_t x) { return std::pow(2.0, double(x)); }, n, 4.0);
  CHECK_FALSE(check_subpolynomial(expo, 4.0, n).pass);
}

TEST_CASE("envelope bound", "[rates]") {
  const std::size_t n = 512;
  // K = 2 gives nu = 2
  auto sq = SubpolynomialFunction::from_function(
      [](std::size_t x) { return double(x) * double(x); }, n, 2.0);
  CHECK(sq.nu() == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(lemma1_bound_check(sq, 2.0, n).pass);

  auto lin = SubpolynomialFunction::from_function([](std::size_t x) { return double(x); }, n, 1.0);
  CHECK(lemma1_bound_check(lin, 1.0, n).pass);

  auto expo = SubpolynomialFunction::from_function(
      [](std::size_t x) { return std::pow(2.0, double(x) / 8.0); }, 64, 1.0);
  CHECK_THROWS_AS(lemma1_bound_check(expo, 1.0, 64), contract_error);
}

TEST_CASE("envelope property on randomized subpolynomial functions", "[rates]") {
  // scaled-down version of the acceptance randomization
  std::uint64_t state = 0xfeedULL;
  auto rnd = [&state]() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return double((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
  };
  const std::size_t n = 256;
  std::size_t accepted = 0;
  for (int trial = 0; trial < 400 && accepted < 100; ++trial) {
    const double beta1 = 2.0 * rnd(), beta2 = 2.0 * rnd();
    const double c1 = 0.1 + 5.0 * rnd(), c2 = 0.1 + 5.0 * rnd();
    SubpolynomialFunction phi;
    phi.K = std::max(1.0, std::pow(2.0, std::max(beta1, beta2) - 1.0));
    phi.values.resize(n);
    for (std::size_t x = 1; x <= n; ++x)
      phi.values[x - 1] = c1 * std::pow(double(x), beta1) + c2 * std::pow(double(x), beta2);
    if (!check_subpolynomial(phi, phi.K, n).pass) continue;
    ++accepted;
    CHECK(lemma1_bound_check(phi, phi.K, n).pass);
  }
  CHECK(accepted == 100);
}
