#include <cmath>

#include "doctest.h"
#include "rieszlab/convergence.hpp"

using namespace rieszlab;
using Seq = LatticeSequence<double>;
using CS = Structure<double>;

namespace {

bool is_square(long n) {
  const long r = static_cast<long>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n;
}

Seq scalar_seq(std::function<double(long)> f, long horizon) {
  return {[f = std::move(f)](long n) { return Element::scalar(f(n)); }, horizon};
}

}  // namespace

TEST_CASE("Cesaro mean") {
  const long n = 1000;
  auto alt = cesaro_limit(scalar_seq([](long k) { return k % 2 ? -1.0 : 1.0; }, n), 1e-3);
  CHECK(std::abs(alt.value.value(0)) <= 1.0 / n);

  auto c = cesaro_limit(scalar_seq([](long) { return 2.5; }, n), 1e-3);
  CHECK(c.value.value(0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(c.verdict == Verdict::True);

  auto even = cesaro_limit(scalar_seq([](long k) { return k % 2 ? 0.0 : 1.0; }, 999), 1e-2);
  CHECK(std::abs(even.value.value(0) - 0.5) <= 1.0 / 999);

  CHECK_THROWS_AS(cesaro_limit(scalar_seq([](long) { return 1.0; }, 5), 1e-3), PreconditionError);
  Seq inf{[](long) { return Element::plus_infinity(1); }, 100};
  CHECK_THROWS_AS(cesaro_limit(inf, 1e-3), DomainError);
}

TEST_CASE("almost convergence") {
  const long n = 1000;
  auto periodic = almost_limit(scalar_seq([](long k) { return k % 2 ? 1.0 : 0.0; }, n), n / 10, 1e-2);
  // Window-average oracle over all offsets.
  double worst = 0.0;
  for (long m = 0; m < n / 10; ++m) {
    double s = 0.0;
    for (long k = m + 1; k <= m + n; ++k) s += k % 2 ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(s / n - periodic.value.value(0)));
  }
  CHECK(std::abs(periodic.value.value(0) - 0.5) <= 1.0 / n);
  CHECK(worst <= 1.0 / n);
  CHECK(periodic.verdict == Verdict::True);

  auto c = almost_limit(scalar_seq([](long) { return -4.0; }, n), 10, 1e-3);
  CHECK(c.value.value(0) == -4.0);
  CHECK(c.residual == 0.0);

  auto lin = almost_limit(scalar_seq([](long k) { return static_cast<double>(k); }, n), n / 10, 1e-3);
  CHECK(lin.verdict != Verdict::True);
}

TEST_CASE("order limit superior") {
  const Element u{1, 2};
  const Element v{0.5, 1};
  const long n = 200;
  Seq osc{[&](long k) { return (k % 2 ? -1.0 : 1.0) * u; }, n};
  CHECK(order_limsup(osc).value == u);

  Seq harm{[&](long k) { return (1.0 / k) * u; }, n};
  const auto h = order_limsup(harm);
  CHECK(h.value.value(0) == doctest::Approx(1.0 / n));
  CHECK(h.value.value(1) == doctest::Approx(2.0 / n));
  CHECK_FALSE(h.tail_bias_caveat);

  Seq mix{[&](long k) { return u + (k % 2 ? -1.0 : 1.0) * v; }, n};
  // Brute-force nested inf-sup over the evaluation window.
  Element brute = Element::plus_infinity(2);
  for (long m = n; m <= 2 * n; ++m) {
    Element sup = mix.term(m);
    for (long k = m; k <= 2 * n; ++k) sup = join(sup, mix.term(k));
    brute = meet(brute, sup);
  }
  CHECK(order_limsup(mix).value == brute);
  CHECK(order_limsup(mix).value == u + v);
  CHECK(order_limsup(mix).tail_bias_caveat);
}

TEST_CASE("filter limit superior") {
  Seq squares = scalar_seq([](long k) { return is_square(k) ? 1.0 : 0.0; }, 1000000);
  CHECK(filter_limsup(squares, FilterSpec::density(0.99)).value(0) == 0.0);
  CHECK(filter_limsup(squares, FilterSpec::cofinite()).value(0) == 1.0);

  Seq c = scalar_seq([](long) { return 3.0; }, 100);
  CHECK(filter_limsup(c, FilterSpec::cofinite()).value(0) == 3.0);
  CHECK(filter_limsup(c, FilterSpec::density()).value(0) == 3.0);
  CHECK(filter_limsup(c, FilterSpec::explicit_family({{1, 2, 3}, {2, 3, 5}})).value(0) == 3.0);

  Seq alt = scalar_seq([](long k) { return k % 2 ? -1.0 : 1.0; }, 100);
  CHECK(filter_limsup(alt, FilterSpec::cofinite()).value(0) == 1.0);
  CHECK(filter_limsup(alt, FilterSpec::cofinite()) == order_limsup(alt).value);
  // Odd indices only: the explicit filter sees -1.
  CHECK(filter_limsup(alt, FilterSpec::explicit_family({{1, 3, 5, 7}, {3, 5, 7, 9}})).value(0) == -1.0);
}

TEST_CASE("explicit families must have a nonempty intersection") {
  CHECK_THROWS_AS((FilterSpec::explicit_family({{1, 2}, {3, 4}})), InvalidFilterError);
  CHECK_THROWS_AS(FilterSpec::explicit_family({}), InvalidFilterError);
  CHECK_NOTHROW((FilterSpec::explicit_family({{1, 2}, {2, 4}})));
  CHECK_THROWS_AS(FilterSpec::density(0.3).validate(), ParameterError);
}

TEST_CASE("membership verdicts") {
  const Element x{1, -1};
  const Element u{1, 1};
  Seq conv{[&](long k) { return x + (1.0 / k) * u; }, 1000};
  CHECK(estimate_limit(conv, CS::ordinary(1000, 1e-2), x) == Verdict::True);
  CHECK(estimate_limit(conv, CS::ordinary(1000, 1e-2), Element{1, 0}) == Verdict::False);
  CHECK(limit(conv, CS::ordinary(1000, 1e-2)).value.value(0) == doctest::Approx(1.0).epsilon(1e-2));

  Seq squares{[&](long k) { return (is_square(k) ? 1.0 : 0.0) * u; }, 10000};
  CHECK(estimate_limit(squares, CS::filtered(FilterSpec::density(0.99), 10000, 1e-3), Element(2)) == Verdict::True);
  CHECK(estimate_limit(squares, CS::ordinary(10000, 1e-3), Element(2)) == Verdict::False);

  // Slow convergence is not yet resolved rather than failed.
  Seq slow = scalar_seq([](long k) { return 1.0 / std::sqrt(static_cast<double>(k)); }, 100);
  CHECK(estimate_limit(slow, CS::ordinary(100, 1e-3), Element::scalar(0.0)) == Verdict::Inconclusive);
}

TEST_CASE("relative-uniform convergence uses the regulator") {
  CS cs = CS::make(ConvergenceKind::RelativeUniform, 1000, 1e-2);
  cs.unit = Element{1, 100};
  Seq s{[](long k) { return Element{1.0 / k, 50.0 / k}; }, 1000};
  CHECK(estimate_limit(s, cs, Element(2)) == Verdict::True);
  cs.unit = Element{1, 1};
  CHECK(estimate_limit(s, cs, Element(2)) == Verdict::Inconclusive);
}

TEST_CASE("order convergence with an explicit regulator") {
  CS cs = CS::make(ConvergenceKind::Order, 500, 1e-2);
  Seq s = scalar_seq([](long k) { return 1.0 / k; }, 500);
  CHECK(estimate_limit(s, cs, Element::scalar(0.0)) == Verdict::True);
  Seq alt = scalar_seq([](long k) { return k % 2 ? -1.0 : 1.0; }, 500);
  CHECK(estimate_limit(alt, cs, Element::scalar(0.0)) == Verdict::False);
}

TEST_CASE("Cesaro and almost structures accept strongly summable sequences") {
  Seq squares = scalar_seq([](long k) { return is_square(k) ? 1.0 : 0.0; }, 10000);
  CHECK(estimate_limit(squares, CS::make(ConvergenceKind::Cesaro, 10000, 2e-2), Element::scalar(0.0)) == Verdict::True);
  CHECK(estimate_limit(squares, CS::make(ConvergenceKind::Almost, 10000, 2e-2), Element::scalar(0.0)) == Verdict::True);
  // (-1)^n has Cesaro mean 0 but its modulus does not: not strongly summable.
  Seq alt = scalar_seq([](long k) { return k % 2 ? -1.0 : 1.0; }, 1000);
  CHECK(estimate_limit(alt, CS::make(ConvergenceKind::Cesaro, 1000, 1e-2), Element::scalar(0.0)) == Verdict::False);
}

TEST_CASE("ordinary convergence coincides with the cofinite filter") {
  for (auto f : {std::function<double(long)>([](long k) { return 1.0 / k; }),
                 std::function<double(long)>([](long k) { return k % 2 ? -1.0 : 1.0; }),
                 std::function<double(long)>([](long k) { return std::sin(static_cast<double>(k)); })}) {
    Seq s = scalar_seq(f, 400);
    const auto a = limit(s, CS::ordinary(400, 1e-2));
    const auto b = limit(s, CS::filtered(FilterSpec::cofinite(), 400, 1e-2));
    CHECK(a.verdict == b.verdict);
    CHECK(a.value == b.value);
    CHECK(limsup(s, CS::ordinary(400, 1e-2)) == limsup(s, CS::filtered(FilterSpec::cofinite(), 400, 1e-2)));
  }
}

TEST_CASE("density-filter limsup ignores a density-one restriction") {
  const CS cs = CS::filtered(FilterSpec::density(0.99), 20000, 1e-3);
  const auto not_square = [](long k) { return !is_square(k); };
  for (auto f : {std::function<double(long)>([](long k) { return 1.0 + 1.0 / k; }),
                 std::function<double(long)>([](long k) { return is_square(k) ? 5.0 : 1.0 / k; }),
                 std::function<double(long)>([](long k) { return std::abs(std::sin(0.001 * k)); })}) {
    Seq s = scalar_seq(f, 20000);
    CHECK(h_restriction_gap(s, cs, not_square).value(0) <= 1e-3);
  }
}

TEST_CASE("norm filter limsup is real valued") {
  Seq s{[](long k) { return Element{1.0 / k, -2.0 / k}; }, 100};
  CHECK(norm_filter_limsup(s, FilterSpec::cofinite(), OrderUnit<double>::ones(2)) == doctest::Approx(2.0 / 100));
  const auto op = LimsupOperator<double>::companion(CS::make(ConvergenceKind::Cesaro, 100, 1e-2));
  CHECK(op.name() == "limsup/cesaro");
  CHECK(op(Seq{[](long) { return Element{2.0}; }, 100}).value(0) == doctest::Approx(2.0));
}

TEST_CASE("sign-flipped structure negates the limit") {
  CS broken = CS::ordinary(100, 1e-2);
  broken.sign_flipped = true;
  Seq s = scalar_seq([](long) { return 2.0; }, 100);
  const auto r = limit(s, broken);
  CHECK(r.value.value(0) == -2.0);
  CHECK(r.verdict == Verdict::True);
}
