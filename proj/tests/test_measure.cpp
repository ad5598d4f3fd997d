#include <cmath>
#include <random>

#include "doctest.h"
#include "rieszlab/measure.hpp"

using namespace rieszlab;

TEST_CASE("log metric is a distance on R+") {
  const Domain d = Domain::positive_half_line();
  CHECK(d.distance(1.0, std::exp(2.0)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(d.distance(-1.0, 1.0), DomainError);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = std::exp(u(rng)), b = std::exp(u(rng)), c = std::exp(u(rng));
    CHECK(d.distance(a, c) <= d.distance(a, b) + d.distance(b, c) + 1e-12);
    CHECK(d.distance(a, b) == d.distance(b, a));
  }
}

TEST_CASE("measures of intervals and exhausting sets") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const MeasureSpace haar = MeasureSpace::haar();
  CHECK(leb.measure(Interval::closed(0, 2)) == 2.0);
  CHECK(haar.measure(Interval::closed(1, std::exp(1.0))) == doctest::Approx(1.0));
  CHECK(std::isinf(haar.measure(Interval::open(0, 1))));
  for (long m = 1; m < 5; ++m) {
    CHECK(haar.measure(haar.exhausting_set(m)) == doctest::Approx(2.0 * m));
    CHECK(leb.measure(leb.exhausting_set(m)) == doctest::Approx(2.0 * m));
    CHECK(haar.measure(haar.exhausting_set(m + 1)) > haar.measure(haar.exhausting_set(m)));
  }
  // Additivity on adjacent intervals.
  CHECK(haar.measure(Interval::closed(0.5, 2)) ==
        doctest::Approx(haar.measure(Interval::closed(0.5, 1)) + haar.measure(Interval::closed(1, 2))));
  const MeasureSpace w = MeasureSpace::weighted(Domain::real_line(), [](double t) { return 2.0 * t; }, "2t");
  CHECK(w.measure(Interval::closed(0, 1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interval sets merge and complement") {
  const IntervalSet s{Interval::closed(0, 1), Interval::closed(0.5, 2), Interval::open(3, 4)};
  REQUIRE(s.pieces().size() == 2);
  CHECK(s.pieces()[0].hi == 2.0);
  const IntervalSet c = s.complement_in(Interval::closed(-1, 5));
  CHECK(c.pieces().size() == 3);
  CHECK(MeasureSpace::lebesgue().measure(c) == doctest::Approx(6.0 - 3.0));
  CHECK(c.contains(3.0));
  CHECK_FALSE(c.contains(1.0));
}

TEST_CASE("quadrature reference values") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const MeasureSpace haar = MeasureSpace::haar();
  CHECK(integrate_scalar(leb, [](double t) { return t; }, Interval::closed(0, 1)) == doctest::Approx(0.5).epsilon(1e-14));

  const auto div = quadrature_reference(scalar_field([](double t) { return 1.0 / t; }), Interval::closed(0, 1), leb);
  CHECK(div.any_diverged());
  CHECK(std::isinf(div.scalar()));

  const auto sq = quadrature_reference(scalar_field([](double t) { return 1.0 / std::sqrt(t); }), Interval::closed(0, 1), leb);
  CHECK_FALSE(sq.any_diverged());
  CHECK(sq.scalar() == doctest::Approx(2.0).epsilon(1e-10));

  // Moment kernel with n = 4 has total Haar mass 1.
  QuadratureOptions o;
  o.breakpoints = {1.0};
  const auto mass = quadrature_reference(scalar_field([](double t) { return t < 1.0 ? 4.0 * std::pow(t, 4) : 0.0; }),
                                         haar.carrier(), haar, o);
  CHECK(std::abs(mass.scalar() - 1.0) < 1e-12);

  const auto total = quadrature_reference(scalar_field([](double) { return 1.0; }), haar.carrier(), haar);
  CHECK(total.any_diverged());

  const auto gauss = quadrature_reference(scalar_field([](double t) { return std::exp(-t * t); }), leb.carrier(), leb);
  CHECK(gauss.scalar() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("vector integrands diverge entrywise") {
  const MeasureSpace haar = MeasureSpace::haar();
  const Field f = [](double t) {
    Eigen::ArrayXd v(2);
    v << (t < 1 ? t : 1.0 / t), 1.0;
    return v;
  };
  QuadratureOptions o;
  o.breakpoints = {1.0};
  const auto r = integrate_field(haar, f, haar.carrier(), o);
  CHECK_FALSE(r.diverged(0));
  CHECK(r.diverged(1));
  CHECK(r.value(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("integrals over unions of intervals") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const IntervalSet s{Interval::closed(0, 1), Interval::closed(2, 3)};
  const auto r = integrate_field(leb, scalar_field([](double t) { return t; }), s);
  CHECK(r.scalar() == doctest::Approx(0.5 + 2.5).epsilon(1e-13));
}

TEST_CASE("panel rules agree on values and divergence") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const MeasureSpace haar = MeasureSpace::haar();
  struct Case {
    ScalarField f;
    Interval a;
    const MeasureSpace* ms;
    std::vector<double> breaks;
  };
  const std::vector<Case> cases{
      {[](double t) { return std::exp(31.0 * std::log(t)); }, Interval::left_open(0, 1), &haar, {}},
      {[](double t) { return std::abs(t - 0.3); }, Interval::closed(0, 1), &leb, {0.3}},
      {[](double t) { return 1.0 / std::sqrt(t); }, Interval::closed(0, 1), &leb, {}},
      {[](double t) { return t > 0 ? std::log(1.0 / t) : 0.0; }, Interval::closed(0, 1), &leb, {}},
      {[](double t) { return 1.0 / (1.0 + t * t); }, leb.carrier(), &leb, {}},
      {[](double t) { return t > 0 ? 1.0 / t : 0.0; }, Interval::closed(0, 1), &leb, {}},
      {[](double t) { return t > 0 ? 1.0 / (t * t) : 0.0; }, Interval::closed(0, 1), &leb, {}},
      {[](double) { return 1.0; }, haar.carrier(), &haar, {}},
  };
  for (const auto& c : cases) {
    QuadratureOptions mid, gk;
    mid.rule = PanelRule::MidpointRichardson;
    gk.rule = PanelRule::GaussKronrod;
    mid.breakpoints = gk.breakpoints = c.breaks;
    const auto a = integrate_field(*c.ms, scalar_field(c.f), c.a, mid);
    const auto b = integrate_field(*c.ms, scalar_field(c.f), c.a, gk);
    CHECK(a.diverged(0) == b.diverged(0));
    if (!a.diverged(0)) CHECK(a.scalar() == doctest::Approx(b.scalar()).epsilon(1e-9));
  }
}
