#include <cmath>

#include "doctest.h"
#include "rieszlab/integral.hpp"

using namespace rieszlab;
using CS = Structure<double>;

namespace {

Eigen::ArrayXd vec(std::initializer_list<double> v) {
  Eigen::ArrayXd a(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) a(i++) = x;
  return a;
}

Eigen::ArrayXd one(double x) { return Eigen::ArrayXd::Constant(1, x); }

double tent(double t) { return std::max(0.0, 1.0 - std::abs(t - 1.0)); }

FieldSequence indicator_sequence(double height_power) {
  return FieldSequence::of_simple([height_power](long n) {
    SimpleFunction s(1);
    s.add(Interval::open(0.0, 1.0 / n), one(std::pow(static_cast<double>(n), height_power)));
    return s;
  });
}

}  // namespace

TEST_CASE("integrals of simple functions") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  SimpleFunction f(1);
  f.add(Interval::closed(0, 1), one(3)).add(Interval::left_open(1, 2), one(1));
  CHECK(integrate_simple(f, Interval::closed(0, 2), leb).value(0) == doctest::Approx(4.0));

  SimpleFunction g(2);
  g.add(Interval::closed(0, 1), vec({1, 2}));
  CHECK(integrate_simple(g, Interval::closed(0, 1), leb) == Element{1, 2});

  SimpleFunction h(1);
  h.add(Interval::closed(1, std::exp(1.0)), one(1));
  CHECK(integrate_simple(h, Interval::closed(1, std::exp(1.0)), MeasureSpace::haar()).value(0) == doctest::Approx(1.0));

  SimpleFunction inf(1);
  inf.add(Interval::closed(0, kInf), one(1));
  CHECK_THROWS_AS(integrate_simple(inf, Interval::closed(0, kInf), leb), InfiniteMeasureError);
  SimpleFunction zero_on_inf(1);
  zero_on_inf.add(Interval::closed(0, kInf), one(0));
  CHECK(integrate_simple(zero_on_inf, Interval::closed(0, kInf), leb).value(0) == 0.0);
  CHECK(integrate_simple(f, Interval::closed(5, 5), leb).value(0) == 0.0);
}

TEST_CASE("simple integrals do not depend on the representation") {
  const MeasureSpace haar = MeasureSpace::haar();
  SimpleFunction f(2);
  f.add(Interval::closed(0.5, 2), vec({1, -3})).add(Interval::left_open(2, 7), vec({0.25, 4}));
  const IntervalSet a{Interval::closed(0.7, 1.5), Interval::closed(3, 9)};
  const Element base = integrate_simple(f, a, haar);
  for (int parts : {2, 3, 7, 16}) {
    const Element r = integrate_simple(f.refined(parts), a, haar);
    CHECK(r.value(0) == doctest::Approx(base.value(0)).epsilon(1e-12));
    CHECK(r.value(1) == doctest::Approx(base.value(1)).epsilon(1e-12));
  }
}

TEST_CASE("defining sequences by cell infima") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  DefiningSequenceOptions o;
  o.levels = 12;
  o.deltas = OSequence<double>{[](long n) { return Element::scalar(std::ldexp(1.0, -static_cast<int>(n))); }, 12};
  const auto lin = build_defining_sequence(scalar_field([](double t) { return t; }), leb, Interval::closed(0, 1), o);
  for (long n = 1; n <= 12; ++n) CHECK(lin.sup_error(n) <= std::ldexp(1.0, -static_cast<int>(n)) + 1e-15);
  CHECK(lin.monotone());

  const auto c = build_defining_sequence(scalar_field([](double) { return 2.5; }), leb, Interval::closed(0, 3));
  const SimpleFunction f1 = c.term(1);
  REQUIRE(f1.cells().size() == 2);
  for (const auto& cell : f1.cells()) CHECK(cell.coeff(0) == 2.5);
  CHECK(c.integral(1, Interval::closed(-1, 10))(0) == 7.5);
  CHECK(c.sup_error(1) == 0.0);

  DefiningSequenceOptions one_level;
  one_level.levels = 1;
  one_level.deltas = OSequence<double>{[](long) { return Element::scalar(1.0); }, 1};
  const auto t1 = build_defining_sequence(scalar_field(tent), leb, Interval::closed(0, 2), one_level);
  REQUIRE(t1.cells(1) == 2);
  // Brute-force minima on each unit cell.
  for (long j = 0; j < 2; ++j) {
    double m = kInf;
    for (int i = 0; i <= 1000; ++i) m = std::min(m, tent(j + i / 1000.0));
    CHECK(t1.value(1, j + 0.5)(0) == doctest::Approx(m).epsilon(1e-12));
  }

  CHECK_THROWS_AS(build_defining_sequence(scalar_field([](double t) { return 1.0 / t; }), leb, Interval::closed(0, 1)),
                  PreconditionError);
}

TEST_CASE("convergence in measure") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const CS cs = CS::ordinary(400, 1e-2);
  const Field zero = scalar_field([](double) { return 0.0; });
  const auto spikes = converges_in_measure(indicator_sequence(1.0), zero, Interval::closed(0, 1), leb, cs);
  CHECK(spikes.verdict == Verdict::True);
  CHECK(spikes.exceptional_measure == doctest::Approx(1.0 / 400));
  CHECK(spikes.uniform_verdict != Verdict::True);

  FieldSequence same;
  same.term = [](long, double t) { return one(std::sin(t)); };
  const auto u = converges_in_measure(same, scalar_field([](double t) { return std::sin(t); }), Interval::closed(0, 1), leb, cs);
  CHECK(u.verdict == Verdict::True);
  CHECK(u.uniform_verdict == Verdict::True);

  FieldSequence stuck = FieldSequence::of_simple([](long) {
    SimpleFunction s(1);
    s.add(Interval::closed(0, 1), one(1));
    return s;
  });
  CHECK(converges_in_measure(stuck, zero, Interval::closed(0, 1), leb, cs).verdict == Verdict::False);
  CHECK_THROWS_AS(converges_in_measure(stuck, zero, Interval::closed(0, kInf), leb, cs), InfiniteMeasureError);
}

TEST_CASE("convergence in measure is closed under lattice operations") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const CS cs = CS::ordinary(400, 1e-2);
  const Interval a = Interval::closed(0, 1);
  auto f = [](long n, double t) { return t + (n % 2 ? 1.0 : -1.0) / n; };
  auto h = [](long n, double t) { return t * t - 1.0 / n; };
  const std::vector<std::pair<std::function<double(double, double)>, std::function<double(double)>>> ops = {
      {[](double x, double y) { return x + y; }, [](double t) { return t + t * t; }},
      {[](double x, double y) { return std::max(x, y); }, [](double t) { return std::max(t, t * t); }},
      {[](double x, double y) { return std::min(x, y); }, [](double t) { return std::min(t, t * t); }},
      {[](double x, double) { return std::abs(x - 0.5); }, [](double t) { return std::abs(t - 0.5); }},
      {[](double x, double) { return -3.0 * x; }, [](double t) { return -3.0 * t; }},
  };
  for (const auto& [op, lim] : ops) {
    FieldSequence s;
    s.term = [&, op = op](long n, double t) { return one(op(f(n, t), h(n, t))); };
    CHECK(converges_in_measure(s, scalar_field(lim), a, leb, cs).verdict == Verdict::True);
  }
}

TEST_CASE("equiabsolute continuity") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const CS cs = CS::ordinary(200, 1e-2);
  EacOptions o;
  o.probes = [](long n) { return IntervalSet{Interval::open(0.0, 1.0 / n)}; };

  const auto spikes = equiabsolute_continuity_audit(indicator_sequence(1.0), leb, cs, o);
  CHECK(spikes.probes_vanish == Verdict::True);
  CHECK(spikes.small_sets == Verdict::False);
  CHECK(spikes.failing_clause() == "small-sets");

  const auto flat = equiabsolute_continuity_audit(indicator_sequence(0.0), leb, cs, o);
  CHECK(flat.passed());
  CHECK(flat.failing_clause().empty());

  // A fixed integrable function is absolutely continuous.
  FieldSequence fixed;
  fixed.term = [](long, double t) { return one(std::exp(-std::abs(t))); };
  EacOptions wide = o;
  wide.m_horizon = 16;
  const auto ac = equiabsolute_continuity_audit(fixed, leb, CS::ordinary(200, 1e-2), wide);
  CHECK(ac.small_sets == Verdict::True);
  CHECK(ac.tails == Verdict::True);
}

TEST_CASE("the integral matches closed forms") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const CS cs = CS::ordinary(100, 1e-4);
  const auto lin = integrate(scalar_field([](double t) { return t; }), Interval::closed(0, 1), leb, Interval::closed(0, 1), cs);
  CHECK(std::abs(lin.value.value(0) - 0.5) <= 1e-4);
  CHECK(lin.verdict == Verdict::True);
  CHECK(std::abs(lin.reference(0) - 0.5) < 1e-12);

  const Interval c{1.0, std::exp(1.0), false, false};
  const Field u = [](double) { return vec({1, -2, 0.5}); };
  const auto hu = integrate(u, c, MeasureSpace::haar(), c, cs);
  CHECK(hu.value.value(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hu.value.value(1) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(hu.value.value(2) == doctest::Approx(0.5).epsilon(1e-12));

  // h(g) v with scalar h: the integral is (int h) v.
  const Field hv = [](double t) -> Eigen::ArrayXd { return t * t * vec({1, -2}); };
  const auto r = integrate(hv, Interval::closed(0, 1), leb, Interval::closed(0, 1), cs);
  CHECK(std::abs(r.value.value(0) - 1.0 / 3) <= 1e-4);
  CHECK(std::abs(r.value.value(1) + 2.0 / 3) <= 1e-4);

  CHECK_THROWS_AS(integrate(scalar_field([](double t) { return 1.0 / t; }), Interval::closed(0, 1), leb,
                            Interval::closed(0, 1), cs),
                  NotIntegrableError);
}

TEST_CASE("two defining sequences give the same integral") {
  const MeasureSpace haar = MeasureSpace::haar();
  const CS cs = CS::ordinary(100, 1e-4);
  const Interval c = Interval::closed(0.25, 4);
  DefiningSequenceOptions ternary;
  ternary.base = 3;
  ternary.levels = 10;
  const Field f = scalar_field([](double t) { return std::sin(3 * std::log(t)) * (1 - std::abs(std::log(t)) / std::log(4.0)); });
  for (const Interval& a : {c, Interval::closed(0.5, 1.5), Interval::closed(1, 3)}) {
    const auto x = integrate(f, a, haar, c, cs);
    const auto y = integrate(f, a, haar, c, cs, ternary);
    CHECK(std::abs(x.value.value(0) - y.value.value(0)) <= 2e-4);
    CHECK(std::abs(x.value.value(0) - x.reference(0)) <= 1e-4);
  }
}

TEST_CASE("the integral is monotone") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const CS cs = CS::ordinary(100, 1e-4);
  const Interval c = Interval::closed(-1, 2);
  const auto lo = integrate(scalar_field([](double t) { return t * t - 1; }), c, leb, c, cs);
  const auto hi = integrate(scalar_field([](double t) { return std::abs(t) - 0.5; }), c, leb, c, cs);
  // t^2 - 1 <= |t| - 0.5 on [-1, 2]
  CHECK(lo.value.value(0) <= hi.value.value(0));
  const auto hiv = integrate(scalar_field([](double t) { return t * t; }), c, leb, c, cs);
  CHECK(lo.value.value(0) <= hiv.value.value(0));
}

TEST_CASE("Vitali and dominated audits") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const CS cs = CS::ordinary(200, 1e-2);
  VitaliOptions o;
  o.finite_sets = {Interval::closed(0, 1)};
  o.eac.probes = [](long n) { return IntervalSet{Interval::open(0.0, 1.0 / n)}; };
  o.report_upto = 50;

  const auto good = vitali_audit(indicator_sequence(0.0), leb, cs, o);
  CHECK(good.hypotheses);
  CHECK(good.l1_verdict == Verdict::True);
  CHECK(good.consistent());

  const auto bad = vitali_audit(indicator_sequence(1.0), leb, cs, o);
  CHECK_FALSE(bad.hypotheses);
  CHECK(bad.eac.failing_clause() == "small-sets");
  for (double v : bad.l1) CHECK(std::abs(v - 1.0) <= 1e-6);
  CHECK(bad.l1_verdict == Verdict::False);

  VitaliOptions dom;
  dom.finite_sets = {Interval::closed(0, 2)};
  dom.dominating = scalar_field(tent);
  dom.report_upto = 10;
  FieldSequence scaled;
  scaled.term = [](long n, double t) { return one(tent(t) / n); };
  scaled.breakpoints = [](long) { return std::vector<double>{0.0, 1.0, 2.0}; };
  const auto d = vitali_audit(scaled, leb, cs, dom);
  CHECK(d.dominated);
  CHECK(d.hypotheses);
  CHECK(d.l1_verdict == Verdict::True);
  CHECK(d.l1[3] == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("products of integrable functions") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const CS cs = CS::ordinary(100, 1e-4);
  const Interval c = Interval::closed(0, 1);
  const auto id = scalar_field([](double t) { return t; });
  CHECK(std::abs(product_integrability(id, id, leb, c, cs).value.value(0) - 1.0 / 3) <= 1e-4);
  CHECK(product_integrability(id, scalar_field([](double) { return 0.0; }), leb, c, cs).value.value(0) == 0.0);
  const auto q = scalar_field([](double t) { return std::cos(t); });
  CHECK(std::abs(product_integrability(scalar_field([](double) { return 1.0; }), q, leb, c, cs).value.value(0) -
                 std::sin(1.0)) <= 1e-4);
  CHECK_THROWS_AS(product_integrability(scalar_field([](double t) { return 1.0 / t; }), q, leb, c, cs), PreconditionError);
  CHECK_THROWS_AS(product_integrability(id, q, leb, Interval::closed(0, kInf), cs), PreconditionError);
}
