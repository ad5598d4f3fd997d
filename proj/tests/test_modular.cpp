#include <cmath>
#include <random>

#include "doctest.h"
#include "rieszlab/modular.hpp"

using namespace rieszlab;
using CS = Structure<double>;

namespace {

Eigen::ArrayXd one(double x) { return Eigen::ArrayXd::Constant(1, x); }

double tent(double t) { return std::max(0.0, 1.0 - std::abs(t - 1.0)); }

Field ramp() {
  return scalar_field([](double t) { return t > 0.0 && t <= 1.0 ? t : 0.0; });
}

Modular square_modular(MeasureSpace ms = MeasureSpace::lebesgue()) {
  return Modular{ConvexPhi::square(), std::move(ms), CS::ordinary(100, 1e-3), {}};
}

ConvexPhi exp_phi() {
  return ConvexPhi::lifted(
      "exp-1-t", [](double t) { return std::expm1(t) - t; }, [](double t) { return std::expm1(t); });
}

}  // namespace

TEST_CASE("phi acts entrywise") {
  CHECK(ConvexPhi::square()(Element{2, -3}) == Element{4, 9});
  CHECK(ConvexPhi::power(3)(Element{-2}) == Element{8});
  CHECK(ConvexPhi::square()(Element(3)) == Element(3));
  CHECK(exp_phi()(Element{0.0}) == Element{0.0});
  CHECK_THROWS_AS(ConvexPhi::power(2), ParameterError);
  const Element big = exp_phi()(Element{1e4, 1});
  CHECK(big.is_infinite(0));
  CHECK_FALSE(big.is_infinite(1));
  CHECK(ConvexPhi::square()(Element::plus_infinity(1)).is_infinite(0));
  CHECK(ConvexPhi::power(4).slope(Element{2}) == Element{32});
  CHECK(ConvexPhi::square().slope_bound(Element{3}) == Element{6});
}

TEST_CASE("convexity audit") {
  std::mt19937_64 rng(5);
  const Element u{2, 3, 1};
  std::vector<std::pair<Element, Element>> samples;
  for (int k = 0; k < 1000; ++k) {
    Element::Values s(3), v(3);
    for (Index i = 0; i < 3; ++i) {
      std::uniform_real_distribution<double> d(-u.value(i), u.value(i));
      s(i) = d(rng);
      v(i) = d(rng);
    }
    samples.emplace_back(Element(s), Element(v));
  }
  for (const auto& phi : {ConvexPhi::square(), ConvexPhi::power(3), ConvexPhi::power(5), exp_phi(),
                          ConvexPhi::lifted("cosh-1", [](double t) { return std::cosh(t) - 1; })}) {
    const auto r = convexity_audit(phi, samples, u);
    CHECK_MESSAGE(r.passed(), phi.name());
    CHECK(r.worst_margin >= 0.0);
  }

  const auto zero = convexity_audit(ConvexPhi::square(), {{Element{1.5}, Element{-1}}}, Element{2}, {0.0});
  CHECK(zero.passed());
  CHECK(ConvexPhi::square().scalar(0.0 * 1.5) == 0.0 * ConvexPhi::square().scalar(1.5));

  const auto concave = ConvexPhi::lifted("sqrt-abs", [](double t) { return std::sqrt(std::abs(t)); });
  const auto bad = convexity_audit(concave, {{Element{0.1}, Element{0.5}}, {Element{1.0}, Element{0.25}}}, Element{1});
  CHECK_FALSE(bad.passed());
  CHECK(bad.support_violations > 0);
  CHECK(bad.worst_margin < 0.0);
  REQUIRE(bad.witness.has_value());

  CHECK_THROWS_AS(convexity_audit(ConvexPhi::square(), {{Element{3}, Element{0}}}, Element{1}), PreconditionError);
}

TEST_CASE("Jensen gap") {
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const Interval c = Interval::closed(0, 1);
  const auto one_weight = [](double) { return 1.0; };
  const auto g = jensen_gap(ConvexPhi::square(), one_weight, scalar_field([](double t) { return t; }), leb, c);
  CHECK(std::abs(g.gap.value(0) - 1.0 / 12) <= 1e-6);

  const auto constant = jensen_gap(ConvexPhi::square(), one_weight, scalar_field([](double) { return 0.7; }), leb, c);
  CHECK(std::abs(constant.gap.value(0)) <= 1e-12);

  const auto half = jensen_gap(ConvexPhi::square(), [](double) { return 0.5; }, scalar_field([](double t) { return t; }), leb, c);
  CHECK(half.weight_mass == doctest::Approx(0.5));
  CHECK(half.gap.value(0) >= -1e-6);
  // Closed form: int t^2 / 2 - (int t / 2)^2 = 1/6 - 1/16.
  CHECK(half.gap.value(0) == doctest::Approx(1.0 / 6 - 1.0 / 16).epsilon(1e-10));

  CHECK_THROWS_AS(jensen_gap(ConvexPhi::square(), [](double) { return 2.0; }, scalar_field([](double t) { return t; }), leb, c),
                  PreconditionError);
  CHECK_THROWS_AS(jensen_gap(ConvexPhi::square(), [](double) { return 0.0; }, scalar_field([](double t) { return t; }), leb, c),
                  PreconditionError);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  const std::vector<ConvexPhi> phis{ConvexPhi::square(), ConvexPhi::power(3), ConvexPhi::power(4), exp_phi()};
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng), freq = 4 * w(rng), mass = w(rng);
    const Field f = [a, b, freq](double t) -> Eigen::ArrayXd {
      Eigen::ArrayXd v(2);
      v << a * std::sin(freq * t) + b * t, b - a * t * t;
      return v;
    };
    const auto r = jensen_gap(phis[static_cast<std::size_t>(k) % phis.size()],
                              [mass](double t) { return 2 * mass * t; }, f, leb, c);
    CHECK((r.gap.values() >= -1e-6).all());
  }
}

TEST_CASE("the Orlicz modular") {
  const Modular sq = square_modular();
  CHECK(modular_eval(sq, ramp(), {0.0, 1.0}).value(0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(modular_eval(sq, scalar_field([](double) { return 0.0; })) == Element{0.0});
  const Modular haar = square_modular(MeasureSpace::haar());
  CHECK(modular_eval(haar, scalar_field([](double) { return 1.0; })).is_infinite(0));
}

TEST_CASE("modular axioms on fixture pairs") {
  const Modular sq{ConvexPhi::power(3), MeasureSpace::lebesgue(), CS::ordinary(100, 1e-3), {}};
  const std::vector<Field> fs{scalar_field([](double t) { return tent(t); }),
                              scalar_field([](double t) { return std::exp(-t * t) * std::sin(3 * t); }),
                              scalar_field([](double t) { return -2.0 / (1 + t * t); }),
                              scalar_field([](double t) { return std::abs(t) < 1 ? t : 0.0; })};
  const std::vector<double> breaks{-1.0, 0.0, 1.0, 2.0};
  for (const auto& f : fs) {
    const Field neg = [&f](double t) -> Eigen::ArrayXd { return -f(t); };
    CHECK(modular_eval(sq, neg, breaks).value(0) == doctest::Approx(modular_eval(sq, f, breaks).value(0)).epsilon(1e-12));
    for (const auto& h : fs) {
      for (double a : {0.0, 0.3, 0.5, 1.0}) {
        const Field mix = [&, a](double t) -> Eigen::ArrayXd { return a * f(t) + (1 - a) * h(t); };
        const double lhs = modular_eval(sq, mix, breaks).value(0);
        CHECK(lhs <= modular_eval(sq, f, breaks).value(0) + modular_eval(sq, h, breaks).value(0) + 1e-10);
      }
      const Field lo = [&](double t) -> Eigen::ArrayXd { return f(t).abs().min(h(t).abs()); };
      const Field hi = [&](double t) -> Eigen::ArrayXd { return f(t).abs().max(h(t).abs()); };
      CHECK(modular_eval(sq, lo, breaks).value(0) <= modular_eval(sq, hi, breaks).value(0) + 1e-12);
    }
  }
  // Convexity on positive functions.
  const Field p = scalar_field([](double t) { return tent(t); });
  const Field q = scalar_field([](double t) { return std::exp(-t * t); });
  for (double a : {0.2, 0.5, 0.9}) {
    const Field mix = [&, a](double t) -> Eigen::ArrayXd { return a * p(t) + (1 - a) * q(t); };
    CHECK(modular_eval(sq, mix, breaks).value(0) <=
          a * modular_eval(sq, p, breaks).value(0) + (1 - a) * modular_eval(sq, q, breaks).value(0) + 1e-10);
  }
}

TEST_CASE("Orlicz classes") {
  const Modular sq = square_modular();
  const auto bounded = orlicz_membership(sq, scalar_field([](double t) { return 5.0 * tent(t); }), {0.0, 1.0, 2.0});
  CHECK(bounded.cls == OrliczClass::Finite);

  const auto zero = orlicz_membership(sq, scalar_field([](double) { return 0.0; }));
  CHECK(zero.cls == OrliczClass::Finite);

  // rho(alpha f) = alpha^2 / (1 - alpha) for alpha < 1, infinite beyond.
  const Modular ex{exp_phi(), MeasureSpace::lebesgue(), CS::ordinary(100, 1e-3), {}};
  const Field log_inv = scalar_field([](double t) { return t > 0.0 && t <= 1.0 ? -std::log(t) : 0.0; });
  const auto r = orlicz_membership(ex, log_inv, {0.0, 1.0});
  CHECK(r.cls == OrliczClass::Orlicz);
  for (std::size_t k = 0; k < r.alphas.size(); ++k) {
    const double a = r.alphas[k];
    if (a >= 1.0) {
      CHECK(r.values[k].is_infinite(0));
    } else {
      CHECK(r.values[k].value(0) == doctest::Approx(a * a / (1 - a)).epsilon(1e-8));
    }
  }
  // A constant on the whole line has infinite modular at every scale.
  CHECK(orlicz_membership(sq, scalar_field([](double) { return 1.0; })).cls == OrliczClass::Neither);
}

TEST_CASE("modular convergence search") {
  const Modular sq = square_modular();
  const Field f = scalar_field([](double t) { return std::exp(-t * t); });
  FieldSequence fn;
  fn.term = [&f](long n, double t) -> Eigen::ArrayXd { return f(t) + one(tent(t) / n); };
  fn.breakpoints = [](long) { return std::vector<double>{0.0, 1.0, 2.0}; };
  ModularSearchOptions o;
  o.report_upto = 5;
  o.d1 = 1.0;
  const auto v = modular_convergence_search(sq, fn, f, o);
  CHECK(v.verdict == Verdict::True);
  CHECK(v.alpha == 1.0);
  CHECK(v.solid);
  REQUIRE(v.values.size() == 5);
  for (long n = 1; n <= 5; ++n) CHECK(v.values[n - 1] == doctest::Approx(2.0 / 3 / (n * n)).epsilon(1e-10));
  CHECK(*v.analytic_lambda == 0.5);
  CHECK(v.trace.size() == 11);

  FieldSequence same;
  same.term = [&f](long, double t) { return f(t); };
  const auto s = modular_convergence_search(sq, same, f);
  CHECK(s.verdict == Verdict::True);
  CHECK(s.alpha == 1.0);

  FieldSequence off;
  off.term = [&f](long, double t) -> Eigen::ArrayXd { return f(t) + one(tent(t)); };
  off.breakpoints = fn.breakpoints;
  const auto bad = modular_convergence_search(sq, off, f, {3, 0, {}});
  CHECK(bad.verdict == Verdict::False);
  CHECK(bad.alpha == 0.0);
}
