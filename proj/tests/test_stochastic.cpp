#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rieszlab/stochastic.hpp"

using namespace rieszlab;

namespace {

Eigen::ArrayXd one(double x) { return Eigen::ArrayXd::Constant(1, x); }

SimpleFunction two_level_step() {
  SimpleFunction s(1);
  s.add(Interval::right_open(0.0, 0.5), one(1.0)).add(Interval::closed(0.5, 1.0), one(2.0));
  return s;
}

}  // namespace

TEST_CASE("Brownian ensemble construction") {
  CHECK_THROWS_AS(BrownianEnsemble(1, 1.0, 10, 1), ParameterError);
  CHECK_THROWS_AS(BrownianEnsemble(5, 1.0, 0, 1), ParameterError);
  CHECK_THROWS_AS(BrownianEnsemble(5, 0.0, 10, 1), ParameterError);

  const BrownianEnsemble b(20, 2.0, 50, 7);
  CHECK(b.dt() == doctest::Approx(0.04));
  CHECK(b.at(0) == Element(20));
  for (long p = 0; p < 20; ++p) CHECK(b.path(p)[0] == 0.0);

  // Paths depend only on (seed, index), not on the ensemble size.
  const BrownianEnsemble bigger(40, 2.0, 50, 7);
  CHECK(b.path(13) == bigger.path(13));
  CHECK(b.path(13) != BrownianEnsemble(20, 2.0, 50, 8).path(13));
  CHECK(b.path(3) != b.path(4));
  CHECK_THROWS_AS(b.path(20), ParameterError);
}

TEST_CASE("Brownian increments: variance and independence") {
  const long m = 20000;
  const BrownianEnsemble b(m, 1.0, 100, 2024);
  const Eigen::MatrixXd cols = b.at_indices({0, 50, 100});
  const Element bt(Eigen::ArrayXd(cols.col(2).array()));
  CHECK(std::abs(sample_variance(bt) - 1.0) <= 3.0 * std::sqrt(2.0 / m));
  const Element first(Eigen::ArrayXd(cols.col(1).array() - cols.col(0).array()));
  const Element second(Eigen::ArrayXd(cols.col(2).array() - cols.col(1).array()));
  CHECK(std::abs(sample_correlation(first, second)) <= 3.0 / std::sqrt(static_cast<double>(m)));
  CHECK(std::abs(sample_variance(first) - 0.5) <= 3.0 * 0.5 * std::sqrt(2.0 / m));
}

TEST_CASE("forward-sum stochastic integral") {
  const BrownianEnsemble b(2000, 1.0, 200, 11);
  const Element bt = b.at(b.steps());

  // Telescoping: bit-identical to B_T.
  CHECK(ito_integrate(Integrand::deterministic("one", [](double) { return 1.0; }), b) == bt);
  CHECK(ito_integrate(Integrand::deterministic("zero", [](double) { return 0.0; }), b) == Element(2000));

  // int B dB = (B_T^2 - sum dB^2) / 2 path by path.
  const auto self = ito_integrate(
      Integrand::adapted("B", [](long, double, std::span<const double> h) { return h.back(); }), b);
  for (long p = 0; p < 50; ++p) {
    std::vector<double> inc;
    b.increments(p, inc);
    double qv = 0.0;
    for (double d : inc) qv += d * d;
    const double end = b.path(p).back();
    CHECK(self.value(p) == doctest::Approx(0.5 * (end * end - qv)).epsilon(1e-12));
  }

  Integrand peek = Integrand::deterministic("peek", [](double) { return 1.0; });
  peek.lookahead = 1;
  CHECK_THROWS_AS(ito_integrate(peek, b), PreconditionError);

  // A deterministic step integrand has mean zero.
  const auto step = ito_integrate(two_level_step(), b);
  const double sigma = std::sqrt(0.5 * 1.0 + 0.5 * 4.0);
  CHECK(std::abs(sample_mean(step)) <= 3.0 * sigma / std::sqrt(2000.0));
}

TEST_CASE("step integrands through the simple-function integral") {
  const BrownianEnsemble b(500, 1.0, 100, 5);
  const SimpleFunction s = two_level_step();
  const Element via_measure = ito_integrate(s, b);
  const Element via_sum = ito_integrate(Integrand::deterministic("step", [s](double t) { return s(t)(0); }), b);
  CHECK((via_measure.values() - via_sum.values()).abs().maxCoeff() <= 1e-12);
  // Representation independence: refining the cells changes nothing.
  const Element refined = ito_integrate(s.refined(4), b);
  CHECK((refined.values() - via_measure.values()).abs().maxCoeff() <= 1e-12);

  // Off-grid cut points snap to the next grid time.
  SimpleFunction off(1);
  off.add(Interval::right_open(0.0, 0.333), one(3.0));
  const Element cut = ito_integrate(off, b);
  const Eigen::MatrixXd cols = b.at_indices({0, 34});
  CHECK((cut.values() - 3.0 * (cols.col(1).array() - cols.col(0).array())).abs().maxCoeff() <= 1e-12);

  SimpleFunction vec(2);
  vec.add(Interval::closed(0, 1), Eigen::ArrayXd::Ones(2));
  CHECK_THROWS_AS(ito_integrate(vec, b), DimensionError);
}

TEST_CASE("Ito isometry") {
  const BrownianEnsemble b(20000, 1.0, 200, 99);
  const auto s = two_level_step();
  const auto reports = isometry_check({{"one", [](double) { return 1.0; }},
                                       {"t", [](double t) { return t; }},
                                       {"step", [s](double t) { return s(t)(0); }},
                                       {"zero", [](double) { return 0.0; }}},
                                      b, {0.5});
  REQUIRE(reports.size() == 4);
  CHECK(reports[0].expected == doctest::Approx(1.0));
  CHECK(reports[1].expected == doctest::Approx(1.0 / 3));
  CHECK(reports[2].expected == doctest::Approx(2.5));
  for (const auto& r : reports) {
    CHECK_MESSAGE(r.passed(), r.integrand);
    CHECK(std::abs(r.mean) <= 3.0 * r.mean_standard_error + 1e-300);
  }
  CHECK(reports[3].second_moment == 0.0);
  CHECK(reports[3].z == 0.0);
  CHECK(reports[1].expected_discrete == doctest::Approx(1.0 / 3 - 1.0 / 400 + 1.0 / 240000).epsilon(1e-12));
}

TEST_CASE("path tables round-trip through CSV") {
  const BrownianEnsemble b(3, 1.0, 8, 4);
  std::stringstream ss;
  b.write_csv(ss);
  const std::string text = ss.str();
  CHECK(text.rfind("path,0,0.125,", 0) == 0);
  const PathTable t = read_path_csv(ss);
  CHECK(t.times == b.times());
  CHECK(t.values == b.materialize());

  std::istringstream bad("path,0,1\n0,0,abc\n");
  CHECK_THROWS_AS(read_path_csv(bad), ParseError);
  std::istringstream ragged("path,0,1\n0,0\n");
  CHECK_THROWS_AS(read_path_csv(ragged), ParseError);
  std::istringstream header("time,0,1\n");
  CHECK_THROWS_AS(read_path_csv(header), ParseError);
}
