#include <cmath>
#include <numbers>
#include <ostream>

#include "rieszlab/experiment.hpp"

namespace rieszlab {

namespace {

using std::numbers::e;
using std::numbers::pi;

Eigen::ArrayXd one(double x) { return Eigen::ArrayXd::Constant(1, x); }

Eigen::ArrayXd pair(double a, double b) {
  Eigen::ArrayXd v(2);
  v << a, b;
  return v;
}

// f on the closed support, zero elsewhere.
Field supported(ScalarField f, Interval c) {
  return [f = std::move(f), c](double t) { return one(c.contains(t) ? f(t) : 0.0); };
}

FunctionFixture lebesgue_fn(ScalarField f, double a, double b, double exact, std::vector<double> breaks = {}) {
  const Interval c = Interval::closed(a, b);
  breaks.push_back(a);
  breaks.push_back(b);
  return {supported(std::move(f), c), std::move(breaks), c, MeasureSpace::lebesgue(), one(exact), std::nullopt};
}

FunctionFixture haar_fn(ScalarField f, double a, double b, double exact, std::vector<double> breaks = {}) {
  FunctionFixture x = lebesgue_fn(std::move(f), a, b, exact, std::move(breaks));
  x.ms = MeasureSpace::haar();
  return x;
}

FunctionFixture vector_fn(std::function<Eigen::ArrayXd(double)> f, double a, double b, Eigen::ArrayXd exact) {
  const Interval c = Interval::closed(a, b);
  Field g = [f = std::move(f), c](double t) -> Eigen::ArrayXd {
    return c.contains(t) ? f(t) : Eigen::ArrayXd::Zero(2).eval();
  };
  return {std::move(g), {a, b}, c, MeasureSpace::lebesgue(), std::move(exact), std::nullopt};
}

double log_tent(double t) { return t > 0.0 ? std::max(0.0, 1.0 - std::abs(std::log(t)) / std::log(4.0)) : 0.0; }

void add_suite(FixtureRegistry& r, std::vector<std::string>& ids) {
  auto add = [&](std::string id, std::string anchor, FunctionFixture f) {
    ids.push_back(id);
    r.add({std::move(id), "integral", std::move(anchor), std::move(f)});
  };
  const std::string poly = "polynomial on a compact interval, exact antiderivative";
  add("suite-linear", poly, lebesgue_fn([](double t) { return t; }, 0, 1, 0.5));
  add("suite-square", poly, lebesgue_fn([](double t) { return t * t; }, 0, 1, 1.0 / 3));
  add("suite-cubic-signed", poly + ", changes sign", lebesgue_fn([](double t) { return t * t * t - t; }, -1, 2, 2.25));
  add("suite-sine-arch", "one arch of sin(pi t)", lebesgue_fn([](double t) { return std::sin(pi * t); }, 0, 1, 2 / pi));
  add("suite-exponential", "exp on [0, 1]", lebesgue_fn([](double t) { return std::exp(t); }, 0, 1, e - 1));
  add("suite-arctan-density", "1 / (1 + t^2) on [0, 1], integral pi / 4",
      lebesgue_fn([](double t) { return 1 / (1 + t * t); }, 0, 1, pi / 4));
  add("suite-kink", "|t - 0.3|, a kink inside the support",
      lebesgue_fn([](double t) { return std::abs(t - 0.3); }, 0, 1, 0.29, {0.3}));
  add("suite-two-level-step", "step taking 1 then 3, a jump at 1/2",
      lebesgue_fn([](double t) { return t < 0.5 ? 1.0 : 3.0; }, 0, 1, 2.0, {0.5}));
  add("suite-cosine-arch", "cos on [-pi/2, pi/2]", lebesgue_fn([](double t) { return std::cos(t); }, -pi / 2, pi / 2, 2.0));
  add("suite-sqrt", "square root, infinite slope at 0", lebesgue_fn([](double t) { return std::sqrt(t); }, 0, 1, 2.0 / 3));
  add("suite-t-log-t", "t ln t, negative with a logarithmic slope at 0",
      lebesgue_fn([](double t) { return t > 0 ? t * std::log(t) : 0.0; }, 0, 1, -0.25));
  add("suite-tent", "tent 1 - |t| on [-1, 1]", lebesgue_fn([](double t) { return 1 - std::abs(t); }, -1, 1, 1.0, {0.0}));
  add("suite-staircase", "floor(4t) / 4, three jumps",
      lebesgue_fn([](double t) { return std::floor(4 * t) / 4; }, 0, 1, 0.375, {0.25, 0.5, 0.75}));
  add("suite-oscillating", "sin^2(3t) over [0, pi]",
      lebesgue_fn([](double t) { return std::pow(std::sin(3 * t), 2); }, 0, pi, pi / 2));
  add("suite-vector-linear", "(t, 1 - t) in R^2",
      vector_fn([](double t) { return pair(t, 1 - t); }, 0, 1, pair(0.5, 0.5)));
  add("suite-vector-trig", "(sin t, cos t) in R^2 over a quarter period",
      vector_fn([](double t) { return pair(std::sin(t), std::cos(t)); }, 0, pi / 2, pair(1, 1)));
  add("suite-haar-constant", "1 on [1, e] under dt/t", haar_fn([](double) { return 1.0; }, 1, e, 1.0));
  add("suite-haar-log", "ln t on [1, e] under dt/t", haar_fn([](double t) { return std::log(t); }, 1, e, 0.5));
  add("suite-haar-log-tent", "tent in ln t on [1/4, 4] under dt/t, integral ln 4",
      haar_fn(log_tent, 0.25, 4, std::log(4.0), {1.0}));
  add("suite-haar-identity", "t on [1, 2] under dt/t, integral 1", haar_fn([](double t) { return t; }, 1, 2, 1.0));
}

SequenceFixture vitali_family(double power) {
  SequenceFixture s;
  s.fn.term = [power](long n, double t) {
    const double h = 1.0 / static_cast<double>(n);
    return one(t > 0.0 && t < h ? std::pow(static_cast<double>(n), power) : 0.0);
  };
  s.fn.breakpoints = [](long n) { return std::vector<double>{0.0, 1.0 / static_cast<double>(n)}; };
  s.window = Interval::closed(0, 1);
  s.probes = [](long n) { return IntervalSet{Interval::open(0.0, 1.0 / static_cast<double>(n))}; };
  s.l1 = [power](long n) { return std::pow(static_cast<double>(n), power - 1.0); };
  s.hypotheses = power == 0.0;
  return s;
}

FixtureRegistry build() {
  FixtureRegistry r;
  r.add({"moment-kernel", "operators", "moment kernel n z^n on (0, 1), Mellin type, unit mass", moment_kernel()});
  r.add({"indicator-kernel", "operators", "indicator of (0, 1) as a Mellin kernel, infinite Haar mass",
         indicator_kernel()});
  r.add({"doubled-moment-kernel", "operators", "twice the moment kernel, mass 2, does not reproduce constants",
         scaled_kernel(moment_kernel(), 2.0)});
  r.add({"moving-average-kernel", "operators", "Urysohn moving average n chi_[s, s + 1/n](t) u on the line",
         moving_average_kernel()});

  r.add({"log-tent", "operators", "tent in ln t supported in [1/4, 4], peak 1 at t = 1",
         FunctionFixture{scalar_field(log_tent), {0.25, 1.0, 4.0}, Interval::closed(0.25, 4), MeasureSpace::haar(),
                         one(std::log(4.0)), std::nullopt}});
  r.add({"ramp", "operators", "t chi_(0, 1], modular distance to its moment means 1 / (2(n + 1))",
         FunctionFixture{scalar_field([](double t) { return t > 0.0 && t <= 1.0 ? t : 0.0; }), {1.0},
                         Interval::closed(0, 1), MeasureSpace::haar(), one(1.0), std::nullopt}});

  std::vector<std::string> ids;
  add_suite(r, ids);

  r.add({"vitali-shrinking-indicator", "integral", "chi_(0, 1/n): in measure and equiabsolutely continuous",
         vitali_family(0.0)});
  r.add({"vitali-spike", "integral", "n chi_(0, 1/n): in measure but not equiabsolutely continuous, mass 1",
         vitali_family(1.0)});

  auto orlicz = [](ScalarField f, std::vector<double> breaks, std::string phi, OrliczClass cls) {
    FunctionFixture x{scalar_field(std::move(f)), std::move(breaks), Interval::closed(0, 1), MeasureSpace::lebesgue(), {}, std::nullopt};
    return OrliczFixture{std::move(x), std::move(phi), cls};
  };
  r.add({"orlicz-quarter-power", "modular", "t^(-1/4) on (0, 1] with phi = t^2: finite modular at every scale",
         orlicz([](double t) { return t > 0 && t <= 1 ? std::pow(t, -0.25) : 0.0; }, {0.0, 1.0}, "square",
                OrliczClass::Finite)});
  r.add({"orlicz-cube-quarter-power", "modular", "t^(-1/4) on (0, 1] with phi = |t|^3",
         orlicz([](double t) { return t > 0 && t <= 1 ? std::pow(t, -0.25) : 0.0; }, {0.0, 1.0}, "power-3",
                OrliczClass::Finite)});
  r.add({"orlicz-log-exp", "modular", "ln(1/t) on (0, 1] with phi = e^t - 1 - t: rho(a f) = a^2 / (1 - a) below 1",
         orlicz([](double t) { return t > 0 && t <= 1 ? -std::log(t) : 0.0; }, {0.0, 1.0}, "exp", OrliczClass::Orlicz)});
  r.add({"orlicz-inverse-sqrt", "modular", "t^(-1/2) on (0, 1] with phi = t^2: rho(a f) infinite for a > 0",
         orlicz([](double t) { return t > 0 && t <= 1 ? 1 / std::sqrt(t) : 0.0; }, {0.0, 1.0}, "square",
                OrliczClass::Neither)});

  auto ito = [](ScalarField f, double integral, double energy, std::vector<double> breaks) {
    return FunctionFixture{scalar_field(std::move(f)), std::move(breaks), Interval::closed(0, 1),
                           MeasureSpace::lebesgue(), one(integral), energy};
  };
  r.add({"ito-one", "stochastic", "f = 1: the integral telescopes to B_T, int f^2 = 1",
         ito([](double) { return 1.0; }, 1.0, 1.0, {})});
  r.add({"ito-time", "stochastic", "f(t) = t, int f^2 = 1/3", ito([](double t) { return t; }, 0.5, 1.0 / 3, {})});
  r.add({"ito-step", "stochastic", "step 1 on [0, 1/2), 2 on [1/2, 1], int f^2 = 5/2",
         ito([](double t) { return t < 0.5 ? 1.0 : 2.0; }, 1.5, 2.5, {0.5})});
  return r;
}

}  // namespace

void FixtureRegistry::add(Fixture f) {
  if (contains(f.id)) throw ParameterError("fixture registry: duplicate id '" + f.id + "'");
  fixtures_.push_back(std::move(f));
}

bool FixtureRegistry::contains(const std::string& id) const {
  return std::any_of(fixtures_.begin(), fixtures_.end(), [&](const Fixture& f) { return f.id == id; });
}

const Fixture& FixtureRegistry::get(const std::string& id) const {
  for (const auto& f : fixtures_)
    if (f.id == id) return f;
  throw LookupError("no fixture named '" + id + "'");
}

std::vector<const Fixture*> FixtureRegistry::list(const std::string& module) const {
  std::vector<const Fixture*> out;
  for (const auto& f : fixtures_)
    if (module.empty() || f.module == module) out.push_back(&f);
  return out;
}

const FixtureRegistry& standard_fixtures() {
  static const FixtureRegistry reg = build();
  return reg;
}

const std::vector<std::string>& integration_suite_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto* f : standard_fixtures().list("integral"))
      if (f->id.rfind("suite-", 0) == 0) out.push_back(f->id);
    return out;
  }();
  return ids;
}

void list_fixtures(const FixtureRegistry& reg, std::ostream& os, const std::string& module) {
  for (const auto* f : reg.list(module)) os << f->id << '\t' << f->module << '\t' << f->anchor << '\n';
}

ConvexPhi phi_by_name(const std::string& name) {
  if (name == "square") return ConvexPhi::square();
  if (name == "exp")
    return ConvexPhi::lifted(
        "exp", [](double t) { return std::expm1(t) - t; }, [](double t) { return std::expm1(t); });
  if (name.rfind("power-", 0) == 0) {
    try {
      std::size_t used = 0;
      const int p = std::stoi(name.substr(6), &used);
      if (used == name.size() - 6) return ConvexPhi::power(p);
    } catch (const std::logic_error&) {
    }
  }
  throw LookupError("unknown convex function '" + name + "'");
}

}  // namespace rieszlab
