#include "rieszlab/modular.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rieszlab {

namespace {

constexpr double kDifferenceStep = 1e-6;

Eigen::ArrayXd apply_hat(const ConvexPhi& phi, const Eigen::ArrayXd& x) {
  Eigen::ArrayXd r(x.size());
  for (Index i = 0; i < x.size(); ++i) r(i) = std::isfinite(x(i)) ? phi.scalar(x(i)) : kInf;
  return r;
}

double slack_scale(std::initializer_list<double> terms) {
  double s = 1.0;
  for (double t : terms) s += std::abs(t);
  return 1e-9 * s;
}

}  // namespace

ConvexPhi ConvexPhi::square() {
  return ConvexPhi(PhiKind::Square, "square", 2, [](double t) { return t * t; }, [](double t) { return 2.0 * t; });
}

ConvexPhi ConvexPhi::power(int p) {
  if (p < 3) throw ParameterError("power phi needs an integer exponent p >= 3");
  return ConvexPhi(
      PhiKind::Power, "power" + std::to_string(p), p, [p](double t) { return std::pow(std::abs(t), p); },
      [p](double t) { return p * std::pow(std::abs(t), p - 2) * t; });
}

ConvexPhi ConvexPhi::lifted(std::string name, std::function<double(double)> phi_hat,
                            std::function<double(double)> derivative) {
  if (!phi_hat) throw ParameterError("lifted phi needs a scalar map");
  return ConvexPhi(PhiKind::Lifted, std::move(name), 0, std::move(phi_hat), std::move(derivative));
}

double ConvexPhi::derivative(double t) const {
  if (df_) return df_(t);
  return (f_(t + kDifferenceStep) - f_(t - kDifferenceStep)) / (2.0 * kDifferenceStep);
}

Element ConvexPhi::operator()(const Element& x) const {
  Element::Values v(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x.is_infinite(i)) {
      v(i) = kInf;
      continue;
    }
    const double r = f_(x.value(i));
    v(i) = std::isfinite(r) ? r : kInf;
  }
  return Element(v);
}

Element ConvexPhi::slope(const Element& v) const {
  if (v.has_infinite()) throw DomainError("slope at +inf");
  Element::Values b(v.size());
  for (Index i = 0; i < v.size(); ++i) b(i) = derivative(v.value(i));
  return Element(b);
}

Element ConvexPhi::slope_bound(const Element& u) const {
  if (u.has_infinite()) throw DomainError("slope bound over an unbounded order interval");
  Element::Values b(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u.value(i));
    b(i) = std::max(std::abs(derivative(a)), std::abs(derivative(-a)));
  }
  return Element(b);
}

ConvexityReport convexity_audit(const ConvexPhi& phi, const std::vector<std::pair<Element, Element>>& samples,
                                const Element& u, const std::vector<double>& xis) {
  ConvexityReport rep;
  const Element bound = phi.slope_bound(u);
  auto record = [&](double margin, const char* check, long& counter, const Element& s, const Element& v) {
    if (margin < 0.0) ++counter;
    if (rep.checks++ == 0 || margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_check = check;
      rep.witness = std::make_pair(s, v);
    }
  };
  for (const auto& [s, v] : samples) {
    Element::check_same_size(s, u);
    Element::check_same_size(v, u);
    if (!leq(abs(s), abs(u)) || !leq(abs(v), abs(u))) throw PreconditionError("convexity audit: sample outside [-u, u]");
    const Element ps = phi(s), pv = phi(v), beta = phi.slope(v);
    for (Index i = 0; i < u.size(); ++i) {
      const double si = s.value(i), vi = v.value(i);
      const double lin = pv.value(i) + beta.value(i) * (si - vi);
      const double support = ps.value(i) - lin + slack_scale({ps.value(i), pv.value(i), beta.value(i) * (si - vi)});
      record(support, "support", rep.support_violations, s, v);

      for (double xi : xis) {
        if (xi < 0.0 || xi > 1.0) throw ParameterError("convexity audit: xi must lie in [0, 1]");
        for (double x : {si, vi}) {
          const double lhs = phi.scalar(xi * x), rhs = xi * phi.scalar(x);
          record(rhs - lhs + slack_scale({lhs, rhs}), "scaling", rep.scaling_violations, s, v);
        }
      }

      const double diff = std::abs(ps.value(i) - pv.value(i));
      const double lip = bound.value(i) * std::abs(si - vi);
      record(lip - diff + slack_scale({lip, diff}), "lipschitz", rep.lipschitz_violations, s, v);
    }
  }
  return rep;
}

JensenResult jensen_gap(const ConvexPhi& phi, const ScalarField& h, const Field& f, const MeasureSpace& ms,
                        const Interval& support, const JensenOptions& opts) {
  const auto [x0, x1] = ms.coordinate_range(support);
  if (!(std::isfinite(x0) && std::isfinite(x1))) throw PreconditionError("jensen: f must have compact support");
  constexpr int kProbe = 1024;
  for (int i = 0; i <= kProbe; ++i) {
    const double t = ms.domain().from_coord(x0 + (x1 - x0) * i / kProbe);
    if (h(t) < 0.0) throw PreconditionError("jensen: the weight must be nonnegative");
  }
  JensenResult r;
  const auto mass = integrate_field(ms, scalar_field(h), support, opts.quadrature);
  r.weight_mass = mass.scalar();
  if (mass.any_diverged() || !(r.weight_mass > 0.0) || r.weight_mass > 1.0 + opts.tol)
    throw PreconditionError("jensen: the weight must satisfy 0 < int h <= 1");

  const Field hf = [&](double t) -> Eigen::ArrayXd { return h(t) * f(t); };
  const Field hphi = [&](double t) -> Eigen::ArrayXd { return h(t) * apply_hat(phi, f(t)); };
  const auto mean = integrate_field(ms, hf, support, opts.quadrature);
  const auto rhs = integrate_field(ms, hphi, support, opts.quadrature);
  if (mean.any_diverged() || rhs.any_diverged()) throw PreconditionError("jensen: integrals must be finite");
  r.lhs = phi(Element(mean.value));
  r.rhs = Element(rhs.value);
  r.gap = r.rhs - r.lhs;
  return r;
}

Element modular_eval(const Modular& m, const Field& f, const std::vector<double>& breakpoints) {
  QuadratureOptions q = m.quadrature;
  q.breakpoints.insert(q.breakpoints.end(), breakpoints.begin(), breakpoints.end());
  const Field g = [&](double t) -> Eigen::ArrayXd { return apply_hat(m.phi, f(t).abs()); };
  const auto r = integrate_field(m.ms, g, m.ms.carrier(), q);
  Element::Values v = r.value;
  for (Index i = 0; i < v.size(); ++i)
    if (r.diverged(i) || !std::isfinite(v(i))) v(i) = kInf;
  return Element(v);
}

std::string to_string(OrliczClass c) {
  switch (c) {
    case OrliczClass::Finite: return "E-phi";
    case OrliczClass::Orlicz: return "L-phi";
    case OrliczClass::Neither: return "neither";
  }
  return "neither";
}

std::vector<double> default_alpha_grid() {
  std::vector<double> a;
  for (int k = 4; k >= -20; --k) a.push_back(std::ldexp(1.0, k));
  return a;
}

OrliczReport orlicz_membership(const Modular& m, const Field& f, const std::vector<double>& breakpoints,
                               std::vector<double> alphas) {
  if (alphas.size() < 2) throw ParameterError("orlicz membership: need at least two grid points");
  std::sort(alphas.begin(), alphas.end(), std::greater<>());
  if (!(alphas.front() > 1.0) || !(alphas.back() < 1.0) || !(alphas.back() > 0.0))
    throw ParameterError("orlicz membership: the grid must straddle 1 and stay positive");
  OrliczReport rep;
  rep.alphas = alphas;
  bool all_finite = true;
  for (double a : alphas) {
    const Field scaled = [&f, a](double t) -> Eigen::ArrayXd { return a * f(t); };
    rep.values.push_back(modular_eval(m, scaled, breakpoints));
    if (rep.values.back().has_infinite()) all_finite = false;
  }
  // alpha -> rho(alpha f) read as a decreasing (o)-sequence along the grid.
  const auto& last = rep.values.back();
  const Index dim = last.size();
  bool monotone = true;
  for (std::size_t k = 1; k < rep.values.size(); ++k) {
    const Element& prev = rep.values[k - 1];
    const Element& cur = rep.values[k];
    for (Index i = 0; i < dim; ++i)
      if (!prev.is_infinite(i) && (cur.is_infinite(i) || cur.value(i) > prev.value(i) * (1 + 1e-9) + 1e-15))
        monotone = false;
  }
  if (last.has_infinite() || !monotone) {
    rep.vanishing = Verdict::False;
  } else if (last.values().maxCoeff() <= m.cs.tol) {
    rep.vanishing = Verdict::True;
  } else {
    const Element& prev = rep.values[rep.values.size() - 2];
    const double p = prev.has_infinite() ? kInf : prev.values().maxCoeff();
    rep.vanishing = last.values().maxCoeff() < 0.75 * p ? Verdict::Inconclusive : Verdict::False;
  }
  if (rep.vanishing == Verdict::True)
    rep.cls = all_finite ? OrliczClass::Finite : OrliczClass::Orlicz;
  else
    rep.cls = OrliczClass::Neither;
  return rep;
}

ModularVerdict modular_convergence_search(const Modular& m, const FieldSequence& fn, const Field& f,
                                          const ModularSearchOptions& opts) {
  if (opts.levels < 0) throw ParameterError("modular search: levels must be nonnegative");
  ModularVerdict rep;
  if (opts.d1) {
    if (!(*opts.d1 > 0.0)) throw ParameterError("modular search: D1 must be positive");
    rep.analytic_lambda = 1.0 / (2.0 * *opts.d1);
  }
  std::map<std::pair<int, long>, double> cache;
  auto rho = [&](int k, long n) {
    const auto key = std::make_pair(k, n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double a = std::ldexp(1.0, -k);
    const Field d = [&fn, &f, a, n](double t) -> Eigen::ArrayXd { return a * (fn.term(n, t) - f(t)); };
    const Element v = modular_eval(m, d, fn.breaks(n));
    const double r = v.has_infinite() ? kInf : v.values().maxCoeff();
    cache.emplace(key, r);
    return r;
  };

  int passing = -1;
  bool solid = true;
  Verdict best_failure = Verdict::False;
  for (int k = 0; k <= opts.levels; ++k) {
    const Verdict v = tends_to_zero([&](long n) { return rho(k, n); }, m.cs);
    rep.trace.push_back({std::ldexp(1.0, -k), v});
    if (v == Verdict::True) {
      if (passing < 0) passing = k;
    } else {
      if (passing >= 0) solid = false;
      if (v == Verdict::Inconclusive) best_failure = Verdict::Inconclusive;
    }
  }
  if (passing >= 0) {
    rep.alpha = std::ldexp(1.0, -passing);
    rep.verdict = Verdict::True;
    rep.solid = solid;
    for (long n = 1; n <= opts.report_upto; ++n) rep.values.push_back(rho(passing, n));
  } else {
    rep.verdict = best_failure;
    rep.solid = true;
  }
  return rep;
}

}  // namespace rieszlab
