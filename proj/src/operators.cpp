#include "rieszlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>
#include <unordered_map>

namespace rieszlab {

namespace {

double max_abs(const Eigen::ArrayXd& v) { return v.size() == 0 ? 0.0 : v.abs().maxCoeff(); }

Eigen::ArrayXd psi_entrywise(const std::function<double(long, double)>& psi, long n, const Eigen::ArrayXd& r) {
  Eigen::ArrayXd out(r.size());
  for (Index i = 0; i < r.size(); ++i) out(i) = psi ? psi(n, r(i)) : r(i);
  return out;
}

// Splits [value ; majorant] stacked by the kernel integrands below.
Element checked_head(const QuadratureResult& r, Index dim, const char* what) {
  if (r.any_diverged()) throw DomainError(std::string(what) + ": the majorant integral diverges");
  return Element(r.value.head(dim));
}

std::string join_list(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

Interval ball(const Domain& d, double s, double delta) {
  const double x = d.to_coord(s);
  return Interval::closed(d.from_coord(x - delta), d.from_coord(x + delta));
}

std::vector<double> log_grid(const MeasureSpace& ms, const Interval& a, long points) {
  const auto [x0, x1] = ms.coordinate_range(a);
  if (!(std::isfinite(x0) && std::isfinite(x1))) throw PreconditionError("sampling needs a compact set");
  std::vector<double> g;
  for (long i = 0; i < points; ++i)
    g.push_back(ms.domain().from_coord(x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(points - 1)));
  return g;
}

}  // namespace

// --- Urysohn -------------------------------------------------------------------------

UrysohnKernel moving_average_kernel() {
  UrysohnKernel k;
  k.name = "moving-average";
  k.L = [](long n, double s, double t) {
    if (n < 1) throw ParameterError("moving average: n >= 1");
    return t >= s && t <= s + 1.0 / static_cast<double>(n) ? static_cast<double>(n) : 0.0;
  };
  k.K = [L = k.L](long n, double s, double t, const Eigen::ArrayXd& u) -> Eigen::ArrayXd { return L(n, s, t) * u; };
  k.psi = [](long, double r) { return r; };
  k.breakpoints = [](long n, double s) { return std::vector<double>{s, s + 1.0 / static_cast<double>(n)}; };
  k.section_breakpoints = [](long n, double t) { return std::vector<double>{t - 1.0 / static_cast<double>(n), t}; };
  k.d1 = 1.0;
  k.linear = true;
  return k;
}

Element urysohn_apply(const UrysohnKernel& k, const Field& f, double s, long n, const MeasureSpace& ms,
                      const std::vector<double>& f_breaks, const QuadratureOptions& q) {
  if (!ms.domain().contains(s)) throw DomainError("urysohn: s outside the domain");
  QuadratureOptions o = q;
  if (k.breakpoints) {
    const auto b = k.breakpoints(n, s);
    o.breakpoints.insert(o.breakpoints.end(), b.begin(), b.end());
  }
  o.breakpoints.insert(o.breakpoints.end(), f_breaks.begin(), f_breaks.end());
  Index dim = -1;
  const Field g = [&](double t) -> Eigen::ArrayXd {
    const Eigen::ArrayXd u = f(t);
    if (dim < 0) dim = u.size();
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(2 * u.size());
    const double l = k.L(n, s, t);
    if (l == 0.0) return out;
    out.head(u.size()) = k.K(n, s, t, u);
    out.tail(u.size()) = l * psi_entrywise(k.psi, n, u.abs());
    return out;
  };
  const auto r = integrate_field(ms, g, ms.carrier(), o);
  return checked_head(r, r.value.size() / 2, "urysohn");
}

// --- Mellin ---------------------------------------------------------------------------

std::function<double(double)> MellinKernel::at(long n) const {
  if (n < n_min) throw ParameterError(name + ": kernel index below " + std::to_string(n_min));
  return [L = L, n](double z) { return L(n, z); };
}

Eigen::ArrayXd MellinKernel::kernel(long n, double z, const Eigen::ArrayXd& u) const {
  if (K) return K(n, z, u);
  return L(n, z) * u;
}

MellinKernel moment_kernel() {
  MellinKernel k;
  k.name = "moment";
  k.L = [](long n, double z) {
    if (n < 1) throw ParameterError("moment kernel: n >= 1");
    return z > 0.0 && z < 1.0 ? static_cast<double>(n) * std::pow(z, static_cast<double>(n)) : 0.0;
  };
  k.psi = [](long, double r) { return r; };
  k.breakpoints = {1.0};
  k.support = Interval::open(0.0, 1.0);
  k.d1 = 1.0;
  return k;
}

MellinKernel indicator_kernel() {
  MellinKernel k;
  k.name = "indicator";
  k.L = [](long, double z) { return z > 0.0 && z < 1.0 ? 1.0 : 0.0; };
  k.psi = [](long, double r) { return r; };
  k.breakpoints = {1.0};
  k.support = Interval::open(0.0, 1.0);
  return k;
}

MellinKernel scaled_kernel(const MellinKernel& base, double c) {
  if (!(c > 0.0)) throw ParameterError("scaled kernel: the factor must be positive");
  MellinKernel k = base;
  k.name = base.name + "-x" + join_list({c});
  k.L = [L = base.L, c](long n, double z) { return c * L(n, z); };
  if (base.K) k.K = [K = base.K, c](long n, double z, const Eigen::ArrayXd& u) -> Eigen::ArrayXd { return c * K(n, z, u); };
  if (base.d1) k.d1 = c * *base.d1;
  return k;
}

Element mellin_apply(const MellinKernel& k, const Field& f, double s, long n, const std::vector<double>& f_breaks,
                     const QuadratureOptions& q) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("mellin: s must be a positive real");
  const auto L = k.at(n);
  const MeasureSpace haar = MeasureSpace::haar();
  Interval region = haar.carrier();
  if (k.support) region = intersect(region, Interval{s * k.support->lo, s * k.support->hi, k.support->lo_open, k.support->hi_open});
  QuadratureOptions o = q;
  for (double z : k.breakpoints)
    if (z > 0.0 && std::isfinite(z)) o.breakpoints.push_back(s * z);
  o.breakpoints.insert(o.breakpoints.end(), f_breaks.begin(), f_breaks.end());

  const Field g = [&](double t) -> Eigen::ArrayXd {
    const double z = t / s;
    const double l = L(z);
    const Eigen::ArrayXd u = f(t);
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(2 * u.size());
    if (l == 0.0) return out;
    out.head(u.size()) = k.linear() ? Eigen::ArrayXd(l * u) : k.K(n, z, u);
    out.tail(u.size()) = l * psi_entrywise(k.psi, n, u.abs());
    return out;
  };
  if (region.empty()) return Element(f(s).size());
  const auto r = integrate_field(haar, g, region, o);
  return checked_head(r, r.value.size() / 2, "mellin");
}

FieldSequence mellin_sequence(const MellinKernel& k, const Field& f, const std::vector<double>& f_breaks,
                              const QuadratureOptions& q) {
  using Table = std::unordered_map<long, std::unordered_map<double, Eigen::ArrayXd>>;
  auto memo = std::make_shared<Table>();
  FieldSequence seq;
  seq.term = [k, f, f_breaks, q, memo](long n, double s) -> Eigen::ArrayXd {
    auto& tab = (*memo)[n];
    auto it = tab.find(s);
    if (it != tab.end()) return it->second;
    Eigen::ArrayXd v = mellin_apply(k, f, s, n, f_breaks, q).values();
    tab.emplace(s, v);
    return v;
  };
  std::vector<double> breaks = f_breaks;
  for (double b : f_breaks)
    for (double z : k.breakpoints)
      if (z > 0.0 && b > 0.0) breaks.push_back(b / z);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  seq.breakpoints = [breaks](long) { return breaks; };
  return seq;
}

std::vector<double> mellin_masses(const MellinKernel& k, long n, const std::vector<double>& scales,
                                  const QuadratureOptions& q) {
  const auto L = k.at(n);
  const MeasureSpace haar = MeasureSpace::haar();
  std::vector<double> out;
  for (double s : scales) {
    if (!(s > 0.0)) throw DomainError("mellin masses: scales must be positive");
    QuadratureOptions o = q;
    for (double z : k.breakpoints) o.breakpoints.push_back(s * z);
    const auto r = integrate_field(haar, scalar_field([&](double t) { return L(t / s); }), haar.carrier(), o);
    out.push_back(r.any_diverged() ? kInf : r.scalar());
  }
  return out;
}

// --- singularity ---------------------------------------------------------------------

std::string SingularityCertificate::failed_clause() const {
  for (const auto& c : clauses)
    if (!c.passed) return c.clause;
  return {};
}

namespace {

void finish(SingularityCertificate& cert) {
  const std::string failed = cert.failed_clause();
  cert.kind = failed.empty() ? "U-singular" : "fail(" + failed + ")";
}

std::vector<Element> palette_or_default(const SingularityOptions& opts) {
  if (!opts.palette.empty()) return opts.palette;
  return {Element::ones(1), 2.0 * Element::ones(1)};
}

// Clauses shared by both families once masses, tails and residuals are known.
void common_clauses(SingularityCertificate& cert, MemoizedSequence& mass, long lo, long hi, double d1_given,
                    bool has_d1, std::vector<std::pair<double, MemoizedSequence>>& tails, MemoizedSequence& repro,
                    bool linear, const Structure<double>& cs, const SingularityOptions& opts) {
  double sup = 0.0, inf = kInf;
  for (long n = lo; n <= hi; ++n) {
    sup = std::max(sup, mass(n));
    inf = std::min(inf, mass(n));
    cert.masses.push_back(mass(n));
  }
  if (!std::isfinite(sup)) {
    cert.clauses.push_back({"mass-finite", false, "a kernel mass diverges"});
    return;
  }
  cert.clauses.push_back({"mass-finite", true, "all probed masses finite"});
  cert.d1 = has_d1 ? d1_given : sup;
  cert.clauses.push_back({"mass-bound", sup <= cert.d1 * (1 + 1e-9), "sup of masses " + join_list({sup}) + " vs D1 " + join_list({cert.d1})});
  cert.clauses.push_back({"positivity", inf > 0.0, "inf of masses " + join_list({inf})});

  std::vector<double> failing;
  for (auto& [delta, tail] : tails) {
    std::vector<double> v;
    for (long n = lo; n <= std::min(hi, opts.report_upto); ++n) v.push_back(tail(n));
    cert.tails.emplace_back(delta, std::move(v));
    if (tends_to_zero([&tail = tail](long n) { return tail(n); }, cs) != Verdict::True) failing.push_back(delta);
  }
  cert.clauses.push_back({"tail-vanishing", failing.empty(),
                          failing.empty() ? "tails vanish for every probed delta" : "tails persist for delta " + join_list(failing)});

  for (long n = lo; n <= std::min(hi, opts.report_upto); ++n) cert.reproduction.push_back(repro(n));
  const Verdict rv = tends_to_zero([&repro](long n) { return repro(n); }, cs);
  cert.clauses.push_back({"reproduction", rv == Verdict::True,
                          std::string(linear ? "linear kernel: residual independent of u; " : "palette lower bound; ") +
                              "verdict " + std::string(to_string(rv))});

  if (opts.h) {
    double gap = 0.0;
    for (auto& [delta, tail] : tails) {
      LatticeSequence<double> s{[&tail = tail](long n) { return Element::scalar(tail(n)); }, cs.horizon};
      gap = std::max(gap, h_restriction_gap(s, cs, opts.h).value(0));
    }
    cert.clauses.push_back({"h-restriction", gap <= cs.tol, "limsup gap over H " + join_list({gap})});
  } else {
    cert.clauses.push_back({"h-restriction", true, "H = N"});
  }
}

}  // namespace

SingularityCertificate singularity_audit(const MellinKernel& k, const Structure<double>& cs,
                                         const SingularityOptions& opts) {
  SingularityCertificate cert;
  cert.family = k.name;
  const MeasureSpace haar = MeasureSpace::haar();
  QuadratureOptions q = opts.quadrature;
  q.breakpoints.insert(q.breakpoints.end(), k.breakpoints.begin(), k.breakpoints.end());
  auto clamp = [&k](long n) { return std::max(n, k.n_min); };
  auto mass_over = [&](long n, const Interval& a) {
    const Interval r = k.support ? intersect(a, *k.support) : a;
    if (r.empty()) return 0.0;
    const auto res = integrate_field(haar, scalar_field(k.at(clamp(n))), r, q);
    return res.any_diverged() ? kInf : res.scalar();
  };
  MemoizedSequence mass([&](long n) { return mass_over(n, haar.carrier()); });
  std::vector<std::pair<double, MemoizedSequence>> tails;
  for (double delta : opts.deltas) {
    if (!(delta > 1.0)) throw ParameterError("singularity audit: Mellin deltas must exceed 1");
    tails.emplace_back(delta, MemoizedSequence([&, delta](long n) {
                         return mass_over(n, Interval::open(0.0, 1.0 / delta)) + mass_over(n, Interval::open(delta, kInf));
                       }));
  }
  const auto palette = palette_or_default(opts);
  MemoizedSequence repro([&](long n) {
    if (k.linear()) return std::abs(mass(n) - 1.0);
    double worst = 0.0;
    for (const auto& u : palette) {
      const Field g = [&](double z) -> Eigen::ArrayXd { return k.kernel(clamp(n), z, u.values()); };
      const auto r = integrate_field(haar, g, k.support ? *k.support : haar.carrier(), q);
      if (r.any_diverged()) return kInf;
      worst = std::max(worst, max_abs(r.value - u.values()) / max_abs(u.values()));
    }
    return worst;
  });
  // Positivity of the kernel itself on a sample of z.
  bool nonnegative = true;
  for (long n = k.n_min; n <= opts.report_upto && nonnegative; ++n)
    for (int i = 0; i <= 200; ++i)
      if (k.at(n)(std::exp(-7.0 + 14.0 * i / 200.0)) < 0.0) nonnegative = false;

  common_clauses(cert, mass, k.n_min, std::max(opts.report_upto, k.n_min), k.d1.value_or(0.0), k.d1.has_value(),
                 tails, repro, k.linear(), cs, opts);
  if (!nonnegative)
    for (auto& c : cert.clauses)
      if (c.clause == "positivity") {
        c.passed = false;
        c.detail = "kernel takes negative values";
      }
  finish(cert);
  return cert;
}

SingularityCertificate singularity_audit(const UrysohnKernel& k, const MeasureSpace& ms, const Interval& probe,
                                         const Structure<double>& cs, const SingularityOptions& opts) {
  SingularityCertificate cert;
  cert.family = k.name;
  const auto points = log_grid(ms, probe, 17);
  const Domain& d = ms.domain();
  auto with_breaks = [&](std::vector<double> b) {
    QuadratureOptions q = opts.quadrature;
    q.breakpoints.insert(q.breakpoints.end(), b.begin(), b.end());
    return q;
  };
  auto s_section = [&](long n, double s, const IntervalSet& where) {
    const auto r = integrate_field(ms, scalar_field([&](double t) { return k.L(n, s, t); }), where,
                                   with_breaks(k.breakpoints ? k.breakpoints(n, s) : std::vector<double>{}));
    return r.any_diverged() ? kInf : r.scalar();
  };
  auto t_section = [&](long n, double t) {
    const auto r = integrate_field(ms, scalar_field([&](double s) { return k.L(n, s, t); }), ms.carrier(),
                                   with_breaks(k.section_breakpoints ? k.section_breakpoints(n, t) : std::vector<double>{}));
    return r.any_diverged() ? kInf : r.scalar();
  };
  const IntervalSet everything{ms.carrier()};
  MemoizedSequence mass([&](long n) {
    double sup = 0.0, inf = kInf;
    for (double s : points) {
      const double a = s_section(n, s, everything), b = t_section(n, s);
      sup = std::max({sup, a, b});
      inf = std::min({inf, a, b});
    }
    return inf > 0.0 ? sup : -sup;  // sign marks a vanishing section
  });
  MemoizedSequence abs_mass([&](long n) { return std::abs(mass(n)); });
  std::vector<std::pair<double, MemoizedSequence>> tails;
  for (double delta : opts.deltas) {
    if (!(delta > 0.0)) throw ParameterError("singularity audit: deltas must be positive");
    tails.emplace_back(delta, MemoizedSequence([&, delta](long n) {
                         double sup = 0.0;
                         for (double s : points)
                           sup = std::max(sup, s_section(n, s, IntervalSet{ball(d, s, delta)}.complement_in(ms.carrier())));
                         return sup;
                       }));
  }
  const auto palette = palette_or_default(opts);
  MemoizedSequence repro([&](long n) {
    double worst = 0.0;
    for (double s : points)
      for (const auto& u : palette) {
        const Field g = [&](double t) -> Eigen::ArrayXd { return k.K(n, s, t, u.values()); };
        const auto r = integrate_field(ms, g, ms.carrier(), with_breaks(k.breakpoints ? k.breakpoints(n, s) : std::vector<double>{}));
        if (r.any_diverged()) return kInf;
        worst = std::max(worst, max_abs(r.value - u.values()) / max_abs(u.values()));
      }
    return worst;
  });
  common_clauses(cert, abs_mass, 1, std::max(opts.report_upto, 1L), k.d1.value_or(0.0), k.d1.has_value(), tails, repro,
                 k.linear, cs, opts);
  bool positive = true;
  for (long n = 1; n <= opts.report_upto; ++n) positive = positive && mass(n) > 0.0;
  for (auto& c : cert.clauses)
    if (c.clause == "positivity" && !positive) {
      c.passed = false;
      c.detail = "a kernel section has zero mass";
    }
  finish(cert);
  return cert;
}

LipschitzAudit lipschitz_audit(const UrysohnKernel& k, const Interval& probe, long n_max, long samples,
                               std::uint64_t seed, double u_max) {
  if (!probe.bounded()) throw PreconditionError("lipschitz audit: bounded probe box required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> st(probe.lo, probe.hi), uv(-u_max, u_max);
  std::uniform_int_distribution<long> nn(1, n_max);
  LipschitzAudit a;
  a.worst_margin = kInf;
  for (long i = 0; i < samples; ++i) {
    const long n = nn(rng);
    const double s = st(rng), t = st(rng);
    const Eigen::ArrayXd u = Eigen::ArrayXd::Constant(1, uv(rng)), v = Eigen::ArrayXd::Constant(1, uv(rng));
    const double lhs = max_abs(k.K(n, s, t, u) - k.K(n, s, t, v));
    const double rhs = k.L(n, s, t) * (k.psi ? k.psi(n, std::abs(u(0) - v(0))) : std::abs(u(0) - v(0)));
    const double margin = rhs - lhs + 1e-12 * (1 + std::abs(rhs));
    a.worst_margin = std::min(a.worst_margin, margin);
    if (margin < 0.0) ++a.violations;
    ++a.samples;
  }
  return a;
}

PsiAudit psi_class_audit(const std::function<double(long, double)>& psi, long n_max, double r_max) {
  PsiAudit a;
  a.zero_at_zero = a.monotone = a.equibounded = true;
  std::vector<double> rs{0.0};
  for (int i = -24; i <= 0; ++i) rs.push_back(r_max * std::pow(10.0, i / 2.0));
  for (int i = 1; i <= 200; ++i) rs.push_back(r_max * i / 200.0);
  std::sort(rs.begin(), rs.end());
  std::vector<double> sup(rs.size(), 0.0);
  for (long n = 1; n <= n_max; ++n) {
    double prev = -kInf;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const double v = psi(n, rs[i]);
      if (i == 0 && v != 0.0) a.zero_at_zero = false;
      if (v < prev) a.monotone = false;
      if (!std::isfinite(v)) a.equibounded = false;
      prev = v;
      sup[i] = std::max(sup[i], v);
    }
  }
  // For each level w some delta > 0 keeps every psi_n below w on [0, delta].
  a.equicontinuous = true;
  for (double w : {1e-1, 1e-2, 1e-3}) {
    bool found = false;
    for (std::size_t i = 1; i < rs.size() && !found; ++i) found = sup[i] <= w && rs[i] > 0.0;
    a.equicontinuous = a.equicontinuous && found;
  }
  return a;
}

// --- experiments --------------------------------------------------------------------

std::string to_string(ExperimentMode m) {
  switch (m) {
    case ExperimentMode::Uniform: return "uniform";
    case ExperimentMode::InMeasure: return "in-measure";
    case ExperimentMode::Modular: return "modular";
  }
  return "uniform";
}

OperatorReport operator_convergence_experiment(const MellinKernel& k, const Field& f, const std::vector<double>& f_breaks,
                                               ExperimentMode mode, const Structure<double>& cs,
                                               const OperatorExperimentOptions& opts) {
  OperatorReport rep;
  rep.mode = mode;
  rep.certificate = singularity_audit(k, cs, opts.singularity);
  if (!rep.certificate.certified())
    throw PreconditionError("kernel family '" + k.name + "' is not certified singular: fails " +
                            rep.certificate.failed_clause());
  const MeasureSpace haar = MeasureSpace::haar();
  const FieldSequence tn = mellin_sequence(k, f, f_breaks, opts.quadrature);
  for (long n = std::max(1L, k.n_min); n <= opts.n_max; ++n) rep.ns.push_back(n);

  switch (mode) {
    case ExperimentMode::Uniform: {
      std::vector<double> grid = log_grid(haar, opts.compact, opts.grid);
      for (double b : tn.breaks(1))
        if (opts.compact.contains(b)) grid.push_back(b);
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      auto sup_error = [&](long n) {
        auto err = [&](double s) { return max_abs(tn.term(n, s) - f(s)); };
        std::size_t best = 0;
        double sup = -1.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const double e = err(grid[i]);
          if (e > sup) {
            sup = e;
            best = i;
          }
        }
        // Local refinement between the neighbours of the best node.
        const double lo = std::log(grid[best > 0 ? best - 1 : 0]), hi = std::log(grid[std::min(best + 1, grid.size() - 1)]);
        for (int j = 1; j < 32; ++j) sup = std::max(sup, err(std::exp(lo + (hi - lo) * j / 32.0)));
        return sup;
      };
      MemoizedSequence errors(sup_error);
      for (long n : rep.ns) rep.errors.push_back(errors(n));
      rep.verdict = tends_to_zero([&errors](long n) { return errors(n); }, cs);
      break;
    }
    case ExperimentMode::InMeasure: {
      for (long n : rep.ns)
        rep.errors.push_back(exceptional_set(tn.at(n), f, opts.compact, haar, opts.in_measure, tn.breaks(n)).lambda);
      rep.verdict = converges_in_measure(tn, f, opts.compact, haar, cs, opts.in_measure).verdict;
      break;
    }
    case ExperimentMode::Modular: {
      if (!opts.modular) throw ParameterError("modular mode needs a modular");
      const Modular& m = *opts.modular;
      ModularSearchOptions so;
      so.report_upto = opts.n_max;
      so.d1 = rep.certificate.d1;
      rep.modular = modular_convergence_search(m, tn, f, so);
      if (!rep.modular->values.empty())
        rep.errors.assign(rep.modular->values.begin() + (rep.ns.front() - 1), rep.modular->values.end());

      rep.lambda = 1.0 / (2.0 * rep.certificate.d1);
      FieldSequence g;
      g.term = [&tn, &m, lambda = rep.lambda](long n, double s) -> Eigen::ArrayXd {
        return m.phi(Element(Eigen::ArrayXd(lambda * tn.term(n, s).abs()))).values();
      };
      g.breakpoints = tn.breakpoints;
      EacOptions eo;
      eo.probes = [](long n) { return IntervalSet{Interval::closed(1.0, std::exp(1.0 / static_cast<double>(n)))}; };
      eo.m_horizon = opts.m_horizon;
      eo.quadrature = opts.quadrature;
      rep.eac = equiabsolute_continuity_audit(g, m.ms, cs, eo);
      if (rep.modular->verdict == Verdict::True && rep.modular->solid && rep.eac->passed())
        rep.verdict = Verdict::True;
      else if (rep.modular->verdict == Verdict::False || rep.eac->small_sets == Verdict::False ||
               rep.eac->tails == Verdict::False)
        rep.verdict = Verdict::False;
      else
        rep.verdict = Verdict::Inconclusive;
      break;
    }
  }
  rep.strictly_decreasing = rep.errors.size() >= 2;
  for (std::size_t i = 1; i < rep.errors.size(); ++i)
    if (!(rep.errors[i] < rep.errors[i - 1])) rep.strictly_decreasing = false;
  return rep;
}

}  // namespace rieszlab
