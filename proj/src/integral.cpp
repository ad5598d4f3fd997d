#include "rieszlab/integral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace rieszlab {

namespace {

constexpr double kUnbounded = 1e12;

Eigen::ArrayXd broadcast_product(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  if (a.size() == b.size()) return a * b;
  if (a.size() == 1) return a(0) * b;
  if (b.size() == 1) return b(0) * a;
  throw DimensionError("product of functions over different index sets");
}

double max_abs_entry(const Eigen::ArrayXd& v) { return v.size() == 0 ? 0.0 : v.abs().maxCoeff(); }

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::False || b == Verdict::False) return Verdict::False;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
  return Verdict::True;
}

}  // namespace

// --- simple functions -------------------------------------------------------------

SimpleFunction::SimpleFunction(Index dim, std::vector<SimpleCell> cells) : dim_(dim) {
  for (auto& c : cells) add(c.set, std::move(c.coeff));
}

SimpleFunction& SimpleFunction::add(const Interval& a, Eigen::ArrayXd c) {
  if (c.size() != dim_) throw DimensionError("simple function: coefficient over a different index set");
  if (!c.allFinite()) throw DomainError("simple function: coefficients must be finite");
  if (!a.empty()) cells_.push_back({a, std::move(c)});
  return *this;
}

Eigen::ArrayXd SimpleFunction::operator()(double t) const {
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(dim_);
  for (const auto& c : cells_)
    if (c.set.contains(t)) v += c.coeff;
  return v;
}

std::vector<double> SimpleFunction::breakpoints() const {
  std::vector<double> b;
  for (const auto& c : cells_) {
    if (std::isfinite(c.set.lo)) b.push_back(c.set.lo);
    if (std::isfinite(c.set.hi)) b.push_back(c.set.hi);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

Field SimpleFunction::as_field() const {
  return [f = *this](double t) { return f(t); };
}

SimpleFunction SimpleFunction::refined(int parts) const {
  if (parts < 1) throw ParameterError("refined: parts must be positive");
  SimpleFunction r(dim_);
  for (const auto& c : cells_) {
    if (!c.set.bounded() || parts == 1) {
      r.add(c.set, c.coeff);
      continue;
    }
    const double w = (c.set.hi - c.set.lo) / parts;
    for (int k = 0; k < parts; ++k) {
      Interval p{c.set.lo + k * w, k + 1 == parts ? c.set.hi : c.set.lo + (k + 1) * w, k == 0 ? c.set.lo_open : false,
                 k + 1 == parts ? c.set.hi_open : true};
      r.add(p, c.coeff);
    }
  }
  return r;
}

Element integrate_simple(const SimpleFunction& f, const Interval& a, const MeasureSpace& ms) {
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(f.dim());
  for (const auto& c : f.cells()) {
    const double m = ms.measure(intersect(a, c.set));
    if (m == 0.0 || (c.coeff == 0.0).all()) continue;
    if (!std::isfinite(m)) throw InfiniteMeasureError("simple function: cell of infinite measure inside the set");
    s += c.coeff * m;
  }
  return Element(std::move(s));
}

Element integrate_simple(const SimpleFunction& f, const IntervalSet& a, const MeasureSpace& ms) {
  Element s(f.dim());
  for (const auto& p : a.pieces()) s += integrate_simple(f, p, ms);
  return s;
}

Element integrate_simple_against(const SimpleFunction& f, const VectorMeasure& m) {
  Eigen::ArrayXd s;
  for (const auto& c : f.cells()) {
    Eigen::ArrayXd term = broadcast_product(c.coeff, m(c.set));
    if (s.size() == 0)
      s = Eigen::ArrayXd::Zero(term.size()) + term;
    else
      s += term;
  }
  if (s.size() == 0) s = Eigen::ArrayXd::Zero(f.dim());
  return Element(std::move(s));
}

FieldSequence FieldSequence::of_simple(std::function<SimpleFunction(long)> fn) {
  FieldSequence s;
  s.term = [fn](long n, double t) { return fn(n)(t); };
  s.breakpoints = [fn](long n) { return fn(n).breakpoints(); };
  return s;
}

// --- convergence in measure ------------------------------------------------------

Verdict tends_to_zero(const std::function<double(long)>& r, const Structure<double>& cs) {
  LatticeSequence<double> s{[&r](long n) {
                              const double v = r(n);
                              return Element::scalar(std::isfinite(v) ? v : 1e300);
                            },
                            cs.horizon};
  return estimate_limit(s, cs, Element::scalar(0.0));
}

ExceptionalSet exceptional_set(const Field& fn, const Field& f, const Interval& a, const MeasureSpace& ms,
                               const InMeasureOptions& opts, const std::vector<double>& extra_breaks) {
  const auto [x0, x1] = ms.coordinate_range(a);
  if (!(std::isfinite(x0) && std::isfinite(x1))) throw InfiniteMeasureError("convergence in measure needs mu(A) finite");
  ExceptionalSet out;
  if (!(x1 > x0)) return out;
  const Domain& d = ms.domain();
  std::vector<double> nodes;
  nodes.reserve(static_cast<std::size_t>(opts.grid) + 1);
  for (long i = 0; i <= opts.grid; ++i) nodes.push_back(x0 + (x1 - x0) * static_cast<double>(i) / opts.grid);
  for (const auto* list : {&opts.breakpoints, &extra_breaks})
    for (double t : *list)
      if (d.contains(t)) {
        const double x = d.to_coord(t);
        if (x > x0 && x < x1) nodes.push_back(x);
      }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<std::pair<double, double>> dw;  // (distance, weight)
  dw.reserve(nodes.size());
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double xm = 0.5 * (nodes[i] + nodes[i + 1]);
    const double t = d.from_coord(xm);
    const double w = ms.coordinate_density(xm) * (nodes[i + 1] - nodes[i]);
    const Eigen::ArrayXd diff = fn(t) - f(t);
    const double dist = diff.allFinite() ? max_abs_entry(diff) : kInf;
    dw.emplace_back(dist, w);
    out.sup = std::max(out.sup, dist);
  }
  std::sort(dw.begin(), dw.end(), [](const auto& p, const auto& q) { return p.first > q.first; });
  // Candidate thresholds are the distinct distances; W is the weight strictly above.
  double best = kInf, best_measure = 0.0, above = 0.0;
  std::size_t i = 0;
  while (i < dw.size()) {
    const double v = dw[i].first;
    const double val = std::max(v, above);
    if (val < best) {
      best = val;
      best_measure = above;
    }
    while (i < dw.size() && dw[i].first == v) above += dw[i++].second;
  }
  if (above < best) {  // lambda = 0 with every positive distance excluded
    best = above;
    best_measure = above;
  }
  out.lambda = best;
  out.measure = best_measure;
  return out;
}

InMeasureReport converges_in_measure(const FieldSequence& fn, const Field& f, const Interval& a,
                                     const MeasureSpace& ms, const Structure<double>& cs,
                                     const InMeasureOptions& opts) {
  if (!std::isfinite(ms.measure(a))) throw InfiniteMeasureError("convergence in measure needs mu(A) finite");
  std::map<long, ExceptionalSet> cache;
  auto at = [&](long n) -> const ExceptionalSet& {
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, exceptional_set(fn.at(n), f, a, ms, opts, fn.breaks(n))).first;
    return it->second;
  };
  InMeasureReport r;
  r.verdict = tends_to_zero([&](long n) { return at(n).lambda; }, cs);
  r.uniform_verdict = tends_to_zero([&](long n) { return at(n).sup; }, cs);
  const auto& last = at(cs.horizon);
  r.lambda = last.lambda;
  r.exceptional_measure = last.measure;
  r.sup_distance = last.sup;
  return r;
}

// --- equiabsolute continuity -------------------------------------------------------

std::string EacReport::failing_clause() const {
  if (small_sets != Verdict::True) return "small-sets";
  if (tails != Verdict::True) return "tails";
  return {};
}

EacReport equiabsolute_continuity_audit(const FieldSequence& fn, const MeasureSpace& ms, const Structure<double>& cs,
                                        const EacOptions& opts) {
  EacReport rep;
  auto abs_integral = [&](long n, const IntervalSet& set) {
    QuadratureOptions q = opts.quadrature;
    const auto b = fn.breaks(n);
    q.breakpoints.insert(q.breakpoints.end(), b.begin(), b.end());
    const Field g = [&fn, n](double t) -> Eigen::ArrayXd { return fn.term(n, t).abs(); };
    const auto r = integrate_field(ms, g, set, q);
    return r.any_diverged() ? kInf : max_abs_entry(r.value);
  };

  if (opts.probes) {
    MemoizedSequence mass([&](long n) { return ms.measure(opts.probes(n)); });
    MemoizedSequence small([&](long n) { return abs_integral(n, opts.probes(n)); });
    rep.probes_vanish = tends_to_zero([&](long n) { return mass(n); }, cs);
    rep.small_sets = tends_to_zero([&](long n) { return small(n); }, cs);
  }

  auto exhausting = opts.exhausting ? opts.exhausting : [&ms](long m) { return ms.exhausting_set(m); };
  std::map<long, double> tails;
  auto tail_at = [&](long m) {
    auto it = tails.find(m);
    if (it != tails.end()) return it->second;
    const IntervalSet outside = IntervalSet{exhausting(m)}.complement_in(ms.carrier());
    MemoizedSequence r([&](long n) { return abs_integral(n, outside); });
    LatticeSequence<double> s{[&](long n) { return Element::scalar(std::min(r(n), 1e300)); }, cs.horizon};
    const double v = limsup(s, cs).value(0);
    tails[m] = v;
    return v;
  };
  const Structure<double> over_m = Structure<double>::ordinary(opts.m_horizon, cs.tol);
  rep.tails = tends_to_zero(tail_at, over_m);
  for (const auto& [m, v] : tails) rep.tail_limsups.push_back(v);
  return rep;
}

// --- defining sequences -------------------------------------------------------------

DefiningSequence::DefiningSequence(const MeasureSpace& ms, const Interval& support, std::vector<long> cell_counts,
                                   std::vector<Eigen::MatrixXd> minima, std::vector<double> sup_error, double bound,
                                   std::vector<double> finest_measures)
    : ms_(ms),
      support_(support),
      counts_(std::move(cell_counts)),
      minima_(std::move(minima)),
      sup_error_(std::move(sup_error)),
      bound_(bound),
      finest_measure_(std::move(finest_measures)) {
  std::tie(x0_, x1_) = ms_.coordinate_range(support_);
}

std::size_t DefiningSequence::level(long n) const {
  if (n < 1) throw ParameterError("defining sequence terms are indexed from 1");
  return static_cast<std::size_t>(std::min<long>(n, levels()) - 1);
}

Interval DefiningSequence::cell(std::size_t lev, long j) const {
  const long c = counts_[lev];
  const Domain& d = ms_.domain();
  const double w = (x1_ - x0_) / static_cast<double>(c);
  Interval r;
  r.lo = j == 0 ? support_.lo : d.from_coord(x0_ + w * static_cast<double>(j));
  r.hi = j + 1 == c ? support_.hi : d.from_coord(x0_ + w * static_cast<double>(j + 1));
  r.lo_open = j == 0 ? support_.lo_open : false;
  r.hi_open = j + 1 == c ? support_.hi_open : true;
  return r;
}

SimpleFunction DefiningSequence::term(long n) const {
  const std::size_t lev = level(n);
  SimpleFunction s(dim());
  for (long j = 0; j < counts_[lev]; ++j) s.add(cell(lev, j), minima_[lev].col(j).array());
  return s;
}

Eigen::ArrayXd DefiningSequence::value(long n, double t) const {
  const std::size_t lev = level(n);
  if (!support_.contains(t)) return Eigen::ArrayXd::Zero(dim());
  const long c = counts_[lev];
  const double x = ms_.domain().to_coord(t);
  long j = static_cast<long>(std::floor((x - x0_) / (x1_ - x0_) * static_cast<double>(c)));
  j = std::clamp(j, 0L, c - 1);
  return minima_[lev].col(j).array();
}

Eigen::ArrayXd DefiningSequence::integral(long n, const Interval& a) const {
  const std::size_t lev = level(n);
  const long c = counts_[lev];
  const long group = static_cast<long>(finest_measure_.size()) / c;
  const Interval inside = intersect(a, support_);
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(dim());
  if (inside.empty()) return s;
  const auto [a0, a1] = ms_.coordinate_range(inside);
  const double w = (x1_ - x0_) / static_cast<double>(c);
  const long j0 = std::clamp(static_cast<long>(std::floor((a0 - x0_) / w)), 0L, c - 1);
  const long j1 = std::clamp(static_cast<long>(std::floor((a1 - x0_) / w)), 0L, c - 1);
  for (long j = j0; j <= j1; ++j) {
    const double c0 = x0_ + w * static_cast<double>(j), c1 = x0_ + w * static_cast<double>(j + 1);
    double m;
    if (a0 <= c0 && a1 >= c1) {
      m = 0.0;
      for (long k = j * group; k < (j + 1) * group; ++k) m += finest_measure_[static_cast<std::size_t>(k)];
    } else {
      m = ms_.measure(intersect(inside, cell(lev, j)));
    }
    s += minima_[lev].col(j).array() * m;
  }
  return s;
}

bool DefiningSequence::monotone() const {
  if ((minima_.front().array() < 0.0).any()) return false;
  for (std::size_t lev = 1; lev < minima_.size(); ++lev) {
    const long ratio = counts_[lev] / counts_[lev - 1];
    for (long j = 0; j < counts_[lev]; ++j)
      if ((minima_[lev].col(j).array() < minima_[lev - 1].col(j / ratio).array()).any()) return false;
  }
  return true;
}

double DefiningSequence::residual() const { return sup_error_.back() * ms_.measure(support_); }

DefiningSequence build_defining_sequence(const Field& f, const MeasureSpace& ms, const Interval& support,
                                         const DefiningSequenceOptions& opts) {
  if (opts.base < 2) throw ParameterError("defining sequence: base must be at least 2");
  if (opts.levels < 1) throw ParameterError("defining sequence: at least one level");
  const auto [x0, x1] = ms.coordinate_range(support);
  if (!(std::isfinite(x0) && std::isfinite(x1)) || !(x1 > x0))
    throw PreconditionError("defining sequence: the support must be a compact interval of positive measure");
  const double width = x1 - x0;

  std::vector<int> exponents;
  int prev = 0;
  for (long n = 1; n <= opts.levels; ++n) {
    int j = static_cast<int>(n);
    if (opts.deltas) {
      const double delta = opts.deltas->term(n).value(0);
      if (!(delta > 0.0)) throw ParameterError("defining sequence: cell diameters must be positive");
      j = static_cast<int>(std::ceil(std::log(width / delta) / std::log(opts.base) - 1e-12));
    }
    j = std::max({j, prev, 0});
    exponents.push_back(j);
    prev = j;
  }
  long finest = 1;
  for (int k = 0; k < exponents.back(); ++k) {
    finest *= opts.base;
    if (finest > (1L << 21)) throw ParameterError("defining sequence: partition finer than 2^21 cells");
  }

  const Domain& d = ms.domain();
  Eigen::MatrixXd samples;
  double bound = 0.0;
  for (long i = 0; i <= finest; ++i) {
    const double x = x0 + width * static_cast<double>(i) / static_cast<double>(finest);
    const double t = i == 0 ? support.lo : (i == finest ? support.hi : d.from_coord(x));
    const Eigen::ArrayXd v = f(t);
    if (i == 0) samples.resize(v.size(), finest + 1);
    if (v.size() != samples.rows()) throw DimensionError("integrand changed its index set");
    if (!v.allFinite() || max_abs_entry(v) > kUnbounded)
      throw PreconditionError("defining sequence: integrand is unbounded on the support");
    bound = std::max(bound, max_abs_entry(v));
    samples.col(i) = v.matrix();
  }
  Eigen::MatrixXd fine_min(samples.rows(), finest), fine_max(samples.rows(), finest);
  for (long i = 0; i < finest; ++i) {
    fine_min.col(i) = samples.col(i).cwiseMin(samples.col(i + 1));
    fine_max.col(i) = samples.col(i).cwiseMax(samples.col(i + 1));
  }

  std::vector<long> counts;
  std::vector<Eigen::MatrixXd> minima;
  std::vector<double> sup_error;
  for (int j : exponents) {
    long c = 1;
    for (int k = 0; k < j; ++k) c *= opts.base;
    const long group = finest / c;
    Eigen::MatrixXd lo(samples.rows(), c);
    double err = 0.0;
    for (long cell = 0; cell < c; ++cell) {
      const auto mn = fine_min.middleCols(cell * group, group).rowwise().minCoeff();
      const auto mx = fine_max.middleCols(cell * group, group).rowwise().maxCoeff();
      lo.col(cell) = mn;
      err = std::max(err, (mx - mn).maxCoeff());
    }
    counts.push_back(c);
    minima.push_back(std::move(lo));
    sup_error.push_back(err);
  }

  std::vector<double> finest_measure(static_cast<std::size_t>(finest));
  const bool coordinate_lebesgue = (ms.kind() == MeasureKind::Lebesgue && d.metric == Metric::Euclidean) ||
                                   (ms.kind() == MeasureKind::Haar && d.metric == Metric::Log);
  for (long i = 0; i < finest; ++i) {
    const double c0 = x0 + width * static_cast<double>(i) / static_cast<double>(finest);
    const double c1 = x0 + width * static_cast<double>(i + 1) / static_cast<double>(finest);
    finest_measure[static_cast<std::size_t>(i)] =
        coordinate_lebesgue ? c1 - c0 : ms.measure(Interval::closed(d.from_coord(c0), d.from_coord(c1)));
  }
  return DefiningSequence(ms, support, std::move(counts), std::move(minima), std::move(sup_error), bound,
                          std::move(finest_measure));
}

IntegralResult integrate(const Field& f, const Interval& a, const MeasureSpace& ms, const Interval& support,
                         const Structure<double>& cs, const DefiningSequenceOptions& opts) {
  const Field pos = [&f](double t) -> Eigen::ArrayXd { return f(t).max(0.0); };
  const Field neg = [&f](double t) -> Eigen::ArrayXd { return (-f(t)).max(0.0); };
  std::optional<DefiningSequence> sp, sn;
  try {
    sp.emplace(build_defining_sequence(pos, ms, support, opts));
    sn.emplace(build_defining_sequence(neg, ms, support, opts));
  } catch (const PreconditionError& e) {
    throw NotIntegrableError(std::string("no certified defining sequence: ") + e.what());
  }
  IntegralResult r;
  for (long n = 1; n <= sp->levels(); ++n) r.level_values.push_back(sp->integral(n, a) - sn->integral(n, a));
  r.value = Element(r.level_values.back());
  r.residual = sp->residual() + sn->residual();
  if (r.residual <= cs.tol) {
    r.verdict = Verdict::True;
  } else {
    const long n = sp->levels();
    const bool shrinking = n >= 2 && sp->sup_error(n) + sn->sup_error(n) < sp->sup_error(n - 1) + sn->sup_error(n - 1);
    r.verdict = shrinking ? Verdict::Inconclusive : Verdict::False;
  }
  r.reference = quadrature_reference(f, intersect(a, support), ms).value;
  return r;
}

// --- Vitali / Lebesgue ---------------------------------------------------------------

VitaliReport vitali_audit(const FieldSequence& fn, const MeasureSpace& ms, const Structure<double>& cs,
                          const VitaliOptions& opts) {
  VitaliReport rep;
  const Index dim = fn.term(1, ms.domain().carrier == Carrier::Real ? 0.0 : 1.0).size();
  const Field limit = opts.limit ? opts.limit : [dim](double) { return Eigen::ArrayXd::Zero(dim); };

  std::vector<Interval> sets = opts.finite_sets;
  if (sets.empty()) sets = {ms.exhausting_set(1), ms.exhausting_set(2)};
  rep.in_measure = Verdict::True;
  for (const auto& s : sets)
    rep.in_measure = combine(rep.in_measure, converges_in_measure(fn, limit, s, ms, cs, opts.in_measure).verdict);

  FieldSequence diff;
  diff.term = [&fn, &limit](long n, double t) -> Eigen::ArrayXd { return fn.term(n, t) - limit(t); };
  diff.breakpoints = fn.breakpoints;

  if (opts.eac.probes) rep.eac = equiabsolute_continuity_audit(fn, ms, cs, opts.eac);

  if (opts.dominating) {
    QuadratureOptions q = opts.eac.quadrature;
    const auto hint = integrate_field(ms, opts.dominating, ms.carrier(), q);
    bool ok = !hint.any_diverged();
    const Interval probe = ms.exhausting_set(3);
    const auto [x0, x1] = ms.coordinate_range(probe);
    for (long n = 1; ok && n <= 2 * cs.horizon; ++n) {
      for (long i = 0; ok && i < 1024; ++i) {
        const double t = ms.domain().from_coord(x0 + (x1 - x0) * (i + 0.5) / 1024.0);
        ok = (fn.term(n, t).abs() <= opts.dominating(t) + 1e-12).all();
      }
    }
    rep.dominated = ok;
  }
  rep.hypotheses = rep.in_measure == Verdict::True && (rep.eac.passed() || rep.dominated);

  auto l1 = [&](long n) {
    QuadratureOptions q = opts.eac.quadrature;
    q.breakpoints = fn.breaks(n);
    const Field g = [&diff, n](double t) -> Eigen::ArrayXd { return diff.term(n, t).abs(); };
    const auto r = integrate_field(ms, g, ms.carrier(), q);
    return r.any_diverged() ? kInf : max_abs_entry(r.value);
  };
  MemoizedSequence l1_cached(l1);
  for (long n = 1; n <= opts.report_upto; ++n) rep.l1.push_back(l1_cached(n));
  rep.l1_verdict = tends_to_zero([&](long n) { return l1_cached(n); }, cs);
  return rep;
}

IntegralResult product_integrability(const Field& h, const Field& q, const MeasureSpace& ms, const Interval& support,
                                     const Structure<double>& cs, const DefiningSequenceOptions& opts) {
  const auto [x0, x1] = ms.coordinate_range(support);
  if (!(std::isfinite(x0) && std::isfinite(x1)))
    throw PreconditionError("product: the second factor must have compact support");
  constexpr long kProbe = 4096;
  for (long i = 0; i <= kProbe; ++i) {
    const double x = x0 + (x1 - x0) * static_cast<double>(i) / kProbe;
    const double t = i == 0 ? support.lo : (i == kProbe ? support.hi : ms.domain().from_coord(x));
    const Eigen::ArrayXd hv = h(t), qv = q(t);
    if (!hv.allFinite() || max_abs_entry(hv) > kUnbounded)
      throw PreconditionError("product: first factor is unbounded on the support of the second");
    if (!qv.allFinite() || max_abs_entry(qv) > kUnbounded) throw PreconditionError("product: second factor is unbounded");
  }
  const Field p = [&h, &q](double t) { return broadcast_product(h(t), q(t)); };
  return integrate(p, support, ms, support, cs, opts);
}

}  // namespace rieszlab
