#include "rieszlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace rieszlab {

double Domain::distance(double t1, double t2) const {
  if (metric == Metric::Log) {
    if (!(t1 > 0.0 && t2 > 0.0)) throw DomainError("log metric is defined on R+ only");
    return std::abs(std::log(t1) - std::log(t2));
  }
  return std::abs(t1 - t2);
}

double Domain::to_coord(double t) const {
  if (metric == Metric::Euclidean) return t;
  if (t < 0.0) throw DomainError("log coordinate of a negative point");
  return t == 0.0 ? -kInf : std::log(t);
}

double Domain::from_coord(double x) const { return metric == Metric::Euclidean ? x : std::exp(x); }

Interval intersect(const Interval& a, const Interval& b) {
  Interval r;
  if (a.lo > b.lo || (a.lo == b.lo && a.lo_open)) {
    r.lo = a.lo;
    r.lo_open = a.lo_open;
  } else {
    r.lo = b.lo;
    r.lo_open = b.lo_open;
  }
  if (a.hi < b.hi || (a.hi == b.hi && a.hi_open)) {
    r.hi = a.hi;
    r.hi_open = a.hi_open;
  } else {
    r.hi = b.hi;
    r.hi_open = b.hi_open;
  }
  return r;
}

std::ostream& operator<<(std::ostream& os, const Interval& a) {
  return os << (a.lo_open ? '(' : '[') << a.lo << ", " << a.hi << (a.hi_open ? ')' : ']');
}

IntervalSet::IntervalSet(std::initializer_list<Interval> pieces) : IntervalSet(std::vector<Interval>(pieces)) {}

IntervalSet::IntervalSet(std::vector<Interval> pieces) {
  pieces.erase(std::remove_if(pieces.begin(), pieces.end(), [](const Interval& a) { return a.empty(); }),
               pieces.end());
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && !a.lo_open && b.lo_open);
  });
  for (const auto& p : pieces) {
    if (!pieces_.empty()) {
      Interval& last = pieces_.back();
      const bool touch = p.lo < last.hi || (p.lo == last.hi && !(p.lo_open && last.hi_open));
      if (touch) {
        if (p.hi > last.hi || (p.hi == last.hi && !p.hi_open)) {
          last.hi = p.hi;
          last.hi_open = p.hi_open;
        }
        continue;
      }
    }
    pieces_.push_back(p);
  }
}

bool IntervalSet::contains(double t) const {
  return std::any_of(pieces_.begin(), pieces_.end(), [t](const Interval& a) { return a.contains(t); });
}

IntervalSet IntervalSet::intersect(const Interval& a) const {
  std::vector<Interval> out;
  for (const auto& p : pieces_) out.push_back(rieszlab::intersect(p, a));
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::complement_in(const Interval& universe) const {
  std::vector<Interval> out;
  Interval cur = universe;
  for (const auto& p : pieces_) {
    Interval left{cur.lo, p.lo, cur.lo_open, !p.lo_open};
    out.push_back(rieszlab::intersect(left, universe));
    cur.lo = p.hi;
    cur.lo_open = !p.hi_open;
  }
  out.push_back(rieszlab::intersect(cur, universe));
  return IntervalSet(std::move(out));
}

// --- measure spaces -------------------------------------------------------------

MeasureSpace MeasureSpace::lebesgue() {
  return {Domain::real_line(), MeasureKind::Lebesgue, nullptr, "lebesgue"};
}

MeasureSpace MeasureSpace::lebesgue_positive() {
  return {Domain::positive_half_line(Metric::Euclidean), MeasureKind::Lebesgue, nullptr, "lebesgue-positive"};
}

MeasureSpace MeasureSpace::haar() {
  return {Domain::positive_half_line(Metric::Log), MeasureKind::Haar, nullptr, "haar"};
}

MeasureSpace MeasureSpace::weighted(Domain domain, ScalarField density, std::string name) {
  if (!density) throw ParameterError("weighted measure needs a density");
  return {domain, MeasureKind::Weighted, std::move(density), std::move(name)};
}

Interval MeasureSpace::carrier() const {
  return domain_.carrier == Carrier::Real ? Interval::open(-kInf, kInf) : Interval::open(0.0, kInf);
}

Interval MeasureSpace::exhausting_set(long m) const {
  if (m < 1) throw ParameterError("exhausting sets are indexed from 1");
  const double dm = static_cast<double>(m);
  return domain_.carrier == Carrier::Real ? Interval::closed(-dm, dm) : Interval::closed(std::exp(-dm), std::exp(dm));
}

std::pair<double, double> MeasureSpace::coordinate_range(const Interval& a) const {
  const Interval c = intersect(a, carrier());
  if (c.empty()) return {0.0, 0.0};
  return {domain_.to_coord(c.lo), domain_.to_coord(c.hi)};
}

double MeasureSpace::coordinate_density(double x) const {
  switch (kind_) {
    case MeasureKind::Lebesgue:
      return domain_.metric == Metric::Log ? std::exp(x) : 1.0;
    case MeasureKind::Haar:
      return domain_.metric == Metric::Log ? 1.0 : 1.0 / x;
    case MeasureKind::Weighted: {
      const double t = domain_.from_coord(x);
      return density_(t) * (domain_.metric == Metric::Log ? t : 1.0);
    }
  }
  return 1.0;
}

double MeasureSpace::measure(const Interval& a) const {
  const auto [x0, x1] = coordinate_range(a);
  if (!(x1 > x0)) return 0.0;
  if (kind_ == MeasureKind::Lebesgue && domain_.metric == Metric::Euclidean) return x1 - x0;
  if (kind_ == MeasureKind::Haar && domain_.metric == Metric::Log) return x1 - x0;
  QuadratureOptions opts;
  opts.rel_tol = 1e-13;
  const auto r = integrate_field(*this, [](double) { return Eigen::ArrayXd::Ones(1); }, a, opts);
  return r.value(0);
}

double MeasureSpace::measure(const IntervalSet& a) const {
  double m = 0.0;
  for (const auto& p : a.pieces()) m += measure(p);
  return m;
}

// --- quadrature -----------------------------------------------------------------

namespace {

struct Panel {
  Eigen::ArrayXd value;
  double error = 0.0;
  bool converged = false;
  bool finite = true;
  long evals = 0;
};

double norm_inf(const Eigen::ArrayXd& v) { return v.size() == 0 ? 0.0 : v.abs().maxCoeff(); }

Eigen::ArrayXd midpoint_sum(const Field& g, double a, double b, long n, long& evals, bool& finite) {
  const double h = (b - a) / static_cast<double>(n);
  Eigen::ArrayXd s;
  for (long i = 0; i < n; ++i) {
    Eigen::ArrayXd v = g(a + (static_cast<double>(i) + 0.5) * h);
    if (i == 0)
      s = std::move(v);
    else
      s += v;
  }
  evals += n;
  finite = s.allFinite();
  return s * h;
}

// Romberg extrapolation of composite midpoint sums with doubling node
// counts. Picks the column whose level-to-level change is smallest, which
// keeps kinks inside a panel from being amplified by high-order columns.
Panel romberg_table(const Field& g, double a, double b, const QuadratureOptions& o, long cap) {
  Panel p;
  std::vector<std::vector<Eigen::ArrayXd>> r;
  long n = 4;
  for (int k = 0; n <= std::max<long>(cap, 4); ++k, n *= 2) {
    bool finite = true;
    r.push_back({midpoint_sum(g, a, b, n, p.evals, finite)});
    if (!finite) {
      p.value = r.back()[0];
      p.finite = false;
      return p;
    }
    double factor = 4.0;
    for (int j = 1; j <= k; ++j, factor *= 4.0)
      r[k].push_back(r[k][j - 1] + (r[k][j - 1] - r[k - 1][j - 1]) / (factor - 1.0));
    if (k == 0) {
      p.value = r[0][0];
      p.error = kInf;
      continue;
    }
    double best = kInf;
    int best_j = 0;
    for (int j = 0; j < k; ++j) {
      const double e = norm_inf(r[k][j] - r[k - 1][j]);
      if (e < best) {
        best = e;
        best_j = j;
      }
    }
    p.value = r[k][best_j];
    p.error = best;
    if (k >= 2 && best <= std::max(o.abs_tol, o.rel_tol * norm_inf(p.value))) {
      p.converged = true;
      return p;
    }
  }
  return p;
}

constexpr long kTableCap = 128;
constexpr int kMaxDepth = 14;

// Small Romberg tables with recursive bisection of the panels that do not
// settle; steep or kinked integrands get local refinement instead of a
// single deep table. `resolution` bounds the evaluations spent on one panel.
Panel adaptive(const Field& g, double a, double b, const QuadratureOptions& o, double floor, int depth, long& budget) {
  QuadratureOptions local = o;
  local.abs_tol = std::max(o.abs_tol, floor);
  Panel p = romberg_table(g, a, b, local, kTableCap);
  budget -= p.evals;
  if (p.converged || !p.finite || depth >= kMaxDepth || budget <= 0) return p;
  const double mid = 0.5 * (a + b);
  const double half_floor = 0.5 * std::max(floor, o.rel_tol * norm_inf(p.value));
  Panel left = adaptive(g, a, mid, o, half_floor, depth + 1, budget);
  if (!left.finite) {
    left.evals += p.evals;
    return left;
  }
  Panel right = adaptive(g, mid, b, o, half_floor, depth + 1, budget);
  Panel out;
  out.evals = p.evals + left.evals + right.evals;
  out.finite = right.finite;
  out.value = right.finite ? Eigen::ArrayXd(left.value + right.value) : right.value;
  out.error = left.error + right.error;
  out.converged = left.converged && right.converged;
  return out;
}

constexpr double kKronrodNodes[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                     0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                     0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                     0.207784955007898467600689403773245, 0.0};
constexpr double kKronrodWeights[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                       0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes.
constexpr double kGaussWeights[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                     0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
constexpr int kMaxKronrodDepth = 40;

Panel kronrod15(const Field& g, double a, double b) {
  Panel p;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  Eigen::ArrayXd center = g(c);
  Eigen::ArrayXd k = kKronrodWeights[7] * center, gs = kGaussWeights[3] * center;
  for (int i = 0; i < 7; ++i) {
    const Eigen::ArrayXd pair = g(c - h * kKronrodNodes[i]) + g(c + h * kKronrodNodes[i]);
    k += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gs += kGaussWeights[i / 2] * pair;
  }
  p.evals = 15;
  p.value = h * k;
  p.finite = p.value.allFinite();
  p.error = p.finite ? norm_inf(h * (k - gs)) : kInf;
  return p;
}

Panel kronrod_adaptive(const Field& g, double a, double b, const QuadratureOptions& o, double floor, int depth,
                       long& budget) {
  Panel p = kronrod15(g, a, b);
  budget -= p.evals;
  if (!p.finite) return p;
  p.converged = p.error <= std::max({o.abs_tol, floor, o.rel_tol * norm_inf(p.value)});
  if (p.converged || depth >= kMaxKronrodDepth || budget <= 0) return p;
  const double mid = 0.5 * (a + b);
  const double half_floor = 0.5 * std::max(floor, o.rel_tol * norm_inf(p.value));
  Panel left = kronrod_adaptive(g, a, mid, o, half_floor, depth + 1, budget);
  if (!left.finite) {
    left.evals += p.evals;
    return left;
  }
  Panel right = kronrod_adaptive(g, mid, b, o, half_floor, depth + 1, budget);
  Panel out;
  out.evals = p.evals + left.evals + right.evals;
  out.finite = right.finite;
  out.value = right.finite ? Eigen::ArrayXd(left.value + right.value) : right.value;
  out.error = left.error + right.error;
  out.converged = left.converged && right.converged;
  return out;
}

Panel romberg(const Field& g, double a, double b, const QuadratureOptions& o) {
  long budget = std::max<long>(o.resolution, 4);
  if (o.rule == PanelRule::GaussKronrod) return kronrod_adaptive(g, a, b, o, o.abs_tol, 0, budget);
  return adaptive(g, a, b, o, o.abs_tol, 0, budget);
}

// Sum of geometrically growing (or shrinking) pieces. `piece(k)` returns the
// k-th piece (k >= 0). Entries stop when their piece falls below tolerance;
// an entry whose pieces fail to shrink is declared divergent.
struct Series {
  Eigen::ArrayXd sum;
  Eigen::Array<bool, Eigen::Dynamic, 1> diverged;
  double error = 0.0;
  long evals = 0;
  bool converged = true;
};

// Pieces only need to be accurate relative to the whole sum, so each one is
// integrated with an absolute floor taken from the sum accumulated so far.
Series exhaust(const std::function<Panel(long, const QuadratureOptions&)>& piece, long max_pieces,
               const QuadratureOptions& o, double scale) {
  Series s;
  QuadratureOptions po = o;
  Eigen::ArrayXd prev;
  Eigen::ArrayXi stalls;
  Eigen::Array<bool, Eigen::Dynamic, 1> done;
  constexpr double kStall = 0.99;
  constexpr int kStallRun = 8;
  for (long k = 0; k < max_pieces; ++k) {
    if (k > 0) po.abs_tol = std::max(o.abs_tol, o.rel_tol * std::max(scale, norm_inf(s.sum)));
    Panel p = piece(k, po);
    s.evals += p.evals;
    s.converged = s.converged && (p.converged || !p.finite);
    if (k == 0) {
      s.sum = Eigen::ArrayXd::Zero(p.value.size());
      s.diverged = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(p.value.size(), false);
      done = s.diverged;
      stalls = Eigen::ArrayXi::Zero(p.value.size());
      prev = Eigen::ArrayXd::Constant(p.value.size(), kInf);
    }
    for (Index i = 0; i < p.value.size(); ++i) {
      if (done(i)) continue;
      const double v = p.value(i);
      if (!std::isfinite(v)) {
        s.diverged(i) = done(i) = true;
        continue;
      }
      s.sum(i) += v;
      const double a = std::abs(v);
      if (k >= 2 && a <= std::max(o.abs_tol, o.rel_tol * std::abs(s.sum(i)))) {
        done(i) = true;
        continue;
      }
      stalls(i) = (std::isfinite(prev(i)) && a >= kStall * std::abs(prev(i)) && a > 0.0) ? stalls(i) + 1 : 0;
      if (stalls(i) >= kStallRun) s.diverged(i) = done(i) = true;
      prev(i) = v;
    }
    s.error += p.error;
    if (done.all()) return s;
  }
  // Pieces never resolved: treat the unresolved entries as divergent.
  for (Index i = 0; i < done.size(); ++i)
    if (!done(i)) s.diverged(i) = true;
  return s;
}

bool finite_at(const Field& g, double x) {
  try {
    return g(x).allFinite();
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

QuadratureResult integrate_coordinate(const Field& g, double a, double b, const QuadratureOptions& o,
                                      const std::vector<double>& coord_breaks) {
  QuadratureResult res;
  if (!(b > a)) {
    res.value = g(std::isfinite(a) ? a : (std::isfinite(b) ? b : 0.0)) * 0.0;
    res.value = res.value.isNaN().select(0.0, res.value);
    res.diverged = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(res.value.size(), false);
    return res;
  }

  std::vector<double> cuts;
  for (double c : coord_breaks)
    if (std::isfinite(c) && c > a && c < b) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Finite anchor points for the exhaustion of infinite ends.
  double lo = a, hi = b;
  if (!std::isfinite(a)) lo = cuts.empty() ? (std::isfinite(b) ? b - 1.0 : -1.0) : cuts.front();
  if (!std::isfinite(b)) hi = cuts.empty() ? (std::isfinite(a) ? a + 1.0 : 1.0) : cuts.back();
  if (lo > hi) std::swap(lo, hi);
  std::vector<double> nodes{lo};
  for (double c : cuts)
    if (c > lo && c < hi) nodes.push_back(c);
  nodes.push_back(hi);

  Eigen::ArrayXd total;
  Eigen::Array<bool, Eigen::Dynamic, 1> div;
  auto accumulate = [&](const Eigen::ArrayXd& v, const Eigen::Array<bool, Eigen::Dynamic, 1>& d, double err,
                        long evals, bool conv) {
    if (total.size() == 0) {
      total = Eigen::ArrayXd::Zero(v.size());
      div = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(v.size(), false);
    }
    if (v.size() != total.size()) throw DimensionError("integrand changed its index set");
    total += d.select(0.0, v);
    div = div || d;
    res.error_estimate += err;
    res.evaluations += evals;
    res.converged = res.converged && conv;
  };
  auto current_scale = [&] { return total.size() == 0 ? 0.0 : norm_inf(div.select(0.0, total)); };
  auto no_div = [](Index n) { return Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, false); };

  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double x0 = nodes[k], x1 = nodes[k + 1];
    if (!(x1 > x0)) continue;
    // Carrier ends and breakpoints alike may carry a singularity; the
    // synthetic anchors of infinite ends are regular points.
    const bool touches_lo = o.detect_singular_ends && (k > 0 || std::isfinite(a) || !cuts.empty());
    const bool touches_hi = o.detect_singular_ends && (k + 2 < nodes.size() || std::isfinite(b) || !cuts.empty());
    bool sing_lo = touches_lo && !finite_at(g, x0);
    bool sing_hi = touches_hi && !finite_at(g, x1);
    if (!sing_lo && !sing_hi) {
      Panel p = romberg(g, x0, x1, o);
      if (!p.finite) {
        accumulate(p.value, !p.value.isFinite(), 0.0, p.evals, false);
        continue;
      }
      // A panel that does not settle may hide an unbounded integrand with a
      // finite value at the endpoint itself; exhaust towards its ends.
      if (p.converged || !(touches_lo || touches_hi)) {
        accumulate(p.value, no_div(p.value.size()), p.error, p.evals, p.converged);
        continue;
      }
      res.evaluations += p.evals;
      sing_lo = touches_lo;
      sing_hi = touches_hi;
    }
    // Geometric exhaustion towards a singular endpoint.
    const double w = x1 - x0;
    double core_lo = x0, core_hi = x1;
    if (sing_lo && sing_hi) {
      core_lo = x0 + 0.25 * w;
      core_hi = x1 - 0.25 * w;
    } else if (sing_lo) {
      core_lo = x0 + 0.5 * w;
    } else {
      core_hi = x1 - 0.5 * w;
    }
    Panel core = romberg(g, core_lo, core_hi, o);
    accumulate(core.value, no_div(core.value.size()), core.error, core.evals, core.converged);
    auto side = [&](bool left) {
      const double anchor = left ? x0 : x1;
      const double len = left ? core_lo - x0 : x1 - core_hi;
      return exhaust(
          [&](long j, const QuadratureOptions& po) {
            const double far = len * std::ldexp(1.0, -static_cast<int>(j));
            const double near = len * std::ldexp(1.0, -static_cast<int>(j) - 1);
            return left ? romberg(g, anchor + near, anchor + far, po) : romberg(g, anchor - far, anchor - near, po);
          },
          1000, o, current_scale());
    };
    if (sing_lo) {
      Series s = side(true);
      accumulate(s.sum, s.diverged, s.error, s.evals, s.converged);
    }
    if (sing_hi) {
      Series s = side(false);
      accumulate(s.sum, s.diverged, s.error, s.evals, s.converged);
    }
  }

  auto tail = [&](bool left) {
    const double anchor = left ? lo : hi;
    return exhaust(
        [&](long j, const QuadratureOptions& po) {
          const double inner = std::ldexp(1.0, static_cast<int>(j)) - 1.0;
          const double outer = std::ldexp(1.0, static_cast<int>(j) + 1) - 1.0;
          return left ? romberg(g, anchor - outer, anchor - inner, po) : romberg(g, anchor + inner, anchor + outer, po);
        },
        60, o, current_scale());
  };
  if (!std::isfinite(a)) {
    Series s = tail(true);
    accumulate(s.sum, s.diverged, s.error, s.evals, s.converged);
  }
  if (!std::isfinite(b)) {
    Series s = tail(false);
    accumulate(s.sum, s.diverged, s.error, s.evals, s.converged);
  }

  res.value = div.select(kInf, total);
  res.diverged = div;
  return res;
}

QuadratureResult integrate_field(const MeasureSpace& ms, const Field& f, const Interval& a,
                                 const QuadratureOptions& o) {
  const auto [x0, x1] = ms.coordinate_range(a);
  std::vector<double> breaks;
  for (double t : o.breakpoints)
    if (ms.domain().contains(t)) breaks.push_back(ms.domain().to_coord(t));
  const Domain& d = ms.domain();
  Field g;
  if (ms.kind() == MeasureKind::Haar && d.metric == Metric::Log) {
    g = [&](double x) { return f(std::exp(x)); };
  } else if (ms.kind() == MeasureKind::Lebesgue && d.metric == Metric::Euclidean) {
    g = f;
  } else {
    g = [&](double x) -> Eigen::ArrayXd {
      const double w = ms.coordinate_density(x);
      Eigen::ArrayXd v = f(d.from_coord(x));
      // 0 * inf = 0 where the density vanishes.
      return w == 0.0 ? Eigen::ArrayXd::Zero(v.size()) : Eigen::ArrayXd(v * w);
    };
  }
  if (!(x1 > x0)) {
    const double probe = std::isfinite(x0) ? x0 : 0.0;
    const Eigen::ArrayXd v = f(d.from_coord(probe));
    QuadratureResult r;
    r.value = Eigen::ArrayXd::Zero(v.size());
    r.diverged = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(v.size(), false);
    return r;
  }
  return integrate_coordinate(g, x0, x1, o, breaks);
}

QuadratureResult integrate_field(const MeasureSpace& ms, const Field& f, const IntervalSet& a,
                                 const QuadratureOptions& o) {
  QuadratureResult total;
  for (const auto& p : a.pieces()) {
    QuadratureResult r = integrate_field(ms, f, p, o);
    if (total.value.size() == 0) {
      total = std::move(r);
      continue;
    }
    total.diverged = total.diverged || r.diverged;
    total.value = total.diverged.select(kInf, total.value + r.value);
    total.error_estimate += r.error_estimate;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  if (total.value.size() == 0) {
    // Empty set: the index set size is unknown until f is probed.
    const Eigen::ArrayXd v = f(ms.domain().carrier == Carrier::Real ? 0.0 : 1.0);
    total.value = Eigen::ArrayXd::Zero(v.size());
    total.diverged = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(v.size(), false);
  }
  return total;
}

double integrate_scalar(const MeasureSpace& ms, const ScalarField& f, const Interval& a,
                        const QuadratureOptions& opts) {
  return integrate_field(ms, scalar_field(f), a, opts).value(0);
}

}  // namespace rieszlab
