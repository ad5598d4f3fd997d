#include "rieszlab/axiom_audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace rieszlab {

namespace {

Element vec(double a, double b) { return Element{a, b}; }

bool is_square(long n) {
  const auto r = static_cast<long>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n;
}

// All terms n = 1..L of one sequence, one column per index.
struct Table {
  std::string name;
  std::shared_ptr<const Eigen::MatrixXd> v;
  std::optional<Element> expected;

  Sequence seq(long horizon) const {
    return {[v = v, name = name](long n) {
              if (n < 1 || n > v->cols()) throw PreconditionError("audit table '" + name + "': index beyond the tabulated range");
              return Element(Eigen::ArrayXd(v->col(n - 1).array()));
            },
            horizon};
  }
};

Table tabulate(std::string name, const std::function<Element(long)>& term, long len, std::optional<Element> expected) {
  const Index dim = term(1).size();
  Eigen::MatrixXd m(dim, len);
  for (long n = 1; n <= len; ++n) m.col(n - 1) = term(n).values().matrix();
  return {std::move(name), std::make_shared<const Eigen::MatrixXd>(std::move(m)), std::move(expected)};
}

Table from_matrix(std::string name, Eigen::MatrixXd m, std::optional<Element> expected = {}) {
  return {std::move(name), std::make_shared<const Eigen::MatrixXd>(std::move(m)), std::move(expected)};
}

ClauseReport clause(std::string name) {
  ClauseReport c;
  c.clause = std::move(name);
  return c;
}

// Pseudo-random weight in [0, 1] attached to an index.
double theta(long n) {
  std::uint64_t z = static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 31;
  return static_cast<double>(z % 1001) / 1000.0;
}

class Auditor {
 public:
  Auditor(const Structure<double>& cs, const LimsupOperator<double>& ls, const std::vector<BankEntry>& bank)
      : cs_(cs), ls_(ls), n_(cs.horizon), len_(2 * cs.horizon + cs.offsets() + 16) {
    if (cs.horizon < 20) throw ParameterError("axiom audit: horizon must be at least 20");
    for (const auto& e : bank) {
      Table t = tabulate(e.name, e.term, len_, e.expected(cs));
      if (t.v->rows() != 2 && !tables_.empty() && t.v->rows() != tables_.front().v->rows())
        throw DimensionError("axiom audit: bank entries over different index sets");
      if (t.expected) members_.push_back(tables_.size());
      Eigen::MatrixXd a = t.v->cwiseAbs();
      positive_.push_back(from_matrix("|" + e.name + "|", std::move(a),
                                      t.expected ? std::optional<Element>(abs(*t.expected)) : std::nullopt));
      tables_.push_back(std::move(t));
    }
    if (members_.size() < 3) throw PreconditionError("axiom audit: the bank needs at least three convergent entries");
  }

  AxiomReport run(const std::string& name) {
    AxiomReport r;
    r.structure = name.empty() ? std::string(to_string(cs_.kind)) : name;
    r.limsup = ls_.name();
    r.horizon = n_;
    r.tol = cs_.tol;
    r.clauses = {linearity(),      monotonicity(),         constants(),          modulus(),
                 squeeze(),        scaled_unit(),          lower_bound(),        limsup_finite_changes(),
                 subadditivity(),  limsup_monotonicity(),  limsup_agrees(),      limsup_zero(),
                 norm_null(),      h_restriction()};
    return r;
  }

 private:
  LimitEstimate<double> ell(const Table& t) const { return limit(t.seq(n_), cs_); }
  Element bar(const Table& t) const { return ls_(t.seq(n_)); }
  const Table& member(std::size_t k) const { return tables_[members_[k % members_.size()]]; }

  // x_n <= y_n for every n in [N/2, 2N].
  bool definitely_leq(const Table& x, const Table& y) const {
    const long a = n_ / 2 - 1, w = 2 * n_ - a;
    return (x.v->middleCols(a, w).array() <= y.v->middleCols(a, w).array()).all();
  }

  static void record(ClauseReport& c, double violation, Witness w) {
    ++c.checks;
    if (violation > 0.0 && violation > c.worst) {
      c.passed = false;
      c.worst = violation;
      c.witness = std::move(w);
    }
  }

  // Largest entrywise excess of x over y (> 0 means x <= y fails).
  static std::pair<double, long> excess(const Element& x, const Element& y) {
    double worst = -std::numeric_limits<double>::infinity();
    long at = -1;
    for (Index i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      if (d > worst) {
        worst = d;
        at = static_cast<long>(i);
      }
    }
    return {worst, at};
  }

  static std::pair<double, long> distance(const Element& x, const Element& y) {
    double worst = 0.0;
    long at = -1;
    for (Index i = 0; i < x.size(); ++i) {
      const double d = std::abs(x[i] - y[i]);
      if (!(d <= worst)) {
        worst = d;
        at = static_cast<long>(i);
      }
    }
    return {worst, at};
  }

  static std::string show(const Element& x) {
    std::ostringstream os;
    os << x;
    return os.str();
  }

  // A False membership verdict counts as a violation of size 1; an
  // inconclusive one is tallied but only the value comparison can fail.
  void require_member(ClauseReport& c, const LimitEstimate<double>& e, const std::vector<std::string>& names) const {
    if (e.verdict == Verdict::Inconclusive) ++c.undecided;
    record(c, e.verdict == Verdict::False ? 1.0 : 0.0, {names, -1, "membership verdict false"});
  }

  void require_close(ClauseReport& c, const Element& got, const Element& want, double slack,
                     const std::vector<std::string>& names, const std::string& what) const {
    const auto [d, at] = distance(got, want);
    record(c, d - slack, {names, at, what + ": got " + show(got) + ", expected " + show(want)});
  }

  void require_leq(ClauseReport& c, const Element& x, const Element& y, double slack,
                   const std::vector<std::string>& names, const std::string& what) const {
    const auto [d, at] = excess(x, y);
    record(c, d - slack, {names, at, what + ": " + show(x) + " exceeds " + show(y)});
  }

  ClauseReport linearity() const {
    ClauseReport c = clause("linearity");
    const std::vector<std::pair<double, double>> zetas{{1.0, 1.0}, {2.0, -1.0}, {-0.5, 3.0}};
    for (std::size_t i = 0; i < members_.size(); ++i)
      for (std::size_t j = i + 1; j <= i + 2; ++j) {
        const Table& x = member(i);
        const Table& y = member(j);
        const auto lx = ell(x), ly = ell(y);
        for (const auto& [a, b] : zetas) {
          const Table z = from_matrix("combo", a * *x.v + b * *y.v);
          const auto lz = ell(z);
          const std::vector<std::string> names{x.name, y.name};
          require_member(c, lz, names);
          require_close(c, lz.value, a * lx.value + b * ly.value, 2 * cs_.tol, names, "limit of the combination");
        }
      }
    return c;
  }

  ClauseReport monotonicity() const {
    ClauseReport c = clause("monotonicity");
    for (std::size_t i = 0; i < members_.size(); ++i)
      for (std::size_t j = 0; j < members_.size(); ++j) {
        if (i == j) continue;
        const Table& x = member(i);
        const Table& y = member(j);
        if (!definitely_leq(x, y)) continue;
        require_leq(c, ell(x).value, ell(y).value, cs_.tol, {x.name, y.name}, "limits out of order");
      }
    return c;
  }

  ClauseReport constants() const {
    ClauseReport c = clause("constants-and-finite-changes");
    for (const Element& l : {vec(0, 0), vec(1, -2), vec(-3.5, 0.25)}) {
      const Table t = tabulate(
          "eventually " + show(l), [l](long n) { return n <= 10 ? l + vec(1, -1) : l; }, len_, l);
      const auto e = ell(t);
      require_member(c, e, {t.name});
      require_close(c, e.value, l, cs_.tol, {t.name}, "limit of an eventually constant sequence");
    }
    for (std::size_t i = 0; i < members_.size(); ++i) {
      const Table& x = member(i);
      const auto before = ell(x);
      if (before.verdict != Verdict::True) continue;
      Eigen::MatrixXd m = *x.v;
      m.leftCols(10).array() += 1.0;
      const auto after = ell(from_matrix("modified", std::move(m)));
      require_member(c, after, {x.name});
      require_close(c, after.value, before.value, cs_.tol, {x.name}, "limit after changing ten terms");
    }
    return c;
  }

  ClauseReport modulus() const {
    ClauseReport c = clause("modulus");
    for (std::size_t i = 0; i < members_.size(); ++i) {
      const Table& x = member(i);
      const auto lx = ell(x);
      const auto la = ell(positive_[members_[i]]);
      require_member(c, la, {x.name});
      require_close(c, la.value, abs(lx.value), 2 * cs_.tol, {x.name}, "limit of |x_n| against |limit|");
    }
    return c;
  }

  ClauseReport squeeze() const {
    ClauseReport c = clause("squeeze");
    for (std::size_t i = 0; i < members_.size(); ++i)
      for (std::size_t j = 0; j < members_.size(); ++j) {
        if (i == j) continue;
        const Table& x = member(i);
        const Table& z = member(j);
        if (distance(*x.expected, *z.expected).first > 1e-12 || !definitely_leq(x, z)) continue;
        for (int variant = 0; variant < 2; ++variant) {
          Eigen::MatrixXd m(x.v->rows(), x.v->cols());
          for (Index k = 0; k < m.cols(); ++k) {
            const double w = variant == 0 ? theta(k + 1) : static_cast<double>((k + 1) % 2);
            m.col(k) = x.v->col(k) + w * (z.v->col(k) - x.v->col(k));
          }
          const auto ly = ell(from_matrix("between", std::move(m)));
          require_member(c, ly, {x.name, z.name});
          require_close(c, ly.value, ell(x).value, 2 * cs_.tol, {x.name, z.name}, "limit of the squeezed sequence");
        }
      }
    return c;
  }

  ClauseReport scaled_unit() const {
    ClauseReport c = clause("scaled-unit-vanishes");
    for (const Element& u : {vec(1, 1), vec(1, 3), vec(0.5, 0)}) {
      const Table t = tabulate("u/n, u = " + show(u), [u](long n) { return u / static_cast<double>(n); }, len_, Element(2));
      const auto e = ell(t);
      require_member(c, e, {t.name});
      require_close(c, e.value, Element(2), cs_.tol, {t.name}, "limit of u/n");
    }
    return c;
  }

  ClauseReport lower_bound() const {
    ClauseReport c = clause("lower-bound");
    const long a = n_ / 2 - 1, w = 2 * n_ - a;
    for (std::size_t i = 0; i < members_.size(); ++i) {
      const Table& y = member(i);
      const Element x(Eigen::ArrayXd(y.v->middleCols(a, w).rowwise().minCoeff().array()));
      require_leq(c, x, ell(y).value, cs_.tol, {y.name}, "eventual lower bound above the limit");
    }
    return c;
  }

  ClauseReport limsup_finite_changes() const {
    ClauseReport c = clause("limsup-finite-changes");
    for (const Table& p : positive_) {
      Eigen::MatrixXd m = *p.v;
      m.leftCols(10).array() += 1.0;
      require_close(c, bar(from_matrix("modified", std::move(m))), bar(p), cs_.tol, {p.name},
                    "limsup after changing ten terms");
    }
    return c;
  }

  ClauseReport subadditivity() const {
    ClauseReport c = clause("limsup-subadditivity");
    for (std::size_t i = 0; i < positive_.size(); ++i)
      for (std::size_t j = i; j < positive_.size(); ++j) {
        const Table& x = positive_[i];
        const Table& y = positive_[j];
        const Element sum = bar(from_matrix("sum", *x.v + *y.v));
        require_leq(c, sum, bar(x) + bar(y), cs_.tol, {x.name, y.name}, "limsup of the sum");
      }
    return c;
  }

  ClauseReport limsup_monotonicity() const {
    ClauseReport c = clause("limsup-monotonicity");
    for (const Table& x : positive_)
      for (const Table& y : positive_) {
        if (&x == &y || !definitely_leq(x, y)) continue;
        require_leq(c, bar(x), bar(y), cs_.tol, {x.name, y.name}, "limsups out of order");
      }
    return c;
  }

  ClauseReport limsup_agrees() const {
    ClauseReport c = clause("limsup-agrees-with-limit");
    for (std::size_t i : members_) {
      const Table& p = positive_[i];
      require_close(c, bar(p), ell(p).value, 2 * cs_.tol, {p.name}, "limsup against limit");
    }
    return c;
  }

  // A finite-horizon limsup at most tol / 2 is read as zero.
  ClauseReport limsup_zero() const {
    ClauseReport c = clause("limsup-zero-forces-limit-zero");
    for (const Table& p : positive_) {
      if (max_abs(bar(p)) > 0.5 * cs_.tol) continue;
      const Verdict v = estimate_limit(p.seq(n_), cs_, Element(p.v->rows()));
      record(c, v == Verdict::True ? 0.0 : 1.0, {{p.name}, -1, "null limsup but verdict " + std::string(to_string(v))});
    }
    return c;
  }

  // Sequences with e-norms tending to zero in R tend to zero in X (e = all-ones).
  ClauseReport norm_null() const {
    ClauseReport c = clause("norm-null-is-null");
    Structure<double> real = cs_;
    real.unit.reset();
    real.o_regulator = {};
    for (const Table& p : positive_) {
      Eigen::MatrixXd norms = p.v->colwise().maxCoeff();
      const Table r = from_matrix("norms", std::move(norms));
      if (estimate_limit(r.seq(n_), real, Element(1)) != Verdict::True) continue;
      const Verdict v = estimate_limit(p.seq(n_), cs_, Element(p.v->rows()));
      record(c, v == Verdict::True ? 0.0 : 1.0, {{p.name}, -1, "norms vanish but verdict " + std::string(to_string(v))});
    }
    return c;
  }

  ClauseReport h_restriction() const {
    ClauseReport c = clause("h-restriction");
    if (cs_.kind != ConvergenceKind::Filter || cs_.filter.kind != FilterKind::Density) {
      c.applicable = false;
      return c;
    }
    const std::vector<std::pair<std::string, std::function<bool(long)>>> hs{
        {"non-squares", [](long n) { return !is_square(n); }}, {"n not divisible by 97", [](long n) { return n % 97 != 0; }}};
    for (const Table& p : positive_)
      for (const auto& [hname, h] : hs) {
        const Element gap = h_restriction_gap(p.seq(n_), cs_, h);
        record(c, max_abs(gap) - cs_.tol, {{p.name, hname}, -1, "limsup over H differs by " + show(gap)});
      }
    return c;
  }

  Structure<double> cs_;
  LimsupOperator<double> ls_;
  long n_;
  long len_;
  std::vector<Table> tables_;
  std::vector<Table> positive_;
  std::vector<std::size_t> members_;
};

}  // namespace

std::optional<Element> BankEntry::expected(const Structure<double>& cs) const {
  const bool statistical = cs.kind == ConvergenceKind::Cesaro || cs.kind == ConvergenceKind::Almost ||
                           (cs.kind == ConvergenceKind::Filter && cs.filter.kind == FilterKind::Density);
  if (statistical && statistical_limit) return statistical_limit;
  return limit;
}

std::vector<BankEntry> standard_bank() {
  using std::numbers::e;
  using std::numbers::egamma;
  using std::numbers::pi;
  const Element u = vec(1, 2), one = vec(1, 1);
  auto d = [](long n) { return static_cast<double>(n); };
  std::vector<BankEntry> b;
  auto add = [&b](std::string name, std::function<Element(long)> f, std::optional<Element> l,
                  std::optional<Element> s = std::nullopt) { b.push_back({std::move(name), std::move(f), l, s}); };

  add("constant (0.5, -1)", [](long) { return vec(0.5, -1); }, vec(0.5, -1));
  add("zero", [](long) { return vec(0, 0); }, vec(0, 0));
  add("constant after ten other terms", [](long n) { return n <= 10 ? vec(4, -3) : vec(3, -2); }, vec(3, -2));
  add("u/n", [=](long n) { return u / d(n); }, vec(0, 0));
  add("c + u/n", [=](long n) { return one + u / d(n); }, one);
  add("c - u/n", [=](long n) { return one - u / d(n); }, one);
  add("c + 2u/n", [=](long n) { return one + 2.0 * u / d(n); }, one);
  add("(-1)^n u/n", [=](long n) { return (n % 2 ? -1.0 : 1.0) / d(n) * u; }, vec(0, 0));
  add("1/sqrt(n)", [=](long n) { return one / std::sqrt(d(n)); }, vec(0, 0));
  add("5 * 2^-n", [=](long n) { return 5.0 * std::ldexp(1.0, static_cast<int>(-std::min(n, 1000L))) * one; }, vec(0, 0));
  add("(1 + 1/n)^n", [=](long n) { return vec(std::pow(1 + 1 / d(n), d(n)), 0); }, vec(e, 0));
  add("n sin(1/n)", [=](long n) { return d(n) * std::sin(1 / d(n)) * one; }, one);
  add("n/(n+1) (2, -1)", [=](long n) { return d(n) / (d(n) + 1) * vec(2, -1); }, vec(2, -1));
  add("log(n)/n", [=](long n) { return std::log(d(n)) / d(n) * one; }, vec(0, 0));
  add("cos(n)/n (1, -1)", [=](long n) { return std::cos(d(n)) / d(n) * vec(1, -1); }, vec(0, 0));
  add("atan(n)", [=](long n) { return std::atan(d(n)) * one; }, (pi / 2) * one);
  add("(1 + (-1)^n/n) u", [=](long n) { return (1 + (n % 2 ? -1.0 : 1.0) / d(n)) * u; }, u);
  add("harmonic minus log", [=](long n) {
        double h = 0;
        for (long k = 1; k <= n; ++k) h += 1 / d(k);
        return (h - std::log(d(n))) * one;
      },
      egamma * one);
  add("sqrt(n+1) - sqrt(n)", [=](long n) { return (std::sqrt(d(n) + 1) - std::sqrt(d(n))) * one; }, vec(0, 0));
  add("(n^2+1)/(2n^2+n)", [=](long n) { return (d(n) * d(n) + 1) / (2 * d(n) * d(n) + d(n)) * one; }, 0.5 * one);
  add("partial sums of 1/k^2", [=](long n) {
        double s = 0;
        for (long k = n; k >= 1; --k) s += 1 / (d(k) * d(k));
        return vec(s, 0);
      },
      vec(pi * pi / 6, 0));
  add("sin(1/n) (-1, 1)", [=](long n) { return std::sin(1 / d(n)) * vec(-1, 1); }, vec(0, 0));
  add("(-0.9)^n", [=](long n) { return std::pow(-0.9, d(std::min(n, 5000L))) * one; }, vec(0, 0));
  add("n^(1/n)", [=](long n) { return std::pow(d(n), 1 / d(n)) * one; }, one);
  add("max(1/n, 2/n^2) (1, 3)", [=](long n) { return std::max(1 / d(n), 2 / (d(n) * d(n))) * vec(1, 3); }, vec(0, 0));
  add("-1 + exp(-n/7)", [=](long n) { return (-1 + std::exp(-d(n) / 7)) * one; }, -1.0 * one);
  add("2 + sin(n)/n", [=](long n) { return vec(2, 2) + std::sin(d(n)) / d(n) * one; }, vec(2, 2));
  // Statistical but not ordinary limits.
  // Statistical but not ordinary limits. The exceptional sets are sparse
  // enough that any two together stay below the 1% quantile slack at N = 2000.
  auto even_square = [](long n) { return n % 4 == 0 && is_square(n); };
  auto fourth_power = [](long n) {
    const auto r = static_cast<long>(std::llround(std::sqrt(std::sqrt(static_cast<double>(n)))));
    return r * r * r * r == n;
  };
  add("indicator of even squares", [=](long n) { return even_square(n) ? one : vec(0, 0); }, std::nullopt, vec(0, 0));
  add("(2, 3) + indicator of even squares", [=](long n) { return vec(2, 3) + (even_square(n) ? one : vec(0, 0)); },
      std::nullopt, vec(2, 3));
  add("1/n + indicator of fourth powers (0, 1)",
      [=](long n) { return one / d(n) + (fourth_power(n) ? vec(0, 1) : vec(0, 0)); }, std::nullopt, vec(0, 0));
  // Bounded and divergent in every sense used here.
  add("(-1)^n", [=](long n) { return (n % 2 ? -1.0 : 1.0) * one; }, std::nullopt);
  add("sin(n)", [=](long n) { return std::sin(d(n)) * one; }, std::nullopt);
  add("indicator of multiples of 3", [=](long n) { return n % 3 == 0 ? one : vec(0, 0); }, std::nullopt);
  add("(1, (-1)^n)", [=](long n) { return vec(1, n % 2 ? -1.0 : 1.0); }, std::nullopt);
  return b;
}

const std::vector<std::string>& audit_clauses() {
  static const std::vector<std::string> names{"linearity",
                                              "monotonicity",
                                              "constants-and-finite-changes",
                                              "modulus",
                                              "squeeze",
                                              "scaled-unit-vanishes",
                                              "lower-bound",
                                              "limsup-finite-changes",
                                              "limsup-subadditivity",
                                              "limsup-monotonicity",
                                              "limsup-agrees-with-limit",
                                              "limsup-zero-forces-limit-zero",
                                              "norm-null-is-null",
                                              "h-restriction"};
  return names;
}

bool AxiomReport::passed() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const ClauseReport& c) { return !c.applicable || c.passed; });
}

const ClauseReport& AxiomReport::clause(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.clause == name) return c;
  throw LookupError("axiom report: no clause named '" + name + "'");
}

std::string AxiomReport::to_json() const {
  nlohmann::ordered_json j;
  j["structure"] = structure;
  j["limsup"] = limsup;
  j["horizon"] = horizon;
  j["tol"] = tol;
  j["passed"] = passed();
  j["clauses"] = nlohmann::ordered_json::array();
  for (const auto& c : clauses) {
    nlohmann::ordered_json k;
    k["clause"] = c.clause;
    k["applicable"] = c.applicable;
    k["passed"] = c.passed;
    k["checks"] = c.checks;
    k["undecided"] = c.undecided;
    k["worst_violation"] = c.worst;
    if (c.witness) {
      k["witness"] = {{"sequences", c.witness->sequences}, {"entry", c.witness->entry}, {"detail", c.witness->detail}};
    } else {
      k["witness"] = nullptr;
    }
    j["clauses"].push_back(std::move(k));
  }
  return j.dump(2);
}

AxiomReport axiom_audit(const Structure<double>& cs, const LimsupOperator<double>& ls, const std::vector<BankEntry>& bank,
                        const std::string& structure_name) {
  return Auditor(cs, ls, bank).run(structure_name);
}

}  // namespace rieszlab
