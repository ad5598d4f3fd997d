#pragma once

// Convergence structures (S, l) and their limsup companions, evaluated at a
// finite horizon N.
//
// Every estimator works on a fixed evaluation window so that verdicts are
// reproducible:
//   * tail-based kinds (ordinary, order, relative-uniform, cofinite and
//     density filters) read the window W_N = {N, ..., 2N};
//   * Cesaro reads the partial means for n in [N/2, 2N];
//   * almost convergence reads windows of length N at offsets m < M.
// Sequences are generators, so reading past N is always possible.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rieszlab/lattice.hpp"

namespace rieszlab {

enum class Verdict { True, False, Inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::True:
      return "true";
    case Verdict::False:
      return "false";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

enum class FilterKind { Cofinite, Density, Explicit };

/// A free filter on N, realized at finite horizon.
struct FilterSpec {
  FilterKind kind = FilterKind::Cofinite;
  /// Density kind: sets of empirical density >= theta on the window belong
  /// to the filter. theta = 1 - eta approximates the density-one filter.
  double theta = 0.99;
  /// Explicit kind: a filter base, listed as sorted 1-based index sets.
  std::vector<std::vector<long>> sets;

  static FilterSpec cofinite() { return {}; }
  static FilterSpec density(double theta = 0.99) { return {FilterKind::Density, theta, {}}; }
  static FilterSpec explicit_family(std::vector<std::vector<long>> sets) {
    for (auto& s : sets) std::sort(s.begin(), s.end());
    FilterSpec f{FilterKind::Explicit, 0.0, std::move(sets)};
    f.validate();
    return f;
  }

  void validate() const {
    if (kind == FilterKind::Density && !(theta > 0.5 && theta <= 1.0))
      throw ParameterError("density filter: theta must lie in (1/2, 1]");
    if (kind != FilterKind::Explicit) return;
    if (sets.empty()) throw InvalidFilterError("explicit filter: empty family");
    std::vector<long> common = sets.front();
    for (const auto& s : sets) {
      std::vector<long> next;
      std::set_intersection(common.begin(), common.end(), s.begin(), s.end(), std::back_inserter(next));
      common = std::move(next);
    }
    if (common.empty()) throw InvalidFilterError("explicit filter: family has empty intersection");
  }
};

/// A sequence n -> x_n (1-based) over a common index set, with horizon N.
template <typename Scalar>
struct LatticeSequence {
  std::function<LatticeElement<Scalar>(long)> term;
  long horizon = 1000;

  /// Same terms with a different horizon.
  LatticeSequence at_horizon(long n) const { return {term, n}; }
};

/// Terms first..last stored column-wise; +inf entries become numeric inf.
template <typename Scalar>
struct TermBlock {
  long first = 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> values;
  bool has_infinite = false;

  long last() const { return first + static_cast<long>(values.cols()) - 1; }
  auto col(long n) const { return values.col(n - first); }
};

template <typename Scalar>
TermBlock<Scalar> materialize(const LatticeSequence<Scalar>& seq, long first, long last) {
  TermBlock<Scalar> block;
  block.first = first;
  const LatticeElement<Scalar> x0 = seq.term(first);
  block.values.resize(x0.size(), last - first + 1);
  for (long n = first; n <= last; ++n) {
    const LatticeElement<Scalar> x = n == first ? x0 : seq.term(n);
    if (x.size() != x0.size()) throw DimensionError("sequence terms over different index sets");
    for (Index i = 0; i < x.size(); ++i) {
      block.values(i, n - first) = x[i];
      block.has_infinite = block.has_infinite || x.is_infinite(i);
    }
  }
  return block;
}

enum class ConvergenceKind { Ordinary, Order, RelativeUniform, Filter, Almost, Cesaro };

inline std::string_view to_string(ConvergenceKind k) {
  switch (k) {
    case ConvergenceKind::Ordinary:
      return "ordinary";
    case ConvergenceKind::Order:
      return "order";
    case ConvergenceKind::RelativeUniform:
      return "relative-uniform";
    case ConvergenceKind::Filter:
      return "filter";
    case ConvergenceKind::Almost:
      return "almost";
    case ConvergenceKind::Cesaro:
      return "cesaro";
  }
  return "?";
}

/// A realization of a convergence (S, l) at horizon N with tolerance tol.
///
/// Cesaro and almost convergence are realized on the subspaces of strongly
/// summable sequences (means of |x_n - x| tend to zero), which is what keeps
/// S closed under |.|.
template <typename Scalar>
struct ConvergenceStructure {
  ConvergenceKind kind = ConvergenceKind::Ordinary;
  FilterSpec filter;
  /// Regulator u of relative-uniform and filter kinds; all-ones when unset.
  std::optional<LatticeElement<Scalar>> unit;
  /// Regulator (sigma_l) of the order kind; (1/l) * ones when unset.
  std::function<LatticeElement<Scalar>(long)> o_regulator;
  long horizon = 1000;
  /// Almost kind: number of offsets M; 0 means floor(N / 10).
  long window = 0;
  Scalar tol = Scalar(1e-3);
  /// Deliberately broken structure for audits: l is replaced by -l.
  bool sign_flipped = false;

  static ConvergenceStructure ordinary(long n = 1000, Scalar tol = Scalar(1e-3)) {
    ConvergenceStructure cs;
    cs.horizon = n;
    cs.tol = tol;
    return cs;
  }
  static ConvergenceStructure make(ConvergenceKind kind, long n, Scalar tol) {
    ConvergenceStructure cs = ordinary(n, tol);
    cs.kind = kind;
    return cs;
  }
  static ConvergenceStructure filtered(FilterSpec f, long n, Scalar tol) {
    ConvergenceStructure cs = make(ConvergenceKind::Filter, n, tol);
    f.validate();
    cs.filter = std::move(f);
    return cs;
  }

  long offsets() const { return window > 0 ? window : std::max(1L, horizon / 10); }
};

template <typename Scalar>
using Structure = ConvergenceStructure<Scalar>;

/// A limit estimate together with the structure's verdict on it.
template <typename Scalar>
struct LimitEstimate {
  LatticeElement<Scalar> value;
  Verdict verdict = Verdict::Inconclusive;
  /// Size of the residual the verdict was based on (max-abs entry).
  Scalar residual = Scalar(0);
};

template <typename Scalar>
struct LimsupEstimate {
  LatticeElement<Scalar> value;
  /// The window was not monotone, so the finite-horizon tail sup may be
  /// biased with respect to the ideal limit superior.
  bool tail_bias_caveat = false;
};

namespace detail {

/// Three-valued decision for a nonnegative residual sequence that should
/// tend to zero: compares the current window against the previous one.
template <typename Scalar>
Verdict shrink_rule(Scalar current, Scalar previous, Scalar tol) {
  if (current <= tol) return Verdict::True;
  if (current < Scalar(0.75) * previous) return Verdict::Inconclusive;
  return Verdict::False;
}

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> unit_values(const ConvergenceStructure<Scalar>& cs, Index n) {
  if (cs.unit) {
    if (cs.unit->size() != n) throw DimensionError("regulator unit over a different index set");
    return OrderUnit<Scalar>(*cs.unit).element().values();
  }
  return Eigen::Array<Scalar, Eigen::Dynamic, 1>::Ones(n);
}

/// ||x_n - c||_u for every column of the block.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> distances(const TermBlock<Scalar>& b, const LatticeElement<Scalar>& c,
                                                   const Eigen::Array<Scalar, Eigen::Dynamic, 1>& u) {
  if (c.size() != b.values.rows()) throw DimensionError("candidate over a different index set");
  if (c.has_infinite()) throw DomainError("limit candidate with +inf entries");
  Eigen::Array<Scalar, Eigen::Dynamic, 1> d(b.values.cols());
  for (Index j = 0; j < b.values.cols(); ++j) {
    Scalar m = 0;
    for (Index i = 0; i < b.values.rows(); ++i) {
      const Scalar v = b.values(i, j);
      m = std::max(m, std::isinf(v) ? v : std::abs(v - c.value(i)) / u(i));
    }
    d(j) = m;
  }
  return d;
}

template <typename Scalar>
Scalar quantile_of(std::vector<Scalar> v, double theta) {
  const std::size_t k = std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(theta * v.size())) - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

/// Entrywise theta-quantile over the columns selected by `keep`.
template <typename Scalar>
LatticeElement<Scalar> row_quantile(const TermBlock<Scalar>& b, double theta,
                                    const std::function<bool(long)>& keep = {}) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> q(b.values.rows());
  for (Index i = 0; i < b.values.rows(); ++i) {
    std::vector<Scalar> row;
    row.reserve(static_cast<std::size_t>(b.values.cols()));
    for (long n = b.first; n <= b.last(); ++n)
      if (!keep || keep(n)) row.push_back(b.values(i, n - b.first));
    if (row.empty()) throw PreconditionError("quantile over an empty index set");
    q(i) = quantile_of(std::move(row), theta);
  }
  return LatticeElement<Scalar>(std::move(q));
}

template <typename Scalar>
LatticeElement<Scalar> row_max(const TermBlock<Scalar>& b, const std::function<bool(long)>& keep = {}) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> m =
      Eigen::Array<Scalar, Eigen::Dynamic, 1>::Constant(b.values.rows(), -std::numeric_limits<Scalar>::infinity());
  bool any = false;
  for (long n = b.first; n <= b.last(); ++n) {
    if (keep && !keep(n)) continue;
    any = true;
    m = m.max(b.col(n).array());
  }
  if (!any) throw PreconditionError("supremum over an empty index set");
  return LatticeElement<Scalar>(std::move(m));
}

template <typename Scalar>
bool is_monotone(const TermBlock<Scalar>& b) {
  bool inc = true, dec = true;
  for (Index j = 1; j < b.values.cols(); ++j) {
    inc = inc && (b.values.col(j).array() >= b.values.col(j - 1).array()).all();
    dec = dec && (b.values.col(j).array() <= b.values.col(j - 1).array()).all();
  }
  return inc || dec;
}

template <typename Scalar>
void require_finite(const TermBlock<Scalar>& b, const char* what) {
  if (b.has_infinite) throw DomainError(std::string(what) + ": undefined average of +inf entries");
}

/// Partial sums S_0..S_last as columns (S_0 = 0).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> prefix_sums(const TermBlock<Scalar>& b) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> s(b.values.rows(), b.values.cols() + 1);
  s.col(0).setZero();
  for (Index j = 0; j < b.values.cols(); ++j) s.col(j + 1) = s.col(j) + b.values.col(j);
  return s;
}

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> prefix_sums(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& d) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> s(d.size() + 1);
  s(0) = 0;
  for (Index j = 0; j < d.size(); ++j) s(j + 1) = s(j) + d(j);
  return s;
}

/// Entrywise median of the block: the minimizer of the mean of |x_k - c|,
/// hence the centre matching strong-mean membership.
template <typename Scalar>
LatticeElement<Scalar> row_median(const TermBlock<Scalar>& b) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(b.values.rows());
  std::vector<Scalar> row(static_cast<std::size_t>(b.values.cols()));
  for (Index i = 0; i < b.values.rows(); ++i) {
    for (Index j = 0; j < b.values.cols(); ++j) row[static_cast<std::size_t>(j)] = b.values(i, j);
    std::sort(row.begin(), row.end());
    const std::size_t m = row.size() / 2;
    out(i) = row.size() % 2 ? row[m] : (row[m - 1] + row[m]) / Scalar(2);
  }
  return LatticeElement<Scalar>(std::move(out));
}

template <typename Scalar>
LatticeElement<Scalar> midrange(const TermBlock<Scalar>& b) {
  const auto lo = b.values.rowwise().minCoeff().array();
  const auto hi = b.values.rowwise().maxCoeff().array();
  return LatticeElement<Scalar>(Eigen::Array<Scalar, Eigen::Dynamic, 1>((lo + hi) / Scalar(2)));
}

}  // namespace detail

/// A real sequence evaluated at most once per index; estimators read
/// overlapping windows.
class MemoizedSequence {
 public:
  explicit MemoizedSequence(std::function<double(long)> fn) : fn_(std::move(fn)) {}
  double operator()(long n) {
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    return cache_[n] = fn_(n);
  }

 private:
  std::function<double(long)> fn_;
  std::map<long, double> cache_;
};

// --- estimators ----------------------------------------------------------------

/// Plain Cesaro mean (x_1 + ... + x_N) / N. The verdict states whether the
/// partial means over [N/2, N] stay within tol of the estimate.
template <typename Scalar>
LimitEstimate<Scalar> cesaro_limit(const LatticeSequence<Scalar>& seq, Scalar tol) {
  const long n = seq.horizon;
  if (n < 10) throw PreconditionError("cesaro_limit: horizon must be at least 10");
  const auto b = materialize(seq, 1, n);
  detail::require_finite(b, "cesaro_limit");
  const auto s = detail::prefix_sums(b);
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> avg = s.col(n).array() / Scalar(n);
  auto spread = [&](long lo, long hi) {
    Scalar m = 0;
    for (long k = std::max(1L, lo); k <= hi; ++k)
      m = std::max(m, (s.col(k).array() / Scalar(k) - avg).abs().maxCoeff());
    return m;
  };
  const Scalar cur = spread(n / 2, n);
  const Scalar prev = spread(n / 4, n / 2);
  return {LatticeElement<Scalar>(avg), detail::shrink_rule(cur, prev, tol), cur};
}

/// Almost-convergence estimate: the midrange of the window averages
/// (x_{m+1} + ... + x_{m+W}) / W over offsets m < M with W = N, which
/// minimizes the sup over offsets of the deviation. Terms up to N + M are read.
template <typename Scalar>
LimitEstimate<Scalar> almost_limit(const LatticeSequence<Scalar>& seq, long offsets, Scalar tol) {
  const long n = seq.horizon;
  if (offsets < 1) throw PreconditionError("almost_limit: at least one offset required");
  if (n < 4) return {seq.term(1), Verdict::Inconclusive, Scalar(0)};
  const auto b = materialize(seq, 1, n + offsets);
  detail::require_finite(b, "almost_limit");
  const auto s = detail::prefix_sums(b);
  auto windows = [&](long w) {
    TermBlock<Scalar> avg;
    avg.first = 0;
    avg.values.resize(b.values.rows(), offsets);
    for (long m = 0; m < offsets; ++m) avg.values.col(m) = (s.col(m + w) - s.col(m)) / Scalar(w);
    return avg;
  };
  const auto full = windows(n);
  const auto half = windows(n / 2);
  LatticeElement<Scalar> est = detail::midrange(full);
  auto half_range = [](const TermBlock<Scalar>& a) {
    return ((a.values.rowwise().maxCoeff() - a.values.rowwise().minCoeff()).array() / Scalar(2)).maxCoeff();
  };
  const Scalar cur = half_range(full);
  return {std::move(est), detail::shrink_rule(cur, half_range(half), tol), cur};
}

/// Order limit superior inf_m sup_{n >= m} x_n realized on W_N: the inf over
/// m <= N of sup over m <= n <= 2N, i.e. the sup over {N, ..., 2N}.
template <typename Scalar>
LimsupEstimate<Scalar> order_limsup(const LatticeSequence<Scalar>& seq) {
  const auto b = materialize(seq, seq.horizon, 2 * seq.horizon);
  return {detail::row_max(b), !detail::is_monotone(b)};
}

/// Filter limit superior inf_{F in filter} sup_{n in F} x_n.
template <typename Scalar>
LatticeElement<Scalar> filter_limsup(const LatticeSequence<Scalar>& seq, const FilterSpec& filter,
                                     const std::function<bool(long)>& restrict_to = {}) {
  filter.validate();
  const long n = seq.horizon;
  switch (filter.kind) {
    case FilterKind::Cofinite:
      return detail::row_max(materialize(seq, n, 2 * n), restrict_to);
    case FilterKind::Density:
      return detail::row_quantile(materialize(seq, n, 2 * n), filter.theta, restrict_to);
    case FilterKind::Explicit: {
      std::optional<LatticeElement<Scalar>> best;
      for (const auto& f : filter.sets) {
        std::optional<LatticeElement<Scalar>> sup;
        for (long k : f) {
          if (restrict_to && !restrict_to(k)) continue;
          const auto x = seq.term(k);
          sup = sup ? join(*sup, x) : x;
        }
        if (!sup) continue;
        best = best ? meet(*best, *sup) : *sup;
      }
      if (!best) throw PreconditionError("filter_limsup: explicit family empty after restriction");
      return *best;
    }
  }
  return seq.term(n);
}

/// Limit superior of the norms ||x_n||_e along the filter (a real number).
template <typename Scalar>
Scalar norm_filter_limsup(const LatticeSequence<Scalar>& seq, const FilterSpec& filter,
                          const OrderUnit<Scalar>& e) {
  LatticeSequence<Scalar> norms{[&](long k) { return LatticeElement<Scalar>::scalar(order_unit_norm(seq.term(k), e)); },
                                seq.horizon};
  return filter_limsup(norms, filter).value(0);
}

/// Whether x_n -> candidate under the structure, decided at horizon.
template <typename Scalar>
Verdict estimate_limit(const LatticeSequence<Scalar>& seq, const ConvergenceStructure<Scalar>& cs,
                       LatticeElement<Scalar> candidate) {
  if (cs.sign_flipped) candidate = -candidate;
  const long n = cs.horizon;
  const Scalar tol = cs.tol;
  switch (cs.kind) {
    case ConvergenceKind::Ordinary:
    case ConvergenceKind::RelativeUniform:
    case ConvergenceKind::Filter: {
      const FilterSpec filter = cs.kind == ConvergenceKind::Filter ? cs.filter : FilterSpec::cofinite();
      if (filter.kind == FilterKind::Explicit) {
        const auto u = detail::unit_values(cs, candidate.size());
        for (const auto& f : filter.sets) {
          bool inside = true;
          for (long k : f) {
            TermBlock<Scalar> one = materialize(seq, k, k);
            if (detail::distances(one, candidate, u)(0) > tol) {
              inside = false;
              break;
            }
          }
          if (inside) return Verdict::True;
        }
        return Verdict::False;
      }
      const auto b = materialize(seq, n / 2, 2 * n);
      const auto d = detail::distances(b, candidate, detail::unit_values(cs, candidate.size()));
      const long off = n - n / 2;
      const auto window = d.segment(off, d.size() - off);
      if (filter.kind == FilterKind::Density) {
        const Scalar density = (window <= tol).template cast<Scalar>().mean();
        if (density >= filter.theta) return Verdict::True;
        if (std::abs(density - Scalar(filter.theta)) <= tol) return Verdict::Inconclusive;
        return Verdict::False;
      }
      return detail::shrink_rule(window.maxCoeff(), d.head(off + 1).maxCoeff(), tol);
    }
    case ConvergenceKind::Order: {
      auto sigma = cs.o_regulator ? cs.o_regulator : [dim = candidate.size()](long l) {
        return LatticeElement<Scalar>::constant(dim, Scalar(1) / Scalar(l));
      };
      const auto small = LatticeElement<Scalar>::constant(candidate.size(), tol);
      long l_star = 0;
      for (long l = 1; l <= 1'000'000; l *= 2) {
        if (leq(sigma(l), small)) {
          l_star = l;
          break;
        }
      }
      if (l_star == 0) return Verdict::Inconclusive;
      const auto bound = sigma(l_star);
      const auto b = materialize(seq, n / 2, 2 * n);
      bool inside = true;
      for (long k = n; k <= 2 * n && inside; ++k) {
        for (Index i = 0; i < candidate.size(); ++i) {
          if (std::abs(b.col(k)(i) - candidate.value(i)) > bound.value(i)) {
            inside = false;
            break;
          }
        }
      }
      if (inside) return Verdict::True;
      const auto d = detail::distances(b, candidate, Eigen::Array<Scalar, Eigen::Dynamic, 1>(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Ones(candidate.size())));
      const long off = n - n / 2;
      const Verdict v = detail::shrink_rule(d.segment(off, d.size() - off).maxCoeff(), d.head(off + 1).maxCoeff(), tol);
      return v == Verdict::True ? Verdict::Inconclusive : v;
    }
    case ConvergenceKind::Cesaro: {
      const auto b = materialize(seq, 1, 2 * n);
      detail::require_finite(b, "cesaro");
      const auto s = detail::prefix_sums(detail::distances(b, candidate, detail::unit_values(cs, candidate.size())));
      auto strong_mean_max = [&](long lo, long hi) {
        Scalar m = 0;
        for (long k = std::max(1L, lo); k <= hi; ++k) m = std::max(m, s(k) / Scalar(k));
        return m;
      };
      return detail::shrink_rule(strong_mean_max(n, 2 * n), strong_mean_max(n / 2, n), tol);
    }
    case ConvergenceKind::Almost: {
      const long offsets = cs.offsets();
      const auto b = materialize(seq, 1, n + offsets);
      detail::require_finite(b, "almost");
      const auto s = detail::prefix_sums(detail::distances(b, candidate, detail::unit_values(cs, candidate.size())));
      auto sup_window = [&](long w) {
        Scalar m = 0;
        for (long k = 0; k < offsets; ++k) m = std::max(m, (s(k + w) - s(k)) / Scalar(w));
        return m;
      };
      return detail::shrink_rule(sup_window(n), sup_window(n / 2), tol);
    }
  }
  return Verdict::Inconclusive;
}

/// The structure's limit l((x_n)_n): an estimate of the limit and the
/// membership verdict for it.
template <typename Scalar>
LimitEstimate<Scalar> limit(const LatticeSequence<Scalar>& seq, const ConvergenceStructure<Scalar>& cs) {
  const long n = cs.horizon;
  LatticeElement<Scalar> est;
  switch (cs.kind) {
    case ConvergenceKind::Ordinary:
    case ConvergenceKind::RelativeUniform:
    case ConvergenceKind::Order:
      est = detail::midrange(materialize(seq, n, 2 * n));
      break;
    case ConvergenceKind::Filter:
      if (cs.filter.kind == FilterKind::Cofinite) {
        est = detail::midrange(materialize(seq, n, 2 * n));
      } else if (cs.filter.kind == FilterKind::Density) {
        const auto b = materialize(seq, n, 2 * n);
        const auto hi = detail::row_quantile(b, cs.filter.theta);
        const auto lo = detail::row_quantile(b, 1.0 - cs.filter.theta);
        est = Scalar(0.5) * (hi + lo);
      } else {
        Scalar best_spread = std::numeric_limits<Scalar>::infinity();
        for (const auto& f : cs.filter.sets) {
          TermBlock<Scalar> b;
          b.values.resize(seq.term(f.front()).size(), static_cast<Index>(f.size()));
          for (std::size_t j = 0; j < f.size(); ++j) {
            const auto x = seq.term(f[j]);
            for (Index i = 0; i < x.size(); ++i) b.values(i, static_cast<Index>(j)) = x[i];
          }
          const Scalar spread = (b.values.rowwise().maxCoeff() - b.values.rowwise().minCoeff()).maxCoeff();
          if (spread < best_spread) {
            best_spread = spread;
            est = detail::midrange(b);
          }
        }
      }
      break;
    // Membership for these kinds uses strong means, so the centre is a median.
    case ConvergenceKind::Cesaro: {
      const auto b = materialize(seq, 1, 2 * n);
      detail::require_finite(b, "cesaro");
      est = detail::row_median(b);
      break;
    }
    case ConvergenceKind::Almost: {
      const auto b = materialize(seq, 1, n + cs.offsets());
      detail::require_finite(b, "almost");
      est = detail::row_median(b);
      break;
    }
  }
  LimitEstimate<Scalar> r;
  r.verdict = estimate_limit(seq, ConvergenceStructure<Scalar>{cs.kind, cs.filter, cs.unit, cs.o_regulator, cs.horizon,
                                                               cs.window, cs.tol, false},
                             est);
  r.value = cs.sign_flipped ? -est : est;
  return r;
}

/// The limsup operator associated with a structure, applied to a positive
/// sequence.
template <typename Scalar>
LatticeElement<Scalar> limsup(const LatticeSequence<Scalar>& seq, const ConvergenceStructure<Scalar>& cs,
                              const std::function<bool(long)>& restrict_to = {}) {
  const long n = cs.horizon;
  switch (cs.kind) {
    case ConvergenceKind::Ordinary:
    case ConvergenceKind::RelativeUniform:
    case ConvergenceKind::Order:
      return filter_limsup(seq, FilterSpec::cofinite(), restrict_to);
    case ConvergenceKind::Filter:
      return filter_limsup(seq, cs.filter, restrict_to);
    case ConvergenceKind::Cesaro: {
      const auto b = materialize(seq, 1, 2 * n);
      detail::require_finite(b, "cesaro limsup");
      const auto s = detail::prefix_sums(b);
      Eigen::Array<Scalar, Eigen::Dynamic, 1> m = s.col(n).array() / Scalar(n);
      for (long k = n + 1; k <= 2 * n; ++k) m = m.max(s.col(k).array() / Scalar(k));
      return LatticeElement<Scalar>(std::move(m));
    }
    case ConvergenceKind::Almost: {
      const long offsets = cs.offsets();
      const auto b = materialize(seq, 1, n + offsets);
      detail::require_finite(b, "almost limsup");
      const auto s = detail::prefix_sums(b);
      Eigen::Array<Scalar, Eigen::Dynamic, 1> m = s.col(n).array() / Scalar(n);
      for (long k = 1; k < offsets; ++k) m = m.max((s.col(k + n) - s.col(k)).array() / Scalar(n));
      return LatticeElement<Scalar>(std::move(m));
    }
  }
  return seq.term(n);
}

/// |limsup over N - limsup over H|, entrywise: the comparison required when
/// a kernel family is certified along an index set H.
template <typename Scalar>
LatticeElement<Scalar> h_restriction_gap(const LatticeSequence<Scalar>& seq, const ConvergenceStructure<Scalar>& cs,
                                         const std::function<bool(long)>& in_h) {
  return abs(limsup(seq, cs) - limsup(seq, cs, in_h));
}

/// A limsup-type operator as a value, so audits can pair any structure with
/// any companion.
template <typename Scalar>
class LimsupOperator {
 public:
  using Fn = std::function<LatticeElement<Scalar>(const LatticeSequence<Scalar>&)>;

  LimsupOperator(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  static LimsupOperator order() {
    return {"order-limsup", [](const LatticeSequence<Scalar>& s) { return order_limsup(s).value; }};
  }
  static LimsupOperator filter(FilterSpec f) {
    return {"filter-limsup", [f](const LatticeSequence<Scalar>& s) { return filter_limsup(s, f); }};
  }
  static LimsupOperator norm_filter(FilterSpec f, OrderUnit<Scalar> e) {
    return {"norm-filter-limsup", [f, e](const LatticeSequence<Scalar>& s) {
              return LatticeElement<Scalar>::scalar(norm_filter_limsup(s, f, e));
            }};
  }
  /// The operator naturally attached to a structure.
  static LimsupOperator companion(ConvergenceStructure<Scalar> cs) {
    return {std::string("limsup/") + std::string(to_string(cs.kind)),
            [cs](const LatticeSequence<Scalar>& s) { return limsup(s.at_horizon(cs.horizon), cs); }};
  }

  const std::string& name() const noexcept { return name_; }
  LatticeElement<Scalar> operator()(const LatticeSequence<Scalar>& s) const { return fn_(s); }

 private:
  std::string name_;
  Fn fn_;
};

}  // namespace rieszlab
