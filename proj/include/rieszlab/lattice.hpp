#pragma once

// Concrete Dedekind-complete vector lattices: real-valued functions on a
// finite index set T with the componentwise order. A single-entry element
// realizes the real line.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <ostream>

#include "rieszlab/errors.hpp"

namespace rieszlab {

using Index = Eigen::Index;

/// A member of R^T, optionally extended by +inf entries. Infinite entries are
/// tracked by a flag; the stored value of a flagged entry is always zero.
template <typename Scalar>
class LatticeElement {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Flags = Eigen::Array<bool, Eigen::Dynamic, 1>;

  LatticeElement() = default;

  /// Zero element over an index set of size `n`.
  explicit LatticeElement(Index n) : values_(Values::Zero(n)), infinite_(Flags::Constant(n, false)) {}

  explicit LatticeElement(Values values)
      : values_(std::move(values)), infinite_(Flags::Constant(values_.size(), false)) {
    for (Index i = 0; i < values_.size(); ++i) {
      if (std::isnan(values_(i))) throw DomainError("lattice element: NaN entry");
      if (std::isinf(values_(i))) {
        if (values_(i) < 0) throw DomainError("lattice element: -inf is not representable");
        values_(i) = Scalar(0);
        infinite_(i) = true;
      }
    }
  }

  LatticeElement(std::initializer_list<Scalar> entries) : LatticeElement(from_list(entries)) {}

  static LatticeElement constant(Index n, Scalar c) { return LatticeElement(Values::Constant(n, c)); }
  static LatticeElement ones(Index n) { return constant(n, Scalar(1)); }
  static LatticeElement scalar(Scalar c) { return constant(1, c); }
  static LatticeElement plus_infinity(Index n) {
    LatticeElement x(n);
    x.infinite_.setConstant(true);
    return x;
  }

  Index size() const noexcept { return values_.size(); }
  /// Finite value of entry i; zero when the entry is +inf.
  Scalar value(Index i) const { return values_(i); }
  bool is_infinite(Index i) const { return infinite_(i); }
  bool has_infinite() const { return infinite_.any(); }
  const Values& values() const noexcept { return values_; }
  const Flags& infinite_flags() const noexcept { return infinite_; }

  /// Entry i as an extended real.
  Scalar operator[](Index i) const {
    return infinite_(i) ? std::numeric_limits<Scalar>::infinity() : values_(i);
  }

  void set_infinite(Index i) {
    values_(i) = Scalar(0);
    infinite_(i) = true;
  }

  friend bool operator==(const LatticeElement& a, const LatticeElement& b) {
    return a.size() == b.size() && (a.infinite_ == b.infinite_).all() && (a.values_ == b.values_).all();
  }

  LatticeElement operator-() const {
    if (has_infinite()) throw DomainError("lattice element: negation of +inf");
    return LatticeElement(Values(-values_));
  }

  LatticeElement& operator+=(const LatticeElement& y) {
    check_same_size(*this, y);
    values_ += y.values_;
    infinite_ = infinite_ || y.infinite_;
    values_ = infinite_.select(Values::Zero(size()), values_);
    return *this;
  }

  LatticeElement& operator-=(const LatticeElement& y) {
    check_same_size(*this, y);
    if (y.has_infinite()) throw DomainError("lattice element: subtraction of +inf");
    values_ -= y.values_;
    values_ = infinite_.select(Values::Zero(size()), values_);
    return *this;
  }

  /// Scaling with the convention 0 * (+inf) = 0.
  LatticeElement& operator*=(Scalar c) {
    if (c < 0 && has_infinite()) throw DomainError("lattice element: negative multiple of +inf");
    values_ *= c;
    if (c == Scalar(0)) infinite_.setConstant(false);
    return *this;
  }

  friend LatticeElement operator+(LatticeElement a, const LatticeElement& b) { return a += b; }
  friend LatticeElement operator-(LatticeElement a, const LatticeElement& b) { return a -= b; }
  friend LatticeElement operator*(Scalar c, LatticeElement a) { return a *= c; }
  friend LatticeElement operator*(LatticeElement a, Scalar c) { return a *= c; }
  friend LatticeElement operator/(LatticeElement a, Scalar c) { return a *= (Scalar(1) / c); }

  friend std::ostream& operator<<(std::ostream& os, const LatticeElement& x) {
    os << '(';
    for (Index i = 0; i < x.size(); ++i) {
      if (i) os << ", ";
      if (x.infinite_(i))
        os << "+inf";
      else
        os << x.values_(i);
    }
    return os << ')';
  }

  static void check_same_size(const LatticeElement& a, const LatticeElement& b) {
    if (a.size() != b.size()) throw DimensionError("lattice elements over different index sets");
  }

 private:
  static Values from_list(std::initializer_list<Scalar> entries) {
    Values v(static_cast<Index>(entries.size()));
    Index i = 0;
    for (Scalar e : entries) v(i++) = e;
    return v;
  }

  Values values_;
  Flags infinite_;
};

using Element = LatticeElement<double>;

// --- lattice operations ------------------------------------------------------

template <typename Scalar>
LatticeElement<Scalar> join(const LatticeElement<Scalar>& x, const LatticeElement<Scalar>& y) {
  LatticeElement<Scalar>::check_same_size(x, y);
  LatticeElement<Scalar> r(typename LatticeElement<Scalar>::Values(x.values().max(y.values())));
  for (Index i = 0; i < x.size(); ++i)
    if (x.is_infinite(i) || y.is_infinite(i)) r.set_infinite(i);
  return r;
}

template <typename Scalar>
LatticeElement<Scalar> meet(const LatticeElement<Scalar>& x, const LatticeElement<Scalar>& y) {
  LatticeElement<Scalar>::check_same_size(x, y);
  typename LatticeElement<Scalar>::Values v(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (x.is_infinite(i) && y.is_infinite(i)) {
      v(i) = std::numeric_limits<Scalar>::infinity();
    } else if (x.is_infinite(i)) {
      v(i) = y.value(i);
    } else if (y.is_infinite(i)) {
      v(i) = x.value(i);
    } else {
      v(i) = std::min(x.value(i), y.value(i));
    }
  }
  return LatticeElement<Scalar>(std::move(v));
}

/// |x| = x v (-x).
template <typename Scalar>
LatticeElement<Scalar> abs(const LatticeElement<Scalar>& x) {
  LatticeElement<Scalar> r(typename LatticeElement<Scalar>::Values(x.values().abs()));
  for (Index i = 0; i < x.size(); ++i)
    if (x.is_infinite(i)) r.set_infinite(i);
  return r;
}

template <typename Scalar>
LatticeElement<Scalar> positive_part(const LatticeElement<Scalar>& x) {
  return join(x, LatticeElement<Scalar>(x.size()));
}

template <typename Scalar>
LatticeElement<Scalar> negative_part(const LatticeElement<Scalar>& x) {
  return join(-x, LatticeElement<Scalar>(x.size()));
}

/// Componentwise product, the product operation of the grid product triple.
template <typename Scalar>
LatticeElement<Scalar> cwise_product(const LatticeElement<Scalar>& x, const LatticeElement<Scalar>& y) {
  LatticeElement<Scalar>::check_same_size(x, y);
  typename LatticeElement<Scalar>::Values v(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const bool xi = x.is_infinite(i), yi = y.is_infinite(i);
    if (!xi && !yi) {
      v(i) = x.value(i) * y.value(i);
      continue;
    }
    const Scalar other = xi ? (yi ? Scalar(1) : y.value(i)) : x.value(i);
    if (other < 0) throw DomainError("lattice element: negative multiple of +inf");
    v(i) = other == Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  }
  return LatticeElement<Scalar>(std::move(v));
}

/// x <= y in the componentwise order of the extended lattice.
template <typename Scalar>
bool leq(const LatticeElement<Scalar>& x, const LatticeElement<Scalar>& y) {
  LatticeElement<Scalar>::check_same_size(x, y);
  for (Index i = 0; i < x.size(); ++i) {
    if (y.is_infinite(i)) continue;
    if (x.is_infinite(i) || x.value(i) > y.value(i)) return false;
  }
  return true;
}

template <typename Scalar>
bool is_positive(const LatticeElement<Scalar>& x) {
  return leq(LatticeElement<Scalar>(x.size()), x);
}

/// Largest finite entry of |x|; the sup-norm in the all-ones unit.
template <typename Scalar>
Scalar max_abs(const LatticeElement<Scalar>& x) {
  if (x.has_infinite()) throw InfiniteNormError("max_abs of an element with +inf entries");
  return x.size() == 0 ? Scalar(0) : x.values().abs().maxCoeff();
}

// --- order unit --------------------------------------------------------------

/// A strong order unit: strictly positive and finite in every entry.
template <typename Scalar>
class OrderUnit {
 public:
  explicit OrderUnit(LatticeElement<Scalar> e) : e_(std::move(e)) {
    if (e_.has_infinite() || !(e_.values() > Scalar(0)).all())
      throw ParameterError("order unit must be finite and strictly positive in every entry");
  }
  static OrderUnit ones(Index n) { return OrderUnit(LatticeElement<Scalar>::ones(n)); }
  const LatticeElement<Scalar>& element() const noexcept { return e_; }
  Index size() const noexcept { return e_.size(); }

 private:
  LatticeElement<Scalar> e_;
};

/// ||x||_e = inf{eps > 0 : |x| <= eps e} = max_i |x_i| / e_i.
template <typename Scalar>
Scalar order_unit_norm(const LatticeElement<Scalar>& x, const OrderUnit<Scalar>& e) {
  LatticeElement<Scalar>::check_same_size(x, e.element());
  if (x.has_infinite()) throw InfiniteNormError("order-unit norm of an element with +inf entries");
  if (x.size() == 0) return Scalar(0);
  return (x.values().abs() / e.element().values()).maxCoeff();
}

// --- (o)-sequences -----------------------------------------------------------

/// A candidate regulator l -> sigma_l (1-based), evaluated up to `horizon`.
template <typename Scalar>
struct OSequence {
  std::function<LatticeElement<Scalar>(long)> term;
  long horizon = 0;
};

struct OSequenceVerdict {
  bool ok = false;
  /// First index l at which the sequence failed to be positive and
  /// decreasing, or the horizon when the final term was not below tol.
  std::optional<long> violation;
};

/// True iff sigma is positive and decreasing on [1, horizon] and its last
/// evaluated term is <= tol in every entry.
template <typename Scalar>
OSequenceVerdict is_o_sequence(const OSequence<Scalar>& s, Scalar tol) {
  if (s.horizon < 2) throw PreconditionError("is_o_sequence: horizon must be at least 2");
  LatticeElement<Scalar> prev = s.term(1);
  if (!is_positive(prev)) return {false, 1L};
  for (long l = 2; l <= s.horizon; ++l) {
    LatticeElement<Scalar> cur = s.term(l);
    if (!is_positive(cur) || !leq(cur, prev)) return {false, l};
    prev = std::move(cur);
  }
  if (!leq(prev, LatticeElement<Scalar>::constant(prev.size(), tol))) return {false, s.horizon};
  return {true, std::nullopt};
}

}  // namespace rieszlab
