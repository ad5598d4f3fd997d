#pragma once

// Simple functions, convergence in measure, equiabsolute continuity, and
// the integral defined through certified approximating (defining) sequences.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rieszlab/convergence.hpp"
#include "rieszlab/measure.hpp"

namespace rieszlab {

struct SimpleCell {
  Interval set;
  Eigen::ArrayXd coeff;
};

/// sum_j c_j * chi_{A_j} with lattice-valued coefficients c_j.
class SimpleFunction {
 public:
  explicit SimpleFunction(Index dim = 1) : dim_(dim) {}
  SimpleFunction(Index dim, std::vector<SimpleCell> cells);

  SimpleFunction& add(const Interval& a, Eigen::ArrayXd c);

  Index dim() const noexcept { return dim_; }
  const std::vector<SimpleCell>& cells() const noexcept { return cells_; }
  Eigen::ArrayXd operator()(double t) const;
  std::vector<double> breakpoints() const;
  Field as_field() const;

  /// The same function with every bounded cell split into `parts` equal pieces.
  SimpleFunction refined(int parts) const;

 private:
  Index dim_;
  std::vector<SimpleCell> cells_;
};

/// sum_j c_j * mu(A cap A_j). A cell of infinite measure with a nonzero
/// coefficient raises InfiniteMeasureError; 0 * inf = 0.
Element integrate_simple(const SimpleFunction& f, const Interval& a, const MeasureSpace& ms);
Element integrate_simple(const SimpleFunction& f, const IntervalSet& a, const MeasureSpace& ms);

/// An X2-valued measure on intervals, for product triples with a
/// componentwise product (e.g. Brownian increments over sample paths).
using VectorMeasure = std::function<Eigen::ArrayXd(const Interval&)>;

/// sum_j c_j . m(A_j): coefficients of size 1 multiply the whole vector;
/// otherwise the product is componentwise. Cells are visited in order.
Element integrate_simple_against(const SimpleFunction& f, const VectorMeasure& m);

// --- sequences of functions ---------------------------------------------------------

/// n -> f_n, with optional per-n breakpoints for the quadrature.
struct FieldSequence {
  std::function<Eigen::ArrayXd(long, double)> term;
  std::function<std::vector<double>(long)> breakpoints;

  Field at(long n) const {
    return [term = term, n](double t) { return term(n, t); };
  }
  std::vector<double> breaks(long n) const { return breakpoints ? breakpoints(n) : std::vector<double>{}; }

  static FieldSequence of_simple(std::function<SimpleFunction(long)> fn);
};

/// Whether a nonnegative real sequence tends to 0 under the structure.
Verdict tends_to_zero(const std::function<double(long)>& r, const Structure<double>& cs);

struct InMeasureOptions {
  /// Grid cells (in the coordinate) used to search exceptional sets.
  long grid = 1L << 12;
  std::vector<double> breakpoints;
};

struct InMeasureReport {
  Verdict verdict = Verdict::Inconclusive;
  /// Uniform mode: sup |f_n - f| on A tends to 0 (empty exceptional sets).
  Verdict uniform_verdict = Verdict::Inconclusive;
  /// Threshold lambda_N and mu(A_N) where A_N = {|f_N - f| > lambda_N}.
  double lambda = 0.0;
  double exceptional_measure = 0.0;
  double sup_distance = 0.0;
};

/// Exceptional-set level of one function: min over lambda of
/// max(lambda, mu{d > lambda}) on the grid, with the set's measure.
struct ExceptionalSet {
  double lambda = 0.0;
  double measure = 0.0;
  double sup = 0.0;
};
ExceptionalSet exceptional_set(const Field& fn, const Field& f, const Interval& a, const MeasureSpace& ms,
                               const InMeasureOptions& opts, const std::vector<double>& extra_breaks = {});

/// f_n -> f in mu-measure on A (mu(A) finite): the exceptional sets A_n and
/// the sup of |f_n - f| off A_n both tend to 0 under cs.
InMeasureReport converges_in_measure(const FieldSequence& fn, const Field& f, const Interval& a,
                                     const MeasureSpace& ms, const Structure<double>& cs,
                                     const InMeasureOptions& opts = {});

struct EacOptions {
  /// Probe sets A_n with mu(A_n) -> 0.
  std::function<IntervalSet(long)> probes;
  /// Exhausting sets B_m; the measure space's default when unset.
  std::function<Interval(long)> exhausting;
  /// The m-sequence is read on [m_horizon / 2, 2 m_horizon].
  long m_horizon = 3;
  QuadratureOptions quadrature;
};

struct EacReport {
  Verdict probes_vanish = Verdict::Inconclusive;
  /// int_{A_n} |f_n| -> 0.
  Verdict small_sets = Verdict::Inconclusive;
  /// l(limsup_n int_{G \ B_m} |f_n|) = 0 over m.
  Verdict tails = Verdict::Inconclusive;
  std::vector<double> tail_limsups;
  bool passed() const { return small_sets == Verdict::True && tails == Verdict::True; }
  /// "small-sets", "tails" or empty.
  std::string failing_clause() const;
};

EacReport equiabsolute_continuity_audit(const FieldSequence& fn, const MeasureSpace& ms, const Structure<double>& cs,
                                        const EacOptions& opts);

// --- defining sequences ----------------------------------------------------------

struct DefiningSequenceOptions {
  /// Cells are split into `base` parts from one level to the next.
  int base = 2;
  long levels = 16;
  /// Diameters delta_n of the cells (domain metric); W * base^-n when unset.
  std::optional<OSequence<double>> deltas;
};

/// f_n = infimum of f over each cell of a refining partition of C, zero off C.
class DefiningSequence {
 public:
  DefiningSequence(const MeasureSpace& ms, const Interval& support, std::vector<long> cell_counts,
                   std::vector<Eigen::MatrixXd> minima, std::vector<double> sup_error, double bound,
                   std::vector<double> finest_measures);

  long levels() const noexcept { return static_cast<long>(counts_.size()); }
  long cells(long n) const { return counts_.at(level(n)); }
  /// Sampled sup |f - f_n| on C.
  double sup_error(long n) const { return sup_error_.at(level(n)); }
  double bound() const noexcept { return bound_; }
  const Interval& support() const noexcept { return support_; }
  Index dim() const { return minima_.front().rows(); }

  /// The n-th simple function (n >= 1; levels past the finest repeat it).
  SimpleFunction term(long n) const;
  Eigen::ArrayXd value(long n, double t) const;
  /// int_A f_n dmu.
  Eigen::ArrayXd integral(long n, const Interval& a) const;
  /// 0 <= f_1 <= f_2 <= ... on every cell (for f >= 0).
  bool monotone() const;
  /// Uniform-in-A bound lambda_N * mu(C) on |int_A f_N - int_A f|.
  double residual() const;

 private:
  std::size_t level(long n) const;
  Interval cell(std::size_t lev, long j) const;

  MeasureSpace ms_;
  Interval support_;
  double x0_ = 0.0, x1_ = 0.0;
  std::vector<long> counts_;
  std::vector<Eigen::MatrixXd> minima_;
  std::vector<double> sup_error_;
  double bound_ = 0.0;
  std::vector<double> finest_measure_;
};

/// Builds the partition-infimum sequence for f on the compact support C.
/// Samples that are not finite, or exceed 1e12 in size, raise PreconditionError.
DefiningSequence build_defining_sequence(const Field& f, const MeasureSpace& ms, const Interval& support,
                                         const DefiningSequenceOptions& opts = {});

struct IntegralResult {
  Element value;
  /// Bound on the distance to the ideal limit, uniform over all sets A.
  double residual = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  /// int_A f_n for n = 1..levels (positive part minus negative part).
  std::vector<Eigen::ArrayXd> level_values;
  /// Independent quadrature of the same integral.
  Eigen::ArrayXd reference;
};

/// l(A) for f vanishing off the compact set C. Signed f goes through the
/// split f = f+ - f-. The levels are read at the finest partition; the
/// verdict is True when the uniform residual is within cs.tol.
IntegralResult integrate(const Field& f, const Interval& a, const MeasureSpace& ms, const Interval& support,
                         const Structure<double>& cs, const DefiningSequenceOptions& opts = {});

struct VitaliOptions {
  /// Limit function; zero when unset.
  Field limit;
  /// Finite-measure sets on which convergence in measure is checked.
  std::vector<Interval> finite_sets;
  EacOptions eac;
  InMeasureOptions in_measure;
  /// Dominating integrable function for the dominated variant.
  Field dominating;
  /// L1 distances are reported for n = 1..report_upto.
  long report_upto = 0;
};

struct VitaliReport {
  Verdict in_measure = Verdict::Inconclusive;
  EacReport eac;
  bool dominated = false;
  bool hypotheses = false;
  /// int |f_n - f| for n = 1..report_upto.
  std::vector<double> l1;
  Verdict l1_verdict = Verdict::Inconclusive;
  /// hypotheses => L1 convergence held numerically.
  bool consistent() const { return !hypotheses || l1_verdict == Verdict::True; }
};

VitaliReport vitali_audit(const FieldSequence& fn, const MeasureSpace& ms, const Structure<double>& cs,
                          const VitaliOptions& opts);

/// Integral of the componentwise product h * q over the compact support of q.
IntegralResult product_integrability(const Field& h, const Field& q, const MeasureSpace& ms, const Interval& support,
                                     const Structure<double>& cs, const DefiningSequenceOptions& opts = {});

}  // namespace rieszlab
