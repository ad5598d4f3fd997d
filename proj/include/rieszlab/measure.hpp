#pragma once

// Sigma-finite measures on intervals of R or R+, and the quadrature engine
// every integral in the library goes through.
//
// Each domain carries a coordinate: x = t on R (and on R+ with the
// euclidean metric), x = ln t on R+ with the log metric. Integrals are
// computed in the coordinate, where the Haar measure dt/t becomes Lebesgue.

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rieszlab/errors.hpp"
#include "rieszlab/lattice.hpp"

namespace rieszlab {

/// A lattice-valued function on the domain: t -> values over the index set.
/// +inf entries are plain numeric infinities.
using Field = std::function<Eigen::ArrayXd(double)>;
using ScalarField = std::function<double(double)>;

inline Field scalar_field(ScalarField f) {
  return [f = std::move(f)](double t) { return Eigen::ArrayXd::Constant(1, f(t)); };
}

/// t -> h(t) * v for a scalar h and a fixed vector v.
inline Field times_vector(ScalarField h, Eigen::ArrayXd v) {
  return [h = std::move(h), v = std::move(v)](double t) -> Eigen::ArrayXd { return h(t) * v; };
}

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Carrier { Real, PositiveReal };
enum class Metric { Euclidean, Log };

struct Domain {
  Carrier carrier = Carrier::Real;
  Metric metric = Metric::Euclidean;

  static Domain real_line() { return {Carrier::Real, Metric::Euclidean}; }
  static Domain positive_half_line(Metric m = Metric::Log) { return {Carrier::PositiveReal, m}; }

  double lower() const { return carrier == Carrier::Real ? -kInf : 0.0; }
  double upper() const { return kInf; }
  bool contains(double t) const { return carrier == Carrier::Real || t > 0.0; }

  /// d(t1, t2); |ln t1 - ln t2| for the log metric.
  double distance(double t1, double t2) const;
  double to_coord(double t) const;
  double from_coord(double x) const;
};

/// An interval with independently open or closed ends. Infinite ends are
/// always open.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  static Interval closed(double a, double b) { return {a, b, false, false}; }
  static Interval open(double a, double b) { return {a, b, true, true}; }
  static Interval left_open(double a, double b) { return {a, b, true, false}; }
  static Interval right_open(double a, double b) { return {a, b, false, true}; }

  bool empty() const { return hi < lo || (hi == lo && (lo_open || hi_open)); }
  bool contains(double t) const {
    return (lo_open ? t > lo : t >= lo) && (hi_open ? t < hi : t <= hi);
  }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

Interval intersect(const Interval& a, const Interval& b);

std::ostream& operator<<(std::ostream& os, const Interval& a);

/// A finite union of intervals, kept sorted with overlapping pieces merged.
class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(std::initializer_list<Interval> pieces);
  explicit IntervalSet(std::vector<Interval> pieces);

  const std::vector<Interval>& pieces() const noexcept { return pieces_; }
  bool contains(double t) const;
  IntervalSet intersect(const Interval& a) const;
  /// Complement inside `universe`.
  IntervalSet complement_in(const Interval& universe) const;

 private:
  std::vector<Interval> pieces_;
};

enum class MeasureKind { Lebesgue, Haar, Weighted };

enum class PanelRule {
  /// Composite midpoint sums with Richardson extrapolation.
  MidpointRichardson,
  /// Adaptive 7/15-point Gauss-Kronrod; far fewer evaluations on smooth panels.
  GaussKronrod,
};

struct QuadratureOptions {
  PanelRule rule = PanelRule::GaussKronrod;
  /// Evaluation budget per panel.
  long resolution = 1L << 14;
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;
  /// Points (in t) where the integrand may have a kink or jump.
  std::vector<double> breakpoints;
  /// Exhaust finite endpoints geometrically when the integrand is not finite there.
  bool detect_singular_ends = true;
};

struct QuadratureResult {
  Eigen::ArrayXd value;
  /// Entries whose integral diverged; their value is +inf.
  Eigen::Array<bool, Eigen::Dynamic, 1> diverged;
  double error_estimate = 0.0;
  long evaluations = 0;
  /// Every panel met the tolerance before hitting the node cap.
  bool converged = true;

  bool any_diverged() const { return diverged.any(); }
  Element as_element() const { return Element(value); }
  double scalar() const { return value(0); }
};

/// A sigma-finite measure dmu = w(t) dt on a domain.
class MeasureSpace {
 public:
  static MeasureSpace lebesgue();
  /// Lebesgue measure on R+ in the euclidean coordinate.
  static MeasureSpace lebesgue_positive();
  /// dt / t on R+, integrated in log coordinates.
  static MeasureSpace haar();
  static MeasureSpace weighted(Domain domain, ScalarField density, std::string name);

  const Domain& domain() const noexcept { return domain_; }
  MeasureKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  /// The whole carrier as an interval.
  Interval carrier() const;

  /// m-th exhausting set: [-m, m] on R, [e^-m, e^m] on R+.
  Interval exhausting_set(long m) const;

  double measure(const Interval& a) const;
  double measure(const IntervalSet& a) const;

  /// w(t(x)) * dt/dx, the density of mu in the coordinate.
  double coordinate_density(double x) const;

  /// Interval [lo, hi] of the coordinate matching `a` after clipping to the carrier.
  std::pair<double, double> coordinate_range(const Interval& a) const;

 private:
  MeasureSpace(Domain d, MeasureKind k, ScalarField w, std::string name)
      : domain_(d), kind_(k), density_(std::move(w)), name_(std::move(name)) {}

  Domain domain_;
  MeasureKind kind_;
  ScalarField density_;
  std::string name_;
};

/// Integral of f over A with respect to mu. Entries whose integral diverges
/// are flagged and set to +inf.
QuadratureResult integrate_field(const MeasureSpace& ms, const Field& f, const Interval& a,
                                 const QuadratureOptions& opts = {});

/// Same over a finite union of intervals.
QuadratureResult integrate_field(const MeasureSpace& ms, const Field& f, const IntervalSet& a,
                                 const QuadratureOptions& opts = {});

/// The Lebesgue-side oracle: adaptive quadrature of the integral of f over A.
inline QuadratureResult quadrature_reference(const Field& f, const Interval& a, const MeasureSpace& ms,
                                             const QuadratureOptions& opts = {}) {
  return integrate_field(ms, f, a, opts);
}

/// Scalar convenience; returns +inf when the integral diverges.
double integrate_scalar(const MeasureSpace& ms, const ScalarField& f, const Interval& a,
                        const QuadratureOptions& opts = {});

/// Integral over a coordinate interval [a, b] (either end may be infinite)
/// of an integrand already expressed in the coordinate.
QuadratureResult integrate_coordinate(const Field& g, double a, double b, const QuadratureOptions& opts,
                                      const std::vector<double>& coord_breaks = {});

}  // namespace rieszlab
