#pragma once

// Convex lattice maps, Jensen gaps, the Orlicz modular and modular convergence.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rieszlab/integral.hpp"

namespace rieszlab {

enum class PhiKind { Square, Power, Lifted };

/// A convex map acting entrywise through a scalar convex phi_hat with phi_hat(0) = 0.
class ConvexPhi {
 public:
  static ConvexPhi square();
  /// |t|^p for an integer p >= 3.
  static ConvexPhi power(int p);
  /// Entrywise lifting of phi_hat; the slope falls back to a centered
  /// difference with step 1e-6 when no derivative is supplied.
  static ConvexPhi lifted(std::string name, std::function<double(double)> phi_hat,
                          std::function<double(double)> derivative = {});

  PhiKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  int exponent() const noexcept { return p_; }

  double scalar(double t) const { return f_(t); }
  double derivative(double t) const;

  /// Entrywise phi_hat; non-finite results and +inf inputs become +inf flags.
  Element operator()(const Element& x) const;
  /// beta_v: slope of phi_hat at each entry of v.
  Element slope(const Element& v) const;
  /// beta*_u bounds |beta_v| for v in [-u, u].
  Element slope_bound(const Element& u) const;

 private:
  ConvexPhi(PhiKind k, std::string name, int p, std::function<double(double)> f, std::function<double(double)> df)
      : kind_(k), name_(std::move(name)), p_(p), f_(std::move(f)), df_(std::move(df)) {}

  PhiKind kind_;
  std::string name_;
  int p_ = 0;
  std::function<double(double)> f_;
  std::function<double(double)> df_;
};

struct ConvexityReport {
  long support_violations = 0;
  long scaling_violations = 0;
  long lipschitz_violations = 0;
  /// Smallest slack over all checks; negative exactly when something failed.
  double worst_margin = 0.0;
  /// Check name and the (s, v) pair that produced the worst margin.
  std::string worst_check;
  std::optional<std::pair<Element, Element>> witness;
  long checks = 0;
  bool passed() const { return support_violations + scaling_violations + lipschitz_violations == 0; }
};

/// Support inequality, phi(xi x) <= xi phi(x) for xi in `xis`, and the local
/// Lipschitz bound with beta*_u on pairs (s, v) drawn from [-u, u].
ConvexityReport convexity_audit(const ConvexPhi& phi, const std::vector<std::pair<Element, Element>>& samples,
                                const Element& u, const std::vector<double>& xis = {0.0, 0.25, 0.5, 0.75, 1.0});

struct JensenResult {
  /// int h phi(f) - phi(int h f), entrywise.
  Element gap;
  Element lhs;
  Element rhs;
  double weight_mass = 0.0;
};

struct JensenOptions {
  QuadratureOptions quadrature;
  /// Allowed excess of int h over 1.
  double tol = 1e-9;
};

/// Jensen gap for a nonnegative weight h with 0 < int h <= 1 and f compactly
/// supported in `support`. Integrals use the quadrature oracle.
JensenResult jensen_gap(const ConvexPhi& phi, const ScalarField& h, const Field& f, const MeasureSpace& ms,
                        const Interval& support, const JensenOptions& opts = {});

struct Modular {
  ConvexPhi phi;
  MeasureSpace ms;
  Structure<double> cs;
  QuadratureOptions quadrature;
};

/// rho(f) = int phi(|f|) dmu over the whole carrier; +inf flags where the
/// exhausting-set integrals diverge.
Element modular_eval(const Modular& m, const Field& f, const std::vector<double>& breakpoints = {});

enum class OrliczClass { Finite, Orlicz, Neither };
std::string to_string(OrliczClass c);

struct OrliczReport {
  OrliczClass cls = OrliczClass::Neither;
  std::vector<double> alphas;
  std::vector<Element> values;
  /// rho(alpha f) tends to 0 along the decreasing grid.
  Verdict vanishing = Verdict::Inconclusive;
};

/// Dyadic grid 2^4, 2^3, ..., 2^-20.
std::vector<double> default_alpha_grid();

/// L^phi when rho(alpha f) -> 0 as alpha decreases to 0; E^phi when in addition
/// rho(alpha f) is finite for every probed alpha.
OrliczReport orlicz_membership(const Modular& m, const Field& f, const std::vector<double>& breakpoints = {},
                               std::vector<double> alphas = default_alpha_grid());

struct AlphaTrial {
  double alpha = 0.0;
  Verdict verdict = Verdict::Inconclusive;
};

struct ModularVerdict {
  /// Largest passing alpha on the grid; 0 when none passed.
  double alpha = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  /// rho(alpha (f_n - f)) for n = 1..report_upto at the selected alpha.
  std::vector<double> values;
  /// Every probed beta < alpha passes as well.
  bool solid = false;
  std::vector<AlphaTrial> trace;
  /// 1 / (2 D1) when the kernel bound D1 is known.
  std::optional<double> analytic_lambda;
};

struct ModularSearchOptions {
  /// alpha runs over 2^0, 2^-1, ..., 2^-levels.
  int levels = 10;
  long report_upto = 0;
  std::optional<double> d1;
};

/// Searches dyadic alpha for rho(alpha (f_n - f)) -> 0 under the modular's structure.
ModularVerdict modular_convergence_search(const Modular& m, const FieldSequence& fn, const Field& f,
                                          const ModularSearchOptions& opts = {});

}  // namespace rieszlab
