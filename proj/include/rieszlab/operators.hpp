#pragma once

// Urysohn- and Mellin-type kernel operators, singularity certificates and
// the convergence experiments run on them.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rieszlab/modular.hpp"

namespace rieszlab {

/// (T_n f)(s) = int K_n(s, t, f(t)) dmu(t) with |K_n(s,t,u) - K_n(s,t,v)| <= L_n(s,t) psi_n(|u - v|).
struct UrysohnKernel {
  std::string name;
  std::function<Eigen::ArrayXd(long n, double s, double t, const Eigen::ArrayXd& u)> K;
  std::function<double(long n, double s, double t)> L;
  std::function<double(long n, double r)> psi;
  /// Points in t where K_n(s, ., u) may jump.
  std::function<std::vector<double>(long n, double s)> breakpoints;
  /// Points in s where L_n(., t) may jump (for t-sections).
  std::function<std::vector<double>(long n, double t)> section_breakpoints;
  std::optional<double> d1;
  bool linear = false;
};

/// K_n(s,t,u) = n chi_[s, s+1/n](t) u on the real line.
UrysohnKernel moving_average_kernel();

/// Quadrature of the kernel integral. Raises DomainError when the majorant
/// int L_n(s,t) psi_n(|f(t)|) dmu(t) diverges.
Element urysohn_apply(const UrysohnKernel& k, const Field& f, double s, long n, const MeasureSpace& ms,
                      const std::vector<double>& f_breaks = {}, const QuadratureOptions& q = {});

/// (T_n f)(s) = int_0^inf K_n(t/s, f(t)) dt/t; linear kernels have K_n(z, u) = L_n(z) u.
struct MellinKernel {
  std::string name;
  std::function<double(long n, double z)> L;
  /// Nonlinear rule; unset for linear kernels.
  std::function<Eigen::ArrayXd(long n, double z, const Eigen::ArrayXd& u)> K;
  std::function<double(long n, double r)> psi;
  /// Points in z where L_n may jump.
  std::vector<double> breakpoints;
  /// Closed z-interval outside which L_n vanishes.
  std::optional<Interval> support;
  std::optional<double> d1;
  long n_min = 1;

  bool linear() const { return !K; }
  /// L_n as a function of z; raises ParameterError for n below n_min.
  std::function<double(double)> at(long n) const;
  Eigen::ArrayXd kernel(long n, double z, const Eigen::ArrayXd& u) const;
};

/// L_n(z) = n z^n chi_(0,1)(z).
MellinKernel moment_kernel();
/// L_n(z) = chi_(0,1)(z): infinite Haar mass.
MellinKernel indicator_kernel();
/// c * L_n of a base kernel (mass c for the moment kernel).
MellinKernel scaled_kernel(const MellinKernel& base, double c);

Element mellin_apply(const MellinKernel& k, const Field& f, double s, long n, const std::vector<double>& f_breaks = {},
                     const QuadratureOptions& q = {});

/// n -> T_n f, memoizing evaluations at each (n, s).
FieldSequence mellin_sequence(const MellinKernel& k, const Field& f, const std::vector<double>& f_breaks = {},
                              const QuadratureOptions& q = {});

struct ClauseResult {
  std::string clause;
  bool passed = false;
  std::string detail;
};

struct SingularityCertificate {
  std::string family;
  double d1 = 0.0;
  /// Kernel masses for n = n_min..report_upto.
  std::vector<double> masses;
  /// Per delta: tail masses for n = n_min..report_upto.
  std::vector<std::pair<double, std::vector<double>>> tails;
  /// Reproduction residuals eps_n (relative to the unit norm) for n = n_min..report_upto.
  std::vector<double> reproduction;
  std::vector<ClauseResult> clauses;
  /// "U-singular" or "fail(<clause>)".
  std::string kind;

  bool certified() const { return kind == "U-singular"; }
  /// First failing clause; empty when certified.
  std::string failed_clause() const;
};

struct SingularityOptions {
  std::vector<double> deltas{2.0, 4.0};
  /// Unit palette for the reproduction clause; {e, 2e} when empty.
  std::vector<Element> palette;
  long report_upto = 30;
  /// Index set H; H = N when unset.
  std::function<bool(long)> h;
  QuadratureOptions quadrature;
};

/// Mass bound, positivity, tail vanishing per delta, reproduction of constants
/// and the H-restriction comparison, for n read under cs.
SingularityCertificate singularity_audit(const MellinKernel& k, const Structure<double>& cs,
                                         const SingularityOptions& opts = {});

/// Same clauses for a Urysohn family, with s- and t-sections sampled on `probe`.
SingularityCertificate singularity_audit(const UrysohnKernel& k, const MeasureSpace& ms, const Interval& probe,
                                         const Structure<double>& cs, const SingularityOptions& opts = {});

/// int L_n(z / s) dz / z for each s; independent of s for Mellin kernels.
std::vector<double> mellin_masses(const MellinKernel& k, long n, const std::vector<double>& scales,
                                  const QuadratureOptions& q = {});

struct LipschitzAudit {
  long samples = 0;
  long violations = 0;
  double worst_margin = 0.0;
};

/// Random quadruples (s, t, u, v) from the box probe x probe x [-u_max, u_max]^2.
LipschitzAudit lipschitz_audit(const UrysohnKernel& k, const Interval& probe, long n_max, long samples,
                               std::uint64_t seed, double u_max = 4.0);

struct PsiAudit {
  bool zero_at_zero = false;
  bool monotone = false;
  /// Shared (w, delta): psi_n(r) <= w for r <= delta and every probed n.
  bool equicontinuous = false;
  /// sup_n psi_n(r) is finite on the probed range.
  bool equibounded = false;
  bool passed() const { return zero_at_zero && monotone && equicontinuous && equibounded; }
};

PsiAudit psi_class_audit(const std::function<double(long, double)>& psi, long n_max, double r_max = 10.0);

enum class ExperimentMode { Uniform, InMeasure, Modular };
std::string to_string(ExperimentMode m);

struct OperatorExperimentOptions {
  long n_max = 50;
  /// Compact set A for the uniform and in-measure modes.
  Interval compact = Interval::closed(0.125, 8.0);
  /// Log-spaced sample points of A.
  long grid = 256;
  InMeasureOptions in_measure;
  std::optional<Modular> modular;
  SingularityOptions singularity;
  QuadratureOptions quadrature;
  /// Exhausting-set horizon for the tails clause in modular mode.
  long m_horizon = 3;
};

struct OperatorReport {
  ExperimentMode mode = ExperimentMode::Uniform;
  SingularityCertificate certificate;
  std::vector<long> ns;
  /// Uniform: sup_A |T_n f - f|. In measure: exceptional level. Modular:
  /// rho(alpha (T_n f - f)) at the searched alpha.
  std::vector<double> errors;
  Verdict verdict = Verdict::Inconclusive;
  /// errors strictly decreasing from n = 2 on.
  bool strictly_decreasing = false;
  std::optional<ModularVerdict> modular;
  std::optional<EacReport> eac;
  double lambda = 0.0;
};

/// Runs T_n f -> f in the requested mode. Refuses (PreconditionError naming the
/// clause) when the family is not certified singular.
OperatorReport operator_convergence_experiment(const MellinKernel& k, const Field& f, const std::vector<double>& f_breaks,
                                               ExperimentMode mode, const Structure<double>& cs,
                                               const OperatorExperimentOptions& opts = {});

}  // namespace rieszlab
