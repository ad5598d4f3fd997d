#pragma once

// Property audit of a convergence structure and a limsup operator against a
// bank of sequences with closed-form limits.

#include <optional>
#include <string>
#include <vector>

#include "rieszlab/convergence.hpp"

namespace rieszlab {

using Sequence = LatticeSequence<double>;

struct BankEntry {
  std::string name;
  std::function<Element(long)> term;
  /// Usual limit, when the sequence converges.
  std::optional<Element> limit;
  /// Limit along density-one index sets (strong Cesaro / almost / statistical
  /// sense); falls back to `limit`.
  std::optional<Element> statistical_limit;

  /// The closed-form limit the structure should produce, if the sequence belongs to its S.
  std::optional<Element> expected(const Structure<double>& cs) const;
  Sequence sequence(long horizon) const { return {term, horizon}; }
};

/// At least 30 bounded sequences in R^2 with closed-form limits, plus a few
/// bounded divergent ones for the limsup clauses.
std::vector<BankEntry> standard_bank();

struct Witness {
  std::vector<std::string> sequences;
  /// Offending entry of the lattice element, -1 when not entry specific.
  long entry = -1;
  std::string detail;
};

struct ClauseReport {
  std::string clause;
  bool applicable = true;
  bool passed = true;
  long checks = 0;
  /// Membership checks the estimator could not decide at this horizon.
  long undecided = 0;
  /// Largest violation found (0 when passed).
  double worst = 0.0;
  std::optional<Witness> witness;
};

struct AxiomReport {
  std::string structure;
  std::string limsup;
  long horizon = 0;
  double tol = 0.0;
  std::vector<ClauseReport> clauses;

  bool passed() const;
  const ClauseReport& clause(const std::string& name) const;
  std::string to_json() const;
};

/// Clause names in audit order.
const std::vector<std::string>& audit_clauses();

AxiomReport axiom_audit(const Structure<double>& cs, const LimsupOperator<double>& ls,
                        const std::vector<BankEntry>& bank, const std::string& structure_name = {});

}  // namespace rieszlab
