#include <chrono>

#include "doctest.h"
#include "rieszlab/axiom_audit.hpp"

using namespace rieszlab;

namespace {

constexpr long kN = 2000;
constexpr double kTol = 0.05;

std::string failures(const AxiomReport& r) {
  std::string s;
  for (const auto& c : r.clauses)
    if (c.applicable && !c.passed) {
      s += c.clause + ":";
      if (c.witness) {
        for (const auto& n : c.witness->sequences) s += " [" + n + "]";
        s += " " + c.witness->detail;
      }
      s += "\n";
    }
  return s;
}

}  // namespace

TEST_CASE("the bank is large and its closed forms are consistent") {
  const auto bank = standard_bank();
  CHECK(bank.size() >= 30);
  const auto ordinary = Structure<double>::ordinary(kN, kTol);
  long convergent = 0;
  for (const auto& e : bank) {
    CHECK(e.term(1).size() == 2);
    if (!e.limit) continue;
    ++convergent;
    // Every closed-form limit is confirmed by the ordinary structure.
    CHECK_MESSAGE(estimate_limit(e.sequence(kN), ordinary, *e.limit) == Verdict::True, e.name);
  }
  CHECK(convergent >= 25);
}

TEST_CASE("standard structures satisfy every applicable clause") {
  const auto start = std::chrono::steady_clock::now();
  const auto bank = standard_bank();
  const std::vector<std::pair<std::string, Structure<double>>> structures{
      {"ordinary", Structure<double>::ordinary(kN, kTol)},
      {"order", Structure<double>::make(ConvergenceKind::Order, kN, kTol)},
      {"cesaro", Structure<double>::make(ConvergenceKind::Cesaro, kN, kTol)},
      {"almost", Structure<double>::make(ConvergenceKind::Almost, kN, kTol)},
      {"density-filter", Structure<double>::filtered(FilterSpec::density(), kN, kTol)},
  };
  for (const auto& [name, cs] : structures) {
    const auto r = axiom_audit(cs, LimsupOperator<double>::companion(cs), bank, name);
    CHECK_MESSAGE(r.passed(), name << "\n" << failures(r));
    CHECK(r.clauses.size() == audit_clauses().size());
    for (const auto& c : r.clauses) {
      if (!c.applicable) continue;
      CHECK_MESSAGE(c.checks > 0, name << " " << c.clause);
      // Undecided memberships stay rare at this horizon.
      CHECK_MESSAGE(10 * c.undecided <= c.checks, name << " " << c.clause << " undecided " << c.undecided);
    }
    CHECK(r.clause("h-restriction").applicable == (name == "density-filter"));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("five audits in " << secs << " s");
}

TEST_CASE("a sign-flipped structure is caught with a witness") {
  auto cs = Structure<double>::ordinary(kN, kTol);
  cs.sign_flipped = true;
  const auto r = axiom_audit(cs, LimsupOperator<double>::companion(cs), standard_bank(), "flipped");
  CHECK_FALSE(r.passed());
  const auto& mono = r.clause("monotonicity");
  CHECK_FALSE(mono.passed);
  REQUIRE(mono.witness.has_value());
  CHECK(mono.witness->sequences.size() == 2);
  CHECK(mono.witness->entry >= 0);
  CHECK(mono.worst > kTol);
}

TEST_CASE("order limsup paired with Cesaro agrees with the limit on convergent sequences") {
  const auto cs = Structure<double>::make(ConvergenceKind::Cesaro, kN, kTol);
  std::vector<BankEntry> convergent;
  for (const auto& e : standard_bank())
    if (e.limit) convergent.push_back(e);
  const auto r = axiom_audit(cs, LimsupOperator<double>::order(), convergent, "cesaro");
  CHECK(r.limsup == "order-limsup");
  const auto& agree = r.clause("limsup-agrees-with-limit");
  CHECK_MESSAGE(agree.passed, (agree.witness ? agree.witness->detail : ""));

  // On a sequence that converges only statistically the pairing breaks down.
  std::vector<BankEntry> with_statistical = convergent;
  for (const auto& e : standard_bank())
    if (!e.limit && e.statistical_limit) with_statistical.push_back(e);
  const auto broken = axiom_audit(cs, LimsupOperator<double>::order(), with_statistical, "cesaro");
  CHECK_FALSE(broken.clause("limsup-agrees-with-limit").passed);
}

TEST_CASE("audit report JSON and errors") {
  const auto cs = Structure<double>::ordinary(200, kTol);
  const auto r = axiom_audit(cs, LimsupOperator<double>::companion(cs), standard_bank());
  const std::string j = r.to_json();
  for (const auto& name : audit_clauses()) CHECK(j.find("\"" + name + "\"") != std::string::npos);
  CHECK(j.find("\"horizon\": 200") != std::string::npos);
  CHECK_THROWS_AS(r.clause("no such clause"), LookupError);

  CHECK_THROWS_AS(axiom_audit(Structure<double>::ordinary(5, kTol), LimsupOperator<double>::order(), standard_bank()),
                  ParameterError);
  const std::vector<BankEntry> tiny{standard_bank().front()};
  CHECK_THROWS_AS(axiom_audit(cs, LimsupOperator<double>::order(), tiny), PreconditionError);
}
