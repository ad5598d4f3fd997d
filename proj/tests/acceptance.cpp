// Acceptance criteria 1-10: one PASS/FAIL line each, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "rieszlab/experiment.hpp"

using namespace rieszlab;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Timed {
  Report report;
  double seconds = 0;
};

Timed timed_run(const json& config) {
  const auto c = parse_config(config);
  const auto start = std::chrono::steady_clock::now();
  Report r = run_experiment(c);
  return {std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

std::size_t column(const Report& r, const std::string& name) {
  for (std::size_t j = 0; j < r.table.columns.size(); ++j)
    if (r.table.columns[j].name == name) return j;
  throw LookupError("no column '" + name + "' in " + r.experiment);
}

double number(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* l = std::get_if<long>(&c)) return static_cast<double>(*l);
  throw PreconditionError("cell is not numeric");
}

double column_max(const Report& r, const std::string& name) {
  const auto j = column(r, name);
  double m = 0;
  for (const auto& row : r.table.rows) m = std::max(m, number(row[j]));
  return m;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string secs(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f s", s);
  return buf;
}

// Configs reused by the determinism rerun.
std::vector<json> g_configs;

json remember(json c) {
  g_configs.push_back(c);
  return c;
}

Outcome tail_identity() {
  const auto t = timed_run(remember({{"experiment", "moment-tail"}, {"kernel", {{"n_min", 1}, {"n_max", 30}, {"deltas", {2.0}}}}}));
  const double tail = column_max(t.report, "tail_error_delta2");
  const double mass = column_max(t.report, "mass_error");
  const bool ok = t.report.table.rows.size() == 30 && tail <= 1e-8 && mass <= 1e-8 && t.seconds < 1.0;
  return {ok, "max |tail - 2^-n| " + sci(tail) + ", max |mass - 1| " + sci(mass) + " for n = 1..30 (" + secs(t.seconds) + ")"};
}

Outcome reproduction() {
  const auto t = timed_run({{"experiment", "moment-tail"}, {"kernel", {{"n_min", 1}, {"n_max", 30}}}});
  const double r = column_max(t.report, "reproduction_residual");
  const bool ok = t.report.table.rows.size() == 30 && r <= 1e-8 && t.seconds < 1.0;
  return {ok, "max |T_n u - u| / |u| " + sci(r) + " over the unit palette, n = 1..30 (" + secs(t.seconds) + ")"};
}

Outcome modular_law() {
  const auto t = timed_run(remember({{"experiment", "moment-modular"}, {"kernel", {{"n_min", 1}, {"n_max", 50}}}}));
  const auto& res = t.report.json["results"];
  const double err = column_max(t.report, "abs_error");
  const double alpha = res["alpha"].get<double>();
  const bool solid = res["solid"].get<bool>();
  const bool ok = t.report.table.rows.size() == 50 && err <= 1e-6 && alpha >= 1.0 && solid && t.seconds < 10.0;
  return {ok, "max |rho - 1/(2(n+1))| " + sci(err) + ", alpha " + format_number(alpha) + ", solid " +
                  (solid ? "yes" : "no") + " (" + secs(t.seconds) + ")"};
}

Outcome uniform() {
  const auto t = timed_run(remember(
      {{"experiment", "moment-uniform"}, {"kernel", {{"n_min", 1}, {"n_max", 200}}}, {"quadrature", {{"resolution", 1 << 14}}}}));
  const auto jn = column(t.report, "n");
  const auto je = column(t.report, "sup_error");
  bool decreasing = true;
  double prev = kInf, last = kInf;
  for (const auto& row : t.report.table.rows) {
    if (number(row[jn]) < 2) continue;
    const double e = number(row[je]);
    decreasing = decreasing && e < prev;
    prev = last = e;
  }
  const bool ok = decreasing && last < 1e-2 && t.seconds < 30.0;
  return {ok, std::string("sup error strictly decreasing from n = 2: ") + (decreasing ? "yes" : "no") + ", at n = 200 " +
                  sci(last) + " (" + secs(t.seconds) + ")"};
}

Outcome axioms() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = standard_bank().size() >= 30;
  std::string failing;
  for (const std::string kind : {"ordinary", "order", "cesaro", "almost", "density-filter"}) {
    const auto t = timed_run(remember({{"experiment", "axiom-audit"}, {"structure", {{"kind", kind}, {"horizon", 2000}, {"tol", 0.05}}}}));
    if (!t.report.passed()) {
      ok = false;
      failing += " " + kind;
    }
  }
  const auto broken = timed_run(
      {{"experiment", "axiom-audit"}, {"structure", {{"kind", "ordinary"}, {"horizon", 2000}, {"tol", 0.05}, {"sign_flipped", true}}}});
  bool witnessed = false;
  for (const auto& a : broken.report.json["results"]["axioms"])
    if (a["verdict"] == "fail" && a.contains("witness") && !a["witness"]["sequences"].empty()) witnessed = true;
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && !broken.report.passed() && witnessed && s < 10.0;
  return {ok, "bank " + std::to_string(standard_bank().size()) + " sequences, five structures " +
                  (failing.empty() ? std::string("pass") : "fail:" + failing) + ", sign-flipped structure caught with witness: " +
                  (witnessed ? "yes" : "no") + " (" + secs(s) + ")"};
}

Outcome integral() {
  const auto t = timed_run(remember({{"experiment", "integral-suite"}}));
  const double err = column_max(t.report, "abs_error");
  const double agree = column_max(t.report, "agreement");
  const auto functions = t.report.json["results"]["functions"].get<long>();
  const bool ok = functions == 20 && err <= 1e-4 && agree <= 2e-4 && t.seconds < 30.0;
  return {ok, std::to_string(functions) + " functions, max |defining - quadrature| " + sci(err) +
                  ", max |binary - ternary| " + sci(agree) + " (" + secs(t.seconds) + ")"};
}

Outcome vitali_discrimination() {
  const auto t = timed_run(remember({{"experiment", "vitali"}, {"kernel", {{"n_max", 1000}}}}));
  const auto& seqs = t.report.json["results"]["sequences"];
  bool good = false, spike = false;
  for (const auto& s : seqs) {
    if (s["fixture"] == "vitali-shrinking-indicator")
      good = s["in_measure"] == "true" && s["eac_small_sets"] == "true" && s["hypotheses"] == true && s["l1_verdict"] == "true";
    if (s["fixture"] == "vitali-spike") spike = s["eac_failing_clause"] == "small-sets";
  }
  const auto jf = column(t.report, "fixture"), jn = column(t.report, "n"), jl = column(t.report, "l1");
  double spike_err = 0;
  long spike_rows = 0;
  for (const auto& row : t.report.table.rows)
    if (std::get<std::string>(row[jf]) == "vitali-spike" && number(row[jn]) <= 1000) {
      spike_err = std::max(spike_err, std::abs(number(row[jl]) - 1.0));
      ++spike_rows;
    }
  const bool ok = good && spike && spike_rows == 1000 && spike_err <= 1e-6 && t.seconds < 5.0;
  return {ok, std::string("indicator passes in-measure and small-sets with L1 limit 0: ") + (good ? "yes" : "no") +
                  ", spike fails small-sets: " + (spike ? "yes" : "no") + ", max |int f_n - 1| " + sci(spike_err) +
                  " for n <= 1000 (" + secs(t.seconds) + ")"};
}

Outcome jensen() {
  const auto t = timed_run(remember({{"experiment", "jensen"}, {"params", {{"triples", 1000}}}}));
  const auto& res = t.report.json["results"];
  const double worst = res["worst_gap"].get<double>();
  const double closed = res["closed_form_gap"].get<double>();
  const bool ok = worst >= -1e-6 && std::abs(closed - 1.0 / 12) <= 1e-6 && t.seconds < 10.0;
  return {ok, "min gap over 1000 triples " + sci(worst) + ", closed-form gap error " + sci(std::abs(closed - 1.0 / 12)) +
                  " (" + secs(t.seconds) + ")"};
}

Outcome ito() {
  const auto t = timed_run(remember({{"experiment", "ito-isometry"}, {"params", {{"paths", 100000}}}}));
  const auto& res = t.report.json["results"];
  double worst_z = 0;
  for (const auto& i : res["integrands"]) worst_z = std::max(worst_z, i["z"].get<double>());
  const bool exact = res["telescoping_max_abs_difference"] == 0.0;
  const bool ok = res["integrands"].size() == 3 && worst_z <= 3.0 && exact && t.seconds < 30.0;
  return {ok, "max z " + sci(worst_z) + " over {1, t, step} with 1e5 paths, f = 1 equals B_T exactly: " +
                  (exact ? "yes" : "no") + " (" + secs(t.seconds) + ")"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "rieszlab_acceptance";
  std::filesystem::remove_all(dir);
  const auto start = std::chrono::steady_clock::now();
  long identical = 0;
  std::string differing;
  for (std::size_t i = 0; i < g_configs.size(); ++i) {
    auto c = parse_config(g_configs[i]);
    c.stem = "run" + std::to_string(i);
    c.out_dir = dir / "first";
    const auto a = write_report(run_experiment(c), c);
    c.out_dir = dir / "second";
    const auto b = write_report(run_experiment(c), c);
    if (slurp(a.csv) == slurp(b.csv) && !slurp(a.csv).empty())
      ++identical;
    else
      differing += " " + c.experiment;
  }
  std::filesystem::remove_all(dir);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = differing.empty() && identical > 0;
  return {ok, std::to_string(identical) + "/" + std::to_string(g_configs.size()) + " reruns byte-identical" +
                  (differing.empty() ? std::string() : ", differing:" + differing) + " (" + secs(s) + ")"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"moment-kernel tail identity and unit mass", tail_identity},
      {"reproduction of constants", reproduction},
      {"modular convergence law", modular_law},
      {"uniform convergence on the tent", uniform},
      {"convergence and limsup axioms", axioms},
      {"defining-sequence integral", integral},
      {"Vitali discrimination", vitali_discrimination},
      {"Jensen gap", jensen},
      {"Ito isometry", ito},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.passed ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
