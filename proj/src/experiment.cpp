#include "rieszlab/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <deque>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

namespace rieszlab {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// --- tables -------------------------------------------------------------------

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string to_string(Oracle o) {
  switch (o) {
    case Oracle::ClosedForm:
      return "closed-form";
    case Oracle::Quadrature:
      return "quadrature";
    case Oracle::MonteCarlo:
      return "monte-carlo";
    case Oracle::PaperIdentity:
      return "paper-identity";
  }
  return "closed-form";
}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw PreconditionError("table row has " + std::to_string(row.size()) + " cells for " +
                            std::to_string(columns.size()) + " columns");
  for (std::size_t j = 0; j < row.size(); ++j)
    if (!std::holds_alternative<std::string>(row[j]) && !columns[j].oracle)
      throw PreconditionError("numeric cell in column '" + columns[j].name + "' without an oracle tag");
  rows.push_back(std::move(row));
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + '"';
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  return csv_escape(std::get<std::string>(c));
}

}  // namespace

void CsvTable::write(std::ostream& os) const {
  os << str();
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + csv_escape(columns[j].name);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + cell_text(row[j]);
    out += '\n';
  }
  return out;
}

// --- configuration ---------------------------------------------------------------

namespace {

struct ExperimentSpec {
  std::string id;
  std::string module;
  std::vector<std::string> fixtures;
  long n_min = 1;
  long n_max = 1;
  std::vector<double> deltas;
  std::string kind = "ordinary";
  long horizon = 100;
  double tol = 1e-2;
  /// Allowed params with their defaults; the default fixes the JSON type.
  json params = json::object();
};

const std::vector<ExperimentSpec>& specs() {
  static const std::vector<ExperimentSpec> s = [] {
    std::vector<ExperimentSpec> v;
    v.push_back({"moment-tail", "operators", {"moment-kernel"}, 1, 30, {2.0, 4.0}, "ordinary", 30, 1e-6,
                 {{"check_tol", 1e-8}, {"scales", {0.5, 1.0, 3.0}}}});
    v.push_back({"moment-modular", "operators", {"moment-kernel", "ramp"}, 1, 50, {}, "ordinary", 25, 0.05,
                 {{"check_tol", 1e-6}, {"phi", "square"}}});
    v.push_back({"moment-uniform", "operators", {"moment-kernel", "log-tent"}, 1, 200, {}, "ordinary", 100, 1e-2,
                 {{"threshold", 1e-2}, {"grid", 256}, {"compact_lo", 0.125}, {"compact_hi", 8.0}}});
    v.push_back({"axiom-audit", "convergence", {}, 1, 1, {}, "ordinary", 2000, 0.05, {{"limsup", "companion"}}});
    v.push_back({"integral-suite", "integral", integration_suite_ids(), 1, 1, {}, "ordinary", 100, 1e-4,
                 {{"check_tol", 1e-4}, {"agreement", 2e-4}, {"levels", 18}, {"ternary_levels", 11}}});
    v.push_back({"vitali", "integral", {"vitali-shrinking-indicator", "vitali-spike"}, 1, 1000, {}, "ordinary", 200,
                 1e-2, {{"l1_tol", 1e-6}}});
    v.push_back({"jensen", "modular", {}, 1, 1, {}, "ordinary", 100, 1e-3, {{"triples", 1000}, {"gap_tol", 1e-6}}});
    v.push_back({"ito-isometry", "stochastic", {"ito-one", "ito-time", "ito-step"}, 1, 1, {}, "ordinary", 100, 1e-2,
                 {{"paths", 100000}, {"steps", 200}, {"time", 1.0}, {"z_max", 3.0}}});
    std::vector<std::string> orlicz;
    for (const auto* f : standard_fixtures().list("modular"))
      if (std::holds_alternative<OrliczFixture>(f->payload)) orlicz.push_back(f->id);
    v.push_back({"orlicz-membership", "modular", orlicz, 1, 1, {}, "ordinary", 100, 1e-3, json::object()});
    return v;
  }();
  return s;
}

const ExperimentSpec& spec_for(const std::string& id) {
  for (const auto& s : specs())
    if (s.id == id) return s;
  throw SchemaError("/experiment", "unknown experiment id '" + id + "'");
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }

void only_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw SchemaError(child(path, k), "unknown key");
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

long get_long(const json& j, const std::string& path, long min) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  const auto v = j.get<long>();
  if (v < min) throw SchemaError(path, "must be at least " + std::to_string(min));
  return v;
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "must be finite");
  return v;
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
  return j.get<bool>();
}

bool same_type(const json& value, const json& def) {
  if (def.is_number_integer()) return value.is_number_integer();
  if (def.is_number()) return value.is_number();
  if (def.is_array()) return value.is_array() && std::all_of(value.begin(), value.end(), [](const json& x) { return x.is_number(); });
  return value.type() == def.type();
}

const std::set<std::string> kStructureKinds{"ordinary", "order",           "relative-uniform", "cesaro",
                                            "almost",   "cofinite-filter", "density-filter"};

}  // namespace

Structure<double> StructureConfig::build(long default_horizon, double default_tol) const {
  const long n = horizon.value_or(default_horizon);
  const double t = tol.value_or(default_tol);
  Structure<double> cs;
  if (kind == "ordinary") {
    cs = Structure<double>::ordinary(n, t);
  } else if (kind == "order") {
    cs = Structure<double>::make(ConvergenceKind::Order, n, t);
  } else if (kind == "relative-uniform") {
    cs = Structure<double>::make(ConvergenceKind::RelativeUniform, n, t);
  } else if (kind == "cesaro") {
    cs = Structure<double>::make(ConvergenceKind::Cesaro, n, t);
  } else if (kind == "almost") {
    cs = Structure<double>::make(ConvergenceKind::Almost, n, t);
  } else if (kind == "cofinite-filter") {
    cs = Structure<double>::filtered(FilterSpec::cofinite(), n, t);
  } else if (kind == "density-filter") {
    cs = Structure<double>::filtered(FilterSpec::density(theta), n, t);
  } else {
    throw SchemaError("/structure/kind", "unknown structure kind '" + kind + "'");
  }
  cs.window = window;
  cs.sign_flipped = sign_flipped;
  return cs;
}

QuadratureOptions ExperimentConfig::quadrature() const {
  QuadratureOptions q;
  q.resolution = resolution;
  q.rule = rule;
  return q;
}

const std::vector<std::pair<std::string, std::string>>& experiment_catalog() {
  static const std::vector<std::pair<std::string, std::string>> c = [] {
    std::vector<std::pair<std::string, std::string>> v;
    for (const auto& s : specs()) v.emplace_back(s.id, s.module);
    return v;
  }();
  return c;
}

ExperimentConfig parse_config(const json& j) {
  only_keys(j, "", {"experiment", "module", "fixtures", "structure", "kernel", "quadrature", "seed", "output", "params"});
  if (!j.contains("experiment")) throw SchemaError("/experiment", "required key missing");
  ExperimentConfig c;
  c.experiment = get_string(j["experiment"], "/experiment");
  const ExperimentSpec& spec = spec_for(c.experiment);
  c.module = spec.module;
  if (j.contains("module") && get_string(j["module"], "/module") != spec.module)
    throw SchemaError("/module", "experiment '" + c.experiment + "' targets module '" + spec.module + "'");

  c.fixtures = spec.fixtures;
  if (j.contains("fixtures")) {
    const auto& f = j["fixtures"];
    if (!f.is_array()) throw SchemaError("/fixtures", "expected an array of fixture ids");
    c.fixtures.clear();
    for (std::size_t i = 0; i < f.size(); ++i) c.fixtures.push_back(get_string(f[i], "/fixtures/" + std::to_string(i)));
  }

  c.structure.kind = spec.kind;
  if (j.contains("structure")) {
    const auto& s = j["structure"];
    only_keys(s, "/structure", {"kind", "horizon", "tol", "theta", "window", "sign_flipped"});
    if (s.contains("kind")) {
      c.structure.kind = get_string(s["kind"], "/structure/kind");
      if (!kStructureKinds.count(c.structure.kind))
        throw SchemaError("/structure/kind", "unknown structure kind '" + c.structure.kind + "'");
    }
    if (s.contains("horizon")) c.structure.horizon = get_long(s["horizon"], "/structure/horizon", 1);
    if (s.contains("tol")) {
      c.structure.tol = get_double(s["tol"], "/structure/tol");
      if (*c.structure.tol <= 0) throw SchemaError("/structure/tol", "must be positive");
    }
    if (s.contains("theta")) {
      c.structure.theta = get_double(s["theta"], "/structure/theta");
      if (!(c.structure.theta > 0 && c.structure.theta < 1)) throw SchemaError("/structure/theta", "must lie in (0, 1)");
    }
    if (s.contains("window")) c.structure.window = get_long(s["window"], "/structure/window", 0);
    if (s.contains("sign_flipped")) c.structure.sign_flipped = get_bool(s["sign_flipped"], "/structure/sign_flipped");
  }

  c.deltas = spec.deltas;
  if (j.contains("kernel")) {
    const auto& k = j["kernel"];
    only_keys(k, "/kernel", {"n_min", "n_max", "deltas"});
    if (k.contains("n_min")) c.n_min = get_long(k["n_min"], "/kernel/n_min", 1);
    if (k.contains("n_max")) c.n_max = get_long(k["n_max"], "/kernel/n_max", 1);
    if (k.contains("deltas")) {
      if (!k["deltas"].is_array()) throw SchemaError("/kernel/deltas", "expected an array of numbers");
      c.deltas.clear();
      for (std::size_t i = 0; i < k["deltas"].size(); ++i) {
        const std::string p = "/kernel/deltas/" + std::to_string(i);
        const double d = get_double(k["deltas"][i], p);
        if (d <= 1) throw SchemaError(p, "delta must exceed 1");
        c.deltas.push_back(d);
      }
    }
  }
  if (!c.n_min) c.n_min = spec.n_min;
  if (!c.n_max) c.n_max = spec.n_max;
  if (*c.n_max < *c.n_min) throw SchemaError("/kernel/n_max", "must be at least n_min");

  if (j.contains("quadrature")) {
    const auto& q = j["quadrature"];
    only_keys(q, "/quadrature", {"resolution", "rule"});
    if (q.contains("resolution")) c.resolution = get_long(q["resolution"], "/quadrature/resolution", 16);
    if (q.contains("rule")) {
      const auto r = get_string(q["rule"], "/quadrature/rule");
      if (r == "gauss-kronrod")
        c.rule = PanelRule::GaussKronrod;
      else if (r == "midpoint-richardson")
        c.rule = PanelRule::MidpointRichardson;
      else
        throw SchemaError("/quadrature/rule", "expected gauss-kronrod or midpoint-richardson");
    }
  }
  if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(get_long(j["seed"], "/seed", 0));

  c.stem = c.experiment;
  if (j.contains("output")) {
    const auto& o = j["output"];
    only_keys(o, "/output", {"dir", "stem"});
    if (o.contains("dir")) c.out_dir = get_string(o["dir"], "/output/dir");
    if (o.contains("stem")) {
      c.stem = get_string(o["stem"], "/output/stem");
      if (c.stem.empty() || c.stem.find('/') != std::string::npos)
        throw SchemaError("/output/stem", "must be a plain file name");
    }
  }

  c.params = spec.params;
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (!p.is_object()) throw SchemaError("/params", "expected an object");
    for (const auto& [k, v] : p.items()) {
      if (!spec.params.contains(k)) throw SchemaError("/params/" + k, "unknown key for experiment '" + c.experiment + "'");
      if (!same_type(v, spec.params[k])) throw SchemaError("/params/" + k, "wrong type");
      c.params[k] = v;
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw LookupError("cannot open config file '" + file.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

void apply_overrides(ExperimentConfig& c, const ConfigOverrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.resolution) {
    if (*o.resolution < 16) throw SchemaError("/quadrature/resolution", "must be at least 16");
    c.resolution = *o.resolution;
  }
  if (o.horizon) {
    if (*o.horizon < 1) throw SchemaError("/structure/horizon", "must be at least 1");
    c.structure.horizon = *o.horizon;
  }
  if (o.out_dir) c.out_dir = *o.out_dir;
}

// --- experiments ----------------------------------------------------------------

namespace {

// Non-finite values become strings so the JSON stays valid.
ojson num(double x) { return std::isfinite(x) ? ojson(x) : ojson(format_number(x)); }

Cell opt_cell(const std::optional<double>& x) { return x ? Cell(*x) : Cell(std::string()); }

struct Series {
  std::string name;
  std::string x_label;
  std::vector<std::pair<double, double>> points;
};

class Builder {
 public:
  Builder(const ExperimentConfig& c, const FixtureRegistry& reg) : c_(c), reg_(reg), spec_(spec_for(c.experiment)) {
    cs_ = c.structure.build(spec_.horizon, spec_.tol);
    for (const auto& id : c.fixtures) reg.get(id);
  }

  const ExperimentConfig& config() const { return c_; }
  const FixtureRegistry& registry() const { return reg_; }
  const Structure<double>& cs() const { return cs_; }
  long n_min() const { return *c_.n_min; }
  long n_max() const { return *c_.n_max; }
  double param(const char* k) const { return c_.params.at(k).get<double>(); }
  long iparam(const char* k) const { return c_.params.at(k).get<long>(); }
  std::string sparam(const char* k) const { return c_.params.at(k).get<std::string>(); }

  void columns(std::vector<Column> cols) { table_.columns = std::move(cols); }
  void row(std::vector<Cell> r) { table_.add_row(std::move(r)); }
  void fail(std::string clause) { failures_.push_back(std::move(clause)); }
  void check(bool ok, std::string clause) {
    if (!ok) fail(std::move(clause));
  }
  ojson& results() { return results_; }
  void tag(const std::string& key, Oracle o) { result_tags_[key] = to_string(o); }
  Series& series(std::string name, std::string x_label) {
    series_.push_back({std::move(name), std::move(x_label), {}});
    return series_.back();
  }

  Report finish() {
    Report r;
    r.experiment = c_.experiment;
    r.module = c_.module;
    r.table = std::move(table_);
    r.failures = failures_;

    ojson& j = r.json;
    j["experiment"] = c_.experiment;
    j["module"] = c_.module;
    j["generated_at"] = timestamp();
    j["passed"] = r.passed();
    j["failures"] = failures_;
    ojson s;
    s["seed"] = c_.seed;
    s["quadrature_resolution"] = c_.resolution;
    s["panel_rule"] = c_.rule == PanelRule::GaussKronrod ? "gauss-kronrod" : "midpoint-richardson";
    s["structure"] = c_.structure.kind;
    s["horizon"] = cs_.horizon;
    s["tol"] = cs_.tol;
    if (c_.structure.kind == "density-filter") s["theta"] = c_.structure.theta;
    if (c_.structure.sign_flipped) s["sign_flipped"] = true;
    s["n_min"] = n_min();
    s["n_max"] = n_max();
    if (!c_.deltas.empty()) s["deltas"] = c_.deltas;
    s["params"] = ojson::parse(c_.params.dump());
    j["settings"] = std::move(s);
    j["fixtures"] = ojson::array();
    for (const auto& id : c_.fixtures) j["fixtures"].push_back({{"id", id}, {"anchor", reg_.get(id).anchor}});
    j["results"] = std::move(results_);
    ojson prov;
    prov["columns"] = ojson::object();
    for (const auto& col : r.table.columns)
      if (col.oracle) prov["columns"][col.name] = to_string(*col.oracle);
    prov["results"] = result_tags_;
    j["provenance"] = std::move(prov);
    ojson cols = ojson::array();
    for (const auto& col : r.table.columns) cols.push_back(col.name);
    j["table"] = {{"file", c_.stem + ".csv"}, {"columns", cols}, {"rows", r.table.rows.size()}};
    j["series"] = ojson::array();
    for (const auto& se : series_) {
      ojson pts = ojson::array();
      for (const auto& [x, y] : se.points) pts.push_back({num(x), num(y)});
      j["series"].push_back({{"name", se.name}, {"x", se.x_label}, {"points", std::move(pts)}});
    }
    return r;
  }

 private:
  static std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
  }

  const ExperimentConfig& c_;
  const FixtureRegistry& reg_;
  const ExperimentSpec& spec_;
  Structure<double> cs_;
  CsvTable table_;
  std::vector<std::string> failures_;
  ojson results_ = ojson::object();
  ojson result_tags_ = ojson::object();
  std::deque<Series> series_;
};

const Fixture* first_of(const Builder& b, auto pred) {
  for (const auto& id : b.config().fixtures) {
    const auto& f = b.registry().get(id);
    if (pred(f)) return &f;
  }
  return nullptr;
}

const Fixture& require_kernel(const Builder& b) {
  const Fixture* k = first_of(b, [](const Fixture& f) { return std::holds_alternative<MellinKernel>(f.payload); });
  if (!k) throw LookupError("experiment '" + b.config().experiment + "' needs a Mellin kernel fixture");
  return *k;
}

const Fixture& require_function(const Builder& b) {
  const Fixture* k = first_of(b, [](const Fixture& f) { return std::holds_alternative<FunctionFixture>(f.payload); });
  if (!k) throw LookupError("experiment '" + b.config().experiment + "' needs a function fixture");
  return *k;
}

ojson certificate_json(const SingularityCertificate& cert) {
  ojson j;
  j["family"] = cert.family;
  j["kind"] = cert.kind;
  j["d1"] = num(cert.d1);
  j["clauses"] = ojson::array();
  for (const auto& cl : cert.clauses) j["clauses"].push_back({{"clause", cl.clause}, {"passed", cl.passed}, {"detail", cl.detail}});
  return j;
}

std::string vstr(Verdict v) { return std::string(to_string(v)); }

// Kernel masses, tails and reproduction of constants.
void moment_tail(Builder& b) {
  const Fixture& kf = require_kernel(b);
  const auto& k = std::get<MellinKernel>(kf.payload);
  const bool moment = kf.id == "moment-kernel";
  const auto& c = b.config();
  const double tol = b.param("check_tol");
  std::vector<double> scales = c.params.at("scales").get<std::vector<double>>();

  SingularityOptions so;
  so.deltas = c.deltas;
  so.report_upto = b.n_max();
  so.quadrature = c.quadrature();
  const long n_lo = std::max(b.n_min(), k.n_min);
  const auto cert = singularity_audit(k, b.cs(), so);
  if (!cert.certified()) b.fail("singularity:" + cert.failed_clause());

  std::vector<Column> cols{{"n", Oracle::ClosedForm}, {"mass", Oracle::Quadrature}, {"mass_error", Oracle::Quadrature}};
  for (double d : c.deltas) {
    const std::string tag = "delta" + format_number(d);
    cols.push_back({"tail_" + tag, Oracle::Quadrature});
    cols.push_back({"tail_reference_" + tag, Oracle::PaperIdentity});
    cols.push_back({"tail_error_" + tag, Oracle::Quadrature});
  }
  cols.push_back({"reproduction_residual", Oracle::Quadrature});
  b.columns(cols);

  // |T_n u - u| / |u| over a unit palette and several scales s.
  const std::vector<Eigen::ArrayXd> palette{Eigen::ArrayXd::Ones(1), (Eigen::ArrayXd(3) << 1.0, -2.0, 0.5).finished()};
  double worst_mass = 0, worst_tail = 0, worst_repro = 0;
  auto& mass_series = b.series("mass_error", "n");
  std::vector<Series*> tail_series;
  for (double d : c.deltas) tail_series.push_back(&b.series("tail_delta" + format_number(d), "n"));
  const long first = cert.masses.empty() ? n_lo : k.n_min;
  for (long n = n_lo; n <= b.n_max(); ++n) {
    const auto idx = static_cast<std::size_t>(n - first);
    const double mass = idx < cert.masses.size() ? cert.masses[idx] : kInf;
    std::vector<Cell> r{n, mass, std::abs(mass - 1.0)};
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    mass_series.points.emplace_back(static_cast<double>(n), std::abs(mass - 1.0));
    for (std::size_t di = 0; di < c.deltas.size(); ++di) {
      const double d = c.deltas[di];
      double tail = kInf;
      for (const auto& [delta, values] : cert.tails)
        if (delta == d && idx < values.size()) tail = values[idx];
      tail_series[di]->points.emplace_back(static_cast<double>(n), tail);
      if (moment) {
        const double ref = std::pow(d, -static_cast<double>(n));
        worst_tail = std::max(worst_tail, std::abs(tail - ref));
        r.insert(r.end(), {tail, ref, std::abs(tail - ref)});
      } else {
        r.insert(r.end(), {tail, std::string(), std::string()});
      }
    }
    double repro = 0;
    for (const auto& u : palette) {
      const Field cu = [u](double) { return u; };
      for (double s : scales) {
        const Element t = mellin_apply(k, cu, s, n, {}, c.quadrature());
        repro = std::max(repro, (t.values() - u).abs().maxCoeff() / u.abs().maxCoeff());
      }
    }
    worst_repro = std::max(worst_repro, repro);
    r.push_back(repro);
    b.row(std::move(r));
  }
  if (moment) {
    b.check(worst_mass <= tol, "unit-mass");
    b.check(worst_tail <= tol, "tail-identity");
  }
  b.check(worst_repro <= tol, "reproduction");
  auto& res = b.results();
  res["kernel"] = kf.id;
  res["certificate"] = certificate_json(cert);
  res["worst_mass_error"] = num(worst_mass);
  res["worst_tail_error"] = moment ? num(worst_tail) : ojson(nullptr);
  res["worst_reproduction_residual"] = num(worst_repro);
  res["check_tol"] = tol;
  b.tag("worst_mass_error", Oracle::Quadrature);
  b.tag("worst_tail_error", Oracle::PaperIdentity);
  b.tag("worst_reproduction_residual", Oracle::Quadrature);
}

OperatorExperimentOptions operator_options(const Builder& b) {
  OperatorExperimentOptions o;
  o.n_max = b.n_max();
  o.quadrature = b.config().quadrature();
  o.singularity.quadrature = o.quadrature;
  o.singularity.report_upto = std::min<long>(b.n_max(), 30);
  if (!b.config().deltas.empty()) o.singularity.deltas = b.config().deltas;
  return o;
}

void moment_modular(Builder& b) {
  const Fixture& kf = require_kernel(b);
  const Fixture& ff = require_function(b);
  const auto& f = std::get<FunctionFixture>(ff.payload);
  const std::string phi = b.sparam("phi");
  const bool closed = kf.id == "moment-kernel" && ff.id == "ramp" && phi == "square";
  const double tol = b.param("check_tol");

  OperatorExperimentOptions o = operator_options(b);
  o.modular = Modular{phi_by_name(phi), f.ms, b.cs(), o.quadrature};
  const auto rep = operator_convergence_experiment(std::get<MellinKernel>(kf.payload), f.f, f.breakpoints,
                                                   ExperimentMode::Modular, b.cs(), o);
  const double alpha = rep.modular ? rep.modular->alpha : 0.0;
  b.columns({{"n", Oracle::ClosedForm}, {"rho", Oracle::Quadrature}, {"reference", Oracle::ClosedForm},
             {"abs_error", Oracle::Quadrature}});
  auto& se = b.series("rho_alpha" + format_number(alpha), "n");
  double worst = 0;
  for (std::size_t i = 0; i < rep.errors.size(); ++i) {
    const long n = rep.ns[i];
    const double rho = rep.errors[i];
    se.points.emplace_back(static_cast<double>(n), rho);
    if (closed) {
      // Homogeneity of the square: rho(alpha g) = alpha^2 rho(g).
      const double ref = alpha * alpha / (2.0 * static_cast<double>(n + 1));
      worst = std::max(worst, std::abs(rho - ref));
      b.row({n, rho, ref, std::abs(rho - ref)});
    } else {
      b.row({n, rho, std::string(), std::string()});
    }
  }
  b.check(rep.verdict == Verdict::True, "modular-convergence");
  b.check(alpha >= 1.0, "alpha-at-least-one");
  b.check(rep.modular && rep.modular->solid, "solidity");
  if (closed) b.check(worst <= tol, "closed-form-law");
  if (rep.eac && !rep.eac->passed()) b.fail("equiabsolute-continuity:" + rep.eac->failing_clause());

  auto& res = b.results();
  res["kernel"] = kf.id;
  res["function"] = ff.id;
  res["phi"] = phi;
  res["verdict"] = vstr(rep.verdict);
  res["alpha"] = alpha;
  res["solid"] = rep.modular && rep.modular->solid;
  res["lambda"] = num(rep.lambda);
  res["strictly_decreasing"] = rep.strictly_decreasing;
  if (rep.modular) {
    ojson trace = ojson::array();
    for (const auto& t : rep.modular->trace) trace.push_back({{"alpha", t.alpha}, {"verdict", vstr(t.verdict)}});
    res["alpha_trace"] = std::move(trace);
  }
  if (rep.eac) res["equiabsolute_continuity"] = {{"small_sets", vstr(rep.eac->small_sets)}, {"tails", vstr(rep.eac->tails)}};
  res["worst_abs_error"] = closed ? num(worst) : ojson(nullptr);
  res["certificate"] = certificate_json(rep.certificate);
  b.tag("alpha", Oracle::Quadrature);
  b.tag("lambda", Oracle::ClosedForm);
  b.tag("worst_abs_error", Oracle::ClosedForm);
}

void moment_uniform(Builder& b) {
  const Fixture& kf = require_kernel(b);
  const Fixture& ff = require_function(b);
  const auto& f = std::get<FunctionFixture>(ff.payload);
  const bool closed = kf.id == "moment-kernel" && ff.id == "log-tent";
  OperatorExperimentOptions o = operator_options(b);
  o.grid = b.iparam("grid");
  o.compact = Interval::closed(b.param("compact_lo"), b.param("compact_hi"));
  const auto rep = operator_convergence_experiment(std::get<MellinKernel>(kf.payload), f.f, f.breakpoints,
                                                   ExperimentMode::Uniform, b.cs(), o);
  b.columns({{"n", Oracle::ClosedForm}, {"sup_error", Oracle::Quadrature}, {"error_at_one", Oracle::ClosedForm}});
  auto& se = b.series("sup_error", "n");
  for (std::size_t i = 0; i < rep.errors.size(); ++i) {
    const long n = rep.ns[i];
    se.points.emplace_back(static_cast<double>(n), rep.errors[i]);
    // At s = 1 the error of the tent is (1 - 4^-n) / (n ln 4).
    const std::optional<double> at_one =
        closed ? std::optional<double>((1.0 - std::pow(4.0, -static_cast<double>(n))) / (static_cast<double>(n) * std::log(4.0)))
               : std::nullopt;
    b.row({n, rep.errors[i], opt_cell(at_one)});
  }
  const double threshold = b.param("threshold");
  const double last = rep.errors.empty() ? kInf : rep.errors.back();
  b.check(rep.strictly_decreasing, "strictly-decreasing");
  b.check(last < threshold, "below-threshold");
  b.check(rep.verdict == Verdict::True, "uniform-convergence");
  auto& res = b.results();
  res["kernel"] = kf.id;
  res["function"] = ff.id;
  res["verdict"] = vstr(rep.verdict);
  res["strictly_decreasing"] = rep.strictly_decreasing;
  res["final_sup_error"] = num(last);
  res["threshold"] = threshold;
  res["grid"] = o.grid;
  res["certificate"] = certificate_json(rep.certificate);
  b.tag("final_sup_error", Oracle::Quadrature);
}

std::string clause_group(const std::string& clause) {
  if (clause.rfind("limsup-", 0) == 0) return "limsup";
  if (clause == "norm-null-is-null" || clause == "h-restriction") return "condition";
  return "convergence";
}

void axiom_audit_experiment(Builder& b) {
  const auto& cs = b.cs();
  const std::string which = b.sparam("limsup");
  if (which != "companion" && which != "order") throw SchemaError("/params/limsup", "expected companion or order");
  const auto ls = which == "order" ? LimsupOperator<double>::order() : LimsupOperator<double>::companion(cs);
  const auto rep = axiom_audit(cs, ls, standard_bank(), b.config().structure.kind);

  b.columns({{"clause", std::nullopt},
             {"group", std::nullopt},
             {"applicable", Oracle::ClosedForm},
             {"passed", Oracle::ClosedForm},
             {"checks", Oracle::ClosedForm},
             {"undecided", Oracle::ClosedForm},
             {"worst_violation", Oracle::ClosedForm}});
  auto& se = b.series("worst_violation", "clause_index");
  ojson groups{{"convergence", ojson::array()}, {"limsup", ojson::array()}, {"condition", ojson::array()}};
  for (std::size_t i = 0; i < rep.clauses.size(); ++i) {
    const auto& c = rep.clauses[i];
    const std::string g = clause_group(c.clause);
    b.row({c.clause, g, long{c.applicable}, long{c.passed}, c.checks, c.undecided, c.worst});
    se.points.emplace_back(static_cast<double>(i), c.worst);
    ojson v{{"clause", c.clause},
            {"verdict", !c.applicable ? "not-applicable" : (c.passed ? "pass" : "fail")},
            {"checks", c.checks},
            {"undecided", c.undecided}};
    if (c.witness)
      v["witness"] = {{"sequences", c.witness->sequences}, {"entry", c.witness->entry}, {"detail", c.witness->detail}};
    groups[g].push_back(std::move(v));
    if (c.applicable && !c.passed) b.fail(c.clause);
  }
  auto& res = b.results();
  res["limsup"] = rep.limsup;
  res["bank_size"] = standard_bank().size();
  res["axioms"] = groups["convergence"];
  res["limsup_axioms"] = groups["limsup"];
  res["conditions"] = groups["condition"];
  res["note"] = "lattices are finite grids, where order and componentwise suprema coincide";
  b.tag("worst_violation", Oracle::ClosedForm);
}

void integral_suite(Builder& b) {
  const double tol = b.param("check_tol");
  const double agree = b.param("agreement");
  DefiningSequenceOptions binary, ternary;
  binary.levels = b.iparam("levels");
  ternary.base = 3;
  ternary.levels = b.iparam("ternary_levels");
  const auto q = b.config().quadrature();

  b.columns({{"fixture", std::nullopt},
             {"entry", Oracle::ClosedForm},
             {"defining_binary", Oracle::Quadrature},
             {"defining_ternary", Oracle::Quadrature},
             {"quadrature_reference", Oracle::Quadrature},
             {"closed_form", Oracle::ClosedForm},
             {"abs_error", Oracle::Quadrature},
             {"agreement", Oracle::Quadrature},
             {"residual_bound", Oracle::Quadrature}});
  auto& se = b.series("abs_error", "fixture_index");
  double worst_err = 0, worst_agree = 0, worst_closed = 0;
  long index = 0;
  ojson verdicts = ojson::array();
  for (const auto& id : b.config().fixtures) {
    const auto& f = b.registry().payload<FunctionFixture>(id);
    const auto x = integrate(f.f, f.support, f.ms, f.support, b.cs(), binary);
    const auto y = integrate(f.f, f.support, f.ms, f.support, b.cs(), ternary);
    QuadratureOptions qf = q;
    qf.breakpoints = f.breakpoints;
    const Eigen::ArrayXd ref = quadrature_reference(f.f, f.support, f.ms, qf).value;
    double err = 0, ag = 0;
    for (Index i = 0; i < x.value.size(); ++i) {
      const double e = std::abs(x.value.value(i) - ref(i));
      const double a = std::abs(x.value.value(i) - y.value.value(i));
      std::optional<double> cf;
      if (f.integral) {
        cf = (*f.integral)(i);
        worst_closed = std::max(worst_closed, std::abs(ref(i) - *cf));
        if (std::abs(ref(i) - *cf) > tol) b.fail("closed-form:" + id);
      }
      err = std::max(err, e);
      ag = std::max(ag, a);
      b.row({id, static_cast<long>(i), x.value.value(i), y.value.value(i), ref(i), opt_cell(cf), e, a, x.residual});
    }
    se.points.emplace_back(static_cast<double>(index++), err);
    worst_err = std::max(worst_err, err);
    worst_agree = std::max(worst_agree, ag);
    if (err > tol) b.fail("lebesgue-equivalence:" + id);
    if (ag > agree) b.fail("well-defined:" + id);
    verdicts.push_back({{"fixture", id}, {"verdict", vstr(x.verdict)}, {"abs_error", num(err)}, {"agreement", num(ag)}});
  }
  auto& res = b.results();
  res["functions"] = b.config().fixtures.size();
  res["worst_abs_error"] = num(worst_err);
  res["worst_agreement"] = num(worst_agree);
  res["worst_closed_form_error"] = num(worst_closed);
  res["check_tol"] = tol;
  res["agreement_tol"] = agree;
  res["per_function"] = std::move(verdicts);
  b.tag("worst_abs_error", Oracle::Quadrature);
  b.tag("worst_agreement", Oracle::Quadrature);
  b.tag("worst_closed_form_error", Oracle::ClosedForm);
}

void vitali(Builder& b) {
  const double tol = b.param("l1_tol");
  b.columns({{"fixture", std::nullopt},
             {"n", Oracle::ClosedForm},
             {"l1", Oracle::Quadrature},
             {"l1_reference", Oracle::ClosedForm},
             {"abs_error", Oracle::Quadrature}});
  ojson out = ojson::array();
  for (const auto& id : b.config().fixtures) {
    const auto& s = b.registry().payload<SequenceFixture>(id);
    VitaliOptions o;
    o.finite_sets = {s.window};
    o.eac.probes = s.probes;
    o.eac.quadrature = b.config().quadrature();
    o.report_upto = b.n_max();
    const auto rep = vitali_audit(s.fn, s.ms, b.cs(), o);
    auto& se = b.series("l1_" + id, "n");
    double worst = 0;
    for (std::size_t i = 0; i < rep.l1.size(); ++i) {
      const long n = static_cast<long>(i) + 1;
      const double ref = s.l1(n);
      worst = std::max(worst, std::abs(rep.l1[i] - ref));
      se.points.emplace_back(static_cast<double>(n), rep.l1[i]);
      b.row({id, n, rep.l1[i], ref, std::abs(rep.l1[i] - ref)});
    }
    b.check(worst <= tol, "l1-identity:" + id);
    b.check(rep.hypotheses == s.hypotheses, "hypotheses:" + id);
    b.check(rep.consistent(), "vitali-conclusion:" + id);
    if (s.hypotheses) b.check(rep.l1_verdict == Verdict::True, "l1-convergence:" + id);
    // Without the hypotheses the failing clause must be the small-sets one.
    if (!s.hypotheses) b.check(rep.eac.failing_clause() == "small-sets", "small-sets-detected:" + id);
    out.push_back({{"fixture", id},
                   {"in_measure", vstr(rep.in_measure)},
                   {"eac_small_sets", vstr(rep.eac.small_sets)},
                   {"eac_tails", vstr(rep.eac.tails)},
                   {"eac_failing_clause", rep.eac.failing_clause()},
                   {"hypotheses", rep.hypotheses},
                   {"l1_verdict", vstr(rep.l1_verdict)},
                   {"worst_l1_error", num(worst)}});
  }
  b.results()["sequences"] = std::move(out);
  b.results()["l1_tol"] = tol;
  b.tag("worst_l1_error", Oracle::ClosedForm);
}

void jensen(Builder& b) {
  const long triples = b.iparam("triples");
  const double gap_tol = b.param("gap_tol");
  if (triples < 0) throw SchemaError("/params/triples", "must be nonnegative");
  const MeasureSpace leb = MeasureSpace::lebesgue();
  const Interval c = Interval::closed(0, 1);
  JensenOptions jo;
  jo.quadrature = b.config().quadrature();

  b.columns({{"triple", Oracle::ClosedForm},
             {"phi", std::nullopt},
             {"weight", std::nullopt},
             {"weight_mass", Oracle::ClosedForm},
             {"min_gap", Oracle::Quadrature},
             {"reference", Oracle::ClosedForm}});
  const auto closed = jensen_gap(ConvexPhi::square(), [](double) { return 1.0; },
                                 scalar_field([](double t) { return t; }), leb, c, jo);
  b.row({0L, "square", "one", 1.0, closed.gap.value(0), 1.0 / 12});
  b.check(std::abs(closed.gap.value(0) - 1.0 / 12) <= gap_tol, "closed-form-gap");

  std::mt19937_64 rng(b.config().seed);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), unit(0.05, 1.0);
  const std::vector<std::string> phis{"square", "power-3", "power-4", "exp"};
  const std::vector<std::string> weights{"linear", "constant", "bump"};
  double worst = kInf;
  long negative = 0;
  auto& se = b.series("min_gap", "triple");
  for (long k = 1; k <= triples; ++k) {
    const auto& phi = phis[static_cast<std::size_t>(k) % phis.size()];
    const auto& wname = weights[static_cast<std::size_t>(k / 4) % weights.size()];
    const double a = coef(rng), bb = coef(rng), freq = 4 * unit(rng), mass = unit(rng);
    ScalarField h;
    if (wname == "linear")
      h = [mass](double t) { return 2 * mass * t; };
    else if (wname == "constant")
      h = [mass](double) { return mass; };
    else
      h = [mass](double t) { return 6 * mass * t * (1 - t); };
    const Field f = [a, bb, freq](double t) -> Eigen::ArrayXd {
      Eigen::ArrayXd v(2);
      v << a * std::sin(freq * t) + bb * t, bb - a * t * t;
      return v;
    };
    const auto r = jensen_gap(phi_by_name(phi), h, f, leb, c, jo);
    const double g = r.gap.values().minCoeff();
    worst = std::min(worst, g);
    if (g < -gap_tol) ++negative;
    se.points.emplace_back(static_cast<double>(k), g);
    b.row({k, phi, wname, r.weight_mass, g, std::string()});
  }
  b.check(negative == 0, "jensen-gap");
  auto& res = b.results();
  res["triples"] = triples;
  res["closed_form_gap"] = num(closed.gap.value(0));
  res["closed_form_reference"] = 1.0 / 12;
  res["worst_gap"] = num(worst);
  res["violations"] = negative;
  res["gap_tol"] = gap_tol;
  b.tag("closed_form_gap", Oracle::Quadrature);
  b.tag("closed_form_reference", Oracle::ClosedForm);
  b.tag("worst_gap", Oracle::Quadrature);
}

void ito_isometry(Builder& b) {
  const long paths = b.iparam("paths");
  const long steps = b.iparam("steps");
  const double horizon = b.param("time");
  const double z_max = b.param("z_max");
  const BrownianEnsemble ens(paths, horizon, steps, b.config().seed);

  std::vector<std::pair<std::string, std::function<double(double)>>> fs;
  std::vector<double> breaks;
  std::vector<const FunctionFixture*> fx;
  for (const auto& id : b.config().fixtures) {
    const auto& f = b.registry().payload<FunctionFixture>(id);
    const Field g = f.f;
    fs.emplace_back(id, [g](double t) { return g(t)(0); });
    breaks.insert(breaks.end(), f.breakpoints.begin(), f.breakpoints.end());
    fx.push_back(&f);
  }
  const auto reps = isometry_check(fs, ens, breaks);

  // f = 1 telescopes: the forward sum is B_T path by path.
  const Element one_int = ito_integrate(Integrand::deterministic("one", [](double) { return 1.0; }), ens);
  const Element bt = ens.at(ens.steps());
  const double telescoping = (one_int.values() - bt.values()).abs().maxCoeff();
  b.check(telescoping == 0.0, "telescoping");

  b.columns({{"integrand", std::nullopt},
             {"second_moment", Oracle::MonteCarlo},
             {"expected", Oracle::Quadrature},
             {"closed_form", Oracle::ClosedForm},
             {"expected_discrete", Oracle::ClosedForm},
             {"standard_error", Oracle::MonteCarlo},
             {"z", Oracle::MonteCarlo},
             {"mean", Oracle::MonteCarlo},
             {"mean_standard_error", Oracle::MonteCarlo}});
  auto& se = b.series("z", "integrand_index");
  ojson out = ojson::array();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    b.row({r.integrand, r.second_moment, r.expected, opt_cell(fx[i]->energy), r.expected_discrete, r.standard_error, r.z,
           r.mean, r.mean_standard_error});
    se.points.emplace_back(static_cast<double>(i), r.z);
    b.check(r.z <= z_max, "isometry:" + r.integrand);
    if (fx[i]->energy) b.check(std::abs(r.expected - *fx[i]->energy) <= 1e-8, "energy-quadrature:" + r.integrand);
    out.push_back({{"integrand", r.integrand}, {"z", num(r.z)}, {"passed", r.z <= z_max}});
  }
  auto& res = b.results();
  res["paths"] = paths;
  res["steps"] = steps;
  res["time"] = horizon;
  res["gaussian_generator"] = "std::normal_distribution over std::mt19937_64, one stream per (seed, path index)";
  res["telescoping_max_abs_difference"] = num(telescoping);
  res["integrands"] = std::move(out);
  b.tag("telescoping_max_abs_difference", Oracle::MonteCarlo);
}

void orlicz(Builder& b) {
  b.columns({{"fixture", std::nullopt}, {"phi", std::nullopt}, {"alpha", Oracle::ClosedForm}, {"rho", Oracle::Quadrature}});
  ojson out = ojson::array();
  for (const auto& id : b.config().fixtures) {
    const auto& o = b.registry().payload<OrliczFixture>(id);
    const Modular m{phi_by_name(o.phi), o.function.ms, b.cs(), b.config().quadrature()};
    const auto rep = orlicz_membership(m, o.function.f, o.function.breakpoints);
    auto& se = b.series("rho_" + id, "alpha");
    for (std::size_t i = 0; i < rep.alphas.size(); ++i) {
      const double v = rep.values[i].is_infinite(0) ? kInf : rep.values[i].value(0);
      b.row({id, o.phi, rep.alphas[i], v});
      se.points.emplace_back(rep.alphas[i], v);
    }
    b.check(rep.cls == o.expected, "orlicz-class:" + id);
    out.push_back({{"fixture", id}, {"phi", o.phi}, {"class", to_string(rep.cls)}, {"expected", to_string(o.expected)},
                   {"vanishing", vstr(rep.vanishing)}});
  }
  b.results()["memberships"] = std::move(out);
}

}  // namespace

Report run_experiment(const ExperimentConfig& c, const FixtureRegistry& reg) {
  Builder b(c, reg);
  const std::string& id = c.experiment;
  if (id == "moment-tail")
    moment_tail(b);
  else if (id == "moment-modular")
    moment_modular(b);
  else if (id == "moment-uniform")
    moment_uniform(b);
  else if (id == "axiom-audit")
    axiom_audit_experiment(b);
  else if (id == "integral-suite")
    integral_suite(b);
  else if (id == "vitali")
    vitali(b);
  else if (id == "jensen")
    jensen(b);
  else if (id == "ito-isometry")
    ito_isometry(b);
  else if (id == "orlicz-membership")
    orlicz(b);
  else
    throw SchemaError("/experiment", "unknown experiment id '" + id + "'");
  return b.finish();
}

// --- output ------------------------------------------------------------------------

namespace {

void write_atomically(const std::filesystem::path& target, const std::string& content) {
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PreconditionError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw PreconditionError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace

OutputPaths write_report(const Report& r, const ExperimentConfig& c) {
  std::filesystem::create_directories(c.out_dir);
  OutputPaths p{c.out_dir / (c.stem + ".json"), c.out_dir / (c.stem + ".csv")};
  write_atomically(p.csv, r.table.str());
  write_atomically(p.json, r.json.dump(2) + "\n");
  return p;
}

void emit_plot_data(const json& report, std::ostream& os) {
  if (!report.is_object()) throw ParseError("report: expected a JSON object");
  os << "series,x,y\n";
  if (!report.contains("series")) return;
  const auto& series = report["series"];
  if (!series.is_array()) throw ParseError("report: 'series' must be an array");
  auto value = [](const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
      if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ParseError("report: series values must be numbers");
  };
  for (const auto& s : series) {
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string() || !s.contains("points") || !s["points"].is_array())
      throw ParseError("report: each series needs a string 'name' and a 'points' array");
    const std::string name = csv_escape(s["name"].get<std::string>());
    for (const auto& pt : s["points"]) {
      if (!pt.is_array() || pt.size() != 2) throw ParseError("report: each point must be an [x, y] pair");
      os << name << ',' << format_number(value(pt[0])) << ',' << format_number(value(pt[1])) << '\n';
    }
  }
}

void emit_plot_data(const std::filesystem::path& report_file, std::ostream& os) {
  std::ifstream in(report_file);
  if (!in) throw ParseError("cannot open report '" + report_file.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what());
  }
  emit_plot_data(j, os);
}

}  // namespace rieszlab
