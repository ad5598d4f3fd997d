#pragma once

// Fixture registry, experiment configuration, the experiment runner and its
// report/table outputs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rieszlab/axiom_audit.hpp"
#include "rieszlab/operators.hpp"
#include "rieszlab/stochastic.hpp"

namespace rieszlab {

// --- fixtures -----------------------------------------------------------------

/// A function on a measure space, compactly supported in `support`.
struct FunctionFixture {
  Field f;
  std::vector<double> breakpoints;
  Interval support;
  MeasureSpace ms = MeasureSpace::lebesgue();
  /// Closed-form integral over the support, when known.
  std::optional<Eigen::ArrayXd> integral;
  /// int |f|^2 dmu in closed form, when known.
  std::optional<double> energy;
};

/// A sequence of functions with the Vitali verdict it should produce.
struct SequenceFixture {
  FieldSequence fn;
  MeasureSpace ms = MeasureSpace::lebesgue();
  /// Finite-measure set where convergence in measure is checked.
  Interval window;
  /// Probe sets A_n with mu(A_n) -> 0 for the equiabsolute-continuity audit.
  std::function<IntervalSet(long)> probes;
  /// int |f_n| in closed form.
  std::function<double(long)> l1;
  /// Whether the Vitali hypotheses hold.
  bool hypotheses = true;
};

/// A function paired with a convex phi and its Orlicz class.
struct OrliczFixture {
  FunctionFixture function;
  std::string phi;
  OrliczClass expected = OrliczClass::Neither;
};

struct Fixture {
  std::string id;
  /// Module the fixture exercises: operators, integral, modular, stochastic, convergence.
  std::string module;
  /// Where the object comes from, in words.
  std::string anchor;
  std::variant<MellinKernel, UrysohnKernel, FunctionFixture, SequenceFixture, OrliczFixture> payload;
};

class FixtureRegistry {
 public:
  void add(Fixture f);
  /// Raises LookupError for an unknown id.
  const Fixture& get(const std::string& id) const;
  bool contains(const std::string& id) const;
  /// Fixtures in registration order, optionally restricted to one module.
  std::vector<const Fixture*> list(const std::string& module = {}) const;
  std::size_t size() const noexcept { return fixtures_.size(); }

  template <typename T>
  const T& payload(const std::string& id) const {
    const auto& f = get(id);
    if (const T* p = std::get_if<T>(&f.payload)) return *p;
    throw LookupError("fixture '" + id + "' does not have the requested type");
  }

 private:
  std::vector<Fixture> fixtures_;
};

/// Kernels, the tent and ramp functions, the 20-function integration suite,
/// the Vitali pair, Orlicz examples and Ito integrands.
const FixtureRegistry& standard_fixtures();

/// Ids of the 20-function integration suite, in order.
const std::vector<std::string>& integration_suite_ids();

/// One line per fixture: id, module, anchor separated by tabs.
void list_fixtures(const FixtureRegistry& reg, std::ostream& os, const std::string& module = {});

/// A convex phi by name: "square", "power-<p>", "exp".
ConvexPhi phi_by_name(const std::string& name);

// --- configuration -------------------------------------------------------------

struct StructureConfig {
  /// ordinary, order, relative-uniform, cesaro, almost, cofinite-filter, density-filter.
  std::string kind = "ordinary";
  std::optional<long> horizon;
  std::optional<double> tol;
  double theta = 0.99;
  long window = 0;
  bool sign_flipped = false;

  Structure<double> build(long default_horizon, double default_tol) const;
};

struct ExperimentConfig {
  std::string experiment;
  /// Module the experiment targets; filled from the experiment when absent.
  std::string module;
  std::vector<std::string> fixtures;
  StructureConfig structure;
  std::optional<long> n_min;
  std::optional<long> n_max;
  std::vector<double> deltas;
  long resolution = 1L << 14;
  PanelRule rule = PanelRule::GaussKronrod;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  std::string stem;
  /// Experiment-specific keys, validated against the experiment's schema.
  nlohmann::json params = nlohmann::json::object();

  QuadratureOptions quadrature() const;
};

/// Experiment ids with their modules, in catalog order.
const std::vector<std::pair<std::string, std::string>>& experiment_catalog();

/// Validates and converts; SchemaError carries a JSON-pointer path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& file);

/// Command-line overrides applied after parsing.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> resolution;
  std::optional<long> horizon;
  std::optional<std::filesystem::path> out_dir;
};
void apply_overrides(ExperimentConfig& c, const ConfigOverrides& o);

// --- reports --------------------------------------------------------------------

enum class Oracle { ClosedForm, Quadrature, MonteCarlo, PaperIdentity };
std::string to_string(Oracle o);

using Cell = std::variant<double, long, std::string>;

struct Column {
  std::string name;
  /// Required for numeric columns.
  std::optional<Oracle> oracle;
};

/// A table with shortest round-trip number formatting (locale independent).
struct CsvTable {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  void write(std::ostream& os) const;
  std::string str() const;
};

/// Formats a double as the shortest string that reads back to the same value.
std::string format_number(double x);

struct Report {
  std::string experiment;
  std::string module;
  nlohmann::ordered_json json;
  CsvTable table;
  /// Failing clause names; empty when every audited invariant passed.
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

Report run_experiment(const ExperimentConfig& c, const FixtureRegistry& reg = standard_fixtures());

struct OutputPaths {
  std::filesystem::path json;
  std::filesystem::path csv;
};

/// Writes <stem>.json and <stem>.csv into the config's out_dir, each through
/// a temporary file and a rename.
OutputPaths write_report(const Report& r, const ExperimentConfig& c);

/// Long-format (series, x, y) CSV of the report's plot series. Raises
/// ParseError for a malformed report.
void emit_plot_data(const nlohmann::json& report, std::ostream& os);
void emit_plot_data(const std::filesystem::path& report_file, std::ostream& os);

}  // namespace rieszlab
