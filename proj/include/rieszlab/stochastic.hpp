#pragma once

// Brownian ensembles over a finite sample space and forward-sum stochastic
// integrals realized as lattice elements indexed by path.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rieszlab/integral.hpp"

namespace rieszlab {

/// M sample paths of standard Brownian motion on the uniform grid
/// t_k = k T / K, k = 0..K. Paths are not stored: each one is regenerated on
/// demand from a generator seeded by (seed, path index), so results do not
/// depend on evaluation order. Increments are sqrt(dt) * N(0, 1) drawn with
/// std::normal_distribution over std::mt19937_64.
class BrownianEnsemble {
 public:
  BrownianEnsemble(long paths, double horizon, long steps, std::uint64_t seed);

  long paths() const noexcept { return paths_; }
  long steps() const noexcept { return steps_; }
  double horizon() const noexcept { return horizon_; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
  std::uint64_t seed() const noexcept { return seed_; }
  double time(long k) const { return horizon_ * static_cast<double>(k) / static_cast<double>(steps_); }
  std::vector<double> times() const;
  /// Grid index of the first t_k >= t (K + 1 when t > T).
  long index_at_or_after(double t) const;

  /// The K increments of one path.
  void increments(long path, std::vector<double>& out) const;
  /// B_{t_0}, ..., B_{t_K} of one path; B_0 = 0.
  std::vector<double> path(long p) const;
  /// B at grid index k over all paths.
  Element at(long k) const;
  /// Columns B_{t_k} for each requested k, one row per path.
  Eigen::MatrixXd at_indices(const std::vector<long>& ks) const;
  /// Full table: row = path, column = time index.
  Eigen::MatrixXd materialize() const;

  /// CSV layout: header "path,<t_0>,...,<t_K>", then one row per path.
  void write_csv(std::ostream& os) const;

 private:
  long paths_;
  double horizon_;
  long steps_;
  std::uint64_t seed_;
};

/// Reads a table written by BrownianEnsemble::write_csv; returns times and values.
struct PathTable {
  std::vector<double> times;
  Eigen::MatrixXd values;
};
PathTable read_path_csv(std::istream& is);

/// Integrand value at grid index k, given the path history B_{t_0..t_k}.
struct Integrand {
  std::string name;
  std::function<double(long k, double t, std::span<const double> history)> value;
  /// Declared number of future grid steps the integrand reads; > 0 is not adapted.
  long lookahead = 0;
  /// Set for integrands that depend on time only; tabulated once per grid.
  std::function<double(double)> of_time;

  static Integrand deterministic(std::string name, std::function<double(double)> f);
  static Integrand adapted(std::string name, std::function<double(long, double, std::span<const double>)> f);
};

/// Per-path forward sum sum_k f(t_k) (B_{t_{k+1}} - B_{t_k}). Raises
/// PreconditionError for an integrand that declares lookahead.
Element ito_integrate(const Integrand& f, const BrownianEnsemble& b);

/// Several integrands in one pass over the paths.
std::vector<Element> ito_integrate(const std::vector<Integrand>& fs, const BrownianEnsemble& b);

/// Step integrand as a simple function integrated against the vector measure
/// I -> (B_{end(I)} - B_{start(I)}) over paths, where the interval's grid
/// points act as left endpoints.
Element ito_integrate(const SimpleFunction& f, const BrownianEnsemble& b);

/// The increment measure used above.
VectorMeasure increment_measure(const BrownianEnsemble& b, const std::vector<double>& cut_points);

double sample_mean(const Element& x);
double sample_variance(const Element& x);
double sample_correlation(const Element& x, const Element& y);

struct IsometryReport {
  std::string integrand;
  /// Sample mean of (int f dB)^2.
  double second_moment = 0.0;
  /// int_0^T f^2 dt by quadrature.
  double expected = 0.0;
  /// sum_k f(t_k)^2 dt, the exact expectation of the forward sum.
  double expected_discrete = 0.0;
  double standard_error = 0.0;
  double mean = 0.0;
  double mean_standard_error = 0.0;
  /// |second_moment - expected| / standard_error (0 when both vanish).
  double z = 0.0;
  bool passed() const { return z <= 3.0; }
};

IsometryReport isometry_check(const std::string& name, const std::function<double(double)>& f,
                              const BrownianEnsemble& b, const std::vector<double>& breakpoints = {});

/// Same for several integrands sharing one pass over the paths.
std::vector<IsometryReport> isometry_check(const std::vector<std::pair<std::string, std::function<double(double)>>>& fs,
                                           const BrownianEnsemble& b, const std::vector<double>& breakpoints = {});

}  // namespace rieszlab
