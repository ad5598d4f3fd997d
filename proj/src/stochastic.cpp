#include "rieszlab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

namespace rieszlab {

namespace {

std::mt19937_64 path_generator(std::uint64_t seed, long path) {
  const auto p = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)};
  return std::mt19937_64(seq);
}

// Grid index of the first t_k with t_k >= t (strict when `strict`), snapping
// t to a grid point when it is one up to rounding.
long first_index(const BrownianEnsemble& b, double t, bool strict) {
  const double x = t / b.dt();
  const double r = std::round(x);
  long k;
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)))
    k = static_cast<long>(r) + (strict ? 1 : 0);
  else
    k = static_cast<long>(std::ceil(x));
  return std::clamp(k, 0L, b.steps() + 1);
}

// [start, end) of left-endpoint indices k < K with t_k in `a`.
std::pair<long, long> index_range(const BrownianEnsemble& b, const Interval& a) {
  const long start = std::min(first_index(b, a.lo, a.lo_open), b.steps());
  const long end = std::min(first_index(b, a.hi, !a.hi_open), b.steps());
  return {start, std::max(start, end)};
}

double square(double x) { return x * x; }

}  // namespace

BrownianEnsemble::BrownianEnsemble(long paths, double horizon, long steps, std::uint64_t seed)
    : paths_(paths), horizon_(horizon), steps_(steps), seed_(seed) {
  if (paths < 2) throw ParameterError("brownian ensemble: at least two paths are required");
  if (steps < 1) throw ParameterError("brownian ensemble: at least one time step is required");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("brownian ensemble: horizon must be positive");
}

std::vector<double> BrownianEnsemble::times() const {
  std::vector<double> t(static_cast<std::size_t>(steps_ + 1));
  for (long k = 0; k <= steps_; ++k) t[static_cast<std::size_t>(k)] = time(k);
  return t;
}

long BrownianEnsemble::index_at_or_after(double t) const { return first_index(*this, t, false); }

void BrownianEnsemble::increments(long path, std::vector<double>& out) const {
  if (path < 0 || path >= paths_) throw ParameterError("brownian ensemble: path index out of range");
  auto gen = path_generator(seed_, path);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt()));
  out.resize(static_cast<std::size_t>(steps_));
  for (auto& d : out) d = normal(gen);
}

std::vector<double> BrownianEnsemble::path(long p) const {
  std::vector<double> inc;
  increments(p, inc);
  std::vector<double> b(inc.size() + 1, 0.0);
  for (std::size_t k = 0; k < inc.size(); ++k) b[k + 1] = b[k] + inc[k];
  return b;
}

Eigen::MatrixXd BrownianEnsemble::at_indices(const std::vector<long>& ks) const {
  for (long k : ks)
    if (k < 0 || k > steps_) throw ParameterError("brownian ensemble: time index out of range");
  Eigen::MatrixXd out(paths_, static_cast<Index>(ks.size()));
  for (long p = 0; p < paths_; ++p) {
    const auto b = path(p);
    for (std::size_t j = 0; j < ks.size(); ++j) out(p, static_cast<Index>(j)) = b[static_cast<std::size_t>(ks[j])];
  }
  return out;
}

Element BrownianEnsemble::at(long k) const { return Element(Eigen::ArrayXd(at_indices({k}).col(0).array())); }

Eigen::MatrixXd BrownianEnsemble::materialize() const {
  std::vector<long> all(static_cast<std::size_t>(steps_ + 1));
  for (long k = 0; k <= steps_; ++k) all[static_cast<std::size_t>(k)] = k;
  return at_indices(all);
}

void BrownianEnsemble::write_csv(std::ostream& os) const {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.precision(17);
  out << "path";
  for (double t : times()) out << ',' << t;
  out << '\n';
  for (long p = 0; p < paths_; ++p) {
    out << p;
    for (double v : path(p)) out << ',' << v;
    out << '\n';
  }
  os << out.str();
}

PathTable read_path_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    return cells;
  };
  auto number = [](const std::string& s, long row) {
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double v;
    if (!(in >> v) || !(in >> std::ws).eof())
      throw ParseError("path table: bad number '" + s + "' on line " + std::to_string(row));
    return v;
  };
  std::string line;
  if (!std::getline(is, line)) throw ParseError("path table: empty input");
  const auto header = split(line);
  if (header.empty() || header[0] != "path") throw ParseError("path table: header must start with 'path'");
  PathTable t;
  for (std::size_t j = 1; j < header.size(); ++j) t.times.push_back(number(header[j], 1));
  std::vector<std::vector<double>> rows;
  long row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError("path table: line " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells");
    std::vector<double> r;
    for (std::size_t j = 1; j < cells.size(); ++j) r.push_back(number(cells[j], row));
    rows.push_back(std::move(r));
  }
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.times.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) t.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return t;
}

Integrand Integrand::deterministic(std::string name, std::function<double(double)> f) {
  Integrand g;
  g.name = std::move(name);
  g.of_time = std::move(f);
  g.value = [f = g.of_time](long, double t, std::span<const double>) { return f(t); };
  return g;
}

Integrand Integrand::adapted(std::string name, std::function<double(long, double, std::span<const double>)> f) {
  Integrand g;
  g.name = std::move(name);
  g.value = std::move(f);
  return g;
}

std::vector<Element> ito_integrate(const std::vector<Integrand>& fs, const BrownianEnsemble& b) {
  for (const auto& f : fs)
    if (f.lookahead > 0)
      throw PreconditionError("ito integral: integrand '" + f.name + "' reads " + std::to_string(f.lookahead) +
                              " steps ahead and is not adapted");
  const long m = b.paths(), k_max = b.steps();
  const auto times = b.times();
  std::vector<Eigen::ArrayXd> out(fs.size(), Eigen::ArrayXd::Zero(m));
  std::vector<std::vector<double>> tables(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs[i].of_time)
      for (long k = 0; k < k_max; ++k) tables[i].push_back(fs[i].of_time(times[static_cast<std::size_t>(k)]));
  std::vector<double> inc, hist(static_cast<std::size_t>(k_max + 1));
  std::vector<double> acc(fs.size());
  for (long p = 0; p < m; ++p) {
    b.increments(p, inc);
    hist[0] = 0.0;
    std::fill(acc.begin(), acc.end(), 0.0);
    for (long k = 0; k < k_max; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const std::span<const double> seen(hist.data(), uk + 1);
      for (std::size_t i = 0; i < fs.size(); ++i)
        acc[i] += (tables[i].empty() ? fs[i].value(k, times[uk], seen) : tables[i][uk]) * inc[uk];
      hist[uk + 1] = hist[uk] + inc[uk];
    }
    for (std::size_t i = 0; i < fs.size(); ++i) out[i](p) = acc[i];
  }
  std::vector<Element> res;
  for (auto& v : out) res.emplace_back(std::move(v));
  return res;
}

Element ito_integrate(const Integrand& f, const BrownianEnsemble& b) { return ito_integrate(std::vector{f}, b).front(); }

VectorMeasure increment_measure(const BrownianEnsemble& b, const std::vector<double>& cut_points) {
  std::vector<long> ks{0, b.steps()};
  for (double c : cut_points)
    for (bool strict : {false, true}) ks.push_back(std::min(first_index(b, c, strict), b.steps()));
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  auto table = std::make_shared<const Eigen::MatrixXd>(b.at_indices(ks));
  std::map<long, Index> column;
  for (std::size_t j = 0; j < ks.size(); ++j) column[ks[j]] = static_cast<Index>(j);
  return [b, table, column](const Interval& a) -> Eigen::ArrayXd {
    const auto [start, end] = index_range(b, a);
    if (end <= start) return Eigen::ArrayXd::Zero(b.paths());
    auto col = [&](long k) -> Eigen::ArrayXd {
      const auto it = column.find(k);
      if (it != column.end()) return table->col(it->second).array();
      return b.at(k).values();
    };
    return col(end) - col(start);
  };
}

Element ito_integrate(const SimpleFunction& f, const BrownianEnsemble& b) {
  if (f.dim() != 1) throw DimensionError("ito integral: step integrands must be real valued");
  return integrate_simple_against(f, increment_measure(b, f.breakpoints()));
}

double sample_mean(const Element& x) {
  if (x.size() == 0) throw DimensionError("sample mean of an empty ensemble");
  return x.values().mean();
}

double sample_variance(const Element& x) {
  if (x.size() < 2) throw DimensionError("sample variance needs two samples");
  const double m = sample_mean(x);
  return (x.values() - m).square().sum() / static_cast<double>(x.size() - 1);
}

double sample_correlation(const Element& x, const Element& y) {
  Element::check_same_size(x, y);
  const Eigen::ArrayXd a = x.values() - sample_mean(x), c = y.values() - sample_mean(y);
  const double den = std::sqrt(a.square().sum() * c.square().sum());
  if (den == 0.0) throw DomainError("sample correlation of a constant ensemble");
  return (a * c).sum() / den;
}

std::vector<IsometryReport> isometry_check(const std::vector<std::pair<std::string, std::function<double(double)>>>& fs,
                                           const BrownianEnsemble& b, const std::vector<double>& breakpoints) {
  std::vector<Integrand> gs;
  for (const auto& [name, f] : fs) gs.push_back(Integrand::deterministic(name, f));
  const auto values = ito_integrate(gs, b);
  const double m = static_cast<double>(b.paths());
  std::vector<IsometryReport> out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& f = fs[i].second;
    IsometryReport r;
    r.integrand = fs[i].first;
    const Eigen::ArrayXd sq = values[i].values().square();
    r.second_moment = sq.mean();
    r.standard_error = std::sqrt(sample_variance(Element(sq)) / m);
    r.mean = sample_mean(values[i]);
    r.mean_standard_error = std::sqrt(sample_variance(values[i]) / m);
    QuadratureOptions q;
    q.breakpoints = breakpoints;
    r.expected = integrate_scalar(MeasureSpace::lebesgue(), [&f](double t) { return square(f(t)); },
                                  Interval::closed(0.0, b.horizon()), q);
    for (long k = 0; k < b.steps(); ++k) r.expected_discrete += square(f(b.time(k))) * b.dt();
    const double diff = std::abs(r.second_moment - r.expected);
    r.z = diff == 0.0 ? 0.0 : (r.standard_error > 0.0 ? diff / r.standard_error : kInf);
    out.push_back(r);
  }
  return out;
}

IsometryReport isometry_check(const std::string& name, const std::function<double(double)>& f,
                              const BrownianEnsemble& b, const std::vector<double>& breakpoints) {
  return isometry_check({{name, f}}, b, breakpoints).front();
}

}  // namespace rieszlab
