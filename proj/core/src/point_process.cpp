#include "mevdro/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "mevdro/assignment.hpp"
#include "mevdro/csv.hpp"
#include "mevdro/error.hpp"
#include "mevdro/evt.hpp"
#include "mevdro/parallel.hpp"

namespace mevdro::pp {
namespace {

constexpr double kappa(std::size_t /*count*/) { return 1.0; }

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

PointConfiguration::PointConfiguration(std::vector<double> arrivals, RowMatrix marks)
    : arrivals_(std::move(arrivals)), marks_(std::move(marks)) {
  if (arrivals_.empty()) throw ValidationError("PointConfiguration: needs at least one atom");
  if (marks_.rows() != arrivals_.size() || marks_.cols() == 0) {
    throw ValidationError("PointConfiguration: one mark row per arrival required");
  }
  for (std::size_t n = 0; n < arrivals_.size(); ++n) {
    if (!(arrivals_[n] > 0.0) || !std::isfinite(arrivals_[n])) {
      throw ValidationError("PointConfiguration: arrivals must be positive and finite");
    }
    if (n > 0 && !(arrivals_[n] > arrivals_[n - 1])) {
      throw ValidationError("PointConfiguration: arrivals must be strictly increasing");
    }
  }
  for (double y : marks_.data()) {
    if (!(y >= 0.0) || !std::isfinite(y)) {
      throw ValidationError("PointConfiguration: marks must be finite and nonnegative");
    }
  }
}

PointConfiguration PointConfiguration::with_atom(double arrival,
                                                 std::span<const double> mark) const {
  auto arrivals = arrivals_;
  auto marks = marks_;
  arrivals.push_back(arrival);
  marks.append_row(mark);
  return {std::move(arrivals), std::move(marks)};
}

PointConfiguration sample_configuration(Rng& rng, const evt::DependenceModel& model,
                                        std::size_t truncation, std::size_t d,
                                        double early_stop_ratio) {
  if (truncation == 0) throw ValidationError("sample_configuration: truncation must be >= 1");
  model.check_dimension(d);
  const double scale = mark_scale(d);
  std::vector<double> arrivals;
  RowMatrix marks(0, d);
  std::vector<double> w(d);
  std::vector<double> running_max(d, 0.0);
  double a = 0.0;
  for (std::size_t n = 0; n < truncation; ++n) {
    a += standard_exponential(rng);
    if (n > 0 && scale / a < early_stop_ratio * sup_norm(running_max)) break;
    evt::sample_spectral_into(rng, model, w);
    for (std::size_t k = 0; k < d; ++k) {
      w[k] *= scale;
      running_max[k] = std::max(running_max[k], w[k] / a);
    }
    arrivals.push_back(a);
    marks.append_row(w);
  }
  return {std::move(arrivals), std::move(marks)};
}

PointConfiguration sample_marks_on_arrivals(Rng& rng, const evt::DependenceModel& model,
                                            std::span<const double> arrivals, std::size_t d) {
  model.check_dimension(d);
  RowMatrix marks(arrivals.size(), d);
  for (std::size_t n = 0; n < arrivals.size(); ++n) {
    auto row = marks.row(n);
    evt::sample_spectral_into(rng, model, row);
    for (double& y : row) y *= mark_scale(d);
  }
  return {std::vector<double>(arrivals.begin(), arrivals.end()), std::move(marks)};
}

std::vector<PointConfiguration> sample_configurations(std::uint64_t seed,
                                                      const evt::DependenceModel& model,
                                                      std::size_t replications,
                                                      std::size_t truncation, std::size_t d,
                                                      std::size_t threads) {
  model.check_dimension(d);
  std::vector<std::optional<PointConfiguration>> slots(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    Rng rng = make_rng(seed, stream::kConfigurations, r);
    slots[r].emplace(sample_configuration(rng, model, truncation, d));
  });
  std::vector<PointConfiguration> out;
  out.reserve(replications);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<double> max_stable_from_configuration(const PointConfiguration& cfg) {
  std::vector<double> m(cfg.dim(), 0.0);
  for (std::size_t n = 0; n < cfg.size(); ++n) {
    const auto y = cfg.mark(n);
    const double a = cfg.arrival(n);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::max(m[k], y[k] / a);
  }
  return m;
}

RadialSpectral radial_spectral_transform(std::span<const double> x) {
  const double l1 = norm(x, Norm::L1);
  if (!(l1 > 0.0)) throw DomainError("radial_spectral_transform: zero vector");
  RadialSpectral rs;
  rs.radius = 1.0 / l1;
  rs.angle.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) rs.angle[k] = x[k] / l1;
  return rs;
}

std::vector<double> inverse_radial_spectral_transform(const RadialSpectral& rs) {
  if (!(rs.radius > 0.0)) throw DomainError("inverse_radial_spectral_transform: radius <= 0");
  std::vector<double> x(rs.angle.size());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = rs.angle[k] / rs.radius;
  return x;
}

std::vector<double> v_statistic(const PointConfiguration& cfg, std::span<const double> x) {
  if (x.size() != cfg.dim()) throw ValidationError("v_statistic: dimension mismatch");
  for (double v : x) {
    if (!(v > 0.0)) throw DomainError("v_statistic: x must be positive");
  }
  std::vector<double> out(cfg.size());
  for (std::size_t n = 0; n < cfg.size(); ++n) {
    const auto y = cfg.mark(n);
    double m = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, y[k] * x[k]);
    out[n] = m;
  }
  return out;
}

double configuration_distance(const PointConfiguration& a, const PointConfiguration& b,
                              const TransportCostSpec& cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.size() != b.size()) return kInf;
  if (a.dim() != b.dim()) throw ValidationError("configuration_distance: dimension mismatch");
  const std::size_t n = a.size();
  if (cost.arrival_policy == ArrivalPolicy::Fixed) {
    // Arrivals are strictly increasing, so equal multisets force the matching
    // atom n <-> atom n.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (a.arrival(i) != b.arrival(i)) return kInf;
      total += distance(a.mark(i), b.mark(i), cost.mark_norm);
    }
    return kappa(n) * total;
  }
  RowMatrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c(i, j) = std::abs(a.arrival(i) - b.arrival(j)) + distance(a.mark(i), b.mark(j), cost.mark_norm);
    }
  }
  return kappa(n) * solve_assignment(c).cost;
}

double truncation_tail_bound(const PointConfiguration& cfg) {
  const auto m = max_stable_from_configuration(cfg);
  const double last = cfg.arrival(cfg.size() - 1);
  const double scale = mark_scale(cfg.dim());
  double bound = 0.0;
  for (double mk : m) {
    if (mk <= 0.0) return std::numeric_limits<double>::infinity();
    bound += std::max(0.0, scale / mk - last);
  }
  return bound;
}

void write_configurations_csv(std::ostream& out, std::span<const PointConfiguration> cfgs) {
  const std::size_t d = cfgs.empty() ? 0 : cfgs.front().dim();
  out << "replication,n,a";
  for (std::size_t k = 0; k < d; ++k) out << ",y_" << (k + 1);
  out << '\n';
  for (std::size_t r = 0; r < cfgs.size(); ++r) {
    const auto& cfg = cfgs[r];
    if (cfg.dim() != d) throw ValidationError("write_configurations_csv: mixed dimensions");
    for (std::size_t n = 0; n < cfg.size(); ++n) {
      out << r << ',' << (n + 1) << ',' << csv::format_double(cfg.arrival(n));
      for (double y : cfg.mark(n)) out << ',' << csv::format_double(y);
      out << '\n';
    }
  }
}

std::vector<PointConfiguration> read_configurations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("configurations csv: missing header");
  const auto header = csv::split_line(line);
  if (header.size() < 4 || header[0] != "replication" || header[1] != "n" || header[2] != "a") {
    throw ValidationError("configurations csv: header must be replication,n,a,y_1,...,y_d");
  }
  const std::size_t d = header.size() - 3;
  for (std::size_t k = 0; k < d; ++k) {
    if (header[3 + k] != "y_" + std::to_string(k + 1)) {
      throw ValidationError("configurations csv: bad mark column '" + header[3 + k] + "'");
    }
  }
  std::map<long long, std::pair<std::vector<double>, RowMatrix>> groups;
  std::vector<double> mark(d);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_line(line);
    const std::string ctx = "configurations csv line " + std::to_string(line_no);
    if (f.size() != header.size()) throw ValidationError(ctx + ": wrong field count");
    const double rep = csv::parse_double(f[0], ctx);
    if (rep < 0 || rep != std::floor(rep)) throw ValidationError(ctx + ": bad replication index");
    auto& g = groups[static_cast<long long>(rep)];
    if (g.second.cols() == 0) g.second = RowMatrix(0, d);
    g.first.push_back(csv::parse_double(f[2], ctx));
    for (std::size_t k = 0; k < d; ++k) mark[k] = csv::parse_double(f[3 + k], ctx);
    g.second.append_row(mark);
  }
  std::vector<PointConfiguration> out;
  for (auto& [rep, g] : groups) out.emplace_back(std::move(g.first), std::move(g.second));
  return out;
}

}  // namespace mevdro::pp
