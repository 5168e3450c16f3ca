#include "mevdro/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include "mevdro/csv.hpp"
#include "mevdro/dro.hpp"
#include "mevdro/error.hpp"
#include "mevdro/evt.hpp"

namespace mevdro::experiments {

evt::DependenceModel MixtureSpec::model() const {
  if (!(high_probability >= 0.0 && high_probability <= 1.0)) {
    throw ValidationError("mixture spec: probability must lie in [0, 1]");
  }
  return evt::DependenceModel::mixture({high_probability, 1.0 - high_probability}, {high, low});
}

MixtureSpec sl_mixture_spec() { return {}; }

std::vector<double> asl_mixture_shares(std::uint64_t seed, std::size_t d) {
  Rng rng = make_rng(seed, stream::kModelPreset);
  std::vector<double> shares(d);
  for (double& s : shares) s = uniform_open(rng);
  return shares;
}

MixtureSpec asl_mixture_spec(std::uint64_t seed, std::size_t d) {
  const auto shares = asl_mixture_shares(seed, d);
  return {evt::make_singleton_plus_full_asl(shares, 0.1),
          evt::make_singleton_plus_full_asl(shares, 0.9), 0.1};
}

LabeledSamples gen_mixture_dataset(Rng& rng, const MixtureSpec& spec, std::size_t n,
                                   std::size_t d) {
  LabeledSamples out;
  out.samples = evt::sample_max_stable(rng, spec.model(), n, d, out.labels);
  return out;
}

ReturnsTable industry_average(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("returns csv: missing header");
  const auto header = csv::split_line(line);
  auto find = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ValidationError(std::string("returns csv: header lacks column '") + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_date = find("date");
  const std::size_t c_company = find("company");
  const std::size_t c_industry = find("industry");
  const std::size_t c_return = find("return");

  struct Record {
    std::string date;
    std::string company;
    double value;
  };
  std::vector<Record> records;
  std::map<std::string, std::set<std::string>> labels;
  ReturnsTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_line(line);
    const std::string ctx = "returns csv line " + std::to_string(line_no);
    if (f.size() != header.size()) throw ValidationError(ctx + ": wrong field count");
    if (f[c_company].empty()) throw ValidationError(ctx + ": empty company");
    auto& company_labels = labels[f[c_company]];
    if (!f[c_industry].empty()) company_labels.insert(f[c_industry]);
    if (f[c_return].empty()) {
      ++table.dropped_observations;
      continue;
    }
    records.push_back({f[c_date], f[c_company], csv::parse_double(f[c_return], ctx)});
  }

  std::vector<std::string> unlabeled;
  std::vector<std::string> ambiguous;
  std::map<std::string, std::string> industry_of;
  for (const auto& [company, set] : labels) {
    if (set.empty()) unlabeled.push_back(company);
    if (set.size() > 1) ambiguous.push_back(company);
    if (set.size() == 1) industry_of[company] = *set.begin();
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  if (!unlabeled.empty()) {
    throw ValidationError("returns csv: companies without an industry label: " + join(unlabeled));
  }
  if (!ambiguous.empty()) {
    throw ValidationError("returns csv: companies with more than one industry label: " +
                          join(ambiguous));
  }

  std::set<std::string> industries;
  for (const auto& [_, ind] : industry_of) industries.insert(ind);
  table.columns.assign(industries.begin(), industries.end());
  std::map<std::string, std::size_t> column_of;
  for (std::size_t k = 0; k < table.columns.size(); ++k) column_of[table.columns[k]] = k;

  // date -> per-industry (sum, count)
  std::map<std::string, std::vector<std::pair<double, std::size_t>>> by_date;
  for (const auto& r : records) {
    auto& cells = by_date[r.date];
    if (cells.empty()) cells.assign(table.columns.size(), {0.0, 0});
    auto& cell = cells[column_of.at(industry_of.at(r.company))];
    cell.first += r.value;
    ++cell.second;
  }
  table.values = RowMatrix(0, table.columns.size());
  std::vector<double> row(table.columns.size());
  for (const auto& [date, cells] : by_date) {
    bool complete = true;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (cells[k].second == 0) {
        complete = false;
        break;
      }
      row[k] = cells[k].first / static_cast<double>(cells[k].second);
    }
    if (!complete) {
      ++table.dropped_rows;
      continue;
    }
    table.periods.push_back(date);
    table.values.append_row(row);
  }
  if (table.values.rows() == 0) throw ValidationError("returns csv: no complete periods");
  return table;
}

void write_returns_table(std::ostream& out, const ReturnsTable& table) {
  out << "date";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < table.values.rows(); ++i) {
    out << table.periods[i];
    for (double v : table.values.row(i)) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

RowMatrix block_maxima(const RowMatrix& values, std::size_t block) {
  if (block == 0) throw ValidationError("block_maxima: block length must be >= 1");
  if (block > values.rows()) {
    throw ValidationError("block_maxima: block length " + std::to_string(block) +
                          " exceeds the " + std::to_string(values.rows()) + " available rows");
  }
  const std::size_t blocks = values.rows() / block;
  RowMatrix out(blocks, values.cols());
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t k = 0; k < values.cols(); ++k) {
      double m = values(b * block, k);
      for (std::size_t r = 1; r < block; ++r) m = std::max(m, values(b * block + r, k));
      out(b, k) = m;
    }
  }
  return out;
}

std::size_t parse_block(std::string_view text) {
  if (text == "weekly") return kWeeklyBlock;
  if (text == "annual") return kAnnualBlock;
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || v == 0) {
    throw ValidationError("block must be weekly, annual or a positive integer, got '" +
                          std::string(text) + "'");
  }
  return v;
}

RowMatrix frechet_rank_transform(const RowMatrix& values) {
  const std::size_t n = values.rows();
  RowMatrix out(n, values.cols());
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < values.cols(); ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values(a, k) < values(b, k); });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && values(order[j + 1], k) == values(order[i], k)) ++j;
      const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average
      const double u = rank / static_cast<double>(n + 1);
      for (std::size_t t = i; t <= j; ++t) out(order[t], k) = -1.0 / std::log(u);
      i = j + 1;
    }
  }
  return out;
}

CvarTarget cvar_l1_target(const RowMatrix& samples, double alpha_level) {
  if (!(alpha_level > 0.0 && alpha_level <= 1.0)) {
    throw ValidationError("cvar target: alpha level must lie in (0, 1]");
  }
  if (samples.rows() == 0) throw ValidationError("cvar target: no samples");
  std::vector<double> norms(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) norms[i] = norm(samples.row(i), Norm::L1);
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(alpha_level * static_cast<double>(sorted.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  CvarTarget t;
  t.threshold = sorted[rank - 1];
  double sum = 0.0;
  for (double v : norms) {
    if (v <= t.threshold) {
      sum += v;
      ++t.count;
    }
  }
  t.value = sum / static_cast<double>(t.count);
  t.flagged = t.count < kMinTargetCount;
  return t;
}

double TruncatedL1Loss::operator()(std::span<const double> x) const {
  const double l1 = norm(x, Norm::L1);
  return l1 <= threshold ? l1 / normalizer : 0.0;
}

TruncatedL1Loss TruncatedL1Loss::from_samples(const RowMatrix& samples, double alpha_level) {
  const CvarTarget t = cvar_l1_target(samples, alpha_level);
  return {t.threshold,
          static_cast<double>(t.count) / static_cast<double>(samples.rows())};
}

double extremal_coefficient(const RowMatrix& samples) {
  if (samples.rows() == 0) throw ValidationError("extremal coefficient: no samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const double m = norm(samples.row(i), Norm::Linf);
    if (!(m > 0.0)) throw DomainError("extremal coefficient: samples must be positive");
    sum += 1.0 / m;
  }
  return static_cast<double>(samples.rows()) / sum;
}

evt::DependenceModel fit_symmetric_logistic(const RowMatrix& samples) {
  const std::size_t d = samples.cols();
  if (d < 2) return evt::DependenceModel::symmetric_logistic(1.0);
  const double theta = extremal_coefficient(samples);
  const double alpha = std::log(std::max(theta, 1.0)) / std::log(static_cast<double>(d));
  return evt::DependenceModel::symmetric_logistic(std::clamp(alpha, kMinFittedAlpha, 1.0));
}

evt::DependenceModel fit_asl_common_alpha(const RowMatrix& samples,
                                          const std::vector<double>& shares) {
  if (shares.size() != samples.cols()) throw ValidationError("ASL fit: shares size mismatch");
  const double theta = extremal_coefficient(samples);
  const std::vector<double> ones(samples.cols(), 1.0);
  auto coefficient = [&](double alpha) {
    return evt::exponent(ones, evt::make_singleton_plus_full_asl(shares, alpha));
  };
  double lo = kMinFittedAlpha;
  double hi = 1.0;
  if (theta <= coefficient(lo)) return evt::make_singleton_plus_full_asl(shares, lo);
  if (theta >= coefficient(hi)) return evt::make_singleton_plus_full_asl(shares, hi);
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (coefficient(mid) < theta ? lo : hi) = mid;
  }
  return evt::make_singleton_plus_full_asl(shares, 0.5 * (lo + hi));
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) {
    throw ValidationError("geometric grid: need 0 < lo <= hi and count >= 1");
  }
  if (count == 1) return {lo};
  std::vector<double> g(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

std::string to_string(SweepTarget target) {
  return target == SweepTarget::CvarL1 ? "cvar-l1" : "cdf";
}

SweepTarget parse_sweep_target(std::string_view name) {
  if (name == "cvar-l1") return SweepTarget::CvarL1;
  if (name == "cdf") return SweepTarget::Cdf;
  throw ValidationError("unknown sweep target '" + std::string(name) + "' (expected cvar-l1 or cdf)");
}

namespace {

std::vector<double> cdf_point(const SweepConfig& config, std::size_t d) {
  if (config.cdf_point.empty()) return std::vector<double>(d, 1.0);
  if (config.cdf_point.size() != d) throw ValidationError("sweep: cdf point has the wrong dimension");
  for (double v : config.cdf_point) {
    if (!(v > 0.0)) throw ValidationError("sweep: cdf point must be positive");
  }
  return config.cdf_point;
}

int nesting_rank(adversary::Mode m) {
  switch (m) {
    case adversary::Mode::EvtConstrainedUnitMargins: return 0;
    case adversary::Mode::EvtConstrained: return 1;
    case adversary::Mode::Unconstrained: return 2;
  }
  return 0;
}

void check_config(const SweepConfig& config) {
  if (config.deltas.empty()) throw ValidationError("sweep: empty delta grid");
  for (double d : config.deltas) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("sweep: deltas must be finite and >= 0");
  }
  if (config.modes.empty()) throw ValidationError("sweep: no modes");
  std::set<adversary::Mode> seen(config.modes.begin(), config.modes.end());
  if (seen.size() != config.modes.size()) throw ValidationError("sweep: repeated mode");
}

}  // namespace

double true_risk(const TrueRiskSource& source, const SweepConfig& config, std::size_t d) {
  if (config.target == SweepTarget::Cdf) {
    const auto x = cdf_point(config, d);
    std::vector<double> z(d);
    for (std::size_t k = 0; k < d; ++k) z[k] = 1.0 / x[k];
    if (source.model) return evt::cdf(z, *source.model);
    if (source.held_out.rows() == 0) throw ValidationError("true risk: no source");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < source.held_out.rows(); ++i) {
      bool below = true;
      for (std::size_t k = 0; k < d; ++k) below = below && source.held_out(i, k) <= z[k];
      hits += below;
    }
    return static_cast<double>(hits) / static_cast<double>(source.held_out.rows());
  }
  if (source.model) {
    Rng rng = make_rng(source.seed, stream::kTruth);
    return cvar_l1_target(evt::sample_max_stable(rng, *source.model, source.samples, d),
                          config.alpha_level)
        .value;
  }
  if (source.held_out.rows() == 0) throw ValidationError("true risk: no source");
  if (source.held_out.cols() != d) throw ValidationError("true risk: held-out dimension mismatch");
  return cvar_l1_target(source.held_out, config.alpha_level).value;
}

std::vector<RiskSweepRecord> error_vs_delta_sweep(const RowMatrix& data,
                                                  const evt::DependenceModel& base_model,
                                                  const TrueRiskSource& truth,
                                                  const SweepConfig& config) {
  check_config(config);
  const std::size_t d = data.cols();
  if (d == 0 || data.rows() == 0) throw ValidationError("sweep: empty data");
  base_model.check_dimension(d);
  std::vector<double> deltas = config.deltas;
  std::sort(deltas.begin(), deltas.end());
  const double truth_value = true_risk(truth, config, d);

  std::vector<RiskSweepRecord> records;
  auto push = [&](double delta, adversary::Mode mode, double robust, std::size_t reps,
                  bool converged) {
    records.push_back({delta, adversary::to_string(mode), robust, truth_value,
                       std::abs(robust - truth_value), config.seed, reps, converged});
  };

  if (config.target == SweepTarget::Cdf) {
    if (config.modes.size() != 1 || config.modes.front() != adversary::Mode::EvtConstrained) {
      throw ValidationError("sweep: the cdf target supports mode evt only");
    }
    const auto x = cdf_point(config, d);
    const auto cfgs = pp::sample_configurations(config.seed, base_model, config.replications,
                                                config.train.truncation, d,
                                                config.train.threads);
    for (double delta : deltas) {
      const auto r = dro::robust_cdf(cfgs, x, delta);
      push(delta, adversary::Mode::EvtConstrained, r.robust_value, config.replications,
           r.converged);
    }
    return records;
  }

  const TruncatedL1Loss loss = TruncatedL1Loss::from_samples(data, config.alpha_level);
  std::vector<adversary::Mode> order = config.modes;
  std::sort(order.begin(), order.end(),
            [](auto a, auto b) { return nesting_rank(a) < nesting_rank(b); });
  std::map<adversary::Mode, adversary::AdversaryFamily> previous;
  for (double delta : deltas) {
    std::optional<adversary::AdversaryFamily> smaller;
    for (adversary::Mode mode : order) {
      adversary::TrainConfig train = config.train;
      train.dim = d;
      train.delta = delta;
      train.seed = config.seed;
      std::vector<adversary::AdversaryFamily> warm;
      if (const auto it = previous.find(mode); it != previous.end()) warm.push_back(it->second);
      if (smaller) warm.push_back(*smaller);
      const auto result = adversary::run_dro_training(base_model, loss, mode, train, warm);
      push(delta, mode, result.risk, train.samples, result.converged);
      previous.insert_or_assign(mode, result.family);
      smaller = result.family;
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    const auto ma = adversary::parse_mode(a.mode);
    const auto mb = adversary::parse_mode(b.mode);
    if (ma != mb) return static_cast<int>(ma) < static_cast<int>(mb);
    return a.delta < b.delta;
  });
  return records;
}

void write_sweep_csv(std::ostream& out, std::span<const RiskSweepRecord> records) {
  out << "delta,mode,robust_risk,true_risk,error,seed,replications\n";
  for (const auto& r : records) {
    out << csv::format_double(r.delta) << ',' << r.mode << ',' << csv::format_double(r.robust_risk)
        << ',' << csv::format_double(r.true_risk) << ',' << csv::format_double(r.error) << ','
        << r.seed << ',' << r.replications << '\n';
  }
}

}  // namespace mevdro::experiments
