#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mevdro/adversary.hpp"
#include "mevdro/csv.hpp"
#include "mevdro/dependence.hpp"
#include "mevdro/dro.hpp"
#include "mevdro/error.hpp"
#include "mevdro/evt.hpp"
#include "mevdro/experiments.hpp"
#include "mevdro/parallel.hpp"
#include "mevdro/point_process.hpp"
#include "mevdro/random.hpp"
#include "mevdro/rare_set.hpp"

namespace mevdro::cli {
namespace {

using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  return in;
}

json parse_json(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(context + ": invalid JSON: " + e.what());
  }
}

/// Inline JSON when the text starts with '{', otherwise a file path.
json json_argument(const std::string& text, const std::string& context) {
  if (!text.empty() && text.front() == '{') return parse_json(text, context);
  return parse_json(read_text(text), context + " '" + text + "'");
}

/// `path` or stdout for "" and "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      path_ = "<stdout>";
    } else {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw ValidationError("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw ValidationError("write failed for '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

void write_file(const std::string& path, const std::string& content) {
  Output o(path, std::cout);
  o.stream() << content;
  o.finish();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ValidationError("empty item in list '" + text + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& context) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(csv::parse_double(item, context));
  return out;
}

std::string join_json_array(const json& v, const std::string& key) {
  std::string out;
  for (const auto& e : v) {
    if (!out.empty()) out += ',';
    if (e.is_string()) {
      out += e.get<std::string>();
    } else if (e.is_number()) {
      out += e.is_number_float() ? csv::format_double(e.get<double>()) : e.dump();
    } else {
      throw ValidationError("config: key '" + key + "' must hold numbers or strings");
    }
  }
  return out;
}

template <class T>
void assign_json(T& target, const json& v, const std::string& key) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (v.is_string()) {
      target = v.get<std::string>();
    } else if (v.is_array()) {
      target = join_json_array(v, key);
    } else if (v.is_object()) {
      target = v.dump();
    } else if (v.is_number_integer()) {
      target = v.dump();
    } else {
      throw ValidationError("config: key '" + key + "' has the wrong type");
    }
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ValidationError("config: key '" + key + "' must be a boolean");
    target = v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned()) {
      throw ValidationError("config: key '" + key + "' must be a non-negative integer");
    }
    target = v.get<T>();
  } else {
    if (!v.is_number()) throw ValidationError("config: key '" + key + "' must be a number");
    target = v.get<double>();
  }
}

/// Options of one subcommand, settable from flags or from the JSON file given
/// by --config. Flags win; unknown config keys are rejected.
class ParamSet {
 public:
  explicit ParamSet(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_,
                     "JSON object of parameters keyed by flag name; flags override it");
  }

  template <class T>
  CLI::Option* add(const std::string& name, T& target, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, target, help)->capture_default_str();
    entries_.push_back({name, opt, [&target, name](const json& v) { assign_json(target, v, name); }});
    return opt;
  }

  void add_flag(const std::string& name, bool& target, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + name, target, help);
    entries_.push_back({name, opt, [&target, name](const json& v) { assign_json(target, v, name); }});
  }

  void apply_config() const {
    if (config_path_.empty()) return;
    const std::string context = "config '" + config_path_ + "'";
    const json cfg = parse_json(read_text(config_path_), context);
    if (!cfg.is_object()) throw ValidationError(context + ": expected a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      const Entry* entry = nullptr;
      for (const auto& e : entries_) {
        if (e.name == key) entry = &e;
      }
      if (entry == nullptr) throw ValidationError(context + ": unknown key '" + key + "'");
      if (entry->option->count() == 0) entry->apply(value);
    }
  }

 private:
  struct Entry {
    std::string name;
    CLI::Option* option;
    std::function<void(const json&)> apply;
  };
  CLI::App* app_;
  std::string config_path_;
  std::vector<Entry> entries_;
};

struct ModelChoice {
  evt::DependenceModel model;
  std::vector<double> shares;  // ASL mixture preset only
};

/// sl-mixture, asl-mixture, sl:<alpha>, inline JSON or a JSON file.
ModelChoice resolve_model(const std::string& text, std::uint64_t seed, std::size_t d) {
  if (text == "sl-mixture") return {experiments::sl_mixture_spec().model(), {}};
  if (text == "asl-mixture") {
    return {experiments::asl_mixture_spec(seed, d).model(), experiments::asl_mixture_shares(seed, d)};
  }
  if (text.rfind("sl:", 0) == 0) {
    return {evt::DependenceModel::symmetric_logistic(csv::parse_double(text.substr(3), "model sl:<alpha>")),
            {}};
  }
  if (text.empty()) throw ValidationError("model: empty argument");
  return {evt::DependenceModel::from_json(json_argument(text, "model")), {}};
}

void require_positive(std::size_t v, const char* name) {
  if (v == 0) throw ValidationError(std::string("--") + name + " must be >= 1");
}

// gen ---------------------------------------------------------------------

struct GenParams {
  std::string model = "sl-mixture";
  std::size_t n = 10000;
  std::size_t d = 2;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string labels;
};

void register_gen(ParamSet& ps, GenParams& p) {
  ps.add("model", p.model, "sl-mixture, asl-mixture, sl:<alpha>, inline JSON or JSON file");
  ps.add("n", p.n, "number of samples");
  ps.add("d", p.d, "dimension");
  ps.add("seed", p.seed, "master seed");
  ps.add("out", p.out, "samples CSV path (- for stdout)");
  ps.add("labels", p.labels, "optional CSV path for the mixture component of every row");
}

int cmd_gen(const GenParams& p, std::ostream& out, std::ostream& err) {
  require_positive(p.n, "n");
  require_positive(p.d, "d");
  const ModelChoice choice = resolve_model(p.model, p.seed, p.d);
  choice.model.check_dimension(p.d);

  Rng rng = make_rng(p.seed, stream::kData);
  std::vector<std::size_t> labels;
  const RowMatrix samples = evt::sample_max_stable(rng, choice.model, p.n, p.d, labels);

  Output o(p.out, out);
  csv::write_samples(o.stream(), samples);
  o.finish();
  if (!p.labels.empty()) {
    std::ostringstream lab;
    lab << "component\n";
    for (auto l : labels) lab << l << '\n';
    write_file(p.labels, lab.str());
  }

  std::map<std::size_t, std::size_t> counts;
  for (auto l : labels) ++counts[l];
  json summary{{"command", "gen"}, {"n", p.n}, {"d", p.d}, {"seed", p.seed},
               {"model", choice.model.to_json()}};
  json comp = json::array();
  for (const auto& [c, k] : counts) comp.push_back({{"component", c}, {"count", k}});
  summary["component_counts"] = comp;
  if (!choice.shares.empty()) summary["asl_shares"] = choice.shares;
  err << summary.dump() << '\n';
  return kExitOk;
}

// robust ------------------------------------------------------------------

struct RobustParams {
  std::string functional = "cdf";
  std::string model = "sl:0.5";
  std::string configurations;
  std::size_t d = 2;
  std::size_t replications = 10000;
  std::size_t truncation = pp::kDefaultTruncation;
  double delta = 0.0;
  double alpha = 0.95;
  std::string x;
  std::string set;
  std::string norm = "l1";
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out = "-";
};

void register_robust(ParamSet& ps, RobustParams& p) {
  ps.add("functional", p.functional, "cdf, rare-set, count or cvar")
      ->check(CLI::IsMember({"cdf", "rare-set", "count", "cvar"}));
  ps.add("model", p.model, "base model when no --configurations file is given");
  ps.add("configurations", p.configurations, "point-configuration CSV to use instead of sampling");
  ps.add("d", p.d, "dimension of sampled configurations");
  ps.add("replications", p.replications, "sampled configurations R");
  ps.add("truncation", p.truncation, "atoms per configuration N");
  ps.add("delta", p.delta, "transport budget");
  ps.add("alpha", p.alpha, "CVaR level");
  ps.add("x", p.x, "CDF point, comma separated (default all ones)");
  ps.add("set", p.set, "rare set as inline JSON or JSON file");
  ps.add("norm", p.norm, "mark norm for rare-set distances: l1, l2 or linf");
  ps.add("seed", p.seed, "master seed");
  ps.add("threads", p.threads, "worker threads (0 = auto)");
  ps.add("out", p.out, "result JSON path (- for stdout)");
}

int cmd_robust(const RobustParams& p, std::ostream& out, std::ostream& err) {
  if (p.functional != "cdf" && p.functional != "rare-set" && p.functional != "count" &&
      p.functional != "cvar") {
    throw ValidationError("unknown functional '" + p.functional +
                          "' (expected cdf, rare-set, count or cvar)");
  }
  dro::RobustificationConfig rc;
  rc.delta = p.delta;
  rc.alpha_level = p.alpha;
  rc.norm = parse_norm(p.norm);
  rc.truncation = p.truncation;
  rc.mc_replications = p.replications;
  rc.seed = p.seed;
  rc.validate();

  std::optional<dro::RareSet> set;
  if (p.functional == "rare-set" || p.functional == "count") {
    if (p.set.empty()) throw ValidationError("--set is required for --functional " + p.functional);
    set = dro::RareSet::from_json(json_argument(p.set, "rare set"));
  }

  std::vector<pp::PointConfiguration> cfgs;
  if (!p.configurations.empty()) {
    auto in = open_input(p.configurations);
    cfgs = pp::read_configurations_csv(in);
    if (cfgs.empty()) throw ValidationError("'" + p.configurations + "' holds no configurations");
  } else {
    require_positive(p.d, "d");
    const ModelChoice choice = resolve_model(p.model, p.seed, p.d);
    choice.model.check_dimension(p.d);
    cfgs = pp::sample_configurations(p.seed, choice.model, p.replications, p.truncation, p.d,
                                     resolve_threads(p.threads));
  }
  const std::size_t d = cfgs.front().dim();
  if (set && set->dim() != d) throw ValidationError("rare set dimension does not match the data");

  dro::DualSolveResult result;
  if (p.functional == "cdf") {
    std::vector<double> x(d, 1.0);
    if (!p.x.empty()) x = parse_doubles(p.x, "--x");
    if (x.size() != d) throw ValidationError("--x must have " + std::to_string(d) + " entries");
    result = dro::robust_cdf(cfgs, x, p.delta);
  } else if (p.functional == "rare-set") {
    result = dro::robust_rare_set_probability(cfgs, *set, p.delta, rc.norm);
  } else if (p.functional == "count") {
    result = dro::robust_expected_count(cfgs, *set, p.delta, rc.norm);
  } else {
    result = dro::robust_cvar(cfgs, p.delta, p.alpha);
  }

  Output o(p.out, out);
  o.stream() << result.to_json().dump() << '\n';
  o.finish();
  if (!result.converged) {
    err << "warning: dual solver flagged non-convergence\n";
    return kExitSolverFlag;
  }
  return kExitOk;
}

// shared by sweep and train -------------------------------------------------

struct DataParams {
  std::string dataset = "sl-mixture";
  std::string data;
  std::string base_model;
  std::size_t n = 10000;
  std::size_t d = 2;
  std::uint64_t seed = 0;
};

void register_data(ParamSet& ps, DataParams& p) {
  ps.add("dataset", p.dataset, "model generating the data (as for gen --model); ignored with --data");
  ps.add("data", p.data, "samples CSV to use instead of generating --dataset");
  ps.add("base-model", p.base_model,
         "base model (as for gen --model); default is fitted to the data by extremal coefficient");
  ps.add("n", p.n, "generated samples");
  ps.add("d", p.d, "dimension of generated samples");
  ps.add("seed", p.seed, "master seed");
}

struct Dataset {
  RowMatrix samples;
  std::optional<evt::DependenceModel> generator;
  std::optional<evt::DependenceModel> base;
  json log;
};

/// Loads or generates the data and resolves the base model. Generation
/// matches `gen` with the same model, n, d and seed.
Dataset load_dataset(const DataParams& p) {
  Dataset ds;
  std::vector<double> shares;
  if (!p.data.empty()) {
    auto in = open_input(p.data);
    ds.samples = csv::read_samples(in);
    if (ds.samples.rows() == 0) throw ValidationError("'" + p.data + "' holds no samples");
    ds.log["data"] = p.data;
  } else {
    require_positive(p.n, "n");
    require_positive(p.d, "d");
    ModelChoice choice = resolve_model(p.dataset, p.seed, p.d);
    choice.model.check_dimension(p.d);
    Rng rng = make_rng(p.seed, stream::kData);
    ds.samples = evt::sample_max_stable(rng, choice.model, p.n, p.d);
    shares = choice.shares;
    ds.log["dataset"] = choice.model.to_json();
    if (!shares.empty()) ds.log["asl_shares"] = shares;
    ds.generator = std::move(choice.model);
  }
  const std::size_t d = ds.samples.cols();
  if (!p.base_model.empty()) {
    ModelChoice base = resolve_model(p.base_model, p.seed, d);
    base.model.check_dimension(d);
    ds.base = std::move(base.model);
  } else if (!shares.empty()) {
    ds.base = experiments::fit_asl_common_alpha(ds.samples, shares);
  } else {
    ds.base = experiments::fit_symmetric_logistic(ds.samples);
  }
  ds.log["base_model"] = ds.base->to_json();
  return ds;
}

struct TrainParams {
  std::size_t samples = 256;
  std::size_t eval_samples = 256;
  std::size_t iterations = 2000;
  std::size_t components = adversary::kDefaultComponents;
  std::size_t truncation = pp::kDefaultTruncation;
  std::string cost_norm = "l1";
  std::size_t threads = 0;
};

void register_train(ParamSet& ps, TrainParams& p) {
  ps.add("samples", p.samples, "training batch size n");
  ps.add("eval-samples", p.eval_samples, "fixed evaluation batch size");
  ps.add("iterations", p.iterations, "adversarial iterations K");
  ps.add("components", p.components, "transport-map components of the adversary");
  ps.add("truncation", p.truncation, "atoms per configuration N");
  ps.add("cost-norm", p.cost_norm, "transport cost norm: l1, l2 or linf");
  ps.add("threads", p.threads, "worker threads (0 = auto)");
}

adversary::TrainConfig make_train_config(const TrainParams& p, std::size_t d, std::uint64_t seed) {
  adversary::TrainConfig tc;
  tc.dim = d;
  tc.samples = p.samples;
  tc.eval_samples = p.eval_samples;
  tc.iterations = p.iterations;
  tc.components = p.components;
  tc.truncation = p.truncation;
  tc.cost_norm = parse_norm(p.cost_norm);
  tc.threads = resolve_threads(p.threads);
  tc.seed = seed;
  tc.validate();
  return tc;
}

// sweep -------------------------------------------------------------------

struct SweepParams {
  DataParams data;
  TrainParams train;
  std::string holdout;
  std::string target = "cvar-l1";
  std::string modes = "unconstrained,evt,evt-unit-margins";
  std::string deltas;
  double alpha = 0.95;
  std::string cdf_point;
  std::size_t replications = 10000;
  std::size_t truth_samples = 1000000;
  std::string out = "-";
};

void register_sweep(ParamSet& ps, SweepParams& p) {
  register_data(ps, p.data);
  register_train(ps, p.train);
  ps.add("holdout", p.holdout, "held-out samples CSV giving the true risk (required with --data)");
  ps.add("target", p.target, "cvar-l1 or cdf")->check(CLI::IsMember({"cvar-l1", "cdf"}));
  ps.add("modes", p.modes, "comma separated: unconstrained, evt, evt-unit-margins");
  ps.add("deltas", p.deltas, "comma separated budgets (default 12 geometric points on [1e-3, 10])");
  ps.add("alpha", p.alpha, "level of the cvar-l1 target");
  ps.add("cdf-point", p.cdf_point, "x of the cdf target, comma separated (default all ones)");
  ps.add("replications", p.replications, "configurations for the cdf target");
  ps.add("truth-samples", p.truth_samples, "samples of the true-risk oracle for generated data");
  ps.add("out", p.out, "sweep CSV path (- for stdout)");
}

int cmd_sweep(const SweepParams& p, std::ostream& out, std::ostream& err) {
  experiments::SweepConfig sc;
  sc.target = experiments::parse_sweep_target(p.target);
  sc.modes.clear();
  for (const auto& m : split_list(p.modes)) sc.modes.push_back(adversary::parse_mode(m));
  if (!p.deltas.empty()) sc.deltas = parse_doubles(p.deltas, "--deltas");
  sc.alpha_level = p.alpha;
  if (!p.cdf_point.empty()) sc.cdf_point = parse_doubles(p.cdf_point, "--cdf-point");
  sc.replications = p.replications;
  sc.seed = p.data.seed;
  require_positive(p.truth_samples, "truth-samples");
  if (!p.data.data.empty() && p.holdout.empty()) {
    throw ValidationError("--holdout is required with --data");
  }

  Dataset ds = load_dataset(p.data);
  const std::size_t d = ds.samples.cols();
  sc.train = make_train_config(p.train, d, p.data.seed);

  experiments::TrueRiskSource truth;
  truth.seed = p.data.seed;
  truth.samples = p.truth_samples;
  if (!p.holdout.empty()) {
    auto in = open_input(p.holdout);
    truth.held_out = csv::read_samples(in);
  } else {
    truth.model = ds.generator;
  }
  err << ds.log.dump() << '\n';

  const auto records = experiments::error_vs_delta_sweep(ds.samples, *ds.base, truth, sc);

  Output o(p.out, out);
  experiments::write_sweep_csv(o.stream(), records);
  o.finish();
  bool flagged = false;
  for (const auto& r : records) {
    err << "delta=" << csv::format_double(r.delta) << " mode=" << r.mode
        << " robust_risk=" << csv::format_double(r.robust_risk)
        << " error=" << csv::format_double(r.error) << (r.converged ? "" : " flagged") << '\n';
    flagged = flagged || !r.converged;
  }
  return flagged ? kExitSolverFlag : kExitOk;
}

// train -------------------------------------------------------------------

struct TrainCommandParams {
  DataParams data;
  TrainParams train;
  std::string mode = "evt";
  double delta = 0.1;
  double alpha = 0.95;
  std::string out = "-";
  std::string family;
  std::string result;
};

void register_train_command(ParamSet& ps, TrainCommandParams& p) {
  register_data(ps, p.data);
  register_train(ps, p.train);
  ps.add("mode", p.mode, "unconstrained, evt or evt-unit-margins");
  ps.add("delta", p.delta, "transport budget");
  ps.add("alpha", p.alpha, "level of the truncated l1 loss fitted to the data");
  ps.add("out", p.out, "trace CSV path (- for stdout)");
  ps.add("family", p.family, "optional JSON path for the best adversary parameters");
  ps.add("result", p.result, "optional JSON path for the training summary");
}

int cmd_train(const TrainCommandParams& p, std::ostream& out, std::ostream& err) {
  const adversary::Mode mode = adversary::parse_mode(p.mode);
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw ValidationError("--alpha must lie in (0, 1]");
  Dataset ds = load_dataset(p.data);
  adversary::TrainConfig tc = make_train_config(p.train, ds.samples.cols(), p.data.seed);
  tc.delta = p.delta;
  tc.validate();
  const auto loss = experiments::TruncatedL1Loss::from_samples(ds.samples, p.alpha);
  err << ds.log.dump() << '\n';

  const auto res = adversary::run_dro_training(*ds.base, loss, mode, tc);

  Output o(p.out, out);
  adversary::write_trace_csv(o.stream(), res.trace);
  o.finish();
  if (!p.family.empty()) write_file(p.family, res.family.to_json().dump(2) + "\n");
  const json summary{{"mode", adversary::to_string(mode)},
                     {"delta", p.delta},
                     {"risk", res.risk},
                     {"lambda_star", res.lambda_star},
                     {"best_iteration", res.best_iteration},
                     {"skipped_steps", res.skipped_steps},
                     {"converged", res.converged}};
  if (!p.result.empty()) write_file(p.result, summary.dump(2) + "\n");
  err << summary.dump() << '\n';
  return res.converged ? kExitOk : kExitSolverFlag;
}

// ingest ------------------------------------------------------------------

struct IngestParams {
  std::string input;
  std::string block = "weekly";
  std::string out_dir = ".";
  bool frechet = false;
};

void register_ingest(ParamSet& ps, IngestParams& p) {
  ps.add("input", p.input, "returns CSV with header date,company,industry,return");
  ps.add("block", p.block, "weekly, annual or a block length in rows");
  ps.add("out-dir", p.out_dir, "directory for industry_returns.csv and block_maxima.csv");
  ps.add_flag("frechet", p.frechet, "also write frechet_maxima.csv (rank transform of the maxima)");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string labeled_matrix_csv(const std::vector<std::string>& columns, const RowMatrix& m) {
  std::ostringstream s;
  for (std::size_t k = 0; k < columns.size(); ++k) s << (k ? "," : "") << csv_field(columns[k]);
  s << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = 0; k < m.cols(); ++k) s << (k ? "," : "") << csv::format_double(m(i, k));
    s << '\n';
  }
  return s.str();
}

int cmd_ingest(const IngestParams& p, std::ostream& out, std::ostream&) {
  if (p.input.empty()) throw ValidationError("--input is required");
  const std::size_t block = experiments::parse_block(p.block);
  auto in = open_input(p.input);
  const auto table = experiments::industry_average(in);
  const RowMatrix maxima = experiments::block_maxima(table.values, block);

  const std::string dir = p.out_dir.empty() ? std::string(".") : p.out_dir;
  {
    Output o(dir + "/industry_returns.csv", out);
    experiments::write_returns_table(o.stream(), table);
    o.finish();
  }
  write_file(dir + "/block_maxima.csv", labeled_matrix_csv(table.columns, maxima));
  if (p.frechet) {
    write_file(dir + "/frechet_maxima.csv",
               labeled_matrix_csv(table.columns, experiments::frechet_rank_transform(maxima)));
  }
  const json summary{{"periods", table.values.rows()},
                     {"industries", table.columns},
                     {"dropped_rows", table.dropped_rows},
                     {"dropped_observations", table.dropped_observations},
                     {"block", block},
                     {"blocks", maxima.rows()}};
  out << summary.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributionally robust extreme-value risk estimation", "mevdro"};
  app.require_subcommand(1);

  GenParams gen;
  RobustParams robust;
  SweepParams sweep;
  TrainCommandParams train;
  IngestParams ingest;

  auto* gen_app = app.add_subcommand("gen", "sample a max-stable dataset to CSV");
  auto* robust_app = app.add_subcommand("robust", "solve a worst-case dual and print its JSON");
  auto* sweep_app = app.add_subcommand("sweep", "robust risk and error against the true risk over a delta grid");
  auto* train_app = app.add_subcommand("train", "run adversarial training and write the trace CSV");
  auto* ingest_app = app.add_subcommand("ingest", "average returns by industry and take block maxima");

  ParamSet gen_ps(gen_app);
  ParamSet robust_ps(robust_app);
  ParamSet sweep_ps(sweep_app);
  ParamSet train_ps(train_app);
  ParamSet ingest_ps(ingest_app);
  register_gen(gen_ps, gen);
  register_robust(robust_ps, robust);
  register_sweep(sweep_ps, sweep);
  register_train_command(train_ps, train);
  register_ingest(ingest_ps, ingest);

  std::vector<const char*> argv{"mevdro"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (gen_app->parsed()) {
      gen_ps.apply_config();
      return cmd_gen(gen, out, err);
    }
    if (robust_app->parsed()) {
      robust_ps.apply_config();
      return cmd_robust(robust, out, err);
    }
    if (sweep_app->parsed()) {
      sweep_ps.apply_config();
      return cmd_sweep(sweep, out, err);
    }
    if (train_app->parsed()) {
      train_ps.apply_config();
      return cmd_train(train, out, err);
    }
    ingest_ps.apply_config();
    return cmd_ingest(ingest, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace mevdro::cli
