#include "sparse_guarantees/cli.hpp"

#include <charconv>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

#include <CLI11.hpp>

#include "sparse_guarantees/experiments.hpp"
#include "sparse_guarantees/guarantees.hpp"
#include "sparse_guarantees/io.hpp"
#include "sparse_guarantees/verify.hpp"

namespace sparse_guarantees {

namespace {

constexpr const char* kSeedEnv = "SPARSE_GUARANTEES_SEED";

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }

std::string sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "config file not found: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidSpec, "config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "config " + path + " must be a JSON object");
  return j;
}

std::optional<std::uint64_t> parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    invalid(source + " must be a non-negative integer, got '" + text + "'");
  return v;
}

// --seed wins over the environment.
std::optional<std::uint64_t> effective_seed(const std::string& flag) {
  if (!flag.empty()) return parse_seed(flag, "--seed");
  if (const char* env = std::getenv(kSeedEnv); env && *env) return parse_seed(env, kSeedEnv);
  return std::nullopt;
}

struct DictFlags {
  Index hadamard = 0;
  std::vector<Index> gaussian;
  std::vector<Index> dct;
  std::uint64_t dict_seed = 0;
  std::string file;
  CLI::Option* hadamard_opt = nullptr;
  CLI::Option* gaussian_opt = nullptr;
  CLI::Option* dct_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* file_opt = nullptr;
};

void add_dict_flags(CLI::App* app, DictFlags& f) {
  f.hadamard_opt = app->add_option("--two-ortho-hadamard", f.hadamard, "[I H] with n rows");
  f.gaussian_opt = app->add_option("--random-gaussian", f.gaussian, "n m")->expected(2);
  f.dct_opt = app->add_option("--dct", f.dct, "overcomplete DCT, n m")->expected(2);
  f.seed_opt = app->add_option("--dict-seed", f.dict_seed, "seed of the random Gaussian dictionary");
  f.file_opt = app->add_option("--dictionary", f.file, "dictionary CSV, n rows, no header");
}

// Dictionary object in config form, if any dictionary flag was given.
std::optional<nlohmann::json> dict_json(const DictFlags& f) {
  int given = 0;
  nlohmann::json d;
  if (*f.hadamard_opt) {
    ++given;
    d = {{"kind", "two_ortho_hadamard"}, {"n", f.hadamard}};
  }
  if (*f.gaussian_opt) {
    ++given;
    d = {{"kind", "random_gaussian"}, {"n", f.gaussian[0]}, {"m", f.gaussian[1]}};
    if (*f.seed_opt) d["seed"] = f.dict_seed;
  }
  if (*f.dct_opt) {
    ++given;
    d = {{"kind", "overcomplete_dct"}, {"n", f.dct[0]}, {"m", f.dct[1]}};
  }
  if (*f.file_opt) {
    ++given;
    d = {{"kind", "from_file"}, {"path", f.file}};
  }
  if (given > 1) invalid("give at most one dictionary source");
  if (given == 0) return std::nullopt;
  return d;
}

Dictionary dictionary_from(const nlohmann::json& config, std::uint64_t seed) {
  if (!config.contains("dictionary")) invalid("no dictionary given (flag or config \"dictionary\")");
  nlohmann::json wrapper = {{"dictionary", config["dictionary"]}, {"master_seed", seed}};
  return build_dictionary(parse_experiment_config(wrapper, ExperimentKind::Custom).dictionary);
}

void warn_normalization(const Dictionary& d, std::ostream& err) {
  if (d.normalization_warning())
    err << "warning: dictionary columns were not unit norm (max deviation "
        << format_double(d.input_norm_deviation()) << "); re-normalized\n";
}

void emit(const nlohmann::ordered_json& j, const std::string& output_dir, const std::string& name,
          std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!output_dir.empty()) write_file_atomic(std::filesystem::path(output_dir) / name, text);
}

double number_at(const nlohmann::json& j, const char* key) {
  if (!j[key].is_number()) throw Error(ErrorCode::InvalidSpec, std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

Index index_at(const nlohmann::json& j, const char* key) {
  if (!j[key].is_number_integer())
    throw Error(ErrorCode::InvalidSpec, std::string("'") + key + "' must be an integer");
  return j[key].get<Index>();
}

template <class T>
void put(nlohmann::json& j, const char* key, const CLI::Option* opt, const T& value) {
  if (*opt) j[key] = value;
}

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed) {
  for (const auto& item : j.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw Error(ErrorCode::InvalidSpec, "unknown config key '" + item.key() + "'");
}

// ---------------------------------------------------------------------------

int cmd_coherence(const nlohmann::json& cfg, Index exact_order, const std::string& output_dir,
                  std::ostream& out, std::ostream& err) {
  const Dictionary d = dictionary_from(cfg, cfg.value("master_seed", std::uint64_t{1}));
  warn_normalization(d, err);
  const double mu = coherence(d);
  nlohmann::ordered_json j;
  j["rows"] = d.rows();
  j["atoms"] = d.atoms();
  j["mu"] = mu;
  j["input_norm_deviation"] = d.input_norm_deviation();
  out << "dictionary " << to_string(d.kind()) << " " << d.rows() << "x" << d.atoms() << "\n";
  out << "mu = " << sig6(mu) << "\n";
  out << "s\tdelta_s <= (s-1)mu\ttheta_s,s <= s mu";
  if (exact_order > 0) out << "\texact delta_s\texact theta_s,s";
  out << "\n";
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (Index s = 1; s <= 12; ++s) {
    nlohmann::ordered_json row;
    row["s"] = s;
    row["ric_bound"] = ric_bound(mu, s);
    row["rop_bound"] = rop_bound(mu, s, s);
    out << s << "\t" << sig6(ric_bound(mu, s)) << "\t" << sig6(rop_bound(mu, s, s));
    if (s <= exact_order) {
      const ExactRics e = exact_rics(d, s);
      row["exact_ric"] = e.delta;
      row["exact_rop"] = e.theta;
      out << "\t" << sig6(e.delta) << "\t" << sig6(e.theta);
    }
    out << "\n";
    table.push_back(row);
  }
  j["bound_table"] = table;
  if (!output_dir.empty())
    write_file_atomic(std::filesystem::path(output_dir) / "coherence.json", j.dump(2) + "\n");
  return 0;
}

int cmd_bounds(const nlohmann::json& cfg, const std::string& output_dir, std::ostream& out,
               std::ostream& err) {
  check_keys(cfg, {"mu", "s", "m", "sigma", "alpha", "min_probability", "x_min", "x_max", "gamma",
                   "epsilon", "dictionary", "master_seed"});
  double mu = 0.0;
  Index m = 0;
  if (cfg.contains("dictionary")) {
    const Dictionary d = dictionary_from(cfg, cfg.value("master_seed", std::uint64_t{1}));
    warn_normalization(d, err);
    mu = coherence(d);
    m = d.atoms();
  }
  if (cfg.contains("mu")) mu = number_at(cfg, "mu");
  if (cfg.contains("m")) m = index_at(cfg, "m");
  if (!cfg.contains("mu") && !cfg.contains("dictionary")) invalid("bounds needs --mu or a dictionary");
  if (m == 0) invalid("bounds needs --m or a dictionary");
  if (!cfg.contains("s")) invalid("bounds needs --s");
  const Index s = index_at(cfg, "s");
  const double sigma = cfg.contains("sigma") ? number_at(cfg, "sigma") : 1.0;
  const double x_min = cfg.contains("x_min") ? number_at(cfg, "x_min") : 1.0;
  const double x_max = cfg.contains("x_max") ? number_at(cfg, "x_max") : std::max(1.0, x_min);
  if (!(mu >= 0.0 && mu <= 1.0)) invalid("mu must be in [0, 1]");

  auto alpha_for = [&](EstimatorKind kind) {
    EstimatorSpec spec{kind, std::nullopt, std::nullopt, std::nullopt};
    if (cfg.contains("min_probability")) spec.min_probability = number_at(cfg, "min_probability");
    else spec.alpha = cfg.contains("alpha") ? number_at(cfg, "alpha") : 1.0;
    return resolve_alpha(spec, m, s);
  };

  nlohmann::ordered_json j;
  j["inputs"] = {{"mu", mu}, {"s", s}, {"m", m}, {"sigma", sigma}, {"x_min", x_min}, {"x_max", x_max}};
  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  auto add = [&](const GuaranteeReport& r, double alpha) {
    nlohmann::ordered_json o = to_json(r);
    o["alpha"] = alpha;
    reports.push_back(o);
  };
  const double a_ds = alpha_for(EstimatorKind::Dantzig);
  add(dantzig_guarantee(mu, s, m, sigma, a_ds), a_ds);
  const double a_bp = alpha_for(EstimatorKind::Bpdn);
  add(bpdn_guarantee(mu, s, m, sigma, a_bp), a_bp);
  if (cfg.contains("gamma")) add(bpdn_guarantee_explicit(mu, s, m, sigma, number_at(cfg, "gamma")), a_bp);
  const double a_omp = alpha_for(EstimatorKind::Omp);
  const double a_thr = alpha_for(EstimatorKind::Thresholding);
  add(greedy_guarantee(mu, s, m, sigma, a_omp, x_min, x_max).omp, a_omp);
  add(greedy_guarantee(mu, s, m, sigma, a_thr, x_min, x_max).thresholding, a_thr);
  if (cfg.contains("epsilon")) add(adversarial_bpdn_guarantee(mu, s, number_at(cfg, "epsilon")), 0.0);
  j["reports"] = reports;
  j["omp_sigma_threshold"] = omp_sigma_threshold(mu, s, m, a_omp, x_min);
  emit(j, output_dir, "bounds.json", out);
  return 0;
}

int cmd_estimate(const nlohmann::json& cfg, const std::string& output_dir, std::ostream& out,
                 std::ostream& err) {
  check_keys(cfg, {"dictionary", "master_seed", "b", "estimator", "support", "s", "sigma", "alpha",
                   "gamma", "tau", "x_min", "x_max", "tol", "max_iterations"});
  const Dictionary d = dictionary_from(cfg, cfg.value("master_seed", std::uint64_t{1}));
  warn_normalization(d, err);
  if (!cfg.contains("b") || !cfg["b"].is_string()) invalid("estimate needs a measurement file (b)");
  if (!cfg.contains("estimator") || !cfg["estimator"].is_string()) invalid("estimate needs an estimator");
  const auto kind = parse_estimator(cfg["estimator"].get<std::string>());
  if (!kind) invalid("unknown estimator '" + cfg["estimator"].get<std::string>() + "'");
  const Vector b = read_vector_csv(cfg["b"].get<std::string>());
  if (b.size() != d.rows())
    invalid("b has " + std::to_string(b.size()) + " entries, dictionary has " + std::to_string(d.rows()) + " rows");

  const std::optional<Index> s_opt = cfg.contains("s") ? std::optional<Index>(index_at(cfg, "s")) : std::nullopt;
  const std::optional<double> sigma =
      cfg.contains("sigma") ? std::optional<double>(number_at(cfg, "sigma")) : std::nullopt;
  const double alpha = cfg.contains("alpha") ? number_at(cfg, "alpha") : 1.0;
  const Index m = d.atoms();
  auto need_s = [&]() -> Index {
    if (!s_opt) invalid(std::string(to_string(*kind)) + " needs s");
    return *s_opt;
  };

  Estimate est;
  std::string param_name = "none";
  double param = 0.0;
  switch (*kind) {
    case EstimatorKind::Oracle: {
      if (!cfg.contains("support") || !cfg["support"].is_array()) invalid("oracle needs a support list");
      IndexSet support = cfg["support"].get<IndexSet>();
      std::sort(support.begin(), support.end());
      est = oracle_estimate(d, b, support);
      break;
    }
    case EstimatorKind::Thresholding: est = thresholding_estimate(d, b, need_s()); break;
    case EstimatorKind::Omp: est = omp_estimate(d, b, need_s()); break;
    case EstimatorKind::Bpdn: {
      param_name = "gamma";
      if (cfg.contains("gamma")) param = number_at(cfg, "gamma");
      else if (sigma) param = recommended_gamma(m, need_s(), *sigma, alpha);
      else invalid("bpdn needs gamma, or sigma and s");
      BpdnOptions opt;
      if (cfg.contains("tol")) opt.tol = number_at(cfg, "tol");
      if (cfg.contains("max_iterations")) opt.max_iterations = static_cast<int>(index_at(cfg, "max_iterations"));
      est = bpdn_estimate(d, b, param, opt);
      break;
    }
    case EstimatorKind::Dantzig: {
      param_name = "tau";
      if (cfg.contains("tau")) param = number_at(cfg, "tau");
      else if (sigma) param = recommended_tau(m, *sigma, alpha);
      else invalid("dantzig needs tau, or sigma");
      DantzigOptions opt;
      if (cfg.contains("tol")) opt.tol = number_at(cfg, "tol");
      if (cfg.contains("max_iterations")) opt.max_iterations = static_cast<int>(index_at(cfg, "max_iterations"));
      est = dantzig_estimate(d, b, param, opt);
      break;
    }
  }

  nlohmann::ordered_json j;
  j["estimator"] = std::string(to_string(*kind));
  j["parameter_name"] = param_name;
  j["parameter"] = param;
  j["estimate"] = to_json(est);
  nlohmann::ordered_json guarantee = nullptr;
  if (sigma && s_opt) {
    const double mu = coherence(d);
    const Index s = *s_opt;
    switch (*kind) {
      case EstimatorKind::Oracle: {
        IndexSet support = cfg["support"].get<IndexSet>();
        std::sort(support.begin(), support.end());
        guarantee = {{"crb", crb(d, support, *sigma)}};
        break;
      }
      case EstimatorKind::Bpdn:
        guarantee = to_json(cfg.contains("gamma") ? bpdn_guarantee_explicit(mu, s, m, *sigma, param)
                                                  : bpdn_guarantee(mu, s, m, *sigma, alpha));
        break;
      case EstimatorKind::Dantzig: guarantee = to_json(dantzig_guarantee(mu, s, m, *sigma, alpha)); break;
      case EstimatorKind::Omp:
      case EstimatorKind::Thresholding:
        if (cfg.contains("x_min") && cfg.contains("x_max")) {
          const auto r = greedy_guarantee(mu, s, m, *sigma, alpha, number_at(cfg, "x_min"), number_at(cfg, "x_max"));
          guarantee = to_json(*kind == EstimatorKind::Omp ? r.omp : r.thresholding);
        }
        break;
    }
  }
  j["guarantee"] = guarantee;
  emit(j, output_dir, "estimate.json", out);
  return 0;
}

int cmd_experiment(const std::string& kind_name, nlohmann::json cfg, const std::string& output_dir,
                   std::ostream& out, std::ostream& err) {
  ExperimentKind kind = ExperimentKind::MedianError;
  if (kind_name == "mse-snr") kind = ExperimentKind::MseVsSnr;
  else if (kind_name == "mse-sparsity") kind = ExperimentKind::MseVsSparsity;
  cfg.erase("experiment");
  const ExperimentConfig config = parse_experiment_config(cfg, kind);
  check_experiment_kind(config);
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult res = run_experiment(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::filesystem::path dir = output_dir.empty() ? std::filesystem::path("results") / kind_name
                                                       : std::filesystem::path(output_dir);
  write_experiment_outputs(dir, config, res, wall);
  out << table_to_csv(res.table);
  Index failures = 0;
  for (const auto& row : res.table.rows) failures += row.failures;
  if (failures > 0) err << "warning: " << failures << " solver failures excluded from aggregates\n";
  err << "wrote " << (dir / "trials.csv").string() << ", " << (dir / "table.csv").string() << ", "
      << (dir / "manifest.json").string() << "\n";
  return 0;
}

}  // namespace

void apply_overrides(nlohmann::json& config, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) invalid("override '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      value = text;
    }
    nlohmann::json* node = &config;
    std::size_t pos = 0;
    for (;;) {
      const auto dot = key.find('.', pos);
      const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
      if (part.empty()) invalid("override key '" + key + "' has an empty component");
      if (!node->is_object()) {
        if (!node->is_null()) invalid("override key '" + key + "' descends into a non-object");
        *node = nlohmann::json::object();
      }
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      pos = dot + 1;
    }
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse estimation under coherence guarantees"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPARSE_GUARANTEES_VERSION);

  std::string config_path;
  std::string output_dir;
  std::vector<std::string> overrides;
  std::string seed_flag;
  int threads = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--output-dir", output_dir, "directory for result files");
    sub->add_option("--set", overrides, "key=value override applied after the config file");
    sub->add_option("--seed", seed_flag, std::string("master seed (default from ") + kSeedEnv + ")");
  };

  // coherence
  auto* coh = app.add_subcommand("coherence", "mutual coherence and coherence-based RIC/ROP bounds");
  DictFlags coh_dict;
  Index exact_order = 0;
  common(coh);
  add_dict_flags(coh, coh_dict);
  coh->add_option("--exact", exact_order, "also enumerate exact RIC/ROP up to this order")
      ->check(CLI::Range(0, 16));

  // bounds
  auto* bnd = app.add_subcommand("bounds", "closed-form guarantees");
  DictFlags bnd_dict;
  double mu = 0, sigma = 1, alpha = 0, min_prob = 0.5, x_min = 1, x_max = 1, gamma = 0, epsilon = 0;
  Index s = 0, m = 0;
  common(bnd);
  add_dict_flags(bnd, bnd_dict);
  auto* o_mu = bnd->add_option("--mu", mu, "mutual coherence");
  auto* o_s = bnd->add_option("--s", s, "support size");
  auto* o_m = bnd->add_option("--m", m, "number of atoms");
  auto* o_sigma = bnd->add_option("--sigma", sigma, "noise standard deviation (default 1)");
  auto* o_alpha = bnd->add_option("--alpha", alpha, "alpha (default 1)");
  auto* o_minp = bnd->add_option("--min-probability", min_prob, "smallest alpha reaching this probability");
  auto* o_xmin = bnd->add_option("--x-min", x_min, "smallest nonzero magnitude (default 1)");
  auto* o_xmax = bnd->add_option("--x-max", x_max, "largest nonzero magnitude (default 1)");
  auto* o_gamma = bnd->add_option("--gamma", gamma, "also evaluate BPDN at this gamma");
  auto* o_eps = bnd->add_option("--epsilon", epsilon, "also evaluate the bounded-noise BPDN bound");

  // estimate
  auto* est = app.add_subcommand("estimate", "run one estimator on a measurement vector");
  DictFlags est_dict;
  std::string b_path, estimator;
  std::vector<Index> support;
  double e_sigma = 0, e_alpha = 1, e_gamma = 0, e_tau = 0, e_xmin = 0, e_xmax = 0;
  Index e_s = 0;
  common(est);
  add_dict_flags(est, est_dict);
  auto* o_b = est->add_option("--b", b_path, "measurement CSV, one value per line");
  auto* o_est = est->add_option("--estimator", estimator, "oracle|thresholding|omp|bpdn|dantzig");
  auto* o_sup = est->add_option("--support", support, "true support (oracle)");
  auto* o_es = est->add_option("--s", e_s, "support size");
  auto* o_esig = est->add_option("--sigma", e_sigma, "noise standard deviation");
  auto* o_ea = est->add_option("--alpha", e_alpha, "alpha for the gamma / tau selectors (default 1)");
  auto* o_eg = est->add_option("--gamma", e_gamma, "explicit BPDN gamma");
  auto* o_et = est->add_option("--tau", e_tau, "explicit Dantzig tau");
  auto* o_exmin = est->add_option("--x-min", e_xmin, "smallest nonzero magnitude");
  auto* o_exmax = est->add_option("--x-max", e_xmax, "largest nonzero magnitude");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo sweeps");
  std::string exp_kind;
  common(exp);
  exp->add_option("kind", exp_kind, "median | mse-snr | mse-sparsity")
      ->required()
      ->check(CLI::IsMember({"median", "mse-snr", "mse-sparsity"}));
  exp->add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  // verify
  auto* ver = app.add_subcommand("verify", "built-in self checks");
  std::string ver_dict;
  int crb_trials = 2000;
  ver->add_option("--seed", seed_flag, std::string("master seed (default from ") + kSeedEnv + ")");
  ver->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  ver->add_option("--dictionary", ver_dict, "also analyse this dictionary CSV");
  ver->add_option("--crb-trials", crb_trials, "trials of the oracle-vs-CRB check")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto seed = effective_seed(seed_flag);
    if (*ver) {
      VerifyOptions opt;
      if (seed) opt.seed = *seed;
      if (threads > 0) opt.threads = threads;
      if (!ver_dict.empty()) opt.dictionary_path = ver_dict;
      opt.crb_trials = crb_trials;
      const auto results = run_verify(opt, out);
      const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
      return ok ? 0 : 2;
    }

    nlohmann::json cfg = load_config(config_path);
    auto with_dict = [&](const DictFlags& f) {
      if (auto d = dict_json(f)) cfg["dictionary"] = *d;
    };
    if (*coh) {
      with_dict(coh_dict);
      apply_overrides(cfg, overrides);
      if (seed) cfg["master_seed"] = *seed;
      return cmd_coherence(cfg, exact_order, output_dir, out, err);
    }
    if (*bnd) {
      with_dict(bnd_dict);
      put(cfg, "mu", o_mu, mu);
      put(cfg, "s", o_s, s);
      put(cfg, "m", o_m, m);
      put(cfg, "sigma", o_sigma, sigma);
      put(cfg, "alpha", o_alpha, alpha);
      put(cfg, "min_probability", o_minp, min_prob);
      put(cfg, "x_min", o_xmin, x_min);
      put(cfg, "x_max", o_xmax, x_max);
      put(cfg, "gamma", o_gamma, gamma);
      put(cfg, "epsilon", o_eps, epsilon);
      apply_overrides(cfg, overrides);
      if (seed) cfg["master_seed"] = *seed;
      return cmd_bounds(cfg, output_dir, out, err);
    }
    if (*est) {
      with_dict(est_dict);
      put(cfg, "b", o_b, b_path);
      put(cfg, "estimator", o_est, estimator);
      put(cfg, "support", o_sup, support);
      put(cfg, "s", o_es, e_s);
      put(cfg, "sigma", o_esig, e_sigma);
      put(cfg, "alpha", o_ea, e_alpha);
      put(cfg, "gamma", o_eg, e_gamma);
      put(cfg, "tau", o_et, e_tau);
      put(cfg, "x_min", o_exmin, e_xmin);
      put(cfg, "x_max", o_exmax, e_xmax);
      apply_overrides(cfg, overrides);
      if (seed) cfg["master_seed"] = *seed;
      return cmd_estimate(cfg, output_dir, out, err);
    }
    if (*exp) {
      apply_overrides(cfg, overrides);
      if (seed) cfg["master_seed"] = *seed;
      if (threads > 0) cfg["threads"] = threads;
      return cmd_experiment(exp_kind, cfg, output_dir, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_solver_failure() ? 2 : 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: InvalidSpec: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: Io: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace sparse_guarantees
