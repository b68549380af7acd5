#include "sparse_guarantees/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "sparse_guarantees/guarantees.hpp"
#include "sparse_guarantees/io.hpp"

namespace sparse_guarantees {

namespace {

constexpr std::uint64_t kSignalDomain = 0x5167A1;
constexpr std::uint64_t kNoiseDomain = 0x7015E;

[[noreturn]] void bad_spec(const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); }

std::vector<double> log_space(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi > 0.0)) bad_spec("sigma2 range needs min, max > 0 and count >= 1");
  std::vector<double> out;
  if (count == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < count; ++k) out.push_back(std::pow(10.0, a + (b - a) * k / (count - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

void shuffle(std::vector<double>& v, RngStream& stream) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

IndexSet random_support(Index m, Index s, RngStream& stream) {
  // Partial Fisher-Yates over 0..m-1.
  std::vector<Index> pool(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Index k = 0; k < s; ++k) {
    const auto j = static_cast<std::size_t>(k) +
                   static_cast<std::size_t>(stream.next_below(static_cast<std::uint64_t>(m - k)));
    std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
  }
  IndexSet support(pool.begin(), pool.begin() + s);
  std::sort(support.begin(), support.end());
  return support;
}

double probability_at(EstimatorKind kind, Index m, Index s, double alpha) {
  switch (kind) {
    case EstimatorKind::Bpdn: return bpdn_guarantee(0.0, s, m, 1.0, alpha).success_probability;
    case EstimatorKind::Dantzig: return dantzig_guarantee(0.0, s, m, 1.0, alpha).success_probability;
    case EstimatorKind::Omp:
      return greedy_guarantee(0.0, s, m, 1.0, alpha, 1.0, 1.0).omp.success_probability;
    case EstimatorKind::Thresholding:
      return greedy_guarantee(0.0, s, m, 1.0, alpha, 1.0, 1.0).thresholding.success_probability;
    case EstimatorKind::Oracle: return 1.0;
  }
  return 1.0;
}

struct SharedState {
  const ExperimentConfig* config;
  const Dictionary* dict;
  std::vector<GridPoint> grid;
  std::vector<EstimatorSpec> estimators;  // sorted by kind
  std::vector<std::vector<double>> parameters;  // [estimator][grid]
  double lipschitz = 0.0;
  Matrix gram;
  bool have_gram = false;
};

struct TaskResult {
  std::vector<TrialRecord> records;
  TrialSide side;
};

TaskResult run_one(const SharedState& st, Index g, Index t) {
  const ExperimentConfig& cfg = *st.config;
  const Dictionary& dict = *st.dict;
  const GridPoint& gp = st.grid[static_cast<std::size_t>(g)];
  const std::uint64_t stream_id = trial_stream_id(g, t);

  SignalSpec sig = cfg.signal;
  sig.s = gp.s;
  const int slot = static_cast<int>(t % cfg.signal.profiles);
  const int profile = slot % kProfileCount;
  const std::uint64_t signal_seed = derive_seed(cfg.master_seed, kSignalDomain);
  std::uint64_t signal_stream = stream_id;
  if (cfg.signal.support == SupportMode::Fixed)
    signal_stream = (static_cast<std::uint64_t>(gp.s) << 32) | static_cast<std::uint64_t>(slot);
  RngStream srng(signal_seed, signal_stream);
  const SparseSignal x0 = gen_signal(sig, dict.atoms(), srng, profile);

  const double sigma = std::sqrt(gp.sigma2);
  RngStream nrng(derive_seed(cfg.master_seed, kNoiseDomain), stream_id);
  const Vector noise = sigma * gaussian(nrng, dict.rows());
  const Vector truth = x0.dense();
  const Vector b = dict.matrix() * truth + noise;

  TaskResult out;
  out.side.crb = crb(dict, x0.support(), sigma);
  out.side.signal_energy = x0.energy();

  for (std::size_t k = 0; k < st.estimators.size(); ++k) {
    const EstimatorSpec& spec = st.estimators[k];
    TrialRecord rec;
    rec.grid_index = g;
    rec.trial_index = t;
    rec.estimator = spec.kind;
    rec.seed_used = stream_id;
    const double param = st.parameters[k][static_cast<std::size_t>(g)];
    try {
      Estimate est;
      switch (spec.kind) {
        case EstimatorKind::Oracle: est = oracle_estimate(dict, b, x0.support()); break;
        case EstimatorKind::Thresholding: est = thresholding_estimate(dict, b, gp.s); break;
        case EstimatorKind::Omp: est = omp_estimate(dict, b, gp.s); break;
        case EstimatorKind::Bpdn: {
          BpdnOptions opt;
          opt.tol = cfg.bpdn_tol;
          opt.lipschitz = st.lipschitz;
          est = bpdn_estimate(dict, b, param, opt);
          break;
        }
        case EstimatorKind::Dantzig: {
          DantzigOptions opt;
          opt.tol = cfg.dantzig_tol;
          if (st.have_gram) opt.gram = &st.gram;
          est = dantzig_estimate(dict, b, param, opt);
          break;
        }
      }
      rec.sq_error = (truth - est.coefficients).squaredNorm();
      rec.support_exact = est.detected_support == x0.support();
      rec.solver_gap = est.diagnostics.duality_gap;
    } catch (const Error& e) {
      if (!e.is_solver_failure()) throw;
      rec.failed = true;
      rec.sq_error = 0.0;
      rec.support_exact = false;
      rec.solver_gap.reset();
    }
    out.records.push_back(rec);
  }
  return out;
}

std::string json_type_error(const std::string& key, const char* expected) {
  return "config key '" + key + "' must be " + expected;
}

double get_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) bad_spec(json_type_error(key, "a number"));
  return j.get<double>();
}

Index get_index(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer()) bad_spec(json_type_error(key, "an integer"));
  return j.get<Index>();
}

std::string get_string(const nlohmann::json& j, const std::string& key) {
  if (!j.is_string()) bad_spec(json_type_error(key, "a string"));
  return j.get<std::string>();
}

void check_keys(const nlohmann::json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) bad_spec(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      bad_spec("unknown config key '" + where + "." + item.key() + "'");
  }
}

DictionaryKind parse_dictionary_kind(const std::string& s) {
  if (s == "two_ortho_hadamard") return DictionaryKind::TwoOrthoHadamard;
  if (s == "random_gaussian") return DictionaryKind::RandomGaussian;
  if (s == "overcomplete_dct") return DictionaryKind::OvercompleteDct;
  if (s == "from_file") return DictionaryKind::FromFile;
  bad_spec("unknown dictionary kind '" + s + "'");
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::MedianError: return "median";
    case ExperimentKind::MseVsSnr: return "mse-snr";
    case ExperimentKind::MseVsSparsity: return "mse-sparsity";
    case ExperimentKind::Custom: return "custom";
  }
  return "custom";
}

Dictionary build_dictionary(const DictionarySpec& spec) {
  switch (spec.kind) {
    case DictionaryKind::TwoOrthoHadamard: return build_two_ortho_hadamard(spec.n);
    case DictionaryKind::RandomGaussian: return build_random_gaussian(spec.n, spec.m, spec.seed);
    case DictionaryKind::OvercompleteDct: return build_overcomplete_dct(spec.n, spec.m);
    case DictionaryKind::FromFile: return load_dictionary_csv(spec.path);
  }
  bad_spec("unknown dictionary kind");
}

std::vector<double> profile_magnitudes(int profile, Index s, double x_min, double x_max,
                                       RngStream& stream) {
  std::vector<double> mags(static_cast<std::size_t>(s), x_max);
  const double span = s > 1 ? static_cast<double>(s - 1) : 1.0;
  for (Index k = 0; k < s; ++k) {
    const double frac = s > 1 ? static_cast<double>(k) / span : 0.0;
    double& v = mags[static_cast<std::size_t>(k)];
    switch (profile) {
      case 0: v = x_max; break;
      case 1: v = x_min; break;
      case 2: v = x_min + (x_max - x_min) * frac; break;
      case 3: v = x_min * std::pow(x_max / x_min, frac); break;
      case 4: v = k == 0 ? x_min : x_max; break;
      case 5: v = k == 0 ? x_max : x_min; break;
      case 6: v = k % 2 == 0 ? x_max : x_min; break;
      case 7: v = x_min + (x_max - x_min) * stream.next_uniform(); break;
      default: bad_spec("magnitude profile must be in 0..7");
    }
  }
  // Ramps should hit both ends exactly.
  if ((profile == 2 || profile == 3) && s > 1) {
    mags.front() = x_min;
    mags.back() = x_max;
  }
  return mags;
}

SparseSignal gen_signal(const SignalSpec& spec, Index m, RngStream& stream, int profile) {
  if (spec.s < 1 || spec.s > m) bad_spec("signal needs 1 <= s <= m");
  IndexSet support = random_support(m, spec.s, stream);
  Vector values(spec.s);
  if (spec.magnitudes == MagnitudeMode::GaussianNormalized) {
    values = gaussian(stream, spec.s);
    const double norm = values.norm();
    if (!(norm > 0.0)) bad_spec("degenerate Gaussian draw");
    values /= norm;
  } else {
    if (!(spec.x_min > 0.0) || !(spec.x_min <= spec.x_max))
      bad_spec("fixed-profile signal needs 0 < x_min <= x_max");
    std::vector<double> mags = profile_magnitudes(profile, spec.s, spec.x_min, spec.x_max, stream);
    shuffle(mags, stream);
    for (Index k = 0; k < spec.s; ++k) {
      const double sign = (stream.next_u64() & 1u) ? -1.0 : 1.0;
      values[k] = sign * mags[static_cast<std::size_t>(k)];
    }
  }
  return SparseSignal(m, std::move(support), std::move(values));
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  auto all = [] {
    std::vector<EstimatorSpec> v;
    for (auto k : {EstimatorKind::Oracle, EstimatorKind::Thresholding, EstimatorKind::Omp,
                   EstimatorKind::Bpdn, EstimatorKind::Dantzig})
      v.push_back(EstimatorSpec{k, std::nullopt, std::nullopt, std::nullopt});
    return v;
  };
  c.estimators = all();
  switch (kind) {
    case ExperimentKind::MedianError:
      c.dictionary = {DictionaryKind::TwoOrthoHadamard, 512, 1024, 0, {}};
      c.signal = {7, 0.1, 1.0, MagnitudeMode::FixedProfile, SupportMode::Fixed, 8};
      for (auto& e : c.estimators) e.min_probability = 0.5;
      c.sigma2 = log_space(1e-8, 1.0, 10);
      c.trials = 501;
      break;
    case ExperimentKind::MseVsSnr:
    case ExperimentKind::Custom:
      c.dictionary = {DictionaryKind::TwoOrthoHadamard, 256, 512, 0, {}};
      c.signal = {5, 0.1, 1.0, MagnitudeMode::GaussianNormalized, SupportMode::Random, 8};
      for (auto& e : c.estimators) e.alpha = 1.0;
      c.sigma2 = log_space(1e-8, 1.0, 10);
      c.trials = kind == ExperimentKind::Custom ? 100 : 2000;
      break;
    case ExperimentKind::MseVsSparsity:
      c.dictionary = {DictionaryKind::TwoOrthoHadamard, 256, 512, 0, {}};
      c.signal = {5, 0.1, 1.0, MagnitudeMode::GaussianNormalized, SupportMode::Random, 8};
      for (auto& e : c.estimators) e.alpha = 1.0;
      c.sigma2 = {1e-4};
      for (Index s = 2; s <= 30; s += 2) c.sparsity.push_back(s);
      c.trials = 2000;
      break;
  }
  return c;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j, ExperimentKind kind) {
  ExperimentConfig c = default_config(kind);
  check_keys(j, "config",
             {"dictionary", "signal", "estimators", "sigma2", "sparsity", "trials", "master_seed",
              "threads", "solver", "experiment"});
  if (j.contains("master_seed")) {
    const auto& v = j["master_seed"];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      bad_spec(json_type_error("master_seed", "a non-negative integer"));
    c.master_seed = v.get<std::uint64_t>();
  }
  c.dictionary.seed = c.master_seed;
  if (j.contains("dictionary")) {
    const auto& d = j["dictionary"];
    check_keys(d, "dictionary", {"kind", "n", "m", "seed", "path"});
    if (d.contains("kind")) c.dictionary.kind = parse_dictionary_kind(get_string(d["kind"], "dictionary.kind"));
    if (d.contains("n")) c.dictionary.n = get_index(d["n"], "dictionary.n");
    if (d.contains("m")) c.dictionary.m = get_index(d["m"], "dictionary.m");
    if (d.contains("seed")) c.dictionary.seed = d["seed"].get<std::uint64_t>();
    if (d.contains("path")) c.dictionary.path = get_string(d["path"], "dictionary.path");
  }
  if (c.dictionary.kind == DictionaryKind::TwoOrthoHadamard) c.dictionary.m = 2 * c.dictionary.n;
  if (j.contains("signal")) {
    const auto& s = j["signal"];
    check_keys(s, "signal", {"s", "x_min", "x_max", "magnitude_mode", "support_mode", "profiles"});
    if (s.contains("s")) c.signal.s = get_index(s["s"], "signal.s");
    if (s.contains("x_min")) c.signal.x_min = get_number(s["x_min"], "signal.x_min");
    if (s.contains("x_max")) c.signal.x_max = get_number(s["x_max"], "signal.x_max");
    if (s.contains("magnitude_mode")) {
      const std::string mode = get_string(s["magnitude_mode"], "signal.magnitude_mode");
      if (mode == "fixed_profile") c.signal.magnitudes = MagnitudeMode::FixedProfile;
      else if (mode == "gaussian_normalized") c.signal.magnitudes = MagnitudeMode::GaussianNormalized;
      else bad_spec("unknown magnitude_mode '" + mode + "'");
    }
    if (s.contains("support_mode")) {
      const std::string mode = get_string(s["support_mode"], "signal.support_mode");
      if (mode == "fixed") c.signal.support = SupportMode::Fixed;
      else if (mode == "random") c.signal.support = SupportMode::Random;
      else bad_spec("unknown support_mode '" + mode + "'");
    }
    if (s.contains("profiles")) c.signal.profiles = static_cast<int>(get_index(s["profiles"], "signal.profiles"));
  }
  if (j.contains("estimators")) {
    const auto& arr = j["estimators"];
    if (!arr.is_array()) bad_spec(json_type_error("estimators", "an array"));
    c.estimators.clear();
    for (const auto& e : arr) {
      EstimatorSpec spec;
      std::string name;
      if (e.is_string()) {
        name = e.get<std::string>();
      } else {
        check_keys(e, "estimators[]", {"name", "alpha", "min_probability", "parameter"});
        if (!e.contains("name")) bad_spec("estimator entry needs a name");
        name = get_string(e["name"], "estimators[].name");
        if (e.contains("alpha")) spec.alpha = get_number(e["alpha"], "estimators[].alpha");
        if (e.contains("min_probability"))
          spec.min_probability = get_number(e["min_probability"], "estimators[].min_probability");
        if (e.contains("parameter")) spec.parameter = get_number(e["parameter"], "estimators[].parameter");
      }
      const auto kind_opt = parse_estimator(name);
      if (!kind_opt) bad_spec("unknown estimator '" + name + "'");
      spec.kind = *kind_opt;
      if (e.is_string()) {
        // Bare names inherit the experiment's default policy.
        for (const auto& d : default_config(kind).estimators)
          if (d.kind == spec.kind) spec = d;
      }
      c.estimators.push_back(spec);
    }
  }
  if (j.contains("sigma2")) {
    const auto& s2 = j["sigma2"];
    if (s2.is_array()) {
      c.sigma2.clear();
      for (const auto& v : s2) c.sigma2.push_back(get_number(v, "sigma2[]"));
    } else if (s2.is_number()) {
      c.sigma2 = {s2.get<double>()};
    } else {
      check_keys(s2, "sigma2", {"min", "max", "count"});
      if (!s2.contains("min") || !s2.contains("max") || !s2.contains("count"))
        bad_spec("sigma2 range needs min, max and count");
      c.sigma2 = log_space(get_number(s2["min"], "sigma2.min"), get_number(s2["max"], "sigma2.max"),
                           static_cast<int>(get_index(s2["count"], "sigma2.count")));
    }
  }
  if (j.contains("sparsity")) {
    const auto& sp = j["sparsity"];
    if (!sp.is_array()) bad_spec(json_type_error("sparsity", "an array"));
    c.sparsity.clear();
    for (const auto& v : sp) c.sparsity.push_back(get_index(v, "sparsity[]"));
  }
  if (j.contains("trials")) c.trials = get_index(j["trials"], "trials");
  if (j.contains("threads")) c.threads = static_cast<int>(get_index(j["threads"], "threads"));
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    check_keys(s, "solver", {"bpdn_tol", "dantzig_tol"});
    if (s.contains("bpdn_tol")) c.bpdn_tol = get_number(s["bpdn_tol"], "solver.bpdn_tol");
    if (s.contains("dantzig_tol")) c.dantzig_tol = get_number(s["dantzig_tol"], "solver.dantzig_tol");
  }
  return c;
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["experiment"] = std::string(to_string(c.kind));
  nlohmann::ordered_json d;
  switch (c.dictionary.kind) {
    case DictionaryKind::TwoOrthoHadamard: d["kind"] = "two_ortho_hadamard"; break;
    case DictionaryKind::RandomGaussian: d["kind"] = "random_gaussian"; break;
    case DictionaryKind::OvercompleteDct: d["kind"] = "overcomplete_dct"; break;
    case DictionaryKind::FromFile: d["kind"] = "from_file"; break;
  }
  d["n"] = c.dictionary.n;
  d["m"] = c.dictionary.m;
  d["seed"] = c.dictionary.seed;
  if (!c.dictionary.path.empty()) d["path"] = c.dictionary.path;
  j["dictionary"] = d;
  nlohmann::ordered_json s;
  s["s"] = c.signal.s;
  s["x_min"] = c.signal.x_min;
  s["x_max"] = c.signal.x_max;
  s["magnitude_mode"] =
      c.signal.magnitudes == MagnitudeMode::FixedProfile ? "fixed_profile" : "gaussian_normalized";
  s["support_mode"] = c.signal.support == SupportMode::Fixed ? "fixed" : "random";
  s["profiles"] = c.signal.profiles;
  j["signal"] = s;
  nlohmann::ordered_json ests = nlohmann::ordered_json::array();
  for (const auto& e : c.estimators) {
    nlohmann::ordered_json o;
    o["name"] = std::string(to_string(e.kind));
    if (e.alpha) o["alpha"] = *e.alpha;
    if (e.min_probability) o["min_probability"] = *e.min_probability;
    if (e.parameter) o["parameter"] = *e.parameter;
    ests.push_back(o);
  }
  j["estimators"] = ests;
  j["sigma2"] = c.sigma2;
  if (!c.sparsity.empty()) j["sparsity"] = c.sparsity;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["threads"] = c.threads;
  j["solver"] = {{"bpdn_tol", c.bpdn_tol}, {"dantzig_tol", c.dantzig_tol}};
  return j;
}

void validate(const ExperimentConfig& c, Index rows, Index atoms) {
  if (c.trials < 1) bad_spec("trials must be >= 1");
  // Trial stream ids are grid * 10^6 + trial.
  if (c.trials > 1'000'000) bad_spec("trials must be <= 1000000");
  if (c.threads < 1) bad_spec("threads must be >= 1");
  if (c.sigma2.empty()) bad_spec("sigma2 grid is empty");
  for (double v : c.sigma2)
    if (!(v > 0.0) || !std::isfinite(v)) bad_spec("sigma2 values must be positive and finite");
  if (c.estimators.empty()) bad_spec("no estimators configured");
  if (c.signal.profiles < 1) bad_spec("signal.profiles must be >= 1");
  if (c.signal.magnitudes == MagnitudeMode::FixedProfile &&
      (!(c.signal.x_min > 0.0) || !(c.signal.x_min <= c.signal.x_max)))
    bad_spec("fixed-profile signals need 0 < x_min <= x_max");
  if (c.kind == ExperimentKind::MseVsSparsity && c.sparsity.empty()) bad_spec("sparsity grid is empty");
  std::vector<Index> sizes = c.kind == ExperimentKind::MseVsSparsity ? c.sparsity
                                                                      : std::vector<Index>{c.signal.s};
  for (Index s : sizes) {
    if (s < 1 || s > rows || s > atoms) bad_spec("support size must satisfy 1 <= s <= n");
    if (atoms - s < 2) bad_spec("support size leaves fewer than 2 off-support atoms");
  }
  if (!(c.bpdn_tol > 0.0) || !(c.dantzig_tol > 0.0)) bad_spec("solver tolerances must be positive");
  for (const auto& e : c.estimators) {
    if (e.alpha && !(*e.alpha >= 0.0)) bad_spec("alpha must be >= 0");
    if (e.min_probability && !(*e.min_probability > 0.0 && *e.min_probability <= 1.0))
      bad_spec("min_probability must be in (0, 1]");
    if (e.parameter && !(*e.parameter > 0.0)) bad_spec("explicit gamma / tau must be positive");
  }
  for (std::size_t a = 0; a < c.estimators.size(); ++a)
    for (std::size_t b = a + 1; b < c.estimators.size(); ++b)
      if (c.estimators[a].kind == c.estimators[b].kind) bad_spec("estimator listed twice");
}

std::vector<GridPoint> grid_points(const ExperimentConfig& c) {
  std::vector<GridPoint> g;
  if (c.kind == ExperimentKind::MseVsSparsity) {
    for (Index s : c.sparsity) g.push_back({c.sigma2.front(), s});
  } else {
    for (double v : c.sigma2) g.push_back({v, c.signal.s});
  }
  return g;
}

std::uint64_t trial_stream_id(Index grid, Index trial) {
  return static_cast<std::uint64_t>(grid) * 1'000'000ull + static_cast<std::uint64_t>(trial);
}

double resolve_alpha(const EstimatorSpec& spec, Index m, Index s) {
  if (spec.alpha) return *spec.alpha;
  if (spec.min_probability) {
    if (spec.kind == EstimatorKind::Oracle) return 0.0;
    const auto a = smallest_alpha(
        [&](double alpha) { return probability_at(spec.kind, m, s, alpha); }, *spec.min_probability);
    if (!a)
      bad_spec("no alpha reaches success probability " + format_double(*spec.min_probability) +
               " for " + std::string(to_string(spec.kind)));
    return *a;
  }
  return 1.0;
}

double resolve_parameter(const EstimatorSpec& spec, Index m, Index s, double sigma) {
  if (spec.kind == EstimatorKind::Bpdn) {
    if (spec.parameter) return *spec.parameter;
    return recommended_gamma(m, s, sigma, resolve_alpha(spec, m, s));
  }
  if (spec.kind == EstimatorKind::Dantzig) {
    if (spec.parameter) return *spec.parameter;
    return recommended_tau(m, sigma, resolve_alpha(spec, m, s));
  }
  return 0.0;
}

TrialRun run_trials(const ExperimentConfig& config) {
  const Dictionary dict = build_dictionary(config.dictionary);
  return run_trials(config, dict);
}

TrialRun run_trials(const ExperimentConfig& config, const Dictionary& dict) {
  validate(config, dict.rows(), dict.atoms());
  SharedState st;
  st.config = &config;
  st.dict = &dict;
  st.grid = grid_points(config);
  st.estimators = config.estimators;
  std::stable_sort(st.estimators.begin(), st.estimators.end(),
                   [](const EstimatorSpec& a, const EstimatorSpec& b) { return a.kind < b.kind; });
  for (const auto& e : st.estimators) {
    std::vector<double> params;
    for (const auto& gp : st.grid) params.push_back(resolve_parameter(e, dict.atoms(), gp.s, std::sqrt(gp.sigma2)));
    st.parameters.push_back(std::move(params));
    if (e.kind == EstimatorKind::Bpdn && st.lipschitz == 0.0) st.lipschitz = operator_norm_sq(dict.matrix());
    if (e.kind == EstimatorKind::Dantzig && !st.have_gram) {
      st.gram = dict.matrix().transpose() * dict.matrix();
      st.have_gram = true;
    }
  }

  const Index grid_count = static_cast<Index>(st.grid.size());
  const Index tasks = grid_count * config.trials;
  std::vector<TaskResult> results(static_cast<std::size_t>(tasks));
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const Index task = next.fetch_add(1);
      if (task >= tasks) return;
      try {
        results[static_cast<std::size_t>(task)] = run_one(st, task / config.trials, task % config.trials);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };
  const int threads = static_cast<int>(std::min<Index>(config.threads, std::max<Index>(tasks, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  TrialRun run;
  run.records.reserve(static_cast<std::size_t>(tasks) * st.estimators.size());
  run.side.reserve(static_cast<std::size_t>(tasks));
  for (auto& r : results) {
    for (auto& rec : r.records) run.records.push_back(rec);
    run.side.push_back(r.side);
  }
  return run;
}

ExperimentTable aggregate(const ExperimentConfig& config, const Dictionary& dict, const TrialRun& run) {
  ExperimentTable table;
  table.kind = config.kind;
  table.statistic = config.kind == ExperimentKind::MedianError ? "median" : "mean";
  table.axis_name = config.kind == ExperimentKind::MseVsSnr        ? "snr"
                    : config.kind == ExperimentKind::MseVsSparsity ? "s"
                                                                   : "sigma2";
  const auto grid = grid_points(config);
  const Index m = dict.atoms();
  const Index n = dict.rows();
  const double mu = coherence(dict);
  std::vector<EstimatorSpec> ests = config.estimators;
  std::stable_sort(ests.begin(), ests.end(),
                   [](const EstimatorSpec& a, const EstimatorSpec& b) { return a.kind < b.kind; });

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const GridPoint& gp = grid[g];
    const double sigma = std::sqrt(gp.sigma2);
    double crb_sum = 0.0;
    double energy_sum = 0.0;
    for (Index t = 0; t < config.trials; ++t) {
      const auto& side = run.side[g * static_cast<std::size_t>(config.trials) + static_cast<std::size_t>(t)];
      crb_sum += side.crb;
      energy_sum += side.signal_energy;
    }
    const double trials = static_cast<double>(config.trials);
    for (const auto& e : ests) {
      TableRow row;
      row.grid_index = static_cast<Index>(g);
      row.sigma2 = gp.sigma2;
      row.s = gp.s;
      row.estimator = e.kind;
      row.parameter = resolve_parameter(e, m, gp.s, sigma);
      row.crb = crb_sum / trials;
      if (config.kind == ExperimentKind::MseVsSnr) row.axis = snr(energy_sum / trials, n, sigma);
      else if (config.kind == ExperimentKind::MseVsSparsity) row.axis = static_cast<double>(gp.s);
      else row.axis = gp.sigma2;

      std::vector<double> errors;
      for (const auto& rec : run.records) {
        if (rec.grid_index != static_cast<Index>(g) || rec.estimator != e.kind) continue;
        ++row.trials;
        if (rec.failed) {
          ++row.failures;
        } else {
          errors.push_back(rec.sq_error);
        }
      }
      if (errors.empty()) {
        row.value = std::numeric_limits<double>::quiet_NaN();
      } else if (table.statistic == "median") {
        row.value = median(errors);
      } else {
        double sum = 0.0;
        for (double v : errors) sum += v;
        row.value = sum / static_cast<double>(errors.size());
      }

      const double alpha = resolve_alpha(e, m, gp.s);
      std::optional<GuaranteeReport> rep;
      switch (e.kind) {
        case EstimatorKind::Oracle: break;
        case EstimatorKind::Thresholding:
        case EstimatorKind::Omp:
          if (config.signal.magnitudes == MagnitudeMode::FixedProfile) {
            const auto r = greedy_guarantee(mu, gp.s, m, sigma, alpha, config.signal.x_min, config.signal.x_max);
            rep = e.kind == EstimatorKind::Omp ? r.omp : r.thresholding;
          }
          break;
        case EstimatorKind::Bpdn:
          rep = e.parameter ? bpdn_guarantee_explicit(mu, gp.s, m, sigma, *e.parameter)
                            : bpdn_guarantee(mu, gp.s, m, sigma, alpha);
          break;
        case EstimatorKind::Dantzig:
          if (!e.parameter) rep = dantzig_guarantee(mu, gp.s, m, sigma, alpha);
          break;
      }
      if (rep && rep->applies && std::isfinite(rep->sq_error_bound)) row.bound = rep->sq_error_bound;
      table.rows.push_back(row);
    }
  }
  return table;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Dictionary dict = build_dictionary(config.dictionary);
  ExperimentResult res;
  res.run = run_trials(config, dict);
  res.table = aggregate(config, dict, res.run);
  return res;
}

void check_experiment_kind(const ExperimentConfig& config) {
  if (config.kind == ExperimentKind::MedianError && config.signal.magnitudes != MagnitudeMode::FixedProfile)
    bad_spec("median experiment needs fixed-profile signals");
  if (config.kind == ExperimentKind::MseVsSnr && config.signal.magnitudes != MagnitudeMode::GaussianNormalized)
    bad_spec("MSE vs SNR experiment needs gaussian-normalized signals");
  if (config.kind == ExperimentKind::MseVsSparsity && config.sparsity.empty())
    bad_spec("MSE vs sparsity experiment needs a sparsity grid");
}

namespace {

ExperimentTable run_as(const ExperimentConfig& config, ExperimentKind kind) {
  ExperimentConfig c = config;
  c.kind = kind;
  check_experiment_kind(c);
  return run_experiment(c).table;
}

}  // namespace

ExperimentTable median_error_experiment(const ExperimentConfig& config) {
  return run_as(config, ExperimentKind::MedianError);
}

ExperimentTable mse_vs_snr_experiment(const ExperimentConfig& config) {
  return run_as(config, ExperimentKind::MseVsSnr);
}

ExperimentTable mse_vs_sparsity_experiment(const ExperimentConfig& config) {
  return run_as(config, ExperimentKind::MseVsSparsity);
}

std::string trials_to_csv(const std::vector<TrialRecord>& records) {
  std::string out = "grid_index,trial_index,estimator,sq_error,support_exact,solver_gap,seed_used\n";
  for (const auto& r : records) {
    out += std::to_string(r.grid_index) + ',' + std::to_string(r.trial_index) + ',' +
           std::string(to_string(r.estimator)) + ',';
    if (!r.failed) out += format_double(r.sq_error);
    out += ',';
    out += r.support_exact ? '1' : '0';
    out += ',';
    if (r.solver_gap) out += format_double(*r.solver_gap);
    out += ',' + std::to_string(r.seed_used) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

template <class T>
T parse_field(const std::string& s, const char* what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    bad_spec(std::string("bad ") + what + " field '" + s + "' in trial CSV");
  return v;
}

}  // namespace

std::vector<TrialRecord> trials_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) ||
      line != "grid_index,trial_index,estimator,sq_error,support_exact,solver_gap,seed_used")
    bad_spec("trial CSV header mismatch");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) bad_spec("trial CSV row needs 7 fields");
    TrialRecord r;
    r.grid_index = parse_field<Index>(f[0], "grid_index");
    r.trial_index = parse_field<Index>(f[1], "trial_index");
    const auto kind = parse_estimator(f[2]);
    if (!kind) bad_spec("unknown estimator '" + f[2] + "' in trial CSV");
    r.estimator = *kind;
    if (f[3].empty()) {
      r.failed = true;
    } else {
      r.sq_error = parse_field<double>(f[3], "sq_error");
    }
    if (f[4] != "0" && f[4] != "1") bad_spec("bad support_exact field in trial CSV");
    r.support_exact = f[4] == "1";
    if (!f[5].empty()) r.solver_gap = parse_field<double>(f[5], "solver_gap");
    r.seed_used = parse_field<std::uint64_t>(f[6], "seed_used");
    out.push_back(r);
  }
  return out;
}

std::string table_to_csv(const ExperimentTable& table) {
  std::string out =
      "grid_index,axis_name,axis,sigma2,s,estimator,parameter,statistic,value,trials,failures,bound,crb\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.grid_index) + ',' + table.axis_name + ',' + format_double(r.axis) + ',' + format_double(r.sigma2) + ',' +
           std::to_string(r.s) + ',' + std::string(to_string(r.estimator)) + ',' + format_double(r.parameter) +
           ',' + table.statistic + ',' + format_double(r.value) + ',' + std::to_string(r.trials) + ',' +
           std::to_string(r.failures) + ',';
    if (r.bound) out += format_double(*r.bound);
    out += ',' + format_double(r.crb) + '\n';
  }
  return out;
}

nlohmann::ordered_json manifest_json(const ExperimentConfig& config, double wall_seconds,
                                     const std::vector<std::string>& files) {
  nlohmann::ordered_json j;
  j["experiment"] = std::string(to_string(config.kind));
  j["master_seed"] = config.master_seed;
  j["code_version"] = SPARSE_GUARANTEES_VERSION;
  j["wall_time_seconds"] = wall_seconds;
  j["files"] = files;
  j["config"] = to_json(config);
  return j;
}

void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                              const ExperimentResult& result, double wall_seconds) {
  write_file_atomic(dir / "trials.csv", trials_to_csv(result.run.records));
  write_file_atomic(dir / "table.csv", table_to_csv(result.table));
  write_file_atomic(dir / "manifest.json",
                    manifest_json(config, wall_seconds, {"trials.csv", "table.csv"}).dump(2) + "\n");
}

}  // namespace sparse_guarantees
