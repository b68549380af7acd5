#include "sparse_guarantees/verify.hpp"

#include <cmath>
#include <sstream>

#include "sparse_guarantees/experiments.hpp"
#include "sparse_guarantees/guarantees.hpp"
#include "sparse_guarantees/io.hpp"

namespace sparse_guarantees {

namespace {

constexpr std::uint64_t kVerifyDomain = 0x5E81F;

CheckResult check_coherence() {
  CheckResult r{"two-ortho coherence", true, {}};
  for (Index n : {Index{256}, Index{512}}) {
    const double mu = coherence(build_two_ortho_hadamard(n));
    const double want = 1.0 / std::sqrt(static_cast<double>(n));
    const double err = std::abs(mu - want);
    if (err > 1e-12) r.passed = false;
    r.detail += "n=" + std::to_string(n) + " err=" + format_double(err) + " ";
  }
  return r;
}

CheckResult check_coherence_bounds(std::uint64_t seed) {
  CheckResult r{"coherence bounds vs exact RIC/ROP", true, {}};
  double worst = -1e300;
  for (int k = 0; k < 10; ++k) {
    const Dictionary d = build_random_gaussian(8, 14, derive_seed(seed, kVerifyDomain + k));
    const double mu = coherence(d);
    for (Index s = 1; s <= 3; ++s) {
      const ExactRics e = exact_rics(d, s);
      worst = std::max(worst, e.delta - ric_bound(mu, s));
      worst = std::max(worst, e.theta - rop_bound(mu, s, s));
      if (e.delta > ric_bound(mu, s) + 1e-10 || e.theta > rop_bound(mu, s, s) + 1e-10) r.passed = false;
    }
  }
  r.detail = "max(exact - bound)=" + format_double(worst);
  return r;
}

CheckResult check_solvers(std::uint64_t seed) {
  CheckResult r{"solver certificates", true, {}};
  double worst_gap = 0.0;
  double worst_feas = 0.0;
  double worst_ds_gap = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Index n = 16 + 2 * k;
    const Index m = 2 * n;
    const Dictionary d = build_random_gaussian(n, m, derive_seed(seed, kVerifyDomain + 100 + k));
    RngStream rng(derive_seed(seed, kVerifyDomain + 200), static_cast<std::uint64_t>(k));
    const Vector b = gaussian(rng, n);
    const double corr = (d.matrix().transpose() * b).cwiseAbs().maxCoeff();

    const double gamma = 0.2 * corr;
    const Estimate bp = bpdn_estimate(d, b, gamma);
    const double gap = bp.diagnostics.duality_gap.value_or(1e300);
    const double rel = gap / std::max(1.0, std::abs(bp.diagnostics.objective.value_or(1.0)));
    worst_gap = std::max(worst_gap, rel);
    if (rel > 1e-8) r.passed = false;

    const double tau = 0.2 * corr;
    const Estimate ds = dantzig_estimate(d, b, tau);
    const double feas =
        (d.matrix().transpose() * (b - d.matrix() * ds.coefficients)).cwiseAbs().maxCoeff() - tau;
    worst_feas = std::max(worst_feas, feas);
    if (feas > 1e-8) r.passed = false;
    const double ds_gap = ds.diagnostics.duality_gap.value_or(0.0);
    worst_ds_gap = std::max(worst_ds_gap, ds_gap);
    if (ds_gap > 1e-7 * std::max(1.0, ds.coefficients.lpNorm<1>())) r.passed = false;
  }
  r.detail = "bpdn rel gap=" + format_double(worst_gap) + " dantzig excess=" + format_double(worst_feas) +
             " dantzig gap=" + format_double(worst_ds_gap);
  return r;
}

CheckResult check_crb(std::uint64_t seed, int threads, int trials) {
  CheckResult r{"oracle MSE vs CRB", true, {}};
  ExperimentConfig c = default_config(ExperimentKind::Custom);
  c.dictionary = {DictionaryKind::TwoOrthoHadamard, 256, 512, 0, {}};
  c.signal.s = 5;
  c.estimators = {EstimatorSpec{EstimatorKind::Oracle, 1.0, std::nullopt, std::nullopt}};
  c.sigma2 = {1e-4};
  c.trials = trials;
  c.master_seed = seed;
  c.threads = threads;
  const ExperimentResult res = run_experiment(c);
  const TableRow& row = res.table.rows.front();
  const double rel = std::abs(row.value - row.crb) / row.crb;
  r.passed = rel <= 0.05 && row.failures == 0;
  r.detail = "mse=" + format_double(row.value) + " crb=" + format_double(row.crb) + " rel=" + format_double(rel);
  return r;
}

CheckResult check_file_dictionary(const std::filesystem::path& path) {
  CheckResult r{"dictionary file " + path.string(), true, {}};
  const Dictionary d = load_dictionary_csv(path);
  r.detail = std::to_string(d.rows()) + "x" + std::to_string(d.atoms()) +
             " mu=" + format_double(coherence(d));
  if (d.normalization_warning())
    r.detail += " warning: columns were not unit norm (max deviation " +
                format_double(d.input_norm_deviation()) + "), re-normalized";
  return r;
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& options, std::ostream& out) {
  std::vector<CheckResult> results;
  auto run = [&](const std::string& name, auto&& fn) {
    CheckResult r;
    try {
      r = fn();
    } catch (const Error& e) {
      r.name = name;
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    results.push_back(std::move(r));
  };
  if (options.dictionary_path) run("dictionary file", [&] { return check_file_dictionary(*options.dictionary_path); });
  run("two-ortho coherence", [] { return check_coherence(); });
  run("coherence bounds vs exact RIC/ROP", [&] { return check_coherence_bounds(options.seed); });
  run("solver certificates", [&] { return check_solvers(options.seed); });
  run("oracle MSE vs CRB", [&] { return check_crb(options.seed, options.threads, options.crb_trials); });
  return results;
}

}  // namespace sparse_guarantees
