#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "sparse_guarantees/experiments.hpp"
#include "sparse_guarantees/guarantees.hpp"
#include "sparse_guarantees/io.hpp"

using namespace sparse_guarantees;

namespace {

ExperimentConfig small_config(ExperimentKind kind = ExperimentKind::Custom) {
  ExperimentConfig c = default_config(kind);
  c.dictionary = {DictionaryKind::TwoOrthoHadamard, 32, 64, 0, {}};
  c.signal.s = 3;
  c.sigma2 = {1e-6, 1e-2};
  c.trials = 12;
  c.master_seed = 5;
  // BPDN's second probability factor 1 - e^(-s/7) caps it below 0.5 for small s.
  if (kind == ExperimentKind::MedianError) c.estimators[3].min_probability = 0.2;
  return c;
}

void expect_spec_error(const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidSpec) << e.what();
  }
}

}  // namespace

TEST(Profiles, ShapesAndRange) {
  RngStream rng(1, 0);
  for (int p = 0; p < kProfileCount; ++p)
    for (Index s : {1, 2, 7}) {
      const auto v = profile_magnitudes(p, s, 0.1, 1.0, rng);
      ASSERT_EQ(static_cast<Index>(v.size()), s);
      for (double x : v) {
        EXPECT_GE(x, 0.1);
        EXPECT_LE(x, 1.0);
      }
    }
  EXPECT_EQ(profile_magnitudes(0, 3, 0.1, 1.0, rng), (std::vector<double>{1.0, 1.0, 1.0}));
  EXPECT_EQ(profile_magnitudes(1, 3, 0.1, 1.0, rng), (std::vector<double>{0.1, 0.1, 0.1}));
  const auto lin = profile_magnitudes(2, 4, 0.1, 1.0, rng);
  EXPECT_EQ(lin.front(), 0.1);
  EXPECT_EQ(lin.back(), 1.0);
  EXPECT_NEAR(lin[1], 0.4, 1e-15);
  const auto geo = profile_magnitudes(3, 3, 0.1, 1.0, rng);
  EXPECT_NEAR(geo[1], std::sqrt(0.1), 1e-15);
  EXPECT_EQ(geo.back(), 1.0);
  EXPECT_THROW(profile_magnitudes(8, 3, 0.1, 1.0, rng), Error);
}

TEST(Profiles, EqualBoundsGiveConstantMagnitude) {
  SignalSpec spec{5, 0.3, 0.3, MagnitudeMode::FixedProfile, SupportMode::Fixed, 8};
  for (int p = 0; p < kProfileCount; ++p) {
    RngStream rng(2, static_cast<std::uint64_t>(p));
    const SparseSignal x = gen_signal(spec, 40, rng, p);
    for (Index k = 0; k < 5; ++k) EXPECT_NEAR(std::abs(x.values()[k]), 0.3, 1e-15);
  }
}

TEST(GenSignal, GaussianNormalizedHasUnitEnergy) {
  SignalSpec spec;
  spec.s = 6;
  for (std::uint64_t k = 0; k < 50; ++k) {
    RngStream rng(3, k);
    const SparseSignal x = gen_signal(spec, 100, rng);
    EXPECT_NEAR(x.energy(), 1.0, 1e-14);
    EXPECT_EQ(x.sparsity(), 6);
    EXPECT_TRUE(std::is_sorted(x.support().begin(), x.support().end()));
    EXPECT_LT(x.support().back(), 100);
  }
}

TEST(GenSignal, DeterministicPerStream) {
  SignalSpec spec{7, 0.1, 1.0, MagnitudeMode::FixedProfile, SupportMode::Fixed, 8};
  RngStream a(9, 4), b(9, 4), c(9, 5);
  const SparseSignal xa = gen_signal(spec, 1024, a, 7);
  const SparseSignal xb = gen_signal(spec, 1024, b, 7);
  const SparseSignal xc = gen_signal(spec, 1024, c, 7);
  EXPECT_EQ(xa.support(), xb.support());
  EXPECT_EQ(xa.values(), xb.values());
  EXPECT_NE(xa.support(), xc.support());
}

TEST(GenSignal, SignsAreMixed) {
  SignalSpec spec{7, 0.1, 1.0, MagnitudeMode::FixedProfile, SupportMode::Fixed, 8};
  int negative = 0, total = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    RngStream rng(10, k);
    const SparseSignal x = gen_signal(spec, 64, rng, static_cast<int>(k % 8));
    for (Index i = 0; i < 7; ++i) negative += x.values()[i] < 0;
    total += 7;
  }
  EXPECT_NEAR(static_cast<double>(negative) / total, 0.5, 0.05);
}

TEST(Config, Defaults) {
  const ExperimentConfig med = default_config(ExperimentKind::MedianError);
  EXPECT_EQ(med.dictionary.n, 512);
  EXPECT_EQ(med.signal.s, 7);
  EXPECT_EQ(med.signal.magnitudes, MagnitudeMode::FixedProfile);
  ASSERT_EQ(med.sigma2.size(), 10u);
  EXPECT_EQ(med.sigma2.front(), 1e-8);
  EXPECT_EQ(med.sigma2.back(), 1.0);
  EXPECT_EQ(med.estimators.size(), 5u);
  const ExperimentConfig snr_cfg = default_config(ExperimentKind::MseVsSnr);
  EXPECT_EQ(snr_cfg.dictionary.n, 256);
  EXPECT_EQ(snr_cfg.signal.s, 5);
  EXPECT_EQ(*snr_cfg.estimators[0].alpha, 1.0);
  const ExperimentConfig sp = default_config(ExperimentKind::MseVsSparsity);
  EXPECT_EQ(sp.sparsity.front(), 2);
  EXPECT_EQ(sp.sparsity.back(), 30);
  EXPECT_EQ(grid_points(sp).size(), sp.sparsity.size());
}

TEST(Config, ParseOverlaysDefaults) {
  const auto j = nlohmann::json::parse(R"({
    "dictionary": {"kind": "random_gaussian", "n": 20, "m": 50},
    "signal": {"s": 4, "magnitude_mode": "fixed_profile", "x_min": 0.5},
    "estimators": ["omp", {"name": "bpdn", "parameter": 0.3}, {"name": "ds", "alpha": 2}],
    "sigma2": {"min": 1e-4, "max": 1e-2, "count": 3},
    "trials": 7, "master_seed": 42, "threads": 2,
    "solver": {"bpdn_tol": 1e-9}
  })");
  const ExperimentConfig c = parse_experiment_config(j, ExperimentKind::Custom);
  EXPECT_EQ(c.dictionary.kind, DictionaryKind::RandomGaussian);
  EXPECT_EQ(c.dictionary.m, 50);
  EXPECT_EQ(c.dictionary.seed, 42u);
  EXPECT_EQ(c.signal.s, 4);
  EXPECT_EQ(c.signal.x_min, 0.5);
  EXPECT_EQ(c.signal.magnitudes, MagnitudeMode::FixedProfile);
  ASSERT_EQ(c.estimators.size(), 3u);
  EXPECT_EQ(c.estimators[0].kind, EstimatorKind::Omp);
  EXPECT_EQ(*c.estimators[0].alpha, 1.0);
  EXPECT_EQ(*c.estimators[1].parameter, 0.3);
  EXPECT_FALSE(c.estimators[1].alpha.has_value());
  EXPECT_EQ(c.estimators[2].kind, EstimatorKind::Dantzig);
  EXPECT_EQ(*c.estimators[2].alpha, 2.0);
  ASSERT_EQ(c.sigma2.size(), 3u);
  EXPECT_NEAR(c.sigma2[1], 1e-3, 1e-18);
  EXPECT_EQ(c.trials, 7);
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.bpdn_tol, 1e-9);
  EXPECT_EQ(c.dantzig_tol, 1e-9);
}

TEST(Config, TwoOrthoForcesSquareBlocks) {
  const auto c = parse_experiment_config(nlohmann::json::parse(R"({"dictionary": {"n": 64, "m": 10}})"),
                                         ExperimentKind::Custom);
  EXPECT_EQ(c.dictionary.m, 128);
}

TEST(Config, ScalarSigma2AndJsonRoundTrip) {
  const auto c = parse_experiment_config(nlohmann::json::parse(R"({"sigma2": 0.25})"), ExperimentKind::MseVsSnr);
  EXPECT_EQ(c.sigma2, std::vector<double>{0.25});
  const auto echo = to_json(c);
  const auto again = parse_experiment_config(nlohmann::json::parse(echo.dump()), ExperimentKind::MseVsSnr);
  EXPECT_EQ(to_json(again).dump(), echo.dump());
}

TEST(Config, RejectsBadInput) {
  const auto parse = [](const char* text) {
    return [text] { parse_experiment_config(nlohmann::json::parse(text), ExperimentKind::Custom); };
  };
  expect_spec_error(parse(R"({"bogus": 1})"));
  expect_spec_error(parse(R"({"signal": {"sparsity": 3}})"));
  expect_spec_error(parse(R"({"estimators": ["lasso"]})"));
  expect_spec_error(parse(R"({"estimators": [{"alpha": 1}]})"));
  expect_spec_error(parse(R"({"dictionary": {"kind": "wavelet"}})"));
  expect_spec_error(parse(R"({"trials": "ten"})"));
  expect_spec_error(parse(R"({"trials": 2.5})"));
  expect_spec_error(parse(R"({"sigma2": {"min": 1e-4}})"));
  expect_spec_error(parse(R"({"master_seed": -3})"));
  expect_spec_error(parse(R"({"signal": {"magnitude_mode": "uniform"}})"));
}

TEST(Config, Validation) {
  const auto bad = [](const std::function<void(ExperimentConfig&)>& edit) {
    ExperimentConfig c = small_config();
    edit(c);
    expect_spec_error([&] { validate(c, 32, 64); });
  };
  EXPECT_NO_THROW(validate(small_config(), 32, 64));
  bad([](auto& c) { c.trials = 0; });
  bad([](auto& c) { c.trials = 1'000'001; });
  bad([](auto& c) { c.threads = 0; });
  bad([](auto& c) { c.sigma2 = {}; });
  bad([](auto& c) { c.sigma2 = {-1.0}; });
  bad([](auto& c) { c.sigma2 = {std::numeric_limits<double>::infinity()}; });
  bad([](auto& c) { c.signal.s = 33; });
  bad([](auto& c) { c.signal.s = 0; });
  bad([](auto& c) { c.estimators.push_back(c.estimators.front()); });
  bad([](auto& c) { c.estimators.clear(); });
  bad([](auto& c) { c.estimators[0].alpha = -0.5; });
  bad([](auto& c) { c.estimators[3].parameter = 0.0; });
  bad([](auto& c) { c.estimators[3].min_probability = 1.5; });
  bad([](auto& c) { c.bpdn_tol = 0.0; });
  ExperimentConfig tight = small_config();
  tight.signal.s = 3;
  expect_spec_error([&] { validate(tight, 4, 4); });
}

TEST(Config, ExperimentKindChecks) {
  ExperimentConfig c = small_config(ExperimentKind::MedianError);
  c.signal.magnitudes = MagnitudeMode::GaussianNormalized;
  expect_spec_error([&] { check_experiment_kind(c); });
  ExperimentConfig d = small_config(ExperimentKind::MseVsSparsity);
  d.sparsity.clear();
  expect_spec_error([&] { check_experiment_kind(d); });
}

TEST(Streams, DistinctIds) {
  EXPECT_EQ(trial_stream_id(0, 0), 0u);
  EXPECT_EQ(trial_stream_id(3, 17), 3'000'017u);
  EXPECT_NE(trial_stream_id(1, 0), trial_stream_id(0, 999'999));
}

TEST(AlphaPolicy, ExplicitMinProbabilityAndDefault) {
  EstimatorSpec e{EstimatorKind::Bpdn, 0.7, std::nullopt, std::nullopt};
  EXPECT_EQ(resolve_alpha(e, 1024, 7), 0.7);
  e.alpha.reset();
  EXPECT_EQ(resolve_alpha(e, 1024, 7), 1.0);
  e.min_probability = 0.5;
  // (1 - 1017^-a)(1 - e^-1) = 0.5 solved for a.
  const double want = -std::log(1.0 - 0.5 / (1.0 - std::exp(-1.0))) / std::log(1017.0);
  EXPECT_NEAR(resolve_alpha(e, 1024, 7), want, 1e-9);
  EXPECT_NEAR(want, 0.226, 5e-4);
  EXPECT_EQ(resolve_alpha({EstimatorKind::Dantzig, std::nullopt, 0.5, std::nullopt}, 1024, 7), 0.0);
  EXPECT_EQ(resolve_alpha({EstimatorKind::Omp, std::nullopt, 0.5, std::nullopt}, 1024, 7), 0.0);
  expect_spec_error([] { resolve_alpha({EstimatorKind::Bpdn, std::nullopt, 0.9, std::nullopt}, 1024, 7); });
}

TEST(AlphaPolicy, Parameters) {
  const EstimatorSpec bp{EstimatorKind::Bpdn, 1.0, std::nullopt, std::nullopt};
  EXPECT_EQ(resolve_parameter(bp, 512, 5, 0.1), recommended_gamma(512, 5, 0.1, 1.0));
  const EstimatorSpec ds{EstimatorKind::Dantzig, 0.5, std::nullopt, 0.25};
  EXPECT_EQ(resolve_parameter(ds, 512, 5, 0.1), 0.25);
  EXPECT_EQ(resolve_parameter({EstimatorKind::Omp, 1.0, std::nullopt, std::nullopt}, 512, 5, 0.1), 0.0);
}

TEST(Trials, RecordLayout) {
  const ExperimentConfig c = small_config();
  const TrialRun run = run_trials(c);
  ASSERT_EQ(run.records.size(), 2u * 12u * 5u);
  ASSERT_EQ(run.side.size(), 24u);
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    EXPECT_EQ(r.grid_index, static_cast<Index>(i / 60));
    EXPECT_EQ(r.trial_index, static_cast<Index>((i / 5) % 12));
    EXPECT_EQ(static_cast<std::size_t>(r.estimator), i % 5);
    EXPECT_EQ(r.seed_used, trial_stream_id(r.grid_index, r.trial_index));
    EXPECT_FALSE(r.failed);
    EXPECT_TRUE(std::isfinite(r.sq_error));
    EXPECT_EQ(r.solver_gap.has_value(),
              r.estimator == EstimatorKind::Bpdn || r.estimator == EstimatorKind::Dantzig);
  }
}

TEST(Trials, IndependentOfThreadCount) {
  ExperimentConfig c = small_config();
  c.trials = 20;
  const std::string one = trials_to_csv(run_trials(c).records);
  c.threads = 3;
  const std::string three = trials_to_csv(run_trials(c).records);
  c.threads = 8;
  const std::string eight = trials_to_csv(run_trials(c).records);
  EXPECT_EQ(one, three);
  EXPECT_EQ(one, eight);
  c.master_seed = 6;
  EXPECT_NE(one, trials_to_csv(run_trials(c).records));
}

TEST(Trials, ExactSupportMatchesOracleError) {
  ExperimentConfig c = small_config();
  c.trials = 40;
  const TrialRun run = run_trials(c);
  std::map<std::pair<Index, Index>, double> oracle_error;
  for (const auto& r : run.records)
    if (r.estimator == EstimatorKind::Oracle) oracle_error[{r.grid_index, r.trial_index}] = r.sq_error;
  int checked = 0;
  for (const auto& r : run.records) {
    if (r.estimator != EstimatorKind::Omp && r.estimator != EstimatorKind::Thresholding) continue;
    if (!r.support_exact) continue;
    EXPECT_NEAR(r.sq_error, oracle_error.at({r.grid_index, r.trial_index}), 1e-10);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(Trials, FixedSupportKeepsSignalAcrossNoiseGrid) {
  ExperimentConfig c = small_config(ExperimentKind::MedianError);
  c.signal.s = 3;
  c.sigma2 = {1e-6, 1e-3, 1e-1};
  c.estimators = {EstimatorSpec{EstimatorKind::Oracle, std::nullopt, std::nullopt, std::nullopt}};
  const TrialRun run = run_trials(c);
  for (Index t = 0; t < c.trials; ++t) {
    const double base = run.side[static_cast<std::size_t>(t)].crb / c.sigma2[0];
    for (std::size_t g = 1; g < 3; ++g)
      EXPECT_NEAR(run.side[g * 12 + static_cast<std::size_t>(t)].crb / c.sigma2[g], base, 1e-9 * base);
  }
  // Slots repeat with period `profiles`.
  EXPECT_NEAR(run.side[0].signal_energy, run.side[8].signal_energy, 1e-15);
}

TEST(Trials, OracleMeanMatchesCrb) {
  ExperimentConfig c = small_config();
  c.dictionary = {DictionaryKind::TwoOrthoHadamard, 64, 128, 0, {}};
  c.sigma2 = {1e-3};
  c.trials = 4000;
  c.threads = 4;
  c.estimators = {EstimatorSpec{EstimatorKind::Oracle, std::nullopt, std::nullopt, std::nullopt}};
  const ExperimentResult res = run_experiment(c);
  ASSERT_EQ(res.table.rows.size(), 1u);
  const auto& row = res.table.rows[0];
  EXPECT_LT(std::abs(row.value - row.crb) / row.crb, 0.05) << row.value << " vs " << row.crb;
  EXPECT_FALSE(row.bound.has_value());
}

TEST(Trials, OmpRecoversSupportAtLowNoise) {
  ExperimentConfig c = small_config(ExperimentKind::MedianError);
  c.dictionary = {DictionaryKind::TwoOrthoHadamard, 64, 128, 0, {}};
  c.signal = {3, 0.5, 1.0, MagnitudeMode::FixedProfile, SupportMode::Fixed, 8};
  c.sigma2 = {1e-8};
  c.trials = 64;
  const TrialRun run = run_trials(c);
  for (const auto& r : run.records)
    if (r.estimator == EstimatorKind::Omp || r.estimator == EstimatorKind::Oracle) EXPECT_TRUE(r.support_exact);
}

TEST(Aggregate, RecomputedFromCsv) {
  ExperimentConfig c = small_config(ExperimentKind::MseVsSnr);
  c.trials = 15;
  const ExperimentResult res = run_experiment(c);
  const auto records = trials_from_csv(trials_to_csv(res.run.records));
  EXPECT_EQ(res.table.axis_name, "snr");
  EXPECT_EQ(res.table.statistic, "mean");
  for (const auto& row : res.table.rows) {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : records)
      if (r.grid_index == row.grid_index && r.estimator == row.estimator) {
        sum += r.sq_error;
        ++count;
      }
    EXPECT_EQ(count, 15);
    EXPECT_NEAR(row.value, sum / count, 1e-12 * std::max(1.0, std::abs(row.value)));
    EXPECT_NEAR(row.axis, 1.0 / (32 * row.sigma2), 1e-12 * row.axis);
  }
}

TEST(Aggregate, MedianStatisticAndBounds) {
  ExperimentConfig c = small_config(ExperimentKind::MedianError);
  c.dictionary = {DictionaryKind::TwoOrthoHadamard, 64, 128, 0, {}};
  c.signal = {2, 0.1, 1.0, MagnitudeMode::FixedProfile, SupportMode::Fixed, 8};
  c.sigma2 = {1e-8, 1.0};
  c.trials = 9;
  const ExperimentResult res = run_experiment(c);
  EXPECT_EQ(res.table.statistic, "median");
  EXPECT_EQ(res.table.axis_name, "sigma2");
  const double mu = 1.0 / 8.0;
  for (const auto& row : res.table.rows) {
    std::vector<double> errs;
    for (const auto& r : res.run.records)
      if (r.grid_index == row.grid_index && r.estimator == row.estimator) errs.push_back(r.sq_error);
    std::sort(errs.begin(), errs.end());
    EXPECT_EQ(row.value, errs[4]);
    const double sigma = std::sqrt(row.sigma2);
    switch (row.estimator) {
      case EstimatorKind::Oracle:
      case EstimatorKind::Thresholding:  // 0.1 - 3 mu < 0
        EXPECT_FALSE(row.bound.has_value());
        break;
      case EstimatorKind::Omp:
        EXPECT_EQ(row.bound.has_value(), row.sigma2 < 1e-4);
        break;
      case EstimatorKind::Bpdn: {
        const double alpha = resolve_alpha(c.estimators[3], 128, 2);
        ASSERT_TRUE(row.bound.has_value());
        EXPECT_NEAR(*row.bound, bpdn_guarantee(mu, 2, 128, sigma, alpha).sq_error_bound, 1e-12 * *row.bound);
        break;
      }
      case EstimatorKind::Dantzig:
        ASSERT_TRUE(row.bound.has_value());
        EXPECT_NEAR(*row.bound, dantzig_guarantee(mu, 2, 128, sigma, 0.0).sq_error_bound, 1e-12 * *row.bound);
        break;
    }
  }
}

TEST(Aggregate, FailedTrialsExcludedAndCounted) {
  ExperimentConfig c = small_config();
  c.sigma2 = {1e-2};
  c.trials = 3;
  c.estimators = {EstimatorSpec{EstimatorKind::Omp, 1.0, std::nullopt, std::nullopt},
                  EstimatorSpec{EstimatorKind::Bpdn, 1.0, std::nullopt, std::nullopt}};
  TrialRun run;
  run.side.assign(3, TrialSide{0.5, 1.0});
  for (Index t = 0; t < 3; ++t) {
    run.records.push_back({0, t, EstimatorKind::Omp, 1.0 + static_cast<double>(t), false, std::nullopt, 0, t == 1});
    run.records.push_back({0, t, EstimatorKind::Bpdn, 0.0, false, std::nullopt, 0, true});
  }
  const ExperimentTable table = aggregate(c, build_two_ortho_hadamard(32), run);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0].failures, 1);
  EXPECT_EQ(table.rows[0].trials, 3);
  EXPECT_EQ(table.rows[0].value, 2.0);
  EXPECT_EQ(table.rows[1].failures, 3);
  EXPECT_TRUE(std::isnan(table.rows[1].value));
  EXPECT_EQ(table.rows[0].crb, 0.5);
}

TEST(Csv, TrialRoundTripIsByteExact) {
  std::vector<TrialRecord> recs{
      {0, 0, EstimatorKind::Oracle, 1.2345678901234567e-7, true, std::nullopt, 0, false},
      {0, 0, EstimatorKind::Bpdn, 0.1, false, 3.5e-13, 0, false},
      {1, 4, EstimatorKind::Dantzig, 0.0, false, std::nullopt, 1'000'004, true}};
  const std::string csv = trials_to_csv(recs);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "grid_index,trial_index,estimator,sq_error,support_exact,solver_gap,seed_used");
  EXPECT_NE(csv.find("\n1,4,dantzig,,0,,1000004\n"), std::string::npos);
  const auto back = trials_from_csv(csv);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_TRUE(back[2].failed);
  EXPECT_EQ(back[0].sq_error, recs[0].sq_error);
  EXPECT_EQ(*back[1].solver_gap, 3.5e-13);
  EXPECT_EQ(trials_to_csv(back), csv);
  expect_spec_error([] { trials_from_csv("wrong header\n"); });
  expect_spec_error(
      [] { trials_from_csv("grid_index,trial_index,estimator,sq_error,support_exact,solver_gap,seed_used\n0,0,omp\n"); });
}

TEST(Csv, TableHeaderAndMissingBound) {
  ExperimentTable t;
  t.axis_name = "sigma2";
  t.statistic = "median";
  TableRow r;
  r.axis = 0.5;
  r.sigma2 = 0.5;
  r.s = 3;
  r.estimator = EstimatorKind::Omp;
  r.value = 0.25;
  r.trials = 4;
  r.crb = 0.125;
  t.rows.push_back(r);
  EXPECT_EQ(table_to_csv(t),
            "grid_index,axis_name,axis,sigma2,s,estimator,parameter,statistic,value,trials,failures,bound,crb\n"
            "0,sigma2,0.5,0.5,3,omp,0,median,0.25,4,0,,0.125\n");
}

TEST(Outputs, WritesThreeFilesWithManifest) {
  ExperimentConfig c = small_config();
  c.trials = 3;
  const ExperimentResult res = run_experiment(c);
  const auto dir = std::filesystem::temp_directory_path() / "sg_outputs_test";
  std::filesystem::remove_all(dir);
  write_experiment_outputs(dir, c, res, 1.5);
  EXPECT_EQ(read_file(dir / "trials.csv"), trials_to_csv(res.run.records));
  EXPECT_EQ(read_file(dir / "table.csv"), table_to_csv(res.table));
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["experiment"], "custom");
  EXPECT_EQ(manifest["master_seed"], 5);
  EXPECT_EQ(manifest["wall_time_seconds"], 1.5);
  EXPECT_TRUE(manifest.contains("code_version"));
  EXPECT_EQ(manifest["config"]["trials"], 3);
  std::filesystem::remove_all(dir);
}

TEST(Experiments, KindSpecificEntryPoints) {
  ExperimentConfig c = small_config(ExperimentKind::MseVsSparsity);
  c.sparsity = {1, 3};
  c.trials = 4;
  const ExperimentTable t = mse_vs_sparsity_experiment(c);
  EXPECT_EQ(t.axis_name, "s");
  ASSERT_EQ(t.rows.size(), 10u);
  EXPECT_EQ(t.rows[0].axis, 1.0);
  EXPECT_EQ(t.rows[5].s, 3);
  ExperimentConfig m = small_config(ExperimentKind::MedianError);
  m.trials = 3;
  EXPECT_EQ(median_error_experiment(m).statistic, "median");
  ExperimentConfig bad = small_config(ExperimentKind::MseVsSnr);
  bad.signal.magnitudes = MagnitudeMode::FixedProfile;
  expect_spec_error([&] { mse_vs_snr_experiment(bad); });
}
