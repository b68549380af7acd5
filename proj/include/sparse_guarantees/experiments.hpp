#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparse_guarantees/dictionary.hpp"
#include "sparse_guarantees/estimators.hpp"

namespace sparse_guarantees {

struct DictionarySpec {
  DictionaryKind kind = DictionaryKind::TwoOrthoHadamard;
  Index n = 256;
  Index m = 512;  // ignored for two-ortho (always 2n)
  std::uint64_t seed = 0;
  std::string path;
};

Dictionary build_dictionary(const DictionarySpec& spec);

enum class MagnitudeMode { FixedProfile, GaussianNormalized };
enum class SupportMode { Fixed, Random };

struct SignalSpec {
  Index s = 5;
  double x_min = 0.1;
  double x_max = 1.0;
  MagnitudeMode magnitudes = MagnitudeMode::GaussianNormalized;
  SupportMode support = SupportMode::Random;
  /// Number of fixed magnitude profiles cycled through by trial index.
  int profiles = 8;
};

inline constexpr int kProfileCount = 8;

/// Magnitude profile `profile` (0..7) of s entries in [x_min, x_max]:
/// all x_max, all x_min, linear ramp, geometric ramp, one small and the rest
/// large, one large and the rest small, alternating, uniform random.
std::vector<double> profile_magnitudes(int profile, Index s, double x_min, double x_max,
                                       RngStream& stream);

/// Random support of size spec.s in [0, m) with random signs; magnitudes
/// from `profile` (fixed-profile mode) or from a normalized Gaussian draw.
SparseSignal gen_signal(const SignalSpec& spec, Index m, RngStream& stream, int profile = 0);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Oracle;
  /// alpha for the tau / gamma selectors and for the reported bound.
  std::optional<double> alpha;
  /// Pick the smallest alpha whose guarantee probability reaches this.
  std::optional<double> min_probability;
  /// Explicit gamma (BPDN) or tau (Dantzig); overrides the selectors.
  std::optional<double> parameter;
};

enum class ExperimentKind { MedianError, MseVsSnr, MseVsSparsity, Custom };

std::string_view to_string(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Custom;
  DictionarySpec dictionary;
  SignalSpec signal;
  std::vector<EstimatorSpec> estimators;
  /// Noise variances of the grid; MseVsSparsity uses only the first.
  std::vector<double> sigma2;
  /// Support sizes of the grid (MseVsSparsity only).
  std::vector<Index> sparsity;
  Index trials = 100;
  std::uint64_t master_seed = 1;
  int threads = 1;
  double bpdn_tol = 1e-10;
  double dantzig_tol = 1e-9;
};

/// Defaults mirroring each published experiment design.
ExperimentConfig default_config(ExperimentKind kind);

/// Overlays a JSON object on default_config(kind). Throws InvalidSpec.
ExperimentConfig parse_experiment_config(const nlohmann::json& json, ExperimentKind kind);
nlohmann::ordered_json to_json(const ExperimentConfig& config);

/// Throws InvalidSpec on inconsistent settings.
void validate(const ExperimentConfig& config, Index dictionary_rows, Index dictionary_atoms);

struct GridPoint {
  double sigma2;
  Index s;
};

std::vector<GridPoint> grid_points(const ExperimentConfig& config);

/// Stream id of trial `trial` at grid point `grid`.
std::uint64_t trial_stream_id(Index grid, Index trial);

struct TrialRecord {
  Index grid_index = 0;
  Index trial_index = 0;
  EstimatorKind estimator = EstimatorKind::Oracle;
  double sq_error = 0.0;
  bool support_exact = false;
  std::optional<double> solver_gap;
  std::uint64_t seed_used = 0;
  /// Solver failure; excluded from aggregates, counted as a failure.
  bool failed = false;
};

/// Everything a table needs besides the records.
struct TrialSide {
  double crb = 0.0;
  double signal_energy = 0.0;
};

struct TrialRun {
  std::vector<TrialRecord> records;  // sorted by (grid, trial, estimator)
  std::vector<TrialSide> side;       // indexed grid * trials + trial
};

TrialRun run_trials(const ExperimentConfig& config);
TrialRun run_trials(const ExperimentConfig& config, const Dictionary& dict);

/// alpha used by an estimator at a grid point under its parameter policy.
double resolve_alpha(const EstimatorSpec& spec, Index m, Index s);
/// gamma (BPDN) / tau (Dantzig) at a grid point; 0 for the others.
double resolve_parameter(const EstimatorSpec& spec, Index m, Index s, double sigma);

struct TableRow {
  Index grid_index = 0;
  double axis = 0.0;
  double sigma2 = 0.0;
  Index s = 0;
  EstimatorKind estimator = EstimatorKind::Oracle;
  double parameter = 0.0;
  double value = 0.0;  // median or mean sq_error over successful trials
  Index trials = 0;
  Index failures = 0;
  std::optional<double> bound;  // present only where the guarantee applies
  double crb = 0.0;             // mean CRB over the grid point's trials
};

struct ExperimentTable {
  ExperimentKind kind = ExperimentKind::Custom;
  std::string axis_name;  // "sigma2", "snr" or "s"
  std::string statistic;  // "median" or "mean"
  std::vector<TableRow> rows;
};

ExperimentTable aggregate(const ExperimentConfig& config, const Dictionary& dict,
                          const TrialRun& run);

/// Shape checks specific to config.kind (signal mode, sparsity grid).
void check_experiment_kind(const ExperimentConfig& config);

ExperimentTable median_error_experiment(const ExperimentConfig& config);
ExperimentTable mse_vs_snr_experiment(const ExperimentConfig& config);
ExperimentTable mse_vs_sparsity_experiment(const ExperimentConfig& config);

/// Runs and aggregates; the table and the trial records share one run.
struct ExperimentResult {
  TrialRun run;
  ExperimentTable table;
};
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string trials_to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> trials_from_csv(const std::string& csv);
std::string table_to_csv(const ExperimentTable& table);

/// Config echo, master seed, code version and wall time.
nlohmann::ordered_json manifest_json(const ExperimentConfig& config, double wall_seconds,
                                     const std::vector<std::string>& files);

/// trials.csv, table.csv and manifest.json under `dir`, each written atomically.
void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                              const ExperimentResult& result, double wall_seconds);

}  // namespace sparse_guarantees
