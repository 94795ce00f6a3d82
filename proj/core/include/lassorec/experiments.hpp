#pragma once

// Simulation harness: the two-sinusoid frequency-detection study, Monte
// Carlo l2 rates on Gaussian designs, and active-set size checks. Every
// replication draws from derive_seed(seed, stream, index), so results do
// not depend on the thread count.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lassorec/io.hpp"
#include "lassorec/lasso.hpp"
#include "lassorec/model.hpp"

namespace lassorec {

// Exact minimum of ||beta - path(lambda)||^2 over the computed path range.
// Each segment is linear in lambda, so the error is a quadratic per segment.
struct BestLambda {
  double lambda = 0.0;
  double sq_error = 0.0;
  Vector coefficients;
};

BestLambda best_l2_on_path(const LassoPath& path, const Vector& beta);

// True iff column k is nonzero at every lambda in [lambda_min, lambda_max).
bool always_active(const LassoPath& path, int k);

// Largest active set over the segments of the path.
int max_active_size(const LassoPath& path);

// lambda_max * ratio^(i / (points - 1)), i = 0..points-1.
std::vector<double> log_lambda_grid(double lambda_max, double ratio, int points);

// Type-7 sample quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double q);

// ---------------------------------------------------------------------------
// Frequency detection.

// A frequency num / den in cycles per time unit. Kept rational so that
// sin(2 pi omega t) is reduced exactly for integer t.
struct Frequency {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / den; }
};

// sin(2 pi num t / den) with the argument reduced modulo den.
double sin_cycles(const Frequency& omega, std::int64_t t);
double cos_cycles(const Frequency& omega, std::int64_t t);

enum class FrequencyCategory { kSignal, kResonance, kOther };

struct FrequencyScenario {
  int n = 200;
  Frequency omega1{109, 2000};  // 0.0545
  Frequency omega2{111, 2000};  // 0.0555
  double amplitude1 = 1.0;
  double amplitude2 = 1.0;
  double sigma = 0.0;
  // Regular grid k / grid_den for k = grid_first..grid_last. The default
  // stops at 299 / 600: sin(pi t) vanishes at integer t, so the Nyquist
  // column would be identically zero.
  std::int64_t grid_den = 600;
  std::int64_t grid_first = 3;
  std::int64_t grid_last = 299;
};

struct FrequencyDictionary {
  std::vector<Frequency> omega;  // strictly increasing
  std::vector<FrequencyCategory> category;
  std::vector<char> on_grid;  // 1 for regular grid columns
  int signal1 = -1;
  int signal2 = -1;
  int resonance = -1;  // grid column nearest (omega1 + omega2) / 2

  int p() const { return static_cast<int>(omega.size()); }
  IndexSet members(FrequencyCategory c) const;
};

FrequencyDictionary frequency_dictionary(const FrequencyScenario& scenario);

// Columns sin(2 pi omega t_i), t_i = i for i = 1..n; phases are zero.
Matrix frequency_design(const FrequencyScenario& scenario,
                        const FrequencyDictionary& dict);

RegressionProblem generate_frequency_problem(const FrequencyScenario& scenario,
                                             std::uint64_t seed);

struct PeriodogramPoint {
  double omega = 0.0;
  double delta_e = 0.0;  // sum Y^2 - sum (Y - Yhat)^2
  bool degenerate = false;  // sine/cosine pair not of full rank; skipped
};

std::vector<PeriodogramPoint> periodogram(const Vector& y,
                                          const std::vector<std::int64_t>& times,
                                          const std::vector<Frequency>& grid);

struct FrequencyExperimentConfig {
  FrequencyScenario scenario;
  std::vector<double> sigmas{0.0, 0.1, 0.2, 1.0};
  int replications = 100;
  std::uint64_t seed = 1;
  int lambda_points = 100;
  double lambda_ratio = 1e-4;
  // Theory lambda: multiplier * sigma * e * sqrt(n log p), evaluated when
  // it falls inside the path range.
  double theory_e = 1.0;
  double theory_multiplier = 2.0;
  int threads = 1;
};

// Path statistics at one lambda of one replication.
struct FrequencyLambdaRow {
  double lambda = 0.0;
  bool theory = false;
  double l2[3] = {0, 0, 0};  // signal, resonance, other
  double l2_total = 0.0;
  int count[3] = {0, 0, 0};
  double beta_omega1 = 0.0;
  double beta_omega2 = 0.0;
  double beta_resonance = 0.0;
  double other_min = 0.0;
  double other_max = 0.0;
};

struct FrequencyReplication {
  double sigma = 0.0;
  int index = 0;
  std::uint64_t seed = 0;
  double lambda_max = 0.0;
  std::vector<FrequencyLambdaRow> rows;
  // Exact over the path, not the grid.
  bool resonance_always_active = false;
  bool resonance_on_whole_grid = false;  // grid points below lambda_max
  bool resonance_above_theory = false;  // same, restricted to lambda >= theory
  BestLambda best;
  double periodogram_argmax = 0.0;  // over regular grid columns
  bool periodogram_peak_at_resonance = false;
  int max_active = 0;
  int path_events = 0;
  std::vector<PeriodogramPoint> spectrum;
};

struct FrequencySigmaSummary {
  double sigma = 0.0;
  int replications = 0;
  double resonance_always_active_rate = 0.0;
  double resonance_on_whole_grid_rate = 0.0;
  double resonance_above_theory_rate = 0.0;
  double periodogram_peak_rate = 0.0;
  double signals_beat_resonance_rate = 0.0;  // at the best-l2 lambda
  double mean_best_sq_error = 0.0;
  std::optional<double> theory_lambda;
  // Per lambda-grid index.
  std::vector<double> lambda_fraction;  // lambda / lambda_max
  std::vector<double> selection_rate[3];  // mean selected share of category
  std::vector<double> mean_l2[3];
  std::vector<double> envelope_low[3];  // 5% quantile of category minimum
  std::vector<double> envelope_high[3];  // 95% quantile of category maximum
};

struct FrequencyExperimentReport {
  FrequencyExperimentConfig config;
  FrequencyDictionary dictionary;
  std::vector<FrequencyReplication> replications;  // sigma-major order
  std::vector<FrequencySigmaSummary> summaries;
};

FrequencyReplication run_frequency_replication(
    const FrequencyExperimentConfig& config, const FrequencyDictionary& dict,
    double sigma, int index);

FrequencyExperimentReport frequency_experiment(
    const FrequencyExperimentConfig& config);

CsvTable frequency_replications_table(const FrequencyExperimentReport& report);
Json frequency_aggregate_json(const FrequencyExperimentReport& report);
// Replication 0 of every sigma, plus the across-replication mean.
CsvTable frequency_periodogram_table(const FrequencyExperimentReport& report);

// ---------------------------------------------------------------------------
// l2 rates.

enum class DesignFamily { kGaussian, kOrthogonal };

struct ScalingCell {
  int n = 0;
  int p = 0;
  int s = 0;
};

struct ScalingScenario {
  DesignFamily family = DesignFamily::kGaussian;
  std::vector<ScalingCell> cells;
  double sigma = 1.0;
  double beta_min = 1.0;
  // Theory lambda = multiplier * sigma * e * sqrt(n log p).
  double e = 1.0;
  double multiplier = 2.0;
  // The path stops at floor * sigma * sqrt(n log p); the best-l2 search
  // covers [stop, lambda_max].
  double path_floor = 0.5;
  int replications = 20;
  std::uint64_t seed = 1;
  int threads = 1;
  // Report the rate factor e^2 / phi_min(ceil(e^2 s))^2 per cell.
  bool eigen_factor = true;

  // Cells n in n_grid with p = round(p_factor * n), one s.
  static std::vector<ScalingCell> doubling(const std::vector<int>& n_grid,
                                           double p_factor, int s);
};

// Columns scaled to squared norm n. Orthogonal needs p <= n.
Matrix scaling_design(DesignFamily family, int n, int p, std::uint64_t seed);

struct ScalingReplication {
  int cell = 0;
  int index = 0;
  std::uint64_t seed = 0;
  double lambda_max = 0.0;
  double path_stop = 0.0;
  BestLambda best;
  bool best_at_stop = false;  // minimum sits on the path floor
  double theory_lambda = 0.0;
  double theory_sq_error = 0.0;
  double normalized_best = 0.0;  // best / (sigma^2 s log p / n)
  double normalized_theory = 0.0;
  int max_active = 0;
};

struct ScalingCellSummary {
  ScalingCell cell;
  double rate_unit = 0.0;  // sigma^2 s log p / n
  double median_best = 0.0;
  double median_theory = 0.0;
  double median_normalized = 0.0;
  double sup_normalized = 0.0;  // empirical constant M
  double q05_normalized = 0.0;
  double q95_normalized = 0.0;
  std::optional<double> phi_min;
  bool phi_exact = false;
  std::optional<double> rate_bound_unit;  // rate_unit * e^2 / phi_min^2
  int best_at_stop = 0;
};

struct ScalingReport {
  ScalingScenario scenario;
  std::vector<ScalingReplication> replications;  // cell-major order
  std::vector<ScalingCellSummary> cells;
  // Least-squares slope of log(median best error) on log n over cells with
  // the first cell's s. Needs two distinct n.
  std::optional<double> slope;
  double band_ratio = 0.0;  // max / min median_normalized over those cells
};

ScalingReport scaling_experiment(const ScalingScenario& scenario);

CsvTable scaling_replications_table(const ScalingReport& report);
Json scaling_aggregate_json(const ScalingReport& report);

// ---------------------------------------------------------------------------
// Active-set size along the xi-path at the theory lambda.

struct ActiveSetScenario {
  DesignFamily family = DesignFamily::kGaussian;
  ScalingCell cell{100, 200, 5};
  double sigma = 1.0;
  double beta_min = 1.0;
  double e = 2.0;
  double multiplier = 2.0;
  // Replaces the theory lambda when set.
  std::optional<double> lambda;
  int replications = 200;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct ActiveSetReplication {
  int index = 0;
  std::uint64_t seed = 0;
  double lambda_max = 0.0;
  int xi_sup = 0;  // largest active set over the xi-path
  int solution_active = 0;  // |{k : |G_k| = lambda}| at xi = 1
  int sup = 0;
  bool violated = false;
};

struct ActiveSetReport {
  ActiveSetScenario scenario;
  double lambda = 0.0;
  int bound = 0;  // ceil(e^2 s)
  std::vector<ActiveSetReplication> replications;
  int violations = 0;
  double violation_rate = 0.0;
  int max_sup = 0;
};

ActiveSetReport active_set_bound_check(const ActiveSetScenario& scenario);

CsvTable active_set_table(const ActiveSetReport& report);
Json active_set_json(const ActiveSetReport& report);

}  // namespace lassorec
