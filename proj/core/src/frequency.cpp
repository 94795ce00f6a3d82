#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "lassorec/errors.hpp"
#include "lassorec/experiments.hpp"
#include "lassorec/random.hpp"
#include "parallel.hpp"

namespace lassorec {

namespace {

std::int64_t reduced(const Frequency& omega, std::int64_t t) {
  std::int64_t r = (omega.num * t) % omega.den;
  return r < 0 ? r + omega.den : r;
}

// a/b < c/d for positive denominators.
bool less(const Frequency& a, const Frequency& b) {
  return a.num * b.den < b.num * a.den;
}

bool same(const Frequency& a, const Frequency& b) {
  return a.num * b.den == b.num * a.den;
}

constexpr int kCategories = 3;

int category_index(FrequencyCategory c) { return static_cast<int>(c); }

}  // namespace

double sin_cycles(const Frequency& omega, std::int64_t t) {
  std::int64_t r = reduced(omega, t);
  if (r == 0 || 2 * r == omega.den) return 0.0;
  return std::sin(2.0 * std::numbers::pi * static_cast<double>(r) / omega.den);
}

double cos_cycles(const Frequency& omega, std::int64_t t) {
  std::int64_t r = reduced(omega, t);
  if (4 * r == omega.den || 4 * r == 3 * omega.den) return 0.0;
  return std::cos(2.0 * std::numbers::pi * static_cast<double>(r) / omega.den);
}

IndexSet FrequencyDictionary::members(FrequencyCategory c) const {
  IndexSet out;
  for (int k = 0; k < p(); ++k)
    if (category[k] == c) out.push_back(k);
  return out;
}

FrequencyDictionary frequency_dictionary(const FrequencyScenario& sc) {
  if (sc.n < 2) throw InputError("frequency scenario needs n >= 2");
  if (sc.grid_den <= 0 || sc.omega1.den <= 0 || sc.omega2.den <= 0)
    throw InputError("frequency denominators must be positive");
  if (sc.grid_first < 1 || sc.grid_last < sc.grid_first)
    throw InputError("empty frequency grid");
  if (!less(sc.omega1, sc.omega2)) throw InputError("omega1 must be below omega2");

  FrequencyDictionary d;
  std::vector<Frequency> grid;
  for (std::int64_t k = sc.grid_first; k <= sc.grid_last; ++k)
    grid.push_back({k, sc.grid_den});
  for (const Frequency& w : {sc.omega1, sc.omega2})
    for (const Frequency& g : grid)
      if (same(w, g))
        throw InputError("signal frequency coincides with a grid frequency");

  // Merge the two signal frequencies into the sorted grid.
  std::size_t gi = 0;
  auto push = [&](const Frequency& w, FrequencyCategory c, bool on_grid) {
    d.omega.push_back(w);
    d.category.push_back(c);
    d.on_grid.push_back(on_grid ? 1 : 0);
  };
  for (int s = 0; s < 2; ++s) {
    const Frequency& w = s == 0 ? sc.omega1 : sc.omega2;
    while (gi < grid.size() && less(grid[gi], w))
      push(grid[gi++], FrequencyCategory::kOther, true);
    (s == 0 ? d.signal1 : d.signal2) = d.p();
    push(w, FrequencyCategory::kSignal, false);
  }
  while (gi < grid.size()) push(grid[gi++], FrequencyCategory::kOther, true);

  double mid = 0.5 * (sc.omega1.value() + sc.omega2.value());
  double best = INFINITY;
  for (int k = 0; k < d.p(); ++k) {
    if (!d.on_grid[k]) continue;
    double dist = std::abs(d.omega[k].value() - mid);
    if (dist < best) best = dist, d.resonance = k;
  }
  d.category[d.resonance] = FrequencyCategory::kResonance;
  return d;
}

Matrix frequency_design(const FrequencyScenario& sc,
                        const FrequencyDictionary& dict) {
  Matrix X(sc.n, dict.p());
  for (int k = 0; k < dict.p(); ++k)
    for (int i = 0; i < sc.n; ++i) X(i, k) = sin_cycles(dict.omega[k], i + 1);
  return X;
}

namespace {

std::shared_ptr<const DesignMatrix> make_design(const FrequencyScenario& sc,
                                                const FrequencyDictionary& dict) {
  std::vector<std::string> labels;
  for (const auto& w : dict.omega)
    labels.push_back(std::to_string(w.num) + "/" + std::to_string(w.den));
  return std::make_shared<DesignMatrix>(frequency_design(sc, dict),
                                        std::move(labels));
}

RegressionProblem draw(const std::shared_ptr<const DesignMatrix>& design,
                       const FrequencyScenario& sc,
                       const FrequencyDictionary& dict, double sigma,
                       std::uint64_t seed) {
  if (!(sigma >= 0) || !std::isfinite(sigma))
    throw InputError("sigma must be finite and nonnegative");
  Vector beta = Vector::Zero(dict.p());
  beta(dict.signal1) = sc.amplitude1;
  beta(dict.signal2) = sc.amplitude2;
  Vector eps = Vector::Zero(sc.n);
  if (sigma > 0) {
    Rng rng(seed);
    eps = rng.normal_vector(sc.n, sigma);
  }
  return RegressionProblem::simulate(design, TruthSpec(beta, sigma), eps);
}

}  // namespace

RegressionProblem generate_frequency_problem(const FrequencyScenario& sc,
                                             std::uint64_t seed) {
  FrequencyDictionary dict = frequency_dictionary(sc);
  return draw(make_design(sc, dict), sc, dict, sc.sigma, seed);
}

std::vector<PeriodogramPoint> periodogram(const Vector& y,
                                          const std::vector<std::int64_t>& times,
                                          const std::vector<Frequency>& grid) {
  if (grid.empty()) throw InputError("empty periodogram grid");
  if (static_cast<Eigen::Index>(times.size()) != y.size())
    throw InputError("periodogram times and response differ in length");
  const int n = static_cast<int>(y.size());
  double energy = y.squaredNorm();
  std::vector<PeriodogramPoint> out;
  out.reserve(grid.size());
  Matrix A(n, 2);
  for (const Frequency& w : grid) {
    for (int i = 0; i < n; ++i) {
      A(i, 0) = sin_cycles(w, times[i]);
      A(i, 1) = cos_cycles(w, times[i]);
    }
    PeriodogramPoint pt;
    pt.omega = w.value();
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < 2) {
      pt.degenerate = true;
    } else {
      Vector fit = A * qr.solve(y);
      pt.delta_e = energy - (y - fit).squaredNorm();
    }
    out.push_back(pt);
  }
  return out;
}

namespace {

struct Context {
  const FrequencyExperimentConfig& config;
  const FrequencyDictionary& dict;
  std::shared_ptr<const DesignMatrix> design;
  std::vector<Frequency> regular;
  std::vector<int> regular_columns;
  std::vector<std::int64_t> times;
  IndexSet members[kCategories];
};

Context make_context(const FrequencyExperimentConfig& config,
                     const FrequencyDictionary& dict) {
  Context c{config, dict, make_design(config.scenario, dict), {}, {}, {}, {}};
  for (int k = 0; k < dict.p(); ++k)
    if (dict.on_grid[k]) {
      c.regular.push_back(dict.omega[k]);
      c.regular_columns.push_back(k);
    }
  for (int i = 1; i <= config.scenario.n; ++i) c.times.push_back(i);
  for (int j = 0; j < kCategories; ++j)
    c.members[j] = dict.members(static_cast<FrequencyCategory>(j));
  return c;
}

FrequencyLambdaRow row_at(const Context& c, const Vector& beta,
                          const Vector& fit, double lambda, bool theory) {
  FrequencyLambdaRow r;
  r.lambda = lambda;
  r.theory = theory;
  for (int j = 0; j < kCategories; ++j) {
    double sq = 0.0;
    for (int k : c.members[j]) {
      double d = beta(k) - fit(k);
      sq += d * d;
      if (fit(k) != 0.0) ++r.count[j];
    }
    r.l2[j] = std::sqrt(sq);
  }
  r.l2_total = (beta - fit).norm();
  r.beta_omega1 = fit(c.dict.signal1);
  r.beta_omega2 = fit(c.dict.signal2);
  r.beta_resonance = fit(c.dict.resonance);
  const IndexSet& other = c.members[category_index(FrequencyCategory::kOther)];
  if (!other.empty()) {
    r.other_min = r.other_max = fit(other.front());
    for (int k : other) {
      r.other_min = std::min(r.other_min, fit(k));
      r.other_max = std::max(r.other_max, fit(k));
    }
  }
  return r;
}

FrequencyReplication replicate(const Context& c, double sigma,
                               std::uint64_t stream, int index) {
  const auto& cfg = c.config;
  FrequencyReplication rep;
  rep.sigma = sigma;
  rep.index = index;
  rep.seed = derive_seed(cfg.seed, stream, index);
  RegressionProblem prob = draw(c.design, cfg.scenario, c.dict, sigma, rep.seed);
  const Vector& beta = prob.truth()->beta();

  rep.lambda_max = lambda_max(prob);
  double lambda_min = cfg.lambda_ratio * rep.lambda_max;
  LassoPath path = lasso_path(prob, lambda_min);
  rep.path_events = path.num_events();
  rep.max_active = max_active_size(path);

  std::vector<double> grid =
      log_lambda_grid(rep.lambda_max, cfg.lambda_ratio, cfg.lambda_points);
  double theory = theory_lambda(sigma, cfg.theory_e, cfg.scenario.n, c.dict.p(),
                                cfg.theory_multiplier);
  rep.resonance_on_whole_grid = rep.resonance_above_theory = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vector fit = path.coefficients_at(grid[i]);
    rep.rows.push_back(row_at(c, beta, fit, grid[i], false));
    if (i > 0 && fit(c.dict.resonance) == 0.0) {
      rep.resonance_on_whole_grid = false;
      if (grid[i] >= theory) rep.resonance_above_theory = false;
    }
  }
  if (theory > 0 && theory >= lambda_min)
    rep.rows.push_back(
        row_at(c, beta, path.coefficients_at(theory), theory, true));

  rep.resonance_always_active = always_active(path, c.dict.resonance);
  rep.best = best_l2_on_path(path, beta);

  rep.spectrum = periodogram(prob.response(), c.times, c.regular);
  double peak = -INFINITY;
  int arg = -1;
  for (std::size_t i = 0; i < rep.spectrum.size(); ++i)
    if (!rep.spectrum[i].degenerate && rep.spectrum[i].delta_e > peak) {
      peak = rep.spectrum[i].delta_e;
      arg = static_cast<int>(i);
    }
  if (arg >= 0) {
    rep.periodogram_argmax = rep.spectrum[arg].omega;
    rep.periodogram_peak_at_resonance = c.regular_columns[arg] == c.dict.resonance;
  }
  return rep;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

FrequencySigmaSummary summarize(const Context& c, double sigma,
                                const FrequencyReplication* reps, int count) {
  const auto& cfg = c.config;
  FrequencySigmaSummary s;
  s.sigma = sigma;
  s.replications = count;
  double theory = theory_lambda(sigma, cfg.theory_e, cfg.scenario.n, c.dict.p(),
                                cfg.theory_multiplier);
  if (theory > 0) s.theory_lambda = theory;
  int always = 0, grid_all = 0, above = 0, peak = 0, beat = 0;
  double best = 0.0;
  for (int r = 0; r < count; ++r) {
    const auto& rep = reps[r];
    always += rep.resonance_always_active;
    grid_all += rep.resonance_on_whole_grid;
    above += rep.resonance_above_theory;
    peak += rep.periodogram_peak_at_resonance;
    double res = std::abs(rep.best.coefficients(c.dict.resonance));
    beat += std::abs(rep.best.coefficients(c.dict.signal1)) > res &&
            std::abs(rep.best.coefficients(c.dict.signal2)) > res;
    best += rep.best.sq_error;
  }
  s.resonance_always_active_rate = double(always) / count;
  s.resonance_on_whole_grid_rate = double(grid_all) / count;
  s.resonance_above_theory_rate = double(above) / count;
  s.periodogram_peak_rate = double(peak) / count;
  s.signals_beat_resonance_rate = double(beat) / count;
  s.mean_best_sq_error = best / count;

  const int points = cfg.lambda_points;
  for (int i = 0; i < points; ++i) {
    s.lambda_fraction.push_back(reps[0].rows[i].lambda / reps[0].lambda_max);
    for (int j = 0; j < kCategories; ++j) {
      std::vector<double> share, l2, lo, hi;
      double size = static_cast<double>(c.members[j].size());
      for (int r = 0; r < count; ++r) {
        const FrequencyLambdaRow& row = reps[r].rows[i];
        share.push_back(size > 0 ? row.count[j] / size : 0.0);
        l2.push_back(row.l2[j]);
        double mn, mx;
        if (j == category_index(FrequencyCategory::kSignal)) {
          mn = std::min(row.beta_omega1, row.beta_omega2);
          mx = std::max(row.beta_omega1, row.beta_omega2);
        } else if (j == category_index(FrequencyCategory::kResonance)) {
          mn = mx = row.beta_resonance;
        } else {
          mn = row.other_min;
          mx = row.other_max;
        }
        lo.push_back(mn);
        hi.push_back(mx);
      }
      s.selection_rate[j].push_back(mean(share));
      s.mean_l2[j].push_back(mean(l2));
      s.envelope_low[j].push_back(quantile(lo, 0.05));
      s.envelope_high[j].push_back(quantile(hi, 0.95));
    }
  }
  return s;
}

void validate(const FrequencyExperimentConfig& cfg) {
  if (cfg.replications < 1) throw InputError("replications must be positive");
  if (cfg.sigmas.empty()) throw InputError("no sigma values given");
  for (double s : cfg.sigmas)
    if (!(s >= 0) || !std::isfinite(s))
      throw InputError("sigma must be finite and nonnegative");
  if (cfg.lambda_points < 2) throw InputError("lambda_points must be at least 2");
  if (!(cfg.lambda_ratio > 0 && cfg.lambda_ratio < 1))
    throw InputError("lambda_ratio must lie in (0, 1)");
  if (cfg.threads < 1) throw InputError("threads must be positive");
}

}  // namespace

FrequencyReplication run_frequency_replication(
    const FrequencyExperimentConfig& config, const FrequencyDictionary& dict,
    double sigma, int index) {
  validate(config);
  Context c = make_context(config, dict);
  auto it = std::find(config.sigmas.begin(), config.sigmas.end(), sigma);
  std::uint64_t stream = it == config.sigmas.end()
                             ? config.sigmas.size()
                             : static_cast<std::uint64_t>(it - config.sigmas.begin());
  return replicate(c, sigma, stream, index);
}

FrequencyExperimentReport frequency_experiment(
    const FrequencyExperimentConfig& config) {
  validate(config);
  FrequencyExperimentReport report;
  report.config = config;
  report.dictionary = frequency_dictionary(config.scenario);
  Context c = make_context(config, report.dictionary);

  const int reps = config.replications;
  const int levels = static_cast<int>(config.sigmas.size());
  report.replications.resize(static_cast<std::size_t>(reps) * levels);
  // Stream = sigma position, index = replication.
  detail::parallel_for(reps * levels, config.threads, [&](int task) {
    int level = task / reps, r = task % reps;
    report.replications[task] =
        replicate(c, config.sigmas[level], static_cast<std::uint64_t>(level), r);
  });
  for (int level = 0; level < levels; ++level)
    report.summaries.push_back(summarize(c, config.sigmas[level],
                                         &report.replications[level * reps], reps));
  return report;
}

CsvTable frequency_replications_table(const FrequencyExperimentReport& report) {
  CsvTable t;
  t.header = {"sigma", "replication", "seed", "lambda_index", "lambda",
              "theory", "l2_signal", "l2_resonance", "l2_other", "l2_total",
              "count_signal", "count_resonance", "count_other", "beta_omega1",
              "beta_omega2", "beta_resonance", "other_min", "other_max"};
  for (const auto& rep : report.replications) {
    int i = 0;
    for (const auto& row : rep.rows) {
      ++i;
      t.add_row({format_real(rep.sigma), format_int(rep.index + 1),
                 std::to_string(rep.seed), format_int(row.theory ? 0 : i),
                 format_real(row.lambda), format_int(row.theory),
                 format_real(row.l2[0]), format_real(row.l2[1]),
                 format_real(row.l2[2]), format_real(row.l2_total),
                 format_int(row.count[0]), format_int(row.count[1]),
                 format_int(row.count[2]), format_real(row.beta_omega1),
                 format_real(row.beta_omega2), format_real(row.beta_resonance),
                 format_real(row.other_min), format_real(row.other_max)});
    }
  }
  return t;
}

namespace {

Json curves(const std::vector<double> (&v)[kCategories]) {
  return Json{{"signal", v[0]}, {"resonance", v[1]}, {"other", v[2]}};
}

}  // namespace

Json frequency_aggregate_json(const FrequencyExperimentReport& report) {
  const auto& cfg = report.config;
  const auto& d = report.dictionary;
  Json j;
  j["experiment"] = "freq";
  j["n"] = cfg.scenario.n;
  j["p"] = d.p();
  j["replications"] = cfg.replications;
  j["seed"] = cfg.seed;
  j["lambda_points"] = cfg.lambda_points;
  j["lambda_ratio"] = cfg.lambda_ratio;
  j["dictionary"] = {{"omega1", d.omega[d.signal1].value()},
                     {"omega1_column", d.signal1 + 1},
                     {"omega2", d.omega[d.signal2].value()},
                     {"omega2_column", d.signal2 + 1},
                     {"resonance", d.omega[d.resonance].value()},
                     {"resonance_column", d.resonance + 1},
                     {"grid_first", d.omega.front().value()},
                     {"grid_last", d.omega.back().value()}};
  Json levels = Json::array();
  for (std::size_t level = 0; level < report.summaries.size(); ++level) {
    const auto& s = report.summaries[level];
    Json e;
    e["sigma"] = s.sigma;
    e["theory_lambda"] = s.theory_lambda ? Json(*s.theory_lambda) : Json(nullptr);
    e["resonance_always_active_rate"] = s.resonance_always_active_rate;
    e["resonance_on_whole_grid_rate"] = s.resonance_on_whole_grid_rate;
    e["resonance_above_theory_rate"] = s.resonance_above_theory_rate;
    e["periodogram_peak_rate"] = s.periodogram_peak_rate;
    e["signals_beat_resonance_rate"] = s.signals_beat_resonance_rate;
    e["mean_best_sq_error"] = s.mean_best_sq_error;
    Json per = Json::array();
    for (int r = 0; r < s.replications; ++r) {
      const auto& rep = report.replications[level * cfg.replications + r];
      per.push_back({{"replication", r + 1},
                     {"seed", rep.seed},
                     {"lambda_max", rep.lambda_max},
                     {"path_events", rep.path_events},
                     {"max_active", rep.max_active},
                     {"resonance_always_active", rep.resonance_always_active},
                     {"resonance_on_whole_grid", rep.resonance_on_whole_grid},
                     {"best_lambda", rep.best.lambda},
                     {"best_sq_error", rep.best.sq_error},
                     {"best_beta_omega1", rep.best.coefficients(d.signal1)},
                     {"best_beta_omega2", rep.best.coefficients(d.signal2)},
                     {"best_beta_resonance", rep.best.coefficients(d.resonance)},
                     {"periodogram_argmax", rep.periodogram_argmax},
                     {"periodogram_peak_at_resonance",
                      rep.periodogram_peak_at_resonance}});
    }
    e["per_replication"] = std::move(per);
    e["lambda_fraction"] = s.lambda_fraction;
    e["selection_rate"] = curves(s.selection_rate);
    e["mean_l2"] = curves(s.mean_l2);
    e["envelope_05"] = curves(s.envelope_low);
    e["envelope_95"] = curves(s.envelope_high);
    levels.push_back(std::move(e));
  }
  j["sigma_levels"] = std::move(levels);
  return j;
}

CsvTable frequency_periodogram_table(const FrequencyExperimentReport& report) {
  CsvTable t;
  t.header = {"sigma", "omega", "delta_e_first", "delta_e_mean", "degenerate"};
  const int reps = report.config.replications;
  for (std::size_t level = 0; level < report.summaries.size(); ++level) {
    const auto& first = report.replications[level * reps];
    for (std::size_t i = 0; i < first.spectrum.size(); ++i) {
      double sum = 0.0;
      for (int r = 0; r < reps; ++r)
        sum += report.replications[level * reps + r].spectrum[i].delta_e;
      t.add_row({format_real(report.summaries[level].sigma),
                 format_real(first.spectrum[i].omega),
                 format_real(first.spectrum[i].delta_e), format_real(sum / reps),
                 format_int(first.spectrum[i].degenerate)});
    }
  }
  return t;
}

}  // namespace lassorec
