#include <algorithm>
#include <cmath>
#include <memory>

#include "lassorec/denoised.hpp"
#include "lassorec/diagnostics.hpp"
#include "lassorec/errors.hpp"
#include "lassorec/experiments.hpp"
#include "lassorec/random.hpp"
#include "parallel.hpp"

namespace lassorec {

namespace {

// Seeds: stream = cell, index 0 = design, 1 = truth, 2 + r = noise of
// replication r.
constexpr std::uint64_t kDesignIndex = 0;
constexpr std::uint64_t kTruthIndex = 1;
constexpr std::uint64_t kFirstReplication = 2;

int ceil_size(double e, int s) {
  return static_cast<int>(std::ceil(e * e * s - 1e-12));
}

void validate_cell(const ScalingCell& c, DesignFamily family) {
  if (c.n < 1 || c.p < 1) throw InputError("cell needs positive n and p");
  if (c.s < 0 || c.s > c.p) throw InputError("cell needs 0 <= s <= p");
  if (family == DesignFamily::kOrthogonal && c.p > c.n)
    throw InputError("orthogonal design needs p <= n");
}

Vector draw_truth(int p, int s, double beta_min, std::uint64_t seed) {
  Rng rng(seed);
  Vector beta = Vector::Zero(p);
  for (int k : rng.subset(p, s)) beta(k) = rng.uniform() < 0.5 ? -beta_min : beta_min;
  return beta;
}

Vector draw_noise(int n, double sigma, std::uint64_t seed) {
  if (sigma == 0.0) return Vector::Zero(n);
  Rng rng(seed);
  return rng.normal_vector(n, sigma);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace

std::vector<ScalingCell> ScalingScenario::doubling(const std::vector<int>& n_grid,
                                                   double p_factor, int s) {
  std::vector<ScalingCell> cells;
  for (int n : n_grid)
    cells.push_back({n, static_cast<int>(std::lround(p_factor * n)), s});
  return cells;
}

Matrix scaling_design(DesignFamily family, int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix G = rng.normal_matrix(n, p);
  if (family == DesignFamily::kOrthogonal) {
    if (p > n) throw InputError("orthogonal design needs p <= n");
    Matrix Q = G.householderQr().householderQ() * Matrix::Identity(n, p);
    return std::sqrt(static_cast<double>(n)) * Q;
  }
  for (int k = 0; k < p; ++k) G.col(k) *= std::sqrt(static_cast<double>(n)) / G.col(k).norm();
  return G;
}

ScalingReport scaling_experiment(const ScalingScenario& sc) {
  if (sc.cells.empty()) throw InputError("scaling scenario has no cells");
  for (const auto& c : sc.cells) validate_cell(c, sc.family);
  if (!(sc.sigma >= 0) || !std::isfinite(sc.sigma))
    throw InputError("sigma must be finite and nonnegative");
  if (sc.replications < 1) throw InputError("replications must be positive");
  if (!(sc.path_floor >= 0)) throw InputError("path_floor must be nonnegative");
  if (sc.threads < 1) throw InputError("threads must be positive");

  ScalingReport report;
  report.scenario = sc;
  const int cells = static_cast<int>(sc.cells.size());
  std::vector<std::shared_ptr<const DesignMatrix>> designs(cells);
  std::vector<Vector> truths(cells);
  detail::parallel_for(cells, sc.threads, [&](int c) {
    const auto& cell = sc.cells[c];
    designs[c] = std::make_shared<DesignMatrix>(scaling_design(
        sc.family, cell.n, cell.p, derive_seed(sc.seed, c, kDesignIndex)));
    truths[c] = draw_truth(cell.p, cell.s, sc.beta_min,
                           derive_seed(sc.seed, c, kTruthIndex));
  });

  const int reps = sc.replications;
  report.replications.resize(static_cast<std::size_t>(cells) * reps);
  detail::parallel_for(cells * reps, sc.threads, [&](int task) {
    int c = task / reps, r = task % reps;
    const auto& cell = sc.cells[c];
    ScalingReplication& out = report.replications[task];
    out.cell = c;
    out.index = r;
    out.seed = derive_seed(sc.seed, c, kFirstReplication + r);
    auto prob = RegressionProblem::simulate(designs[c], TruthSpec(truths[c], sc.sigma),
                                            draw_noise(cell.n, sc.sigma, out.seed));
    double scale = std::sqrt(cell.n * std::log(static_cast<double>(cell.p)));
    out.lambda_max = lambda_max(prob);
    out.path_stop = std::min(sc.path_floor * sc.sigma * scale, out.lambda_max);
    LassoPath path = lasso_path(prob, out.path_stop);
    out.best = best_l2_on_path(path, truths[c]);
    out.best_at_stop = out.path_stop > 0 && out.best.lambda <= out.path_stop;
    out.max_active = max_active_size(path);
    out.theory_lambda =
        theory_lambda(sc.sigma, sc.e, cell.n, cell.p, sc.multiplier);
    Vector at_theory;
    if (out.theory_lambda >= out.path_stop) {
      at_theory = path.coefficients_at(out.theory_lambda);
    } else {
      SolveOptions so;
      so.tol = 1e-10;
      at_theory = solve_at(prob, out.theory_lambda, so).coefficients;
    }
    out.theory_sq_error = (at_theory - truths[c]).squaredNorm();
    double unit = sc.sigma * sc.sigma * cell.s *
                  std::log(static_cast<double>(cell.p)) / cell.n;
    if (unit > 0) {
      out.normalized_best = out.best.sq_error / unit;
      out.normalized_theory = out.theory_sq_error / unit;
    }
  });

  report.cells.resize(cells);
  for (int c = 0; c < cells; ++c) {
    const auto& cell = sc.cells[c];
    ScalingCellSummary& s = report.cells[c];
    s.cell = cell;
    s.rate_unit = sc.sigma * sc.sigma * cell.s *
                  std::log(static_cast<double>(cell.p)) / cell.n;
    std::vector<double> best, theory, norm;
    for (int r = 0; r < reps; ++r) {
      const auto& rep = report.replications[c * reps + r];
      best.push_back(rep.best.sq_error);
      theory.push_back(rep.theory_sq_error);
      norm.push_back(rep.normalized_best);
      s.best_at_stop += rep.best_at_stop;
    }
    s.median_best = median(best);
    s.median_theory = median(theory);
    s.median_normalized = median(norm);
    s.sup_normalized = *std::max_element(norm.begin(), norm.end());
    s.q05_normalized = quantile(norm, 0.05);
    s.q95_normalized = quantile(norm, 0.95);
    if (sc.eigen_factor && cell.s > 0) {
      GramMatrix C = build_gram(*designs[c]);
      SparseEigOptions eo;
      eo.mode = EigMode::kAuto;
      eo.threads = sc.threads;
      SparseEigReport eig = sparse_eig(C, std::min(cell.p, ceil_size(sc.e, cell.s)), eo);
      s.phi_min = eig.phi_min;
      s.phi_exact = eig.exact;
      if (eig.phi_min > 0)
        s.rate_bound_unit = s.rate_unit * sc.e * sc.e / (eig.phi_min * eig.phi_min);
    }
  }

  // Slope and band over the cells sharing the first cell's s.
  std::vector<double> xs, ys, norms;
  for (const auto& s : report.cells) {
    if (s.cell.s != sc.cells.front().s) continue;
    if (s.median_best > 0) {
      xs.push_back(std::log(static_cast<double>(s.cell.n)));
      ys.push_back(std::log(s.median_best));
    }
    norms.push_back(s.median_normalized);
  }
  bool distinct = xs.size() >= 2 &&
                  *std::max_element(xs.begin(), xs.end()) >
                      *std::min_element(xs.begin(), xs.end());
  if (distinct && xs.size() == norms.size()) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    report.slope = sxy / sxx;
  }
  double lo = *std::min_element(norms.begin(), norms.end());
  double hi = *std::max_element(norms.begin(), norms.end());
  report.band_ratio = lo > 0 ? hi / lo : 0.0;
  return report;
}

CsvTable scaling_replications_table(const ScalingReport& report) {
  CsvTable t;
  t.header = {"cell", "n", "p", "s", "replication", "seed", "lambda_max",
              "path_stop", "best_lambda", "best_sq_error", "best_at_stop",
              "theory_lambda", "theory_sq_error", "normalized_best",
              "normalized_theory", "max_active"};
  const auto& cells = report.scenario.cells;
  for (const auto& r : report.replications) {
    const auto& c = cells[r.cell];
    t.add_row({format_int(r.cell + 1), format_int(c.n), format_int(c.p),
               format_int(c.s), format_int(r.index + 1), std::to_string(r.seed),
               format_real(r.lambda_max), format_real(r.path_stop),
               format_real(r.best.lambda), format_real(r.best.sq_error),
               format_int(r.best_at_stop), format_real(r.theory_lambda),
               format_real(r.theory_sq_error), format_real(r.normalized_best),
               format_real(r.normalized_theory), format_int(r.max_active)});
  }
  return t;
}

Json scaling_aggregate_json(const ScalingReport& report) {
  const auto& sc = report.scenario;
  Json j;
  j["experiment"] = "scaling";
  j["family"] = sc.family == DesignFamily::kGaussian ? "gaussian" : "orthogonal";
  j["sigma"] = sc.sigma;
  j["beta_min"] = sc.beta_min;
  j["e"] = sc.e;
  j["multiplier"] = sc.multiplier;
  j["path_floor"] = sc.path_floor;
  j["replications"] = sc.replications;
  j["seed"] = sc.seed;
  Json cells = Json::array();
  for (const auto& s : report.cells) {
    Json e;
    e["n"] = s.cell.n;
    e["p"] = s.cell.p;
    e["s"] = s.cell.s;
    e["rate_unit"] = s.rate_unit;
    e["median_best_sq_error"] = s.median_best;
    e["median_theory_sq_error"] = s.median_theory;
    e["median_normalized"] = s.median_normalized;
    e["q05_normalized"] = s.q05_normalized;
    e["q95_normalized"] = s.q95_normalized;
    e["sup_normalized"] = s.sup_normalized;
    e["phi_min"] = s.phi_min ? Json(*s.phi_min) : Json(nullptr);
    e["phi_min_exact"] = s.phi_exact;
    e["rate_bound_unit"] = s.rate_bound_unit ? Json(*s.rate_bound_unit) : Json(nullptr);
    e["best_at_path_stop"] = s.best_at_stop;
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  j["slope"] = report.slope ? Json(*report.slope) : Json(nullptr);
  j["band_ratio"] = report.band_ratio;
  return j;
}

ActiveSetReport active_set_bound_check(const ActiveSetScenario& sc) {
  validate_cell(sc.cell, sc.family);
  if (!(sc.sigma >= 0) || !std::isfinite(sc.sigma))
    throw InputError("sigma must be finite and nonnegative");
  if (!(sc.e > 0)) throw InputError("multiplier e must be positive");
  if (sc.replications < 1) throw InputError("replications must be positive");
  if (sc.threads < 1) throw InputError("threads must be positive");

  ActiveSetReport report;
  report.scenario = sc;
  const auto& cell = sc.cell;
  report.lambda = sc.lambda ? *sc.lambda
                            : theory_lambda(sc.sigma, sc.e, cell.n, cell.p,
                                            sc.multiplier);
  if (!(report.lambda >= 0) || !std::isfinite(report.lambda))
    throw InputError("lambda must be finite and nonnegative");
  report.bound = ceil_size(sc.e, cell.s);
  auto design = std::make_shared<DesignMatrix>(
      scaling_design(sc.family, cell.n, cell.p, derive_seed(sc.seed, 0, kDesignIndex)));
  Vector beta = draw_truth(cell.p, cell.s, sc.beta_min,
                           derive_seed(sc.seed, 0, kTruthIndex));

  report.replications.resize(sc.replications);
  detail::parallel_for(sc.replications, sc.threads, [&](int r) {
    ActiveSetReplication& out = report.replications[r];
    out.index = r;
    out.seed = derive_seed(sc.seed, 0, kFirstReplication + r);
    auto prob = RegressionProblem::simulate(design, TruthSpec(beta, sc.sigma),
                                            draw_noise(cell.n, sc.sigma, out.seed));
    out.lambda_max = lambda_max(prob);
    XiPath path = xi_path(prob, report.lambda);
    for (const auto& iv : path.intervals())
      out.xi_sup = std::max(out.xi_sup, static_cast<int>(iv.active_set.size()));
    KktReport kkt = kkt_check(prob, report.lambda, path.evaluate(1.0));
    out.solution_active = static_cast<int>(kkt.active_set.size());
    out.sup = std::max(out.xi_sup, out.solution_active);
    out.violated = out.sup > report.bound;
  });
  for (const auto& r : report.replications) {
    report.violations += r.violated;
    report.max_sup = std::max(report.max_sup, r.sup);
  }
  report.violation_rate = double(report.violations) / sc.replications;
  return report;
}

CsvTable active_set_table(const ActiveSetReport& report) {
  CsvTable t;
  t.header = {"replication", "seed", "xi_sup", "solution_active", "sup",
              "bound", "violated"};
  for (const auto& r : report.replications)
    t.add_row({format_int(r.index + 1), std::to_string(r.seed),
               format_int(r.xi_sup), format_int(r.solution_active),
               format_int(r.sup), format_int(report.bound),
               format_int(r.violated)});
  return t;
}

Json active_set_json(const ActiveSetReport& report) {
  const auto& sc = report.scenario;
  Json j;
  j["experiment"] = "active-set";
  j["n"] = sc.cell.n;
  j["p"] = sc.cell.p;
  j["s"] = sc.cell.s;
  j["sigma"] = sc.sigma;
  j["e"] = sc.e;
  j["multiplier"] = sc.multiplier;
  j["lambda"] = report.lambda;
  j["bound"] = report.bound;
  j["replications"] = sc.replications;
  j["seed"] = sc.seed;
  j["violations"] = report.violations;
  j["violation_rate"] = report.violation_rate;
  j["max_sup"] = report.max_sup;
  return j;
}

}  // namespace lassorec
