#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "lassorec/denoised.hpp"
#include "lassorec/diagnostics.hpp"
#include "lassorec/errors.hpp"
#include "lassorec/experiments.hpp"
#include "lassorec/io.hpp"
#include "lassorec/lasso.hpp"
#include "lassorec/random.hpp"
#include "lassorec/two_stage.hpp"

namespace fs = std::filesystem;

namespace lassorec::cli {

namespace {

Json echo_value(const std::string& v) { return v.empty() ? Json(nullptr) : Json(v); }
Json echo_value(double v) { return v; }
Json echo_value(int v) { return v; }
Json echo_value(std::uint64_t v) { return v; }
Json echo_value(bool v) { return v; }
Json echo_value(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}
template <class T>
Json echo_value(const std::vector<T>& v) {
  Json arr = Json::array();
  for (const auto& x : v) arr.push_back(x);
  return arr;
}

std::string config_key(std::string flag) {
  std::replace(flag.begin(), flag.end(), '-', '_');
  return flag;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// A leaf subcommand. Options are registered through add() so the resolved
// values can be echoed with their types.
struct Command {
  CLI::App* app = nullptr;
  std::string name;
  std::vector<std::pair<std::string, std::function<Json()>>> echo;

  template <class T>
  CLI::Option* add(const std::string& flag, T& var, const std::string& help) {
    echo.emplace_back(config_key(flag), [&var] { return echo_value(var); });
    return app->add_option("--" + flag, var, help);
  }

  CLI::Option* add_flag(const std::string& flag, bool& var, const std::string& help) {
    echo.emplace_back(config_key(flag), [&var] { return Json(var); });
    return app->add_flag("--" + flag, var, help);
  }

  Json resolved() const {
    Json j;
    j["subcommand"] = name;
    for (const auto& [key, fn] : echo) j[key] = fn();
    return j;
  }
};

struct Args {
  std::string config;
  std::string out;
  std::string design;
  std::string response;
  std::string beta;
  std::string noise;
  double lambda = 0.0;
  double lambda_min = 0.0;
  std::vector<double> at;
  double tol = 1e-8;
  int max_sweeps = 100000;
  int max_events = 0;
  bool force = false;
  bool normalize = false;
  double sigma = 1.0;
  double t = 1.0;
  std::uint64_t seed = 1;
  std::string support;
  std::string signs;
  int sparse_eig_max = 0;
  std::string mode = "auto";
  std::uint64_t cap = 2'000'000;
  int restarts = 64;
  bool multipliers = false;
  double threshold = 18.0;
};

struct FreqArgs {
  std::string config, out;
  int n = 200;
  std::string omega1 = "109/2000";
  std::string omega2 = "111/2000";
  double amplitude1 = 1.0;
  double amplitude2 = 1.0;
  int grid_den = 600;
  int grid_first = 3;
  int grid_last = 299;
  std::vector<double> sigmas{0.0, 0.1, 0.2, 1.0};
  int replications = 100;
  std::uint64_t seed = 1;
  int lambda_points = 100;
  double lambda_ratio = 1e-4;
  double theory_e = 1.0;
  double theory_multiplier = 2.0;
  int threads = 1;
};

struct ScalingArgs {
  std::string config, out;
  std::string family = "gaussian";
  std::vector<int> n_grid{100, 200, 400, 800};
  double p_factor = 2.0;
  int s = 5;
  double sigma = 1.0;
  double beta_min = 1.0;
  double e = 1.0;
  double multiplier = 2.0;
  double path_floor = 0.5;
  int replications = 20;
  std::uint64_t seed = 1;
  int threads = 1;
  bool eigen_factor = true;
};

struct ActiveSetArgs {
  std::string config, out;
  std::string family = "gaussian";
  int n = 100;
  int p = 200;
  int s = 5;
  double sigma = 1.0;
  double beta_min = 1.0;
  double e = 2.0;
  double multiplier = 2.0;
  std::optional<double> lambda;
  int replications = 200;
  std::uint64_t seed = 1;
  int threads = 1;
};

// ---------------------------------------------------------------------------
// Input helpers.

std::shared_ptr<const DesignMatrix> load_design(const std::string& path,
                                                bool normalize) {
  DesignMatrix d = read_design_csv(path);
  if (normalize) d = d.normalize_columns();
  return std::make_shared<const DesignMatrix>(std::move(d));
}

Vector load_vector(const std::string& path, int expected, const char* what) {
  Vector v = read_vector_csv(path);
  if (v.size() != expected)
    throw InputError(std::string(what) + " has length " + std::to_string(v.size()) +
                     ", expected " + std::to_string(expected));
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      items.push_back(cur);
      cur.clear();
    } else if (ch != ' ' && ch != '\t') {
      cur += ch;
    }
  }
  items.push_back(cur);
  return items;
}

long long parse_integer(const std::string& s, const std::string& what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError(what + ": '" + s + "' is not an integer");
  return v;
}

// "1,5,9" with 1-based columns, paired with "+,+,-". Returns the support
// sorted ascending and the signs in matching order.
std::pair<IndexSet, std::vector<int>> parse_support(const std::string& support,
                                                    const std::string& signs,
                                                    int p) {
  std::vector<std::pair<int, int>> entries;
  auto cols = split_list(support);
  std::vector<std::string> sg;
  if (!signs.empty()) {
    sg = split_list(signs);
    if (sg.size() != cols.size())
      throw UsageError("--signs needs one sign per --support entry");
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    long long c = parse_integer(cols[i], "--support");
    if (c < 1 || c > p)
      throw UsageError("--support: column " + cols[i] + " outside 1.." +
                       std::to_string(p));
    int sign = 1;
    if (!sg.empty()) {
      const std::string& t = sg[i];
      if (t == "+" || t == "+1" || t == "1")
        sign = 1;
      else if (t == "-" || t == "-1")
        sign = -1;
      else
        throw UsageError("--signs: '" + t + "' is not + or -");
    }
    entries.emplace_back(static_cast<int>(c - 1), sign);
  }
  std::sort(entries.begin(), entries.end());
  IndexSet idx;
  std::vector<int> s;
  for (auto [c, sign] : entries) {
    if (!idx.empty() && idx.back() == c)
      throw UsageError("--support lists column " + std::to_string(c + 1) + " twice");
    idx.push_back(c);
    s.push_back(sign);
  }
  return {idx, s};
}

Frequency parse_frequency(const std::string& text, const std::string& key) {
  auto slash = text.find('/');
  Frequency f;
  if (slash == std::string::npos) {
    f.num = parse_integer(text, key);
  } else {
    f.num = parse_integer(text.substr(0, slash), key);
    f.den = parse_integer(text.substr(slash + 1), key);
  }
  if (f.den <= 0 || f.num <= 0)
    throw UsageError(key + ": frequency must be a positive fraction num/den");
  return f;
}

DesignFamily parse_family(const std::string& s) {
  return s == "orthogonal" ? DesignFamily::kOrthogonal : DesignFamily::kGaussian;
}

// ---------------------------------------------------------------------------
// Output helpers.

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory", dir);
}

// Writes the report under --out with the echoed config, or prints the JSON
// report when no directory is given.
void deliver(const Command& cmd, const std::string& out_dir,
             const std::string& json_name, const Json& report,
             const std::vector<std::pair<std::string, CsvTable>>& tables,
             std::ostream& out) {
  if (out_dir.empty()) {
    out << to_json_text(report);
    return;
  }
  prepare_dir(out_dir);
  fs::path dir(out_dir);
  for (const auto& [file, table] : tables) write_report(table, dir / file);
  write_report(report, dir / json_name);
  write_report(cmd.resolved(), dir / "run_config.json");
}

Json indices_or_null(int k) { return k >= 0 ? Json(k + 1) : Json(nullptr); }

Json collinear_json(const DesignMatrix& d) {
  Json arr = Json::array();
  for (auto [i, j] : d.collinear_pairs()) arr.push_back(Json::array({i + 1, j + 1}));
  return arr;
}

// ---------------------------------------------------------------------------
// Subcommands.

int run_solve(const Command& cmd, const Args& a, std::ostream& out) {
  auto design = load_design(a.design, a.normalize);
  RegressionProblem problem(design, load_vector(a.response, design->n(), "response"));
  SolveOptions so;
  so.tol = a.tol;
  so.max_sweeps = a.max_sweeps;
  so.force = a.force;
  LassoFit fit = solve_at(problem, a.lambda, so);

  Json r;
  r["n"] = problem.n();
  r["p"] = problem.p();
  r["lambda"] = fit.lambda;
  r["objective"] = fit.kkt.objective;
  r["duality_gap"] = fit.kkt.duality_gap;
  r["kkt_max_violation"] = fit.kkt.max_violation;
  r["sweeps"] = fit.sweeps;
  r["lambda_max"] = lambda_max(problem);
  r["support"] = to_json_indices(support(fit.coefficients));
  r["active_set"] = to_json_indices(fit.kkt.active_set);
  r["collinear_pairs"] = collinear_json(*design);
  r["coefficients"] = to_json(fit.coefficients);
  deliver(cmd, a.out, "fit.json", r,
          {{"coefficients.csv", coefficients_table(fit.coefficients)}}, out);
  return kExitOk;
}

std::string event_label(const PathSegment& seg) {
  std::string s;
  for (const auto& ev : seg.events) {
    if (!s.empty()) s += ' ';
    s += ev.kind == EventKind::kJoin ? '+' : '-';
    s += std::to_string(ev.column + 1);
  }
  return s;
}

int run_path(const Command& cmd, const Args& a, std::ostream& out) {
  auto design = load_design(a.design, a.normalize);
  RegressionProblem problem(design, load_vector(a.response, design->n(), "response"));
  PathOptions po;
  po.force = a.force;
  po.max_events = a.max_events;
  LassoPath path = lasso_path(problem, a.lambda_min, po);

  CsvTable seg_table;
  seg_table.header = {"lambda_high", "lambda_low", "event", "active_size"};
  for (const auto& seg : path.segments())
    seg_table.add_row({format_real(seg.lambda_high), format_real(seg.lambda_low),
                       event_label(seg),
                       format_int(static_cast<long long>(seg.active_set.size()))});

  std::vector<double> at = a.at;
  if (at.empty()) {
    at.push_back(path.lambda_max());
    for (const auto& seg : path.segments()) at.push_back(seg.lambda_low);
  }
  Json points = Json::array();
  for (double lambda : at) {
    if (!(lambda >= path.lambda_min()))
      throw UsageError("--at: lambda " + format_real(lambda) +
                       " lies below --lambda-min");
    Vector b = path.coefficients_at(lambda);
    Json pt;
    pt["lambda"] = lambda;
    pt["support"] = to_json_indices(support(b));
    pt["coefficients"] = to_json(b);
    points.push_back(std::move(pt));
  }
  Json r;
  r["n"] = problem.n();
  r["p"] = problem.p();
  r["lambda_max"] = path.lambda_max();
  r["lambda_min"] = path.lambda_min();
  r["segments"] = static_cast<int>(path.segments().size());
  r["events"] = path.num_events();
  r["collinear_pairs"] = collinear_json(*design);
  r["points"] = std::move(points);
  deliver(cmd, a.out, "path.json", r, {{"segments.csv", seg_table}}, out);
  return kExitOk;
}

int run_xi_path(const Command& cmd, const Args& a, std::ostream& out) {
  auto design = load_design(a.design, a.normalize);
  Vector beta = load_vector(a.beta, design->p(), "beta");
  Vector noise;
  if (!a.noise.empty()) {
    noise = load_vector(a.noise, design->n(), "noise");
  } else {
    Rng rng(derive_seed(a.seed, 0, 0));
    noise = rng.normal_vector(design->n(), a.sigma);
  }
  auto problem = RegressionProblem::simulate(design, TruthSpec(beta, a.sigma), noise);
  XiPathOptions xo;
  xo.force = a.force;
  xo.max_events = a.max_events;
  XiPath path = xi_path(problem, a.lambda, xo);

  Vector origin = path.evaluate(0.0);
  CsvTable table;
  table.header = {"xi", "active_size", "l1_norm", "shift"};
  auto row = [&](double xi, std::size_t m, const Vector& b) {
    table.add_row({format_real(xi), format_int(static_cast<long long>(m)),
                   format_real(b.lpNorm<1>()), format_real((b - origin).norm())});
  };
  for (const auto& iv : path.intervals())
    row(iv.xi_start, iv.active_set.size(), iv.at(iv.xi_start));
  const auto& last = path.intervals().back();
  row(last.xi_end, last.active_set.size(), last.at(last.xi_end));

  VarianceBoundReport vb = variance_bound_check(path, *design, noise);
  Json r;
  r["n"] = problem.n();
  r["p"] = problem.p();
  r["lambda"] = path.lambda();
  r["intervals"] = static_cast<int>(path.intervals().size());
  r["continuity_gap"] = path.continuity_gap();
  r["sup_shift"] = vb.sup_shift;
  r["sup_xi"] = vb.sup_xi;
  r["max_theta_norm"] = vb.max_theta_norm;
  r["max_active"] = vb.max_active;
  r["inequality_holds"] = vb.inequality_holds;
  Json ols;
  try {
    RestrictedOlsReport ro = restricted_ols_report(path, *design, noise, a.sigma);
    ols["realized"] = ro.realized;
    ols["bound"] = ro.bound;
    ols["m"] = ro.m;
    ols["phi_min"] = ro.phi_min;
    ols["phi_exact"] = ro.phi_exact;
  } catch (const BoundUndefinedError& e) {
    ols = Json{{"error", e.what()}};
  }
  r["restricted_ols"] = std::move(ols);
  r["noiseless"] = to_json(origin);
  r["coefficients"] = to_json(path.evaluate(1.0));
  deliver(cmd, a.out, "xi_path.json", r, {{"xi_path.csv", table}}, out);
  return kExitOk;
}

Json eig_json(const SparseEigReport& rep) {
  Json j;
  j["m"] = rep.m;
  j["phi_min"] = rep.phi_min;
  j["phi_max"] = rep.phi_max;
  j["exact"] = rep.exact;
  j["witness_min"] = to_json_indices(rep.witness_min);
  j["witness_max"] = to_json_indices(rep.witness_max);
  return j;
}

int run_diagnose(const Command& cmd, const Args& a, std::ostream& out) {
  auto design = load_design(a.design, a.normalize);
  GramMatrix C = build_gram(*design);
  const int p = design->p();

  std::optional<std::pair<IndexSet, std::vector<int>>> supp;
  if (!a.support.empty()) supp = parse_support(a.support, a.signs, p);
  else if (!a.signs.empty()) throw UsageError("--signs needs --support");

  int m_max = a.sparse_eig_max;
  if (m_max == 0) m_max = supp ? std::max<int>(1, static_cast<int>(supp->first.size())) : 1;
  if (m_max > p) throw UsageError("--sparse-eig-max exceeds the column count");

  SparseEigOptions eo;
  eo.enumeration_cap = a.cap;
  eo.restarts = a.restarts;
  eo.seed = a.seed;
  bool exact = a.mode == "exact" ||
               (a.mode == "auto" && subset_count(p, m_max) <= a.cap);
  Json eig = Json::array();
  if (exact) {
    eo.mode = EigMode::kExact;
    for (const auto& rep : sparse_eig_profile(C, m_max, eo)) eig.push_back(eig_json(rep));
  } else {
    eo.mode = a.mode == "heuristic" ? EigMode::kHeuristic : EigMode::kAuto;
    for (int m = 1; m <= m_max; ++m) eig.push_back(eig_json(sparse_eig(C, m, eo)));
  }

  Json r;
  r["n"] = design->n();
  r["p"] = p;
  r["collinear_pairs"] = collinear_json(*design);
  r["sparse_eigenvalues"] = std::move(eig);
  if (supp) {
    IrrepresentableReport ir = irrepresentable_check(C, supp->first, supp->second);
    Json j;
    j["support"] = to_json_indices(ir.support);
    j["signs"] = ir.signs;
    j["value"] = ir.value;
    j["holds"] = ir.holds;
    j["margin"] = ir.margin;
    j["erc"] = ir.erc;
    j["condition_number"] = ir.condition_number;
    j["worst_column"] = indices_or_null(ir.worst_column);
    r["irrepresentable"] = std::move(j);
  }
  if (a.multipliers) {
    if (!supp) throw UsageError("--multipliers needs --support for the sparsity");
    MultiplierOptions mo;
    mo.threshold = a.threshold;
    mo.eig = eo;
    mo.eig.mode = a.mode == "exact" ? EigMode::kExact
                  : a.mode == "heuristic" ? EigMode::kHeuristic
                                          : EigMode::kAuto;
    IncoherenceReport inc = multiplier_search(
        C, static_cast<int>(supp->first.size()), design->n(), {}, mo);
    Json j;
    j["s"] = inc.s;
    j["threshold"] = inc.threshold;
    j["e_star"] = inc.e_star ? Json(*inc.e_star) : Json(nullptr);
    j["grid"] = inc.grid;
    j["ratio"] = inc.ratio;
    j["phi_min_size"] = inc.phi_min_size;
    j["phi_min"] = inc.phi_min;
    j["phi_max_size"] = inc.phi_max_size;
    j["phi_max"] = inc.phi_max;
    j["heuristic_used"] = inc.heuristic_used;
    r["multipliers"] = std::move(j);
  }
  deliver(cmd, a.out, "diagnose.json", r, {}, out);
  return kExitOk;
}

int run_two_step(const Command& cmd, const Args& a, std::ostream& out) {
  auto design = load_design(a.design, a.normalize);
  Vector y = load_vector(a.response, design->n(), "response");
  std::optional<TruthSpec> truth;
  if (!a.beta.empty()) truth.emplace(load_vector(a.beta, design->p(), "beta"), a.sigma);
  RegressionProblem problem(design, std::move(y), truth);
  ThresholdRule rule(a.sigma, a.t, design->n(), design->p());
  SolveOptions so;
  so.tol = a.tol;
  so.max_sweeps = a.max_sweeps;
  so.force = a.force;
  TwoStepResult res = two_step_recover(problem, a.lambda, rule, so);

  Json r;
  r["n"] = problem.n();
  r["p"] = problem.p();
  r["lambda"] = res.lambda;
  r["sigma"] = a.sigma;
  r["t"] = a.t;
  r["cutoff"] = res.cutoff;
  r["support_before"] = to_json_indices(res.support_before);
  r["support_after"] = to_json_indices(res.support_after);
  if (truth) {
    r["true_support"] = to_json_indices(truth->support());
    r["lasso_sign_match"] = res.lasso_sign_consistent;
    r["sign_match"] = res.recovered;
  } else {
    r["true_support"] = nullptr;
    r["lasso_sign_match"] = nullptr;
    r["sign_match"] = nullptr;
  }
  r["lasso"] = to_json(res.lasso);
  r["thresholded"] = to_json(res.thresholded);
  deliver(cmd, a.out, "two_step.json", r,
          {{"coefficients.csv", coefficients_table(res.thresholded)}}, out);
  return kExitOk;
}

void write_experiment(const Command& cmd, const std::string& dir, const Json& aggregate,
                      const std::vector<std::pair<std::string, CsvTable>>& tables) {
  prepare_dir(dir);
  for (const auto& [file, table] : tables) write_report(table, fs::path(dir) / file);
  write_report(aggregate, fs::path(dir) / "aggregate.json");
  write_report(cmd.resolved(), fs::path(dir) / "run_config.json");
}

int run_freq(const Command& cmd, const FreqArgs& a, std::ostream& out) {
  FrequencyExperimentConfig c;
  c.scenario.n = a.n;
  c.scenario.omega1 = parse_frequency(a.omega1, "omega1");
  c.scenario.omega2 = parse_frequency(a.omega2, "omega2");
  c.scenario.amplitude1 = a.amplitude1;
  c.scenario.amplitude2 = a.amplitude2;
  c.scenario.grid_den = a.grid_den;
  c.scenario.grid_first = a.grid_first;
  c.scenario.grid_last = a.grid_last;
  c.sigmas = a.sigmas;
  c.replications = a.replications;
  c.seed = a.seed;
  c.lambda_points = a.lambda_points;
  c.lambda_ratio = a.lambda_ratio;
  c.theory_e = a.theory_e;
  c.theory_multiplier = a.theory_multiplier;
  c.threads = a.threads;
  FrequencyExperimentReport rep = frequency_experiment(c);
  write_experiment(cmd, a.out, frequency_aggregate_json(rep),
                   {{"replications.csv", frequency_replications_table(rep)},
                    {"periodogram.csv", frequency_periodogram_table(rep)}});
  for (const auto& s : rep.summaries)
    out << "sigma " << s.sigma << ": resonance always active "
        << s.resonance_always_active_rate << ", periodogram peak at resonance "
        << s.periodogram_peak_rate << "\n";
  return kExitOk;
}

int run_scaling(const Command& cmd, const ScalingArgs& a, std::ostream& out) {
  ScalingScenario sc;
  sc.family = parse_family(a.family);
  sc.cells = ScalingScenario::doubling(a.n_grid, a.p_factor, a.s);
  sc.sigma = a.sigma;
  sc.beta_min = a.beta_min;
  sc.e = a.e;
  sc.multiplier = a.multiplier;
  sc.path_floor = a.path_floor;
  sc.replications = a.replications;
  sc.seed = a.seed;
  sc.threads = a.threads;
  sc.eigen_factor = a.eigen_factor;
  ScalingReport rep = scaling_experiment(sc);
  write_experiment(cmd, a.out, scaling_aggregate_json(rep),
                   {{"replications.csv", scaling_replications_table(rep)}});
  for (const auto& c : rep.cells)
    out << "n " << c.cell.n << " p " << c.cell.p << " s " << c.cell.s
        << ": median normalized error " << c.median_normalized << "\n";
  if (rep.slope) out << "slope " << *rep.slope << "\n";
  return kExitOk;
}

int run_active_set(const Command& cmd, const ActiveSetArgs& a, std::ostream& out) {
  ActiveSetScenario sc;
  sc.family = parse_family(a.family);
  sc.cell = {a.n, a.p, a.s};
  sc.sigma = a.sigma;
  sc.beta_min = a.beta_min;
  sc.e = a.e;
  sc.multiplier = a.multiplier;
  sc.lambda = a.lambda;
  sc.replications = a.replications;
  sc.seed = a.seed;
  sc.threads = a.threads;
  ActiveSetReport rep = active_set_bound_check(sc);
  write_experiment(cmd, a.out, active_set_json(rep),
                   {{"replications.csv", active_set_table(rep)}});
  out << "bound " << rep.bound << ", largest active set " << rep.max_sup << ", violations "
      << rep.violations << " of " << rep.replications.size() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Config files: keys become flags of the selected subcommand unless the
// same flag is already on the command line.

std::optional<std::string> find_config(const std::vector<std::string>& tokens) {
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i] == "--config" && i + 1 < tokens.size()) return tokens[i + 1];
    if (tokens[i].rfind("--config=", 0) == 0) return tokens[i].substr(9);
  }
  return std::nullopt;
}

bool on_command_line(const std::vector<std::string>& tokens, const std::string& flag) {
  return std::any_of(tokens.begin() + 1, tokens.end(), [&](const std::string& t) {
    return t == flag || t.rfind(flag + "=", 0) == 0;
  });
}

// Caught before CLI11 sees the tokens, so a misspelled flag is reported by
// name even when a required flag is missing too.
void reject_unknown_flags(const std::vector<std::string>& tokens, const Command& cmd) {
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (t.size() < 3 || t.rfind("--", 0) != 0) continue;
    std::string flag = t.substr(0, t.find('='));
    if (cmd.app->get_option_no_throw(flag) == nullptr)
      throw UsageError("unknown key '" + flag + "' for " + cmd.name);
  }
}

void inject_config(std::vector<std::string>& tokens, const std::string& file,
                   const Command& cmd) {
  std::vector<std::string> extra;
  for (auto& [key, value] : read_key_value_file(file)) {
    std::string flag = flag_name(key);
    if (flag == "--config" || flag == "--help" ||
        cmd.app->get_option_no_throw(flag) == nullptr)
      throw UsageError("unknown key '" + key + "' in config file " + file);
    if (on_command_line(tokens, flag)) continue;
    std::string v = value;
    if (v.find(',') != std::string::npos)
      v.erase(std::remove_if(v.begin(), v.end(), [](char c) { return c == ' '; }), v.end());
    extra.push_back(flag + "=" + v);
  }
  tokens.insert(tokens.end(), extra.begin(), extra.end());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e))
    return kExitIo;
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const InputError*>(&e))
    return kExitUsage;
  return kExitNumerical;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lasso fits, homotopy paths, design diagnostics and simulation studies.",
               "lassorec"};
  app.footer(
      "Columns are 1-based in every file and flag. Logarithms are natural.\n"
      "Any subcommand accepts --config FILE with `key = value` lines; flags on\n"
      "the command line win over the file. Exit codes: 0 ok, 1 usage or input,\n"
      "2 numerical, 3 IO.");
  app.require_subcommand(1);

  Args a;
  FreqArgs fa;
  ScalingArgs sa;
  ActiveSetArgs aa;
  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](CLI::App* parent, const std::string& name, const std::string& help,
                  const std::string& full_name) {
    auto cmd = std::make_unique<Command>();
    cmd->app = parent->add_subcommand(name, help);
    cmd->name = full_name;
    commands.push_back(std::move(cmd));
    return commands.back().get();
  };
  const auto positive = CLI::PositiveNumber;
  const auto nonneg = CLI::NonNegativeNumber;

  auto common = [&](Command* c, std::string& config, std::string& out_dir, bool out_required) {
    c->add("config", config, "key = value file; command-line flags take precedence");
    auto* o = c->add("out", out_dir, out_required ? "output directory"
                                                  : "output directory (default: JSON on stdout)");
    if (out_required) o->required();
  };
  auto fit_inputs = [&](Command* c) {
    c->add("design", a.design, "design matrix CSV (n rows, p columns)")->required();
    c->add_flag("normalize", a.normalize, "rescale columns to squared norm n");
  };

  Command* solve = make(&app, "solve", "Lasso at one lambda with a KKT certificate", "solve");
  common(solve, a.config, a.out, false);
  fit_inputs(solve);
  solve->add("response", a.response, "response CSV, one column")->required();
  solve->add("lambda", a.lambda, "penalty in ||Y - Xb||^2 + lambda ||b||_1")
      ->required()
      ->check(nonneg);
  solve->add("tol", a.tol, "relative duality gap target")->check(positive);
  solve->add("max-sweeps", a.max_sweeps, "coordinate sweep limit")->check(positive);
  solve->add_flag("force", a.force, "proceed on designs with collinear columns");

  Command* path = make(&app, "path", "exact homotopy path down to --lambda-min", "path");
  common(path, a.config, a.out, false);
  fit_inputs(path);
  path->add("response", a.response, "response CSV, one column")->required();
  path->add("lambda-min", a.lambda_min, "lower end of the path")->required()->check(nonneg);
  path->add("at", a.at, "lambdas to report coefficients at (default: every knot)")
      ->delimiter(',');
  path->add("max-events", a.max_events, "event limit, 0 = 50 (n + p)")->check(nonneg);
  path->add_flag("force", a.force, "proceed on designs with collinear columns");

  Command* xi = make(&app, "xi-path", "Lasso path in xi for Y(xi) = X beta + xi eps",
                     "xi-path");
  common(xi, a.config, a.out, false);
  fit_inputs(xi);
  xi->add("beta", a.beta, "true coefficients CSV")->required();
  xi->add("noise", a.noise, "noise CSV (default: sigma N(0, I) drawn from --seed)");
  xi->add("sigma", a.sigma, "noise level")->check(nonneg);
  xi->add("seed", a.seed, "noise seed");
  xi->add("lambda", a.lambda, "fixed penalty")->required()->check(positive);
  xi->add("max-events", a.max_events, "event limit, 0 = 50 (n + p)")->check(nonneg);
  xi->add_flag("force", a.force, "proceed on designs with collinear columns");

  Command* diag = make(&app, "diagnose",
                       "sparse eigenvalues, irrepresentable condition, multipliers",
                       "diagnose");
  common(diag, a.config, a.out, false);
  fit_inputs(diag);
  diag->add("support", a.support, "1-based support, e.g. \"1,5,9\"");
  diag->add("signs", a.signs, "signs on the support, e.g. \"+,+,-\" (default all +)");
  diag->add("sparse-eig-max", a.sparse_eig_max,
            "largest subset size (default: support size, else 1)")
      ->check(nonneg);
  diag->add("mode", a.mode, "exact, heuristic or auto")
      ->check(CLI::IsMember({"exact", "heuristic", "auto"}));
  diag->add("cap", a.cap, "subset enumeration cap");
  diag->add("restarts", a.restarts, "heuristic restarts")->check(positive);
  diag->add("seed", a.seed, "heuristic seed");
  diag->add_flag("multipliers", a.multipliers, "search the sparsity multiplier e");
  diag->add("threshold", a.threshold, "multiplier ratio threshold")->check(positive);

  Command* two = make(&app, "two-step", "Lasso followed by hard thresholding", "two-step");
  common(two, a.config, a.out, false);
  fit_inputs(two);
  two->add("response", a.response, "response CSV, one column")->required();
  two->add("beta", a.beta, "true coefficients CSV for the sign checks");
  two->add("lambda", a.lambda, "Lasso penalty")->required()->check(nonneg);
  two->add("sigma", a.sigma, "noise level in the cutoff")->required()->check(nonneg);
  two->add("t", a.t, "cutoff multiplier: sigma t sqrt(log p / n)")->required()->check(nonneg);
  two->add("tol", a.tol, "relative duality gap target")->check(positive);
  two->add("max-sweeps", a.max_sweeps, "coordinate sweep limit")->check(positive);
  two->add_flag("force", a.force, "proceed on designs with collinear columns");

  CLI::App* experiment = app.add_subcommand("experiment", "simulation studies");
  experiment->require_subcommand(1);

  Command* freq = make(experiment, "freq", "two-sinusoid frequency detection",
                       "experiment freq");
  common(freq, fa.config, fa.out, true);
  freq->add("n", fa.n, "samples at t = 1..n")->check(positive);
  freq->add("omega1", fa.omega1, "first signal frequency num/den");
  freq->add("omega2", fa.omega2, "second signal frequency num/den");
  freq->add("amplitude1", fa.amplitude1, "first amplitude");
  freq->add("amplitude2", fa.amplitude2, "second amplitude");
  freq->add("grid-den", fa.grid_den, "grid frequencies k / grid_den")->check(positive);
  freq->add("grid-first", fa.grid_first, "first k")->check(positive);
  freq->add("grid-last", fa.grid_last, "last k")->check(positive);
  freq->add("sigmas", fa.sigmas, "noise levels, comma separated")->delimiter(',');
  freq->add("replications", fa.replications, "replications per sigma")->check(positive);
  freq->add("seed", fa.seed, "base seed");
  freq->add("lambda-points", fa.lambda_points, "log lambda grid size")
      ->check(CLI::Range(2, 100000));
  freq->add("lambda-ratio", fa.lambda_ratio, "lambda_min / lambda_max")
      ->check(CLI::Range(0.0, 1.0));
  freq->add("theory-e", fa.theory_e, "e in the theory lambda")->check(positive);
  freq->add("theory-multiplier", fa.theory_multiplier, "multiplier in the theory lambda")
      ->check(positive);
  freq->add("threads", fa.threads, "worker threads")->check(positive);

  Command* scal = make(experiment, "scaling", "Monte Carlo l2 error against s log p / n",
                       "experiment scaling");
  common(scal, sa.config, sa.out, true);
  scal->add("family", sa.family, "gaussian or orthogonal")
      ->check(CLI::IsMember({"gaussian", "orthogonal"}));
  scal->add("n-grid", sa.n_grid, "sample sizes, comma separated")->delimiter(',');
  scal->add("p-factor", sa.p_factor, "p = round(p_factor n)")->check(positive);
  scal->add("s", sa.s, "sparsity")->check(nonneg);
  scal->add("sigma", sa.sigma, "noise level")->check(nonneg);
  scal->add("beta-min", sa.beta_min, "nonzero magnitude")->check(positive);
  scal->add("e", sa.e, "e in the theory lambda")->check(positive);
  scal->add("multiplier", sa.multiplier, "multiplier in the theory lambda")->check(positive);
  scal->add("path-floor", sa.path_floor, "path stops at floor sigma sqrt(n log p)")
      ->check(nonneg);
  scal->add("replications", sa.replications, "replications per cell")->check(positive);
  scal->add("seed", sa.seed, "base seed");
  scal->add("threads", sa.threads, "worker threads")->check(positive);
  scal->add("eigen-factor", sa.eigen_factor, "report the sparse eigenvalue rate factor");

  Command* act = make(experiment, "active-set", "active-set size along the xi-path",
                      "experiment active-set");
  common(act, aa.config, aa.out, true);
  act->add("family", aa.family, "gaussian or orthogonal")
      ->check(CLI::IsMember({"gaussian", "orthogonal"}));
  act->add("n", aa.n, "samples")->check(positive);
  act->add("p", aa.p, "columns")->check(positive);
  act->add("s", aa.s, "sparsity")->check(nonneg);
  act->add("sigma", aa.sigma, "noise level")->check(nonneg);
  act->add("beta-min", aa.beta_min, "nonzero magnitude")->check(positive);
  act->add("e", aa.e, "sparsity multiplier")->check(positive);
  act->add("multiplier", aa.multiplier, "multiplier in the theory lambda")->check(positive);
  act->add("lambda", aa.lambda, "penalty (default: theory lambda)");
  act->add("replications", aa.replications, "replications")->check(positive);
  act->add("seed", aa.seed, "base seed");
  act->add("threads", aa.threads, "worker threads")->check(positive);

  std::map<const CLI::App*, Command*> by_app;
  for (auto& c : commands) by_app[c->app] = c.get();

  std::vector<std::string> tokens(argv, argv + argc);
  try {
    CLI::App* cur = &app;
    for (std::size_t i = 1; i < tokens.size() && tokens[i].rfind("-", 0) != 0; ++i) {
      CLI::App* next = cur->get_subcommand_no_throw(tokens[i]);
      if (next == nullptr) break;
      cur = next;
    }
    if (auto it = by_app.find(cur); it != by_app.end()) {
      reject_unknown_flags(tokens, *it->second);
      if (auto file = find_config(tokens)) inject_config(tokens, *file, *it->second);
    }
    std::vector<std::string> args(tokens.rbegin(), tokens.rend() - 1);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }

  try {
    if (solve->app->parsed()) return run_solve(*solve, a, out);
    if (path->app->parsed()) return run_path(*path, a, out);
    if (xi->app->parsed()) return run_xi_path(*xi, a, out);
    if (diag->app->parsed()) return run_diagnose(*diag, a, out);
    if (two->app->parsed()) return run_two_step(*two, a, out);
    if (freq->app->parsed()) return run_freq(*freq, fa, out);
    if (scal->app->parsed()) return run_scaling(*scal, sa, out);
    if (act->app->parsed()) return run_active_set(*act, aa, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

}  // namespace lassorec::cli
