#include "sparse_minimax/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "sparse_minimax/concentration_suite.hpp"
#include "sparse_minimax/config.hpp"
#include "sparse_minimax/design_diagnostics.hpp"
#include "sparse_minimax/parallel.hpp"
#include "sparse_minimax/proof_events.hpp"
#include "sparse_minimax/risk_lab.hpp"
#include "sparse_minimax/serialize.hpp"

#ifndef SPARSE_MINIMAX_VERSION
#define SPARSE_MINIMAX_VERSION "unknown"
#endif

namespace sparse_minimax::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "manifest.json";

const std::set<std::string> kProofLemmas = {"gap", "resolvent", "stochastic-error", "l2-bound", "moments"};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to reproduce a run. config_text is canonical key = value
/// text; the seed and thread count are kept apart so that a manifest can
/// override the former and ignore the latter.
struct Job {
  std::string subcommand;
  std::string config_text;
  std::string grid_text;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct JobResult {
  int status = kExitOk;
  std::vector<std::pair<std::string, std::string>> files;
  std::string console;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

KeyValueConfig without(const KeyValueConfig& kv, const std::set<std::string>& drop) {
  KeyValueConfig out;
  for (const auto& e : kv.entries) {
    if (!drop.count(e.first)) out.entries.push_back(e);
  }
  return out;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

// ---- simulate-risk / sweep ----

JobResult execute_risk(const Job& job) {
  ExperimentConfig cfg = experiment_from(parse_key_values(job.config_text));
  cfg.master_seed = job.seed;
  cfg.threads = job.threads;
  cfg.validate();
  const RiskReport report = empirical_risk(cfg);

  json summary = {{"manifest", kManifestName},
                  {"subcommand", job.subcommand},
                  {"config", to_json(cfg)},
                  {"results", risk_summary(report)}};

  JobResult res;
  res.files.emplace_back("risk.csv", risk_csv(report));
  res.files.emplace_back("risk.tsv", risk_tsv(report, kManifestName));
  res.files.emplace_back("summary.json", summary.dump(2) + "\n");

  std::ostringstream con;
  con << "n=" << cfg.n << " p=" << cfg.p << " k=" << cfg.k << " reps=" << cfg.reps << " seed=" << cfg.master_seed
      << "  denominator=" << fmt(report.denominator) << "  predicted oracle ratio="
      << fmt(oracle_ratio_prediction(cfg.n, cfg.p, cfg.k, cfg.eps)) << '\n';
  for (const auto& e : report.estimators) {
    con << std::left << std::setw(11) << to_string(e.id) << " minimax_ratio=" << fmt(e.minimax_ratio)
        << " sup_amplitude=" << fmt(e.sup_amplitude) << " flagged=" << e.flagged << (e.failed ? "  FAILED" : "")
        << '\n';
  }
  if (report.failed) {
    con << "run failed: " << report.failure << '\n';
    res.status = kExitFailure;
  }
  res.console = con.str();
  return res;
}

// ---- diagnose-design ----

JobResult execute_diagnose(const Job& job) {
  const KeyValueConfig kv = parse_key_values(job.config_text);
  for (const auto& [key, value] : kv.entries) {
    if (!std::set<std::string>{"n", "p", "k", "eps", "restarts", "instance"}.count(key)) {
      throw ConfigError("unknown diagnose-design key '" + key + "'");
    }
  }
  auto num = [&](const char* key) {
    const auto v = kv.get(key);
    if (!v) throw ConfigError(std::string("diagnose-design: missing ") + key);
    try {
      return std::stod(*v);
    } catch (const std::exception&) {
      throw ConfigError(std::string("diagnose-design: bad value for ") + key);
    }
  };
  const int k = static_cast<int>(num("k"));
  const double eps = num("eps");
  const int restarts = static_cast<int>(num("restarts"));
  if (k < 1) throw std::invalid_argument("diagnose-design: k must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("diagnose-design: eps must be > 0");
  if (restarts < 1) throw std::invalid_argument("diagnose-design: restarts must be >= 1");

  Matrix X;
  json source;
  if (const auto path = kv.get("instance")) {
    X = load_instance(*path).X();
    source = {{"instance", *path}};
  } else {
    const auto n = static_cast<Eigen::Index>(num("n"));
    const auto p = static_cast<Eigen::Index>(num("p"));
    if (n < 1 || p < 1) throw std::invalid_argument("diagnose-design: n and p must be >= 1");
    X = gen_design(n, p, SeedSpec{job.seed, 0}).X;
    source = {{"gaussian", {{"n", n}, {"p", p}, {"seed", job.seed}}}};
  }
  if (k >= X.cols()) throw std::invalid_argument("diagnose-design: k must be < p");

  EventAOptions opts;
  opts.restarts = restarts;
  opts.seed = job.seed;
  opts.threads = job.threads;
  const EventAReport report = event_a_check(X, k, eps, opts);

  json out = {{"manifest", kManifestName},
              {"design", source},
              {"k", k},
              {"eps", eps},
              {"restarts", restarts},
              {"seed", job.seed},
              {"event_a", to_json(report)}};

  JobResult res;
  res.files.emplace_back("diagnose.json", out.dump(2) + "\n");
  std::ostringstream con;
  con << "max column norm = " << fmt(report.max_col_norm) << "  limit " << fmt(report.col_norm_limit)
      << (report.max_col_norm_ok ? "  ok" : "  exceeded") << '\n';
  if (report.theta_evaluated) {
    con << "theta upper bound = " << fmt(report.theta_upper) << (report.theta_exact ? " (exact)" : "")
        << "  threshold " << fmt(report.theta_threshold) << (report.theta_ok ? "  ok" : "  below") << '\n';
  }
  con << "delta0 = " << fmt(report.delta0) << "  c0 = " << fmt(report.c0) << '\n'
      << "event A " << (report.holds ? "holds" : "fails") << '\n';
  res.console = con.str();
  return res;
}

// ---- check-lemma ----

ProofRunConfig proof_defaults(const std::string& lemma) {
  ProofRunConfig c;
  if (lemma == "stochastic-error") {
    // p/k = 500 and a design whose column norms satisfy the hypothesis.
    c.n = 400;
    c.p = 1000;
    c.k = 2;
    c.reps = 200;
    c.u_random = 64;
    c.stochastic.delta0 = 0.25;
    c.stochastic.delta3 = 0.05;
  }
  if (lemma == "moments") c.reps = 500;
  return c;
}

JobResult execute_proof_lemma(const std::string& lemma, const KeyValueConfig& kv, const Job& job) {
  double min_containment = 0.90;
  if (const auto v = kv.get("min_containment")) min_containment = std::stod(*v);
  const KeyValueConfig rest = without(kv, {"min_containment"});

  ProofRunConfig cfg = proof_defaults(lemma);
  const ProofRunConfig parsed = proof_run_from(rest);
  // Apply only keys that were given so the per-lemma defaults survive.
  if (rest.get("n")) cfg.n = parsed.n;
  if (rest.get("p")) cfg.p = parsed.p;
  if (rest.get("k")) cfg.k = parsed.k;
  if (rest.get("sigma")) cfg.sigma = parsed.sigma;
  if (rest.get("eps")) cfg.eps = parsed.eps;
  if (rest.get("amplitude_multiplier")) cfg.amplitude_multiplier = parsed.amplitude_multiplier;
  if (rest.get("k_star")) cfg.k_star = parsed.k_star;
  if (rest.get("reps")) cfg.reps = parsed.reps;
  if (rest.get("u_random")) cfg.u_random = parsed.u_random;
  if (rest.get("delta0")) cfg.stochastic.delta0 = parsed.stochastic.delta0;
  if (rest.get("delta1")) cfg.stochastic.delta1 = parsed.stochastic.delta1;
  if (rest.get("delta2")) cfg.stochastic.delta2 = parsed.stochastic.delta2;
  if (rest.get("delta3")) cfg.stochastic.delta3 = parsed.stochastic.delta3;
  cfg.seed = job.seed;
  cfg.threads = job.threads;
  cfg.validate();

  json result;
  bool pass = false;
  std::ostringstream con;
  con << lemma << ": n=" << cfg.n << " p=" << cfg.p << " k=" << cfg.k << " reps=" << cfg.reps
      << " seed=" << cfg.seed << '\n';
  if (lemma == "gap" || lemma == "resolvent") {
    const GapRun run = run_gap_experiment(cfg);
    result = to_json(run);
    if (lemma == "gap") {
      pass = run.violated == 0;
      con << "non-vacuous " << run.non_vacuous << "  holds " << run.holds << "  violated " << run.violated
          << "  worst excess " << fmt(run.worst_excess) << '\n';
    } else {
      pass = run.containment_rate >= min_containment;
      result["min_containment"] = min_containment;
      con << "containment rate " << fmt(run.containment_rate) << "  required " << fmt(min_containment)
          << "  mean delta_emp " << fmt(run.mean_delta_emp) << '\n';
    }
  } else if (lemma == "stochastic-error") {
    const StochasticRun run = run_stochastic_error(cfg);
    result = to_json(run);
    pass = run.applicable && run.pass;
    if (!run.applicable) {
      con << "not applicable: the design violates the column-norm hypothesis\n";
    } else {
      con << "failure fraction " << fmt(run.failure_fraction) << "  tolerated " << fmt(run.tolerated) << '\n';
    }
  } else if (lemma == "l2-bound") {
    const LassoErrorRun run = run_lasso_error_bounds(cfg);
    result = to_json(run);
    pass = run.below_bound == run.reps;
    con << "bound " << fmt(run.l2_bound) << "  max error " << fmt(run.max_error) << "  below " << run.below_bound
        << "/" << run.reps << "  event A held on " << run.event_a_holds << '\n';
  } else {
    const LassoErrorRun run = run_lasso_error_bounds(cfg);
    result = to_json(run);
    pass = run.mean_sq_error <= run.moment_bound;
    con << "second-moment bound " << fmt(run.moment_bound) << "  mean sq error " << fmt(run.mean_sq_error)
        << "  on event A " << fmt(run.mean_sq_error_on_event) << '\n';
  }
  con << (pass ? "PASS" : "FAIL") << '\n';

  json report = {{"manifest", kManifestName},
                 {"lemma", lemma},
                 {"config", to_json(cfg)},
                 {"result", result},
                 {"pass", pass}};
  JobResult res;
  res.status = pass ? kExitOk : kExitFailure;
  res.files.emplace_back("report.json", report.dump(2) + "\n");
  res.console = con.str();
  return res;
}

JobResult execute_binom(const KeyValueConfig& kv) {
  int max_p = 60;
  if (const auto v = kv.get("max_p")) max_p = std::stoi(*v);
  if (max_p < 1) throw std::invalid_argument("binom: max_p must be >= 1");
  int checked = 0;
  json failures = json::array();
  for (int p = 1; p <= max_p; ++p) {
    for (int s = 1; s <= p; ++s) {
      const BinomialCheck c = binom_bound_check(p, s);
      ++checked;
      if (!c.holds) failures.push_back({{"p", p}, {"s", s}, {"check", to_json(c)}});
    }
  }
  const bool pass = failures.empty();
  json report = {{"manifest", kManifestName}, {"lemma", "binom"}, {"max_p", max_p}, {"checked", checked},
                 {"failures", failures}, {"pass", pass}};
  JobResult res;
  res.status = pass ? kExitOk : kExitFailure;
  res.files.emplace_back("report.json", report.dump(2) + "\n");
  res.console = "binom: " + std::to_string(checked) + " pairs with p <= " + std::to_string(max_p) + ", " +
                std::to_string(failures.size()) + " failures\n" + (pass ? "PASS\n" : "FAIL\n");
  return res;
}

JobResult execute_tail(const std::string& lemma, const KeyValueConfig& kv, const Job& job) {
  const LemmaSpec& spec = find_lemma(lemma);
  int reps = spec.default_reps();
  if (const auto v = kv.get("reps")) reps = std::stoi(*v);
  const auto grid = job.grid_text.empty() ? std::vector<GridPoint>{} : parse_grid(job.grid_text);
  const TailReport tail = check_tail_bound(lemma, grid, reps, job.seed, job.threads);

  json report = {{"manifest", kManifestName},
                 {"lemma", lemma},
                 {"statement", spec.statement},
                 {"sampler", spec.sampler},
                 {"reps", reps},
                 {"seed", job.seed},
                 {"grid", job.grid_text.empty() ? "default" : "file"},
                 {"result", to_json(tail)}};

  std::ostringstream con;
  con << lemma << (tail.surrogate ? " (surrogate level)" : "") << "  reps=" << reps << " seed=" << job.seed << '\n';
  con << std::left << std::setw(28) << "point" << std::right << std::setw(13) << "empirical" << std::setw(13)
      << "bound" << std::setw(13) << "stderr" << std::setw(13) << "margin" << "  result\n";
  for (const auto& t : tail.points) {
    con << std::left << std::setw(28) << t.point.describe() << std::right << std::setw(13) << fmt(t.empirical)
        << std::setw(13) << fmt(t.bound) << std::setw(13) << fmt(t.stderr_) << std::setw(13) << fmt(t.margin)
        << (t.pass ? "  pass" : "  FAIL") << '\n';
  }
  con << (tail.pass ? "PASS" : "FAIL") << '\n';

  JobResult res;
  res.status = tail.pass ? kExitOk : kExitFailure;
  res.files.emplace_back("report.json", report.dump(2) + "\n");
  res.console = con.str();
  return res;
}

JobResult execute_lemma(const Job& job) {
  const KeyValueConfig kv = parse_key_values(job.config_text);
  const auto lemma = kv.get("lemma");
  if (!lemma) throw ConfigError("check-lemma: missing lemma");
  const KeyValueConfig rest = without(kv, {"lemma"});
  if (kProofLemmas.count(*lemma)) return execute_proof_lemma(*lemma, rest, job);
  if (*lemma == "binom") return execute_binom(rest);
  try {
    find_lemma(*lemma);
  } catch (const std::invalid_argument&) {
    std::string known = "binom";
    for (const auto& id : kProofLemmas) known += ", " + id;
    for (const auto& s : lemma_registry()) known += ", " + s.id;
    throw UsageError("unknown lemma '" + *lemma + "' (known: " + known + ")");
  }
  return execute_tail(*lemma, rest, job);
}

JobResult execute(const Job& job) {
  if (job.subcommand == "simulate-risk" || job.subcommand == "sweep") return execute_risk(job);
  if (job.subcommand == "diagnose-design") return execute_diagnose(job);
  if (job.subcommand == "check-lemma") return execute_lemma(job);
  throw UsageError("cannot run subcommand '" + job.subcommand + "'");
}

// ---- output ----

fs::path require_out_dir(const std::string& out_dir) {
  const fs::path dir(out_dir);
  if (!fs::is_directory(dir)) throw UsageError("output directory does not exist: " + out_dir);
  return dir;
}

void write_outputs(const fs::path& dir, const Job& job, const JobResult& res, const std::string& started) {
  json outputs = json::array();
  for (const auto& [name, content] : res.files) {
    write_atomic(dir / name, content);
    outputs.push_back(name);
  }
  json manifest = {{"subcommand", job.subcommand},
                   {"version", SPARSE_MINIMAX_VERSION},
                   {"master_seed", job.seed},
                   {"config_text", job.config_text},
                   {"outputs", outputs},
                   {"started", started},
                   {"finished", utc_now()}};
  if (!job.grid_text.empty()) manifest["grid_text"] = job.grid_text;
  write_atomic(dir / kManifestName, manifest.dump(2) + "\n");
}

int finish(const Job& job, const std::string& out_dir, bool print_json, std::ostream& out) {
  std::optional<fs::path> dir;
  if (!out_dir.empty()) dir = require_out_dir(out_dir);
  const std::string started = utc_now();
  const JobResult res = execute(job);
  if (print_json && !res.files.empty()) {
    out << res.files.back().second;
  } else {
    out << res.console;
  }
  if (dir) write_outputs(*dir, job, res, started);
  return res.status;
}

// ---- replay ----

int replay(const std::string& manifest_path, int threads, std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) throw UsageError("cannot read manifest " + manifest_path);
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("malformed manifest " + manifest_path + ": " + e.what());
  }
  Job job;
  try {
    job.subcommand = manifest.at("subcommand").get<std::string>();
    job.config_text = manifest.at("config_text").get<std::string>();
    job.seed = manifest.at("master_seed").get<std::uint64_t>();
    if (manifest.contains("grid_text")) job.grid_text = manifest.at("grid_text").get<std::string>();
    const std::string version = manifest.value("version", std::string("unknown"));
    if (version != SPARSE_MINIMAX_VERSION) {
      err << "warning: manifest written by version " << version << ", this is " << SPARSE_MINIMAX_VERSION
          << "; comparing anyway\n";
    }
  } catch (const json::exception& e) {
    throw UsageError("manifest " + manifest_path + " lacks a required field: " + e.what());
  }
  job.threads = threads;

  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<std::string> names;
  for (const auto& name : manifest.value("outputs", json::array())) names.push_back(name.get<std::string>());
  for (const auto& name : names) {
    if (!fs::exists(dir / name)) throw UsageError("output file missing: " + (dir / name).string());
  }

  const JobResult res = execute(job);
  int mismatches = 0;
  for (const auto& name : names) {
    const std::string recorded = read_text_file((dir / name).string());
    const auto it = std::find_if(res.files.begin(), res.files.end(), [&](const auto& f) { return f.first == name; });
    if (it == res.files.end()) {
      out << name << ": not produced by the rerun\n";
      ++mismatches;
    } else if (it->second != recorded) {
      out << name << ": differs\n";
      ++mismatches;
    } else {
      out << name << ": identical\n";
    }
  }
  out << (mismatches == 0 ? "replay matches\n" : "replay MISMATCH\n");
  return mismatches == 0 ? kExitOk : kExitFailure;
}

std::string read_config_file(const std::string& path) {
  return path.empty() ? std::string() : read_text_file(path);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-regression minimax risk: estimators, diagnostics, lemma checks and risk experiments",
               "sparse_minimax"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPARSE_MINIMAX_VERSION);

  int threads = 1;
  std::string config_path, out_dir, grid_path, lemma, manifest_path, estimators_opt, multipliers_opt;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  bool print_json = false;
  Eigen::Index n = 200, p = 400;
  int k = 4, restarts = 64;
  double eps = 0.1;
  std::string instance_path;

  auto* sim = app.add_subcommand("simulate-risk", "Monte Carlo risk of the configured estimators");
  sim->add_option("--config", config_path, "key = value experiment file")->required();
  sim->add_option("--seed", seed, "master seed (overrides the config)");
  sim->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--out", out_dir, "existing output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Paired amplitude sweep over several estimators");
  sweep->add_option("--config", config_path, "key = value experiment file")->required();
  sweep->add_option("--estimators", estimators_opt, "comma list (default lasso,slope,oracle)");
  sweep->add_option("--amplitude-multipliers", multipliers_opt,
                    "comma list in units of sigma sqrt(2 log(p/k) / n)");
  sweep->add_option("--seed", seed, "master seed (overrides the config)");
  sweep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "existing output directory")->required();

  auto* diag = app.add_subcommand("diagnose-design", "Column norms and restricted eigenvalue of a design");
  diag->add_option("--n", n, "rows of a Gaussian design")->check(CLI::PositiveNumber);
  diag->add_option("--p", p, "columns of a Gaussian design")->check(CLI::PositiveNumber);
  diag->add_option("--instance", instance_path, "binary instance file instead of a Gaussian design");
  diag->add_option("--k", k, "sparsity")->check(CLI::PositiveNumber);
  diag->add_option("--eps", eps, "tuning slack")->check(CLI::PositiveNumber);
  diag->add_option("--restarts", restarts, "random starts of the cone search")->check(CLI::PositiveNumber);
  diag->add_option("--seed", seed, "seed for the design and the restarts");
  diag->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  diag->add_option("--out", out_dir, "existing output directory");
  diag->add_flag("--json", print_json, "print the JSON report instead of the summary");

  auto* check = app.add_subcommand("check-lemma", "Check one lemma by Monte Carlo or exact arithmetic");
  check->add_option("--lemma", lemma, "lemma id")->required();
  check->add_option("--config", config_path, "key = value run file (proof lemmas)");
  check->add_option("--grid", grid_path, "grid file, one point per line as name=value pairs");
  check->add_option("--reps", reps, "replicates")->check(CLI::PositiveNumber);
  check->add_option("--seed", seed, "seed");
  check->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  check->add_option("--out", out_dir, "existing output directory");
  check->add_flag("--json", print_json, "print the JSON report instead of the table");

  auto* rep = app.add_subcommand("replay", "Rerun a manifest and byte-compare its data files");
  rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  rep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  threads = resolve_threads(threads);

  try {
    if (*rep) return replay(manifest_path, threads, out, err);

    Job job;
    job.threads = threads;
    if (*sim || *sweep) {
      KeyValueConfig kv = parse_key_values(read_config_file(config_path));
      if (*sweep) {
        if (!estimators_opt.empty()) kv.set("estimators", estimators_opt);
        else if (!kv.get("estimators") && !kv.get("estimator")) kv.set("estimators", "lasso,slope,oracle");
        if (!multipliers_opt.empty()) {
          kv = without(kv, {"amplitudes", "amplitude_multipliers"});
          kv.set("amplitude_multipliers", multipliers_opt);
        }
      }
      ExperimentConfig cfg = experiment_from(kv);
      if (seed) cfg.master_seed = *seed;
      cfg.validate();
      job.subcommand = *sim ? "simulate-risk" : "sweep";
      job.config_text = to_config_text(cfg);
      job.seed = cfg.master_seed;
      return finish(job, out_dir, false, out);
    }
    if (*diag) {
      std::ostringstream text;
      if (!instance_path.empty()) {
        text << "instance = " << instance_path << '\n';
      } else {
        text << "n = " << n << "\np = " << p << '\n';
      }
      text << "k = " << k << "\neps = " << format_double(eps) << "\nrestarts = " << restarts << '\n';
      job.subcommand = "diagnose-design";
      job.config_text = text.str();
      job.seed = seed.value_or(0);
      return finish(job, out_dir, print_json, out);
    }
    // check-lemma
    std::string text = "lemma = " + lemma + "\n";
    if (kProofLemmas.count(lemma) || lemma == "binom") {
      KeyValueConfig kv = parse_key_values(read_config_file(config_path));
      if (reps) kv.set("reps", std::to_string(*reps));
      if (lemma != "binom") {
        // Validate keys now so that a bad file is a usage error.
        (void)proof_run_from(without(kv, {"min_containment"}));
      }
      std::optional<std::uint64_t> file_seed;
      if (const auto s = kv.get("seed")) file_seed = std::stoull(*s);
      if (const auto s = kv.get("master_seed")) file_seed = std::stoull(*s);
      kv = without(kv, {"seed", "master_seed", "threads"});
      for (const auto& [key, value] : kv.entries) text += key + " = " + value + "\n";
      job.seed = seed ? *seed : file_seed.value_or(0);
    } else {
      if (!config_path.empty()) throw UsageError("--config applies to proof lemmas only; use --grid");
      if (reps) text += "reps = " + std::to_string(*reps) + "\n";
      job.grid_text = read_config_file(grid_path);
      job.seed = seed.value_or(0);
    }
    job.subcommand = "check-lemma";
    job.config_text = text;
    return finish(job, out_dir, print_json, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace sparse_minimax::cli
