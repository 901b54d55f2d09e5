#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include "sparse_minimax/cli.hpp"
#include "sparse_minimax/concentration_suite.hpp"
#include "sparse_minimax/config.hpp"
#include "sparse_minimax/design_diagnostics.hpp"
#include "sparse_minimax/estimators.hpp"
#include "sparse_minimax/parallel.hpp"
#include "sparse_minimax/proof_events.hpp"
#include "sparse_minimax/risk_lab.hpp"

namespace sm = sparse_minimax;
namespace fs = std::filesystem;
using sm::Matrix;
using sm::Vector;

namespace {

constexpr std::uint64_t kSeed = 20260101;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Context {
  int threads = 1;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

sm::ExperimentConfig desk(const Context& ctx) {
  sm::ExperimentConfig c;
  c.n = 4000;
  c.p = 8000;
  c.k = 8;
  c.sigma = 1.0;
  c.eps = 0.1;
  c.reps = 200;
  c.master_seed = kSeed;
  c.threads = ctx.threads;
  return c;
}

Verdict criterion1(const Context&) {
  const std::vector<double> mus{0, 0.5, 1, 2, 5, 10, 50};
  const std::vector<double> taus{0, 0.5, 1, 2, 4};
  std::vector<std::pair<double, double>> grid;
  double worst = 0.0;
  for (double mu : mus) {
    for (double tau : taus) {
      grid.emplace_back(mu, tau);
      worst = std::max(worst, std::abs(sm::st_risk_exact(mu, tau) - sm::st_risk_quadrature(mu, tau)));
    }
  }
  const auto bounds = sm::st_risk_bounds_check(grid);
  return {worst <= 1e-8 && bounds.all_ok,
          "max |exact - quadrature| = " + fmt("%.3e", worst) + ", bounds " + (bounds.all_ok ? "hold" : "violated")};
}

Verdict criterion2(const Context& ctx) {
  auto c = desk(ctx);
  c.estimators = {sm::EstimatorId::kOracle};
  const auto report = sm::empirical_risk(c);
  const double ratio = sm::minimax_ratio(report, sm::EstimatorId::kOracle);
  const double predicted = sm::oracle_ratio_prediction(c.n, c.p, c.k, c.eps);
  return {!report.failed && std::abs(ratio - predicted) <= 0.10,
          "oracle ratio = " + fmt("%.5f", ratio) + ", predicted = " + fmt("%.5f", predicted)};
}

Verdict criterion3(const Context& ctx) {
  auto c = desk(ctx);
  c.estimators = {sm::EstimatorId::kOracle, sm::EstimatorId::kLasso};
  const auto report = sm::empirical_risk(c);
  const double oracle = sm::minimax_ratio(report, sm::EstimatorId::kOracle);
  const double lasso = sm::minimax_ratio(report, sm::EstimatorId::kLasso);
  return {!report.failed && std::abs(lasso - oracle) <= 0.15,
          "lasso ratio = " + fmt("%.5f", lasso) + ", oracle ratio = " + fmt("%.5f", oracle) +
              ", lasso non-converged = " + std::to_string(report.get(sm::EstimatorId::kLasso).flagged)};
}

Verdict criterion4(const Context& ctx) {
  sm::ProofRunConfig c;
  c.n = 4000;
  c.p = 8000;
  c.k = 8;
  c.eps = 0.1;
  c.reps = 100;
  c.seed = kSeed;
  c.threads = ctx.threads;
  const auto run = sm::run_gap_experiment(c);
  return {run.violated == 0 && run.containment_rate >= 0.90,
          "violated = " + std::to_string(run.violated) + " of " + std::to_string(run.non_vacuous) +
              " non-vacuous, containment = " + fmt("%.3f", run.containment_rate) +
              ", mean delta_emp = " + fmt("%.4f", run.mean_delta_emp)};
}

double naive_best_rss(const Matrix& X, const Vector& y, int k) {
  const int p = static_cast<int>(X.cols());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    Matrix Xs(X.rows(), k);
    int c = 0;
    for (int j = 0; j < p; ++j) {
      if (mask & (1u << j)) Xs.col(c++) = X.col(j);
    }
    const Vector b = Xs.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
    best = std::min(best, (y - Xs * b).squaredNorm());
  }
  return best;
}

Verdict criterion5(const Context& ctx) {
  sm::ExperimentConfig c;
  c.n = 50;
  c.p = 16;
  c.k = 2;
  c.reps = 500;
  c.master_seed = kSeed;
  c.threads = ctx.threads;
  const auto amps = c.resolved_amplitudes();
  std::vector<double> diff(c.reps);
  std::vector<char> basic(c.reps);
  sm::parallel_for(c.reps, ctx.threads, [&](std::size_t r) {
    const sm::SeedSpec seed{kSeed, r};
    const auto signal = sm::make_signal(c.p, c.k, amps[r % amps.size()], sm::FirstK{});
    const auto inst = sm::synthesize(sm::gen_design(c.n, c.p, seed), signal, c.sigma, seed);
    const auto mle = sm::mle_best_subset(inst.X(), inst.y, static_cast<int>(c.k));
    const double naive = naive_best_rss(inst.X(), inst.y, static_cast<int>(c.k));
    diff[r] = std::abs(mle.rss - naive) / std::max(1.0, naive);
    const double rss = (inst.y - inst.X() * mle.fit.beta_hat).squaredNorm();
    basic[r] = rss <= (inst.y - inst.X() * inst.signal.dense()).squaredNorm() ? 1 : 0;
  });
  const double worst = *std::max_element(diff.begin(), diff.end());
  const long held = std::count(basic.begin(), basic.end(), 1);
  const auto moment = sm::mle_moment_estimate(c, 4.0);
  return {worst <= 1e-10 && held == c.reps && moment.sup <= 10.0,
          "max rss diff = " + fmt("%.3e", worst) + ", basic inequality " + std::to_string(held) + "/" +
              std::to_string(c.reps) + ", m=4 moment = " + fmt("%.4f", moment.sup)};
}

Verdict criterion6(const Context& ctx) {
  std::ostringstream detail;
  bool pass = true;
  for (const auto& spec : sm::lemma_registry()) {
    const auto report = sm::check_tail_bound(spec.id, {}, spec.default_reps(), kSeed, ctx.threads);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& pt : report.points) margin = std::min(margin, pt.margin);
    detail << spec.id << (report.pass ? " ok" : " FAIL") << " (min margin " << fmt("%.3g", margin) << "), ";
    pass = pass && report.pass;
  }
  int pairs = 0;
  int held = 0;
  for (int p = 1; p <= 60; ++p) {
    for (int s = 1; s <= p; ++s) {
      ++pairs;
      held += sm::binom_bound_check(p, s).holds ? 1 : 0;
    }
  }
  detail << "binom " << held << "/" << pairs;
  return {pass && held == pairs, detail.str()};
}

Verdict criterion7(const Context& ctx) {
  int monotone = 0;
  for (int d = 0; d < 50; ++d) {
    const int p = 6 + d % 9;
    const auto X = sm::gen_design(3 + d % 20, p, {kSeed, static_cast<std::uint64_t>(d)}).X;
    bool ok = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int s = 1; s <= p; ++s) {
      const double v = sm::sparse_min_eig(X, s);
      ok = ok && v <= prev;
      prev = v;
    }
    monotone += ok ? 1 : 0;
  }

  bool identity_ok = true;
  for (int n : {20, 200}) {
    const Matrix X = std::sqrt(static_cast<double>(n)) * Matrix::Identity(n, n);
    for (double eps : {0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 10.0}) {
      identity_ok = identity_ok && sm::event_a_check(X, 2, eps).holds;
    }
  }

  const int seeds = 100;
  std::vector<sm::EventAReport> reports(seeds);
  sm::parallel_for(seeds, ctx.threads, [&](std::size_t s) {
    const auto X = sm::gen_design(4000, 200, {kSeed, s}).X;
    sm::EventAOptions opt;
    opt.seed = kSeed + s;
    reports[s] = sm::event_a_check(X, 5, 0.1, opt);
  });
  int holds = 0;
  int norms_ok = 0;
  double theta_max = 0.0;
  for (const auto& r : reports) {
    holds += r.holds ? 1 : 0;
    norms_ok += r.max_col_norm_ok ? 1 : 0;
    theta_max = std::max(theta_max, r.theta_upper);
  }
  const double rate = holds / static_cast<double>(seeds);
  return {monotone == 50 && identity_ok && rate >= 0.95,
          "monotone " + std::to_string(monotone) + "/50, identity " + (identity_ok ? "holds" : "fails") +
              ", gaussian event rate = " + fmt("%.2f", rate) + " (column norms ok " + std::to_string(norms_ok) +
              "/100, max theta = " + fmt("%.4f", theta_max) + " vs threshold " +
              fmt("%.4f", reports.front().theta_threshold) + ")"};
}

Verdict criterion8(const Context& ctx) {
  auto c = desk(ctx);
  c.reps = 100;
  c.estimators = {sm::EstimatorId::kSlope};
  const auto r = sm::slope_highprob_check(c, 0.5);
  return {r.fraction <= 0.10, "exceedance = " + std::to_string(r.exceed) + "/" + std::to_string(r.reps) + " = " +
                                  fmt("%.3f", r.fraction) + ", threshold = " + fmt("%.5f", r.threshold)};
}

Verdict criterion9(const Context&) {
  const fs::path dir = fs::temp_directory_path() / "sparse_minimax_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir / "t1");
  fs::create_directories(dir / "t8");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "n = 200\np = 400\nk = 4\neps = 0.1\nreps = 40\nestimators = oracle,lasso,slope\n";
  }
  std::ostringstream out, err;
  auto run = [&](const std::vector<std::string>& args) { return sm::cli::run(args, out, err); };
  const std::string cfg = (dir / "run.cfg").string();
  const int c1 = run({"simulate-risk", "--config", cfg, "--seed", "77", "--threads", "1", "--out", (dir / "t1").string()});
  const int c8 = run({"simulate-risk", "--config", cfg, "--seed", "77", "--threads", "8", "--out", (dir / "t8").string()});
  const bool same = c1 == 0 && c8 == 0 &&
                    sm::read_text_file((dir / "t1" / "risk.csv").string()) ==
                        sm::read_text_file((dir / "t8" / "risk.csv").string());
  const int replay = run({"replay", (dir / "t8" / "manifest.json").string(), "--threads", "1"});
  fs::remove_all(dir);
  return {same && replay == 0, std::string("csv ") + (same ? "identical" : "differs") +
                                   ", replay exit = " + std::to_string(replay) + (err.str().empty() ? "" : ", " + err.str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> criteria;
  Context ctx;
  ctx.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--criterion", criteria, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--threads", ctx.threads, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  ctx.threads = sm::resolve_threads(ctx.threads);
  if (criteria.empty()) criteria = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::map<int, std::function<Verdict(const Context&)>> checks{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  // wall-clock budgets in seconds
  const std::map<int, double> budget{{1, 5}, {2, 600}, {3, 1800}, {6, 600}};

  bool all = true;
  for (int id : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = checks.at(id)(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (auto it = budget.find(id); it != budget.end() && secs > it->second) {
      v.pass = false;
      v.detail += ", over the " + fmt("%.0f", it->second) + " s budget";
    }
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << "  ["
              << fmt("%.1f", secs) << " s]" << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 2;
}
