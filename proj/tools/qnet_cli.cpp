// qnet: command line front end for the experiment harness.
// Exit codes: 0 ok, 1 validation failure (bad config or arguments, failed
// invariant suite), 2 runtime error.

#include <cstdio>
#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qnet/errors.hpp"
#include "qnet/harness.hpp"
#include "qnet/invariants.hpp"
#include "qnet/rates.hpp"

using namespace qnet;

namespace {

// Writes to the file, or stdout for "-".
void with_output(const std::string& path, const std::function<void(std::ostream&)>& f) {
  if (path.empty() || path == "-") {
    f(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  f(out);
  if (!out) throw std::runtime_error("write to " + path + " failed");
  std::fprintf(stderr, "wrote %s\n", path.c_str());
}

void print_trend(const TrendTable& t, const std::string& metric, int nodes) {
  std::printf("%s\n%12s", metric.c_str(), "k");
  for (int i = 0; i < nodes; ++i) std::printf("  %12s", ("node " + std::to_string(i + 1)).c_str());
  std::printf("\n");
  for (const TrendRow& r : t.rows) {
    std::printf("%12g", r.k);
    const auto& v = metric == "coupling" ? r.coupling
                    : metric == "collapse" ? r.collapse
                    : metric == "snapshot" ? r.snapshot
                                           : r.high_workload;
    for (double x : v) std::printf("  %12.4g", x);
    std::printf("\n");
  }
}

std::string yes(bool b) { return b ? "yes" : "no"; }

int cmd_simulate(const std::string& path, std::optional<double> k, std::optional<int> reps, std::string out,
                 bool serial) {
  ExperimentConfig cfg = load_config(path);
  if (reps) cfg.replications = *reps;
  if (out.empty()) out = cfg.output.empty() ? "-" : cfg.output;
  const std::vector<double> ks = k ? std::vector<double>{*k} : cfg.plan.k_values;
  std::vector<ReplicationResult> all;
  for (double kk : ks) {
    auto rs = serial ? run_serial(cfg, kk, cfg.replications) : run_parallel(cfg, kk, cfg.replications);
    all.insert(all.end(), rs.begin(), rs.end());
  }
  with_output(out, [&](std::ostream& os) { write_csv(all, os); });
  return 0;
}

int cmd_couple(const std::string& path, const std::string& out, bool serial) {
  const ExperimentConfig cfg = load_config(path);
  const CollapseDiagnostics diag = collapse_snapshot_check(coupling_experiment(cfg, !serial));
  const int n = cfg.network().size();
  for (const char* m : {"coupling", "collapse", "snapshot", "high_workload"}) print_trend(diag.table, m, n);
  for (int i = 0; i < n; ++i) {
    std::printf("node %d: coupling decreasing %s, collapse decreasing %s, snapshot decreasing %s, sup dV decreasing %s\n",
                i + 1, yes(strictly_decreasing(diag.table.column("coupling", i))).c_str(),
                yes(diag.collapse_decreasing[i]).c_str(), yes(diag.snapshot_decreasing[i]).c_str(),
                yes(diag.high_decreasing[i]).c_str());
  }
  if (!out.empty()) with_output(out, [&](std::ostream& os) { write_csv(diag.table.results, os); });
  return 0;
}

int cmd_tail(const std::string& path, bool auto_scale, bool serial) {
  const ExperimentConfig cfg = load_config(path);
  if (cfg.events.empty()) throw ConfigError("config.experiment.events: tail needs at least one event");
  TailOptions opts;
  opts.parallel = !serial;
  if (auto_scale) {
    // rate per unit level of the first event, from the limit problem
    const VariationalResult vr = variational_rate(cfg.rate_problem(cfg.events[0].node, 1.0));
    opts.predicted_rate = vr.rate;
    std::printf("predicted rate per unit level: %.6g\n", vr.rate);
  }
  const auto rows = tail_estimate(cfg, cfg.events, opts);
  std::printf("%8s %6s %8s %10s %8s %12s %10s %10s %10s\n", "k", "node", "level", "reps", "hits", "p_hat", "p_se",
              "slope", "slope_se");
  for (const TailRow& r : rows) {
    std::printf("%8g %6d %8g %10d %8ld %12.4g %10.3g %s%9.4f %10.3g\n", r.k, cfg.events[r.event].node + 1, r.level,
                r.replications, r.hits, r.p_hat, r.p_se, r.lower_bound ? ">" : " ", r.slope, r.slope_se);
    for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
  }
  return 0;
}

int cmd_rate(const std::string& path, int node, double level, int cells, const std::string& out) {
  const ExperimentConfig cfg = load_config(path);
  if (node < 1 || node > cfg.network().size()) throw ConfigError("--node: no such node (nodes are 1-based)");
  VariationalProblem vp = cfg.rate_problem(node - 1, level);
  if (cells > 0) vp.cells = cells;
  const VariationalResult r = variational_rate(vp);
  std::printf("rate %.10g\nfeasible %s\nhorizon %.6g\ncells %d\n", r.rate, yes(r.feasible).c_str(), r.horizon,
              r.cells);
  if (!r.feasible) return 0;
  // argmin on the union of its breakpoints
  with_output(out, [&](std::ostream& os) {
    std::vector<double> ts;
    for (const auto& p : r.z) {
      for (const Knot& k : p.knots()) ts.push_back(k.t);
    }
    ts.push_back(r.z[0].domain_end());
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    os << "t";
    for (std::size_t i = 0; i < r.z.size(); ++i) os << ",z" << i + 1;
    for (std::size_t i = 0; i < r.w.size(); ++i) os << ",w" << i + 1;
    os << "\n";
    char buf[64];
    for (double t : ts) {
      std::snprintf(buf, sizeof buf, "%.17g", t);
      os << buf;
      for (const auto& p : r.z) {
        std::snprintf(buf, sizeof buf, ",%.17g", p.eval(t));
        os << buf;
      }
      for (const auto& p : r.w) {
        std::snprintf(buf, sizeof buf, ",%.17g", p.eval(t));
        os << buf;
      }
      os << "\n";
    }
  });
  return 0;
}

int cmd_check(int instances, std::uint64_t seed) {
  std::vector<SuiteReport> reports = node_suites(instances, seed);
  reports.push_back(scale_suite(instances, seed + 1));
  reports.push_back(shift_suite(instances, seed + 2));
  reports.push_back(skorokhod_suite(instances, seed + 3));
  reports.push_back(tilde_suite(instances, seed + 4));
  bool ok = true;
  for (const SuiteReport& r : reports) {
    std::printf("%s (%d instances, %.2f s): %s\n", r.name.c_str(), r.instances, r.seconds, r.ok() ? "ok" : "FAILED");
    for (const Residual& x : r.residuals) {
      std::printf("  %-36s max %.3g  tol %.3g%s\n", x.name.c_str(), x.max, x.tol, x.ok() ? "" : "  <-- over");
    }
    ok = ok && r.ok();
  }
  return ok ? 0 : 1;
}

int cmd_stationarity(const std::string& path, int node, double t1, double t2, std::optional<double> k,
                     double level, bool serial) {
  const ExperimentConfig cfg = load_config(path);
  if (node < 1 || node > cfg.network().size()) throw ConfigError("--node: no such node (nodes are 1-based)");
  const StationarityReport r = stationarity_test(cfg, node - 1, t1, t2, k, level, !serial);
  std::printf("k %g\nt1 %g (n=%zu)\nt2 %g (n=%zu)\nKS statistic %.6g\np-value %.6g\nflagged %d\n", r.k, r.t1, r.n1,
              r.t2, r.n2, r.statistic, r.p_value, r.flagged);
  std::printf("result %s\n", r.inconclusive ? "inconclusive" : r.pass ? "pass" : "reject");
  if (!r.note.empty()) std::printf("note: %s\n", r.note.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Priority queueing networks in heavy traffic: simulation, coupling and tail experiments"};
  app.require_subcommand(1);

  std::string config, out;
  std::optional<double> k;
  std::optional<int> reps;
  bool serial = false, auto_scale = false;
  int node = 1, cells = 0, instances = 1000;
  double level = 1.0, t1 = 0.0, t2 = 0.0, alpha = 0.05;
  std::uint64_t seed = 7;

  auto* sim = app.add_subcommand("simulate", "replication sweep, CSV in long format");
  sim->add_option("--config", config, "JSON config")->required();
  sim->add_option("--k", k, "single k instead of the sweep");
  sim->add_option("--replications", reps, "override the replication count");
  sim->add_option("--output", out, "CSV path ('-' for stdout); defaults to experiment.output");
  sim->add_flag("--serial", serial, "run without OpenMP");

  auto* couple = app.add_subcommand("couple", "coupling, collapse and snapshot trends over the k sweep");
  couple->add_option("--config", config, "JSON config")->required();
  couple->add_option("--output", out, "CSV path for all replications");
  couple->add_flag("--serial", serial, "run without OpenMP");

  auto* tail = app.add_subcommand("tail", "Monte Carlo tail probabilities and slopes for the config's events");
  tail->add_option("--config", config, "JSON config")->required();
  tail->add_flag("--auto-replications", auto_scale, "size replications from the limit rate");
  tail->add_flag("--serial", serial, "run without OpenMP");

  auto* rate = app.add_subcommand("rate", "rate of {W_node(T) >= level} in the heavy traffic limit");
  rate->add_option("--config", config, "JSON config")->required();
  rate->add_option("--node", node, "node, 1-based")->required();
  rate->add_option("--level", level, "level b")->required();
  rate->add_option("--cells", cells, "grid cells");
  rate->add_option("--output", out, "CSV path for the argmin ('-' for stdout)")->default_val("-");

  auto* check = app.add_subcommand("check", "invariant suites over random instances");
  check->add_option("--instances", instances, "instances per suite")->check(CLI::PositiveNumber);
  check->add_option("--seed", seed, "seed");

  auto* stat = app.add_subcommand("stationarity", "two-sample KS test of W(t1) against W(t2)");
  stat->add_option("--config", config, "JSON config with experiment.warmup > 0")->required();
  stat->add_option("--node", node, "node, 1-based");
  stat->add_option("--t1", t1, "first time")->required();
  stat->add_option("--t2", t2, "second time")->required();
  stat->add_option("--k", k, "k (default: first of the sweep)");
  stat->add_option("--level", alpha, "test level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(config, k, reps, out, serial);
    if (*couple) return cmd_couple(config, out, serial);
    if (*tail) return cmd_tail(config, auto_scale, serial);
    if (*rate) return cmd_rate(config, node, level, cells, out);
    if (*check) return cmd_check(instances, seed);
    if (*stat) return cmd_stationarity(config, node, t1, t2, k, alpha, serial);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
