// Acceptance runs. One line per criterion:
//   AC<n> PASS|FAIL <what> (<numbers>)
// followed by indented detail lines. Exit code 1 if any selected criterion
// fails.
//
//   acceptance [--criterion N]... [--configs DIR]

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnet/harness.hpp"
#include "qnet/invariants.hpp"
#include "qnet/rates.hpp"

using namespace qnet;

namespace {

std::string config_dir = QNET_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string what;
  std::string numbers;
  std::vector<std::string> detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string row(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += fmt(" %.4g", x);
  return s;
}

void add_suite(Outcome& o, const SuiteReport& r) {
  for (const Residual& x : r.residuals) {
    o.detail.push_back(fmt("%-40s max %.3g  tol %.3g%s", x.name.c_str(), x.max, x.tol, x.ok() ? "" : "  OVER"));
  }
}

// node suites are shared by criteria 1 and 2
std::optional<std::vector<SuiteReport>> node_cache;
const std::vector<SuiteReport>& node_reports() {
  if (!node_cache) node_cache = node_suites(1000, 20240501);
  return *node_cache;
}

Outcome ac1() {
  const SuiteReport& r = node_reports()[0];
  Outcome o;
  o.what = "complementarity suite, 1000 single-node instances";
  o.pass = r.ok() && r.instances == 1000 && r.seconds <= 60.0;
  o.numbers = fmt("%.2f s, limit 60 s", r.seconds);
  add_suite(o, r);
  return o;
}

Outcome ac2() {
  const SuiteReport& r = node_reports()[1];
  Outcome o;
  o.what = "hidden and inverse identities, same 1000 instances";
  o.pass = r.ok() && r.instances == 1000;
  o.numbers = fmt("%.2f s", r.seconds);
  add_suite(o, r);
  return o;
}

Outcome ac3() {
  const SuiteReport r = scale_suite(200, 31);
  Outcome o;
  o.what = "scaling of W and D, xi in {0.5, 2, 10}, 200 instances";
  o.pass = r.ok() && r.instances == 200;
  o.numbers = fmt("%.2f s", r.seconds);
  add_suite(o, r);
  return o;
}

Outcome ac4() {
  const SuiteReport r = shift_suite(200, 41, 5);
  Outcome o;
  o.what = "shift identities, 200 warm-up instances x 5 times";
  o.pass = r.ok() && r.instances == 200;
  o.numbers = fmt("%.2f s", r.seconds);
  add_suite(o, r);
  return o;
}

Outcome ac5() {
  const SuiteReport r = skorokhod_suite(500, 51);
  Outcome o;
  o.what = "Skorokhod solver, 500 triangular instances (n <= 4)";
  o.pass = r.ok() && r.instances == 500;
  o.numbers = fmt("%.2f s", r.seconds);
  add_suite(o, r);
  return o;
}

Outcome ac6() {
  const SuiteReport r = tilde_suite(500, 61);
  Outcome o;
  o.what = "W~ against Phi(R X~), 500 network instances (n <= 3)";
  o.pass = r.ok() && r.instances == 500;
  o.numbers = fmt("%.2f s", r.seconds);
  add_suite(o, r);
  return o;
}

Outcome ac7() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  o.what = "variational rate against 2 zeta b / V on {0.5,1,2}^3";
  double worst = 0.0;
  bool all_feasible = true;
  for (double zeta : {0.5, 1.0, 2.0}) {
    for (double v : {0.5, 1.0, 2.0}) {
      for (double b : {0.5, 1.0, 2.0}) {
        VariationalProblem vp;
        vp.zeta = Eigen::VectorXd::Constant(1, zeta);
        vp.V = Eigen::MatrixXd::Constant(1, 1, v);
        vp.level = b;
        const VariationalResult r = variational_rate(vp);
        const double exact = 2.0 * zeta * b / v;
        const double rel = std::abs(r.rate - exact) / exact;
        all_feasible = all_feasible && r.feasible;
        worst = std::max(worst, std::isfinite(rel) ? rel : kInf);
        o.detail.push_back(fmt("zeta %-4g V %-4g b %-4g  rate %.6f  exact %.6f  rel %.2e", zeta, v, b, r.rate,
                               exact, rel));
      }
    }
  }
  const double secs = seconds_since(t0);
  o.pass = all_feasible && worst <= 0.02 && secs <= 300.0;
  o.numbers = fmt("max rel %.2e, tol 2e-2, %.1f s, limit 300 s", worst, secs);
  return o;
}

std::optional<TrendTable> tandem_cache;
double tandem_seconds = 0.0;
const TrendTable& tandem_table() {
  if (!tandem_cache) {
    const auto t0 = std::chrono::steady_clock::now();
    tandem_cache = coupling_experiment(load_config(config_dir + "/tandem.json"));
    tandem_seconds = seconds_since(t0);
  }
  return *tandem_cache;
}

Outcome ac8() {
  const TrendTable& t = tandem_table();
  Outcome o;
  o.what = "tandem coupling trend, k = 1e2..1e5, 50 replications";
  bool dec = true;
  for (int i = 0; i < 2; ++i) {
    const auto c = t.column("coupling", i);
    dec = dec && strictly_decreasing(c);
    o.detail.push_back(fmt("node %d median sup|d W - W~|:%s", i + 1, row(c).c_str()));
  }
  o.pass = dec && t.rows.size() == 4 && t.rows.front().replications == 50 && tandem_seconds <= 600.0;
  o.numbers = fmt("%.1f s, limit 600 s", tandem_seconds);
  return o;
}

Outcome ac9() {
  const TrendTable& t = tandem_table();
  Outcome o;
  o.what = "collapse and snapshot trends (tandem and priority node), sup d V trend (priority node)";
  bool ok = true;
  for (int i = 0; i < 2; ++i) {
    const auto q = t.column("collapse", i);
    const auto s = t.column("snapshot", i);
    ok = ok && strictly_decreasing(q);
    // single-class FIFO: Z - id = W exactly, so the distance is 0 at every k
    bool zero = true;
    for (double x : s) zero = zero && x <= 1e-12;
    ok = ok && (strictly_decreasing(s) || zero);
    o.detail.push_back(fmt("tandem node %d collapse:%s", i + 1, row(q).c_str()));
    o.detail.push_back(fmt("tandem node %d snapshot:%s%s", i + 1, row(s).c_str(), zero ? "  (identically 0)" : ""));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig pcfg = load_config(config_dir + "/priority.json");
  const TrendTable p = coupling_experiment(pcfg);
  const double psecs = seconds_since(t0);
  const auto h = p.column("high_workload", 0);
  const auto ps = p.column("snapshot", 0);
  // the tandem snapshot is 0 by identity, so the low class of the priority
  // node carries the actual trend
  ok = ok && strictly_decreasing(h) && strictly_decreasing(ps);
  o.detail.push_back(fmt("priority median sup d V:%s", row(h).c_str()));
  o.detail.push_back(fmt("priority snapshot (low class):%s", row(ps).c_str()));
  o.detail.push_back(fmt("priority collapse (info):%s", row(p.column("collapse", 0)).c_str()));
  o.pass = ok;
  o.numbers = fmt("tandem %.1f s, priority %.1f s", tandem_seconds, psecs);
  return o;
}

Outcome ac10() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = load_config(config_dir + "/single.json");
  Outcome o;
  o.what = "tail slope against the variational rate, single queue, b_k = sqrt(k)";
  // events: 0 at level 1, 1 at level 0.5
  const VariationalResult vr = variational_rate(cfg.rate_problem(0, 1.0));
  TailOptions opts;
  opts.predicted_rate = vr.rate;
  const auto rows = tail_estimate(cfg, cfg.events, opts);
  const TailRow* best1 = nullptr;
  const TailRow* best05 = nullptr;
  for (const TailRow& r : rows) {
    o.detail.push_back(fmt("k %-4g level %-4g reps %7d hits %6ld  p %.4g  slope %s%.4f +- %.3g", r.k, r.level,
                           r.replications, r.hits, r.p_hat, r.lower_bound ? ">" : "", r.slope, r.slope_se));
    if (r.event == 0 && r.hits >= 30 && r.replications >= 100000) best1 = &r;
  }
  if (best1) {
    for (const TailRow& r : rows) {
      if (r.event == 1 && r.k == best1->k) best05 = &r;
    }
  }
  const double secs = seconds_since(t0);
  o.detail.push_back(fmt("variational rate %.6f", vr.rate));
  if (!best1 || !best05) {
    o.pass = false;
    o.numbers = "no k with >= 30 hits at level 1";
    return o;
  }
  const double rel = std::abs(best1->slope - vr.rate) / vr.rate;
  o.pass = rel <= 0.30 && best05->slope < best1->slope && secs <= 600.0;
  o.numbers = fmt("k %g: slope %.4f vs rate %.4f, rel %.3f (tol 0.30); slope at b=0.5 %.4f; %.1f s", best1->k,
                  best1->slope, vr.rate, rel, best05->slope, secs);
  return o;
}

Outcome ac11() {
  const ExperimentConfig cfg = load_config(config_dir + "/stationary.json");
  Outcome o;
  o.what = "stationarity, KS of W(10) against W(30), load 0.9, warm-up 50";
  const StationarityReport r = stationarity_test(cfg, 0, 10.0, 30.0, 100.0, 0.05);
  o.pass = r.pass && !r.inconclusive;
  o.numbers = fmt("k %g, n %zu/%zu, D %.4f, p %.4f at level 0.05", r.k, r.n1, r.n2, r.statistic, r.p_value);
  o.detail.push_back(fmt("truncation flagged replications: %d", r.flagged));
  if (!r.note.empty()) o.detail.push_back(r.note);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance runs"};
  std::vector<int> which;
  app.add_option("--criterion", which, "criterion number (repeatable); all when omitted")
      ->check(CLI::Range(1, 11));
  app.add_option("--configs", config_dir, "directory with tandem.json, priority.json, single.json, stationary.json");
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::function<Outcome()>> all = {{1, ac1}, {2, ac2}, {3, ac3}, {4, ac4},  {5, ac5},  {6, ac6},
                                                       {7, ac7}, {8, ac8}, {9, ac9}, {10, ac10}, {11, ac11}};
  if (which.empty()) {
    for (const auto& [n, f] : all) which.push_back(n);
  }
  int failed = 0;
  for (int n : which) {
    Outcome o;
    try {
      o = all.at(n)();
    } catch (const std::exception& e) {
      o.what = "exception";
      o.numbers = e.what();
    }
    std::printf("AC%d %s %s (%s)\n", n, o.pass ? "PASS" : "FAIL", o.what.c_str(), o.numbers.c_str());
    for (const auto& d : o.detail) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
