// Serial against OpenMP replication loop on one config and k.
//   bench_parallel --config FILE [--k K] [--replications N] [--repeat R]
// Prints wall times, the speedup and whether both runs produced the same CSV.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnet/harness.hpp"

using namespace qnet;

namespace {

template <class F>
double best_of(int repeat, F&& f) {
  double best = 1e300;
  for (int i = 0; i < repeat; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

std::string csv(const std::vector<ReplicationResult>& rs) {
  std::ostringstream os;
  write_csv(rs, os);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel replications"};
  std::string config;
  double k = 1000;
  int reps = 32, repeat = 3;
  app.add_option("--config", config, "JSON config")->required();
  app.add_option("--k", k, "k");
  app.add_option("--replications", reps, "replications per run");
  app.add_option("--repeat", repeat, "timed runs, best is reported");
  CLI11_PARSE(app, argc, argv);

  const ExperimentConfig cfg = load_config(config);
  std::vector<ReplicationResult> s, p;
  const double ts = best_of(repeat, [&] { s = run_serial(cfg, k, reps); });
  const double tp = best_of(repeat, [&] { p = run_parallel(cfg, k, reps); });
  std::printf("config %s k %g replications %d threads %d\n", config.c_str(), k, reps, thread_count());
  std::printf("serial   %.3f s\nparallel %.3f s\nspeedup  %.2f\nidentical %s\n", ts, tp, ts / tp,
              csv(s) == csv(p) ? "yes" : "no");
  return csv(s) == csv(p) ? 0 : 1;
}
