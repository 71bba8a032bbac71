#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qnet/network.hpp"
#include "qnet/rates.hpp"
#include "qnet/reflection.hpp"
#include "qnet/renewal.hpp"

namespace qnet {

struct DistSpec {
  std::string kind = "exponential";
  double shape = 0.0;  // gamma shape or uniform spread
};

// Event {d_k W_node(T) >= level}. node is 0-based here, 1-based in JSON.
struct EventSpec {
  int node = 0;
  double level = 1.0;
};

// Units: time is the unscaled clock of the primitives, customers are counted
// in units of 1/sqrt(b_k k) as produced by the renewal generators.
struct ExperimentConfig {
  ScalingPlan plan;  // network, critical rates, offsets, k sweep, b_k rule
  std::vector<DistSpec> arrival;                              // per class
  std::vector<std::vector<std::optional<DistSpec>>> service;  // [node][class]
  bool size_biased_first = false;
  double horizon = 10.0;
  double warmup = 0.0;  // > 0 switches to warm-up mode on [-warmup, horizon]
  int replications = 10;
  int max_replications = 1000000;
  std::uint64_t seed = 1;
  std::vector<EventSpec> events;
  std::string output;

  const NetworkSpec& network() const { return plan.spec; }
  // Schema, scaling and criticality checks. Throws ConfigError naming the field.
  void validate() const;
  CriticalData critical() const;
  Distribution arrival_distribution(int j, double k) const;
  Distribution service_distribution(int i, int j, double k) const;
  // Variances of the unit-mean laws (u^2 per class, v^2 per node and class).
  CovarianceData covariance() const;
  // Limit problem for the event {W_node(T) >= level}: zeta, V and R of this
  // network, default horizon.
  VariationalProblem rate_problem(int node, double level) const;
};

ExperimentConfig parse_config(const std::string& json_text);
// Throws ConfigError if the file cannot be read.
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct NodeMetrics {
  double coupling = 0.0;       // sup |d W - W~| on [0, T]
  double collapse = 0.0;       // sup_j sup |Q_j - alpha^L_j d W|
  double snapshot = 0.0;       // sup over low j of sup |d (Z_j - id) - d W|
  double high_workload = 0.0;  // sup d V
  double workload_end = 0.0;   // d W(T)
  double workload_sup = 0.0;   // sup d W
  double coupled_end = 0.0;    // W~(T)
};

struct ReplicationPaths {
  std::vector<PiecewisePath> scaled_W;   // d W on [0, T]
  std::vector<PiecewisePath> coupled_W;  // W~ on [0, T]
  std::vector<std::vector<PiecewisePath>> Q;
  std::vector<std::vector<PiecewisePath>> sojourn;  // d (Z_j - id)
};

struct ReplicationResult {
  double k = 0.0;
  std::uint64_t rep = 0;
  double d = 0.0;
  std::vector<NodeMetrics> nodes;
  std::vector<bool> events;  // one per cfg.events
  bool truncation_sensitive = false;
  // filled when RunOptions::verify is set
  double skorokhod_residual = 0.0;
  bool skorokhod_ok = true;
  double complementarity_residual = 0.0;
  // samples[i][m] = d W_i(sample_times[m])
  std::vector<std::vector<double>> samples;
  std::optional<ReplicationPaths> paths;
};

struct RunOptions {
  bool keep_paths = false;
  bool compute_sojourn = true;
  bool couple = true;
  // Warm-up mode only: left end of the window checked by the truncation flag.
  double observe_from = 0.0;
  std::vector<double> sample_times;
  // verify_skorokhod on the coupled solution and node complementarity;
  // failures throw. Always on when the library is built without NDEBUG.
  bool verify = false;
};

// Errors from generation and propagation are rethrown with (k, rep) attached.
ReplicationResult run_replication(const ExperimentConfig& cfg, double k, std::uint64_t rep,
                                  const RunOptions& opts = {});

// Replications first .. first+count-1 in index order. The serial and the
// OpenMP version return identical vectors.
std::vector<ReplicationResult> run_serial(const ExperimentConfig& cfg, double k, int count,
                                          const RunOptions& opts = {}, std::uint64_t first = 0);
std::vector<ReplicationResult> run_parallel(const ExperimentConfig& cfg, double k, int count,
                                            const RunOptions& opts = {}, std::uint64_t first = 0);
// QNET_THREADS, else the OpenMP default (OMP_NUM_THREADS).
int thread_count();

double median(std::vector<double> v);
// true iff the sequence has at least two entries and each is below the previous.
bool strictly_decreasing(const std::vector<double>& v);

struct TrendRow {
  double k = 0.0;
  double d = 0.0;
  int replications = 0;
  std::vector<double> coupling;  // medians per node
  std::vector<double> collapse;
  std::vector<double> snapshot;
  std::vector<double> high_workload;
};

struct TrendTable {
  std::vector<TrendRow> rows;
  std::vector<ReplicationResult> results;  // all replications, grouped by k
  // Medians of one metric at one node across rows.
  std::vector<double> column(const std::string& metric, int node) const;
};

// Median metrics per k over cfg.replications, sweeping cfg.plan.k_values.
TrendTable coupling_experiment(const ExperimentConfig& cfg, bool parallel = true);

struct CollapseDiagnostics {
  TrendTable table;
  std::vector<bool> collapse_decreasing;  // per node
  std::vector<bool> snapshot_decreasing;
  std::vector<bool> high_decreasing;
};
CollapseDiagnostics collapse_snapshot_check(const ExperimentConfig& cfg, bool parallel = true);
CollapseDiagnostics collapse_snapshot_check(TrendTable table);

struct TailRow {
  int event = 0;  // index into the event list
  double level = 0.0;
  double k = 0.0;
  double b_k = 0.0;
  int replications = 0;
  long hits = 0;
  double p_hat = 0.0;
  double p_se = 0.0;          // binomial
  double slope = 0.0;         // -(1/b_k) log p_hat, or the bound
  double slope_se = 0.0;      // delta method
  bool lower_bound = false;   // zero hits: slope >= value at P <= 3/n
  std::vector<std::string> warnings;
};

struct TailOptions {
  // Rate per unit level. When set, each k gets
  // max(cfg.replications, 30 exp(b_k rate level)) replications, capped at
  // cfg.max_replications.
  std::optional<double> predicted_rate;
  bool parallel = true;
  std::vector<double> k_values;  // defaults to the plan's sweep
};

// One row per (k, event); the events share replications. The replication
// budget is sized for the rarest event.
std::vector<TailRow> tail_estimate(const ExperimentConfig& cfg, const std::vector<EventSpec>& events,
                                   const TailOptions& opts = {});
std::vector<TailRow> tail_estimate(const ExperimentConfig& cfg, const EventSpec& event, const TailOptions& opts = {});
// Row for `hits` out of `n` at speed b_k.
TailRow tail_row(double k, double b_k, long hits, int n);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
double ks_statistic(std::vector<double> x, std::vector<double> y);
double ks_pvalue(double D, std::size_t n, std::size_t m);

struct StationarityReport {
  double k = 0.0;
  double t1 = 0.0, t2 = 0.0;
  std::size_t n1 = 0, n2 = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = false;
  bool inconclusive = false;
  int flagged = 0;  // replications with truncation-sensitive suprema
  std::string note;
};

// Needs warm-up mode. Even replications give the sample at t1, odd ones the
// sample at t2, so the two samples are independent.
StationarityReport stationarity_test(const ExperimentConfig& cfg, int node, double t1, double t2,
                                     std::optional<double> k = std::nullopt, double level = 0.05,
                                     bool parallel = true);

// Long format: k,rep,node,metric,value. node is 1-based.
void write_csv(const std::vector<ReplicationResult>& results, std::ostream& os);
void emit_csv(const std::vector<ReplicationResult>& results, const std::string& path);

}  // namespace qnet
