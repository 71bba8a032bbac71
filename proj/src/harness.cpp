#include "qnet/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

bool zero_traffic(const ScalingPlan& p, int j) { return p.alpha[j] == 0.0 && p.alpha_offset[j] == 0.0; }

std::string tag(double k, std::uint64_t rep) {
  std::ostringstream os;
  os << "k=" << k << ", rep=" << rep << ": ";
  return os.str();
}

// Same exception type, message prefixed with the replication.
[[noreturn]] void rethrow_tagged(const std::string& t) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(t + e.what());
  } catch (const DomainError& e) {
    throw DomainError(t + e.what());
  } catch (const DegenerateInputError& e) {
    throw DegenerateInputError(t + e.what());
  } catch (const CertificateError& e) {
    throw CertificateError(t + e.what());
  } catch (const UnsupportedMatrixError& e) {
    throw UnsupportedMatrixError(t + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(t + e.what());
  }
}

// Service path whose values cover [lo, hi] and whose busy time covers
// [t_lo, t_hi]. Streams are index stable, so widening only appends samples.
InvertiblePath covering_service(SampleStream& s, double k, double b_k, double lo, double hi, double t_lo,
                                double t_hi) {
  const double delta = 1.0 / std::sqrt(b_k * k);
  for (int tries = 0; tries < 64; ++tries) {
    InvertiblePath p = service_process(s, k, b_k, lo, hi);
    const bool ok_lo = p.path().domain_start() <= t_lo, ok_hi = p.path().domain_end() >= t_hi;
    if (ok_lo && ok_hi) return p;
    if (!ok_lo) lo -= std::max(0.25 * std::abs(lo), 16.0 * delta);
    if (!ok_hi) hi += std::max(0.25 * std::abs(hi), 16.0 * delta);
  }
  throw DomainError("service path does not reach the required busy time");
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

CriticalData ExperimentConfig::critical() const {
  return build_critical(plan.spec, plan.alpha, plan.sigma, plan.alpha_offset, plan.sigma_offset, 1e-9);
}

Distribution ExperimentConfig::arrival_distribution(int j, double k) const {
  return Distribution::from_name(arrival[j].kind, plan.mean_interarrival(j, k), arrival[j].shape);
}

Distribution ExperimentConfig::service_distribution(int i, int j, double k) const {
  const DistSpec& d = *service[i][j];
  return Distribution::from_name(d.kind, plan.mean_service(i, j, k), d.shape);
}

CovarianceData ExperimentConfig::covariance() const {
  const CriticalData cd = critical();
  const int n = network().size(), M = network().num_classes;
  std::vector<double> u2(M, 0.0);
  std::vector<std::vector<double>> v2(n, std::vector<double>(M, 0.0));
  for (int j = 0; j < M; ++j) {
    if (plan.alpha[j] > 0.0) u2[j] = Distribution::from_name(arrival[j].kind, 1.0 / plan.alpha[j], arrival[j].shape).variance();
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < M; ++j) {
      if (!network().nodes[i].visits(j)) continue;
      const DistSpec& d = *service[i][j];
      v2[i][j] = Distribution::from_name(d.kind, 1.0 / plan.sigma[i][j], d.shape).variance();
    }
  }
  return build_covariance(network(), cd, u2, v2);
}

VariationalProblem ExperimentConfig::rate_problem(int node, double level) const {
  const CriticalData cd = critical();
  VariationalProblem vp;
  vp.node = node;
  vp.level = level;
  vp.zeta = cd.zeta;
  vp.V = covariance().V;
  vp.R = cd.R;
  vp.seed = seed;
  return vp;
}

void ExperimentConfig::validate() const {
  const NetworkSpec& spec = network();
  spec.validate();
  const int n = spec.size(), M = spec.num_classes;
  if (static_cast<int>(arrival.size()) != M) throw ConfigError("distributions.arrival: expected one entry per class");
  if (static_cast<int>(service.size()) != n) throw ConfigError("distributions.service: expected one row per node");
  for (int j = 0; j < M; ++j) {
    try {
      (void)Distribution::from_name(arrival[j].kind, 1.0, arrival[j].shape);
    } catch (const std::exception& e) {
      throw ConfigError("distributions.arrival[" + std::to_string(j) + "]: " + e.what());
    }
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(service[i].size()) != M) {
      throw ConfigError("distributions.service[" + std::to_string(i) + "]: expected one entry per class");
    }
    for (int j = 0; j < M; ++j) {
      const std::string f = "distributions.service[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      if (!spec.nodes[i].visits(j)) continue;
      if (!service[i][j]) throw ConfigError(f + ": class visits the node but has no service law");
      try {
        (void)Distribution::from_name(service[i][j]->kind, 1.0, service[i][j]->shape);
      } catch (const std::exception& e) {
        throw ConfigError(f + ": " + e.what());
      }
    }
  }
  if (!(horizon > 0.0)) throw ConfigError("experiment.horizon: must be positive");
  if (!(warmup >= 0.0)) throw ConfigError("experiment.warmup: must be nonnegative");
  if (replications < 1) throw ConfigError("experiment.replications: must be at least 1");
  if (max_replications < replications) throw ConfigError("experiment.max_replications: below replications");
  for (std::size_t e = 0; e < events.size(); ++e) {
    const std::string f = "experiment.events[" + std::to_string(e) + "]";
    if (events[e].node < 0 || events[e].node >= n) throw ConfigError(f + ".node: no such node");
    if (!(events[e].level >= 0.0)) throw ConfigError(f + ".level: must be nonnegative");
  }
  try {
    (void)critical();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("rates: ") + e.what());
  }
  const ScalingReport rep = check_scaling(plan);
  if (!rep.ok()) {
    std::string msg = "scaling:";
    for (const auto& f : rep.failures) msg += " " + f + ";";
    throw ConfigError(msg);
  }
}

// ---------------------------------------------------------------------------
// Replications

ReplicationResult run_replication(const ExperimentConfig& cfg, double k, std::uint64_t rep, const RunOptions& options) {
  RunOptions opts = options;
#ifndef NDEBUG
  opts.verify = true;
#endif
  const NetworkSpec& spec = cfg.network();
  const int n = spec.size(), M = spec.num_classes;
  const bool warm = cfg.warmup > 0.0;
  const double t0 = warm ? -cfg.warmup : 0.0, T = cfg.horizon;
  const TimeMode mode = warm ? TimeMode::kWarmUp : TimeMode::kHalfLine;
  ReplicationResult res;
  res.k = k;
  res.rep = rep;
  try {
    const double b = cfg.plan.b(k), d = cfg.plan.d(k);
    res.d = d;
    const std::uint64_t kid = static_cast<std::uint64_t>(std::llround(k));

    NetworkPrimitives np;
    for (int j = 0; j < M; ++j) {
      if (zero_traffic(cfg.plan, j)) {
        np.arrivals.push_back(PiecewisePath::constant(0.0, t0, T));
        continue;
      }
      SampleStream s(cfg.arrival_distribution(j, k), {cfg.seed, kid, 0, 0, j, rep}, cfg.size_biased_first);
      np.arrivals.push_back(stationary_renewal(s, k, b, t0, T).path());
    }
    np.service.assign(n, std::vector<std::optional<InvertiblePath>>(M));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < M; ++j) {
        if (!spec.nodes[i].visits(j)) continue;
        const PiecewisePath& a = np.arrivals[j];
        // busy time the coupled maps read: the clock alpha/sigma id on [t0, T]
        const double c = cfg.plan.alpha[j] / cfg.plan.sigma[i][j];
        const double t_lo = opts.couple ? c * t0 : 0.0, t_hi = opts.couple ? c * T : 0.0;
        SampleStream s(cfg.service_distribution(i, j, k), {cfg.seed, kid, 1, i, j, rep});
        np.service[i][j] = covering_service(s, k, b, a.start_value(), a.end_value(), std::min(t_lo, 0.0), t_hi);
      }
    }

    const CriticalData cd = cfg.critical();
    // coupled maps first; only W~ on [0, T] is kept
    std::vector<PiecewisePath> coupled;
    if (opts.couple) {
      TildeInputs in;
      for (int j = 0; j < M; ++j) {
        const double da = d * cfg.plan.alpha[j];
        in.a.push_back(np.arrivals[j] - PiecewisePath::linear(da, t0, T, da * t0));
      }
      in.s.assign(n, std::vector<std::optional<PiecewisePath>>(M));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < M; ++j) {
          if (!spec.nodes[i].visits(j)) continue;
          const PiecewisePath& s = np.service[i][j]->path();
          const double ds = d * cfg.plan.sigma[i][j];
          in.s[i][j] = s - PiecewisePath::linear(ds, s.domain_start(), s.domain_end(), ds * s.domain_start());
        }
      }
      TildeOutput tilde = w_tilde(in, spec, cd, mode);
      in = {};
      if (opts.verify) {
        const std::vector<PiecewisePath> z = apply_matrix(cd.R, tilde.X);
        const SkorokhodReport sr = verify_skorokhod({tilde.W, tilde.Y}, z, cd.R, 1e-8, mode);
        res.skorokhod_ok = sr.ok();
        res.skorokhod_residual = std::max(sr.equation_residual, sr.complementarity_residual);
      }
      for (int i = 0; i < n; ++i) coupled.push_back(warm ? restrict(tilde.W[i], 0.0, T) : std::move(tilde.W[i]));
    }

    NodeOptions nopt;
    nopt.mode = mode;
    nopt.observe_from = opts.observe_from;
    nopt.compute_sojourn = opts.compute_sojourn;
    res.nodes.resize(n);
    res.samples.assign(n, {});
    std::vector<double> w_end(n);
    ReplicationPaths paths;
    auto window = [&](const PiecewisePath& p) { return warm ? restrict(p, 0.0, T) : p; };
    propagate_each(np, spec, nopt, [&](int i, NodeOutput& o) {
      NodeMetrics& m = res.nodes[i];
      const PiecewisePath dW = scale(window(o.W), d);
      for (double t : opts.sample_times) res.samples[i].push_back(d * o.W.eval(t));
      m.workload_end = dW.eval(T);
      m.workload_sup = max_value(dW);
      m.high_workload = d * max_value(window(o.V));
      if (opts.couple) {
        m.coupling = sup_distance(dW, coupled[i]);
        m.coupled_end = coupled[i].eval(T);
      }
      if (opts.keep_paths) {
        paths.scaled_W.push_back(dW);
        if (opts.couple) paths.coupled_W.push_back(coupled[i]);
        paths.Q.emplace_back();
        paths.sojourn.emplace_back();
      }
      for (int j = 0; j < M; ++j) {
        const PiecewisePath q = window(o.Q[j]);
        if (spec.nodes[i].visits(j)) {
          m.collapse = std::max(m.collapse, sup_distance(q, scale(dW, cd.alpha_low[i][j])));
        }
        if (opts.keep_paths) paths.Q.back().push_back(q);
        if (o.Z.empty()) continue;
        const PiecewisePath off = scale(window(o.Z[j] - PiecewisePath::identity(t0, T)), d);
        if (spec.nodes[i].is_low(j) && !zero_traffic(cfg.plan, j)) {
          m.snapshot = std::max(m.snapshot, sup_distance(off, dW));
        }
        if (opts.keep_paths) paths.sojourn.back().push_back(off);
      }
      if (opts.verify) {
        const double scale_i = std::max(1.0, max_value(o.work_high) - min_value(o.work_high) +
                                                 max_value(o.work_low) - min_value(o.work_low));
        const double r = std::abs(stieltjes(o.V, o.U)) + std::abs(stieltjes(o.W, o.Y));
        res.complementarity_residual = std::max(res.complementarity_residual, r / scale_i);
      }
      res.truncation_sensitive = res.truncation_sensitive || o.truncation_sensitive;
      w_end[i] = m.workload_end;
    });
    for (const EventSpec& e : cfg.events) {
      if (e.node < 0 || e.node >= n) throw ConfigError("event node " + std::to_string(e.node + 1) + " does not exist");
      res.events.push_back(w_end[e.node] >= e.level - 1e-12);
    }
    if (opts.keep_paths) res.paths = std::move(paths);
  } catch (...) {
    rethrow_tagged(tag(k, rep));
  }
  if (opts.verify) {
    if (!res.skorokhod_ok) throw std::logic_error(tag(k, rep) + "coupled solution fails verify_skorokhod");
    if (res.complementarity_residual > 1e-8) throw std::logic_error(tag(k, rep) + "node complementarity fails");
  }
  return res;
}

std::vector<ReplicationResult> run_serial(const ExperimentConfig& cfg, double k, int count, const RunOptions& opts,
                                          std::uint64_t first) {
  std::vector<ReplicationResult> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int r = 0; r < count; ++r) out.push_back(run_replication(cfg, k, first + static_cast<std::uint64_t>(r), opts));
  return out;
}

std::vector<ReplicationResult> run_parallel(const ExperimentConfig& cfg, double k, int count, const RunOptions& opts,
                                            std::uint64_t first) {
  std::vector<ReplicationResult> out(static_cast<std::size_t>(std::max(count, 0)));
  std::vector<std::exception_ptr> errors(out.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (int r = 0; r < count; ++r) {
    try {
      out[r] = run_replication(cfg, k, first + static_cast<std::uint64_t>(r), opts);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  // lowest failing index, so the reported error does not depend on scheduling
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

int thread_count() {
  if (const char* s = std::getenv("QNET_THREADS")) {
    const int t = std::atoi(s);
    if (t > 0) return t;
  }
  return omp_get_max_threads();
}

// ---------------------------------------------------------------------------
// Summaries

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

bool strictly_decreasing(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::vector<double> TrendTable::column(const std::string& metric, int node) const {
  std::vector<double> c;
  for (const TrendRow& r : rows) {
    const std::vector<double>* src = nullptr;
    if (metric == "coupling") src = &r.coupling;
    else if (metric == "collapse") src = &r.collapse;
    else if (metric == "snapshot") src = &r.snapshot;
    else if (metric == "high_workload") src = &r.high_workload;
    else throw ConfigError("unknown trend metric '" + metric + "'");
    c.push_back(src->at(static_cast<std::size_t>(node)));
  }
  return c;
}

TrendTable coupling_experiment(const ExperimentConfig& cfg, bool parallel) {
  TrendTable t;
  const int n = cfg.network().size();
  for (double k : cfg.plan.k_values) {
    std::vector<ReplicationResult> rs =
        parallel ? run_parallel(cfg, k, cfg.replications) : run_serial(cfg, k, cfg.replications);
    TrendRow row;
    row.k = k;
    row.d = cfg.plan.d(k);
    row.replications = cfg.replications;
    for (int i = 0; i < n; ++i) {
      std::vector<double> c, q, s, h;
      for (const auto& r : rs) {
        c.push_back(r.nodes[i].coupling);
        q.push_back(r.nodes[i].collapse);
        s.push_back(r.nodes[i].snapshot);
        h.push_back(r.nodes[i].high_workload);
      }
      row.coupling.push_back(median(c));
      row.collapse.push_back(median(q));
      row.snapshot.push_back(median(s));
      row.high_workload.push_back(median(h));
    }
    t.rows.push_back(std::move(row));
    for (auto& r : rs) t.results.push_back(std::move(r));
  }
  return t;
}

CollapseDiagnostics collapse_snapshot_check(TrendTable table) {
  CollapseDiagnostics d;
  const int n = table.rows.empty() ? 0 : static_cast<int>(table.rows.front().coupling.size());
  for (int i = 0; i < n; ++i) {
    d.collapse_decreasing.push_back(strictly_decreasing(table.column("collapse", i)));
    d.snapshot_decreasing.push_back(strictly_decreasing(table.column("snapshot", i)));
    d.high_decreasing.push_back(strictly_decreasing(table.column("high_workload", i)));
  }
  d.table = std::move(table);
  return d;
}

CollapseDiagnostics collapse_snapshot_check(const ExperimentConfig& cfg, bool parallel) {
  return collapse_snapshot_check(coupling_experiment(cfg, parallel));
}

// ---------------------------------------------------------------------------
// Tails

TailRow tail_row(double k, double b_k, long hits, int n) {
  TailRow row;
  row.k = k;
  row.b_k = b_k;
  row.replications = n;
  row.hits = hits;
  row.p_hat = static_cast<double>(hits) / n;
  row.p_se = std::sqrt(row.p_hat * (1.0 - row.p_hat) / n);
  if (hits == 0) {
    // 95% one-sided: P <= 3/n
    row.lower_bound = true;
    row.slope = -std::log(std::min(1.0, 3.0 / n)) / b_k;
    row.warnings.push_back("no hits: slope is a lower bound");
  } else {
    row.slope = -std::log(row.p_hat) / b_k;
    row.slope_se = row.p_se / (row.p_hat * b_k);
  }
  if (hits < 30 && hits != n) row.warnings.push_back("fewer than 30 hits (" + std::to_string(hits) + ")");
  return row;
}

std::vector<TailRow> tail_estimate(const ExperimentConfig& cfg, const std::vector<EventSpec>& events,
                                   const TailOptions& opts) {
  if (events.empty()) throw ConfigError("tail: no events");
  ExperimentConfig c = cfg;
  c.events = events;
  RunOptions ro;
  ro.couple = false;
  ro.compute_sojourn = false;
  const std::vector<double> ks = opts.k_values.empty() ? cfg.plan.k_values : opts.k_values;
  std::vector<TailRow> rows;
  for (double k : ks) {
    const double b = cfg.plan.b(k);
    int n = cfg.replications;
    bool capped = false;
    if (opts.predicted_rate) {
      double top = 0.0;
      for (const EventSpec& e : events) top = std::max(top, e.level);
      // the rate is linear in the level for the events used here
      const double want = std::ceil(30.0 * std::exp(b * *opts.predicted_rate * top));
      if (want > cfg.max_replications) {
        n = cfg.max_replications;
        capped = true;
      } else {
        n = std::max(n, static_cast<int>(want));
      }
    }
    const auto rs = opts.parallel ? run_parallel(c, k, n, ro) : run_serial(c, k, n, ro);
    for (std::size_t e = 0; e < events.size(); ++e) {
      long hits = 0;
      for (const auto& r : rs) hits += r.events[e] ? 1 : 0;
      TailRow row = tail_row(k, b, hits, n);
      row.event = static_cast<int>(e);
      row.level = events[e].level;
      if (capped) row.warnings.push_back("replication count capped at " + std::to_string(n));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<TailRow> tail_estimate(const ExperimentConfig& cfg, const EventSpec& event, const TailOptions& opts) {
  return tail_estimate(cfg, std::vector<EventSpec>{event}, opts);
}

// ---------------------------------------------------------------------------
// Stationarity

double ks_statistic(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw ConfigError("ks_statistic: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  // step through distinct values so ties move both empirical cdfs together
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    D = std::max(D, std::abs(i / nx - j / ny));
  }
  return D;
}

double ks_pvalue(double D, std::size_t n, std::size_t m) {
  const double en = std::sqrt(static_cast<double>(n) * m / (static_cast<double>(n) + m));
  const double lam = (en + 0.12 + 0.11 / en) * D;
  if (lam <= 0.0) return 1.0;
  double q = 0.0;
  if (lam < 1.18) {
    // theta-function form, fast for small lambda
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double t = std::exp(-(2.0 * j - 1) * (2.0 * j - 1) * pi2 / (8.0 * lam * lam));
      s += t;
      if (t < 1e-300) break;
    }
    q = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lam * s;
  } else {
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
      const double t = std::exp(-2.0 * j * j * lam * lam);
      q += sign * t;
      sign = -sign;
      if (t < 1e-300) break;
    }
    q *= 2.0;
  }
  return std::clamp(q, 0.0, 1.0);
}

StationarityReport stationarity_test(const ExperimentConfig& cfg, int node, double t1, double t2,
                                     std::optional<double> k, double level, bool parallel) {
  if (!(cfg.warmup > 0.0)) throw ConfigError("stationarity: experiment.warmup must be positive");
  if (node < 0 || node >= cfg.network().size()) throw ConfigError("stationarity: no such node");
  if (t1 == t2) throw ConfigError("stationarity: t1 and t2 must differ");
  for (double t : {t1, t2}) {
    if (t < -cfg.warmup || t > cfg.horizon) throw ConfigError("stationarity: time outside [-warmup, horizon]");
  }
  StationarityReport rep;
  rep.k = k.value_or(cfg.plan.k_values.front());
  rep.t1 = t1;
  rep.t2 = t2;
  RunOptions ro;
  ro.couple = false;
  ro.compute_sojourn = false;
  ro.observe_from = std::min(t1, t2);
  ro.sample_times = {t1, t2};
  const auto rs = parallel ? run_parallel(cfg, rep.k, cfg.replications, ro) : run_serial(cfg, rep.k, cfg.replications, ro);
  std::vector<double> x, y;
  for (const auto& r : rs) {
    if (r.truncation_sensitive) ++rep.flagged;
    (r.rep % 2 == 0 ? x : y).push_back(r.samples[node][r.rep % 2 == 0 ? 0 : 1]);
  }
  rep.n1 = x.size();
  rep.n2 = y.size();
  if (x.empty() || y.empty()) throw ConfigError("stationarity: needs at least two replications");
  rep.statistic = ks_statistic(x, y);
  rep.p_value = ks_pvalue(rep.statistic, x.size(), y.size());
  rep.pass = rep.p_value >= level;
  if (std::min(t1, t2) < 0.0) {
    rep.inconclusive = true;
    rep.note = "observation time inside the warm-up window";
  } else if (rep.flagged > 0) {
    rep.inconclusive = true;
    rep.note = std::to_string(rep.flagged) + " replications depend on the truncation at -warmup";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(const std::vector<ReplicationResult>& results, std::ostream& os) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "k,rep,node,metric,value\n";
  for (const auto& r : results) {
    const std::string head = num(r.k) + "," + std::to_string(r.rep) + ",";
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const NodeMetrics& m = r.nodes[i];
      const std::string h = head + std::to_string(i + 1) + ",";
      os << h << "coupling," << num(m.coupling) << "\n";
      os << h << "collapse," << num(m.collapse) << "\n";
      os << h << "snapshot," << num(m.snapshot) << "\n";
      os << h << "high_workload," << num(m.high_workload) << "\n";
      os << h << "workload_end," << num(m.workload_end) << "\n";
      os << h << "workload_sup," << num(m.workload_sup) << "\n";
      os << h << "coupled_end," << num(m.coupled_end) << "\n";
    }
    for (std::size_t e = 0; e < r.events.size(); ++e) {
      os << head << "0,event_" << e + 1 << "," << (r.events[e] ? 1 : 0) << "\n";
    }
    os << head << "0,truncation_sensitive," << (r.truncation_sensitive ? 1 : 0) << "\n";
    os << head << "0,skorokhod_residual," << num(r.skorokhod_residual) << "\n";
    os << head << "0,complementarity_residual," << num(r.complementarity_residual) << "\n";
  }
}

void emit_csv(const std::vector<ReplicationResult>& results, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(results, f);
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace qnet
