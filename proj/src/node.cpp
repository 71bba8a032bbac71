#include "qnet/node.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

bool contains(const std::vector<int>& v, int j) { return std::find(v.begin(), v.end(), j) != v.end(); }

double range_scale(const PiecewisePath& p) {
  return std::max({1.0, std::abs(p.start_value()), std::abs(p.eval(p.domain_end()))});
}

// Cumulative service function G(u) = sup{a_j(tau) : A(tau) <= u}, built from
// the merged segments of the group work A and the class arrivals a_j.
PiecewisePath service_function(const PiecewisePath& a_j, const PiecewisePath& work) {
  const double flat_eps = 1e-12 * range_scale(work);
  std::vector<Knot> g;
  g.reserve(2 * (work.size() + a_j.size()) + 2);
  bool first = true;
  double prev_A = 0.0, prev_a = 0.0;
  auto push = [&](double u, double v, double slope) {
    if (!g.empty()) {
      u = std::max(u, g.back().t);
      v = std::max(v, g.back().value);
    }
    g.push_back({u, v, slope});
  };
  for_each_merged_segment(work, a_j, [&](const MergedSegment& s) {
    const double len = s.tb - s.ta;
    if (!first && s.p_value > prev_A + flat_eps) push(prev_A, prev_a, 0.0);
    if (len > 0.0 && s.p_slope * len > flat_eps) {
      push(s.p_value, s.q_value, s.q_slope / s.p_slope);
    } else {
      push(s.p_value, s.q_value + s.q_slope * len, 0.0);
    }
    prev_A = s.p_value + s.p_slope * len;
    prev_a = s.q_value + s.q_slope * len;
    first = false;
  });
  const double end = std::max(g.back().t, work.eval(work.domain_end()));
  if (!(end > g.front().t)) return {};
  return PiecewisePath(std::move(g), end);
}

// Path that drains the remaining work after the horizon: flat for `wait`,
// then slope one for `amount`.
PiecewisePath extend_served(const PiecewisePath& served, double wait, double amount) {
  std::vector<Knot> k(served.knots().begin(), served.knots().end());
  const double T = served.domain_end();
  const double cT = served.end_value();
  if (!k.empty() && k.back().t >= T) k.pop_back();
  double end = T;
  if (wait > 0.0) {
    k.push_back({end, cT, 0.0});
    end += wait;
  }
  if (amount > 0.0) {
    k.push_back({end, cT, 1.0});
    end += amount;
  }
  return PiecewisePath(std::move(k), end);
}

// Observer departure times inf{tau : served_ext(tau) >= work(t)}, maxed with t.
PiecewisePath group_sojourn(const PiecewisePath& work, const PiecewisePath& served, double wait,
                            double amount) {
  const double t0 = work.domain_start(), T = work.domain_end();
  const PiecewisePath id = PiecewisePath::identity(t0, T);
  const PiecewisePath ext = extend_served(served, std::max(wait, 0.0), std::max(amount, 0.0));
  const double scale = range_scale(work);
  if (ext.eval(ext.domain_end()) - ext.start_value() <= 1e-12 * scale) return id;
  const MonotonePath inv = rc_inverse(InvertiblePath(ext));
  const PiecewisePath& ci = inv.path();
  const PiecewisePath p_sup = compose(ci, work);

  // First time ext reaches u. The crossing segment is located with a small
  // downward snap so that a plateau sitting a rounding error below u counts as
  // reaching it; inside that segment the crossing is interpolated exactly.
  const auto ek = ext.knots();
  const double e_end = ext.domain_end();
  auto c_inf = [&](double u) {
    const double x = u - 1e-12 * std::max(1.0, std::abs(u));
    if (ek.front().value >= x) return ek.front().t;
    auto it = std::lower_bound(ek.begin(), ek.end(), x, [](const Knot& k, double v) { return k.value < v; });
    const std::size_t i = static_cast<std::size_t>(it - ek.begin()) - 1;
    const double seg_end = i + 1 < ek.size() ? ek[i + 1].t : e_end;
    if (!(ek[i].slope > 0.0)) return seg_end;
    return std::min(seg_end, ek[i].t + (u - ek[i].value) / ek[i].slope);
  };

  const double flat_eps = 1e-12 * scale;
  const auto wk = work.knots();
  const auto pk = p_sup.knots();
  std::vector<Knot> out;
  out.reserve(pk.size() + wk.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < wk.size(); ++i) {
    const double ta = wk[i].t;
    const double tb = i + 1 < wk.size() ? wk[i + 1].t : T;
    const double len = tb - ta;
    if (len <= 0.0) {
      out.push_back({ta, c_inf(wk[i].value), 0.0});
      continue;
    }
    if (wk[i].slope * len <= flat_eps) {
      out.push_back({ta, c_inf(wk[i].value), 0.0});
      continue;
    }
    while (j + 1 < pk.size() && pk[j + 1].t <= ta) ++j;
    const double v0 = pk[j].value + pk[j].slope * (ta - pk[j].t);
    out.push_back({ta, v0, pk[j].slope});
    std::size_t m = j + 1;
    while (m < pk.size() && pk[m].t < tb) {
      if (pk[m].t > ta) out.push_back(pk[m]);
      ++m;
    }
  }
  return pointwise_max(id, PiecewisePath(std::move(out), T));
}

// Warm-up check for p = id - A (or U - A_L) on [t0, obs]. A workload w0
// present at t0 in the untruncated model has drained by obs once the sup of
// p has gained w0 over p(t0). w0 is unknown; the largest workload the
// truncated queue reaches in the window stands in for it.
bool truncation_suspect(const PiecewisePath& p, double obs) {
  const double t0 = p.domain_start();
  obs = std::min(obs, p.domain_end());
  if (obs <= t0) return true;
  const PiecewisePath r = restrict(p, t0, obs);
  const double gain = max_value(r) - r.start_value();
  const double load = max_value(running_sup(r).path() - r);
  return gain <= load + 1e-12 * std::max(1.0, std::abs(r.start_value()));
}

std::vector<PiecewisePath> class_departures(const NodePrimitives& np, const NodeSpec& spec,
                                            const PiecewisePath& A_H, const PiecewisePath& c_H,
                                            const PiecewisePath& A_L, const PiecewisePath& c_L) {
  std::vector<PiecewisePath> D(spec.num_classes);
  const double flat_H = 1e-12 * range_scale(A_H);
  const double flat_L = 1e-12 * range_scale(A_L);
  const bool H_moves = A_H.eval(A_H.domain_end()) - A_H.start_value() > flat_H;
  const bool L_moves = A_L.eval(A_L.domain_end()) - A_L.start_value() > flat_L;
  for (int j = 0; j < spec.num_classes; ++j) {
    const PiecewisePath& a = np.arrivals[j];
    if (spec.is_high(j) && H_moves) {
      D[j] = group_departures(a, A_H, c_H);
    } else if (spec.is_low(j) && L_moves) {
      D[j] = group_departures(a, A_L, c_L);
    } else {
      D[j] = a;
    }
  }
  return D;
}

}  // namespace

void NodeSpec::validate() const {
  if (num_classes <= 0) throw ConfigError("node spec: no classes");
  if (low.empty()) throw ConfigError("node spec: low priority group must be nonempty");
  for (const auto* g : {&high, &low}) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      const int j = (*g)[i];
      if (j < 0 || j >= num_classes) throw ConfigError("node spec: class " + std::to_string(j) + " out of range");
      if (std::find(g->begin(), g->begin() + static_cast<long>(i), j) != g->begin() + static_cast<long>(i)) {
        throw ConfigError("node spec: class " + std::to_string(j) + " listed twice");
      }
    }
  }
  for (int j : high) {
    if (contains(low, j)) throw ConfigError("node spec: class " + std::to_string(j) + " in both groups");
  }
}

bool NodeSpec::is_high(int j) const { return contains(high, j); }
bool NodeSpec::is_low(int j) const { return contains(low, j); }

void validate_primitives(const NodePrimitives& np, const NodeSpec& spec) {
  spec.validate();
  if (static_cast<int>(np.arrivals.size()) != spec.num_classes) {
    throw ConfigError("node primitives: expected " + std::to_string(spec.num_classes) + " arrival paths");
  }
  if (np.service.size() < np.arrivals.size()) throw ConfigError("node primitives: service list too short");
  const PiecewisePath& a0 = np.arrivals.front();
  if (a0.empty()) throw DomainError("node primitives: empty arrival path");
  for (int j = 0; j < spec.num_classes; ++j) {
    const PiecewisePath& a = np.arrivals[j];
    if (a.empty() || std::abs(a.domain_start() - a0.domain_start()) > kTimeTol ||
        std::abs(a.domain_end() - a0.domain_end()) > kTimeTol) {
      throw DomainError("node primitives: arrival path of class " + std::to_string(j) + " has a different domain");
    }
    if (!a.is_nondecreasing(1e-9)) {
      throw DomainError("node primitives: arrival path of class " + std::to_string(j) + " decreases");
    }
    if (spec.visits(j) && !np.service[j]) {
      throw ConfigError("node primitives: class " + std::to_string(j) + " visits the node but has no service path");
    }
  }
}

PiecewisePath group_work(const NodePrimitives& np, const std::vector<int>& classes) {
  const PiecewisePath& a0 = np.arrivals.front();
  std::vector<PiecewisePath> parts;
  parts.reserve(classes.size());
  for (int j : classes) {
    const MonotonePath inv = rc_inverse(*np.service[j]);
    try {
      parts.push_back(compose(inv.path(), np.arrivals[j]));
    } catch (const DomainError& e) {
      throw DomainError("class " + std::to_string(j) + ": service path does not cover the arrivals (" +
                        e.what() + ")");
    }
  }
  return sum(parts, a0.domain_start(), a0.domain_end());
}

PiecewisePath group_departures(const PiecewisePath& a_j, const PiecewisePath& work,
                               const PiecewisePath& served) {
  const PiecewisePath G = service_function(a_j, work);
  if (G.empty()) return a_j;
  return compose(G, served);
}

NodeOutput evaluate_node(const NodePrimitives& np, const NodeSpec& spec, const NodeOptions& opts) {
  validate_primitives(np, spec);
  const double t0 = np.arrivals.front().domain_start();
  const double T = np.arrivals.front().domain_end();
  const PiecewisePath id = PiecewisePath::identity(t0, T);

  NodeOutput out;
  out.work_high = group_work(np, spec.high);
  out.work_low = group_work(np, spec.low);
  const PiecewisePath p_high = id - out.work_high;
  out.U = running_sup(p_high);
  out.V = out.work_high - id + out.U.path();
  const PiecewisePath p_low = out.U.path() - out.work_low;
  out.Y = running_sup(p_low);
  out.W = out.work_low - out.U.path() + out.Y.path();

  const PiecewisePath c_H = id - out.U.path();
  const PiecewisePath c_L = out.U.path() - out.Y.path();
  out.D = class_departures(np, spec, out.work_high, c_H, out.work_low, c_L);
  out.Q.resize(spec.num_classes);
  for (int j = 0; j < spec.num_classes; ++j) {
    out.Q[j] = spec.visits(j) ? np.arrivals[j] - out.D[j] : PiecewisePath::constant(0.0, t0, T);
  }

  if (opts.compute_sojourn) {
    const double vT = std::max(0.0, out.V.eval(T));
    const double wT = std::max(0.0, out.W.eval(T));
    PiecewisePath z_high, z_low;
    if (!spec.high.empty()) z_high = group_sojourn(out.work_high, c_H, 0.0, vT);
    z_low = group_sojourn(out.work_low, c_L, vT, wT);
    out.Z.resize(spec.num_classes);
    for (int j = 0; j < spec.num_classes; ++j) {
      out.Z[j] = spec.is_high(j) ? z_high : spec.is_low(j) ? z_low : id;
    }
  }

  if (opts.mode == TimeMode::kWarmUp) {
    out.truncation_sensitive = (!spec.high.empty() && truncation_suspect(p_high, opts.observe_from)) ||
                               truncation_suspect(p_low, opts.observe_from);
  }
  return out;
}

MonotonePath idle_high(const NodePrimitives& np, const NodeSpec& spec) {
  validate_primitives(np, spec);
  const PiecewisePath& a0 = np.arrivals.front();
  const PiecewisePath id = PiecewisePath::identity(a0.domain_start(), a0.domain_end());
  return running_sup(id - group_work(np, spec.high));
}

PiecewisePath workload_high(const NodePrimitives& np, const NodeSpec& spec) {
  NodeOptions o;
  o.compute_sojourn = false;
  return evaluate_node(np, spec, o).V;
}

MonotonePath idle_total(const NodePrimitives& np, const NodeSpec& spec) {
  const MonotonePath U = idle_high(np, spec);
  return running_sup(U.path() - group_work(np, spec.low));
}

PiecewisePath workload_low(const NodePrimitives& np, const NodeSpec& spec) {
  NodeOptions o;
  o.compute_sojourn = false;
  return evaluate_node(np, spec, o).W;
}

std::vector<PiecewisePath> departures(const NodePrimitives& np, const NodeSpec& spec) {
  NodeOptions o;
  o.compute_sojourn = false;
  return evaluate_node(np, spec, o).D;
}

std::vector<PiecewisePath> queue_lengths(const NodePrimitives& np, const NodeSpec& spec) {
  NodeOptions o;
  o.compute_sojourn = false;
  return evaluate_node(np, spec, o).Q;
}

std::vector<PiecewisePath> sojourn(const NodePrimitives& np, const NodeSpec& spec) {
  return evaluate_node(np, spec).Z;
}

double declared_load(const NodeSpec& spec, const DeclaredRates& rates) {
  double load = 0.0;
  for (int j = 0; j < spec.num_classes; ++j) {
    if (!spec.visits(j)) continue;
    const auto idx = static_cast<std::size_t>(j);
    if (idx >= rates.arrival.size() || idx >= rates.service.size() || !rates.arrival[idx] ||
        !rates.service[idx]) {
      throw ConfigError("declared rates missing for class " + std::to_string(j));
    }
    const double s = *rates.service[idx];
    if (!(s > 0.0)) throw ConfigError("service rate of class " + std::to_string(j) + " must be positive");
    load += *rates.arrival[idx] / s;
  }
  return load;
}

bool check_regular(const NodeSpec& spec, const DeclaredRates& rates) {
  return declared_load(spec, rates) < 1.0;
}

}  // namespace qnet
