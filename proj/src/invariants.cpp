#include "qnet/invariants.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace qnet {

namespace instances {

PiecewisePath random_path(std::mt19937_64& rng, double t0, double t1, int pieces, double jump_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> times{t0};
  for (int i = 1; i < pieces; ++i) times.push_back(t0 + (t1 - t0) * u(rng));
  std::sort(times.begin(), times.end());
  std::vector<Knot> k;
  double v = 4.0 * u(rng) - 2.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      v = k.back().value + k.back().slope * (times[i] - times[i - 1]);
      if (u(rng) < jump_prob) v += 4.0 * u(rng) - 2.0;
    }
    k.push_back({times[i], v, 6.0 * u(rng) - 3.0});
  }
  return PiecewisePath(std::move(k), t1);
}

PiecewisePath random_invertible(std::mt19937_64& rng, double t0, double t1, int pieces, double min_slope,
                                double max_slope) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> times{t0};
  for (int i = 1; i < pieces; ++i) times.push_back(t0 + (t1 - t0) * u(rng));
  if (t0 < 0.0 && t1 > 0.0) times.push_back(0.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<Knot> k;
  double v = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) v += k.back().slope * (times[i] - times[i - 1]);
    k.push_back({times[i], v, min_slope + (max_slope - min_slope) * u(rng)});
  }
  PiecewisePath p(std::move(k), t1);
  return offset(p, -p.eval(std::max(t0, 0.0)));
}

PiecewisePath random_arrivals(std::mt19937_64& rng, double t0, double T, double rate, bool ramps) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::poisson_distribution<int> count(rate * (T - t0));
  std::vector<double> times(count(rng));
  for (double& t : times) t = t0 + (T - t0) * u(rng);
  std::sort(times.begin(), times.end());
  std::erase_if(times, [&](double x) { return x <= t0 || x == 0.0; });
  std::vector<Knot> k;
  auto slope = [&] { return ramps && u(rng) < 0.3 ? 0.2 + 1.3 * u(rng) : 0.0; };
  k.push_back({t0, 0.0, slope()});
  for (double t : times) {
    const double v = k.back().value + k.back().slope * (t - k.back().t);
    k.push_back({t, v + 1.0, slope()});
  }
  PiecewisePath p(std::move(k), T);
  const double anchor = std::max(t0, 0.0);
  return anchor > t0 ? offset(p, -p.eval(anchor)) : p;
}

Node random_node(std::mt19937_64& rng, double t0, double T, bool ramps) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Node inst;
  const int M = 1 + static_cast<int>(u(rng) * 3) % 3;
  inst.spec.num_classes = M;
  for (int j = 0; j < M; ++j) {
    const double r = u(rng);
    if (r < 0.35) inst.spec.high.push_back(j);
    else if (r < 0.9) inst.spec.low.push_back(j);
  }
  if (inst.spec.low.empty()) {
    inst.spec.low.push_back(M - 1);
    std::erase(inst.spec.high, M - 1);
  }
  for (int j = 0; j < M; ++j) {
    inst.np.arrivals.push_back(random_arrivals(rng, t0, T, 0.2 + 0.4 * u(rng), ramps));
  }
  for (int j = 0; j < M; ++j) {
    const PiecewisePath& a = inst.np.arrivals[j];
    // slopes >= 0.5, so this reach covers the arrival range
    const double reach = std::max(std::abs(a.start_value()), std::abs(a.eval(T))) / 0.5 + 2.0;
    const double lo = t0 < 0.0 ? -reach : 0.0;
    inst.np.service.emplace_back(InvertiblePath(random_invertible(rng, lo, reach, 6, 0.5, 3.0)));
  }
  return inst;
}

Network random_critical(std::mt19937_64& rng, int max_nodes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Network net;
  const int M = 1 + static_cast<int>(3 * u(rng)) % 3;
  const int n = 1 + static_cast<int>(max_nodes * u(rng)) % max_nodes;
  net.spec.num_classes = M;
  std::vector<double> alpha(M), alpha_off(M);
  for (int j = 0; j < M; ++j) {
    alpha[j] = 0.5 + u(rng);
    alpha_off[j] = u(rng) - 0.5;
  }
  std::vector<std::vector<double>> sigma(n, std::vector<double>(M, 0.0)), sigma_off = sigma;
  for (int i = 0; i < n; ++i) {
    NodeSpec ns{M, {}, {}};
    for (int j = 0; j < M; ++j) {
      const double r = u(rng);
      if (r < 0.3) ns.high.push_back(j);
      else if (r < 0.85) ns.low.push_back(j);
    }
    if (ns.low.empty()) {
      std::erase(ns.high, 0);
      ns.low.push_back(0);
    }
    // loads alpha_j / sigma_ij proportional to w_j, summing to 1
    std::vector<double> w(M, 0.0);
    double tot = 0.0;
    for (int j = 0; j < M; ++j) {
      if (ns.visits(j)) tot += (w[j] = 0.2 + u(rng));
    }
    for (int j = 0; j < M; ++j) {
      if (ns.visits(j)) {
        sigma[i][j] = alpha[j] * tot / w[j];
        sigma_off[i][j] = u(rng) - 0.5;
      }
    }
    net.spec.nodes.push_back(ns);
  }
  net.cd = build_critical(net.spec, alpha, sigma, alpha_off, sigma_off, 1e-10);
  return net;
}

}  // namespace instances

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void raise(Residual& r, double v) { r.max = std::max(r.max, std::isnan(v) ? INFINITY : v); }

PiecewisePath zero_start(const PiecewisePath& p) { return offset(p, -p.start_value()); }

std::vector<PiecewisePath> random_z(std::mt19937_64& rng, int n, double T) {
  std::vector<PiecewisePath> z;
  for (int i = 0; i < n; ++i) z.push_back(zero_start(instances::random_path(rng, 0.0, T, 10, 0.4)));
  return z;
}

}  // namespace

bool SuiteReport::ok() const {
  return std::all_of(residuals.begin(), residuals.end(), [](const Residual& r) { return r.ok(); });
}

std::vector<SuiteReport> node_suites(int count, std::uint64_t seed) {
  const auto start = Clock::now();
  const double T = 20.0;
  std::mt19937_64 rng(seed);
  SuiteReport comp{"complementarity", count, 0.0,
                   {{"|int V dU|", 0.0, 1e-9},
                    {"|int W dY|", 0.0, 1e-9},
                    {"|int V dY|", 0.0, 1e-9},
                    {"-min V", 0.0, 1e-12},
                    {"-min W", 0.0, 1e-12}}};
  SuiteReport ids{"identities", count, 0.0,
                  {{"Y - sup(id - A)", 0.0, 1e-12},
                   {"W + V - (A - id + Y)", 0.0, 1e-12},
                   {"s o s^-1 - id", 0.0, 1e-12}}};
  const PiecewisePath id = PiecewisePath::identity(0.0, T);
  for (int rep = 0; rep < count; ++rep) {
    const auto inst = instances::random_node(rng, 0.0, T, rep % 2 == 0);
    NodeOptions opts;
    opts.compute_sojourn = false;
    const NodeOutput out = evaluate_node(inst.np, inst.spec, opts);
    raise(comp.residuals[0], std::abs(stieltjes(out.V, out.U)));
    raise(comp.residuals[1], std::abs(stieltjes(out.W, out.Y)));
    raise(comp.residuals[2], std::abs(stieltjes(out.V, out.Y)));
    raise(comp.residuals[3], -min_value(out.V));
    raise(comp.residuals[4], -min_value(out.W));

    std::vector<int> all = inst.spec.high;
    all.insert(all.end(), inst.spec.low.begin(), inst.spec.low.end());
    const PiecewisePath A = group_work(inst.np, all);
    raise(ids.residuals[0], sup_distance(out.Y, running_sup(id - A)));
    raise(ids.residuals[1], sup_distance(out.W + out.V, A - id + out.Y.path()));
    for (const auto& s : inst.np.service) {
      const MonotonePath inv = rc_inverse(*s);
      const PiecewisePath& ip = inv.path();
      raise(ids.residuals[2],
            sup_distance(compose(*s, ip), PiecewisePath::identity(ip.domain_start(), ip.domain_end())));
    }
  }
  comp.seconds = ids.seconds = seconds_since(start);
  return {comp, ids};
}

SuiteReport scale_suite(int count, std::uint64_t seed) {
  const auto start = Clock::now();
  std::mt19937_64 rng(seed);
  SuiteReport rep{"scale", count, 0.0,
                  {{"W(xi a, xi s) - W(a, s)", 0.0, 1e-10}, {"D(xi a, xi s) - xi D(a, s)", 0.0, 1e-10}}};
  NodeOptions opts;
  opts.compute_sojourn = false;
  for (int r = 0; r < count; ++r) {
    const auto inst = instances::random_node(rng, 0.0, 20.0, r % 2 == 0);
    const NodeOutput out = evaluate_node(inst.np, inst.spec, opts);
    for (double xi : {0.5, 2.0, 10.0}) {
      NodePrimitives np;
      for (const auto& a : inst.np.arrivals) np.arrivals.push_back(scale(a, xi));
      for (const auto& s : inst.np.service) np.service.emplace_back(InvertiblePath(scale(*s, xi)));
      const NodeOutput o2 = evaluate_node(np, inst.spec, opts);
      raise(rep.residuals[0], sup_distance(o2.W, out.W));
      for (int j = 0; j < inst.spec.num_classes; ++j) {
        raise(rep.residuals[1], sup_distance(o2.D[j], scale(out.D[j], xi)));
      }
    }
  }
  rep.seconds = seconds_since(start);
  return rep;
}

SuiteReport shift_suite(int count, std::uint64_t seed, int times) {
  const auto start = Clock::now();
  const double t0 = -10.0, T = 20.0;
  std::mt19937_64 rng(seed);
  SuiteReport rep{"shift", count, 0.0,
                  {{"inverse", 0.0, 1e-12},
                   {"work", 0.0, 1e-12},
                   {"V", 0.0, 1e-12},
                   {"W", 0.0, 1e-12},
                   {"Q", 0.0, 1e-12},
                   {"Z - id", 0.0, 1e-12},
                   {"D", 0.0, 1e-12}}};
  NodeOptions opts;
  opts.mode = TimeMode::kWarmUp;
  const PiecewisePath id = PiecewisePath::identity(t0, T);
  for (int r = 0; r < count; ++r) {
    const auto inst = instances::random_node(rng, t0, T, r % 2 == 0);
    const NodeOutput out = evaluate_node(inst.np, inst.spec, opts);
    const int M = inst.spec.num_classes;
    std::vector<MonotonePath> inv;
    std::vector<PiecewisePath> work;
    for (int j = 0; j < M; ++j) {
      inv.push_back(rc_inverse(*inst.np.service[j]));
      work.push_back(compose(inv[j].path(), inst.np.arrivals[j]));
    }
    std::uniform_real_distribution<double> ut(t0 + 1.0, T - 1.0);
    for (int m = 0; m < times; ++m) {
      const double t = ut(rng);
      NodePrimitives sh;
      std::vector<MonotonePath> sh_inv;
      for (int j = 0; j < M; ++j) {
        const PiecewisePath& a = inst.np.arrivals[j];
        const PiecewisePath& s = *inst.np.service[j];
        const double c = inv[j](a(t));
        sh.arrivals.push_back(shift_xi(a, t));
        sh.service.emplace_back(InvertiblePath(shift_xi(s, c)));
        sh_inv.push_back(rc_inverse(*sh.service[j]));
        raise(rep.residuals[0], sup_distance(shift_xi(inv[j].path(), a(t)), sh_inv[j]));
        raise(rep.residuals[1], sup_distance(shift_xi(work[j], t), compose(sh_inv[j].path(), sh.arrivals[j])));
      }
      const NodeOutput o2 = evaluate_node(sh, inst.spec, opts);
      const PiecewisePath id2 = PiecewisePath::identity(t0 - t, T - t);
      raise(rep.residuals[2], sup_distance(shift_theta(out.V, t), o2.V));
      raise(rep.residuals[3], sup_distance(shift_theta(out.W, t), o2.W));
      for (int j = 0; j < M; ++j) {
        raise(rep.residuals[4], sup_distance(shift_theta(out.Q[j], t), o2.Q[j]));
        raise(rep.residuals[5], sup_distance(shift_theta(out.Z[j] - id, t), o2.Z[j] - id2));
        raise(rep.residuals[6], sup_distance(shift_xi(out.D[j], t), offset(o2.D[j], o2.Q[j](0.0))));
      }
    }
  }
  rep.seconds = seconds_since(start);
  return rep;
}

SuiteReport skorokhod_suite(int count, std::uint64_t seed) {
  const auto start = Clock::now();
  const double T = 10.0;
  std::mt19937_64 rng(seed);
  SuiteReport rep{"skorokhod", count, 0.0,
                  {{"phi - fixed point", 0.0, 1e-10},
                   {"fixed point passes - 2n", 0.0, 0.0},
                   {"verify: equation", 0.0, 1e-10},
                   {"verify: complementarity", 0.0, 1e-10},
                   {"verify: -min w", 0.0, 1e-10},
                   {"verify: failures", 0.0, 0.0},
                   {"1-d formula, rounding units", 0.0, 4.0},
                   {"phi(cz) - c phi(z), relative", 0.0, 1e-12}}};
  for (int r = 0; r < count; ++r) {
    const auto net = instances::random_critical(rng, 4);
    const int n = net.cd.num_nodes;
    const auto z = random_z(rng, n, T);
    const auto sol = skorokhod_phi(z, net.cd.R);
    const auto fp = skorokhod_fixed_point(z, net.cd.R);
    raise(rep.residuals[1], fp.passes - 2 * n);
    for (int i = 0; i < n; ++i) {
      raise(rep.residuals[0], sup_distance(fp.sol.w[i], sol.w[i]));
      raise(rep.residuals[0], sup_distance(fp.sol.y[i], sol.y[i]));
    }
    const auto v = verify_skorokhod(sol, z, net.cd.R, 1e-10);
    raise(rep.residuals[2], v.equation_residual);
    raise(rep.residuals[3], v.complementarity_residual);
    raise(rep.residuals[4], -v.min_w);
    raise(rep.residuals[5], v.ok() ? 0.0 : 1.0);

    // w = z - min(inf z, 0) in one dimension. Exact up to rounding, which
    // enters through values and through crossing times (times a slope), so
    // the unit is eps (sup|z| + T max|slope|).
    const auto one = skorokhod_phi({z[0]}, Eigen::MatrixXd::Identity(1, 1));
    const PiecewisePath expect = z[0] - pointwise_min(running_inf(z[0]), PiecewisePath::constant(0.0, 0.0, T));
    double slope = 0.0;
    for (const Knot& k : z[0].knots()) slope = std::max(slope, std::abs(k.slope));
    const double eps = std::numeric_limits<double>::epsilon() * (sup_abs(z[0]) + T * slope);
    raise(rep.residuals[6], sup_distance(one.w[0], expect) / eps);

    double zmax = 0.0;
    for (const auto& p : z) zmax = std::max(zmax, sup_abs(p));
    for (double c : {0.5, 2.0, 10.0}) {
      std::vector<PiecewisePath> cz;
      for (const auto& p : z) cz.push_back(scale(p, c));
      const auto s2 = skorokhod_phi(cz, net.cd.R);
      for (int i = 0; i < n; ++i) {
        raise(rep.residuals[7], sup_distance(s2.w[i], scale(sol.w[i], c)) / (c * zmax));
      }
    }
  }
  rep.seconds = seconds_since(start);
  return rep;
}

SuiteReport tilde_suite(int count, std::uint64_t seed) {
  const auto start = Clock::now();
  const double T = 10.0;
  std::mt19937_64 rng(seed);
  SuiteReport rep{"tilde", count, 0.0, {{"W~ - Phi(R X~)", 0.0, 1e-12}}};
  for (int r = 0; r < count; ++r) {
    const auto net = instances::random_critical(rng, 3);
    const int n = net.cd.num_nodes, M = net.cd.num_classes;
    TildeInputs in;
    for (int j = 0; j < M; ++j) in.a.push_back(zero_start(instances::random_path(rng, 0.0, T, 8, 0.4)));
    for (int i = 0; i < n; ++i) {
      std::vector<std::optional<PiecewisePath>> row;
      for (int j = 0; j < M; ++j) {
        // continuous, and long enough for the clock alpha/sigma * T
        if (net.spec.nodes[i].visits(j)) row.emplace_back(zero_start(instances::random_path(rng, 0.0, 4.0 * T, 8, 0.0)));
        else row.emplace_back(std::nullopt);
      }
      in.s.push_back(std::move(row));
    }
    const auto out = w_tilde(in, net.spec, net.cd);
    const auto phi = skorokhod_phi(apply_matrix(net.cd.R, out.X), net.cd.R);
    for (int i = 0; i < n; ++i) raise(rep.residuals[0], sup_distance(out.W[i], phi.w[i]));
  }
  rep.seconds = seconds_since(start);
  return rep;
}

}  // namespace qnet
