#include "doctest.h"

#include <cmath>
#include <random>

#include "node_fixtures.hpp"
#include "qnet/errors.hpp"
#include "qnet/network.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

struct NetworkInstance {
  NetworkSpec spec;
  NetworkPrimitives np;
};

NetworkInstance random_network(std::mt19937_64& rng, double t0, double T, bool ramps) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NetworkInstance inst;
  const int M = 1 + static_cast<int>(3 * u(rng)) % 3;
  const int n = 1 + static_cast<int>(3 * u(rng)) % 3;
  inst.spec.num_classes = M;
  for (int j = 0; j < M; ++j) inst.np.arrivals.push_back(random_arrivals(rng, t0, T, 0.15 + 0.3 * u(rng), ramps));
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
    std::vector<std::optional<InvertiblePath>> svc;
    for (int j = 0; j < M; ++j) {
      const PiecewisePath& a = inst.np.arrivals[j];
      const double reach = std::max(std::abs(a.start_value()), std::abs(a.eval(T))) / 0.5 + 2.0;
      svc.emplace_back(InvertiblePath(random_invertible(rng, t0 < 0.0 ? -reach : 0.0, reach, 6, 0.5, 3.0)));
    }
    inst.spec.nodes.push_back(ns);
    inst.np.service.push_back(std::move(svc));
  }
  return inst;
}

InvertiblePath rate_path(double r) { return InvertiblePath(PiecewisePath::linear(r, 0.0, 50.0)); }

}  // namespace

TEST_CASE("single node network equals the node model") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = random_node(rng, 0.0, 20.0, true);
    NetworkSpec spec{inst.spec.num_classes, {inst.spec}};
    NetworkPrimitives np{inst.np.arrivals, {inst.np.service}};
    const auto net = propagate(np, spec);
    const auto node = evaluate_node(inst.np, inst.spec);
    REQUIRE(net.nodes.size() == 1);
    CHECK(net.nodes[0].W == node.W);
    CHECK(net.nodes[0].V == node.V);
    for (int j = 0; j < spec.num_classes; ++j) {
      CHECK(net.nodes[0].D[j] == node.D[j]);
      CHECK(net.nodes[0].Z[j] == node.Z[j]);
    }
  }
}

TEST_CASE("tandem hand example") {
  NetworkSpec spec{1, {NodeSpec{1, {}, {0}}, NodeSpec{1, {}, {0}}}};
  NetworkPrimitives np;
  np.arrivals = {PiecewisePath({{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}, 4.0)};
  np.service = {{rate_path(2.0)}, {rate_path(2.0)}};
  const auto out = propagate(np, spec);
  CHECK(out.nodes[0].D[0](1.49) == doctest::Approx(0.0));
  CHECK(out.nodes[0].D[0](1.5) == doctest::Approx(1.0));
  CHECK(out.nodes[1].D[0](1.99) == doctest::Approx(0.0));
  CHECK(out.nodes[1].D[0](2.0) == doctest::Approx(1.0));
  // Z_2 is the observer entering node 2: at t=1 node 2 is still empty.
  CHECK(out.nodes[1].Z[0](1.0) == doctest::Approx(1.0));
  CHECK(out.nodes[1].Z[0](1.5) == doctest::Approx(2.0));
  // End to end: the observer entering node 1 at t=1 leaves node 1 at 1.5
  // and node 2 at Z_2(1.5) = 2.
  CHECK(out.nodes[1].Z[0](out.nodes[0].Z[0](1.0)) == doctest::Approx(2.0));
}

TEST_CASE("pass-through class") {
  NetworkSpec spec{2, {NodeSpec{2, {}, {0}}, NodeSpec{2, {}, {0}}}};
  NetworkPrimitives np;
  const PiecewisePath other({{0.0, 0.0, 0.3}, {2.0, 1.6, 0.0}}, 4.0);
  np.arrivals = {PiecewisePath({{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}, 4.0), other};
  np.service = {{rate_path(2.0), std::nullopt}, {rate_path(2.0), std::nullopt}};
  const auto out = propagate(np, spec);
  CHECK(out.nodes[1].D[1] == other);
}

TEST_CASE("node errors carry the node index") {
  NetworkSpec spec{1, {NodeSpec{1, {}, {0}}, NodeSpec{1, {}, {0}}}};
  NetworkPrimitives np;
  np.arrivals = {PiecewisePath({{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}, 4.0)};
  np.service = {{rate_path(2.0)}, {std::nullopt}};
  try {
    propagate(np, spec);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("node 2") == 0);
  }
  spec.nodes[1].low = {};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("check_network_regular") {
  NetworkSpec spec{2, {NodeSpec{2, {0}, {1}}, NodeSpec{2, {}, {0, 1}}}};
  NetworkRates r;
  r.arrival = {0.45, 0.45};
  r.service = {{1.0, 1.0}, {1.0, 1.0}};
  CHECK(check_network_regular(spec, r));
  r.service[1] = {0.9, 0.9};
  CHECK_FALSE(check_network_regular(spec, r));
  const auto loads = network_loads(spec, r);
  CHECK(loads[1] == doctest::Approx(1.0));
  NetworkSpec fifo{1, {NodeSpec{1, {}, {0}}, NodeSpec{1, {}, {0}}}};
  NetworkRates r2{{0.5}, {{1.0}, {1.0}}};
  CHECK(check_network_regular(fifo, r2));
}

TEST_CASE("single class tandem agrees with the departure recursion") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    const double T = 20.0;
    const int n = 3;
    NetworkSpec spec{1, {}};
    NetworkPrimitives np;
    np.arrivals = {random_arrivals(rng, 0.0, T, 0.8, false)};
    const double total = np.arrivals[0].eval(T);
    for (int i = 0; i < n; ++i) {
      spec.nodes.push_back(NodeSpec{1, {}, {0}});
      np.service.push_back({InvertiblePath(random_invertible(rng, 0.0, 2.0 * total + 5.0, 6, 0.8, 3.0))});
    }
    const auto out = propagate(np, spec);
    // Customer k (1-based) leaves node i at max(leave_{i-1,k}, leave_{i,k-1}) + work.
    std::vector<double> arrive;
    for (const Knot& k : np.arrivals[0].knots()) {
      if (k.t > 0.0) arrive.push_back(k.t);
    }
    std::vector<double> prev = arrive;
    for (int i = 0; i < n; ++i) {
      const PiecewisePath& s = *np.service[i][0];
      std::vector<double> leave(prev.size());
      double free = 0.0;
      for (std::size_t k = 0; k < prev.size(); ++k) {
        const double w = bisect_inverse(s, static_cast<double>(k + 1)) - bisect_inverse(s, static_cast<double>(k));
        leave[k] = std::max(prev[k], free) + w;
        free = leave[k];
      }
      const PiecewisePath& D = out.nodes[i].D[0];
      for (std::size_t k = 0; k < leave.size(); ++k) {
        if (leave[k] >= T - 1e-6) break;
        CHECK(D(leave[k] + 1e-7) == doctest::Approx(k + 1.0));
        CHECK(D(leave[k] - 1e-7) == doctest::Approx(static_cast<double>(k)));
      }
      prev = leave;
    }
  }
}

TEST_CASE("network invariants on random instances") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 150; ++rep) {
    const bool warm = rep % 2 == 1;
    const double t0 = warm ? -10.0 : 0.0, T = 20.0;
    const auto inst = random_network(rng, t0, T, rep % 3 != 0);
    NodeOptions opts;
    opts.mode = warm ? TimeMode::kWarmUp : TimeMode::kHalfLine;
    const auto out = propagate(inst.np, inst.spec, opts);
    const PiecewisePath id = PiecewisePath::identity(t0, T);
    const int n = inst.spec.size();
    bool sensitive = false;
    for (int i = 0; i < n; ++i) {
      const NodeOutput& o = out.nodes[i];
      const NodeSpec& ns = inst.spec.nodes[i];
      CHECK(std::abs(stieltjes(o.V, o.U)) <= 1e-9);
      CHECK(std::abs(stieltjes(o.W, o.Y)) <= 1e-9);
      CHECK(std::abs(stieltjes(o.V, o.Y)) <= 1e-9);
      CHECK(min_value(o.V) >= -1e-12);
      CHECK(min_value(o.W) >= -1e-12);
      CHECK(sup_distance(o.W + o.V, o.work_high + o.work_low - id + o.Y.path()) <= 1e-12);
      for (int j = 0; j < inst.spec.num_classes; ++j) {
        const PiecewisePath& in = i == 0 ? inst.np.arrivals[j] : out.nodes[i - 1].D[j];
        if (ns.visits(j)) {
          CHECK(sup_distance(o.Q[j], in - o.D[j]) <= 1e-12);
          CHECK(min_value(o.Q[j]) >= -1e-9);
        } else {
          CHECK(o.D[j] == in);
        }
        // A later node never releases a customer earlier.
        for (int h = 0; h < i; ++h) {
          CHECK(min_value(out.nodes[h].D[j] - o.D[j]) >= -1e-9);
        }
      }
      sensitive = sensitive || o.truncation_sensitive;
      CHECK(o.truncation_sensitive == sensitive);
    }
  }
}
