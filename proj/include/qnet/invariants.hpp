#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qnet/node.hpp"
#include "qnet/reflection.hpp"

namespace qnet {

// Random instances for the invariant suites.
namespace instances {

// Right-continuous path with jumps on [t0, t1].
PiecewisePath random_path(std::mt19937_64& rng, double t0, double t1, int pieces, double jump_prob);
// Continuous strictly increasing path, value 0 at max(t0, 0).
PiecewisePath random_invertible(std::mt19937_64& rng, double t0, double t1, int pieces, double min_slope,
                                double max_slope);
// Unit jumps at Poisson times, with fluid ramps between them when `ramps`.
// Value 0 at max(t0, 0).
PiecewisePath random_arrivals(std::mt19937_64& rng, double t0, double T, double rate, bool ramps);

struct Node {
  NodeSpec spec;
  NodePrimitives np;
};
// 1-3 classes, at least one low class; service paths cover the arrival range.
Node random_node(std::mt19937_64& rng, double t0, double T, bool ramps);

struct Network {
  NetworkSpec spec;
  CriticalData cd;
};
// Feedforward network with 1..max_nodes nodes, 1-3 classes and critical rates.
Network random_critical(std::mt19937_64& rng, int max_nodes);

}  // namespace instances

struct Residual {
  std::string name;
  double max = 0.0;
  double tol = 0.0;
  bool ok() const { return max <= tol; }
};

struct SuiteReport {
  std::string name;
  int instances = 0;
  double seconds = 0.0;
  std::vector<Residual> residuals;
  bool ok() const;
};

// Single node instances on [0, 20] (alternating jump-only and ramp arrivals).
// Returns {complementarity, identities}; both run on the same instances.
std::vector<SuiteReport> node_suites(int instances, std::uint64_t seed);
// W and D under (xi a, xi s) for xi in {0.5, 2, 10}.
SuiteReport scale_suite(int instances, std::uint64_t seed);
// Warm-up instances on [-10, 20], `times` interior shift times each.
SuiteReport shift_suite(int instances, std::uint64_t seed, int times = 5);
// Sequential solver vs the fixed point route, verify_skorokhod, the 1-d
// formula and homogeneity, on networks with up to 4 nodes.
SuiteReport skorokhod_suite(int instances, std::uint64_t seed);
// Node recursion for W~ against Phi(R X~), networks with up to 3 nodes.
SuiteReport tilde_suite(int instances, std::uint64_t seed);

}  // namespace qnet
