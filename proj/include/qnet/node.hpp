#pragma once

#include <optional>
#include <vector>

#include "qnet/path.hpp"

namespace qnet {

// Priority groups of one node. Classes are 0..num_classes-1; classes in
// neither group do not visit the node.
struct NodeSpec {
  int num_classes = 0;
  std::vector<int> high;
  std::vector<int> low;

  // Throws ConfigError.
  void validate() const;
  bool is_high(int j) const;
  bool is_low(int j) const;
  bool visits(int j) const { return is_high(j) || is_low(j); }
};

struct NodePrimitives {
  // Cumulative arrivals per class. All share one domain [t0, T].
  std::vector<PiecewisePath> arrivals;
  // Served customers as a function of busy time. Required for visiting classes.
  std::vector<std::optional<InvertiblePath>> service;
};

enum class TimeMode {
  kHalfLine,  // domain [0, T], all paths start at 0
  kWarmUp,    // domain [-T_w, T], suprema truncated to [-T_w, t]
};

struct NodeOptions {
  TimeMode mode = TimeMode::kHalfLine;
  // Warm-up mode: the truncation flag looks at suprema over [-T_w, observe_from].
  double observe_from = 0.0;
  bool compute_sojourn = true;
};

struct NodeOutput {
  MonotonePath U;  // idle time after high priority service
  PiecewisePath V;  // high priority workload
  MonotonePath Y;  // total idle time
  PiecewisePath W;  // low priority workload
  std::vector<PiecewisePath> D;
  std::vector<PiecewisePath> Q;
  std::vector<PiecewisePath> Z;  // empty when sojourn is skipped
  // Sum of s_j^{-1} o a_j over each group.
  PiecewisePath work_high;
  PiecewisePath work_low;
  bool truncation_sensitive = false;
};

// Validates shapes and domains; throws ConfigError or DomainError.
void validate_primitives(const NodePrimitives& np, const NodeSpec& spec);

// s_j^{-1} o a_j summed over the listed classes (zero path if none).
PiecewisePath group_work(const NodePrimitives& np, const std::vector<int>& classes);

MonotonePath idle_high(const NodePrimitives& np, const NodeSpec& spec);
PiecewisePath workload_high(const NodePrimitives& np, const NodeSpec& spec);
MonotonePath idle_total(const NodePrimitives& np, const NodeSpec& spec);
PiecewisePath workload_low(const NodePrimitives& np, const NodeSpec& spec);
std::vector<PiecewisePath> departures(const NodePrimitives& np, const NodeSpec& spec);
std::vector<PiecewisePath> queue_lengths(const NodePrimitives& np, const NodeSpec& spec);
std::vector<PiecewisePath> sojourn(const NodePrimitives& np, const NodeSpec& spec);

// All of the above in one pass.
NodeOutput evaluate_node(const NodePrimitives& np, const NodeSpec& spec,
                         const NodeOptions& opts = {});

// Departures of one group. a_j are the group's arrivals, work is the group's
// cumulative work and served = work - workload (the work completed by t).
PiecewisePath group_departures(const PiecewisePath& a_j, const PiecewisePath& work,
                               const PiecewisePath& served);

// Declared long-run rates: arrival[j] customers per time, service[j]
// customers per busy time (nullopt for classes without a rate).
struct DeclaredRates {
  std::vector<std::optional<double>> arrival;
  std::vector<std::optional<double>> service;
};

// true iff sum over visiting classes of arrival/service < 1. Throws
// ConfigError when a visiting class lacks a rate.
bool check_regular(const NodeSpec& spec, const DeclaredRates& rates);
double declared_load(const NodeSpec& spec, const DeclaredRates& rates);

}  // namespace qnet
