#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qnet/node.hpp"

namespace qnet {

// Feedforward network. Class j visits, in index order, the nodes whose
// groups contain j.
struct NetworkSpec {
  int num_classes = 0;
  std::vector<NodeSpec> nodes;

  int size() const { return static_cast<int>(nodes.size()); }
  // Throws ConfigError (annotated with the node index).
  void validate() const;
};

struct NetworkPrimitives {
  std::vector<PiecewisePath> arrivals;
  // service[i][j]: node i, class j. Required where class j visits node i.
  std::vector<std::vector<std::optional<InvertiblePath>>> service;
};

struct NetworkOutput {
  std::vector<NodeOutput> nodes;
};

// Node i is evaluated on the departures of node i-1 (node 0 sees the
// external arrivals).
NetworkOutput propagate(const NetworkPrimitives& np, const NetworkSpec& spec,
                        const NodeOptions& opts = {});
// Same recursion, handing each node's output to visit(i, output) and keeping
// only the departures, so long paths do not pile up.
void propagate_each(const NetworkPrimitives& np, const NetworkSpec& spec, const NodeOptions& opts,
                    const std::function<void(int, NodeOutput&)>& visit);

struct NetworkRates {
  std::vector<std::optional<double>> arrival;               // per class
  std::vector<std::vector<std::optional<double>>> service;  // [node][class]
};

// Declared load of every node; throws ConfigError if a needed rate is missing.
std::vector<double> network_loads(const NetworkSpec& spec, const NetworkRates& rates);
// true iff every node load is below one.
bool check_network_regular(const NetworkSpec& spec, const NetworkRates& rates);

}  // namespace qnet
