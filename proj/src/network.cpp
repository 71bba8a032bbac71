#include "qnet/network.hpp"

#include <string>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

std::string where(int i) { return "node " + std::to_string(i + 1) + ": "; }

}  // namespace

void NetworkSpec::validate() const {
  if (num_classes <= 0) throw ConfigError("network: no classes");
  if (nodes.empty()) throw ConfigError("network: no nodes");
  for (int i = 0; i < size(); ++i) {
    if (nodes[i].num_classes != num_classes) throw ConfigError(where(i) + "class count mismatch");
    try {
      nodes[i].validate();
    } catch (const ConfigError& e) {
      throw ConfigError(where(i) + e.what());
    }
  }
}

void propagate_each(const NetworkPrimitives& np, const NetworkSpec& spec, const NodeOptions& opts,
                    const std::function<void(int, NodeOutput&)>& visit) {
  spec.validate();
  if (static_cast<int>(np.service.size()) != spec.size()) {
    throw ConfigError("network: expected service paths for " + std::to_string(spec.size()) + " nodes");
  }
  NodePrimitives input;
  input.arrivals = np.arrivals;
  bool upstream_sensitive = false;
  for (int i = 0; i < spec.size(); ++i) {
    input.service = np.service[i];
    NodeOutput o;
    try {
      o = evaluate_node(input, spec.nodes[i], opts);
    } catch (const ConfigError& e) {
      throw ConfigError(where(i) + e.what());
    } catch (const DomainError& e) {
      throw DomainError(where(i) + e.what());
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError(where(i) + e.what());
    }
    upstream_sensitive = upstream_sensitive || o.truncation_sensitive;
    o.truncation_sensitive = upstream_sensitive;
    std::vector<PiecewisePath> next;
    if (i + 1 < spec.size()) next = o.D;
    visit(i, o);
    if (i + 1 < spec.size()) input.arrivals = std::move(next);
  }
}

NetworkOutput propagate(const NetworkPrimitives& np, const NetworkSpec& spec, const NodeOptions& opts) {
  NetworkOutput out;
  out.nodes.reserve(spec.nodes.size());
  propagate_each(np, spec, opts, [&](int, NodeOutput& o) { out.nodes.push_back(std::move(o)); });
  return out;
}

std::vector<double> network_loads(const NetworkSpec& spec, const NetworkRates& rates) {
  std::vector<double> loads;
  for (int i = 0; i < spec.size(); ++i) {
    DeclaredRates r;
    r.arrival = rates.arrival;
    if (static_cast<std::size_t>(i) < rates.service.size()) r.service = rates.service[i];
    try {
      loads.push_back(declared_load(spec.nodes[i], r));
    } catch (const ConfigError& e) {
      throw ConfigError(where(i) + e.what());
    }
  }
  return loads;
}

bool check_network_regular(const NetworkSpec& spec, const NetworkRates& rates) {
  for (double l : network_loads(spec, rates)) {
    if (!(l < 1.0)) return false;
  }
  return true;
}

}  // namespace qnet
