#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qnet/errors.hpp"
#include "qnet/harness.hpp"

namespace qnet {

namespace {

using nlohmann::json;

// Reader that remembers where it is, so every error names the field.
struct Field {
  const json& j;
  std::string path;

  Field at(const std::string& key) const {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
    return {j.at(key), path + "." + key};
  }
  Field at(std::size_t i) const { return {j.at(i), path + "[" + std::to_string(i) + "]"}; }
  bool has(const std::string& key) const { return j.is_object() && j.contains(key) && !j.at(key).is_null(); }
  std::size_t size() const {
    if (!j.is_array()) throw ConfigError(path + ": expected an array");
    return j.size();
  }
  double number() const {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
  }
  long integer() const {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<long>();
  }
  std::string string() const {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> v;
    for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i).number());
    return v;
  }
  std::vector<int> indices() const {
    std::vector<int> v;
    for (std::size_t i = 0; i < size(); ++i) v.push_back(static_cast<int>(at(i).integer()));
    return v;
  }
};

DistSpec dist(const Field& f) {
  DistSpec d;
  if (f.j.is_string()) {
    d.kind = f.string();
    return d;
  }
  d.kind = f.at("kind").string();
  if (f.has("shape")) d.shape = f.at("shape").number();
  return d;
}

// [node][class] matrix.
std::vector<std::vector<double>> per_node(const Field& f, int n, int M) {
  std::vector<std::vector<double>> out;
  if (f.size() != static_cast<std::size_t>(n)) throw ConfigError(f.path + ": expected one row per node");
  for (int i = 0; i < n; ++i) {
    Field row = f.at(static_cast<std::size_t>(i));
    std::vector<double> r = row.numbers();
    if (r.size() != static_cast<std::size_t>(M)) throw ConfigError(row.path + ": expected one entry per class");
    out.push_back(std::move(r));
  }
  return out;
}

BkRule rule_from(const Field& f) {
  const std::string s = f.string();
  if (s == "sqrt") return BkRule::kSqrt;
  if (s == "linear") return BkRule::kLinear;
  if (s == "log") return BkRule::kLog;
  if (s == "power") return BkRule::kPower;
  throw ConfigError(f.path + ": unknown rule '" + s + "' (sqrt, linear, log, power)");
}

const char* rule_name(BkRule r) {
  switch (r) {
    case BkRule::kSqrt: return "sqrt";
    case BkRule::kLinear: return "linear";
    case BkRule::kLog: return "log";
    case BkRule::kPower: return "power";
  }
  return "sqrt";
}

json dist_json(const DistSpec& d) {
  json j{{"kind", d.kind}};
  if (d.shape != 0.0) j["shape"] = d.shape;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON (") + e.what() + ")");
  }
  const Field root{doc, "config"};
  ExperimentConfig cfg;
  NetworkSpec& spec = cfg.plan.spec;

  const Field net = root.at("network");
  const long M = net.at("classes").integer();
  if (M <= 0) throw ConfigError("config.network.classes: must be positive");
  spec.num_classes = static_cast<int>(M);
  const Field nodes = net.at("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Field nd = nodes.at(i);
    NodeSpec ns;
    ns.num_classes = spec.num_classes;
    if (nd.has("high")) ns.high = nd.at("high").indices();
    if (nd.has("low")) ns.low = nd.at("low").indices();
    try {
      ns.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(nd.path + ": " + e.what());
    }
    spec.nodes.push_back(std::move(ns));
  }
  const int n = spec.size();
  if (n == 0) throw ConfigError("config.network.nodes: no nodes");

  const Field rates = root.at("rates");
  cfg.plan.alpha = rates.at("alpha").numbers();
  if (cfg.plan.alpha.size() != static_cast<std::size_t>(M)) {
    throw ConfigError("config.rates.alpha: expected one entry per class");
  }
  cfg.plan.alpha_offset =
      rates.has("alpha_offset") ? rates.at("alpha_offset").numbers() : std::vector<double>(M, 0.0);
  if (cfg.plan.alpha_offset.size() != static_cast<std::size_t>(M)) {
    throw ConfigError("config.rates.alpha_offset: expected one entry per class");
  }
  cfg.plan.sigma = per_node(rates.at("sigma"), n, spec.num_classes);
  cfg.plan.sigma_offset = rates.has("sigma_offset") ? per_node(rates.at("sigma_offset"), n, spec.num_classes)
                                                    : std::vector<std::vector<double>>(n, std::vector<double>(M, 0.0));

  const Field dists = root.at("distributions");
  const Field arr = dists.at("arrival");
  if (arr.j.is_array()) {
    if (arr.size() != static_cast<std::size_t>(M)) throw ConfigError(arr.path + ": expected one entry per class");
    for (std::size_t j = 0; j < arr.size(); ++j) cfg.arrival.push_back(dist(arr.at(j)));
  } else {
    cfg.arrival.assign(M, dist(arr));
  }
  const Field svc = dists.at("service");
  cfg.service.assign(n, std::vector<std::optional<DistSpec>>(M));
  if (svc.j.is_array()) {
    if (svc.size() != static_cast<std::size_t>(n)) throw ConfigError(svc.path + ": expected one row per node");
    for (int i = 0; i < n; ++i) {
      const Field row = svc.at(static_cast<std::size_t>(i));
      if (row.size() != static_cast<std::size_t>(M)) throw ConfigError(row.path + ": expected one entry per class");
      for (int j = 0; j < M; ++j) {
        const Field e = row.at(static_cast<std::size_t>(j));
        if (!e.j.is_null()) cfg.service[i][j] = dist(e);
      }
    }
  } else {
    const DistSpec d = dist(svc);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < M; ++j) {
        if (spec.nodes[i].visits(j)) cfg.service[i][j] = d;
      }
    }
  }
  if (dists.has("first_interval")) {
    const Field f = dists.at("first_interval");
    const std::string s = f.string();
    if (s == "size_biased") cfg.size_biased_first = true;
    else if (s != "plain") throw ConfigError(f.path + ": expected 'plain' or 'size_biased'");
  }

  const Field sc = root.at("scaling");
  cfg.plan.k_values = sc.at("k").numbers();
  if (sc.has("rule")) cfg.plan.rule = rule_from(sc.at("rule"));
  if (sc.has("exponent")) cfg.plan.exponent = sc.at("exponent").number();

  const Field ex = root.at("experiment");
  if (ex.has("horizon")) cfg.horizon = ex.at("horizon").number();
  if (ex.has("warmup")) cfg.warmup = ex.at("warmup").number();
  if (ex.has("replications")) cfg.replications = static_cast<int>(ex.at("replications").integer());
  if (ex.has("max_replications")) cfg.max_replications = static_cast<int>(ex.at("max_replications").integer());
  else cfg.max_replications = std::max(cfg.max_replications, cfg.replications);
  if (ex.has("seed")) {
    const long s = ex.at("seed").integer();
    if (s < 0) throw ConfigError("config.experiment.seed: must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (ex.has("events")) {
    const Field ev = ex.at("events");
    for (std::size_t e = 0; e < ev.size(); ++e) {
      const Field f = ev.at(e);
      EventSpec es;
      es.node = static_cast<int>(f.at("node").integer()) - 1;
      es.level = f.at("level").number();
      if (es.node < 0 || es.node >= n) throw ConfigError(f.path + ".node: no such node (nodes are 1-based)");
      cfg.events.push_back(es);
    }
  }
  if (ex.has("output")) cfg.output = ex.at("output").string();

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config.") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const NetworkSpec& spec = cfg.network();
  json nodes = json::array();
  for (const NodeSpec& ns : spec.nodes) nodes.push_back({{"high", ns.high}, {"low", ns.low}});
  json arrival = json::array();
  for (const DistSpec& d : cfg.arrival) arrival.push_back(dist_json(d));
  json service = json::array();
  for (const auto& row : cfg.service) {
    json r = json::array();
    for (const auto& d : row) r.push_back(d ? dist_json(*d) : json(nullptr));
    service.push_back(r);
  }
  json events = json::array();
  for (const EventSpec& e : cfg.events) events.push_back({{"node", e.node + 1}, {"level", e.level}});
  json doc{
      {"network", {{"classes", spec.num_classes}, {"nodes", nodes}}},
      {"rates",
       {{"alpha", cfg.plan.alpha},
        {"alpha_offset", cfg.plan.alpha_offset},
        {"sigma", cfg.plan.sigma},
        {"sigma_offset", cfg.plan.sigma_offset}}},
      {"distributions",
       {{"arrival", arrival},
        {"service", service},
        {"first_interval", cfg.size_biased_first ? "size_biased" : "plain"}}},
      {"scaling", {{"k", cfg.plan.k_values}, {"rule", rule_name(cfg.plan.rule)}, {"exponent", cfg.plan.exponent}}},
      {"experiment",
       {{"horizon", cfg.horizon},
        {"warmup", cfg.warmup},
        {"replications", cfg.replications},
        {"max_replications", cfg.max_replications},
        {"seed", cfg.seed},
        {"events", events}}},
  };
  if (!cfg.output.empty()) doc["experiment"]["output"] = cfg.output;
  return doc.dump(2);
}

}  // namespace qnet
