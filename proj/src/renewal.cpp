#include "qnet/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

std::seed_seq make_seed(const StreamId& id, std::uint32_t sub) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(id.seed),
                       hi(id.seed),
                       lo(id.k),
                       hi(id.k),
                       static_cast<std::uint32_t>(id.role),
                       static_cast<std::uint32_t>(id.node),
                       static_cast<std::uint32_t>(id.cls),
                       lo(id.rep),
                       hi(id.rep),
                       sub};
}

std::mt19937_64 make_rng(const StreamId& id, std::uint32_t sub) {
  std::seed_seq seq = make_seed(id, sub);
  return std::mt19937_64(seq);
}

// log(sinh(x)/x), even in x.
double log_sinhc(double x) {
  x = std::abs(x);
  if (x < 1e-4) return x * x / 6.0;
  if (x < 20.0) return std::log(std::sinh(x) / x);
  return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0 * x);
}

}  // namespace

// ---------------------------------------------------------------------------
// Distribution

Distribution::Distribution(DistKind k, double mean, double shape) : kind_(k), mean_(mean), shape_(shape) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw ConfigError(std::string(name()) + ": mean must be positive");
  if (k == DistKind::kGamma && !(shape > 0.0)) throw ConfigError("gamma: shape must be positive");
  if (k == DistKind::kShiftedUniform && !(shape >= 0.0 && shape < 1.0)) {
    throw ConfigError("shifted_uniform: spread must lie in [0, 1)");
  }
}

Distribution Distribution::exponential(double mean) { return Distribution(DistKind::kExponential, mean, 0.0); }
Distribution Distribution::deterministic(double value) { return Distribution(DistKind::kDeterministic, value, 0.0); }
Distribution Distribution::gamma(double shape, double mean) { return Distribution(DistKind::kGamma, mean, shape); }
Distribution Distribution::shifted_uniform(double mean, double spread) {
  return Distribution(DistKind::kShiftedUniform, mean, spread);
}

Distribution Distribution::from_name(const std::string& kind, double mean, double shape) {
  if (kind == "exponential") return exponential(mean);
  if (kind == "deterministic") return deterministic(mean);
  if (kind == "gamma") return gamma(shape, mean);
  if (kind == "shifted_uniform") return shifted_uniform(mean, shape);
  throw ConfigError("unknown distribution kind '" + kind +
                    "' (only exponential, deterministic, gamma and shifted_uniform have mgf certificates)");
}

const char* Distribution::name() const {
  switch (kind_) {
    case DistKind::kExponential: return "exponential";
    case DistKind::kDeterministic: return "deterministic";
    case DistKind::kGamma: return "gamma";
    case DistKind::kShiftedUniform: return "shifted_uniform";
  }
  return "?";
}

double Distribution::variance() const {
  switch (kind_) {
    case DistKind::kExponential: return mean_ * mean_;
    case DistKind::kDeterministic: return 0.0;
    case DistKind::kGamma: return mean_ * mean_ / shape_;
    case DistKind::kShiftedUniform: {
      const double w = 2.0 * shape_ * mean_;
      return w * w / 12.0;
    }
  }
  return 0.0;
}

Distribution Distribution::with_mean(double mean) const { return Distribution(kind_, mean, shape_); }

double Distribution::mgf_radius() const {
  switch (kind_) {
    case DistKind::kExponential: return 1.0 / mean_;
    case DistKind::kGamma: return shape_ / mean_;
    default: return kInfinity;
  }
}

double Distribution::centered_log_mgf(double y) const {
  if (!(std::abs(y) < mgf_radius())) {
    throw CertificateError(std::string(name()) + ": moment generating function diverges at y = " + std::to_string(y));
  }
  switch (kind_) {
    case DistKind::kExponential: return -y * mean_ - std::log1p(-y * mean_);
    case DistKind::kDeterministic: return 0.0;
    case DistKind::kGamma: {
      const double theta = mean_ / shape_;
      return -y * shape_ * theta - shape_ * std::log1p(-theta * y);
    }
    case DistKind::kShiftedUniform: return log_sinhc(y * shape_ * mean_);
  }
  return 0.0;
}

double Distribution::sample(std::mt19937_64& rng) const {
  double x = 0.0;
  do {
    switch (kind_) {
      case DistKind::kExponential: x = std::exponential_distribution<double>(1.0 / mean_)(rng); break;
      case DistKind::kDeterministic: x = mean_; break;
      case DistKind::kGamma: x = std::gamma_distribution<double>(shape_, mean_ / shape_)(rng); break;
      case DistKind::kShiftedUniform:
        x = std::uniform_real_distribution<double>(mean_ * (1.0 - shape_), mean_ * (1.0 + shape_))(rng);
        break;
    }
  } while (!(x > 0.0));
  return x;
}

double Distribution::sample_size_biased(std::mt19937_64& rng) const {
  switch (kind_) {
    case DistKind::kExponential: return std::gamma_distribution<double>(2.0, mean_)(rng);
    case DistKind::kDeterministic: return mean_;
    case DistKind::kGamma: return std::gamma_distribution<double>(shape_ + 1.0, mean_ / shape_)(rng);
    case DistKind::kShiftedUniform: {
      const double lo = mean_ * (1.0 - shape_), hi = mean_ * (1.0 + shape_);
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      return std::sqrt(lo * lo + u * (hi * hi - lo * lo));
    }
  }
  return mean_;
}

// ---------------------------------------------------------------------------
// Sample streams

SampleStream::SampleStream(Distribution dist, const StreamId& id, bool size_biased_first)
    : dist_(dist), pos_rng_(make_rng(id, 0)), neg_rng_(make_rng(id, 1)), size_biased_first_(size_biased_first) {
  std::mt19937_64 off = make_rng(id, 2);
  offset_ = std::uniform_real_distribution<double>(0.0, 1.0)(off);
}

double SampleStream::at(long h) {
  if (h >= 1) {
    while (static_cast<long>(pos_.size()) < h) {
      const bool first = pos_.empty() && size_biased_first_;
      pos_.push_back(first ? dist_.sample_size_biased(pos_rng_) : dist_.sample(pos_rng_));
    }
    return pos_[h - 1];
  }
  const long m = -h;
  while (static_cast<long>(neg_.size()) <= m) neg_.push_back(dist_.sample(neg_rng_));
  return neg_[m];
}

// ---------------------------------------------------------------------------
// Partial sums

namespace {

// Partial sums at the integers first-1 .. last.
std::vector<double> partial_sums(const SampleWindow& w) {
  if (w.values.empty()) throw DomainError("lips: empty sample window");
  if (w.first > 1 || w.last() < 0) throw DomainError("lips: the window must reach index 0 or 1");
  for (double x : w.values) {
    if (!(x > 0.0)) throw DomainError("lips: samples must be strictly positive");
  }
  const std::size_t zero = static_cast<std::size_t>(-(w.first - 1));  // position of h = 0
  std::vector<double> s(w.values.size() + 1, 0.0);
  for (std::size_t p = zero + 1; p < s.size(); ++p) s[p] = s[p - 1] + w.values[p - 1];
  for (std::size_t p = zero; p-- > 0;) s[p] = s[p + 1] - w.values[p];
  return s;
}

}  // namespace

InvertiblePath lips(const SampleWindow& w) {
  const std::vector<double> s = partial_sums(w);
  std::vector<double> t(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) t[p] = static_cast<double>(w.first - 1 + static_cast<long>(p));
  return InvertiblePath(PiecewisePath::interpolate(t, s));
}

PiecewisePath pcps(const SampleWindow& w) {
  const std::vector<double> s = partial_sums(w);
  std::vector<Knot> k;
  for (std::size_t p = 0; p < s.size(); ++p) {
    k.push_back({static_cast<double>(w.first - 1 + static_cast<long>(p)), s[p], 0.0});
  }
  const double end = k.back().t;
  return PiecewisePath(std::move(k), end);
}

MonotonePath stationary_renewal(SampleStream& s, double k, double b_k, double t0, double T,
                                std::optional<double> offset) {
  if (!(k > 0.0) || !(b_k > 0.0)) throw ConfigError("stationary_renewal: k and b_k must be positive");
  if (!(T > t0)) throw DomainError("stationary_renewal: empty horizon");
  const double N = offset.value_or(s.offset_fraction());
  if (!(N >= 0.0 && N < 1.0)) throw ConfigError("stationary_renewal: offset fraction must lie in [0, 1)");
  const double delta = 1.0 / std::sqrt(b_k * k);
  const double shift = N * s.at(1);
  // jump time of the count h: (lips(h) - N X_1) / k
  long h = 0;
  double lip = 0.0;
  while ((lip - shift) / k > t0) {
    lip -= s.at(h);  // lips(h-1) = lips(h) - X_h
    --h;
  }
  while ((lip + s.at(h + 1) - shift) / k <= t0) {
    lip += s.at(h + 1);
    ++h;
  }
  std::vector<Knot> knots{{t0, h * delta, 0.0}};
  for (;;) {
    const double next = lip + s.at(h + 1);
    const double tau = (next - shift) / k;
    if (tau > T) break;
    ++h;
    lip = next;
    knots.push_back({tau, h * delta, 0.0});
  }
  return MonotonePath(PiecewisePath(std::move(knots), T));
}

InvertiblePath service_process(SampleStream& s, double k, double b_k, double c_lo, double c_hi) {
  if (!(k > 0.0) || !(b_k > 0.0)) throw ConfigError("service_process: k and b_k must be positive");
  if (!(c_hi >= c_lo)) throw DomainError("service_process: empty value range");
  const double delta = 1.0 / std::sqrt(b_k * k);
  const long h_lo = std::min(0L, static_cast<long>(std::floor(c_lo / delta)) - 1);
  const long h_hi = std::max(1L, static_cast<long>(std::ceil(c_hi / delta)) + 1);
  std::vector<double> t, v;
  t.reserve(static_cast<std::size_t>(h_hi - h_lo + 1));
  // lips at h_lo, then upward
  double lip = 0.0;
  for (long h = 0; h > h_lo; --h) lip -= s.at(h);
  for (long h = h_lo; h <= h_hi; ++h) {
    if (h > h_lo) lip += s.at(h);
    // a sample below about k * kTimeTol would merge two knots into a jump
    t.push_back(t.empty() ? lip / k : std::max(lip / k, t.back() + 2 * kTimeTol));
    v.push_back(h * delta);
  }
  return InvertiblePath(PiecewisePath::interpolate(t, v));
}

// ---------------------------------------------------------------------------
// Scaling

double ScalingPlan::b(double k) const {
  switch (rule) {
    case BkRule::kSqrt: return std::sqrt(k);
    case BkRule::kLinear: return k;
    case BkRule::kLog: return std::log(k);
    case BkRule::kPower: return std::pow(k, exponent);
  }
  return std::sqrt(k);
}

double ScalingPlan::d(double k) const { return std::sqrt(k / b(k)); }

double ScalingPlan::mean_interarrival(int j, double k) const {
  // a class without traffic never arrives
  if (alpha[j] == 0.0 && alpha_offset[j] == 0.0) return std::numeric_limits<double>::infinity();
  const double r = alpha[j] + alpha_offset[j] / d(k);
  if (!(r > 0.0)) throw ConfigError("class " + std::to_string(j) + ": arrival rate schedule is not positive");
  return 1.0 / r;
}

double ScalingPlan::mean_service(int i, int j, double k) const {
  const double r = sigma[i][j] + sigma_offset[i][j] / d(k);
  if (!(r > 0.0)) {
    throw ConfigError("node " + std::to_string(i + 1) + ": service rate schedule of class " + std::to_string(j) +
                      " is not positive");
  }
  return 1.0 / r;
}

double ScalingPlan::alpha_hat(int j, double k) const { return d(k) / mean_interarrival(j, k); }
double ScalingPlan::sigma_hat(int i, int j, double k) const { return d(k) / mean_service(i, j, k); }

double ScalingPlan::load(int i, double k) const {
  double rho = 0.0;
  for (int j = 0; j < spec.num_classes; ++j) {
    if (spec.nodes[i].visits(j)) rho += alpha_hat(j, k) / sigma_hat(i, j, k);
  }
  return rho;
}

ScalingReport check_scaling(const ScalingPlan& plan) {
  ScalingReport rep;
  auto fail = [&](bool& flag, const std::string& msg) {
    flag = false;
    rep.failures.push_back(msg);
  };
  std::vector<double> ks = plan.k_values;
  std::sort(ks.begin(), ks.end());
  if (ks.empty()) fail(rep.schedule, "no k values");
  rep.trend_checked = ks.size() >= 2;
  if (!ks.empty() && !(ks.front() > 1.0)) fail(rep.superlog, "b_k/log k: k values must exceed 1");
  for (double k : ks) {
    if (!(plan.b(k) > 0.0)) fail(rep.schedule, "b_k must be positive at k = " + std::to_string(k));
  }
  if (rep.failures.empty()) {
    for (std::size_t p = 1; p < ks.size(); ++p) {
      const double r0 = plan.b(ks[p - 1]) / ks[p - 1], r1 = plan.b(ks[p]) / ks[p];
      if (!(r1 < r0 * (1.0 - 1e-9))) {
        fail(rep.sublinear, "b_k/k does not decrease between k = " + std::to_string(ks[p - 1]) + " and " +
                             std::to_string(ks[p]));
        break;
      }
    }
    for (std::size_t p = 1; p < ks.size(); ++p) {
      const double r0 = plan.b(ks[p - 1]) / std::log(ks[p - 1]), r1 = plan.b(ks[p]) / std::log(ks[p]);
      if (!(r1 > r0 * (1.0 + 1e-9))) {
        fail(rep.superlog, "b_k/log k does not increase between k = " + std::to_string(ks[p - 1]) + " and " +
                             std::to_string(ks[p]));
        break;
      }
    }
  }
  if (!rep.schedule) return rep;
  const int n = static_cast<int>(plan.spec.nodes.size());
  const int M = plan.spec.num_classes;
  if (static_cast<int>(plan.alpha.size()) != M || static_cast<int>(plan.alpha_offset.size()) != M ||
      static_cast<int>(plan.sigma.size()) != n || static_cast<int>(plan.sigma_offset.size()) != n) {
    fail(rep.schedule, "rate vectors do not match the network");
    return rep;
  }
  for (double k : ks) {
    try {
      const double d = plan.d(k);
      for (int j = 0; j < M; ++j) {
        const double got = d * (1.0 / plan.mean_interarrival(j, k) - plan.alpha[j]);
        if (std::abs(got - plan.alpha_offset[j]) > 1e-9 * std::max(1.0, std::abs(plan.alpha_offset[j]))) {
          fail(rep.schedule, "arrival schedule of class " + std::to_string(j) + " is off");
        }
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < M; ++j) {
          if (!plan.spec.nodes[i].visits(j)) continue;
          const double got = d * (1.0 / plan.mean_service(i, j, k) - plan.sigma[i][j]);
          if (std::abs(got - plan.sigma_offset[i][j]) > 1e-9 * std::max(1.0, std::abs(plan.sigma_offset[i][j]))) {
            fail(rep.schedule, "service schedule at node " + std::to_string(i + 1) + " is off");
          }
        }
        const double rho = plan.load(i, k);
        if (!(rho < 1.0)) {
          fail(rep.loads_below_one, "load " + std::to_string(rho) + " at node " + std::to_string(i + 1) +
                                        " for k = " + std::to_string(k));
        }
      }
    } catch (const ConfigError& e) {
      fail(rep.schedule, e.what());
    }
  }
  return rep;
}

bool mgf_bound_check(const Distribution& d, double c, double delta, int points) {
  if (!(delta > 0.0) || points < 2) throw ConfigError("mgf_bound_check: need delta > 0 and at least 2 points");
  if (!(delta < d.mgf_radius())) {
    throw CertificateError(std::string(d.name()) + ": moment generating function diverges inside [-delta, delta]");
  }
  for (int p = 0; p < points; ++p) {
    const double y = -delta + 2.0 * delta * p / (points - 1);
    if (d.centered_log_mgf(y) > c * y * y + 1e-15) return false;
  }
  return true;
}

}  // namespace qnet
