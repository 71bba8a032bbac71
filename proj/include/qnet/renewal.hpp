#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qnet/network.hpp"

namespace qnet {

enum class DistKind { kExponential, kDeterministic, kGamma, kShiftedUniform };

// Strictly positive law with finite moment generating function near 0.
// Constructed by mean; the shape parameter survives rescaling by with_mean.
class Distribution {
 public:
  static Distribution exponential(double mean);
  static Distribution deterministic(double value);
  static Distribution gamma(double shape, double mean);
  // Uniform on [mean (1 - spread), mean (1 + spread)], 0 <= spread < 1.
  static Distribution shifted_uniform(double mean, double spread);
  // Catalog lookup by name ("exponential", "deterministic", "gamma",
  // "shifted_uniform"); shape is the gamma shape or the uniform spread.
  // Any other kind throws ConfigError.
  static Distribution from_name(const std::string& kind, double mean, double shape = 0.0);

  DistKind kind() const { return kind_; }
  const char* name() const;
  double mean() const { return mean_; }
  double shape() const { return shape_; }
  double variance() const;
  Distribution with_mean(double mean) const;

  // log E exp(y (X - E X)); throws CertificateError outside the radius.
  double centered_log_mgf(double y) const;
  // Sup of |y| with a finite moment generating function (infinity if bounded).
  double mgf_radius() const;

  double sample(std::mt19937_64& rng) const;
  // Draw from the length-biased law x f(x) / E X.
  double sample_size_biased(std::mt19937_64& rng) const;

 private:
  Distribution(DistKind k, double mean, double shape);
  DistKind kind_ = DistKind::kDeterministic;
  double mean_ = 1.0;
  double shape_ = 0.0;
};

// Identifies one independent input sequence. role 0 is arrivals, 1 service.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t k = 0;
  int role = 0;
  int node = 0;
  int cls = 0;
  std::uint64_t rep = 0;
};

// X_1, X_2, ... and X_0, X_{-1}, ... drawn lazily from separate substreams,
// plus the offset fraction N. Indices are stable under any access order.
class SampleStream {
 public:
  // size_biased_first draws X_1 from the length-biased law, which makes the
  // offset renewal process exactly stationary. Off by default: plain X_1 is
  // exact only for deterministic samples and asymptotically stationary otherwise.
  SampleStream(Distribution dist, const StreamId& id, bool size_biased_first = false);
  // X_h for any integer h.
  double at(long h);
  double offset_fraction() const { return offset_; }
  const Distribution& distribution() const { return dist_; }

 private:
  Distribution dist_;
  std::mt19937_64 pos_rng_, neg_rng_;
  std::vector<double> pos_;  // X_1, X_2, ...
  std::vector<double> neg_;  // X_0, X_{-1}, ...
  double offset_ = 0.0;
  bool size_biased_first_ = false;
};

// Samples X_h for h in [first, first + values.size()).
struct SampleWindow {
  long first = 1;
  std::vector<double> values;
  long last() const { return first + static_cast<long>(values.size()) - 1; }
};

// Partial sums at the integers of [first - 1, last], linearly interpolated,
// value 0 at 0. The window must contain index 1 or index 0 so that 0 is a node
// (first <= 1 <= last + 1). Throws DomainError on a nonpositive sample.
InvertiblePath lips(const SampleWindow& w);
// lips(floor(t)) on the same domain.
PiecewisePath pcps(const SampleWindow& w);

// 1/sqrt(b_k k) floor((X^lips - N X_1)^{-1}(k t)) on [t0, T]. N defaults to the
// stream's offset fraction.
MonotonePath stationary_renewal(SampleStream& s, double k, double b_k, double t0, double T,
                                std::optional<double> offset = std::nullopt);
// 1/sqrt(b_k k) (X^lips)^{-1}(k t), covering the values [c_lo, c_hi].
InvertiblePath service_process(SampleStream& s, double k, double b_k, double c_lo, double c_hi);

enum class BkRule { kSqrt, kLinear, kLog, kPower };

// Sweep over k with critical rates approached at speed 1/d_k:
// 1/E(A_k) = alpha + alpha_offset / d_k, 1/E(S_k) = sigma + sigma_offset / d_k.
struct ScalingPlan {
  std::vector<double> k_values;
  BkRule rule = BkRule::kSqrt;
  double exponent = 0.5;  // kPower: b_k = k^exponent
  NetworkSpec spec;
  std::vector<double> alpha;
  std::vector<double> alpha_offset;
  std::vector<std::vector<double>> sigma;         // [node][class]
  std::vector<std::vector<double>> sigma_offset;  // [node][class]

  double b(double k) const;
  double d(double k) const;
  double mean_interarrival(int j, double k) const;
  double mean_service(int i, int j, double k) const;
  double alpha_hat(int j, double k) const;
  double sigma_hat(int i, int j, double k) const;
  double load(int i, double k) const;
};

struct ScalingReport {
  bool sublinear = true;     // b_k / k decreasing toward 0
  bool superlog = true;      // b_k / log k increasing
  bool trend_checked = true;  // false for a single k, where no trend exists
  bool loads_below_one = true;
  bool schedule = true;
  std::vector<std::string> failures;
  bool ok() const { return sublinear && superlog && loads_below_one && schedule; }
};

ScalingReport check_scaling(const ScalingPlan& plan);

// Checks centered log-mgf <= c y^2 on `points` evenly spaced y in [-delta, delta].
// Throws CertificateError if the mgf diverges inside the interval.
bool mgf_bound_check(const Distribution& d, double c, double delta, int points = 201);

}  // namespace qnet
