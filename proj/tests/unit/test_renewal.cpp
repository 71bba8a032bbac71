#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "qnet/errors.hpp"
#include "qnet/renewal.hpp"

using namespace qnet;

namespace {

// Simpson rule on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// log E exp(y (X - m)) by quadrature of the density.
double quadrature_log_mgf(const Distribution& d, double y) {
  const double m = d.mean();
  switch (d.kind()) {
    case DistKind::kExponential:
      return std::log(simpson([&](double x) { return std::exp(y * (x - m) - x / m) / m; }, 0.0, 60.0 * m));
    case DistKind::kGamma: {
      const double k = d.shape(), th = m / k;
      return std::log(simpson(
          [&](double x) {
            if (x <= 0.0) return 0.0;
            return std::exp(y * (x - m) + (k - 1.0) * std::log(x) - x / th - std::lgamma(k) - k * std::log(th));
          },
          0.0, 80.0 * m));
    }
    case DistKind::kShiftedUniform: {
      const double lo = m * (1.0 - d.shape()), hi = m * (1.0 + d.shape());
      return std::log(simpson([&](double x) { return std::exp(y * (x - m)) / (hi - lo); }, lo, hi));
    }
    case DistKind::kDeterministic: return 0.0;
  }
  return 0.0;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_stat(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

StreamId sid(std::uint64_t rep, int role = 0) { return StreamId{42, 100, role, 0, 0, rep}; }

ScalingPlan tandem_plan(BkRule rule) {
  ScalingPlan p;
  p.k_values = {1e2, 1e3, 1e4, 1e5, 1e6};
  p.rule = rule;
  p.spec = NetworkSpec{1, {NodeSpec{1, {}, {0}}, NodeSpec{1, {}, {0}}}};
  p.alpha = {1.0};
  p.alpha_offset = {-1.0};
  p.sigma = {{1.0}, {1.0}};
  p.sigma_offset = {{0.0}, {0.0}};
  return p;
}

}  // namespace

TEST_CASE("distribution catalog moments") {
  std::mt19937_64 rng(3);
  for (const Distribution& d : {Distribution::exponential(0.7), Distribution::deterministic(1.3),
                                Distribution::gamma(2.5, 1.1), Distribution::shifted_uniform(2.0, 0.5)}) {
    const int n = 400000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = d.sample(rng);
      REQUIRE(x > 0.0);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean - d.mean()) <= 5.0 * std::sqrt(d.variance() / n) + 1e-9);
    CHECK(var == doctest::Approx(d.variance()).epsilon(0.02).scale(1e-8));
    const Distribution r = d.with_mean(3.0);
    CHECK(r.mean() == 3.0);
    CHECK(r.kind() == d.kind());
  }
  CHECK(Distribution::exponential(2.0).variance() == 4.0);
  CHECK(Distribution::shifted_uniform(1.0, 0.5).variance() == doctest::Approx(1.0 / 12.0));
  CHECK_THROWS_AS(Distribution::from_name("pareto", 1.0, 1.5), ConfigError);
  CHECK_THROWS_AS(Distribution::from_name("lognormal", 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(Distribution::exponential(0.0), ConfigError);
  CHECK_THROWS_AS(Distribution::shifted_uniform(1.0, 1.0), ConfigError);
  CHECK(Distribution::from_name("gamma", 2.0, 3.0).shape() == 3.0);
}

TEST_CASE("centered log-mgf against quadrature") {
  for (const Distribution& d : {Distribution::exponential(1.0), Distribution::exponential(0.4),
                                Distribution::gamma(2.0, 1.5), Distribution::gamma(3.5, 0.5),
                                Distribution::shifted_uniform(1.0, 0.9), Distribution::deterministic(2.0)}) {
    const double r = std::min(d.mgf_radius(), 3.0);
    for (double f : {-0.9, -0.4, -0.05, 0.0, 0.05, 0.4, 0.7}) {
      const double y = f * r;
      const double q = quadrature_log_mgf(d, y);
      CHECK(std::abs(d.centered_log_mgf(y) - q) <= 1e-6 * std::abs(q) + 1e-8);
    }
  }
  CHECK_THROWS_AS(Distribution::exponential(1.0).centered_log_mgf(1.0), CertificateError);
}

TEST_CASE("mgf_bound_check examples") {
  CHECK(mgf_bound_check(Distribution::deterministic(1.0), 1e-6, 10.0));
  CHECK(mgf_bound_check(Distribution::exponential(1.0), 2.0, 0.5));
  CHECK_FALSE(mgf_bound_check(Distribution::exponential(1.0), 0.01, 0.5));
  CHECK_THROWS_AS(mgf_bound_check(Distribution::exponential(1.0), 2.0, 1.5), CertificateError);
  CHECK(mgf_bound_check(Distribution::shifted_uniform(1.0, 0.5), 0.05, 5.0));
}

TEST_CASE("lips and pcps examples") {
  {
    const InvertiblePath p = lips({1, std::vector<double>(5, 1.0)});
    for (int h = 0; h <= 5; ++h) CHECK(p(h) == doctest::Approx(h));
    CHECK(p(2.5) == doctest::Approx(2.5));
    const PiecewisePath q = pcps({1, std::vector<double>(5, 1.0)});
    CHECK(q.eval(2.5) == 2.0);
    CHECK(q.eval(3.0) == 3.0);
    CHECK(q.eval(5.0) == 5.0);
  }
  {
    const InvertiblePath p = lips({1, {2.0, 1.0}});
    CHECK(p(1.0) == 2.0);
    CHECK(p(2.0) == 3.0);
    CHECK(p(0.5) == 1.0);
    CHECK(p(1.5) == 2.5);
  }
  {
    // window X_{-1}, X_0, X_1 = 4, 3, 2: lips(-1) = -X_0, lips(-2) = -X_0 - X_{-1}
    const SampleWindow w{-1, {4.0, 3.0, 2.0}};
    const InvertiblePath p = lips(w);
    CHECK(p(0.0) == 0.0);
    CHECK(p(-1.0) == -3.0);
    CHECK(p(-2.0) == -7.0);
    CHECK(p(1.0) == 2.0);
    const PiecewisePath q = pcps(w);
    CHECK(q.eval(-0.5) == -3.0);
    CHECK(q.eval(-2.0) == -7.0);
    CHECK(q.eval(-1.0) == -3.0);
  }
  CHECK_THROWS_AS(lips({1, {1.0, 0.0}}), DomainError);
  CHECK_THROWS_AS(lips({3, {1.0}}), DomainError);
}

TEST_CASE("pcps stays within one sample of lips") {
  std::mt19937_64 rng(9);
  const Distribution d = Distribution::exponential(1.5);
  for (int rep = 0; rep < 50; ++rep) {
    SampleWindow w{-20, {}};
    for (int i = 0; i < 60; ++i) w.values.push_back(d.sample(rng));
    const double mx = *std::max_element(w.values.begin(), w.values.end());
    CHECK(sup_distance(lips(w).path(), pcps(w)) <= mx * (1.0 + 1e-12));
  }
}

TEST_CASE("stationary_renewal: deterministic spacing and declared rate") {
  const double k = 100.0, bk = 10.0, m = 0.5;
  SampleStream s(Distribution::deterministic(m), sid(0));
  const MonotonePath a = stationary_renewal(s, k, bk, 0.0, 2.0, 0.0);
  const auto kn = a.path().knots();
  const double delta = 1.0 / std::sqrt(bk * k);
  REQUIRE(kn.size() > 3);
  for (std::size_t i = 1; i < kn.size(); ++i) {
    CHECK(kn[i].value - kn[i - 1].value == doctest::Approx(delta).epsilon(1e-12));
    if (i > 1) CHECK(kn[i].t - kn[i - 1].t == doctest::Approx(m / k).epsilon(1e-9));
  }
  // alpha_hat = sqrt(k / b_k) / E(A)
  const double alpha_hat = std::sqrt(k / bk) / m;
  CHECK(a(2.0) / 2.0 == doctest::Approx(alpha_hat).epsilon(m / k / 2.0 * alpha_hat + 1e-9));
  CHECK(a(0.0) == 0.0);
}

TEST_CASE("stationary_renewal: offset against the inverse lips") {
  const double k = 50.0, bk = std::sqrt(50.0);
  const double scale = std::sqrt(bk * k);
  {
    // deterministic samples: within one customer
    SampleStream s(Distribution::deterministic(1.0), sid(3));
    const MonotonePath a = stationary_renewal(s, k, bk, -3.0, 5.0);
    const InvertiblePath x = service_process(s, k, bk, a(-3.0) - 1.0, a(5.0) + 1.0);
    CHECK(sup_distance(scale * a.path(), scale * restrict(x.path(), -3.0, 5.0)) <= 1.0 + 1e-9);
  }
  for (int rep = 0; rep < 20; ++rep) {
    SampleStream s(Distribution::gamma(1.7, 1.0), sid(rep));
    const MonotonePath a = stationary_renewal(s, k, bk, -3.0, 5.0);
    const InvertiblePath x = service_process(s, k, bk, a(-3.0) - 1.0, a(5.0) + 1.0);
    // random samples: the gap is the count over one time shift N X_1 / k, plus one
    const double shift = s.offset_fraction() * s.at(1) / k;
    double gap = 0.0;
    for (double t = -3.0; t <= 5.0 - shift; t += 0.001) gap = std::max(gap, x(t + shift) - x(t));
    const PiecewisePath xr = restrict(x.path(), -3.0, 5.0);
    CHECK(sup_distance(scale * a.path(), scale * xr) <= scale * gap + 1.0 + 1e-6);
    // with N = 0 the count is the floor of the inverse
    const MonotonePath a0 = stationary_renewal(s, k, bk, -3.0, 5.0, 0.0);
    for (double t = -2.9; t < 5.0; t += 0.0731) {
      CHECK(scale * a0(t) == doctest::Approx(std::floor(scale * x(t) + 1e-9)).epsilon(1e-9));
    }
  }
}

TEST_CASE("stationary_renewal: warm-up branch and determinism") {
  SampleStream s1(Distribution::exponential(1.0), sid(7));
  SampleStream s2(Distribution::exponential(1.0), sid(7));
  const MonotonePath a = stationary_renewal(s1, 30.0, 5.0, -4.0, 4.0);
  const MonotonePath b = stationary_renewal(s2, 30.0, 5.0, -4.0, 4.0);
  CHECK(a.path() == b.path());
  CHECK(a(0.0) == 0.0);
  CHECK(a(-4.0) < 0.0);
  CHECK(a.path().is_nondecreasing());
  // indices are stable: a later, longer request reuses the same samples
  const MonotonePath c = stationary_renewal(s1, 30.0, 5.0, -4.0, 8.0);
  CHECK(sup_distance(restrict(c.path(), -4.0, 4.0), a.path()) == 0.0);
  SampleStream s3(Distribution::exponential(1.0), sid(8));
  CHECK_FALSE(stationary_renewal(s3, 30.0, 5.0, -4.0, 4.0).path() == a.path());
}

TEST_CASE("stationary_renewal: long-run rate") {
  const double k = 100.0, bk = 10.0, T = 50.0;
  const double scale = std::sqrt(bk * k);
  SampleStream s(Distribution::exponential(0.8), sid(1));
  const MonotonePath a = stationary_renewal(s, k, bk, 0.0, T);
  const double alpha_hat = std::sqrt(k / bk) / 0.8;
  const double count = a(T) * scale;  // Poisson with mean k T / 0.8
  const double se = std::sqrt(k * T / 0.8) / scale / T;
  CHECK(std::abs(a(T) / T - alpha_hat) <= 3.0 * se);
  CHECK(count == doctest::Approx(std::round(count)).epsilon(1e-9));
}

TEST_CASE("stationary_renewal: increments look stationary") {
  // customers in (t, t + 0.5] at t = 0 and t = 3 across replications, 5% level
  const int n = 2000;
  const double k = 4.0, bk = 2.0, scale = std::sqrt(k * bk);
  auto increments = [&](const Distribution& d, bool biased, double t) {
    std::vector<double> x;
    for (int rep = 0; rep < n; ++rep) {
      SampleStream s(d, sid(static_cast<std::uint64_t>(rep)), biased);
      const MonotonePath a = stationary_renewal(s, k, bk, 0.0, 4.0);
      x.push_back(std::round(scale * (a(t + 0.5) - a(t))));
    }
    return x;
  };
  const double crit = 1.358 * std::sqrt(2.0 / n);
  // exact for deterministic samples with the plain first interval
  CHECK(ks_stat(increments(Distribution::deterministic(1.0), false, 0.0),
                increments(Distribution::deterministic(1.0), false, 3.0)) < crit);
  for (const Distribution& d : {Distribution::exponential(1.0), Distribution::gamma(2.0, 1.0),
                                Distribution::shifted_uniform(1.0, 0.8)}) {
    CHECK(ks_stat(increments(d, true, 0.0), increments(d, true, 3.0)) < crit);
    // away from the origin the plain construction has forgotten its start
    CHECK(ks_stat(increments(d, false, 2.0), increments(d, false, 3.0)) < crit);
  }
  // the plain first interval is not length biased: too many early arrivals
  CHECK(ks_stat(increments(Distribution::exponential(1.0), false, 0.0),
                increments(Distribution::exponential(1.0), false, 3.0)) > crit);
}

TEST_CASE("size-biased sampling") {
  std::mt19937_64 rng(17);
  for (const Distribution& d : {Distribution::exponential(0.7), Distribution::gamma(2.5, 1.1),
                                Distribution::shifted_uniform(2.0, 0.5), Distribution::deterministic(1.5)}) {
    // E_biased(X) = E(X^2) / E(X)
    const double expect = (d.variance() + d.mean() * d.mean()) / d.mean();
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += d.sample_size_biased(rng);
    CHECK(s / n == doctest::Approx(expect).epsilon(0.01));
  }
}

TEST_CASE("service_process: deterministic slope and continuity") {
  const double k = 400.0, bk = 20.0, m = 0.25;
  SampleStream s(Distribution::deterministic(m), sid(0, 1));
  const InvertiblePath x = service_process(s, k, bk, 0.0, 3.0);
  const double sigma_hat = std::sqrt(k / bk) / m;
  for (const Knot& kn : x.path().knots()) CHECK(kn.slope == doctest::Approx(sigma_hat).epsilon(1e-9));
  CHECK(x.path().is_continuous());
  CHECK(x(0.0) == doctest::Approx(0.0).scale(1e-12));
  CHECK(x.path().end_value() >= 3.0);

  SampleStream e(Distribution::exponential(1.0), sid(2, 1));
  const InvertiblePath y = service_process(e, k, bk, -1.0, 2.0);
  CHECK(y.path().is_continuous());
  CHECK(y.path().start_value() <= -1.0);
  CHECK(y.path().end_value() >= 2.0);
  CHECK(y.path().min_slope() > 0.0);
}

TEST_CASE("service_process: samples shorter than the knot tolerance stay continuous") {
  // spacing m / k = 1e-13 is below kTimeTol
  const double k = 1e13, bk = std::sqrt(k), m = 1.0;
  SampleStream s(Distribution::deterministic(m), sid(0, 1));
  const InvertiblePath x = service_process(s, k, bk, 0.0, 50.0 / std::sqrt(bk * k));
  CHECK(x.path().is_continuous());
  CHECK(x.path().min_slope() > 0.0);
  CHECK(x.path().end_value() >= 50.0 / std::sqrt(bk * k));
}

TEST_CASE("check_scaling examples") {
  const ScalingReport good = check_scaling(tandem_plan(BkRule::kSqrt));
  CHECK(good.ok());
  const ScalingReport lin = check_scaling(tandem_plan(BkRule::kLinear));
  CHECK_FALSE(lin.sublinear);
  CHECK(lin.superlog);
  const ScalingReport lg = check_scaling(tandem_plan(BkRule::kLog));
  CHECK(lg.sublinear);
  CHECK_FALSE(lg.superlog);
  CHECK_FALSE(lg.failures.empty());

  ScalingPlan over = tandem_plan(BkRule::kSqrt);
  over.alpha_offset = {1.0};
  const ScalingReport r = check_scaling(over);
  CHECK_FALSE(r.loads_below_one);

  ScalingPlan p = tandem_plan(BkRule::kSqrt);
  CHECK(p.d(1e4) == doctest::Approx(10.0));
  CHECK(p.mean_interarrival(0, 1e4) == doctest::Approx(1.0 / 0.9));
  CHECK(p.load(0, 1e4) == doctest::Approx(0.9));
  CHECK(p.alpha_hat(0, 1e4) == doctest::Approx(9.0));
}

TEST_CASE("check_scaling with a single k skips the trend") {
  ScalingPlan p = tandem_plan(BkRule::kSqrt);
  p.k_values = {100};
  const ScalingReport r = check_scaling(p);
  CHECK_FALSE(r.trend_checked);
  CHECK(r.ok());
}
