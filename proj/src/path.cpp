#include "qnet/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qnet/errors.hpp"

namespace qnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMergeValueTol = 2e-15;
constexpr double kMergeSlopeTol = 1e-14;
// Relative slack when checking that a time lies in a domain.
constexpr double kDomainSlack = 1e-9;

double slack(double t) { return kDomainSlack * std::max(1.0, std::fabs(t)); }

double value_at(const Knot& k, double t) { return k.value + k.slope * (t - k.t); }

void require_nonempty(const PiecewisePath& p, const char* op) {
  if (p.empty()) throw DomainError(std::string(op) + ": empty path");
}

struct Common {
  double lo;
  double hi;
};

Common common_domain(const PiecewisePath& p, const PiecewisePath& q, const char* op) {
  require_nonempty(p, op);
  require_nonempty(q, op);
  Common c{std::max(p.domain_start(), q.domain_start()), std::min(p.domain_end(), q.domain_end())};
  if (c.lo > c.hi + slack(c.hi)) {
    throw DomainError(std::string(op) + ": disjoint domains");
  }
  c.hi = std::max(c.hi, c.lo);
  return c;
}

Common same_domain(const PiecewisePath& p, const PiecewisePath& q, const char* op) {
  Common c = common_domain(p, q, op);
  if (std::fabs(p.domain_start() - q.domain_start()) > slack(c.lo) ||
      std::fabs(p.domain_end() - q.domain_end()) > slack(c.hi)) {
    throw DomainError(std::string(op) + ": incompatible domains [" +
                      std::to_string(p.domain_start()) + ", " + std::to_string(p.domain_end()) +
                      "] and [" + std::to_string(q.domain_start()) + ", " +
                      std::to_string(q.domain_end()) + "]");
  }
  return c;
}

// Walks the merged segments of p and q over [lo, hi]. f receives the segment
// [ta, tb) together with right values at ta and slopes. A knot exactly at hi
// produces a final zero-length segment.
template <class F>
void merge_walk(const PiecewisePath& p, const PiecewisePath& q, double lo, double hi, F&& f) {
  auto pk = p.knots();
  auto qk = q.knots();
  std::size_t i = p.segment_index(lo);
  std::size_t j = q.segment_index(lo);
  double t = lo;
  while (true) {
    const double np = i + 1 < pk.size() ? pk[i + 1].t : kInf;
    const double nq = j + 1 < qk.size() ? qk[j + 1].t : kInf;
    const double tn = std::min({np, nq, hi});
    f(t, tn, value_at(pk[i], t), pk[i].slope, value_at(qk[j], t), qk[j].slope);
    if (tn >= hi) {
      const bool kp = np == hi;
      const bool kq = nq == hi;
      if ((kp || kq) && t < hi) {
        if (kp) ++i;
        if (kq) ++j;
        f(hi, hi, value_at(pk[i], hi), pk[i].slope, value_at(qk[j], hi), qk[j].slope);
      }
      break;
    }
    if (np == tn) ++i;
    if (nq == tn) ++j;
    t = tn;
  }
}

}  // namespace

void canonicalize(std::vector<Knot>& k, double end) {
  if (k.empty()) return;
  std::size_t w = 0;
  for (std::size_t r = 0; r < k.size(); ++r) {
    if (w > 0 && k[r].t - k[w - 1].t <= kTimeTol) {
      const double t0 = k[w - 1].t;
      k[w - 1] = Knot{t0, value_at(k[r], t0), k[r].slope};
    } else {
      k[w++] = k[r];
    }
  }
  k.resize(w);
  w = 1;
  for (std::size_t r = 1; r < k.size(); ++r) {
    const Knot& prev = k[w - 1];
    const double pred = value_at(prev, k[r].t);
    const double vscale = std::max({1.0, std::fabs(pred), std::fabs(k[r].value)});
    const bool no_jump = std::fabs(k[r].value - pred) <= kMergeValueTol * vscale;
    const bool at_end = k[r].t >= end;
    const double sscale = std::max({1.0, std::fabs(prev.slope), std::fabs(k[r].slope)});
    const bool same_slope = std::fabs(k[r].slope - prev.slope) <= kMergeSlopeTol * sscale;
    if (no_jump && (same_slope || at_end)) continue;
    k[w++] = k[r];
  }
  k.resize(w);
  if (k.size() > 1 && k.back().t >= end) k.back().slope = 0.0;
}

PiecewisePath::PiecewisePath(std::vector<Knot> knots, double domain_end)
    : knots_(std::move(knots)), end_(domain_end) {
  if (knots_.empty()) throw DomainError("path needs at least one knot");
  for (const Knot& k : knots_) {
    if (!std::isfinite(k.t) || !std::isfinite(k.value) || !std::isfinite(k.slope)) {
      throw DomainError("path knots must be finite");
    }
  }
  if (!std::isfinite(end_) || end_ < knots_.front().t) {
    throw DomainError("domain end precedes domain start");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (knots_[i].t < knots_[i - 1].t) throw DomainError("knot times must be nondecreasing");
  }
  if (knots_.back().t > end_ + kTimeTol) throw DomainError("knot beyond domain end");
  if (knots_.back().t > end_) knots_.back().t = end_;
  canonicalize(knots_, end_);
}

PiecewisePath PiecewisePath::constant(double value, double t0, double t1) {
  return PiecewisePath({{t0, value, 0.0}}, t1);
}

PiecewisePath PiecewisePath::linear(double slope, double t0, double t1, double value_at_t0) {
  return PiecewisePath({{t0, value_at_t0, slope}}, t1);
}

PiecewisePath PiecewisePath::identity(double t0, double t1) {
  return PiecewisePath({{t0, t0, 1.0}}, t1);
}

PiecewisePath PiecewisePath::interpolate(std::span<const double> times,
                                         std::span<const double> values) {
  if (times.size() != values.size() || times.empty()) {
    throw DomainError("interpolate: mismatched or empty input");
  }
  std::vector<Knot> k;
  k.reserve(times.size());
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double len = times[i + 1] - times[i];
    if (!(len > 0)) throw DomainError("interpolate: times must increase");
    k.push_back({times[i], values[i], (values[i + 1] - values[i]) / len});
  }
  if (times.size() == 1) k.push_back({times[0], values[0], 0.0});
  return PiecewisePath(std::move(k), times.back());
}

PiecewisePath PiecewisePath::steps(std::span<const double> times, std::span<const double> values,
                                   double domain_end) {
  if (times.size() != values.size() || times.empty()) {
    throw DomainError("steps: mismatched or empty input");
  }
  std::vector<Knot> k;
  k.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) k.push_back({times[i], values[i], 0.0});
  return PiecewisePath(std::move(k), domain_end);
}

double PiecewisePath::domain_start() const {
  if (knots_.empty()) throw DomainError("empty path");
  return knots_.front().t;
}

std::size_t PiecewisePath::segment_index(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double x, const Knot& k) { return x < k.t; });
  if (it == knots_.begin()) return 0;
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

double PiecewisePath::eval(double t) const {
  if (knots_.empty()) throw DomainError("eval on empty path");
  if (t < knots_.front().t - slack(t) || t > end_ + slack(t) || std::isnan(t)) {
    throw DomainError("eval: time " + std::to_string(t) + " outside [" +
                      std::to_string(knots_.front().t) + ", " + std::to_string(end_) + "]");
  }
  return value_at(knots_[segment_index(t)], t);
}

double PiecewisePath::left_limit(double t) const {
  if (knots_.empty()) throw DomainError("left_limit on empty path");
  if (t < knots_.front().t - slack(t) || t > end_ + slack(t) || std::isnan(t)) {
    throw DomainError("left_limit: time outside domain");
  }
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                             [](const Knot& k, double x) { return k.t < x; });
  if (it == knots_.begin()) return value_at(knots_.front(), t);
  return value_at(*(it - 1), t);
}

double PiecewisePath::start_value() const {
  if (knots_.empty()) throw DomainError("empty path");
  return knots_.front().value;
}

double PiecewisePath::end_value() const { return left_limit(end_); }

double PiecewisePath::max_abs_jump() const {
  double m = 0.0;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    m = std::max(m, std::fabs(knots_[i].value - value_at(knots_[i - 1], knots_[i].t)));
  }
  return m;
}

double PiecewisePath::min_jump() const {
  double m = 0.0;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    m = std::min(m, knots_[i].value - value_at(knots_[i - 1], knots_[i].t));
  }
  return m;
}

double PiecewisePath::min_slope() const {
  double m = kInf;
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const bool zero_length = i + 1 == knots_.size() && knots_[i].t >= end_;
    if (!zero_length) m = std::min(m, knots_[i].slope);
  }
  return m;
}

bool PiecewisePath::is_continuous(double tol) const {
  double scale = 1.0;
  for (const Knot& k : knots_) scale = std::max(scale, std::fabs(k.value));
  return max_abs_jump() <= tol * scale;
}

bool PiecewisePath::is_nondecreasing(double tol) const {
  double scale = 1.0;
  for (const Knot& k : knots_) scale = std::max(scale, std::fabs(k.value));
  return min_jump() >= -tol * scale && min_slope() >= -tol * std::max(1.0, scale);
}

MonotonePath::MonotonePath(PiecewisePath p, double tol) : p_(std::move(p)) {
  if (p_.empty()) throw DomainError("monotone path: empty");
  if (!p_.is_nondecreasing(tol)) throw DomainError("monotone path: path decreases");
}

InvertiblePath::InvertiblePath(PiecewisePath p, double tol) : p_(std::move(p)) {
  if (p_.empty()) throw DomainError("invertible path: empty");
  if (!p_.is_nondecreasing(tol)) throw DomainError("invertible path: path decreases");
  if (!p_.is_continuous(tol)) throw DomainError("invertible path: path jumps");
  if (!(p_.end_value() > p_.start_value())) {
    throw DegenerateInputError("invertible path: zero total increase");
  }
}

MonotonePath running_sup(const PiecewisePath& p) {
  require_nonempty(p, "running_sup");
  auto k = p.knots();
  std::vector<Knot> out;
  out.reserve(k.size() + 4);
  double m = -kInf;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double tb = i + 1 < k.size() ? k[i + 1].t : p.domain_end();
    const double len = tb - k[i].t;
    const double v = k[i].value;
    const double s = k[i].slope;
    const double v_end = v + s * len;
    if (v >= m) {
      m = v;
      if (s > 0) {
        out.push_back({k[i].t, v, s});
        m = v_end;
      } else {
        out.push_back({k[i].t, m, 0.0});
      }
    } else if (s > 0 && v_end > m) {
      const double cross = k[i].t + (m - v) / s;
      out.push_back({k[i].t, m, 0.0});
      out.push_back({cross, m, s});
      m = v_end;
    } else {
      out.push_back({k[i].t, m, 0.0});
    }
  }
  // Monotone by construction; skip the validation pass.
  return MonotonePath(PiecewisePath(std::move(out), p.domain_end()), kInf);
}

PiecewisePath running_inf(const PiecewisePath& p) { return scale(running_sup(scale(p, -1.0)), -1.0); }

MonotonePath rc_inverse(const InvertiblePath& cpath) {
  const PiecewisePath& c = cpath.path();
  auto k = c.knots();
  const double u0 = c.start_value();
  const double u1 = c.end_value();
  const double flat_tol = kTimeTol * std::max(1.0, std::fabs(u1 - u0));
  std::vector<Knot> out;
  out.reserve(k.size() + 1);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double tb = i + 1 < k.size() ? k[i + 1].t : c.domain_end();
    const double len = tb - k[i].t;
    if (len <= 0) continue;
    if (k[i].slope * len > flat_tol) {
      out.push_back({k[i].value, k[i].t, 1.0 / k[i].slope});
    } else {
      // A flat piece: the inverse jumps to its right end. A following rising
      // piece starting at the same level overrides this knot.
      out.push_back({k[i].value, tb, 0.0});
    }
  }
  if (out.empty()) out.push_back({u0, c.domain_end(), 0.0});
  std::vector<Knot> sorted;
  sorted.reserve(out.size());
  for (const Knot& kn : out) {
    // Rounding can place a level a hair below its predecessor.
    Knot x = kn;
    if (!sorted.empty() && x.t < sorted.back().t) x.t = sorted.back().t;
    x.t = std::min(x.t, u1);
    sorted.push_back(x);
  }
  return MonotonePath(PiecewisePath(std::move(sorted), u1), kInf);
}

PiecewisePath compose(const PiecewisePath& outer, const PiecewisePath& inner) {
  require_nonempty(outer, "compose");
  require_nonempty(inner, "compose");
  const bool outer_cont = outer.is_continuous(1e-12);
  const bool inner_mono = inner.is_nondecreasing(1e-12);
  if (!outer_cont && !inner_mono) {
    throw DomainError("compose: outer path jumps and inner path is not monotone");
  }
  const double a = outer.domain_start();
  const double b = outer.domain_end();
  auto ok = outer.knots();
  auto ik = inner.knots();
  auto clamp = [&](double x) {
    if (x < a - slack(x) || x > b + slack(x)) {
      throw DomainError("compose: inner value " + std::to_string(x) + " outside outer domain [" +
                        std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return std::clamp(x, a, b);
  };
  auto snap_tol = [](double x) { return kTimeTol * std::max(1.0, std::fabs(x)); };
  // Segment of the outer path governing values at and just above x, snapping
  // to a knot that lies within tolerance above x.
  auto upper_segment = [&](double x) {
    auto it = std::upper_bound(ok.begin(), ok.end(), x + snap_tol(x),
                               [](double v, const Knot& kn) { return v < kn.t; });
    return it == ok.begin() ? std::size_t{0} : static_cast<std::size_t>(it - ok.begin()) - 1;
  };
  auto outer_at = [&](std::size_t idx, double x) {
    return value_at(ok[idx], std::max(x, ok[idx].t));
  };

  std::vector<Knot> out;
  out.reserve(ik.size() + ok.size());
  for (std::size_t i = 0; i < ik.size(); ++i) {
    const double ta = ik[i].t;
    const double tb = i + 1 < ik.size() ? ik[i + 1].t : inner.domain_end();
    const double len = tb - ta;
    const double s = ik[i].slope;
    const double xa = clamp(ik[i].value);
    const double xb = clamp(ik[i].value + s * len);
    if (len <= 0 || s == 0.0 || std::fabs(xb - xa) <= snap_tol(xa) * 1e-3) {
      const std::size_t idx = upper_segment(xa);
      out.push_back({ta, outer_at(idx, xa), ok[idx].slope * s});
      continue;
    }
    if (s > 0) {
      std::size_t idx = upper_segment(xa);
      out.push_back({ta, outer_at(idx, xa), ok[idx].slope * s});
      for (std::size_t j = idx + 1; j < ok.size() && ok[j].t < xb; ++j) {
        const double tau = ta + (ok[j].t - ik[i].value) / s;
        out.push_back({std::clamp(tau, ta, tb), ok[j].value, ok[j].slope * s});
      }
    } else {
      // Decreasing inner piece; the outer path is continuous here.
      auto it = std::lower_bound(ok.begin(), ok.end(), xa,
                                 [](const Knot& kn, double v) { return kn.t < v; });
      std::size_t idx =
          it == ok.begin() ? std::size_t{0} : static_cast<std::size_t>(it - ok.begin()) - 1;
      out.push_back({ta, value_at(ok[idx], xa), ok[idx].slope * s});
      while (idx > 0 && ok[idx].t > xb) {
        const double tau = ta + (ok[idx].t - ik[i].value) / s;
        const double v = value_at(ok[idx - 1], ok[idx].t);
        --idx;
        out.push_back({std::clamp(tau, ta, tb), v, ok[idx].slope * s});
      }
    }
  }
  return PiecewisePath(std::move(out), inner.domain_end());
}

double stieltjes(const PiecewisePath& w, const MonotonePath& ym) {
  const PiecewisePath& y = ym.path();
  const Common c = common_domain(w, y, "stieltjes");
  double total = 0.0;
  bool first = true;
  double y_prev_end = 0.0;
  merge_walk(w, y, c.lo, c.hi, [&](double ta, double tb, double wv, double ws, double yv, double ys) {
    if (!first) total += wv * (yv - y_prev_end);
    first = false;
    const double len = tb - ta;
    total += ys * (wv * len + 0.5 * ws * len * len);
    y_prev_end = yv + ys * len;
  });
  return total;
}

PiecewisePath shift_theta(const PiecewisePath& p, double c) {
  require_nonempty(p, "shift_theta");
  if (!std::isfinite(c)) throw DomainError("shift_theta: non-finite shift");
  std::vector<Knot> k(p.knots().begin(), p.knots().end());
  for (Knot& kn : k) kn.t -= c;
  return PiecewisePath(std::move(k), p.domain_end() - c);
}

PiecewisePath shift_xi(const PiecewisePath& p, double c) {
  require_nonempty(p, "shift_xi");
  if (!std::isfinite(c) || c < p.domain_start() - slack(c) || c > p.domain_end() + slack(c)) {
    throw DomainError("shift_xi: shift outside the domain");
  }
  return offset(shift_theta(p, c), -p.eval(c));
}

double wnorm(const PiecewisePath& p) {
  require_nonempty(p, "wnorm");
  auto k = p.knots();
  double m = 0.0;
  auto ratio = [](double v, double t) { return std::fabs(v) / (1.0 + std::fabs(t)); };
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double ta = k[i].t;
    const double tb = i + 1 < k.size() ? k[i + 1].t : p.domain_end();
    m = std::max(m, ratio(k[i].value, ta));
    m = std::max(m, ratio(value_at(k[i], tb), tb));
    if (ta < 0.0 && tb > 0.0) m = std::max(m, ratio(value_at(k[i], 0.0), 0.0));
  }
  return m;
}

PiecewisePath add(const PiecewisePath& p, const PiecewisePath& q) {
  const Common c = same_domain(p, q, "add");
  std::vector<Knot> out;
  out.reserve(p.size() + q.size());
  merge_walk(p, q, c.lo, c.hi, [&](double ta, double, double pv, double ps, double qv, double qs) {
    out.push_back({ta, pv + qv, ps + qs});
  });
  return PiecewisePath(std::move(out), c.hi);
}

PiecewisePath subtract(const PiecewisePath& p, const PiecewisePath& q) {
  const Common c = same_domain(p, q, "subtract");
  std::vector<Knot> out;
  out.reserve(p.size() + q.size());
  merge_walk(p, q, c.lo, c.hi, [&](double ta, double, double pv, double ps, double qv, double qs) {
    out.push_back({ta, pv - qv, ps - qs});
  });
  return PiecewisePath(std::move(out), c.hi);
}

PiecewisePath scale(const PiecewisePath& p, double xi) {
  require_nonempty(p, "scale");
  std::vector<Knot> k(p.knots().begin(), p.knots().end());
  for (Knot& kn : k) {
    kn.value *= xi;
    kn.slope *= xi;
  }
  return PiecewisePath(std::move(k), p.domain_end());
}

PiecewisePath offset(const PiecewisePath& p, double c) {
  require_nonempty(p, "offset");
  std::vector<Knot> k(p.knots().begin(), p.knots().end());
  for (Knot& kn : k) kn.value += c;
  return PiecewisePath(std::move(k), p.domain_end());
}

namespace {

PiecewisePath pointwise_extreme(const PiecewisePath& p, const PiecewisePath& q, bool take_max) {
  const Common c = same_domain(p, q, take_max ? "pointwise_max" : "pointwise_min");
  std::vector<Knot> out;
  out.reserve(p.size() + q.size());
  auto pick = [&](double pv, double ps, double qv, double qs) {
    const bool p_wins = take_max ? (pv > qv || (pv == qv && ps >= qs))
                                 : (pv < qv || (pv == qv && ps <= qs));
    return p_wins ? std::pair{pv, ps} : std::pair{qv, qs};
  };
  merge_walk(p, q, c.lo, c.hi, [&](double ta, double tb, double pv, double ps, double qv, double qs) {
    auto [v, s] = pick(pv, ps, qv, qs);
    out.push_back({ta, v, s});
    const double d0 = pv - qv;
    const double ds = ps - qs;
    if (tb > ta && ds != 0.0) {
      // the winner changes inside the segment iff the difference changes sign
      const double d1 = d0 + ds * (tb - ta);
      const bool p_first = v == pv && s == ps;
      const bool p_last = take_max ? d1 > 0.0 : d1 < 0.0;
      if (d1 != 0.0 && p_first != p_last) {
        const double cross = ta - d0 / ds;
        const double s_after = p_last ? ps : qs;
        if (cross <= ta) {
          // crossing lost to rounding at ta
          out.back() = {ta, p_last ? pv : qv, s_after};
        } else if (cross < tb) {
          out.push_back({cross, pv + ps * (cross - ta), s_after});
        }
      }
    }
  });
  return PiecewisePath(std::move(out), c.hi);
}

}  // namespace

PiecewisePath pointwise_max(const PiecewisePath& p, const PiecewisePath& q) {
  return pointwise_extreme(p, q, true);
}

PiecewisePath pointwise_min(const PiecewisePath& p, const PiecewisePath& q) {
  return pointwise_extreme(p, q, false);
}

PiecewisePath restrict(const PiecewisePath& p, double a, double b) {
  require_nonempty(p, "restrict");
  if (a > b || a < p.domain_start() - slack(a) || b > p.domain_end() + slack(b)) {
    throw DomainError("restrict: [" + std::to_string(a) + ", " + std::to_string(b) +
                      "] not inside the domain");
  }
  a = std::max(a, p.domain_start());
  b = std::min(b, p.domain_end());
  auto k = p.knots();
  std::size_t i = p.segment_index(a);
  std::vector<Knot> out;
  out.push_back({a, value_at(k[i], a), k[i].slope});
  for (++i; i < k.size() && k[i].t <= b; ++i) out.push_back(k[i]);
  return PiecewisePath(std::move(out), b);
}

PiecewisePath sum(std::span<const PiecewisePath> paths, double t0, double t1) {
  PiecewisePath acc = PiecewisePath::constant(0.0, t0, t1);
  for (const PiecewisePath& p : paths) acc = add(acc, p);
  return acc;
}

void for_each_merged_segment(const PiecewisePath& p, const PiecewisePath& q,
                             const std::function<void(const MergedSegment&)>& f) {
  const Common c = common_domain(p, q, "for_each_merged_segment");
  merge_walk(p, q, c.lo, c.hi, [&](double ta, double tb, double pv, double ps, double qv, double qs) {
    f(MergedSegment{ta, tb, pv, ps, qv, qs});
  });
}

namespace {

// Forward-only evaluation for increasing query times.
struct Cursor {
  std::span<const Knot> k;
  std::size_t at = 0;    // last knot with t <= query
  std::size_t left = 0;  // last knot with t < query
  double eval(double t) {
    while (at + 1 < k.size() && k[at + 1].t <= t) ++at;
    return value_at(k[at], t);
  }
  double left_limit(double t) {
    while (left + 1 < k.size() && k[left + 1].t < t) ++left;
    return value_at(k[left], t);
  }
};

}  // namespace

double sup_distance(const PiecewisePath& p, const PiecewisePath& q) {
  const Common c = common_domain(p, q, "sup_distance");
  auto inner = [&](const PiecewisePath& x) {
    std::vector<double> t;
    t.reserve(x.size() + 1);
    t.push_back(c.lo);
    for (const Knot& k : x.knots()) {
      if (k.t > c.lo && k.t < c.hi) t.push_back(k.t);
    }
    return t;
  };
  const std::vector<double> tp = inner(p), tq = inner(q);
  std::vector<double> times(tp.size() + tq.size() + 1);
  std::merge(tp.begin(), tp.end(), tq.begin(), tq.end(), times.begin());
  times.back() = c.hi;
  Cursor cp{p.knots()}, cq{q.knots()};
  double d = 0.0;
  std::size_t i = 0;
  while (i < times.size()) {
    const double a = times[i];
    std::size_t j = i;
    while (j + 1 < times.size() && times[j + 1] - a <= kTimeTol) ++j;
    const double b = times[j];
    if (a > c.lo) d = std::max(d, std::fabs(cp.left_limit(a) - cq.left_limit(a)));
    d = std::max(d, std::fabs(cp.eval(b) - cq.eval(b)));
    i = j + 1;
  }
  return d;
}

double sup_abs(const PiecewisePath& p) {
  require_nonempty(p, "sup_abs");
  return std::max(std::fabs(min_value(p)), std::fabs(max_value(p)));
}

double min_value(const PiecewisePath& p) {
  require_nonempty(p, "min_value");
  auto k = p.knots();
  double m = kInf;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double tb = i + 1 < k.size() ? k[i + 1].t : p.domain_end();
    m = std::min({m, k[i].value, value_at(k[i], tb)});
  }
  return m;
}

double max_value(const PiecewisePath& p) {
  require_nonempty(p, "max_value");
  auto k = p.knots();
  double m = -kInf;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double tb = i + 1 < k.size() ? k[i + 1].t : p.domain_end();
    m = std::max({m, k[i].value, value_at(k[i], tb)});
  }
  return m;
}

}  // namespace qnet
