#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qnet {

// Breakpoints closer than this are treated as one.
inline constexpr double kTimeTol = 1e-12;

struct Knot {
  double t;
  double value;  // right value at t
  double slope;  // valid until the next knot
  friend bool operator==(const Knot&, const Knot&) = default;
};

// Right-continuous piecewise-linear path with finitely many jumps on a closed
// interval [domain_start, domain_end]. The first knot sits at domain_start.
// A knot placed exactly at domain_end carries a terminal jump.
class PiecewisePath {
 public:
  PiecewisePath() = default;
  PiecewisePath(std::vector<Knot> knots, double domain_end);

  static PiecewisePath constant(double value, double t0, double t1);
  static PiecewisePath linear(double slope, double t0, double t1, double value_at_t0 = 0.0);
  static PiecewisePath identity(double t0, double t1);
  // Continuous path through (times[i], values[i]).
  static PiecewisePath interpolate(std::span<const double> times, std::span<const double> values);
  // Step path: value values[i] on [times[i], times[i+1]). times[0] is the domain start.
  static PiecewisePath steps(std::span<const double> times, std::span<const double> values,
                             double domain_end);

  bool empty() const { return knots_.empty(); }
  double domain_start() const;
  double domain_end() const { return end_; }
  std::span<const Knot> knots() const { return knots_; }
  std::size_t size() const { return knots_.size(); }

  double operator()(double t) const { return eval(t); }
  double eval(double t) const;
  // Limit from the left; equals eval at domain_start.
  double left_limit(double t) const;
  double start_value() const;
  // Left limit at domain_end.
  double end_value() const;

  // Index of the segment containing t (last knot with knot.t <= t).
  std::size_t segment_index(double t) const;

  double max_abs_jump() const;
  double min_slope() const;
  double min_jump() const;
  bool is_continuous(double tol = 1e-12) const;
  bool is_nondecreasing(double tol = 1e-12) const;

  friend bool operator==(const PiecewisePath&, const PiecewisePath&) = default;

 private:
  std::vector<Knot> knots_;
  double end_ = 0.0;
};

// Merges knots closer than kTimeTol (the later knot wins) and removes knots
// that continue the previous segment.
void canonicalize(std::vector<Knot>& knots, double domain_end);

// Nondecreasing path. Construction validates.
class MonotonePath {
 public:
  MonotonePath() = default;
  explicit MonotonePath(PiecewisePath p, double tol = 1e-9);
  const PiecewisePath& path() const { return p_; }
  operator const PiecewisePath&() const { return p_; }
  double operator()(double t) const { return p_.eval(t); }

 private:
  PiecewisePath p_;
};

// Continuous nondecreasing path with positive total increase.
class InvertiblePath {
 public:
  InvertiblePath() = default;
  explicit InvertiblePath(PiecewisePath p, double tol = 1e-9);
  const PiecewisePath& path() const { return p_; }
  operator const PiecewisePath&() const { return p_; }
  double operator()(double t) const { return p_.eval(t); }

 private:
  PiecewisePath p_;
};

MonotonePath running_sup(const PiecewisePath& p);
PiecewisePath running_inf(const PiecewisePath& p);

// c^{-1}(u) = sup{t : c(t) <= u}.
MonotonePath rc_inverse(const InvertiblePath& c);

// outer o inner. Needs outer continuous or inner nondecreasing; the range of
// inner must lie in the domain of outer.
PiecewisePath compose(const PiecewisePath& outer, const PiecewisePath& inner);

// Integral of w against the measure of y on the common domain. Atoms use the
// right value of w.
double stieltjes(const PiecewisePath& w, const MonotonePath& y);

// (Theta_c p)(t) = p(t + c)
PiecewisePath shift_theta(const PiecewisePath& p, double c);
// Theta_c p - p(c); c must lie in the domain.
PiecewisePath shift_xi(const PiecewisePath& p, double c);

// sup |p(t)| / (1 + |t|)
double wnorm(const PiecewisePath& p);

PiecewisePath add(const PiecewisePath& p, const PiecewisePath& q);
PiecewisePath subtract(const PiecewisePath& p, const PiecewisePath& q);
PiecewisePath scale(const PiecewisePath& p, double xi);
PiecewisePath offset(const PiecewisePath& p, double c);
PiecewisePath pointwise_max(const PiecewisePath& p, const PiecewisePath& q);
PiecewisePath pointwise_min(const PiecewisePath& p, const PiecewisePath& q);
// Restriction to [a, b].
PiecewisePath restrict(const PiecewisePath& p, double a, double b);
// Sum of paths sharing the domain [t0, t1]; the zero path if the list is empty.
PiecewisePath sum(std::span<const PiecewisePath> paths, double t0, double t1);

struct MergedSegment {
  double ta;
  double tb;
  double p_value;  // right value of p at ta
  double p_slope;
  double q_value;
  double q_slope;
};

// Visits the segments of the merged breakpoint grid of p and q on their common
// domain, in time order. A knot at the domain end yields a zero-length segment.
void for_each_merged_segment(const PiecewisePath& p, const PiecewisePath& q,
                             const std::function<void(const MergedSegment&)>& f);

// sup |p - q| over the common domain. Jumps whose times differ by less than
// kTimeTol are treated as simultaneous.
double sup_distance(const PiecewisePath& p, const PiecewisePath& q);
double sup_abs(const PiecewisePath& p);
double min_value(const PiecewisePath& p);
double max_value(const PiecewisePath& p);

inline PiecewisePath operator+(const PiecewisePath& p, const PiecewisePath& q) { return add(p, q); }
inline PiecewisePath operator-(const PiecewisePath& p, const PiecewisePath& q) {
  return subtract(p, q);
}
inline PiecewisePath operator-(const PiecewisePath& p) { return scale(p, -1.0); }
inline PiecewisePath operator*(double xi, const PiecewisePath& p) { return scale(p, xi); }

}  // namespace qnet
