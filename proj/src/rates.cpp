#include "qnet/rates.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

double jump_scale(const PiecewisePath& x) { return 1e-12 * std::max(1.0, sup_abs(x)); }

bool starts_off_zero(const PiecewisePath& x) {
  const double v = x.domain_start() <= 0.0 && 0.0 <= x.domain_end() ? x.eval(0.0) : x.start_value();
  return std::abs(v) > jump_scale(x);
}

// x / 0 convention for nonnegative x.
double ratio(double x, double d) {
  if (d > 0.0) return x / d;
  return x == 0.0 ? 0.0 : kInf;
}

double slope_at(const PiecewisePath& p, double t) { return p.knots()[p.segment_index(t)].slope; }

struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double cutoff = 0.0;
};

Spectrum psd_spectrum(const Eigen::MatrixXd& V, const char* who) {
  if (V.rows() != V.cols() || V.rows() == 0) throw ConfigError(std::string(who) + ": V must be square");
  if ((V - V.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, V.cwiseAbs().maxCoeff())) {
    throw ConfigError(std::string(who) + ": V is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (V + V.transpose()));
  Spectrum sp{es.eigenvalues(), es.eigenvectors(), 0.0};
  const double trace = std::max(0.0, V.trace());
  if (sp.values.minCoeff() < -1e-10 * std::max(trace, 1e-300)) {
    throw ConfigError(std::string(who) + ": V is not positive semidefinite");
  }
  sp.cutoff = 1e-12 * std::max(sp.values.maxCoeff(), 0.0);
  return sp;
}

}  // namespace

double i_brown(const PiecewisePath& x) {
  if (x.empty()) return 0.0;
  if (x.max_abs_jump() > jump_scale(x) || starts_off_zero(x)) return kInf;
  double s = 0.0;
  const auto k = x.knots();
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double tb = i + 1 < k.size() ? k[i + 1].t : x.domain_end();
    s += k[i].slope * k[i].slope * (tb - k[i].t);
  }
  return 0.5 * s;
}

CovarianceData build_covariance(const NetworkSpec& spec, const CriticalData& cd, const std::vector<double>& u2,
                                const std::vector<std::vector<double>>& v2) {
  const int n = cd.num_nodes;
  const int M = cd.num_classes;
  if (static_cast<int>(u2.size()) != M) throw ConfigError("build_covariance: u2 needs one entry per class");
  if (static_cast<int>(v2.size()) != n) throw ConfigError("build_covariance: v2 needs one row per node");
  CovarianceData cov;
  cov.u2 = u2;
  cov.v2.assign(n, std::vector<double>(M, 0.0));
  for (int j = 0; j < M; ++j) {
    if (!(u2[j] >= 0.0)) throw ConfigError("build_covariance: negative variance for class " + std::to_string(j));
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(v2[i].size()) != M) {
      throw ConfigError("node " + std::to_string(i + 1) + ": v2 needs one entry per class");
    }
    for (int j = 0; j < M; ++j) {
      if (!spec.nodes[i].visits(j)) continue;
      if (!(v2[i][j] >= 0.0)) {
        throw ConfigError("node " + std::to_string(i + 1) + ": negative service variance for class " +
                          std::to_string(j));
      }
      cov.v2[i][j] = v2[i][j];
    }
  }
  cov.U = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < n; ++h) {
      double s = 0.0;
      for (int j = 0; j < M; ++j) {
        if (!spec.nodes[i].visits(j) || !spec.nodes[h].visits(j)) continue;
        const double a = cd.alpha[j];
        s += u2[j] / (a * a * a * cd.sigma[i][j] * cd.sigma[h][j]);
        if (i == h) s += cov.v2[i][j] * a / std::pow(cd.sigma[i][j], 6);
      }
      cov.U(i, h) = s;
    }
  }
  cov.V = cd.R * cov.U * cd.R.transpose();
  cov.V = 0.5 * (cov.V + cov.V.transpose());
  psd_spectrum(cov.U, "build_covariance (U)");
  psd_spectrum(cov.V, "build_covariance (V)");
  return cov;
}

double i_renewal(const std::vector<PiecewisePath>& a, const std::vector<std::vector<std::optional<PiecewisePath>>>& s,
                 const NetworkSpec& spec, const CriticalData& cd, const CovarianceData& cov) {
  if (static_cast<int>(a.size()) != cd.num_classes) throw ConfigError("i_renewal: one arrival path per class");
  if (static_cast<int>(s.size()) != cd.num_nodes) throw ConfigError("i_renewal: one service row per node");
  double total = 0.0;
  for (int j = 0; j < cd.num_classes; ++j) {
    const double a3 = std::pow(cd.alpha[j], 3);
    total += ratio(a3 * i_brown(a[j]), cov.u2[j]);
    if (total == kInf) return kInf;
  }
  for (int i = 0; i < cd.num_nodes; ++i) {
    for (int j = 0; j < cd.num_classes; ++j) {
      if (!spec.nodes[i].visits(j)) continue;
      if (static_cast<std::size_t>(j) >= s[i].size() || !s[i][j]) {
        throw ConfigError("node " + std::to_string(i + 1) + ": missing service path for class " +
                          std::to_string(j));
      }
      const double s3 = std::pow(cd.sigma[i][j], 3);
      total += ratio(s3 * i_brown(*s[i][j]), cov.v2[i][j]);
      if (total == kInf) return kInf;
    }
  }
  return total;
}

double i_v_brown(const std::vector<PiecewisePath>& x, const Eigen::MatrixXd& V) {
  const long n = static_cast<long>(x.size());
  if (V.rows() != n) throw ConfigError("i_v_brown: V does not match the number of components");
  const Spectrum sp = psd_spectrum(V, "i_v_brown");
  std::vector<double> times;
  double t0 = 0.0, t1 = 0.0;
  for (long i = 0; i < n; ++i) {
    const PiecewisePath& p = x[i];
    if (p.empty()) throw DomainError("i_v_brown: empty component");
    if (i == 0) {
      t0 = p.domain_start();
      t1 = p.domain_end();
    } else if (std::abs(p.domain_start() - t0) > kTimeTol || std::abs(p.domain_end() - t1) > kTimeTol) {
      throw DomainError("i_v_brown: components on different domains");
    }
    if (p.max_abs_jump() > jump_scale(p) || starts_off_zero(p)) return kInf;
    for (const Knot& k : p.knots()) times.push_back(k.t);
  }
  times.push_back(t1);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return b - a <= kTimeTol; }),
              times.end());
  double total = 0.0;
  Eigen::VectorXd d(n);
  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    const double len = times[s + 1] - times[s];
    if (len <= 0.0) continue;
    const double mid = 0.5 * (times[s] + times[s + 1]);
    for (long i = 0; i < n; ++i) d(i) = slope_at(x[i], mid);
    const Eigen::VectorXd c = sp.vectors.transpose() * d;
    const double dn = std::max(d.norm(), 1.0);
    double q = 0.0;
    for (long k = 0; k < n; ++k) {
      if (sp.values(k) > sp.cutoff) {
        q += c(k) * c(k) / sp.values(k);
      } else if (std::abs(c(k)) > 1e-10 * dn) {
        return kInf;
      }
    }
    total += 0.5 * q * len;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Variational solver

void VariationalProblem::validate() const {
  const long n = zeta.size();
  if (n == 0) throw ConfigError("variational problem: zeta is empty");
  if (V.rows() != n || V.cols() != n) throw ConfigError("variational problem: V has the wrong size");
  if (R.size() != 0 && (R.rows() != n || R.cols() != n)) throw ConfigError("variational problem: R has the wrong size");
  if (node < 0 || node >= n) throw ConfigError("variational problem: node out of range");
  if (!(level >= 0.0)) throw ConfigError("variational problem: level must be nonnegative");
  if (cells < 2) throw ConfigError("variational problem: need at least 2 grid cells");
  if (horizon < 0.0) throw ConfigError("variational problem: horizon must be positive");
  if (random_starts < 0) throw ConfigError("variational problem: negative start count");
}

namespace {

// Grid model of Phi(z - zeta id) with z linear on m cells, z slopes B * eta_c.
// Suprema are taken over grid points; exact for one node, an approximation
// for later nodes in a network.
class GridModel {
 public:
  GridModel(const Eigen::MatrixXd& B, const Eigen::MatrixXd& Rinv, const Eigen::VectorXd& zeta, int target,
            double T, int m)
      : n_(target + 1), r_(B.cols()), m_(m), dt_(T / m), target_(target) {
    M_ = (Rinv * B).topRows(n_);
    G_ = (Rinv - Eigen::MatrixXd::Identity(Rinv.rows(), Rinv.cols())).topLeftCorner(n_, n_);
    rho_ = (Rinv * zeta).head(n_);
    P_ = static_cast<long>(m_) * r_;
  }

  long params() const { return P_; }

  // Value of w_target(T); fills grad when non-null.
  double eval(const Eigen::VectorXd& eta, Eigen::VectorXd* grad) const {
    const long K = m_ + 1;
    // w[h](k) and dw[h] (P x K, column k)
    std::vector<Eigen::VectorXd> w(n_, Eigen::VectorXd::Zero(K));
    std::vector<Eigen::MatrixXd> dw;
    if (grad) dw.assign(n_, Eigen::MatrixXd::Zero(P_, K));
    Eigen::VectorXd v(K);
    Eigen::MatrixXd dv;
    if (grad) dv.resize(P_, K);
    for (long i = 0; i < n_; ++i) {
      // x_i(k) = dt * sum_{c<k} M_i . eta_c - rho_i t_k
      double acc = 0.0;
      v(0) = 0.0;
      if (grad) dv.col(0).setZero();
      for (long k = 1; k < K; ++k) {
        const long c = k - 1;
        acc += dt_ * M_.row(i).dot(eta.segment(c * r_, r_));
        v(k) = acc - rho_(i) * dt_ * k;
        if (grad) {
          dv.col(k) = dv.col(k - 1);
          dv.col(k).segment(c * r_, r_) += dt_ * M_.row(i).transpose();
        }
      }
      for (long h = 0; h < i; ++h) {
        if (G_(i, h) == 0.0) continue;
        v -= G_(i, h) * w[h];
        if (grad) dv -= G_(i, h) * dw[h];
      }
      // y(k) = max(0, max_{k' <= k} -v(k')), ties keep the earlier index
      double y = 0.0;
      long arg = -1;
      for (long k = 0; k < K; ++k) {
        if (-v(k) > y) {
          y = -v(k);
          arg = k;
        }
        w[i](k) = v(k) + y;
        if (grad) {
          dw[i].col(k) = dv.col(k);
          if (arg >= 0) dw[i].col(k) -= dv.col(arg);
        }
      }
    }
    if (grad) *grad = dw[target_].col(m_);
    return w[target_](m_);
  }

 private:
  long n_, r_;
  int m_;
  double dt_;
  long target_;
  long P_;
  Eigen::MatrixXd M_, G_;
  Eigen::VectorXd rho_;
};

struct StartResult {
  double cost = kInf;
  Eigen::VectorXd eta;
};

struct Setup {
  const VariationalProblem* vp;
  Eigen::MatrixXd B;     // n x r
  Eigen::MatrixXd Binv;  // r x n, pseudo inverse
  Eigen::MatrixXd R;
  Eigen::MatrixXd Rinv;
  double T;
};

std::vector<PiecewisePath> grid_paths(const Setup& su, int m, const Eigen::VectorXd& eta) {
  const long n = su.B.rows();
  const long r = su.B.cols();
  const double dt = su.T / m;
  std::vector<PiecewisePath> z;
  for (long i = 0; i < n; ++i) {
    std::vector<Knot> k;
    double v = 0.0;
    for (int c = 0; c < m; ++c) {
      const double sl = su.B.row(i).dot(eta.segment(c * r, r));
      k.push_back({c * dt, v, sl});
      v += sl * dt;
    }
    z.emplace_back(std::move(k), su.T);
  }
  return z;
}

std::vector<PiecewisePath> reflect_paths(const Setup& su, const std::vector<PiecewisePath>& z) {
  std::vector<PiecewisePath> x;
  for (std::size_t i = 0; i < z.size(); ++i) {
    x.push_back(z[i] - PiecewisePath::linear(su.vp->zeta(static_cast<long>(i)), 0.0, su.T));
  }
  return skorokhod_phi(x, su.R, TimeMode::kHalfLine).w;
}

bool exact_feasible(const Setup& su, int m, const Eigen::VectorXd& eta) {
  const auto w = reflect_paths(su, grid_paths(su, m, eta));
  const double b = su.vp->level;
  return w[su.vp->node].eval(su.T) >= b * (1.0 - 1e-10);
}

double cost_of(const Eigen::VectorXd& eta, double dt) { return 0.5 * dt * eta.squaredNorm(); }

// Active-piece SQP from one start, then exact feasibility restored by scaling.
StartResult solve_from(const Setup& su, const GridModel& gm, int m, Eigen::VectorXd eta) {
  const double b = su.vp->level;
  const double dt = su.T / m;
  Eigen::VectorXd grad;
  // Push the start until it reaches the target at all, so the gradient is informative.
  for (int it = 0; it < 60 && gm.eval(eta, nullptr) < 0.5 * b; ++it) eta *= 2.0;
  StartResult best;
  Eigen::VectorXd candidate = eta;
  double candidate_cost = kInf;
  for (int it = 0; it < 60; ++it) {
    const double g = gm.eval(eta, &grad);
    if (g >= b * (1.0 - 1e-12) && cost_of(eta, dt) < candidate_cost) {
      candidate = eta;
      candidate_cost = cost_of(eta, dt);
    }
    const double gg = grad.squaredNorm();
    if (!(gg > 0.0)) break;
    const double d = g - grad.dot(eta);
    if (b - d <= 0.0) break;
    Eigen::VectorXd next = grad * ((b - d) / gg);
    const double change = (next - eta).norm();
    eta = std::move(next);
    if (change <= 1e-13 * std::max(1.0, eta.norm())) {
      const double g2 = gm.eval(eta, nullptr);
      if (g2 >= b * (1.0 - 1e-12) && cost_of(eta, dt) < candidate_cost) {
        candidate = eta;
        candidate_cost = cost_of(eta, dt);
      }
      break;
    }
  }
  if (candidate_cost == kInf) candidate = eta;
  if (!(candidate.squaredNorm() > 0.0)) return best;
  // Smallest feasible multiple of the candidate under the exact map.
  double hi = 1.0;
  int doublings = 0;
  while (!exact_feasible(su, m, hi * candidate)) {
    if (++doublings > 40) return best;
    hi *= 2.0;
  }
  // The zero path is infeasible for a positive level; only hi is ever reported.
  double lo = doublings > 0 ? hi / 2.0 : 0.0;
  for (int it = 0; it < 60 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (exact_feasible(su, m, mid * candidate) ? hi : lo) = mid;
  }
  best.eta = hi * candidate;
  best.cost = cost_of(best.eta, dt);
  return best;
}

std::vector<Eigen::VectorXd> make_starts(const Setup& su, int m, std::mt19937_64& rng) {
  const VariationalProblem& vp = *su.vp;
  const long n = su.B.rows();
  const long r = su.B.cols();
  std::vector<Eigen::VectorXd> dirs;
  for (long i = 0; i < n; ++i) dirs.push_back(vp.V.col(i));
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(vp.node) = 1.0;
  dirs.push_back(e);
  dirs.push_back(su.R * e);
  std::vector<Eigen::VectorXd> starts;
  const double dt = su.T / m;
  for (const auto& d : dirs) {
    const Eigen::VectorXd eta_c = su.Binv * d;
    if (!(eta_c.norm() > 1e-12 * std::max(1.0, d.norm()))) continue;
    // ramp over the last j cells
    for (int j = 1; j <= m; ++j) {
      Eigen::VectorXd eta = Eigen::VectorXd::Zero(static_cast<long>(m) * r);
      const double amp = (vp.level + vp.zeta.cwiseAbs().maxCoeff() * j * dt) / (j * dt);
      for (int c = m - j; c < m; ++c) eta.segment(static_cast<long>(c) * r, r) = amp * eta_c / eta_c.norm();
      starts.push_back(std::move(eta));
    }
  }
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int s = 0; s < vp.random_starts; ++s) {
    Eigen::VectorXd eta(static_cast<long>(m) * r);
    for (long p = 0; p < eta.size(); ++p) eta(p) = nd(rng);
    starts.push_back(std::move(eta));
  }
  return starts;
}

StartResult solve_grid(const Setup& su, int m, std::string& diag) {
  const VariationalProblem& vp = *su.vp;
  GridModel gm(su.B, su.Rinv, vp.zeta, vp.node, su.T, m);
  std::mt19937_64 rng(vp.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(m)));
  const std::vector<Eigen::VectorXd> starts = make_starts(su, m, rng);
  std::vector<StartResult> res(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (long s = 0; s < static_cast<long>(starts.size()); ++s) {
    res[s] = solve_from(su, gm, m, starts[s]);
  }
  StartResult best;
  int feasible = 0;
  for (const auto& r : res) {
    if (r.cost < kInf) ++feasible;
    if (r.cost < best.cost) best = r;
  }
  std::ostringstream os;
  os << "grid " << m << ": " << feasible << "/" << starts.size() << " starts feasible";
  if (!diag.empty()) diag += "; ";
  diag += os.str();
  return best;
}

}  // namespace

VariationalResult variational_rate(const VariationalProblem& vp) {
  vp.validate();
  const long n = vp.zeta.size();
  VariationalResult out;
  Setup su;
  su.vp = &vp;
  su.R = vp.R.size() == 0 ? Eigen::MatrixXd::Identity(n, n) : vp.R;
  su.Rinv = su.R.triangularView<Eigen::UnitLower>().solve(Eigen::MatrixXd::Identity(n, n));
  const Spectrum sp = psd_spectrum(vp.V, "variational problem");
  if (vp.horizon > 0.0) {
    su.T = vp.horizon;
  } else {
    double zmin = kInf;
    for (long i = 0; i < n; ++i) {
      if (vp.zeta(i) > 0.0) zmin = std::min(zmin, vp.zeta(i));
    }
    if (zmin == kInf) throw ConfigError("variational problem: no positive drift, give the horizon explicitly");
    const double vbar = std::max(vp.V.diagonal().maxCoeff(), 1.0);
    su.T = 4.0 * std::max(vp.level, 1e-300) * vbar / zmin;
  }
  out.horizon = su.T;
  if (vp.level == 0.0) {
    out.rate = 0.0;
    out.feasible = true;
    out.cells = vp.cells;
    out.rate_per_grid = {0.0};
    for (long i = 0; i < n; ++i) out.z.push_back(PiecewisePath::constant(0.0, 0.0, su.T));
    out.w = reflect_paths(su, out.z);
    out.diagnostics = "level 0 is reached by the zero path";
    return out;
  }
  std::vector<long> keep;
  for (long k = 0; k < n; ++k) {
    if (sp.values(k) > sp.cutoff) keep.push_back(k);
  }
  if (keep.empty()) {
    out.diagnostics = "V has rank 0";
    return out;
  }
  su.B.resize(n, static_cast<long>(keep.size()));
  su.Binv.resize(static_cast<long>(keep.size()), n);
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const double l = sp.values(keep[c]);
    su.B.col(static_cast<long>(c)) = sp.vectors.col(keep[c]) * std::sqrt(l);
    su.Binv.row(static_cast<long>(c)) = sp.vectors.col(keep[c]).transpose() / std::sqrt(l);
  }
  std::vector<int> grids{vp.cells};
  if (vp.refine) grids.push_back(2 * vp.cells);
  for (int m : grids) {
    StartResult r = solve_grid(su, m, out.diagnostics);
    out.rate_per_grid.push_back(r.cost);
    if (r.cost < out.rate) {
      out.rate = r.cost;
      out.cells = m;
      out.z = grid_paths(su, m, r.eta);
    }
  }
  out.feasible = out.rate < kInf;
  if (out.feasible) {
    out.w = reflect_paths(su, out.z);
  } else {
    out.diagnostics += "; level unreachable on the grid";
  }
  return out;
}

double oracle_rate_1d(double zeta, double v, double b) {
  if (!(zeta > 0.0) || !(v > 0.0) || !(b >= 0.0)) throw ConfigError("oracle_rate_1d: need zeta > 0, v > 0, b >= 0");
  if (b == 0.0) return 0.0;
  // Flat at 0 (reflected at 0 under the drift), then slope c for tau: the
  // reflected endpoint is max(0, (c - zeta) tau).
  constexpr int kN = 3000;
  const double c_max = 12.0 * zeta;
  const double tau_max = 12.0 * b / zeta;
  double best = kInf;
  for (int ic = 1; ic <= kN; ++ic) {
    const double c = c_max * ic / kN;
    for (int it = 1; it <= kN; ++it) {
      const double tau = tau_max * it / kN;
      if (std::max(0.0, (c - zeta) * tau) < b) continue;
      best = std::min(best, c * c * tau / (2.0 * v));
      break;  // larger tau only costs more
    }
  }
  return best;
}

}  // namespace qnet
