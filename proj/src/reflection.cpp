#include "qnet/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

std::string where(int i) { return "node " + std::to_string(i + 1) + ": "; }

struct Reflected {
  PiecewisePath w;
  MonotonePath y;
};

// One-dimensional reflection: y = sup(-x) (floored at 0 in half-line mode),
// w = x + y.
Reflected reflect(const PiecewisePath& x, TimeMode mode) {
  PiecewisePath neg = -x;
  if (mode == TimeMode::kHalfLine) {
    neg = pointwise_max(neg, PiecewisePath::constant(0.0, x.domain_start(), x.domain_end()));
  }
  MonotonePath y = running_sup(neg);
  PiecewisePath w = x + y.path();
  return {std::move(w), std::move(y)};
}

void require_domain(const std::vector<PiecewisePath>& z, const char* op) {
  if (z.empty()) throw DomainError(std::string(op) + ": no components");
  for (const auto& p : z) {
    if (p.empty()) throw DomainError(std::string(op) + ": empty component");
    if (std::abs(p.domain_start() - z[0].domain_start()) > kTimeTol ||
        std::abs(p.domain_end() - z[0].domain_end()) > kTimeTol) {
      throw DomainError(std::string(op) + ": components on different domains");
    }
  }
}

// s composed with the linear clock (alpha/sigma) id on [t0, T].
PiecewisePath clocked(const PiecewisePath& s, double rate, double t0, double T) {
  return compose(s, PiecewisePath::linear(rate, t0, T, rate * t0));
}

const PiecewisePath& service_of(const TildeInputs& in, int i, int j) {
  if (static_cast<std::size_t>(i) >= in.s.size() || static_cast<std::size_t>(j) >= in.s[i].size() ||
      !in.s[i][j]) {
    throw ConfigError(where(i) + "missing service path for class " + std::to_string(j));
  }
  return *in.s[i][j];
}

}  // namespace

bool CriticalData::drift_positive() const {
  return std::all_of(rho_tilde.begin(), rho_tilde.end(), [](double r) { return r > 0.0; });
}

CriticalData build_critical(const NetworkSpec& spec, const std::vector<double>& alpha,
                            const std::vector<std::vector<double>>& sigma,
                            const std::vector<double>& alpha_offset,
                            const std::vector<std::vector<double>>& sigma_offset, double tol) {
  spec.validate();
  const int n = spec.size(), M = spec.num_classes;
  if (static_cast<int>(alpha.size()) != M || static_cast<int>(alpha_offset.size()) != M) {
    throw ConfigError("critical data: expected " + std::to_string(M) + " arrival rates and offsets");
  }
  if (static_cast<int>(sigma.size()) != n || static_cast<int>(sigma_offset.size()) != n) {
    throw ConfigError("critical data: expected service rates for " + std::to_string(n) + " nodes");
  }
  CriticalData cd;
  cd.num_nodes = n;
  cd.num_classes = M;
  cd.alpha = alpha;
  cd.alpha_offset = alpha_offset;
  cd.sigma.assign(n, std::vector<double>(M, 0.0));
  cd.sigma_offset.assign(n, std::vector<double>(M, 0.0));
  cd.alpha_low.assign(n, std::vector<double>(M, 0.0));
  cd.e_low.assign(n, std::vector<double>(M, 0.0));
  cd.rho_low.assign(n, 0.0);
  cd.rho_tilde.assign(n, 0.0);
  cd.rho_tilde_high.assign(n, 0.0);
  for (int j = 0; j < M; ++j) {
    if (!(alpha[j] >= 0.0)) throw ConfigError("critical data: negative arrival rate for class " + std::to_string(j));
  }
  for (int i = 0; i < n; ++i) {
    const NodeSpec& ns = spec.nodes[i];
    if (static_cast<int>(sigma[i].size()) != M || static_cast<int>(sigma_offset[i].size()) != M) {
      throw ConfigError(where(i) + "expected " + std::to_string(M) + " service rates and offsets");
    }
    double load = 0.0;
    for (int j = 0; j < M; ++j) {
      if (!ns.visits(j)) continue;
      const double s = sigma[i][j];
      if (!(s > 0.0)) throw ConfigError(where(i) + "service rate of class " + std::to_string(j) + " must be positive");
      cd.sigma[i][j] = s;
      cd.sigma_offset[i][j] = sigma_offset[i][j];
      load += alpha[j] / s;
      const double r = sigma_offset[i][j] / s * alpha[j] / s - alpha_offset[j] / s;
      cd.rho_tilde[i] += r;
      if (ns.is_high(j)) cd.rho_tilde_high[i] += r;
      if (ns.is_low(j)) {
        cd.rho_low[i] += alpha[j] / s;
        cd.e_low[i][j] = 1.0;
      }
    }
    if (!(cd.rho_low[i] > 0.0)) throw ConfigError(where(i) + "low priority load must be positive");
    if (std::abs(load - 1.0) > tol) {
      throw ConfigError(where(i) + "not critically loaded (load " + std::to_string(load) + ")");
    }
    for (int j : ns.low) cd.alpha_low[i][j] = alpha[j] / cd.rho_low[i];
  }
  cd.G = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < i; ++h) {
      double g = 0.0;
      for (int j = 0; j < M; ++j) {
        if (spec.nodes[i].visits(j)) g += cd.alpha_low[h][j] / cd.sigma[i][j];
      }
      cd.G(i, h) = g;
    }
  }
  // Forward substitution for R = (I + G)^{-1}, unit lower triangular.
  cd.R = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) {
      double v = 0.0;
      for (int h = k; h < i; ++h) v -= cd.G(i, h) * cd.R(h, k);
      cd.R(i, k) = v;
    }
  }
  const Eigen::MatrixXd check = (Eigen::MatrixXd::Identity(n, n) + cd.G) * cd.R;
  if ((check - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("critical data: (I+G) R differs from I");
  }
  Eigen::VectorXd rt(n);
  for (int i = 0; i < n; ++i) rt(i) = cd.rho_tilde[i];
  cd.zeta = cd.R * rt;
  return cd;
}

std::vector<PiecewisePath> x_tilde(const TildeInputs& in, const NetworkSpec& spec, const CriticalData& cd) {
  require_domain(in.a, "x_tilde");
  const double t0 = in.a[0].domain_start(), T = in.a[0].domain_end();
  std::vector<PiecewisePath> X;
  for (int i = 0; i < spec.size(); ++i) {
    std::vector<PiecewisePath> parts;
    for (int j = 0; j < spec.num_classes; ++j) {
      if (!spec.nodes[i].visits(j)) continue;
      const double sg = cd.sigma[i][j];
      try {
        parts.push_back(scale(in.a[j], 1.0 / sg));
        parts.push_back(scale(clocked(service_of(in, i, j), cd.alpha[j] / sg, t0, T), -1.0 / sg));
      } catch (const DomainError& e) {
        throw DomainError(where(i) + e.what());
      }
    }
    X.push_back(sum(parts, t0, T));
  }
  return X;
}

std::vector<PiecewisePath> u_tilde(const TildeInputs& in, const NetworkSpec& spec, const CriticalData& cd,
                                   const std::vector<PiecewisePath>& W) {
  require_domain(in.a, "u_tilde");
  const double t0 = in.a[0].domain_start(), T = in.a[0].domain_end();
  std::vector<PiecewisePath> U;
  for (int i = 0; i < spec.size(); ++i) {
    std::vector<PiecewisePath> parts;
    for (int j : spec.nodes[i].high) {
      const double sg = cd.sigma[i][j];
      parts.push_back(scale(clocked(service_of(in, i, j), cd.alpha[j] / sg, t0, T), 1.0 / sg));
      parts.push_back(scale(in.a[j], -1.0 / sg));
      for (int h = 0; h < i; ++h) {
        if (cd.alpha_low[h][j] != 0.0) parts.push_back(scale(W[h], cd.alpha_low[h][j] / sg));
      }
    }
    U.push_back(sum(parts, t0, T));
  }
  return U;
}

TildeOutput w_tilde(const TildeInputs& in, const NetworkSpec& spec, const CriticalData& cd, TimeMode mode) {
  TildeOutput out;
  out.X = x_tilde(in, spec, cd);
  const int n = spec.size();
  for (int i = 0; i < n; ++i) {
    PiecewisePath x = out.X[i];
    for (int h = 0; h < i; ++h) {
      if (cd.G(i, h) != 0.0) x = x - scale(out.W[h], cd.G(i, h));
    }
    Reflected r = reflect(x, mode);
    out.W.push_back(std::move(r.w));
    out.Y.push_back(std::move(r.y));
  }
  out.U = u_tilde(in, spec, cd, out.W);
  return out;
}

std::vector<PiecewisePath> apply_matrix(const Eigen::MatrixXd& M, const std::vector<PiecewisePath>& z) {
  require_domain(z, "apply_matrix");
  const double t0 = z[0].domain_start(), T = z[0].domain_end();
  if (M.cols() != static_cast<long>(z.size())) throw DomainError("apply_matrix: size mismatch");
  std::vector<PiecewisePath> out;
  for (long i = 0; i < M.rows(); ++i) {
    std::vector<PiecewisePath> parts;
    for (long h = 0; h < M.cols(); ++h) {
      if (M(i, h) != 0.0) parts.push_back(scale(z[h], M(i, h)));
    }
    out.push_back(sum(parts, t0, T));
  }
  return out;
}

SkorokhodSolution skorokhod_phi(const std::vector<PiecewisePath>& z, const Eigen::MatrixXd& R, TimeMode mode) {
  require_domain(z, "skorokhod_phi");
  const long n = static_cast<long>(z.size());
  if (R.rows() != n || R.cols() != n) throw UnsupportedMatrixError("skorokhod_phi: R has the wrong size");
  for (long i = 0; i < n; ++i) {
    if (std::abs(R(i, i) - 1.0) > 1e-12) throw UnsupportedMatrixError("skorokhod_phi: R must have unit diagonal");
    for (long h = i + 1; h < n; ++h) {
      if (R(i, h) != 0.0) throw UnsupportedMatrixError("skorokhod_phi: R must be lower triangular");
    }
  }
  // I + G = R^{-1}, also unit lower triangular.
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::UnitLower>().solve(Eigen::MatrixXd::Identity(n, n));
  const std::vector<PiecewisePath> x = apply_matrix(Rinv, z);
  SkorokhodSolution sol;
  for (long i = 0; i < n; ++i) {
    PiecewisePath xi = x[i];
    for (long h = 0; h < i; ++h) {
      if (Rinv(i, h) != 0.0) xi = xi - scale(sol.w[h], Rinv(i, h));
    }
    Reflected r = reflect(xi, mode);
    sol.w.push_back(std::move(r.w));
    sol.y.push_back(std::move(r.y));
  }
  return sol;
}

FixedPointResult skorokhod_fixed_point(const std::vector<PiecewisePath>& z, const Eigen::MatrixXd& R,
                                       TimeMode mode, int max_passes) {
  require_domain(z, "skorokhod_fixed_point");
  const long n = static_cast<long>(z.size());
  if (max_passes < 0) max_passes = static_cast<int>(2 * n);
  const double t0 = z[0].domain_start(), T = z[0].domain_end();
  for (long i = 0; i < n; ++i) {
    if (std::abs(R(i, i) - 1.0) > 1e-12) throw UnsupportedMatrixError("fixed point: R must have unit diagonal");
  }
  std::vector<PiecewisePath> y(n, PiecewisePath::constant(0.0, t0, T));
  FixedPointResult res;
  for (int pass = 0; pass < max_passes; ++pass) {
    std::vector<PiecewisePath> next;
    double change = 0.0;
    for (long i = 0; i < n; ++i) {
      PiecewisePath xi = z[i];
      for (long h = 0; h < n; ++h) {
        if (h != i && R(i, h) != 0.0) xi = xi + scale(y[h], R(i, h));
      }
      next.push_back(reflect(xi, mode).y.path());
      change = std::max(change, sup_distance(next.back(), y[i]));
    }
    y = std::move(next);
    res.passes = pass + 1;
    res.last_change = change;
    if (change == 0.0 && pass > 0) break;
  }
  const std::vector<PiecewisePath> Ry = apply_matrix(R, y);
  for (long i = 0; i < n; ++i) {
    res.sol.w.push_back(z[i] + Ry[i]);
    res.sol.y.emplace_back(y[i]);
  }
  return res;
}

SkorokhodReport verify_skorokhod(const SkorokhodSolution& sol, const std::vector<PiecewisePath>& z,
                                 const Eigen::MatrixXd& R, double tol, TimeMode mode) {
  SkorokhodReport rep;
  const std::size_t n = z.size();
  std::vector<PiecewisePath> y;
  for (const auto& m : sol.y) y.push_back(m.path());
  const std::vector<PiecewisePath> Ry = apply_matrix(R, y);
  rep.min_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.min_w = std::min(rep.min_w, min_value(sol.w[i]));
    rep.equation_residual = std::max(rep.equation_residual, sup_distance(sol.w[i], z[i] + Ry[i]));
    if (!sol.y[i].path().is_nondecreasing(tol)) rep.monotone = false;
    rep.complementarity_residual =
        std::max(rep.complementarity_residual, std::abs(stieltjes(sol.w[i], sol.y[i])));
    if (mode == TimeMode::kHalfLine && std::abs(sol.w[i].start_value()) > tol) rep.starts_at_zero = false;
  }
  rep.nonnegative = rep.min_w >= -tol;
  rep.equation = rep.equation_residual <= tol;
  rep.complementary = rep.complementarity_residual <= tol;
  return rep;
}

}  // namespace qnet
