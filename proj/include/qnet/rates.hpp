#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qnet/reflection.hpp"

namespace qnet {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Quadratic action of a scalar path: sum of slope^2 * length / 2, or infinity
// for a path with a jump or a nonzero value at 0.
double i_brown(const PiecewisePath& x);

// Limiting variances of the renewal inputs and the Brownian covariance they
// induce on the heavy traffic limit.
struct CovarianceData {
  std::vector<double> u2;               // per class, inter-arrival variance
  std::vector<std::vector<double>> v2;  // [node][class], service variance (0 where unused)
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;  // R U R^T
};

// Throws ConfigError if a variance is negative or V fails the PSD check
// (smallest eigenvalue below -1e-10 * trace).
CovarianceData build_covariance(const NetworkSpec& spec, const CriticalData& cd, const std::vector<double>& u2,
                                const std::vector<std::vector<double>>& v2);

// Rate of the centered renewal inputs. s[i][j] must be present where class j
// visits node i. x/0 is 0 for x = 0 and infinity otherwise.
double i_renewal(const std::vector<PiecewisePath>& a, const std::vector<std::vector<std::optional<PiecewisePath>>>& s,
                 const NetworkSpec& spec, const CriticalData& cd, const CovarianceData& cov);

// Action of an n-dimensional path under covariance V. Directions outside the
// range of V cost infinity. Throws ConfigError when V is not PSD.
double i_v_brown(const std::vector<PiecewisePath>& x, const Eigen::MatrixXd& V);

// Cheapest path z with Phi(z - zeta id)_node(T) >= level.
struct VariationalProblem {
  double horizon = 0.0;  // 0 picks 4 * level * max(max_diag(V), 1) / min positive zeta
  int cells = 32;
  int node = 0;  // 0-based
  double level = 1.0;
  Eigen::VectorXd zeta;
  Eigen::MatrixXd V;
  Eigen::MatrixXd R;  // empty means the identity
  int random_starts = 8;
  bool refine = true;  // also solve on 2 * cells and keep the smaller rate
  std::uint64_t seed = 1;

  // Throws ConfigError.
  void validate() const;
};

struct VariationalResult {
  double rate = kInf;
  bool feasible = false;
  double horizon = 0.0;
  int cells = 0;                       // grid of the returned path
  std::vector<double> rate_per_grid;   // one entry per solved grid
  std::vector<PiecewisePath> z;        // argmin
  std::vector<PiecewisePath> w;        // Phi(z - zeta id)
  std::string diagnostics;
};

VariationalResult variational_rate(const VariationalProblem& vp);

// Brute force over paths that stay at 0 and then rise linearly with slope c
// for a duration tau, reflected with drift -zeta and variance v.
double oracle_rate_1d(double zeta, double v, double b);

}  // namespace qnet
