#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qnet/network.hpp"

namespace qnet {

// Critical rates of a network and the matrices derived from them.
// Per-node per-class arrays are indexed [node][class]; entries for classes
// that skip a node are 0.
struct CriticalData {
  int num_nodes = 0;
  int num_classes = 0;
  std::vector<double> alpha;
  std::vector<std::vector<double>> sigma;
  std::vector<double> rho_low;                 // per node
  std::vector<std::vector<double>> alpha_low;  // [node][class]
  std::vector<std::vector<double>> e_low;      // [node][class], indicator of the low group
  Eigen::MatrixXd G;
  Eigen::MatrixXd R;
  std::vector<double> alpha_offset;
  std::vector<std::vector<double>> sigma_offset;
  std::vector<double> rho_tilde;
  std::vector<double> rho_tilde_high;
  Eigen::VectorXd zeta;  // R * rho_tilde

  bool drift_positive() const;
};

// Throws ConfigError naming the node when a rate is missing, a service rate
// is not positive, the low load vanishes, or the load differs from 1 by more
// than tol.
CriticalData build_critical(const NetworkSpec& spec, const std::vector<double>& alpha,
                            const std::vector<std::vector<double>>& sigma,
                            const std::vector<double>& alpha_offset,
                            const std::vector<std::vector<double>>& sigma_offset, double tol = 1e-12);

// Arguments of the heavy traffic maps. Unlike NetworkPrimitives these may be
// centered paths (not monotone). s[i][j] is needed where class j visits node i.
struct TildeInputs {
  std::vector<PiecewisePath> a;
  std::vector<std::vector<std::optional<PiecewisePath>>> s;
};

struct TildeOutput {
  std::vector<PiecewisePath> X;
  std::vector<PiecewisePath> W;
  std::vector<MonotonePath> Y;
  std::vector<PiecewisePath> U;
};

std::vector<PiecewisePath> x_tilde(const TildeInputs& in, const NetworkSpec& spec, const CriticalData& cd);
// Sequential recursion over the nodes. In half-line mode the suprema include
// the value 0 (reflection of paths that start at 0).
TildeOutput w_tilde(const TildeInputs& in, const NetworkSpec& spec, const CriticalData& cd,
                    TimeMode mode = TimeMode::kHalfLine);
std::vector<PiecewisePath> u_tilde(const TildeInputs& in, const NetworkSpec& spec, const CriticalData& cd,
                                   const std::vector<PiecewisePath>& W);

struct SkorokhodSolution {
  std::vector<PiecewisePath> w;
  std::vector<MonotonePath> y;
};

// Unique solution for R = (I+G)^{-1} with G strictly lower triangular.
// Throws UnsupportedMatrixError for any other R.
SkorokhodSolution skorokhod_phi(const std::vector<PiecewisePath>& z, const Eigen::MatrixXd& R,
                                TimeMode mode = TimeMode::kHalfLine);

// Second route: Jacobi iteration y_i <- sup(-z_i - sum_{h != i} (R - I)_{ih} y_h)
// for at most max_passes sweeps (2n by default). For triangular R it is exact
// after n sweeps.
struct FixedPointResult {
  SkorokhodSolution sol;
  int passes = 0;
  double last_change = 0.0;
};
FixedPointResult skorokhod_fixed_point(const std::vector<PiecewisePath>& z, const Eigen::MatrixXd& R,
                                       TimeMode mode = TimeMode::kHalfLine, int max_passes = -1);

struct SkorokhodReport {
  bool nonnegative = true;
  bool equation = true;
  bool monotone = true;
  bool complementary = true;
  bool starts_at_zero = true;  // half-line mode only
  double min_w = 0.0;
  double equation_residual = 0.0;
  double complementarity_residual = 0.0;
  bool ok() const { return nonnegative && equation && monotone && complementary && starts_at_zero; }
};

SkorokhodReport verify_skorokhod(const SkorokhodSolution& sol, const std::vector<PiecewisePath>& z,
                                 const Eigen::MatrixXd& R, double tol = 1e-10,
                                 TimeMode mode = TimeMode::kHalfLine);

// R z, componentwise path combination.
std::vector<PiecewisePath> apply_matrix(const Eigen::MatrixXd& M, const std::vector<PiecewisePath>& z);

}  // namespace qnet
