#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "dgtd/approx.hpp"
#include "dgtd/mrp.hpp"
#include "dgtd/network.hpp"

namespace dgtd {

/// Primal-dual iterate x = (theta_bar, v_bar, mu_bar, w_bar), each block
/// of dimension N*q.
struct StackedState {
  Eigen::VectorXd theta, v, mu, w;

  int block_dim() const { return static_cast<int>(theta.size()); }
  Eigen::VectorXd stacked() const;
  static StackedState from_stacked(const Eigen::VectorXd& x, int block_dim);
  static StackedState zero(int n_agents, int q);

  Eigen::VectorXd agent_block(const Eigen::VectorXd& block, int i, int q) const {
    return block.segment(static_cast<Eigen::Index>(i) * q, q);
  }
};

/// The linear saddle-point system behind the ODE dx/dt = -A x - b.
/// Block layout (theta, v, mu, w) with n = N*q per block:
///   A = [ M_bar   0     0    B_bar ]      b = [ -PhiD_bar r_bar ]
///       [ 0       I     0   -L_bar ]          [ 0 ]
///       [ 0       0     0   -L_bar ]          [ 0 ]
///       [-B_bar'  L_bar L_bar  0   ]          [ 0 ]
/// where M_bar = Phi_bar' D_bar Phi_bar and
/// B_bar = Phi_bar' D_bar (I - gamma P_bar) Phi_bar.
struct SaddleSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd M_bar, B_bar, L_bar;
  Eigen::VectorXd phiDr_bar;  // Phi_bar' D_bar r_bar
  int n_agents = 0;
  int q = 0;

  int block_dim() const { return n_agents * q; }
  int dim() const { return 4 * block_dim(); }
};

/// Closed-form stationary set of dx/dt = -A x - b. mu is free along the
/// affine set F = {mu : L_bar mu = B_bar' theta_star}; mu_particular is
/// the minimum-norm solution and the null space of L_bar is {1 (x) z}.
struct StationarySet {
  Eigen::VectorXd theta_star;
  Eigen::VectorXd v_star;  // identically zero
  Eigen::VectorXd w_star;  // 1 (x) w_single
  Eigen::VectorXd mu_particular;
  Eigen::VectorXd w_single;

  Eigen::VectorXd stacked() const;
};

/// Per-coordinate box constraints for the four blocks; +-infinity allowed.
struct BoxSet {
  Eigen::VectorXd lo, hi;  // dimension 4*N*q

  static BoxSet unbounded(int dim);
  static BoxSet symmetric(int dim, double radius);
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
};

/// 1/2 || r + gamma P Phi w - Phi w ||^2_D.
double msbe(const Eigen::VectorXd& w, const MarkovRewardProcess& mrp,
            const FeatureMap& features, const Eigen::VectorXd& d,
            const Eigen::VectorXd& reward);

/// 1/2 || Pi (r + gamma P Phi w - Phi w) ||^2_D, evaluated through the
/// normal-equation form; tests cross-check the projected form.
double mspbe(const Eigen::VectorXd& w, const MarkovRewardProcess& mrp,
             const FeatureMap& features, const Eigen::VectorXd& d,
             const Eigen::VectorXd& reward);

/// Exact gradient of sum_i MSPBE_i(w):
/// -(Phi'D(I-gamma P)Phi)' (Phi'D Phi)^{-1} Phi'D sum_i (r_i - (I-gamma P) Phi w).
Eigen::VectorXd mspbe_gradient(const Eigen::VectorXd& w,
                               const MarkovRewardProcess& mrp,
                               const FeatureMap& features,
                               const Eigen::VectorXd& d,
                               const std::vector<Eigen::VectorXd>& rewards);

/// w* = (Phi'D(I-gamma P)Phi)^{-1} Phi'D r_c, with the projected Bellman
/// residual checked against tol::bellman_residual.
Eigen::VectorXd solve_projected_bellman(const MarkovRewardProcess& mrp,
                                        const FeatureMap& features,
                                        const Eigen::VectorXd& d);

SaddleSystem assemble_saddle_system(const MarkovRewardProcess& mrp,
                                    const FeatureMap& features,
                                    const Eigen::VectorXd& d,
                                    const CommNetwork& net);

StationarySet stationary_set(const SaddleSystem& sys,
                             const MarkovRewardProcess& mrp,
                             const FeatureMap& features,
                             const Eigen::VectorXd& d,
                             const CommNetwork& net);

/// || A x + b ||; zero exactly at KKT points.
double kkt_residual(const StackedState& x, const SaddleSystem& sys);
double kkt_residual(const Eigen::VectorXd& x, const SaddleSystem& sys);

/// psi(theta, v) = 1/2 theta' M_bar theta - theta' Phi_bar'D_bar r_bar
///               + 1/2 v' v  (constant in mu).
double dual_objective(const Eigen::VectorXd& theta_bar,
                      const Eigen::VectorXd& v_bar, const SaddleSystem& sys);

/// 1/2 (Phi'Dr - B w)' M^{-1} (Phi'Dr - B w) + w' L L w, all barred.
double primal_objective(const Eigen::VectorXd& w_bar, const SaddleSystem& sys);

/// V(x) = x'(A x + b), the function used for the projected-flow
/// stationarity diagnostics.
double lyapunov_quadratic_form(const Eigen::VectorXd& x,
                               const SaddleSystem& sys);

struct OdePoint {
  double t = 0.0;
  Eigen::VectorXd x;
};

struct OdeOptions {
  double step = 1e-2;
  double t_end = 100.0;
  std::optional<BoxSet> projected;  // projected-Euler when set, else RK4
  double divergence_bound = 1e9;
  int record_every = 1;
  /// Optional early exit, checked at recording points.
  std::function<bool(double t, const Eigen::VectorXd& x)> stop;
};

/// Fixed-step RK4 for the linear ODE, or clamp-after-step Euler for the
/// projected variant. Throws DivergenceError when ||x|| exceeds the bound.
std::vector<OdePoint> integrate_ode(const SaddleSystem& sys,
                                    const Eigen::VectorXd& x0,
                                    const OdeOptions& opts);

/// Euclidean distance of the (theta, v, w) blocks from the stationary set
/// (mu excluded; it is only determined up to the affine set F).
double dist_theta_v_w(const Eigen::VectorXd& x, const StationarySet& star,
                      int block_dim);

/// Euclidean distance of mu from F, via the pseudo-inverse of L_bar.
double mu_dist_to_F(const Eigen::VectorXd& mu, const SaddleSystem& sys,
                    const StationarySet& star);

}  // namespace dgtd
