#include "dgtd/oracle.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

namespace dgtd {

Eigen::VectorXd StackedState::stacked() const {
  Eigen::VectorXd x(4 * theta.size());
  x << theta, v, mu, w;
  return x;
}

StackedState StackedState::from_stacked(const Eigen::VectorXd& x, int n) {
  StackedState s;
  s.theta = x.segment(0, n);
  s.v = x.segment(n, n);
  s.mu = x.segment(2 * n, n);
  s.w = x.segment(3 * n, n);
  return s;
}

StackedState StackedState::zero(int n_agents, int q) {
  StackedState s;
  s.theta = Eigen::VectorXd::Zero(n_agents * q);
  s.v = s.theta;
  s.mu = s.theta;
  s.w = s.theta;
  return s;
}

Eigen::VectorXd StationarySet::stacked() const {
  Eigen::VectorXd x(4 * theta_star.size());
  x << theta_star, v_star, mu_particular, w_star;
  return x;
}

BoxSet BoxSet::unbounded(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(dim, -inf), Eigen::VectorXd::Constant(dim, inf)};
}

BoxSet BoxSet::symmetric(int dim, double radius) {
  return {Eigen::VectorXd::Constant(dim, -radius),
          Eigen::VectorXd::Constant(dim, radius)};
}

bool BoxSet::contains(const Eigen::VectorXd& x) const {
  return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

Eigen::VectorXd BoxSet::clamp(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lo).cwiseMin(hi);
}

namespace {
/// Bellman residual r + gamma P Phi w - Phi w.
Eigen::VectorXd bellman_residual(const Eigen::VectorXd& w,
                                 const MarkovRewardProcess& mrp,
                                 const Eigen::MatrixXd& Phi,
                                 const Eigen::VectorXd& reward) {
  return reward + mrp.gamma() * (mrp.P() * (Phi * w)) - Phi * w;
}
}  // namespace

double msbe(const Eigen::VectorXd& w, const MarkovRewardProcess& mrp,
            const FeatureMap& features, const Eigen::VectorXd& d,
            const Eigen::VectorXd& reward) {
  Eigen::VectorXd delta = bellman_residual(w, mrp, features.Phi(), reward);
  return 0.5 * delta.dot(d.asDiagonal() * delta);
}

double mspbe(const Eigen::VectorXd& w, const MarkovRewardProcess& mrp,
             const FeatureMap& features, const Eigen::VectorXd& d,
             const Eigen::VectorXd& reward) {
  const Eigen::MatrixXd& Phi = features.Phi();
  Eigen::VectorXd delta = bellman_residual(w, mrp, Phi, reward);
  Eigen::VectorXd y = Phi.transpose() * (d.asDiagonal() * delta);
  Eigen::MatrixXd gram = Phi.transpose() * (d.asDiagonal() * Phi);
  return 0.5 * y.dot(gram.ldlt().solve(y));
}

Eigen::VectorXd mspbe_gradient(const Eigen::VectorXd& w,
                               const MarkovRewardProcess& mrp,
                               const FeatureMap& features,
                               const Eigen::VectorXd& d,
                               const std::vector<Eigen::VectorXd>& rewards) {
  const Eigen::MatrixXd& Phi = features.Phi();
  const auto n = Phi.rows();
  Eigen::MatrixXd DPhi = d.asDiagonal() * Phi;
  Eigen::MatrixXd gram = Phi.transpose() * DPhi;
  Eigen::MatrixXd IgP = Eigen::MatrixXd::Identity(n, n) - mrp.gamma() * mrp.P();
  Eigen::MatrixXd B = Phi.transpose() * (d.asDiagonal() * (IgP * Phi));

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  for (const auto& r : rewards) acc += r - IgP * (Phi * w);
  return -B.transpose() * gram.ldlt().solve(Phi.transpose() * (d.asDiagonal() * acc));
}

Eigen::VectorXd solve_projected_bellman(const MarkovRewardProcess& mrp,
                                        const FeatureMap& features,
                                        const Eigen::VectorXd& d) {
  const Eigen::MatrixXd& Phi = features.Phi();
  const auto n = Phi.rows();
  Eigen::MatrixXd IgP = Eigen::MatrixXd::Identity(n, n) - mrp.gamma() * mrp.P();
  Eigen::MatrixXd B = Phi.transpose() * (d.asDiagonal() * (IgP * Phi));
  Eigen::VectorXd rc = mrp.central_reward();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  if (!lu.isInvertible())
    throw RankError("Phi' D (I - gamma P) Phi is singular");
  Eigen::VectorXd w = lu.solve(Phi.transpose() * (d.asDiagonal() * rc));

  Eigen::MatrixXd Pi = projection_matrix(Phi, d);
  Eigen::VectorXd resid =
      Pi * (rc + mrp.gamma() * (mrp.P() * (Phi * w))) - Phi * w;
  if (resid.norm() >= tol::bellman_residual * std::max(1.0, rc.norm()))
    throw Error("projected Bellman residual check failed");
  return w;
}

SaddleSystem assemble_saddle_system(const MarkovRewardProcess& mrp,
                                    const FeatureMap& features,
                                    const Eigen::VectorXd& d,
                                    const CommNetwork& net) {
  const Eigen::MatrixXd& Phi = features.Phi();
  const int N = net.n_agents();
  const int q = features.n_features();
  const int n = N * q;
  const auto S = Phi.rows();

  if (mrp.n_agents() != N)
    throw ConfigError("network size does not match the number of reward streams");

  Eigen::MatrixXd M = Phi.transpose() * (d.asDiagonal() * Phi);
  Eigen::MatrixXd IgP = Eigen::MatrixXd::Identity(S, S) - mrp.gamma() * mrp.P();
  Eigen::MatrixXd B = Phi.transpose() * (d.asDiagonal() * (IgP * Phi));

  SaddleSystem sys;
  sys.n_agents = N;
  sys.q = q;
  sys.M_bar = Eigen::MatrixXd::Zero(n, n);
  sys.B_bar = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < N; ++i) {
    sys.M_bar.block(i * q, i * q, q, q) = M;
    sys.B_bar.block(i * q, i * q, q, q) = B;
  }
  sys.L_bar = laplacian_kron(net, q);

  sys.phiDr_bar.resize(n);
  for (int i = 0; i < N; ++i)
    sys.phiDr_bar.segment(i * q, q) =
        Phi.transpose() * (d.asDiagonal() * mrp.reward(i));

  sys.A = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  sys.A.block(0, 0, n, n) = sys.M_bar;
  sys.A.block(0, 3 * n, n, n) = sys.B_bar;
  sys.A.block(n, n, n, n) = Eigen::MatrixXd::Identity(n, n);
  sys.A.block(n, 3 * n, n, n) = -sys.L_bar;
  sys.A.block(2 * n, 3 * n, n, n) = -sys.L_bar;
  sys.A.block(3 * n, 0, n, n) = -sys.B_bar.transpose();
  sys.A.block(3 * n, n, n, n) = sys.L_bar;
  sys.A.block(3 * n, 2 * n, n, n) = sys.L_bar;

  sys.b = Eigen::VectorXd::Zero(4 * n);
  sys.b.segment(0, n) = -sys.phiDr_bar;
  return sys;
}

StationarySet stationary_set(const SaddleSystem& sys,
                             const MarkovRewardProcess& mrp,
                             const FeatureMap& features,
                             const Eigen::VectorXd& d,
                             const CommNetwork& net) {
  const Eigen::MatrixXd& Phi = features.Phi();
  const int N = sys.n_agents;
  const int q = sys.q;
  const int n = N * q;
  const auto S = Phi.rows();

  StationarySet out;
  out.w_single = solve_projected_bellman(mrp, features, d);
  out.w_star.resize(n);
  for (int i = 0; i < N; ++i) out.w_star.segment(i * q, q) = out.w_single;
  out.v_star = Eigen::VectorXd::Zero(n);

  Eigen::MatrixXd M = Phi.transpose() * (d.asDiagonal() * Phi);
  Eigen::MatrixXd IgP = Eigen::MatrixXd::Identity(S, S) - mrp.gamma() * mrp.P();
  Eigen::LDLT<Eigen::MatrixXd> Mldlt(M);
  out.theta_star.resize(n);
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd resid = mrp.reward(i) - IgP * (Phi * out.w_single);
    out.theta_star.segment(i * q, q) =
        Mldlt.solve(Phi.transpose() * (d.asDiagonal() * resid));
  }

  // Minimum-norm particular solution of L_bar mu = B_bar' theta_star.
  Eigen::VectorXd rhs = sys.B_bar.transpose() * out.theta_star;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sys.L_bar,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.mu_particular = svd.solve(rhs);
  const double resid = (sys.L_bar * out.mu_particular - rhs).norm();
  if (resid >= tol::stationary_residual * std::max(1.0, rhs.norm()))
    throw Error("stationary multiplier system is inconsistent");

  (void)net;
  return out;
}

double kkt_residual(const Eigen::VectorXd& x, const SaddleSystem& sys) {
  return (sys.A * x + sys.b).norm();
}

double kkt_residual(const StackedState& x, const SaddleSystem& sys) {
  return kkt_residual(x.stacked(), sys);
}

double dual_objective(const Eigen::VectorXd& theta_bar,
                      const Eigen::VectorXd& v_bar, const SaddleSystem& sys) {
  return 0.5 * theta_bar.dot(sys.M_bar * theta_bar) -
         theta_bar.dot(sys.phiDr_bar) + 0.5 * v_bar.squaredNorm();
}

double primal_objective(const Eigen::VectorXd& w_bar, const SaddleSystem& sys) {
  Eigen::VectorXd eps = sys.phiDr_bar - sys.B_bar * w_bar;
  Eigen::VectorXd h = sys.L_bar * w_bar;
  return 0.5 * eps.dot(sys.M_bar.ldlt().solve(eps)) + h.squaredNorm();
}

double lyapunov_quadratic_form(const Eigen::VectorXd& x,
                               const SaddleSystem& sys) {
  return x.dot(sys.A * x + sys.b);
}

std::vector<OdePoint> integrate_ode(const SaddleSystem& sys,
                                    const Eigen::VectorXd& x0,
                                    const OdeOptions& opts) {
  if (opts.step <= 0.0) throw ConfigError("ODE step must be positive");
  // Conservative stability bound for fixed-step RK4 on the linear system.
  if (!opts.projected) {
    const double norm_est = sys.A.cwiseAbs().rowwise().sum().maxCoeff();
    if (opts.step * norm_est > 2.8) {
      std::ostringstream msg;
      msg << "step " << opts.step << " too large for ||A|| estimate " << norm_est;
      throw ConfigError(msg.str());
    }
  }

  std::vector<OdePoint> traj;
  Eigen::VectorXd x = x0;
  const long steps = static_cast<long>(std::ceil(opts.t_end / opts.step));
  traj.push_back({0.0, x});
  for (long k = 0; k < steps; ++k) {
    if (opts.projected) {
      x = opts.projected->clamp(x - opts.step * (sys.A * x + sys.b));
    } else {
      const double h = opts.step;
      Eigen::VectorXd k1 = -(sys.A * x + sys.b);
      Eigen::VectorXd k2 = -(sys.A * (x + 0.5 * h * k1) + sys.b);
      Eigen::VectorXd k3 = -(sys.A * (x + 0.5 * h * k2) + sys.b);
      Eigen::VectorXd k4 = -(sys.A * (x + h * k3) + sys.b);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (x.norm() > opts.divergence_bound)
      throw DivergenceError("ODE trajectory exceeded the divergence bound; reduce the step");
    if ((k + 1) % opts.record_every == 0 || k + 1 == steps) {
      const double t = static_cast<double>(k + 1) * opts.step;
      traj.push_back({t, x});
      if (opts.stop && opts.stop(t, x)) break;
    }
  }
  return traj;
}

double dist_theta_v_w(const Eigen::VectorXd& x, const StationarySet& star,
                      int n) {
  const double dt = (x.segment(0, n) - star.theta_star).squaredNorm();
  const double dv = x.segment(n, n).squaredNorm();
  const double dw = (x.segment(3 * n, n) - star.w_star).squaredNorm();
  return std::sqrt(dt + dv + dw);
}

double mu_dist_to_F(const Eigen::VectorXd& mu, const SaddleSystem& sys,
                    const StationarySet& star) {
  // dist(mu, F) = || L_bar^+ (L_bar mu - rhs) ||: the minimum-norm
  // correction moving mu onto the affine set.
  Eigen::VectorXd rhs = sys.B_bar.transpose() * star.theta_star;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sys.L_bar,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.solve(sys.L_bar * mu - rhs).norm();
}

}  // namespace dgtd
