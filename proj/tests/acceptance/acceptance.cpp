// Acceptance gate: each numbered check exercises one end-to-end guarantee
// of the distributed policy-evaluation stack against independent oracles.
// Run as `acceptance N` (N in 1..10); prints one PASS/FAIL line per
// sub-check and exits nonzero if any sub-check fails.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <chrono>
#include <complex>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include "dgtd/harness.hpp"

using namespace dgtd;

namespace {

int g_criterion = 0;
bool g_all_pass = true;

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

void report(bool pass, const std::string& what) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << g_criterion
            << ": " << what << '\n';
  if (!pass) g_all_pass = false;
}

struct Instance {
  MarkovRewardProcess mrp;
  StationaryDist dist;
  FeatureMap features;
  CommNetwork net;
  SaddleSystem sys;
  StationarySet star;
};

/// 20 seeded random instances spanning |S| = 5..20, q = 3..5, N = 2..5.
std::vector<Instance> instance_suite() {
  std::vector<Instance> out;
  for (int idx = 0; idx < 20; ++idx) {
    const int n_states = 5 + (idx * 15) / 19;
    const int q = 3 + idx % 3;
    const int n_agents = 2 + idx % 4;
    Rng rng(1000 + idx);
    MarkovRewardProcess mrp =
        random_mrp(n_states, n_agents, ConstantPerAgent{}, 0.5, rng);
    StationaryDist dist = stationary_distribution(mrp.P());
    FeatureMap features = rbf_features(
        RbfSpec::evenly_spaced(
            Eigen::VectorXd::LinSpaced(n_states, 0.0, n_states - 1.0), q),
        n_states);
    CommNetwork net = network_preset(
        (idx % 2 ? "star:" : "path:") + std::to_string(n_agents));
    SaddleSystem sys = assemble_saddle_system(mrp, features, dist.d, net);
    StationarySet star = stationary_set(sys, mrp, features, dist.d, net);
    out.push_back({std::move(mrp), std::move(dist), std::move(features),
                   std::move(net), std::move(sys), std::move(star)});
  }
  return out;
}

Eigen::VectorXd gaussian_vector(Eigen::Index n, Rng& rng, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// ---------------------------------------------------------------------------
// 1. The root of the summed-loss gradient and the projected fixed point
//    coincide, and the projected Bellman residual vanishes.
void criterion1() {
  double worst_rel = 0.0, worst_resid = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const Instance& in : instance_suite()) {
    const int q = in.features.n_features();
    // The gradient is affine in w; recover its root from q+1 evaluations.
    Eigen::VectorXd g0 = mspbe_gradient(Eigen::VectorXd::Zero(q), in.mrp,
                                        in.features, in.dist.d,
                                        in.mrp.rewards());
    Eigen::MatrixXd G(q, q);
    for (int j = 0; j < q; ++j)
      G.col(j) = mspbe_gradient(Eigen::VectorXd::Unit(q, j), in.mrp,
                                in.features, in.dist.d, in.mrp.rewards()) -
                 g0;
    Eigen::VectorXd w_root = G.fullPivLu().solve(-g0);
    Eigen::VectorXd w_star =
        solve_projected_bellman(in.mrp, in.features, in.dist.d);
    worst_rel =
        std::max(worst_rel, (w_root - w_star).norm() / w_star.norm());

    Eigen::MatrixXd Pi = projection_matrix(in.features.Phi(), in.dist.d);
    Eigen::VectorXd resid =
        Pi * (in.mrp.central_reward() +
              0.5 * (in.mrp.P() * (in.features.Phi() * w_star))) -
        in.features.Phi() * w_star;
    worst_resid = std::max(worst_resid, resid.norm());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(worst_rel < 1e-8, "gradient root matches the projected fixed point "
                           "(worst rel err " +
                               sci(worst_rel) + ")");
  report(worst_resid < 1e-10, "projected Bellman residual (worst " +
                                  sci(worst_resid) + ")");
  report(secs < 1.0, "runtime " + sci(secs) + " s < 1 s");
}

// ---------------------------------------------------------------------------
// 2. The closed-form stationary point solves the full linear system.
void criterion2() {
  double worst_kkt = 0.0, worst_v = 0.0, worst_mu = 0.0;
  for (const Instance& in : instance_suite()) {
    worst_kkt = std::max(worst_kkt, kkt_residual(in.star.stacked(), in.sys));
    worst_v = std::max(worst_v, in.star.v_star.norm());
    worst_mu = std::max(
        worst_mu, (in.sys.L_bar * in.star.mu_particular -
                   in.sys.B_bar.transpose() * in.star.theta_star)
                      .norm());
  }
  report(worst_kkt < 1e-8,
         "stationary-point system residual (worst " + sci(worst_kkt) + ")");
  report(worst_v == 0.0, "auxiliary consensus block exactly zero");
  report(worst_mu < 1e-8,
         "multiplier least-squares residual (worst " + sci(worst_mu) + ")");
}

// ---------------------------------------------------------------------------
// 3. The mean flow converges from random starts with a monotone
//    half-squared-distance function at every integration step.
void criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all_converged = true;
  bool all_monotone = true;
  double worst_increase = 0.0;
  Rng rng(77);

  for (const Instance& in : instance_suite()) {
    const Eigen::VectorXd x_star = in.star.stacked();
    const double h = 2.0 / in.sys.A.cwiseAbs().rowwise().sum().maxCoeff();
    for (int init = 0; init < 5; ++init) {
      Eigen::VectorXd x = gaussian_vector(in.sys.dim(), rng, 2.0);
      double v_prev = 0.5 * (x - x_star).squaredNorm();
      bool converged = false;
      for (long step = 0; step < 300000; ++step) {
        Eigen::VectorXd k1 = -(in.sys.A * x + in.sys.b);
        Eigen::VectorXd k2 = -(in.sys.A * (x + 0.5 * h * k1) + in.sys.b);
        Eigen::VectorXd k3 = -(in.sys.A * (x + 0.5 * h * k2) + in.sys.b);
        Eigen::VectorXd k4 = -(in.sys.A * (x + h * k3) + in.sys.b);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double v = 0.5 * (x - x_star).squaredNorm();
        if (v > v_prev + 1e-10) {
          all_monotone = false;
          worst_increase = std::max(worst_increase, v - v_prev);
        }
        v_prev = v;
        if (dist_theta_v_w(x, in.star, in.sys.block_dim()) < 1e-6) {
          converged = true;
          break;
        }
      }
      all_converged = all_converged && converged;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(all_converged, "all 100 trajectories reached dist < 1e-6");
  report(all_monotone, "half-squared distance non-increasing per step "
                       "(worst increase " +
                           sci(worst_increase) + ")");
  report(secs < 30.0, "runtime " + sci(secs) + " s < 30 s");
}

// ---------------------------------------------------------------------------
// 4. Projected-Euler flow: per-step behavior of V(x) = x'(Ax + b) and the
//    normal-cone membership of the terminal drift.
void criterion4() {
  bool monotone = true;
  double worst_excess = 0.0;
  double worst_membership = 0.0;
  Rng rng(99);

  for (int pick = 0; pick < 3; ++pick) {
    // Small instances so the explicit-Euler stability limit still allows
    // full convergence within the step budget.
    Rng irng(3000 + pick);
    MarkovRewardProcess mrp = random_mrp(5, 2, ConstantPerAgent{}, 0.5, irng);
    StationaryDist dist = stationary_distribution(mrp.P());
    FeatureMap features = rbf_features(
        RbfSpec::evenly_spaced(Eigen::VectorXd::LinSpaced(5, 0.0, 4.0), 3), 5);
    CommNetwork net = network_preset("path:2");
    SaddleSystem sys = assemble_saddle_system(mrp, features, dist.d, net);
    StationarySet star = stationary_set(sys, mrp, features, dist.d, net);
    const Instance in{std::move(mrp), std::move(dist), std::move(features),
                      std::move(net), std::move(sys), std::move(star)};

    const Eigen::VectorXd x_star = in.star.stacked();
    const double radius = 2.0 * std::max(1.0, x_star.lpNorm<Eigen::Infinity>());
    BoxSet box = BoxSet::symmetric(in.sys.dim(), radius);
    const double a_norm = in.sys.A.cwiseAbs().rowwise().sum().maxCoeff();

    // Largest step for which every mode of the linear flow stays damped
    // under explicit Euler, with a safety margin.
    Eigen::EigenSolver<Eigen::MatrixXd> es(in.sys.A);
    double h = 1e18;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const std::complex<double> lam = es.eigenvalues()(i);
      if (std::abs(lam) < 1e-10) continue;  // consensus null directions
      h = std::min(h, 2.0 * lam.real() / std::norm(lam));
    }
    h *= 0.8;

    for (int init = 0; init < 2; ++init) {
      Eigen::VectorXd x = box.clamp(gaussian_vector(in.sys.dim(), rng, radius));
      double v_prev = lyapunov_quadratic_form(x, in.sys);
      for (long step = 0; step < 2000000; ++step) {
        Eigen::VectorXd g = -(in.sys.A * x + in.sys.b);
        if (g.norm() < 1e-8) break;
        x = box.clamp(x + h * g);
        const double v = lyapunov_quadratic_form(x, in.sys);
        // Allowed increase: roundoff plus the second-order step budget;
        // any first-order rise counts as a violation.
        const double budget =
            1e-9 * std::max(1.0, std::abs(v_prev)) +
            10.0 * h * h * (std::abs(g.dot(in.sys.A * g)) +
                            a_norm * g.squaredNorm());
        if (v > v_prev + budget) {
          monotone = false;
          worst_excess = std::max(worst_excess, v - v_prev - budget);
        }
        v_prev = v;
      }
      // Terminal membership: the drift must lie in the normal cone.
      Eigen::VectorXd r = -(in.sys.A * x + in.sys.b);
      double violation2 = 0.0;
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        const bool at_hi = x(i) >= box.hi(i) - 1e-12;
        const bool at_lo = x(i) <= box.lo(i) + 1e-12;
        double bad = 0.0;
        if (at_hi)
          bad = std::max(0.0, -r(i));
        else if (at_lo)
          bad = std::max(0.0, r(i));
        else
          bad = std::abs(r(i));
        violation2 += bad * bad;
      }
      worst_membership = std::max(worst_membership, std::sqrt(violation2));
    }
  }
  report(monotone, "V(x) = x'(Ax+b) non-increasing per projected step within "
                   "first-order tolerance (worst excess " +
                       sci(worst_excess) + ")");
  report(worst_membership < 1e-6,
         "terminal drift lies in the normal cone (worst violation " +
             sci(worst_membership) + ")");
}

// ---------------------------------------------------------------------------
// 5. Sampled increments are unbiased estimates of the mean field.
void criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(123);
  MarkovRewardProcess mrp = random_mrp(6, 3, ConstantPerAgent{}, 0.5, rng);
  StationaryDist dist = stationary_distribution(mrp.P());
  FeatureMap features = rbf_features(
      RbfSpec::evenly_spaced(Eigen::VectorXd::LinSpaced(6, 0.0, 5.0), 3), 6);
  CommNetwork net = network_preset("path:3");
  SaddleSystem sys = assemble_saddle_system(mrp, features, dist.d, net);
  DgtdProblem prob{mrp, dist, features, net, {},
                   StepSchedule::harmonic(1.0, 100.0)};

  long total = 0, ok = 0;
  const int n_samples = 100000;
  for (int iterate = 0; iterate < 10; ++iterate) {
    DgtdState state;
    state.x = StackedState::from_stacked(
        gaussian_vector(sys.dim(), rng, 2.0), sys.block_dim());
    const Eigen::VectorXd target = -(sys.A * state.x.stacked() + sys.b);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(sys.dim());
    Eigen::VectorXd sq = mean;
    Rng sample_rng(500 + iterate);
    for (int i = 0; i < n_samples; ++i) {
      Eigen::VectorXd g = dgtd_increment(state, prob, sample_rng);
      mean += g;
      sq += g.cwiseProduct(g);
    }
    mean /= n_samples;
    sq /= n_samples;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      const double var = std::max(0.0, sq(i) - mean(i) * mean(i));
      const double se = std::sqrt(var / n_samples);
      // Zero-variance components are exact up to the roundoff of summing
      // n_samples terms; allow that accumulation error on top of the SE.
      const double roundoff =
          n_samples * 1e-16 * (1.0 + std::abs(target(i)));
      ++total;
      if (std::abs(mean(i) - target(i)) <= 3.0 * se + roundoff) ++ok;
    }
  }
  const double frac = double(ok) / double(total);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(frac >= 0.95, "increment means within 3 standard errors for " +
                           sci(100.0 * frac) + "% of components");
  report(secs < 60.0, "runtime " + sci(secs) + " s < 60 s");
}

// ---------------------------------------------------------------------------
// 6. The 20-agent star-graph preset reaches consensus near the oracle.
void criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = preset_example2();
  cfg.seed = 0;
  Experiment exp = build_experiment(cfg);
  MetricsSeries m = run_experiment(exp);
  const double scale = m.w_star.norm();
  const auto& last = m.records.back();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(last.consensus_err < 1e-2 * scale,
         "final consensus error " + sci(last.consensus_err) +
             " < 1e-2 * ||w*|| = " + sci(1e-2 * scale));
  report(last.dist_w_star < 5e-2 * scale,
         "final ||w_avg - w*|| " + sci(last.dist_w_star) +
             " < 5e-2 * ||w*|| = " + sci(5e-2 * scale));
  report(secs < 120.0, "runtime " + sci(secs) + " s < 2 min");
}

// ---------------------------------------------------------------------------
// 7. The 100-state price-chain preset: agents agree and track the oracle.
void criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = preset_example1();
  cfg.seed = 0;
  Experiment exp = build_experiment(cfg);
  MetricsSeries m = run_experiment(exp);

  const int q = exp.features.n_features();
  const int N = exp.net.n_agents();
  Eigen::VectorXd w_avg = Eigen::VectorXd::Zero(q);
  for (int i = 0; i < N; ++i) w_avg += m.final_state.w.segment(i * q, q);
  w_avg /= double(N);
  double spread = 0.0;
  for (int i = 0; i < N; ++i)
    spread = std::max(spread,
                      (m.final_state.w.segment(i * q, q) - w_avg).norm());
  const double scale = m.w_star.norm();
  const double dist = (w_avg - m.w_star).norm();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(spread < 0.02 * scale,
         "agent spread " + sci(spread) + " < 2% of ||w*|| = " +
             sci(0.02 * scale));
  report(dist < 0.05 * scale,
         "||w_avg - w*|| " + sci(dist) + " < 5% of ||w*|| = " +
             sci(0.05 * scale));
  report(secs < 300.0, "runtime " + sci(secs) + " s < 5 min");
}

// ---------------------------------------------------------------------------
// 8. Single-node reduction: consensus variables stay at zero and the
//    (theta, w) pair converges to the single-agent oracle.
void criterion8() {
  // Bundled 5-state chain, tabular features, one agent with a sign-mixed
  // reward; this keeps the mean dynamics well damped so a harmonic
  // schedule reaches the oracle within the iteration budget.
  Eigen::VectorXd r(5);
  r << 1.0, -0.5, 2.0, 0.25, -1.25;
  MarkovRewardProcess mrp(example2_transition(), {r}, 0.5);
  StationaryDist dist = stationary_distribution(mrp.P());
  FeatureMap features{Eigen::MatrixXd::Identity(5, 5)};
  CommNetwork net = build_network(1, {});
  SaddleSystem sys = assemble_saddle_system(mrp, features, dist.d, net);
  StationarySet star = stationary_set(sys, mrp, features, dist.d, net);

  DgtdProblem prob{mrp, dist, features, net, {},
                   StepSchedule::harmonic(20.0, 2000.0)};
  DgtdState state;
  state.x = StackedState::zero(1, 5);
  Rng run_rng(7);
  double max_aux = 0.0;
  for (long k = 0; k < 200000; ++k) {
    dgtd_step(state, prob, run_rng);
    max_aux = std::max({max_aux, state.x.v.lpNorm<Eigen::Infinity>(),
                        state.x.mu.lpNorm<Eigen::Infinity>()});
  }
  Eigen::VectorXd ref(10), got(10);
  ref << star.theta_star, star.w_star;
  got << state.x.theta, state.x.w;
  const double rel = (got - ref).norm() / ref.norm();
  report(max_aux == 0.0, "consensus variables identically zero for all k");
  report(rel < 0.05, "(theta, w) within 5% of the oracle (rel err " +
                         sci(rel) + ")");
}

// ---------------------------------------------------------------------------
// 9. The analytic gradient matches central finite differences.
void criterion9() {
  double worst = 0.0;
  Rng rng(31);
  for (const Instance& in : instance_suite()) {
    const int q = in.features.n_features();
    auto f = [&](const Eigen::VectorXd& w) {
      double total = 0.0;
      for (int i = 0; i < in.mrp.n_agents(); ++i)
        total += mspbe(w, in.mrp, in.features, in.dist.d, in.mrp.reward(i));
      return total;
    };
    for (int pt = 0; pt < 20; ++pt) {
      Eigen::VectorXd w = gaussian_vector(q, rng, 3.0);
      Eigen::VectorXd g =
          mspbe_gradient(w, in.mrp, in.features, in.dist.d, in.mrp.rewards());
      Eigen::VectorXd fd(q);
      for (int j = 0; j < q; ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(w(j)));
        Eigen::VectorXd wp = w, wm = w;
        wp(j) += h;
        wm(j) -= h;
        fd(j) = (f(wp) - f(wm)) / (2.0 * h);
      }
      worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
    }
  }
  report(worst < 1e-6, "finite-difference agreement (worst rel err " +
                           sci(worst) + ")");
}

// ---------------------------------------------------------------------------
// 10. Baselines: tabular TD(0) finds the exact value function; the
//     residual method's expected step is the negative Bellman-loss gradient.
void criterion10() {
  // Tabular TD(0) on the bundled 5-state chain.
  Eigen::MatrixXd P = example2_transition();
  Eigen::VectorXd r(5);
  r << 1.0, -2.0, 0.5, 3.0, -1.0;
  MarkovRewardProcess mrp(P, {r}, 0.5);
  StationaryDist dist = stationary_distribution(P);
  FeatureMap tabular{Eigen::MatrixXd::Identity(5, 5)};
  Eigen::VectorXd j_exact =
      (Eigen::MatrixXd::Identity(5, 5) - 0.5 * P).lu().solve(r);

  Rng rng(8);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(5);
  StepSchedule sched = StepSchedule::harmonic(5.0, 500.0);
  for (long k = 0; k < 300000; ++k) {
    Transition tr = sample_iid(mrp, dist, rng);
    td0_step(w, tabular, tr, 0, 0.5, sched.alpha(k));
  }
  const double rel = (w - j_exact).norm() / j_exact.norm();
  report(rel < 0.05, "tabular TD(0) within 5% of the exact values (rel err " +
                         sci(rel) + ")");

  // Residual-method drift against the analytic Bellman-loss gradient.
  FeatureMap features = rbf_features(
      RbfSpec::evenly_spaced(Eigen::VectorXd::LinSpaced(5, 0.0, 4.0), 3), 5);
  Eigen::VectorXd w0 = gaussian_vector(3, rng, 2.0);
  const Eigen::MatrixXd& Phi = features.Phi();
  Eigen::MatrixXd shift = 0.5 * P - Eigen::MatrixXd::Identity(5, 5);
  Eigen::VectorXd grad =
      (shift * Phi).transpose() *
      (dist.d.asDiagonal() * (r + shift * (Phi * w0)));

  const int n_samples = 400000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd sq = mean;
  for (int i = 0; i < n_samples; ++i) {
    auto [tr, s2] = sample_double(mrp, dist, rng);
    Eigen::VectorXd wi = w0;
    residual_step(wi, features, tr, s2, 0, 0.5, 1.0);
    Eigen::VectorXd inc = wi - w0;
    mean += inc;
    sq += inc.cwiseProduct(inc);
  }
  mean /= n_samples;
  sq /= n_samples;
  bool within = true;
  for (int i = 0; i < 3; ++i) {
    const double se =
        std::sqrt(std::max(0.0, sq(i) - mean(i) * mean(i)) / n_samples);
    if (std::abs(mean(i) - (-grad(i))) > 4.0 * se + 1e-12) within = false;
  }
  report(within, "residual-method mean step equals the negative "
                 "Bellman-loss gradient within Monte-Carlo error");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance N   (N in 1..10)\n";
    return 2;
  }
  g_criterion = std::atoi(argv[1]);
  switch (g_criterion) {
    case 1: criterion1(); break;
    case 2: criterion2(); break;
    case 3: criterion3(); break;
    case 4: criterion4(); break;
    case 5: criterion5(); break;
    case 6: criterion6(); break;
    case 7: criterion7(); break;
    case 8: criterion8(); break;
    case 9: criterion9(); break;
    case 10: criterion10(); break;
    default:
      std::cerr << "unknown criterion " << g_criterion << '\n';
      return 2;
  }
  return g_all_pass ? 0 : 1;
}
