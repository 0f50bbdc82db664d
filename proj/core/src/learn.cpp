#include "dgtd/learn.hpp"

#include <cmath>

namespace dgtd {

StepSchedule StepSchedule::harmonic(double a, double b) {
  if (a <= 0.0 || b <= 0.0)
    throw ConfigError("harmonic step rule needs a > 0 and b > 0");
  StepSchedule s;
  s.kind = Kind::Harmonic;
  s.a = a;
  s.b = b;
  return s;
}

StepSchedule StepSchedule::constant(double c) {
  if (c <= 0.0) throw ConfigError("constant step must be positive");
  StepSchedule s;
  s.kind = Kind::Constant;
  s.c = c;
  return s;
}

Eigen::VectorXd clamp_box(const Eigen::VectorXd& x, const BoxSet& boxes) {
  return boxes.clamp(x);
}

namespace {

struct AgentSample {
  Eigen::VectorXd phi, phi_next;
  Eigen::VectorXd phi_next2;  // second independent draw (Printed form only)
  double reward = 0.0;
};

/// Draws one synchronous round of samples. All randomness happens here so
/// the update phase below is deterministic in the drawn samples.
std::vector<AgentSample> draw_samples(const DgtdState& state,
                                      const DgtdProblem& prob, Rng& rng,
                                      int* next_chain_state) {
  const int N = prob.net.n_agents();
  std::vector<AgentSample> samples(N);
  const bool doubled = prob.theta_form == ThetaUpdateForm::Printed;

  auto fill = [&](AgentSample& smp, const Transition& tr, int agent) {
    smp.phi = prob.features.row(tr.s);
    smp.phi_next = prob.features.row(tr.s_next);
    smp.reward = tr.reward_per_agent(agent);
    if (doubled) {
      smp.phi_next2 =
          prob.features.row(sample_categorical(prob.mrp.P().row(tr.s), rng));
    }
  };

  switch (prob.mode) {
    case SamplingMode::SharedIid: {
      Transition tr = sample_iid(prob.mrp, prob.dist, rng);
      int s_next2 = -1;
      if (doubled) s_next2 = sample_categorical(prob.mrp.P().row(tr.s), rng);
      for (int i = 0; i < N; ++i) {
        samples[i].phi = prob.features.row(tr.s);
        samples[i].phi_next = prob.features.row(tr.s_next);
        samples[i].reward = tr.reward_per_agent(i);
        if (doubled) samples[i].phi_next2 = prob.features.row(s_next2);
      }
      break;
    }
    case SamplingMode::IndependentIid: {
      for (int i = 0; i < N; ++i)
        fill(samples[i], sample_iid(prob.mrp, prob.dist, rng), i);
      break;
    }
    case SamplingMode::SharedTrajectory: {
      Transition tr = sample_trajectory(prob.mrp, state.chain_state, rng);
      int s_next2 = -1;
      if (doubled) s_next2 = sample_categorical(prob.mrp.P().row(tr.s), rng);
      for (int i = 0; i < N; ++i) {
        samples[i].phi = prob.features.row(tr.s);
        samples[i].phi_next = prob.features.row(tr.s_next);
        samples[i].reward = tr.reward_per_agent(i);
        if (doubled) samples[i].phi_next2 = prob.features.row(s_next2);
      }
      *next_chain_state = tr.s_next;
      break;
    }
  }
  return samples;
}

/// The stacked per-unit-step displacement g with x_{k+1} = x_k + alpha g.
/// Its conditional expectation is -(A x + b).
Eigen::VectorXd round_increment(const StackedState& x, const DgtdProblem& prob,
                                const std::vector<AgentSample>& samples) {
  const int N = prob.net.n_agents();
  const int q = prob.features.n_features();
  const int n = N * q;
  Eigen::VectorXd g(4 * n);

  for (int i = 0; i < N; ++i) {
    const AgentSample& smp = samples[i];
    const auto th = x.theta.segment(i * q, q);
    const auto vi = x.v.segment(i * q, q);
    const auto wi = x.w.segment(i * q, q);
    const Eigen::VectorXd dw = neighbor_disagreement(prob.net, x.w, i, q);
    const Eigen::VectorXd dv = neighbor_disagreement(prob.net, x.v, i, q);
    const Eigen::VectorXd dmu = neighbor_disagreement(prob.net, x.mu, i, q);

    Eigen::VectorXd g_theta;
    if (prob.theta_form == ThetaUpdateForm::Printed) {
      g_theta = -(smp.phi * (smp.phi.dot(th)) + smp.phi * (smp.phi.dot(wi)) -
                  prob.mrp.gamma() * smp.phi * (smp.phi_next2.dot(wi)) -
                  smp.phi * smp.reward);
    } else {
      const Eigen::VectorXd td_feat =
          smp.phi - prob.mrp.gamma() * smp.phi_next;
      g_theta = -smp.phi * (smp.phi.dot(th) + td_feat.dot(wi) - smp.reward);
    }
    const Eigen::VectorXd g_v = -(vi - dw);
    const Eigen::VectorXd g_mu = dw;
    const Eigen::VectorXd g_w =
        -dv - dmu + (smp.phi - prob.mrp.gamma() * smp.phi_next) * smp.phi.dot(th);

    g.segment(i * q, q) = g_theta;
    g.segment(n + i * q, q) = g_v;
    g.segment(2 * n + i * q, q) = g_mu;
    g.segment(3 * n + i * q, q) = g_w;
  }
  return g;
}

}  // namespace

void dgtd_step(DgtdState& state, const DgtdProblem& prob, Rng& rng) {
  int next_chain = state.chain_state;
  const auto samples = draw_samples(state, prob, rng, &next_chain);
  const double alpha = prob.schedule.alpha(state.k);

  Eigen::VectorXd x = state.x.stacked() +
                      alpha * round_increment(state.x, prob, samples);
  if (prob.boxes) x = prob.boxes->clamp(x);
  if (!x.allFinite() || x.norm() > prob.divergence_bound)
    throw DivergenceError("iterate exceeded the divergence bound at k=" +
                          std::to_string(state.k));

  state.x = StackedState::from_stacked(x, state.x.block_dim());
  state.chain_state = next_chain;
  ++state.k;
}

Eigen::VectorXd dgtd_increment(const DgtdState& state, const DgtdProblem& prob,
                               Rng& rng) {
  int next_chain = state.chain_state;
  const auto samples = draw_samples(state, prob, rng, &next_chain);
  return round_increment(state.x, prob, samples);
}

namespace {

MetricsRecord make_record(const DgtdState& state, const DgtdProblem& prob,
                          const SaddleSystem& sys, const StationarySet& star) {
  const int N = prob.net.n_agents();
  const int q = prob.features.n_features();
  MetricsRecord rec;
  rec.k = state.k;
  rec.alpha = prob.schedule.alpha(state.k);

  Eigen::VectorXd w_avg = Eigen::VectorXd::Zero(q);
  for (int i = 0; i < N; ++i) w_avg += state.x.w.segment(i * q, q);
  w_avg /= static_cast<double>(N);

  rec.consensus_err = 0.0;
  for (int i = 0; i < N; ++i)
    rec.consensus_err = std::max(
        rec.consensus_err, (state.x.w.segment(i * q, q) - w_avg).norm());
  rec.dist_w_star = (w_avg - star.w_single).norm();

  rec.sum_mspbe = 0.0;
  for (int i = 0; i < N; ++i)
    rec.sum_mspbe += mspbe(state.x.w.segment(i * q, q), prob.mrp,
                           prob.features, prob.dist.d, prob.mrp.reward(i));

  rec.kkt_residual = kkt_residual(state.x.stacked(), sys);
  return rec;
}

}  // namespace

MetricsSeries run_dgtd(const DgtdProblem& prob, const RunSpec& spec) {
  if (spec.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (spec.cadence < 1) throw ConfigError("cadence must be >= 1");

  SaddleSystem sys =
      assemble_saddle_system(prob.mrp, prob.features, prob.dist.d, prob.net);
  StationarySet star =
      stationary_set(sys, prob.mrp, prob.features, prob.dist.d, prob.net);

  Rng rng(spec.seed);
  DgtdState state;
  state.x = spec.init.theta.size() > 0
                ? spec.init
                : StackedState::zero(prob.net.n_agents(),
                                     prob.features.n_features());
  if (prob.mode == SamplingMode::SharedTrajectory)
    state.chain_state = sample_categorical(prob.dist.d, rng);

  MetricsSeries out;
  out.w_star = star.w_single;
  out.records.push_back(make_record(state, prob, sys, star));
  for (long k = 0; k < spec.iterations; ++k) {
    dgtd_step(state, prob, rng);
    if (state.k % spec.cadence == 0 || state.k == spec.iterations)
      out.records.push_back(make_record(state, prob, sys, star));
  }
  out.final_state = state.x;
  return out;
}

MetricsSeries gtd_single(const MarkovRewardProcess& mrp,
                         const StationaryDist& dist, const FeatureMap& features,
                         const Eigen::VectorXd& reward,
                         const StepSchedule& schedule, const RunSpec& spec) {
  MarkovRewardProcess single(mrp.P(), {reward}, mrp.gamma());
  CommNetwork net = build_network(1, {});
  DgtdProblem prob{single,   dist, features,
                   net,      {},   schedule,
                   SamplingMode::SharedIid, ThetaUpdateForm::Printed};
  return run_dgtd(prob, spec);
}

void td0_step(Eigen::VectorXd& w, const FeatureMap& features,
              const Transition& tr, int agent, double gamma, double alpha) {
  const Eigen::VectorXd phi = features.row(tr.s);
  const Eigen::VectorXd phi_next = features.row(tr.s_next);
  const double delta =
      tr.reward_per_agent(agent) + gamma * phi_next.dot(w) - phi.dot(w);
  w += alpha * delta * phi;
}

void residual_step(Eigen::VectorXd& w, const FeatureMap& features,
                   const Transition& tr, int s_next2, int agent, double gamma,
                   double alpha) {
  const Eigen::VectorXd phi = features.row(tr.s);
  const Eigen::VectorXd phi_next = features.row(tr.s_next);
  const Eigen::VectorXd phi_next2 = features.row(s_next2);
  const double delta =
      tr.reward_per_agent(agent) + gamma * phi_next.dot(w) - phi.dot(w);
  w -= alpha * delta * (gamma * phi_next2 - phi);
}

}  // namespace dgtd
