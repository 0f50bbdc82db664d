#include "dgtd/mrp.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace dgtd {

MarkovRewardProcess::MarkovRewardProcess(Eigen::MatrixXd P,
                                         std::vector<Eigen::VectorXd> rewards,
                                         double gamma)
    : P_(std::move(P)), rewards_(std::move(rewards)), gamma_(gamma) {
  const auto n = P_.rows();
  if (n < 1 || P_.cols() != n) throw ConfigError("transition matrix must be square");
  if (P_.minCoeff() < 0.0) throw ConfigError("transition matrix has a negative entry");
  for (Eigen::Index s = 0; s < n; ++s) {
    if (std::abs(P_.row(s).sum() - 1.0) > tol::row_stochastic) {
      std::ostringstream msg;
      msg << "row " << s << " of P sums to " << P_.row(s).sum();
      throw ConfigError(msg.str());
    }
  }
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw ConfigError("gamma must lie in (0,1)");
  if (rewards_.empty()) throw ConfigError("at least one reward vector is required");
  for (const auto& r : rewards_)
    if (r.size() != n) throw ConfigError("reward vector length != n_states");
}

Eigen::VectorXd MarkovRewardProcess::central_reward() const {
  Eigen::VectorXd rc = Eigen::VectorXd::Zero(n_states());
  for (const auto& r : rewards_) rc += r;
  return rc / static_cast<double>(n_agents());
}

StationaryDist stationary_distribution(const Eigen::MatrixXd& P) {
  const auto n = P.rows();
  // Uniqueness of the fixed point: P' - I must have a one-dimensional
  // null space, otherwise the chain is reducible.
  Eigen::MatrixXd K = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
  const auto& sv = svd.singularValues();
  const double rank_tol = 1e-12 * std::max(1.0, sv(0));
  int nullity = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) < rank_tol) ++nullity;
  if (nullity != 1)
    throw ErgodicityError("chain is reducible: stationary distribution is not unique");

  Eigen::MatrixXd lhs(n + 1, n);
  lhs.topRows(n) = K;
  lhs.bottomRows(1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  Eigen::VectorXd d = lhs.colPivHouseholderQr().solve(rhs);

  const double resid = ((P.transpose() * d) - d).lpNorm<Eigen::Infinity>();
  if (resid >= tol::stationary_fixed_point)
    throw ErgodicityError("stationary fixed-point residual too large");
  if (d.minCoeff() <= 0.0)
    throw ErgodicityError("stationary distribution has a non-positive entry");
  return {d};
}

StationaryDist stationary_distribution_power(const Eigen::MatrixXd& P,
                                             int max_iters) {
  const auto n = P.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next = P.transpose() * d;
    next /= next.sum();
    const double delta = (next - d).lpNorm<Eigen::Infinity>();
    d = next;
    if (delta < 1e-14) {
      if (d.minCoeff() <= 0.0)
        throw ErgodicityError("power iteration converged to a degenerate distribution");
      return {d};
    }
  }
  throw ErgodicityError("power iteration did not converge within the cap");
}

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

namespace {
Eigen::VectorXd rewards_at(const MarkovRewardProcess& mrp, int s) {
  Eigen::VectorXd r(mrp.n_agents());
  for (int i = 0; i < mrp.n_agents(); ++i) r(i) = mrp.reward(i)(s);
  return r;
}
}  // namespace

Transition sample_iid(const MarkovRewardProcess& mrp, const StationaryDist& dist,
                      Rng& rng) {
  const int s = sample_categorical(dist.d, rng);
  const int sp = sample_categorical(mrp.P().row(s), rng);
  return {s, sp, rewards_at(mrp, s)};
}

Transition sample_trajectory(const MarkovRewardProcess& mrp, int current_state,
                             Rng& rng) {
  const int sp = sample_categorical(mrp.P().row(current_state), rng);
  return {current_state, sp, rewards_at(mrp, current_state)};
}

std::pair<Transition, int> sample_double(const MarkovRewardProcess& mrp,
                                         const StationaryDist& dist, Rng& rng) {
  Transition tr = sample_iid(mrp, dist, rng);
  const int sp2 = sample_categorical(mrp.P().row(tr.s), rng);
  return {tr, sp2};
}

MarkovRewardProcess random_mrp(int n_states, int n_agents,
                               const RewardSpec& spec, double gamma, Rng& rng) {
  if (n_states < 2) throw ConfigError("random_mrp needs at least 2 states");
  if (n_agents < 1) throw ConfigError("random_mrp needs at least 1 agent");
  // Shifted exponential draws keep every entry strictly positive, so the
  // chain is ergodic by construction.
  std::exponential_distribution<double> expo(1.0);
  Eigen::MatrixXd P(n_states, n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int t = 0; t < n_states; ++t) P(s, t) = expo(rng) + 0.05;
    P.row(s) /= P.row(s).sum();
  }

  std::vector<Eigen::VectorXd> rewards;
  rewards.reserve(n_agents);
  if (std::holds_alternative<ConstantPerAgent>(spec)) {
    for (int i = 0; i < n_agents; ++i)
      rewards.push_back(Eigen::VectorXd::Constant(n_states, static_cast<double>(i + 1)));
  } else if (const auto* table = std::get_if<RewardTable>(&spec)) {
    if (table->table.rows() != n_agents || table->table.cols() != n_states)
      throw ConfigError("reward table shape mismatch");
    for (int i = 0; i < n_agents; ++i)
      rewards.push_back(table->table.row(i).transpose());
  } else {
    const auto& rule = std::get<BuySellRule>(spec);
    if (static_cast<int>(rule.thresholds.size()) != n_agents)
      throw ConfigError("one (a,b) threshold pair per agent is required");
    if (rule.state_values.size() != n_states)
      throw ConfigError("state_values length != n_states");
    for (int i = 0; i < n_agents; ++i) {
      const auto [a, b] = rule.thresholds[i];
      Eigen::VectorXd r(n_states);
      for (int s = 0; s < n_states; ++s) {
        const double price = rule.state_values(s);
        // Buy (pay the price) when a <= s <= b, sell (earn it) otherwise.
        r(s) = (a <= price && price <= b) ? -price : price;
      }
      rewards.push_back(std::move(r));
    }
  }
  return MarkovRewardProcess(std::move(P), std::move(rewards), gamma);
}

}  // namespace dgtd
