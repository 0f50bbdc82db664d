#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "dgtd/errors.hpp"

namespace dgtd {

using Rng = std::mt19937_64;

/// Finite Markov reward process under a fixed joint policy. Stores the
/// policy-marginalized transition matrix, per-agent expected rewards and
/// the discount factor. Immutable after construction.
class MarkovRewardProcess {
 public:
  MarkovRewardProcess(Eigen::MatrixXd P, std::vector<Eigen::VectorXd> rewards,
                      double gamma);

  int n_states() const { return static_cast<int>(P_.rows()); }
  int n_agents() const { return static_cast<int>(rewards_.size()); }
  const Eigen::MatrixXd& P() const { return P_; }
  const Eigen::VectorXd& reward(int agent) const { return rewards_.at(agent); }
  const std::vector<Eigen::VectorXd>& rewards() const { return rewards_; }
  double gamma() const { return gamma_; }

  /// (r_1 + ... + r_N) / N.
  Eigen::VectorXd central_reward() const;

 private:
  Eigen::MatrixXd P_;
  std::vector<Eigen::VectorXd> rewards_;
  double gamma_;
};

/// Stationary distribution d with d'P = d', all entries strictly positive.
struct StationaryDist {
  Eigen::VectorXd d;

  Eigen::MatrixXd D() const { return d.asDiagonal(); }
};

struct Transition {
  int s = 0;
  int s_next = 0;
  Eigen::VectorXd reward_per_agent;
};

/// Solves (P' - I)d = 0 with sum(d) = 1 appended. Throws ErgodicityError
/// when the fixed point is not unique, the residual exceeds tolerance,
/// or some entry of d is not strictly positive.
StationaryDist stationary_distribution(const Eigen::MatrixXd& P);

/// Power-iteration cross-check for the linear-solve path. Throws
/// ErgodicityError if the iteration does not settle within max_iters.
StationaryDist stationary_distribution_power(const Eigen::MatrixXd& P,
                                             int max_iters = 100000);

/// Draws s ~ d, s' ~ P[s]; rewards are r_i(s).
Transition sample_iid(const MarkovRewardProcess& mrp, const StationaryDist& d,
                      Rng& rng);

/// On-chain sampling: s = current_state, s' ~ P[s].
Transition sample_trajectory(const MarkovRewardProcess& mrp, int current_state,
                             Rng& rng);

/// As sample_iid but with a second independent draw of s' from row P[s].
std::pair<Transition, int> sample_double(const MarkovRewardProcess& mrp,
                                         const StationaryDist& d, Rng& rng);

/// Reward constructors for random_mrp.
struct ConstantPerAgent {};  // r_i == i (1-based agent index)
struct RewardTable {
  Eigen::MatrixXd table;  // n_agents x n_states
};
struct BuySellRule {
  std::vector<std::pair<double, double>> thresholds;  // (a_i, b_i) per agent
  Eigen::VectorXd state_values;
};
using RewardSpec = std::variant<ConstantPerAgent, RewardTable, BuySellRule>;

/// Random ergodic chain: rows are normalized positive draws, so every
/// entry is strictly positive.
MarkovRewardProcess random_mrp(int n_states, int n_agents,
                               const RewardSpec& spec, double gamma, Rng& rng);

/// Inverse-CDF draw from a probability row.
int sample_categorical(const Eigen::VectorXd& probs, Rng& rng);

}  // namespace dgtd
