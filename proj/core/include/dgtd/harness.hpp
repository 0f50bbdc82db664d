#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgtd/learn.hpp"
#include "dgtd/matrix_io.hpp"

namespace dgtd {

/// Fully materialized experiment specification. Serialized as JSON; every
/// run echoes the resolved config (defaults included) next to its metrics
/// so that re-running it reproduces the output byte for byte.
struct RunConfig {
  std::string preset;  // empty unless built from a preset

  // Instance source.
  enum class InstanceKind { Example2Matrix, Random, Files };
  InstanceKind instance = InstanceKind::Random;
  int n_states = 5;
  int n_agents = 2;
  std::uint64_t instance_seed = 0;
  std::string transition_file, rewards_file;  // Files kind

  // Reward constructor (Random kind).
  enum class RewardKind { ConstantAgentIndex, BuySell, Gaussian };
  RewardKind reward = RewardKind::Gaussian;
  std::vector<std::pair<double, double>> buy_sell_thresholds;

  // State coordinates used by the RBF features and the buy/sell rule.
  double state_value_lo = 0.0;
  double state_value_hi = 0.0;  // lo==hi: use state indices

  // Features.
  int q = 3;
  double rbf_width_scale = 1.0;
  std::string features_file;  // overrides the RBF generator when set

  double gamma = 0.5;
  std::string graph = "path:2";  // preset string or @file path

  StepSchedule schedule;

  // Projection: "none", or symmetric boxes of radius
  // radius_scale * max block norm of the oracle stationary set.
  bool projection = false;
  double radius_scale = 10.0;

  long iterations = 50000;
  long cadence = 100;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::SharedIid;
  ThetaUpdateForm theta_form = ThetaUpdateForm::Printed;

  enum class InitKind { Zero, Gaussian };
  InitKind init = InitKind::Zero;
  double init_stddev = 1.0;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  /// Throws ConfigError on invalid combinations.
  void validate() const;
};

/// The published 5-state transition matrix of the 20-agent example, rows
/// renormalized to sum exactly to one. max_row_delta reports the largest
/// renormalization correction (the 4-decimal transcription is off by
/// less than 1e-3 per row).
Eigen::MatrixXd example2_transition(double* max_row_delta = nullptr);

/// 20 agents on a star graph, r_i == i, gamma = 0.5, alpha_k = 2/(k+1000),
/// q = 3 RBF features, 50000 iterations.
RunConfig preset_example2();

/// 100-state seeded random chain over prices $10..$1000, 5 agents with
/// buy/sell threshold policies, gamma = 0.5, q = 11 RBF features,
/// alpha_k = 10/(k+1000), 50000 iterations.
RunConfig preset_example1();

RunConfig preset_by_name(const std::string& name);

/// Materialized instance built from a RunConfig.
struct Experiment {
  MarkovRewardProcess mrp;
  StationaryDist dist;
  FeatureMap features;
  CommNetwork net;
  std::optional<BoxSet> boxes;
  RunConfig config;
};

Experiment build_experiment(const RunConfig& config);

MetricsSeries run_experiment(const Experiment& exp);

/// CSV schema: k,alpha,consensus_err,dist_w_star,sum_mspbe,kkt_residual.
void export_metrics_csv(const MetricsSeries& series, const std::string& path);
std::string metrics_csv(const MetricsSeries& series);

/// Summary JSON: final metrics plus the full resolved config and seed.
std::string metrics_summary_json(const MetricsSeries& series,
                                 const RunConfig& config);

MetricsSeries parse_metrics_csv(const std::string& text);

}  // namespace dgtd
