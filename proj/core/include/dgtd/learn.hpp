#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dgtd/approx.hpp"
#include "dgtd/mrp.hpp"
#include "dgtd/network.hpp"
#include "dgtd/oracle.hpp"

namespace dgtd {

/// Diminishing-step rule a/(k+b) (satisfies sum alpha = inf,
/// sum alpha^2 < inf) or a constant step, which is outside the theory and
/// only intended for diagnostics.
struct StepSchedule {
  enum class Kind { Harmonic, Constant };
  Kind kind = Kind::Harmonic;
  double a = 1.0;
  double b = 1000.0;
  double c = 1e-3;

  double alpha(long k) const {
    return kind == Kind::Harmonic ? a / (static_cast<double>(k) + b) : c;
  }
  static StepSchedule harmonic(double a, double b);
  static StepSchedule constant(double c);
};

enum class SamplingMode { SharedIid, IndependentIid, SharedTrajectory };

/// Which stochastic estimate the theta update uses. Algorithm's printed
/// form keeps phi phi' theta + phi phi' w - gamma phi phi'' w as separate
/// terms; the factored form phi (phi - gamma phi')' w is equal in
/// expectation with different variance.
enum class ThetaUpdateForm { Printed, Factored };

struct DgtdState {
  StackedState x;
  long k = 0;
  int chain_state = 0;  // SharedTrajectory mode only
};

struct DgtdProblem {
  const MarkovRewardProcess& mrp;
  const StationaryDist& dist;
  const FeatureMap& features;
  const CommNetwork& net;
  std::optional<BoxSet> boxes;  // nullopt: no projection
  StepSchedule schedule;
  SamplingMode mode = SamplingMode::SharedIid;
  ThetaUpdateForm theta_form = ThetaUpdateForm::Printed;
  double divergence_bound = 1e12;
};

/// One synchronous round of the distributed GTD update: every agent reads
/// neighbor values from iteration k, applies the four half-step updates,
/// then clamps each block to its box.
void dgtd_step(DgtdState& state, const DgtdProblem& prob, Rng& rng);

/// Fixed-alpha variant used by the drift diagnostics: executes the update
/// with the provided alpha instead of the schedule and does not clamp.
/// Returns the raw increment (x_{k+1/2} - x_k) / alpha.
Eigen::VectorXd dgtd_increment(const DgtdState& state, const DgtdProblem& prob,
                               Rng& rng);

struct MetricsRecord {
  long k = 0;
  double alpha = 0.0;
  double consensus_err = 0.0;
  double dist_w_star = 0.0;
  double sum_mspbe = 0.0;
  double kkt_residual = 0.0;
};

struct MetricsSeries {
  std::vector<MetricsRecord> records;
  StackedState final_state;
  Eigen::VectorXd w_star;  // oracle reference used for dist_w_star
};

struct RunSpec {
  long iterations = 50000;
  long cadence = 100;
  std::uint64_t seed = 0;
  StackedState init;  // zero unless configured otherwise
};

/// Runs dgtd_step for the configured iterations, recording metrics every
/// cadence steps (and at the final iterate).
MetricsSeries run_dgtd(const DgtdProblem& prob, const RunSpec& spec);

/// N=1 reduction of run_dgtd (single-node network, Laplacian zero).
MetricsSeries gtd_single(const MarkovRewardProcess& mrp,
                         const StationaryDist& dist, const FeatureMap& features,
                         const Eigen::VectorXd& reward,
                         const StepSchedule& schedule, const RunSpec& spec);

/// Semi-gradient TD(0): w += alpha phi (r + gamma phi'^T w - phi^T w).
void td0_step(Eigen::VectorXd& w, const FeatureMap& features,
              const Transition& tr, int agent, double gamma, double alpha);

/// Residual-gradient update with two independent next-state samples.
void residual_step(Eigen::VectorXd& w, const FeatureMap& features,
                   const Transition& tr, int s_next2, int agent, double gamma,
                   double alpha);

/// Componentwise clamp onto the box.
Eigen::VectorXd clamp_box(const Eigen::VectorXd& x, const BoxSet& boxes);

}  // namespace dgtd
