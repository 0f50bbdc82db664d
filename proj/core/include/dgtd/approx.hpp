#pragma once

#include <Eigen/Dense>

#include "dgtd/errors.hpp"

namespace dgtd {

/// Linear function approximation J_w = Phi * w. Row s of Phi is the
/// feature vector of state s. Full column rank is enforced on
/// construction; all oracle formulas rely on it.
class FeatureMap {
 public:
  explicit FeatureMap(Eigen::MatrixXd Phi);

  const Eigen::MatrixXd& Phi() const { return Phi_; }
  int n_states() const { return static_cast<int>(Phi_.rows()); }
  int n_features() const { return static_cast<int>(Phi_.cols()); }
  Eigen::VectorXd row(int s) const { return Phi_.row(s).transpose(); }

 private:
  Eigen::MatrixXd Phi_;
};

/// Gaussian RBF parameterization over a scalar state coordinate.
struct RbfSpec {
  Eigen::VectorXd centers;       // strictly increasing
  double width = 1.0;            // > 0
  Eigen::VectorXd state_values;  // coordinate x(s) per state index

  /// Evenly spaced centers over [values.min(), values.max()], width equal
  /// to the spacing between adjacent centers (single center: the full range).
  static RbfSpec evenly_spaced(const Eigen::VectorXd& state_values, int q,
                               double width_scale = 1.0);
};

/// Phi[s][j] = exp(-(x(s)-c_j)^2 / (2 width^2)). Throws RankError if the
/// result is column-rank deficient.
FeatureMap rbf_features(const RbfSpec& spec, int n_states);

/// Pi = Phi (Phi' D Phi)^{-1} Phi' D, the D-weighted projection onto
/// span(Phi). d is the diagonal of D.
Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& Phi,
                                  const Eigen::VectorXd& d);

/// phi(s)' w.
double value_estimate(const FeatureMap& features, const Eigen::VectorXd& w,
                      int s);

}  // namespace dgtd
