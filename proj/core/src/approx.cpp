#include "dgtd/approx.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace dgtd {

namespace {
void check_rank(const Eigen::MatrixXd& Phi) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Phi);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (smallest <= tol::rank_ratio * sv(0)) {
    std::ostringstream msg;
    msg << "feature matrix is column-rank deficient: smallest singular value "
        << smallest << " vs largest " << sv(0);
    throw RankError(msg.str());
  }
}
}  // namespace

FeatureMap::FeatureMap(Eigen::MatrixXd Phi) : Phi_(std::move(Phi)) {
  if (Phi_.cols() > Phi_.rows())
    throw RankError("more features than states cannot have full column rank");
  check_rank(Phi_);
}

RbfSpec RbfSpec::evenly_spaced(const Eigen::VectorXd& state_values, int q,
                               double width_scale) {
  if (q < 1) throw ConfigError("need at least one RBF center");
  RbfSpec spec;
  spec.state_values = state_values;
  const double lo = state_values.minCoeff();
  const double hi = state_values.maxCoeff();
  spec.centers.resize(q);
  if (q == 1) {
    spec.centers(0) = (lo + hi) / 2.0;
    spec.width = std::max(hi - lo, 1.0);
  } else {
    const double spacing = (hi - lo) / static_cast<double>(q - 1);
    for (int j = 0; j < q; ++j) spec.centers(j) = lo + spacing * j;
    spec.width = spacing;
  }
  spec.width *= width_scale;
  return spec;
}

FeatureMap rbf_features(const RbfSpec& spec, int n_states) {
  if (spec.width <= 0.0) throw ConfigError("RBF width must be positive");
  for (Eigen::Index j = 1; j < spec.centers.size(); ++j)
    if (spec.centers(j) <= spec.centers(j - 1))
      throw ConfigError("RBF centers must be strictly increasing");
  if (spec.state_values.size() != n_states)
    throw ConfigError("state_values length != n_states");

  const auto q = spec.centers.size();
  Eigen::MatrixXd Phi(n_states, q);
  const double denom = 2.0 * spec.width * spec.width;
  for (int s = 0; s < n_states; ++s)
    for (Eigen::Index j = 0; j < q; ++j) {
      const double dx = spec.state_values(s) - spec.centers(j);
      Phi(s, j) = std::exp(-dx * dx / denom);
    }
  return FeatureMap(std::move(Phi));  // rank checked in the constructor
}

Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& Phi,
                                  const Eigen::VectorXd& d) {
  if (d.minCoeff() <= 0.0) throw ConfigError("D must be positive definite");
  Eigen::MatrixXd DPhi = d.asDiagonal() * Phi;
  Eigen::MatrixXd gram = Phi.transpose() * DPhi;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw RankError("Phi' D Phi is singular");
  Eigen::MatrixXd Pi = Phi * ldlt.solve(DPhi.transpose());
  if ((Pi * Phi - Phi).norm() > tol::projection * std::max(1.0, Phi.norm()))
    throw RankError("projection residual check failed");
  return Pi;
}

double value_estimate(const FeatureMap& features, const Eigen::VectorXd& w,
                      int s) {
  return features.Phi().row(s).dot(w);
}

}  // namespace dgtd
