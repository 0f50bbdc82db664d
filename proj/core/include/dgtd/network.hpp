#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "dgtd/errors.hpp"

namespace dgtd {

/// Undirected connected communication graph with Laplacian L = H - W.
/// Edge list is canonical; W, H, L are derived. Immutable.
class CommNetwork {
 public:
  CommNetwork(int n_agents, std::vector<std::pair<int, int>> edges);

  int n_agents() const { return n_agents_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const Eigen::MatrixXd& adjacency() const { return W_; }
  const Eigen::MatrixXd& laplacian() const { return L_; }
  const std::vector<int>& neighbors(int i) const { return neighbors_.at(i); }
  int degree(int i) const { return static_cast<int>(neighbors_.at(i).size()); }

 private:
  int n_agents_;
  std::vector<std::pair<int, int>> edges_;
  Eigen::MatrixXd W_;
  Eigen::MatrixXd L_;
  std::vector<std::vector<int>> neighbors_;
};

/// Validates endpoints, deduplicates edges, rejects self-loops and
/// disconnected graphs (second-smallest Laplacian eigenvalue <= 1e-10).
CommNetwork build_network(int n_agents, std::vector<std::pair<int, int>> edges);

/// |N_i| x_i - sum_{j in N_i} x_j, i.e. row i of (L (x) I_q) applied to the
/// stacked vectors.
Eigen::VectorXd neighbor_disagreement(
    const CommNetwork& net, const std::vector<Eigen::VectorXd>& vectors, int i);

/// As above, with the per-agent vectors stacked into one vector of length
/// n_agents * q.
Eigen::VectorXd neighbor_disagreement(const CommNetwork& net,
                                      const Eigen::VectorXd& stacked, int i,
                                      int q);

/// L (x) I_q.
Eigen::MatrixXd laplacian_kron(const CommNetwork& net, int q);

/// Presets: "star:N", "path:N", "complete:N", "example1" (the fixed 5-node
/// graph used by the example-1 preset). Also accepts a plain edge-list file
/// path via load_graph below.
CommNetwork network_preset(const std::string& name);

}  // namespace dgtd
