#include "dgtd/network.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <set>
#include <sstream>

namespace dgtd {

CommNetwork::CommNetwork(int n_agents, std::vector<std::pair<int, int>> edges)
    : n_agents_(n_agents), edges_(std::move(edges)) {
  W_ = Eigen::MatrixXd::Zero(n_agents_, n_agents_);
  neighbors_.resize(n_agents_);
  for (auto& [i, j] : edges_) {
    W_(i, j) = 1.0;
    W_(j, i) = 1.0;
  }
  Eigen::VectorXd deg = W_.rowwise().sum();
  L_ = Eigen::MatrixXd(deg.asDiagonal()) - W_;
  for (int i = 0; i < n_agents_; ++i)
    for (int j = 0; j < n_agents_; ++j)
      if (j != i && W_(i, j) != 0.0) neighbors_[i].push_back(j);
}

CommNetwork build_network(int n_agents, std::vector<std::pair<int, int>> edges) {
  if (n_agents < 1) throw GraphError("need at least one agent");
  std::set<std::pair<int, int>> canon;
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n_agents || j >= n_agents) {
      std::ostringstream msg;
      msg << "edge (" << i << "," << j << ") out of range";
      throw GraphError(msg.str());
    }
    if (i == j) throw GraphError("self-loops are not allowed");
    canon.insert({std::min(i, j), std::max(i, j)});
  }
  CommNetwork net(n_agents, {canon.begin(), canon.end()});

  if (n_agents > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(net.laplacian());
    if (es.eigenvalues()(1) <= 1e-10)
      throw GraphError("communication graph is not connected");
  }
  return net;
}

Eigen::VectorXd neighbor_disagreement(
    const CommNetwork& net, const std::vector<Eigen::VectorXd>& vectors, int i) {
  const auto& nbrs = net.neighbors(i);
  Eigen::VectorXd out = static_cast<double>(nbrs.size()) * vectors.at(i);
  for (int j : nbrs) out -= vectors.at(j);
  return out;
}

Eigen::VectorXd neighbor_disagreement(const CommNetwork& net,
                                      const Eigen::VectorXd& stacked, int i,
                                      int q) {
  const auto& nbrs = net.neighbors(i);
  Eigen::VectorXd out =
      static_cast<double>(nbrs.size()) * stacked.segment(i * q, q);
  for (int j : nbrs) out -= stacked.segment(j * q, q);
  return out;
}

Eigen::MatrixXd laplacian_kron(const CommNetwork& net, int q) {
  const int n = net.n_agents();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * q, n * q);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.block(i * q, j * q, q, q) =
          net.laplacian()(i, j) * Eigen::MatrixXd::Identity(q, q);
  return out;
}

CommNetwork network_preset(const std::string& name) {
  auto parse_count = [&](const std::string& s) {
    int n = std::stoi(s);
    if (n < 1) throw GraphError("preset size must be positive");
    return n;
  };
  std::vector<std::pair<int, int>> edges;
  if (name.rfind("star:", 0) == 0) {
    const int n = parse_count(name.substr(5));
    for (int i = 1; i < n; ++i) edges.push_back({0, i});
    return build_network(n, std::move(edges));
  }
  if (name.rfind("path:", 0) == 0) {
    const int n = parse_count(name.substr(5));
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    return build_network(n, std::move(edges));
  }
  if (name.rfind("complete:", 0) == 0) {
    const int n = parse_count(name.substr(9));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
    return build_network(n, std::move(edges));
  }
  if (name == "example1") {
    // Fixed 5-node associate graph used by the example-1 preset.
    return build_network(5, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4}});
  }
  throw GraphError("unknown network preset: " + name);
}

}  // namespace dgtd
