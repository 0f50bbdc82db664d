#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dgtd {

/// Dense row-major decimal text with a one-line `rows cols` header.
void save_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::string& path);
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& is);

/// Graph file: one `i j` pair per line, 0-indexed.
void save_graph(const std::string& path,
                const std::vector<std::pair<int, int>>& edges);
std::vector<std::pair<int, int>> load_graph(const std::string& path);

}  // namespace dgtd
