#include "dgtd/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "dgtd/errors.hpp"

namespace dgtd {

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw IoError("malformed matrix header; expected `rows cols`");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(is >> m(i, j)))
        throw IoError("matrix body ended early");
  return m;
}

void save_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_matrix(os, m);
  if (!os) throw IoError("write failed: " + path);
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path);
  return read_matrix(is);
}

void save_graph(const std::string& path,
                const std::vector<std::pair<int, int>>& edges) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (const auto& [i, j] : edges) os << i << ' ' << j << '\n';
  if (!os) throw IoError("write failed: " + path);
}

std::vector<std::pair<int, int>> load_graph(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    int i = 0, j = 0;
    if (!(ls >> i)) continue;  // skip blank lines
    if (!(ls >> j)) throw IoError("malformed graph line: " + line);
    edges.emplace_back(i, j);
  }
  return edges;
}

}  // namespace dgtd
