#include "sidm/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "sidm/error.hpp"

namespace sidm {

SpatialGraph::SpatialGraph(int n_regions, std::vector<Edge> edges) : n_regions_(n_regions) {
  if (n_regions < 1) throw DataError("graph: n_regions must be >= 1");
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_regions || b >= n_regions) {
      std::ostringstream msg;
      msg << "graph: edge (" << a << ", " << b << ") outside [0, " << n_regions << ")";
      throw DataError(msg.str());
    }
    if (a == b) throw DataError("graph: self-loop at region " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  degrees_.assign(n_regions_, 0);
  neighbours_.assign(n_regions_, {});
  for (auto [a, b] : edges_) {
    ++degrees_[a];
    ++degrees_[b];
    neighbours_[a].push_back(b);
    neighbours_[b].push_back(a);
  }
  for (auto& nb : neighbours_) std::sort(nb.begin(), nb.end());
}

Eigen::SparseMatrix<double> SpatialGraph::adjacency() const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * edges_.size());
  for (auto [a, b] : edges_) {
    trip.emplace_back(a, b, 1.0);
    trip.emplace_back(b, a, 1.0);
  }
  Eigen::SparseMatrix<double> w(n_regions_, n_regions_);
  w.setFromTriplets(trip.begin(), trip.end());
  return w;
}

Eigen::SparseMatrix<double> SpatialGraph::laplacian() const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * edges_.size() + n_regions_);
  for (int k = 0; k < n_regions_; ++k) trip.emplace_back(k, k, degrees_[k]);
  for (auto [a, b] : edges_) {
    trip.emplace_back(a, b, -1.0);
    trip.emplace_back(b, a, -1.0);
  }
  Eigen::SparseMatrix<double> l(n_regions_, n_regions_);
  l.setFromTriplets(trip.begin(), trip.end());
  return l;
}

SpatialGraph SpatialGraph::grid(int rows, int cols) {
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      int k = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(k, k + 1);
      if (r + 1 < rows) edges.emplace_back(k, k + cols);
    }
  return SpatialGraph(rows * cols, std::move(edges));
}

SpatialGraph load_adjacency(std::string_view text, int n_regions) {
  if (n_regions < 1) throw DataError("adjacency: n_regions must be >= 1");
  std::vector<SpatialGraph::Edge> edges;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw DataError("adjacency line " + std::to_string(line_no) + ": " + what);
    };
    if (tokens.size() != 2) fail("expected two region indices");
    int ab[2];
    for (int i = 0; i < 2; ++i) {
      std::size_t used = 0;
      try {
        ab[i] = std::stoi(tokens[i], &used);
      } catch (const std::exception&) {
        fail("malformed region index '" + tokens[i] + "'");
      }
      if (used != tokens[i].size()) fail("malformed region index '" + tokens[i] + "'");
      if (ab[i] < 1 || ab[i] > n_regions)
        fail("region index " + tokens[i] + " out of range [1, " + std::to_string(n_regions) + "]");
    }
    if (ab[0] == ab[1]) fail("self-loop at region " + tokens[0]);
    edges.emplace_back(ab[0] - 1, ab[1] - 1);
  }
  return SpatialGraph(n_regions, std::move(edges));
}

SpatialGraph load_adjacency_file(const std::filesystem::path& path, int n_regions) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open adjacency file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_adjacency(buf.str(), n_regions);
}

std::string format_adjacency(const SpatialGraph& g) {
  std::ostringstream out;
  out << "# " << g.n_regions() << " regions, 1-indexed edge list\n";
  for (auto [a, b] : g.edges()) out << a + 1 << ' ' << b + 1 << '\n';
  return out.str();
}

bool is_connected(const SpatialGraph& g) {
  std::vector<char> seen(g.n_regions(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int k = stack.back();
    stack.pop_back();
    for (int l : g.neighbours(k))
      if (!seen[l]) {
        seen[l] = 1;
        ++reached;
        stack.push_back(l);
      }
  }
  return reached == g.n_regions();
}

std::vector<int> isolated_regions(const SpatialGraph& g) {
  std::vector<int> out;
  for (int k = 0; k < g.n_regions(); ++k)
    if (g.degrees()[k] == 0) out.push_back(k);
  return out;
}

}  // namespace sidm
