#pragma once

#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

namespace sidm {

/// Region adjacency over K areal units. Regions are 0-indexed in memory and
/// 1-indexed in edge-list files. Immutable once built.
class SpatialGraph {
 public:
  using Edge = std::pair<int, int>;

  /// Edges are 0-indexed; duplicates (in either orientation) collapse.
  /// Throws DataError on self-loops or out-of-range indices.
  SpatialGraph(int n_regions, std::vector<Edge> edges);

  int n_regions() const { return n_regions_; }
  /// Unique edges with first < second, sorted.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& degrees() const { return degrees_; }
  const std::vector<int>& neighbours(int k) const { return neighbours_[k]; }

  /// Symmetric 0/1 adjacency W.
  Eigen::SparseMatrix<double> adjacency() const;
  /// Graph Laplacian D - W (the ICAR structure matrix).
  Eigen::SparseMatrix<double> laplacian() const;

  /// Rook-adjacency lattice, row-major region numbering.
  static SpatialGraph grid(int rows, int cols);

 private:
  int n_regions_;
  std::vector<Edge> edges_;
  std::vector<int> degrees_;
  std::vector<std::vector<int>> neighbours_;
};

/// Parses an edge list: one "k l" pair per line, 1-indexed, '#' starts a comment.
/// Errors carry the offending line number.
SpatialGraph load_adjacency(std::string_view text, int n_regions);
SpatialGraph load_adjacency_file(const std::filesystem::path& path, int n_regions);

std::string format_adjacency(const SpatialGraph& g);

bool is_connected(const SpatialGraph& g);
std::vector<int> isolated_regions(const SpatialGraph& g);

}  // namespace sidm
