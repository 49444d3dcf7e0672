#include <doctest.h>

#include <Eigen/Dense>

#include "sidm/error.hpp"
#include "sidm/graph.hpp"

using namespace sidm;

TEST_CASE("load_adjacency builds the smallest path graph") {
  const SpatialGraph g = load_adjacency("1 2\n2 3", 3);
  CHECK(g.n_regions() == 3);
  CHECK(g.degrees() == std::vector<int>{1, 2, 1});
  CHECK(g.edges().size() == 2);
}

TEST_CASE("duplicate edges collapse in either orientation") {
  const SpatialGraph g = load_adjacency("1 2\n2 1", 2);
  CHECK(g.edges().size() == 1);
  CHECK(g.degrees() == std::vector<int>{1, 1});
}

TEST_CASE("out-of-range, self-loop and malformed lines report their line") {
  try {
    load_adjacency("1 4", 3);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(load_adjacency("# header\n2 2", 3), DataError);
  try {
    load_adjacency("1 2\n\n3", 3);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_adjacency("1 x", 3), DataError);
  CHECK_THROWS_AS(load_adjacency("1 2 3", 3), DataError);
}

TEST_CASE("comments and blank lines are ignored") {
  const SpatialGraph g = load_adjacency("# lattice\n1 2  # first\n\n  2 3\n", 3);
  CHECK(g.edges().size() == 2);
}

TEST_CASE("connectivity") {
  CHECK(is_connected(load_adjacency("1 2\n2 3", 3)));
  CHECK_FALSE(is_connected(SpatialGraph(2, {})));
  CHECK(is_connected(SpatialGraph::grid(5, 5)));
  CHECK(isolated_regions(SpatialGraph(3, {{0, 1}})) == std::vector<int>{2});
}

TEST_CASE("adjacency is symmetric with zero diagonal and row sums equal degrees") {
  for (const SpatialGraph& g : {SpatialGraph::grid(4, 5), load_adjacency("1 2\n2 3\n1 3\n4 5", 6)}) {
    const Eigen::MatrixXd w = Eigen::MatrixXd(g.adjacency());
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.diagonal().cwiseAbs().maxCoeff() == 0.0);
    for (int k = 0; k < g.n_regions(); ++k) {
      CHECK(w.row(k).sum() == g.degrees()[k]);
      CHECK(static_cast<int>(g.neighbours(k).size()) == g.degrees()[k]);
    }
    const Eigen::MatrixXd l = Eigen::MatrixXd(g.laplacian());
    CHECK((l.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("grid has rook adjacency") {
  const SpatialGraph g = SpatialGraph::grid(5, 5);
  CHECK(g.edges().size() == 40);
  CHECK(g.degrees()[0] == 2);
  CHECK(g.degrees()[12] == 4);
}

TEST_CASE("format_adjacency round-trips") {
  const SpatialGraph g = SpatialGraph::grid(3, 4);
  const SpatialGraph h = load_adjacency(format_adjacency(g), 12);
  CHECK(h.edges() == g.edges());
}
