#include <doctest.h>

#include <sstream>

#include "mgb/graph.hpp"
#include "oracles.hpp"

using namespace mgb;

namespace {
Graph parse(const std::string& s) {
  std::istringstream in(s);
  return load_graph(in);
}
}  // namespace

TEST_CASE("load_graph builds P3") {
  Graph g = parse("0 1\n1 2\n");
  CHECK(g.size() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(diameter(g) == 2);
}

TEST_CASE("load_graph deduplicates") {
  Graph g = parse("0 1\n0 1\n1 0\n");
  CHECK(g.size() == 2);
  CHECK(g.edge_count() == 1);
}

TEST_CASE("load_graph errors") {
  CHECK_THROWS_AS(parse("0 1\n2 3\n"), GraphError);
  CHECK_THROWS_AS(parse("0 0\n"), GraphError);
  CHECK_THROWS_AS(parse("0 x\n"), GraphError);
  CHECK_THROWS_AS(parse("0 1 2\n"), GraphError);
  try {
    parse("0 1\n# note\n1 2 junk\n");
    FAIL("no throw");
  } catch (const GraphError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("comments and single-vertex graph") {
  Graph g = parse("# just one\n0\n");
  CHECK(g.size() == 1);
  CHECK(diameter(g) == 0);
  Graph h = parse("0 1 # trailing\n\n 1 2\n");
  CHECK(h.size() == 3);
}

TEST_CASE("distance examples") {
  Graph p3 = path_graph(3);
  CHECK(distance(p3, 0, 2) == 2);
  CHECK(distance(p3, 1, 1) == 0);
  Graph c8 = cycle_graph(8);
  auto f = oracle::floyd(c8);
  CHECK(distance(c8, 0, 5) == static_cast<std::size_t>(f[0][5]));
  CHECK(distance(c8, 0, 5) == 3);
  CHECK_THROWS_AS(distance(c8, 0, 8), GraphError);
}

TEST_CASE("geodesic tie-break") {
  CHECK(geodesic(path_graph(3), 0, 2) == Path{0, 1, 2});
  Graph c4 = cycle_graph(4);
  CHECK(geodesic(c4, 0, 2) == Path{0, 1, 2});
  CHECK(geodesic(c4, 1, 3) == Path{1, 0, 3});
  CHECK(geodesic(c4, 3, 3) == Path{3});
}

TEST_CASE("ball examples") {
  Graph p5 = path_graph(5);
  CHECK(ball(p5, 2, 1) == VertexSet{1, 2, 3});
  CHECK(ball(p5, 4, 0) == VertexSet{4});
  Graph c8 = cycle_graph(8);
  auto f = oracle::floyd(c8);
  std::size_t cnt = 0;
  for (int v = 0; v < 8; ++v) cnt += f[0][v] <= 2;
  CHECK(ball(c8, 0, 2).size() == cnt);
  CHECK(cnt == 5);
}

TEST_CASE("cone_off examples") {
  Graph p3 = path_graph(3);
  Graph c = cone_off(p3, {{0, 2}});
  CHECK(c.size() == 4);
  CHECK(distance(c, 0, 2) == 2);
  CHECK(cone_off(p3, {}) == p3);
  Graph c8 = cycle_graph(8);
  Graph k = cone_off(c8, {{0, 4}});
  auto f = oracle::floyd(k);
  int diam = 0;
  for (auto& r : f)
    for (int x : r) diam = std::max(diam, x);
  CHECK(diameter(c8) == 4);
  CHECK(diameter(k) == static_cast<std::size_t>(diam));
  // d(2,6) = 4 still avoids the apex
  CHECK(diam == 4);
  CHECK(distance(k, 0, 4) == 2);
  CHECK_THROWS_AS(cone_off(p3, {{}}), GraphError);
}

TEST_CASE("metric axioms and geodesic lengths on random graphs") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Graph g = random_connected_graph(10 + seed * 7, 0.06, seed);
    auto f = oracle::floyd(g);
    auto sg = std::make_shared<Graph>(g);
    DistanceOracle d(sg);
    DistanceOracle lazy(sg, 0);
    CHECK(lazy.mode() == DistanceOracle::Mode::kOnDemand);
    const Vertex n = static_cast<Vertex>(g.size());
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v) {
        REQUIRE(d(u, v) == f[u][v]);
        REQUIRE(lazy(u, v) == f[u][v]);
        REQUIRE(d(u, v) == d(v, u));
        REQUIRE((d(u, v) == 0) == (u == v));
        auto p = geodesic(d, u, v);
        REQUIRE(is_path(g, p));
        REQUIRE(path_length(p) == d(u, v));
        REQUIRE(p.front() == u);
        REQUIRE(p.back() == v);
      }
    for (Vertex a = 0; a < n; a += 3)
      for (Vertex b = 0; b < n; b += 2)
        for (Vertex c = 0; c < n; c += 5) REQUIRE(d(a, c) <= d(a, b) + d(b, c));
  }
}

TEST_CASE("cone_off never increases distances") {
  Graph g = random_connected_graph(30, 0.08, 7);
  Graph k = cone_off(g, {{0, 5, 9}, {3, 17}, {22}});
  auto f = oracle::floyd(g);
  auto h = oracle::floyd(k);
  for (int u = 0; u < 30; ++u)
    for (int v = 0; v < 30; ++v) CHECK(h[u][v] <= f[u][v]);
}

TEST_CASE("write_graph round trip") {
  Graph g = random_connected_graph(20, 0.1, 3);
  std::ostringstream out;
  write_graph(out, g);
  CHECK(parse(out.str()) == g);
}

TEST_CASE("multi-source bfs and induced subgraph") {
  Graph p5 = path_graph(5);
  std::vector<Vertex> src{0, 4};
  auto d = multi_source_bfs(p5, src);
  CHECK(d == std::vector<Dist>{0, 1, 2, 1, 0});
  Graph sub = p5.induced({1, 2, 4});
  CHECK(sub.size() == 3);
  CHECK(sub.edge_count() == 1);
  CHECK_FALSE(sub.connected());
}
