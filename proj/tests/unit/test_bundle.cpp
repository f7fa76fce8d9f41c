#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mgb/bundle.hpp"
#include "mgb/hyperbolicity.hpp"
#include "oracles.hpp"

using namespace mgb;
namespace fg = mgb::freegroup;

namespace {

std::string axiom_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const BundleError& e) {
    return e.axiom();
  }
  return "";
}

// Exhaustive properness table from Floyd-Warshall on the total graph and on
// every induced fiber.
std::vector<int> properness_oracle(const MetricGraphBundle& b) {
  auto dt = oracle::floyd(b.total());
  std::vector<int> best;
  for (Vertex v = 0; v < b.base().size(); ++v) {
    const auto& f = b.fiber(v);
    auto df = oracle::floyd(b.total().induced(f));
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j) {
        int t = dt[f[i]][f[j]];
        if (static_cast<int>(best.size()) <= t) best.resize(t + 1, 0);
        best[t] = std::max(best[t], df[i][j]);
      }
  }
  for (std::size_t i = 1; i < best.size(); ++i) best[i] = std::max(best[i], best[i - 1]);
  return best;
}

}  // namespace

TEST_CASE("verify_bundle axioms") {
  auto prod = generate_product_bundle(path_graph(3), path_graph(4));
  CHECK(prod.total().size() == 12);

  auto edges = prod.total().edges();
  std::vector<Edge> kept;
  for (auto [u, v] : edges)
    if (!(prod.proj(u) + prod.proj(v) == 1 && prod.proj(u) != prod.proj(v))) kept.emplace_back(u, v);
  // base edge 0-1 has no cross edges; reconnect total through a fake chord
  kept.emplace_back(0, 4 + 0);
  CHECK(axiom_of([&] {
          verify_bundle(Graph::from_edges(12, kept), prod.base(), prod.projection());
        }) == "cross-edge");
  try {
    verify_bundle(Graph::from_edges(12, kept), prod.base(), prod.projection());
  } catch (const BundleError& e) {
    CHECK(!e.witness().empty());
  }

  auto proj = prod.projection();
  proj[0] = 2;  // (0,0) now sits over 2 but is adjacent to (1,0) over 1 and (0,1) over 0
  CHECK(axiom_of([&] { verify_bundle(prod.total(), prod.base(), proj); }) == "simplicial");

  // fiber over 0 split in two
  std::vector<Edge> cut;
  for (auto [u, v] : edges)
    if (!(u == 1 && v == 2)) cut.emplace_back(u, v);
  CHECK(axiom_of([&] {
          verify_bundle(Graph::from_edges(12, cut), prod.base(), prod.projection());
        }) == "fiber-connected");

  auto p2 = prod.projection();
  for (auto& b : p2)
    if (b == 2) b = 1;
  CHECK(axiom_of([&] { verify_bundle(prod.total(), prod.base(), p2); }) == "surjective");
}

TEST_CASE("product bundle") {
  auto c4 = generate_product_bundle(path_graph(2), path_graph(2));
  CHECK(c4.total().size() == 4);
  CHECK(c4.total().edge_count() == 4);
  for (Vertex v = 0; v < 4; ++v) CHECK(c4.total().degree(v) == 2);

  Graph fiber = random_tree(9, 4);
  auto b = generate_product_bundle(grid_graph(2, 3), fiber);
  auto df = oracle::floyd(fiber);
  for (Vertex base = 0; base < 6; ++base)
    for (Vertex i = 0; i < 9; ++i)
      for (Vertex j = 0; j < 9; ++j)
        CHECK(b.fiber_distance(base * 9 + i, base * 9 + j) == static_cast<std::size_t>(df[i][j]));
  auto prof = measure_properness(b);
  std::size_t diam = diameter(fiber);
  for (std::size_t n = 0; n <= diam; ++n) CHECK(prof.f(n) == n);
  CHECK(prof.K() == std::min<std::size_t>(4, diam));
}

TEST_CASE("properness matches exhaustive oracle") {
  for (auto& b : {generate_horocycle_bundle({3, 12, 1}), generate_horocycle_bundle({2, 8, 0.5}),
                  generate_extension_bundle({3, 3, 0, {fg::parse_automorphism("a->ab,b->a")}})}) {
    auto prof = measure_properness(b);
    auto want = properness_oracle(b);
    REQUIRE(prof.exhaustive);
    CHECK(prof.table.size() == want.size());
    for (std::size_t n = 0; n < want.size(); ++n) CHECK(prof.f(n) == static_cast<std::size_t>(want[n]));
    for (std::size_t n = 1; n < prof.table.size(); ++n) CHECK(prof.table[n] >= prof.table[n - 1]);
    CHECK(prof.K() == static_cast<std::size_t>(want[std::min<std::size_t>(4, want.size() - 1)]));
  }
  auto h = generate_horocycle_bundle({4, 32, 1});
  auto prof = measure_properness(h);
  // horizontal distance can be exponential in total distance
  CHECK(prof.f(6) > 2 * prof.f(3));
}

TEST_CASE("fiber transitions") {
  auto prod = generate_product_bundle(path_graph(4), cycle_graph(5));
  auto t = fiber_transition(prod, 1, 2);
  for (std::size_t i = 0; i < t.map.size(); ++i) CHECK(t.map[i] == 2 * 5 + i);
  CHECK(t.k == 1.0);

  for (auto& b : {generate_horocycle_bundle({4, 24, 1}),
                  generate_extension_bundle({3, 4, 0, {fg::parse_automorphism("a->ab,b->a")}}),
                  generate_horocycle_bundle({3, 10, 0.5})}) {
    auto prof = measure_properness(b);
    for (auto [b1, b2] : b.base().edges()) {
      for (auto [s, e] : {std::pair{b1, b2}, std::pair{b2, b1}}) {
        auto tr = fiber_transition(b, s, e);
        CHECK(tr.k <= std::max<double>(1.0, prof.K()));
        for (std::size_t i = 0; i < tr.map.size(); ++i) {
          Vertex x = b.fiber(s)[i];
          Vertex y = tr.map[i];
          CHECK(b.proj(y) == e);
          CHECK(b.total().adjacent(x, y));
          Vertex back = b.transit(y, s);
          CHECK(b.fiber_distance(back, x) <= prof.f(2));
        }
      }
    }
  }
}

TEST_CASE("single qi constant") {
  CHECK(single_qi_constant(0, 0) == 1.0);
  CHECK(single_qi_constant(3, 3) == 1.0);
  double k = single_qi_constant(10, 1);
  CHECK(10.0 / k - k <= 1.0 + 1e-9);
  CHECK(single_qi_constant(1, 9) == doctest::Approx(4.5));
}

TEST_CASE("transitions along geodesics and the cocycle bound") {
  auto prod = generate_product_bundle(grid_graph(3, 3), path_graph(4));
  auto c = transition_along_geodesic(prod, 0, 8);
  for (std::size_t i = 0; i < c.map.size(); ++i) CHECK(c.map[i] == 8 * 4 + i);
  auto id = transition_along_geodesic(prod, 4, 4);
  CHECK(id.map == prod.fiber(4));

  auto run = [](const MetricGraphBundle& b) {
    auto prof = measure_properness(b);
    const auto& bd = b.base_distance();
    const auto& td = b.total_distance();
    const Vertex nb = static_cast<Vertex>(b.base().size());
    for (Vertex w = 0; w < nb; ++w)
      for (Vertex z = 0; z < nb; ++z) {
        auto wz = transition_along_geodesic(b, w, z);
        for (std::size_t i = 0; i < wz.map.size(); ++i)
          CHECK(td(b.fiber(w)[i], wz.map[i]) <= bd(w, z));
      }
    for (Vertex v = 0; v < nb; ++v)
      for (Vertex w = 0; w < nb; ++w)
        for (Vertex z = 0; z < nb; ++z)
          for (Vertex y : b.fiber(v)) {
            Vertex direct = b.flow(y, z);
            Vertex two = b.flow(b.flow(y, w), z);
            std::size_t bound = prof.f(bd(v, z) + bd(w, z) + bd(v, w) + 3);
            REQUIRE(b.fiber_distance(direct, two) <= bound);
          }
  };
  run(generate_horocycle_bundle({3, 12, 1}));
  run(generate_extension_bundle({2, 0, 3, {fg::Automorphism{}}}));
  run(generate_extension_bundle({3, 4, 0, {fg::parse_automorphism("a->ab,b->a")}}));
}

TEST_CASE("net approximation") {
  SUBCASE("unit grid on a segment") {
    MetricSample s;
    const std::size_t L = 6, F = 3;
    s.point_count = (L + 1) * F;
    s.base_point_count = L + 1;
    for (std::size_t p = 0; p < s.point_count; ++p) s.base_of.push_back(p / F);
    s.distance = [&](std::size_t p, std::size_t q) {
      return std::abs(double(p / F) - double(q / F)) + std::abs(double(p % F) - double(q % F));
    };
    s.base_distance = [](std::size_t u, std::size_t v) { return std::abs(double(u) - double(v)); };
    auto r = net_approximation(s, 1.0);
    CHECK(r.bundle.base().size() == L + 1);
    // base edges join points within 3
    auto f = oracle::floyd(r.bundle.base());
    for (Vertex u = 0; u <= L; ++u)
      for (Vertex v = 0; v <= L; ++v)
        CHECK(r.bundle.base().adjacent(u, v) == (u != v && std::abs(int(u) - int(v)) <= 3));
    CHECK(net_base_threshold() == 3.0);
    CHECK(net_fiber_threshold(1.0) == 9.0);
    CHECK(r.bundle.meta()["fiber_threshold"] == 9.0);
  }
  SUBCASE("hyperbolic plane sample passes verify") {
    // points (x, t) over t in {-2..2} step 0.5, x spaced 0.5 e^t along horocycles
    MetricSample s;
    std::vector<std::pair<double, double>> pts;
    std::vector<double> ts;
    for (int k = -4; k <= 4; ++k) ts.push_back(0.5 * k);
    for (std::size_t bi = 0; bi < ts.size(); ++bi)
      for (int i = -6; i <= 6; ++i) {
        pts.push_back({0.5 * i * std::exp(ts[bi]), ts[bi]});
        s.base_of.push_back(bi);
      }
    s.point_count = pts.size();
    s.base_point_count = ts.size();
    auto hyp = [&](std::size_t p, std::size_t q) {
      double x1 = pts[p].first, y1 = std::exp(pts[p].second);
      double x2 = pts[q].first, y2 = std::exp(pts[q].second);
      double a = 1 + ((x1 - x2) * (x1 - x2) + (y1 - y2) * (y1 - y2)) / (2 * y1 * y2);
      return std::acosh(a);
    };
    // scaled so that the net thresholds give a sparse graph
    s.distance = [&](std::size_t p, std::size_t q) { return 4.0 * hyp(p, q); };
    s.base_distance = [&](std::size_t u, std::size_t v) { return 4.0 * std::abs(ts[u] - ts[v]); };
    s.fiber_distance = [&](std::size_t p, std::size_t q) {
      return 4.0 * std::abs(pts[p].first - pts[q].first) / std::exp(pts[p].second);
    };
    auto r = net_approximation(s, 0.5);
    CHECK(r.bundle.total().size() > 0);
    CHECK_NOTHROW(verify_bundle(r.bundle.total(), r.bundle.base(), r.bundle.projection()));
    for (auto [x, y] : r.bundle.total().edges())
      CHECK(s.distance(r.point_of[x], r.point_of[y]) <= net_fiber_threshold(0.5));
  }
  SUBCASE("empty fiber") {
    MetricSample s;
    s.point_count = 2;
    s.base_point_count = 3;
    s.base_of = {0, 2};
    s.distance = [](std::size_t p, std::size_t q) { return p == q ? 0.0 : 2.0; };
    s.base_distance = [](std::size_t u, std::size_t v) { return std::abs(double(u) - double(v)); };
    try {
      net_approximation(s, 1.0);
      FAIL("no throw");
    } catch (const BundleError& e) {
      CHECK(e.axiom() == "surjective");
      CHECK(e.witness() == std::vector<Vertex>{1});
    }
  }
}

TEST_CASE("horocycle bundle geometry") {
  HorocycleParams p{3, 32, 1};
  auto b = generate_horocycle_bundle(p);
  auto ix = horocycle_index(p);
  CHECK(ix.levels == 3);
  CHECK(ix.half == 16);
  // t = 0 fiber is a path with 2*half edges
  const auto& fv = b.fiber_view(3);
  CHECK(fv.graph->size() == 33);
  CHECK(fv.graph->edge_count() == 32);
  CHECK(diameter(*fv.graph) == 32);
  // intrinsic distance between flow lines x = 0 and x = d is d e^{-t}
  for (int k = -3; k <= 3; ++k)
    for (double d : {2.0, 4.0, 8.0}) {
      double t = k * p.h;
      double want = d * std::exp(-t) / p.h;
      if (want > 16) continue;
      Vertex x0 = horocycle_flow_vertex(p, k, 0.0);
      Vertex xd = horocycle_flow_vertex(p, k, d);
      CHECK(std::abs(double(b.fiber_distance(x0, xd)) - want) <= 0.5 + 1e-9);
    }
  CHECK_THROWS_AS(generate_horocycle_bundle({3, 32, 0}), Error);
  CHECK_THROWS_AS(generate_horocycle_bundle({3, 32, 1.5}), Error);
  CHECK_THROWS_AS(generate_horocycle_bundle({3, 1, 1}), Error);
  CHECK(b.boundary_count() > 0);
  CHECK_FALSE(b.boundary(horocycle_flow_vertex(p, 0, 0.0)));
}

TEST_CASE("horocycle total space stays thin as it grows") {
  std::vector<double> deltas, diams;
  for (double T : {4.0, 6.0, 8.0}) {
    auto b = generate_horocycle_bundle({T, 16, 1});
    deltas.push_back(delta_four_point(b.total_distance()).delta.value());
    diams.push_back(static_cast<double>(b.total_distance().diameter()));
  }
  CHECK(deltas[2] <= deltas[1] + 1);
  CHECK(diams[2] > diams[0]);
  CHECK(deltas[2] / diams[2] < deltas[0] / diams[0]);
}

TEST_CASE("free group words and automorphisms") {
  CHECK(fg::reduce("aAbBab") == "ab");
  CHECK(fg::inverse("abA") == "aBA");
  CHECK(fg::ball(0).size() == 1);
  CHECK(fg::ball(1).size() == 5);
  CHECK(fg::ball(3).size() == 1 + 4 + 12 + 36);
  auto b2 = fg::ball(2);
  CHECK(b2[1] == "a");
  CHECK(b2[2] == "A");
  CHECK(b2[5] == "aa");

  auto phi = fg::parse_automorphism("a->ab,b->a");
  CHECK(phi.a == "ab");
  CHECK(phi.b == "a");
  // |phi^n(a)| is Fibonacci
  std::string w = "a";
  std::size_t f0 = 1, f1 = 2;
  for (int n = 1; n <= 10; ++n) {
    w = phi.apply(w);
    CHECK(w.size() == f1);
    std::size_t f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
  }
  for (const char* s : {"a->ab,b->a", "a->b,b->a", "a->aba,b->ab", "a->A,b->bA", "a->aab,b->ab", "a->BaB,b->b"}) {
    auto f = fg::parse_automorphism(s);
    auto g = f.inverse();
    for (const auto& x : fg::ball(3)) {
      CHECK(g.apply(f.apply(x)) == x);
      CHECK(f.apply(g.apply(x)) == x);
    }
  }
  CHECK_THROWS_AS(fg::parse_automorphism("a->ab"), Error);
  CHECK_THROWS_AS(fg::parse_automorphism("a->ac,b->a"), Error);
  CHECK_THROWS_AS(fg::parse_automorphism("a->aa,b->b"), Error);
  CHECK_THROWS_AS(fg::parse_automorphism("c->a,b->a"), Error);

  CHECK(fg::conjugator("baB", "a").has_value());
  CHECK(fg::reduce(*fg::conjugator("bab", "bab")) == "");
  CHECK_FALSE(fg::conjugator("ab", "aba").has_value());
  auto c = fg::conjugator("AbaB", "baBA");
  REQUIRE(c.has_value());
  CHECK(fg::reduce(*c + "baBA" + fg::inverse(*c)) == "AbaB");
  CHECK_FALSE(fg::conjugator("BAba", "abAB").has_value());

  auto id = fg::Automorphism{};
  CHECK(fg::commute_up_to_inner(phi, id));
  CHECK(fg::commute_up_to_inner(phi, phi.then(phi)));
  auto inner = fg::parse_automorphism("a->a,b->abA");
  CHECK(fg::commute_up_to_inner(phi, inner));
  CHECK_FALSE(fg::commute_up_to_inner(fg::parse_automorphism("a->ab,b->b"),
                                      fg::parse_automorphism("a->a,b->ba")));
}

TEST_CASE("extension bundles") {
  SUBCASE("identity monodromy is a product") {
    auto e = generate_extension_bundle({2, 3, 0, {fg::Automorphism{}}});
    Graph fiber = e.total().induced(e.fiber(0));
    auto p = generate_product_bundle(path_graph(4), fiber);
    CHECK(e.total() == p.total());
    CHECK(e.boundary_count() == 0);
  }
  SUBCASE("Fibonacci growth along the base") {
    auto phi = fg::parse_automorphism("a->ab,b->a");
    auto e = generate_extension_bundle({6, 5, 0, {phi}});
    // vertex id within a fiber follows the ball order
    auto words = fg::ball(6);
    std::size_t nf = words.size();
    Vertex x = 1;  // word "a" over base 0
    std::string w = "a";
    for (Vertex step = 1; step <= 3; ++step) {
      w = phi.apply(w);
      x = e.transit(x, step);
      CHECK(words[x - step * nf] == w);
      CHECK(e.fiber_distance(x, step * nf) == w.size());
    }
  }
  SUBCASE("box base") {
    auto e = generate_extension_bundle({1, 0, 4, {fg::Automorphism{}}});
    CHECK(e.base().size() == 16);
    CHECK(e.total().size() == 16 * 5);
    CHECK_THROWS_AS(generate_extension_bundle({1, 0, 3,
                                               {fg::parse_automorphism("a->ab,b->b"),
                                                fg::parse_automorphism("a->a,b->ba")}}),
                    Error);
  }
}

TEST_CASE("bundle file round trip") {
  for (auto& b : {generate_horocycle_bundle({2, 8, 1}), generate_product_bundle(path_graph(1), path_graph(3)),
                  generate_extension_bundle({2, 2, 0, {fg::parse_automorphism("a->ab,b->a")}})}) {
    std::stringstream ss;
    write_bundle(ss, b);
    auto r = read_bundle(ss);
    CHECK(r.total() == b.total());
    CHECK(r.base() == b.base());
    CHECK(r.projection() == b.projection());
    CHECK(r.boundary_count() == b.boundary_count());
    CHECK(r.total().labels() == b.total().labels());
    CHECK(r.meta() == b.meta());
  }
  std::istringstream bad("TOTAL\n0 1\nFIBER\n0 0\n1 1\n");
  CHECK_THROWS(read_bundle(bad));
}
