#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mgb/flaring.hpp"
#include "mgb/util.hpp"
#include "oracles.hpp"
#include "report_json.hpp"

using namespace mgb;
namespace fg = mgb::freegroup;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome* o;
  void fail(const std::string& why) {
    if (o->pass) o->detail = why;
    o->pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// BFS distance rows computed here, not through the library oracle.
std::vector<std::vector<int>> bfs_all(const Graph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<Vertex> q{static_cast<Vertex>(s)};
    d[s][s] = 0;
    for (std::size_t h = 0; h < q.size(); ++h)
      for (Vertex w : g.neighbors(q[h]))
        if (d[s][w] < 0) {
          d[s][w] = d[s][q[h]] + 1;
          q.push_back(w);
        }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Triangle oracle on the 4-fold edge subdivision. Every quarter point of the
// metric graph is a vertex there, which is where slimness, insize and
// thinness attain their maxima.

struct Subdivided {
  int n = 0;
  std::vector<std::vector<int>> adj;     // original graph
  std::vector<std::vector<int>> d;       // original distances
  std::vector<std::vector<int>> sd;      // quarter distances
  std::map<std::pair<int, int>, int> edge_id;

  explicit Subdivided(const Graph& g) {
    n = static_cast<int>(g.size());
    auto edges = g.edges();
    const int ns = n + 3 * static_cast<int>(edges.size());
    std::vector<std::vector<int>> sadj(ns);
    adj.assign(n, {});
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      int a = edges[e].first, b = edges[e].second;
      edge_id[{a, b}] = e;
      adj[a].push_back(b);
      adj[b].push_back(a);
      int chain[5] = {a, n + 3 * e, n + 3 * e + 1, n + 3 * e + 2, b};
      for (int i = 0; i < 4; ++i) {
        sadj[chain[i]].push_back(chain[i + 1]);
        sadj[chain[i + 1]].push_back(chain[i]);
      }
    }
    d = oracle::floyd(g);
    sd.assign(ns, std::vector<int>(ns, -1));
    for (int s = 0; s < ns; ++s) {
      std::vector<int> q{s};
      sd[s][s] = 0;
      for (std::size_t h = 0; h < q.size(); ++h)
        for (int w : sadj[q[h]])
          if (sd[s][w] < 0) {
            sd[s][w] = sd[s][q[h]] + 1;
            q.push_back(w);
          }
    }
  }

  std::vector<int> quarter_path(const std::vector<int>& p) const {
    std::vector<int> out{p.front()};
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      int a = p[i], b = p[i + 1];
      int e = edge_id.at({std::min(a, b), std::max(a, b)});
      if (a < b)
        out.insert(out.end(), {n + 3 * e, n + 3 * e + 1, n + 3 * e + 2});
      else
        out.insert(out.end(), {n + 3 * e + 2, n + 3 * e + 1, n + 3 * e});
      out.push_back(b);
    }
    return out;
  }
};

struct QuarterMeasure {
  int slim = 0, insize = 0, thin = 0;  // in quarter units
};

QuarterMeasure measure_quarter(const Subdivided& s, const std::array<int, 3>& x,
                               const std::array<std::vector<int>, 3>& side) {
  QuarterMeasure m;
  auto near = [&](int p, const std::vector<int>& a, const std::vector<int>& b) {
    int best = 1 << 28;
    for (int y : a) best = std::min(best, s.sd[p][y]);
    for (int y : b) best = std::min(best, s.sd[p][y]);
    return best;
  };
  for (int k = 0; k < 3; ++k)
    for (int p : side[k]) m.slim = std::max(m.slim, near(p, side[(k + 1) % 3], side[(k + 2) % 3]));

  // side[k] joins the corners other than x[k]; from_start is that side read
  // from corner c.
  auto from = [&](int k, int c) {
    std::vector<int> p = side[k];
    if (p.front() != x[c]) std::reverse(p.begin(), p.end());
    return p;
  };
  auto gromov4 = [&](int i, int j, int l) {
    return 2 * (s.d[x[i]][x[j]] + s.d[x[i]][x[l]] - s.d[x[j]][x[l]]);
  };
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k) {
    const int i = k == 0 ? 1 : 0, j = k == 2 ? 1 : 2;
    c[k] = from(k, i)[gromov4(i, j, k)];
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) m.insize = std::max(m.insize, s.sd[c[a]][c[b]]);

  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, l = (i + 2) % 3;
    auto p = from(l, i), q = from(j, i);
    const int tau = gromov4(i, j, l);
    for (int t = 0; t <= tau; ++t) m.thin = std::max(m.thin, s.sd[p[t]][q[t]]);
  }
  return m;
}

struct EnumeratedBounds {
  int delta = 0;  // quarter units
  int insize = 0, thin = 0;
  bool bounded = true;
  std::size_t triangles = 0;
};

EnumeratedBounds enumerate_triangles(const Graph& g) {
  Subdivided s(g);
  const int n = s.n;
  std::vector<std::vector<std::vector<std::vector<int>>>> geo(
      n, std::vector<std::vector<std::vector<int>>>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (auto& p : oracle::geodesics(s.adj, s.d, a, b)) geo[a][b].push_back(s.quarter_path(p));
  std::vector<QuarterMeasure> all;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = b; c < n; ++c)
        for (const auto& p : geo[b][c])
          for (const auto& q : geo[a][c])
            for (const auto& r : geo[a][b]) all.push_back(measure_quarter(s, {a, b, c}, {p, q, r}));
  EnumeratedBounds out;
  for (const auto& m : all) out.delta = std::max(out.delta, m.slim);
  for (const auto& m : all) {
    out.insize = std::max(out.insize, m.insize);
    out.thin = std::max(out.thin, m.thin);
    if (m.insize > 4 * out.delta || m.thin > 6 * out.delta) out.bounded = false;
  }
  out.triangles = all.size();
  return out;
}

std::vector<MetricGraphBundle> generator_bundles() {
  auto phi = fg::parse_automorphism("a->ab,b->a");
  return {
      generate_product_bundle(path_graph(6), cycle_graph(7)),
      generate_product_bundle(grid_graph(3, 3), path_graph(5)),
      generate_product_bundle(path_graph(5), random_tree(18, 3)),
      generate_horocycle_bundle({3, 16, 1}),
      generate_horocycle_bundle({4, 16, 1}),
      generate_horocycle_bundle({6, 32, 1}),
      generate_horocycle_bundle({3, 10, 0.5}),
      generate_extension_bundle({2, 4, 0, {phi}}),
      generate_extension_bundle({3, 3, 0, {phi}}),
      generate_extension_bundle({1, 0, 4, {fg::Automorphism{}}}),
      generate_extension_bundle({2, 0, 3, {fg::Automorphism{}}}),
  };
}

// ---------------------------------------------------------------------------

Outcome criterion_triangle_bounds() {
  Outcome o;
  Check c{&o};
  std::size_t graphs = 0, triangles = 0;
  std::vector<Graph> small;
  for (std::uint64_t s = 1; s <= 200; ++s) {
    std::size_t n = 4 + s % 11;
    double p = 0.15 + 0.05 * static_cast<double>(s % 7);
    small.push_back(random_connected_graph(n, p, 1000 + s));
  }
  for (std::size_t n = 3; n <= 12; ++n) small.push_back(cycle_graph(n));
  small.push_back(path_graph(10));
  small.push_back(grid_graph(3, 4));
  small.push_back(random_tree(14, 5));

  for (const auto& g : small) {
    auto e = enumerate_triangles(g);
    auto r = delta_slim(DistanceOracle(std::make_shared<Graph>(g)));
    ++graphs;
    triangles += e.triangles;
    if (!e.bounded) c.fail("oracle triangle exceeds insize/thinness bound on n=" + std::to_string(g.size()));
    if (r.mode != "exact") c.fail("small graph not measured exactly");
    if (r.delta_slim.twice() * 2 != e.delta || r.insize_max.twice() * 2 != e.insize ||
        r.thin_max.twice() * 2 != e.thin)
      c.fail("library maxima differ from enumeration on n=" + std::to_string(g.size()));
  }

  std::vector<Graph> large = {grid_graph(8, 8), cycle_graph(40), random_tree(300, 4),
                              random_connected_graph(200, 0.02, 77)};
  for (const auto& b : generator_bundles()) {
    large.push_back(b.total());
    large.push_back(b.base());
    large.push_back(b.total().induced(b.fiber(b.base().size() / 2)));
  }
  for (const auto& g : large) {
    if (!g.connected()) continue;
    auto r = delta_slim(DistanceOracle(std::make_shared<Graph>(g)));
    ++graphs;
    triangles += r.triangles;
    if (r.insize_max.twice() > 4 * r.delta_slim.twice() || r.thin_max.twice() > 6 * r.delta_slim.twice())
      c.fail("generator instance with " + std::to_string(g.size()) + " vertices exceeds bound");
  }
  if (o.pass)
    o.detail = std::to_string(graphs) + " graphs, " + std::to_string(triangles) + " triangles";
  return o;
}

Outcome criterion_oracle_equivalence() {
  Outcome o;
  Check c{&o};
  std::size_t four = 0, slim = 0;
  std::vector<Graph> mid = {grid_graph(5, 10), grid_graph(7, 7), cycle_graph(50), random_tree(50, 8),
                            generate_product_bundle(path_graph(4), cycle_graph(10)).total(),
                            generate_horocycle_bundle({2, 8, 1}).total(),
                            generate_extension_bundle({1, 0, 3, {fg::Automorphism{}}}).total()};
  for (std::uint64_t s = 1; s <= 40; ++s)
    mid.push_back(random_connected_graph(10 + s, 0.04 + 0.01 * static_cast<double>(s % 9), 300 + s));
  for (const auto& g : mid) {
    if (g.size() > 50) continue;
    auto r = delta_four_point(DistanceOracle(std::make_shared<Graph>(g)));
    ++four;
    if (!r.exact || r.delta.twice() != oracle::four_point_twice(g))
      c.fail("four-point mismatch on " + std::to_string(g.size()) + " vertices");
  }
  std::vector<Graph> small;
  for (std::uint64_t s = 1; s <= 120; ++s)
    small.push_back(random_connected_graph(3 + s % 10, 0.2 + 0.04 * static_cast<double>(s % 8), 700 + s));
  small.push_back(grid_graph(3, 4));
  small.push_back(cycle_graph(12));
  small.push_back(generate_product_bundle(path_graph(3), path_graph(4)).total());
  for (const auto& g : small) {
    TrianglePolicy p;
    p.mode = SlimMode::kExact;
    auto r = delta_slim(DistanceOracle(std::make_shared<Graph>(g)), p);
    ++slim;
    if (r.mode != "exact" || r.delta_slim.twice() != oracle::slim_twice_exhaustive(g))
      c.fail("slim mismatch on " + std::to_string(g.size()) + " vertices");
  }
  if (o.pass) o.detail = std::to_string(four) + " four-point, " + std::to_string(slim) + " slim";
  return o;
}

// f(N) from BFS in the total space and inside each fiber.
std::vector<std::size_t> properness_table(const MetricGraphBundle& b) {
  const auto& g = b.total();
  std::vector<std::size_t> best;
  for (Vertex w = 0; w < b.base().size(); ++w) {
    const auto& fib = b.fiber(w);
    for (Vertex x : fib) {
      std::vector<int> dt(g.size(), -1), df(g.size(), -1);
      std::vector<Vertex> q{x};
      dt[x] = 0;
      for (std::size_t h = 0; h < q.size(); ++h)
        for (Vertex y : g.neighbors(q[h]))
          if (dt[y] < 0) {
            dt[y] = dt[q[h]] + 1;
            q.push_back(y);
          }
      q = {x};
      df[x] = 0;
      for (std::size_t h = 0; h < q.size(); ++h)
        for (Vertex y : g.neighbors(q[h]))
          if (df[y] < 0 && b.proj(y) == w) {
            df[y] = df[q[h]] + 1;
            q.push_back(y);
          }
      for (Vertex y : fib) {
        std::size_t t = static_cast<std::size_t>(dt[y]);
        if (best.size() <= t) best.resize(t + 1, 0);
        best[t] = std::max<std::size_t>(best[t], static_cast<std::size_t>(df[y]));
      }
    }
  }
  for (std::size_t i = 1; i < best.size(); ++i) best[i] = std::max(best[i], best[i - 1]);
  return best;
}

Outcome criterion_formulas() {
  Outcome o;
  Check c{&o};
  std::size_t instances = 0, cocycle_checks = 0, lifts = 0;
  for (const auto& b : generator_bundles()) {
    if (b.total().size() > 2000) continue;
    ++instances;
    const std::string tag = b.meta().value("generator", std::string("?")) + "/" +
                            std::to_string(b.total().size());
    auto f = properness_table(b);
    auto fo = [&](std::size_t n) { return f[std::min(n, f.size() - 1)]; };
    auto prof = measure_properness(b);
    if (!prof.exhaustive) c.fail(tag + ": properness not exhaustive");
    for (std::size_t n = 0; n < f.size() + 4; ++n)
      if (prof.f(n) != fo(n)) c.fail(tag + ": f(" + std::to_string(n) + ") differs");
    const std::size_t K = fo(4);
    if (prof.K() != K) c.fail(tag + ": K != f(4)");

    BoundedFlaringPolicy bp;
    bp.samples = 200;
    for (std::size_t k : {1, 2}) {
      auto fl = bounded_flaring_profile(b, prof, k, bp);
      if (fl.K != K) c.fail(tag + ": profile K");
      for (std::size_t C = 0; C < fl.g.size(); ++C)
        if (fl.g[C] != K + 2 * fo(C + 2) || flaring_g(prof, C) != fl.g[C]) c.fail(tag + ": g(C)");
      const double g2k = static_cast<double>(K + 2 * fo(2 * k + 2));
      double want = 1.0;
      for (std::size_t N = 0; N < fl.mu.size(); ++N, want *= g2k)
        if (fl.mu[N] != want || flaring_mu(prof, k, N) != want) c.fail(tag + ": mu(N)");
    }

    // net thresholds on the instance's own metric
    {
      const auto& td = b.total_distance();
      const auto& bd = b.base_distance();
      MetricSample s;
      s.point_count = b.total().size();
      s.base_point_count = b.base().size();
      s.base_of.assign(b.projection().begin(), b.projection().end());
      s.distance = [&](std::size_t x, std::size_t y) { return double(td(Vertex(x), Vertex(y))); };
      s.base_distance = [&](std::size_t u, std::size_t v) { return double(bd(Vertex(u), Vertex(v))); };
      s.fiber_distance = [&](std::size_t x, std::size_t y) {
        return double(b.fiber_distance(Vertex(x), Vertex(y)));
      };
      for (double cc : {0.5, 1.0}) {
        auto r = net_approximation(s, cc);
        const auto& nb = r.bundle.base();
        for (Vertex u = 0; u < nb.size(); ++u)
          for (Vertex v = u + 1; v < nb.size(); ++v)
            if (nb.adjacent(u, v) != (bd(Vertex(r.base_point_of[u]), Vertex(r.base_point_of[v])) <= 3))
              c.fail(tag + ": base net threshold");
        const auto& nt = r.bundle.total();
        for (Vertex x = 0; x < nt.size(); ++x)
          for (Vertex y = x + 1; y < nt.size(); ++y) {
            Vertex bx = r.bundle.proj(x), by = r.bundle.proj(y);
            bool allowed = bx == by || nb.adjacent(bx, by);
            bool close = td(Vertex(r.point_of[x]), Vertex(r.point_of[y])) <= 6 * cc + 3;
            if (nt.adjacent(x, y) != (allowed && close)) c.fail(tag + ": fiber net threshold");
          }
      }
    }

    // lifts of base geodesics along measured sections
    SectionFactory sf(b);
    Rng rng(17);
    auto bdist = bfs_all(b.base());
    auto tdist = bfs_all(b.total());
    for (int i = 0; i < 4; ++i) {
      Vertex x = static_cast<Vertex>(rng.below(b.total().size()));
      auto sec = sf.barycenter_flow(x);
      auto q = measure_section_quality(b, sec);
      const double k = single_section_constant(q);
      for (int j = 0; j < 10; ++j) {
        Vertex u = static_cast<Vertex>(rng.below(b.base().size()));
        Vertex v = static_cast<Vertex>(rng.below(b.base().size()));
        Path gamma = geodesic(b.base(), u, v);
        auto lift = qi_lift(b, gamma, sec, k);
        std::size_t len = 0;
        for (std::size_t t = 1; t < gamma.size(); ++t) len += tdist[sec(gamma[t - 1])][sec(gamma[t])];
        ++lifts;
        if (lift.length != len) c.fail(tag + ": lift length");
        if (double(len) > 2.0 * k * double(gamma.size() - 1)) c.fail(tag + ": lift exceeds 2k l(gamma)");
      }
    }

    // cocycle bound for composed transitions
    const Vertex nb = static_cast<Vertex>(b.base().size());
    const std::size_t fib_cap = 12;
    for (Vertex v = 0; v < nb; ++v)
      for (Vertex w = 0; w < nb; ++w)
        for (Vertex z = 0; z < nb; ++z) {
          const auto& fib = b.fiber(v);
          std::size_t step = std::max<std::size_t>(1, fib.size() / fib_cap);
          for (std::size_t i = 0; i < fib.size(); i += step) {
            Vertex y = fib[i];
            Vertex direct = b.flow(y, z);
            Vertex two = b.flow(b.flow(y, w), z);
            std::size_t bound = fo(bdist[v][z] + bdist[w][z] + bdist[v][w] + 3);
            ++cocycle_checks;
            if (b.fiber_distance(direct, two) > bound) c.fail(tag + ": cocycle bound");
          }
        }
  }
  if (net_base_threshold() != 3.0 || net_fiber_threshold(0.5) != 6.0 || net_fiber_threshold(2.0) != 15.0)
    c.fail("net threshold constants");
  if (o.pass)
    o.detail = std::to_string(instances) + " instances, " + std::to_string(lifts) + " lifts, " +
               std::to_string(cocycle_checks) + " cocycle checks";
  return o;
}

Outcome criterion_flaring() {
  Outcome o;
  Check c{&o};
  std::ostringstream d;
  FlarePolicy pol;
  for (const auto& b : {generate_product_bundle(path_graph(9), path_graph(9)),
                        generate_product_bundle(grid_graph(4, 4), cycle_graph(8)),
                        generate_product_bundle(cycle_graph(12), random_tree(15, 2)),
                        generate_product_bundle(random_tree(20, 6), grid_graph(3, 3))}) {
    for (std::size_t n : {1, 2}) {
      auto e = flare_test(b, {1, 2}, n, pol);
      if (e.verdict != Verdict::kFail || e.min_ratio != 1.0 || e.max_ratio != 1.0)
        c.fail("product did not fail with ratio 1");
    }
  }
  d << "products FAIL ratio 1; ";

  auto h = generate_horocycle_bundle({6, 32, 1});
  double worst = 1e9;
  for (std::size_t n = 1; n <= 3; ++n) {
    auto e = flare_test(h, {1, 2}, n, pol);
    // every admissible pair with central distance >= M grows by lambda
    for (const auto& row : e.rows)
      if (row.M == e.M && row.min_ratio < e.lambda) c.fail("best row below lambda");
    if (e.verdict != Verdict::kPass || e.lambda < 1.5) c.fail("H2 n=" + std::to_string(n) + " not PASS");
    worst = std::min(worst, e.lambda);
  }
  d << "H2 lambda>=" << fmt(worst) << "; ";

  std::vector<HalfInt> deltas;
  for (int size : {4, 6, 8}) {
    auto b = generate_extension_bundle({1, 0, size, {fg::Automorphism{}}});
    auto r = necessity_report(b);
    if (r.verdict != Verdict::kFail) c.fail("box " + std::to_string(size) + " not FAIL");
    if (r.delta_total.twice() != oracle::four_point_twice(b.total()))
      c.fail("box delta differs from brute force");
    deltas.push_back(r.delta_total);
  }
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i - 1] < deltas[i])) c.fail("box delta not increasing");
  d << "box FAIL with delta " << deltas[0].str() << "," << deltas[1].str() << "," << deltas[2].str();
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome criterion_sections() {
  Outcome o;
  Check c{&o};
  std::vector<double> kmax;
  for (double T : {4.0, 6.0, 8.0}) {
    auto b = generate_horocycle_bundle({T, 32, 1});
    SectionFactory f(b);
    auto dt = bfs_all(b.total());
    auto db = bfs_all(b.base());
    Rng rng(static_cast<std::uint64_t>(T) * 31);
    double worst = 1.0;
    for (int i = 0; i < 50; ++i) {
      Vertex x = static_cast<Vertex>(rng.below(b.total().size()));
      auto s = f.barycenter_flow(x);
      if (s(b.proj(x)) != x) c.fail("section misses its point");
      for (Vertex w = 0; w < b.base().size(); ++w)
        if (b.proj(s(w)) != w) c.fail("proj of section is not the identity");
      auto q = measure_section_quality(b, s);
      for (Vertex w = 0; w < b.base().size(); ++w)
        for (Vertex z = 0; z < b.base().size(); ++z) {
          double d1 = db[w][z], d2 = dt[s(w)][s(z)];
          if (d2 > q.k * d1 + q.eps + 1e-9 || d1 / q.k - q.eps > d2 + 1e-9)
            c.fail("measured constants do not hold");
        }
      worst = std::max(worst, q.k);
    }
    kmax.push_back(worst);
  }
  double lo = *std::min_element(kmax.begin(), kmax.end());
  double hi = *std::max_element(kmax.begin(), kmax.end());
  if (hi > 2 * lo) c.fail("k drifts beyond factor 2");
  if (o.pass) o.detail = "k(T=4,6,8) = " + fmt(kmax[0]) + "," + fmt(kmax[1]) + "," + fmt(kmax[2]);
  return o;
}

Outcome criterion_ladders() {
  Outcome o;
  Check c{&o};
  std::vector<std::size_t> lips;
  std::size_t decomps = 0;
  auto decompose_all = [&](const MetricGraphBundle& b, const Ladder& l, const SectionFactory& f) {
    for (std::size_t A : {0, 1, 2, 4}) {
      auto rec = decompose_ladder(b, l, A, f);
      ++decomps;
      double kk = 1.0;
      for (const auto& s : rec.sections) kk = std::max(kk, measure_section_quality(b, s).k);
      long worst = 0;
      for (std::size_t i = 0; i + 1 < rec.sections.size(); ++i)
        for (Vertex w = 0; w < b.base().size(); ++w) {
          const auto& rung = l.rungs[w];
          long p = std::find(rung.begin(), rung.end(), rec.sections[i](w)) - rung.begin();
          long q = std::find(rung.begin(), rung.end(), rec.sections[i + 1](w)) - rung.begin();
          if (p == long(rung.size()) || q == long(rung.size())) c.fail("section leaves the ladder");
          worst = std::max(worst, p - q);
        }
      if (double(worst) > 4 * kk * kk) c.fail("footpoint order reversed beyond 4k^2");
      if (std::size_t(worst) != rec.max_violation) c.fail("reported violation differs");
      for (std::size_t i = 1; i < rec.positions.size(); ++i)
        if (rec.positions[i] < rec.positions[i - 1]) c.fail("anchor positions decrease");
    }
  };

  for (double T : {4.0, 6.0, 8.0}) {
    HorocycleParams hp{T, 32, 1};
    auto b = generate_horocycle_bundle(hp);
    SectionFactory f(b);
    Rng rng(static_cast<std::uint64_t>(T) * 7);
    std::size_t lip = 0;
    std::vector<Ladder> ladders;
    for (int i = 0; i < 4; ++i) {
      Vertex x = static_cast<Vertex>(rng.below(b.total().size()));
      Vertex y = static_cast<Vertex>(rng.below(b.total().size()));
      ladders.push_back(build_ladder(b, f.barycenter_flow(x), f.barycenter_flow(y), 2));
    }
    ladders.push_back(build_ladder(b, horocycle_flow_section(b, hp, -8.0),
                                   horocycle_flow_section(b, hp, 8.0), 2));
    for (const auto& l : ladders) {
      for (Vertex x : l.vertices)
        if (retraction(b, l, x) != x) c.fail("retraction moves a ladder point");
      for (Vertex x = 0; x < b.total().size(); ++x) {
        Vertex r = retraction(b, l, x);
        if (retraction(b, l, r) != r || !l.contains(r)) c.fail("retraction not idempotent");
      }
      lip = std::max(lip, retraction_lipschitz(b, l).constant);
      decompose_all(b, l, f);
    }
    lips.push_back(lip);
  }
  if (lips[0] == 0) c.fail("zero Lipschitz constant");
  auto [lo, hi] = std::minmax_element(lips.begin(), lips.end());
  if (*hi > 2 * *lo) c.fail("Lipschitz constant drifts beyond factor 2");

  auto phi = fg::parse_automorphism("a->ab,b->a");
  for (const auto& b : {generate_extension_bundle({4, 4, 0, {phi}}),
                        generate_product_bundle(path_graph(6), path_graph(12)),
                        generate_extension_bundle({2, 0, 3, {fg::Automorphism{}}})}) {
    SectionFactory f(b);
    Rng rng(5);
    for (int i = 0; i < 3; ++i) {
      Vertex x = static_cast<Vertex>(rng.below(b.total().size()));
      Vertex y = static_cast<Vertex>(rng.below(b.total().size()));
      auto l = build_ladder(b, f.barycenter_flow(x), f.barycenter_flow(y), 2);
      decompose_all(b, l, f);
    }
  }
  if (o.pass)
    o.detail = "Lipschitz(T=4,6,8) = " + std::to_string(lips[0]) + "," + std::to_string(lips[1]) +
               "," + std::to_string(lips[2]) + "; " + std::to_string(decomps) + " decompositions";
  return o;
}

// Slimness of the canonical-free triangle given by three explicit paths,
// measured at half points with the brute-force subdivision.
int witness_slim_twice(const Graph& g, const std::vector<Path>& sides) {
  Subdivided s(g);
  std::array<std::vector<int>, 3> q;
  for (int k = 0; k < 3; ++k) q[k] = s.quarter_path(std::vector<int>(sides[k].begin(), sides[k].end()));
  int best = 0;
  for (int k = 0; k < 3; ++k)
    for (int p : q[k]) {
      int near = 1 << 28;
      for (int o : {1, 2})
        for (int y : q[(k + o) % 3]) near = std::min(near, s.sd[p][y]);
      best = std::max(best, near);
    }
  return best / 2;
}

Outcome criterion_hamenstadt() {
  Outcome o;
  Check c{&o};
  std::vector<std::array<long, 4>> Ds;
  for (double T : {6.0, 8.0}) {
    auto b = generate_horocycle_bundle({T, 16, 1});
    SectionFactory f(b);
    auto pf = global_paths(b, f, 2);
    HamenstadtPolicy pol;
    auto r = hamenstadt_check(pf, b.total_distance(), interior_sample(b, pol.sample_vertices, pol.seed), pol);
    if (!r.pass) c.fail("global paths fail at T=" + fmt(T));
    Ds.push_back(r.D);
  }
  for (int i = 0; i < 4; ++i) {
    long a = Ds[0][i], bb = Ds[1][i];
    if (a < 0 || bb < 0) continue;
    if (std::max(a, bb) > 2 * std::max(1L, std::min(a, bb))) c.fail("D" + std::to_string(i + 1) + " unstable");
  }

  Graph grid = grid_graph(8, 8);
  DistanceOracle d(std::make_shared<Graph>(grid));
  auto pf = geodesic_paths(d);
  auto r = hamenstadt_check(pf, d);
  if (r.pass) c.fail("grid passes");
  bool witnessed = false;
  const std::size_t cap = HamenstadtPolicy{}.grid.back();
  for (const auto& w : r.witnesses) {
    if (w.property != "slim" || w.points.size() < 3) continue;
    Vertex a = w.points[0], bb = w.points[1], cc = w.points[2];
    std::vector<Path> sides = {pf.path(bb, cc), pf.path(a, cc), pf.path(a, bb)};
    int twice = witness_slim_twice(grid, sides);
    if (std::size_t(twice) > 2 * cap) witnessed = true;
  }
  if (!witnessed) c.fail("no verified witness triangle on the grid");
  if (o.pass) {
    std::ostringstream s;
    s << "D(T=6)=" << Ds[0][0] << "," << Ds[0][1] << "," << Ds[0][2] << "," << Ds[0][3]
      << " D(T=8)=" << Ds[1][0] << "," << Ds[1][1] << "," << Ds[1][2] << "," << Ds[1][3]
      << "; grid slimness " << r.measured[3];
    o.detail = s.str();
  }
  return o;
}

Graph sparse_graph(std::size_t n, std::size_t chords, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> e;
  for (Vertex v = 1; v < n; ++v) e.emplace_back(static_cast<Vertex>(rng.below(v)), v);
  for (std::size_t i = 0; i < chords; ++i) {
    Vertex a = static_cast<Vertex>(rng.below(n)), b = static_cast<Vertex>(rng.below(n));
    if (a != b) e.emplace_back(a, b);
  }
  return Graph::from_edges(n, e);
}

Outcome criterion_performance() {
  Outcome o;
  Check c{&o};
  std::ostringstream d;

  auto g = std::make_shared<Graph>(sparse_graph(20000, 20000, 11));
  auto t0 = Clock::now();
  DistanceOracle all(g);
  double apsp = seconds_since(t0);
  if (all.mode() != DistanceOracle::Mode::kMatrix) c.fail("20k graph not stored as matrix");
  if (apsp >= 5.0) c.fail("all-pairs BFS took " + fmt(apsp) + " s");
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    Vertex s = static_cast<Vertex>(rng.below(g->size()));
    auto ref = bfs_distances(*g, s);
    auto row = all.row(s);
    if (!std::equal(ref.begin(), ref.end(), row.begin())) c.fail("matrix row differs from BFS");
  }
  d << "APSP 20k " << fmt(apsp) << " s; ";

  auto g300 = std::make_shared<Graph>(random_connected_graph(300, 0.012, 21));
  t0 = Clock::now();
  auto fp = delta_four_point(DistanceOracle(g300));
  double fpt = seconds_since(t0);
  if (!fp.exact) c.fail("four-point on 300 vertices not exact");
  if (fpt >= 60.0) c.fail("four-point took " + fmt(fpt) + " s");
  d << "four-point 300 " << fmt(fpt) << " s; ";

  // identical bytes across runs and thread counts
  auto run = [](int threads) {
    set_thread_count(threads);
    auto b = generate_horocycle_bundle({6, 32, 1});
    std::ostringstream out;
    write_bundle(out, b);
    FlarePolicy p;
    p.seed = 42;
    out << report::to_json(flare_test(b, {1, 2}, 2, p)).dump();
    TrianglePolicy tp;
    tp.mode = SlimMode::kSampled;
    tp.seed = 42;
    tp.samples = 3000;
    out << report::to_json(delta_slim(b.total_distance(), tp)).dump();
    SectionFactory f(b);
    auto s = f.barycenter_flow(b.total().size() / 3);
    out << report::to_json(measure_section_quality(b, s)).dump();
    out << report::to_json(necessity_report(b)).dump();
    return out.str();
  };
  std::string a = run(1), b = run(1), m = run(4);
  set_thread_count(0);
  if (a != b || a != m) c.fail("output differs between runs");
  d << "deterministic (" << a.size() << " bytes)";
  if (o.pass) o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  struct Item {
    const char* name;
    double budget;  // seconds, 0 for none
    std::function<Outcome()> run;
  };
  const std::vector<Item> items = {
      {"insize and thinness bounds on enumerated triangles", 120, criterion_triangle_bounds},
      {"hyperbolicity oracles match brute force", 0, criterion_oracle_equivalence},
      {"closed-form constants on generated instances", 0, criterion_formulas},
      {"flaring dichotomy", 600, criterion_flaring},
      {"section quality stable across scales", 0, criterion_sections},
      {"ladder retraction and decomposition", 0, criterion_ladders},
      {"path family criterion end to end", 300, criterion_hamenstadt},
      {"performance and determinism", 0, criterion_performance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = items[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double t = seconds_since(t0);
    if (items[i].budget > 0 && t >= items[i].budget) {
      o.pass = false;
      o.detail += " (over time budget)";
    }
    if (!o.pass) ++failed;
    std::printf("[%zu] %s %s: %s [%.2f s]\n", i + 1, o.pass ? "PASS" : "FAIL", items[i].name,
                o.detail.c_str(), t);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
