#include "mgb/hyperbolicity.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "mgb/util.hpp"

namespace mgb {

namespace {

std::int64_t dd(const DistanceOracle& d, Vertex u, Vertex v) {
  Dist x = d(u, v);
  if (x == kUnreachable) throw GraphError("vertices are in different components");
  return x;
}

std::int64_t gromov_twice(const DistanceOracle& d, Vertex y, Vertex z, Vertex x) {
  return dd(d, x, y) + dd(d, x, z) - dd(d, y, z);
}

Path reversed(Path p) {
  std::reverse(p.begin(), p.end());
  return p;
}

using EdgeKey = std::uint64_t;
EdgeKey edge_key(Vertex a, Vertex b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}

// Doubled sup distance from points of p to the union of q and r.
std::int64_t side_defect_twice(const DistanceOracle& d, const Path& p, const Path& q,
                               const Path& r) {
  std::vector<Vertex> s(q);
  s.insert(s.end(), r.begin(), r.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  std::vector<EdgeKey> se;
  for (const Path* o : {&q, &r})
    for (std::size_t i = 0; i + 1 < o->size(); ++i)
      se.push_back(edge_key((*o)[i], (*o)[i + 1]));
  std::sort(se.begin(), se.end());

  std::vector<std::int64_t> ds(p.size());
  std::int64_t best = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto row = d.row(p[i]);
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (Vertex v : s) m = std::min<std::int64_t>(m, row[v]);
    ds[i] = m;
    best = std::max(best, 2 * m);
  }
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (std::binary_search(se.begin(), se.end(), edge_key(p[i], p[i + 1]))) continue;
    best = std::max(best, ds[i] + ds[i + 1] + 1);
  }
  return best;
}

// Doubled max over t <= tau_twice/2 of d(p(t), q(t)); both legs start at the
// same corner.
std::int64_t legs_thinness_twice(const DistanceOracle& d, const Path& p, const Path& q,
                                 std::int64_t tau_twice) {
  std::int64_t best = 0;
  for (std::int64_t m = 0; 2 * m < tau_twice; ++m) {
    const std::int64_t u_twice = std::min<std::int64_t>(2, tau_twice - 2 * m);
    Vertex p0 = p[m], p1 = p[m + 1], q0 = q[m], q1 = q[m + 1];
    if (p0 == q0 && p1 == q1) continue;
    const std::int64_t a = dd(d, p0, q0), b = dd(d, p1, q1);
    const std::int64_t c = dd(d, p0, q1), e = dd(d, p1, q0);
    for (std::int64_t j = 0; j <= 2 * u_twice; ++j) {
      std::int64_t h = std::min({j + 2 * a, 4 - j + 2 * b, 2 + 2 * c, 2 + 2 * e});
      best = std::max(best, h);
    }
  }
  return best;
}

}  // namespace

HalfInt gromov_product(const DistanceOracle& d, Vertex y, Vertex z, Vertex x) {
  return HalfInt::from_twice(gromov_twice(d, y, z, x));
}

HalfInt gromov_product(const Graph& g, Vertex y, Vertex z, Vertex x) {
  g.check(y);
  g.check(z);
  auto rx = bfs_distances(g, x);
  auto ry = bfs_distances(g, y);
  return HalfInt::from_twice(std::int64_t{rx[y]} + rx[z] - ry[z]);
}

GraphPoint point_on_path(const Path& p, std::int64_t twice) {
  if (p.empty() || twice < 0 || twice > 2 * static_cast<std::int64_t>(path_length(p)))
    throw Error("arc position outside path");
  std::size_t k = static_cast<std::size_t>(twice / 2);
  if (twice % 2 == 0) return {p[k], p[k]};
  Vertex a = p[k], b = p[k + 1];
  if (a > b) std::swap(a, b);
  return {a, b};
}

std::int64_t point_distance_twice(const DistanceOracle& d, GraphPoint p, GraphPoint q) {
  if (p.is_vertex() && q.is_vertex()) return 2 * dd(d, p.a, q.a);
  if (p.is_vertex() != q.is_vertex()) {
    if (!p.is_vertex()) std::swap(p, q);
    return 1 + 2 * std::min(dd(d, p.a, q.a), dd(d, p.a, q.b));
  }
  if (p == q) return 0;
  return 2 + 2 * std::min({dd(d, p.a, q.a), dd(d, p.a, q.b), dd(d, p.b, q.a),
                           dd(d, p.b, q.b)});
}

Triangle canonical_triangle(const DistanceOracle& d, Vertex x0, Vertex x1, Vertex x2) {
  Triangle t;
  t.x = {x0, x1, x2};
  t.side[0] = geodesic(d, x1, x2);
  t.side[1] = geodesic(d, x0, x2);
  t.side[2] = geodesic(d, x0, x1);
  return t;
}

std::array<InternalPoint, 3> internal_points(const DistanceOracle& d, const Triangle& t) {
  std::array<InternalPoint, 3> c;
  for (int k = 0; k < 3; ++k) {
    const int i = k == 0 ? 1 : 0;
    const int j = k == 2 ? 1 : 2;
    InternalPoint& ip = c[k];
    ip.from = t.x[i];
    ip.to = t.x[j];
    const std::int64_t tw = gromov_twice(d, t.x[j], t.x[k], t.x[i]);
    ip.arc = HalfInt::from_twice(tw);
    ip.exact = point_on_path(t.side[k], tw);
    ip.snapped = t.side[k][static_cast<std::size_t>(tw / 2)];
  }
  return c;
}

std::array<InternalPoint, 3> internal_points(const DistanceOracle& d, Vertex x0,
                                             Vertex x1, Vertex x2) {
  return internal_points(d, canonical_triangle(d, x0, x1, x2));
}

TriangleMeasure measure_triangle(const DistanceOracle& d, const Triangle& t) {
  TriangleMeasure m;
  std::int64_t slim = 0;
  for (int k = 0; k < 3; ++k)
    slim = std::max(slim, side_defect_twice(d, t.side[k], t.side[(k + 1) % 3],
                                            t.side[(k + 2) % 3]));
  m.slim = HalfInt::from_twice(slim);

  auto c = internal_points(d, t);
  std::int64_t ins = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      ins = std::max(ins, point_distance_twice(d, c[a].exact, c[b].exact));
  m.insize = HalfInt::from_twice(ins);

  std::int64_t thin = 0;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, l = (i + 2) % 3;
    // side[l] joins x_i and x_j; side[j] joins x_i and x_l.
    auto leg = [&](int s) {
      const Path& p = t.side[s];
      return p.front() == t.x[i] ? p : reversed(p);
    };
    const std::int64_t tau = gromov_twice(d, t.x[j], t.x[l], t.x[i]);
    thin = std::max(thin, legs_thinness_twice(d, leg(l), leg(j), tau));
  }
  m.thin = HalfInt::from_twice(thin);
  return m;
}

Barycenter barycenter(const DistanceOracle& d, Vertex x0, Vertex x1, Vertex x2) {
  Triangle t = canonical_triangle(d, x0, x1, x2);
  auto c = internal_points(d, t);
  Barycenter b;
  b.vertex = c[0].snapped;
  auto row = d.row(b.vertex);
  for (int k = 0; k < 3; ++k) {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (Vertex v : t.side[k]) m = std::min<std::size_t>(m, row[v]);
    b.side_distance[k] = m;
  }
  return b;
}

Vertex barycenter(const Graph& g, Vertex x0, Vertex x1, Vertex x2) {
  DistanceOracle d(std::make_shared<Graph>(g));
  return barycenter(d, x0, x1, x2).vertex;
}

std::uint64_t geodesic_count(const DistanceOracle& d, Vertex u, Vertex v) {
  const Graph& g = d.graph();
  auto ru = d.row(u);
  auto rv = d.row(v);
  const Dist total = ru[v];
  if (total == kUnreachable) return 0;
  std::vector<Vertex> layer_order;
  for (Vertex w = 0; w < g.size(); ++w)
    if (ru[w] + rv[w] == total) layer_order.push_back(w);
  std::sort(layer_order.begin(), layer_order.end(),
            [&](Vertex a, Vertex b) { return ru[a] < ru[b]; });
  std::vector<std::uint64_t> cnt(g.size(), 0);
  cnt[u] = 1;
  constexpr std::uint64_t kCap = std::uint64_t{1} << 62;
  for (Vertex w : layer_order) {
    if (w == u) continue;
    std::uint64_t c = 0;
    for (Vertex x : g.neighbors(w))
      if (ru[x] + 1 == ru[w] && ru[x] + rv[x] == total) c = std::min(kCap, c + cnt[x]);
    cnt[w] = c;
  }
  return cnt[v];
}

std::optional<std::vector<Path>> all_geodesics(const DistanceOracle& d, Vertex u,
                                               Vertex v, std::size_t limit) {
  if (geodesic_count(d, u, v) > limit) return std::nullopt;
  const Graph& g = d.graph();
  auto rv = d.row(v);
  std::vector<Path> out;
  Path cur{u};
  // Depth-first in ascending neighbor order.
  auto rec = [&](auto&& self, Vertex x) -> void {
    if (x == v) {
      out.push_back(cur);
      return;
    }
    for (Vertex w : g.neighbors(x)) {
      if (rv[w] + 1 == rv[x]) {
        cur.push_back(w);
        self(self, w);
        cur.pop_back();
      }
    }
  };
  rec(rec, u);
  return out;
}

namespace {

struct TriangleResult {
  std::int64_t slim = 0, insize = 0, thin = 0;
  std::array<Vertex, 3> x{};
  std::array<std::size_t, 3> choice{};  // geodesic index per side in exact mode
};

TriangleResult evaluate(const DistanceOracle& d, const Triangle& t,
                        std::array<std::size_t, 3> choice) {
  auto m = measure_triangle(d, t);
  return {m.slim.twice(), m.insize.twice(), m.thin.twice(), t.x, choice};
}

}  // namespace

HyperbolicityReport delta_slim(const DistanceOracle& d, const TrianglePolicy& policy) {
  const std::size_t n = d.graph().size();
  HyperbolicityReport rep;
  rep.seed = policy.seed;
  if (n == 0) return rep;

  bool exact = policy.mode == SlimMode::kExact ||
               (policy.mode == SlimMode::kAuto && n <= policy.exact_threshold);
  std::vector<std::array<Vertex, 3>> triples;
  std::vector<std::vector<Path>> geo;  // exact mode, index u*n+v for u<=v
  if (exact) {
    for (Vertex a = 0; a < n; ++a)
      for (Vertex b = a; b < n; ++b)
        for (Vertex c = b; c < n; ++c) triples.push_back({a, b, c});
    std::uint64_t total = 0;
    std::vector<std::uint64_t> cnt(n * n, 1);
    for (Vertex a = 0; a < n && exact; ++a)
      for (Vertex b = a + 1; b < n; ++b) {
        cnt[a * n + b] = geodesic_count(d, a, b);
        if (cnt[a * n + b] > policy.exact_budget) {
          exact = false;
          break;
        }
      }
    for (const auto& t : triples) {
      if (!exact) break;
      long double prod = static_cast<long double>(cnt[t[1] * n + t[2]]) *
                         cnt[t[0] * n + t[2]] * cnt[t[0] * n + t[1]];
      total += static_cast<std::uint64_t>(std::min<long double>(prod, 1e18L));
      if (total > policy.exact_budget) exact = false;
    }
    if (exact) {
      geo.resize(n * n);
      for (Vertex a = 0; a < n; ++a) {
        geo[a * n + a] = {Path{a}};
        for (Vertex b = a + 1; b < n; ++b)
          geo[a * n + b] = *all_geodesics(d, a, b, policy.exact_budget);
      }
    } else {
      triples.clear();
    }
  }

  Rng rng(policy.seed);
  if (!exact) {
    const long double all = static_cast<long double>(n) * (n - 1) * (n - 2) / 6.0L;
    bool sample = policy.mode == SlimMode::kSampled ||
                  (policy.mode != SlimMode::kCanonical && all > policy.samples);
    if (!sample) {
      rep.mode = "canonical";
      for (Vertex a = 0; a < n; ++a)
        for (Vertex b = a + 1; b < n; ++b)
          for (Vertex c = b + 1; c < n; ++c) triples.push_back({a, b, c});
    } else {
      rep.mode = "sampled";
      for (std::size_t i = 0; i < policy.samples && n >= 3; ++i) {
        std::array<Vertex, 3> t;
        do {
          for (auto& v : t) v = static_cast<Vertex>(rng.below(n));
        } while (t[0] == t[1] || t[0] == t[2] || t[1] == t[2]);
        std::sort(t.begin(), t.end());
        triples.push_back(t);
      }
    }
  } else {
    rep.mode = "exact";
  }

  // Per-triple maxima; slim dominates for witness choice.
  std::vector<TriangleResult> res(triples.size());
  std::vector<std::uint64_t> examined(triples.size(), 0);
  parallel_for(triples.size(), [&](std::size_t ti) {
    const auto [a, b, c] = triples[ti];
    TriangleResult best;
    best.x = triples[ti];
    auto take = [&](const TriangleResult& r) {
      if (r.slim > best.slim) {
        best.slim = r.slim;
        best.choice = r.choice;
      }
      best.insize = std::max(best.insize, r.insize);
      best.thin = std::max(best.thin, r.thin);
    };
    if (!exact) {
      take(evaluate(d, canonical_triangle(d, a, b, c), {0, 0, 0}));
      examined[ti] = 1;
      res[ti] = best;
      return;
    }
    const auto& g0 = geo[b * n + c];
    const auto& g1 = geo[a * n + c];
    const auto& g2 = geo[a * n + b];
    Triangle t;
    t.x = {a, b, c};
    for (std::size_t i0 = 0; i0 < g0.size(); ++i0)
      for (std::size_t i1 = 0; i1 < g1.size(); ++i1)
        for (std::size_t i2 = 0; i2 < g2.size(); ++i2) {
          t.side = {g0[i0], g1[i1], g2[i2]};
          take(evaluate(d, t, {i0, i1, i2}));
          ++examined[ti];
        }
    res[ti] = best;
  });

  std::int64_t slim = -1;
  std::size_t wi = 0;
  std::int64_t ins = 0, thin = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (res[i].slim > slim) {
      slim = res[i].slim;
      wi = i;
    }
    ins = std::max(ins, res[i].insize);
    thin = std::max(thin, res[i].thin);
    rep.triangles += examined[i];
  }
  if (res.empty()) {
    slim = 0;
    rep.witness.x = {0, 0, 0};
    rep.witness.side = {Path{0}, Path{0}, Path{0}};
  } else {
    const auto& w = res[wi];
    if (exact) {
      const auto [a, b, c] = w.x;
      rep.witness.x = w.x;
      rep.witness.side = {geo[b * n + c][w.choice[0]], geo[a * n + c][w.choice[1]],
                          geo[a * n + b][w.choice[2]]};
    } else {
      rep.witness = canonical_triangle(d, w.x[0], w.x[1], w.x[2]);
    }
  }
  rep.delta_slim = HalfInt::from_twice(slim);
  rep.insize_max = HalfInt::from_twice(ins);
  rep.thin_max = HalfInt::from_twice(thin);
  rep.insize_excess = HalfInt::from_twice(ins - 4 * slim);
  rep.thin_excess = HalfInt::from_twice(thin - 6 * slim);
  return rep;
}

std::vector<Edge> far_apart_pairs(const DistanceOracle& d) {
  const Graph& g = d.graph();
  const std::size_t n = g.size();
  std::vector<Edge> out;
  for (Vertex u = 0; u < n; ++u) {
    auto ru = d.row(u);
    for (Vertex v = u + 1; v < n; ++v) {
      const Dist duv = ru[v];
      bool far = true;
      for (Vertex w : g.neighbors(v))
        if (ru[w] > duv) {
          far = false;
          break;
        }
      if (!far) continue;
      auto rv = d.row(v);
      for (Vertex w : g.neighbors(u))
        if (rv[w] > duv) {
          far = false;
          break;
        }
      if (far) out.emplace_back(u, v);
    }
  }
  return out;
}

FourPointResult delta_four_point(const DistanceOracle& d, const FourPointPolicy& policy) {
  const std::size_t n = d.graph().size();
  FourPointResult res;
  if (n < 4) return res;
  auto value = [&](Vertex a, Vertex b, Vertex c, Vertex e) {
    std::int64_t s[3] = {dd(d, a, b) + dd(d, c, e), dd(d, a, c) + dd(d, b, e),
                         dd(d, a, e) + dd(d, b, c)};
    std::sort(s, s + 3);
    return s[2] - s[1];
  };

  if (n > policy.exact_cap) {
    if (!policy.allow_sampling)
      throw Error("four-point delta: " + std::to_string(n) +
                  " vertices exceeds the exact cap; enable sampling");
    res.exact = false;
    Rng rng(policy.seed);
    std::int64_t best = 0;
    for (std::size_t i = 0; i < policy.samples; ++i) {
      Vertex q[4];
      for (auto& v : q) v = static_cast<Vertex>(rng.below(n));
      std::int64_t val = value(q[0], q[1], q[2], q[3]);
      if (val > best) {
        best = val;
        res.witness = {q[0], q[1], q[2], q[3]};
      }
    }
    res.delta = HalfInt::from_twice(best);
    return res;
  }

  struct P {
    Vertex a, b;
    Dist len;
  };
  std::vector<P> pairs;
  for (auto [a, b] : far_apart_pairs(d)) pairs.push_back({a, b, d(a, b)});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const P& x, const P& y) { return x.len > y.len; });

  std::int64_t best = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, b, len] = pairs[i];
    if (2 * static_cast<std::int64_t>(len) <= best) break;
    auto ra = d.row(a);
    auto rb = d.row(b);
    for (std::size_t j = 0; j < i; ++j) {
      const auto& q = pairs[j];
      const std::int64_t s1 = std::int64_t{len} + q.len;
      const std::int64_t s2 = std::int64_t{ra[q.a]} + rb[q.b];
      const std::int64_t s3 = std::int64_t{ra[q.b]} + rb[q.a];
      std::int64_t hi = std::max({s1, s2, s3});
      std::int64_t val;
      if (hi == s1)
        val = s1 - std::max(s2, s3);
      else if (hi == s2)
        val = s2 - std::max(s1, s3);
      else
        val = s3 - std::max(s1, s2);
      if (val > best) {
        best = val;
        res.witness = {a, b, q.a, q.b};
      }
    }
  }
  res.delta = HalfInt::from_twice(best);
  return res;
}

std::size_t quasiconvexity_constant(const DistanceOracle& d, const VertexSet& a,
                                    const PairSample& sample) {
  if (a.empty()) throw Error("quasiconvexity: empty set");
  auto da = multi_source_bfs(d.graph(), a);
  std::size_t best = 0;
  auto scan = [&](Vertex x, Vertex y) {
    for (Vertex v : geodesic(d, x, y)) best = std::max<std::size_t>(best, da[v]);
  };
  if (a.size() <= sample.exhaustive_limit) {
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = i + 1; j < a.size(); ++j) scan(a[i], a[j]);
  } else {
    Rng rng(sample.seed);
    for (std::size_t s = 0; s < sample.samples; ++s)
      scan(a[rng.below(a.size())], a[rng.below(a.size())]);
  }
  return best;
}

ProjectionWitness nearest_point_projection(const DistanceOracle& d, Vertex x,
                                           const VertexSet& a) {
  if (a.empty()) throw Error("nearest point projection onto an empty set");
  auto row = d.row(x);
  ProjectionWitness w{x, a.front(), row[a.front()]};
  for (Vertex v : a)
    if (row[v] < w.distance) {
      w.distance = row[v];
      w.target = v;
    }
  return w;
}

ProjectionWitness nearest_point_projection(const Graph& g, Vertex x, const VertexSet& a) {
  if (a.empty()) throw Error("nearest point projection onto an empty set");
  auto row = bfs_distances(g, x);
  ProjectionWitness w{x, a.front(), row[a.front()]};
  for (Vertex v : a)
    if (row[v] < w.distance) {
      w.distance = row[v];
      w.target = v;
    }
  return w;
}

QuasiGeodesicParams quasigeodesic_params(const DistanceOracle& d, const Path& p) {
  QuasiGeodesicParams out;
  const std::size_t m = p.size();
  if (m <= 1) return out;
  std::vector<std::int64_t> dist(m * m);
  for (std::size_t s = 0; s < m; ++s) {
    auto row = d.row(p[s]);
    for (std::size_t t = s + 1; t < m; ++t) dist[s * m + t] = row[p[t]];
  }
  auto ceil_div = [](std::int64_t a, std::int64_t b) {
    return a >= 0 ? (a + b - 1) / b : -((-a) / b);
  };
  for (int q = 4; q <= 32; ++q) {
    std::int64_t need = 0;
    std::size_t ws = 0, wt = 0;
    for (std::size_t s = 0; s < m; ++s)
      for (std::size_t t = s + 1; t < m; ++t) {
        const std::int64_t len = static_cast<std::int64_t>(t - s);
        const std::int64_t x = dist[s * m + t];
        std::int64_t e = std::max(ceil_div(4 * len - q * x, q), ceil_div(4 * x - q * len, 4));
        if (e > need) {
          need = e;
          ws = s;
          wt = t;
        }
      }
    if (need <= 32 || q == 32) {
      out.k = q / 4.0;
      out.eps = static_cast<int>(need);
      out.within_grid = need <= 32;
      out.witness_s = ws;
      out.witness_t = wt;
      return out;
    }
  }
  return out;
}

std::size_t set_diameter(const DistanceOracle& d, const VertexSet& a) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto row = d.row(a[i]);
    for (std::size_t j = i + 1; j < a.size(); ++j)
      best = std::max<std::size_t>(best, row[a[j]]);
  }
  return best;
}

std::size_t coboundedness(const DistanceOracle& d, const VertexSet& u, const VertexSet& v) {
  if (u.empty() || v.empty()) throw Error("coboundedness: empty set");
  auto image = [&](const VertexSet& from, const VertexSet& onto) {
    std::vector<Vertex> im;
    for (Vertex x : from) im.push_back(nearest_point_projection(d, x, onto).target);
    return make_vertex_set(std::move(im));
  };
  return std::max(set_diameter(d, image(u, v)), set_diameter(d, image(v, u)));
}

std::size_t hausdorff_distance(const Graph& g, const VertexSet& a, const VertexSet& b) {
  if (a.empty() || b.empty()) throw Error("hausdorff distance: empty set");
  auto da = multi_source_bfs(g, a);
  auto db = multi_source_bfs(g, b);
  std::size_t best = 0;
  for (Vertex x : a) best = std::max<std::size_t>(best, db[x]);
  for (Vertex y : b) best = std::max<std::size_t>(best, da[y]);
  return best;
}

std::size_t hausdorff_distance(const DistanceOracle& d, const VertexSet& a,
                               const VertexSet& b) {
  return hausdorff_distance(d.graph(), a, b);
}

std::size_t nested_projection_defect(const DistanceOracle& d, const VertexSet& u,
                                     const VertexSet& v) {
  std::size_t best = 0;
  for (Vertex x = 0; x < d.graph().size(); ++x) {
    Vertex two = nearest_point_projection(d, nearest_point_projection(d, x, u).target, v).target;
    Vertex one = nearest_point_projection(d, x, v).target;
    best = std::max<std::size_t>(best, d(one, two));
  }
  return best;
}

}  // namespace mgb
