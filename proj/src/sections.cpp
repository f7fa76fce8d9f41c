#include "mgb/sections.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

#include "mgb/hyperbolicity.hpp"
#include "mgb/util.hpp"

namespace mgb {

std::string to_string(SectionKind k) {
  switch (k) {
    case SectionKind::kBarycenterFlow: return "barycenter-flow";
    case SectionKind::kProjection: return "projection";
    case SectionKind::kConstant: return "constant";
    case SectionKind::kTransition: return "transition";
    case SectionKind::kUser: return "user";
  }
  return "user";
}

void check_section(const MetricGraphBundle& b, const Section& s) {
  if (s.value.size() != b.base().size())
    throw Error("section has " + std::to_string(s.value.size()) + " values for " +
                std::to_string(b.base().size()) + " base vertices");
  for (Vertex w = 0; w < s.value.size(); ++w) {
    if (s.value[w] >= b.total().size() || b.proj(s.value[w]) != w)
      throw Error("section value over base vertex " + std::to_string(w) +
                  " is not in that fiber");
  }
}

namespace {

// Parent of each base vertex on canonical geodesics from root, and BFS order.
struct BaseTree {
  std::vector<Vertex> parent;
  std::vector<Vertex> order;
};

BaseTree base_tree(const MetricGraphBundle& b, Vertex root) {
  const Graph& g = b.base();
  auto row = b.base_distance().row(root);
  BaseTree t;
  t.parent.assign(g.size(), kNoVertex);
  t.order.resize(g.size());
  for (Vertex w = 0; w < g.size(); ++w) t.order[w] = w;
  std::stable_sort(t.order.begin(), t.order.end(),
                   [&](Vertex a, Vertex c) { return row[a] < row[c]; });
  for (Vertex w = 0; w < g.size(); ++w) {
    if (w == root) continue;
    for (Vertex u : g.neighbors(w))
      if (row[u] + 1 == row[w]) {
        t.parent[w] = u;
        break;
      }
  }
  return t;
}

bool better_triple(const FarTriple& a, const FarTriple& b, std::size_t da, std::size_t db) {
  if (da != db) return da < db;
  if (a.min_separation != b.min_separation) return a.min_separation > b.min_separation;
  return a.v < b.v;
}

}  // namespace

struct SectionFactory::Impl {
  struct Fiber {
    std::once_flag once;
    std::size_t separation = 0;
    std::vector<Vertex> pool;
    std::vector<FarTriple> triples;
  };
  std::vector<std::unique_ptr<Fiber>> fibers;
};

SectionFactory::SectionFactory(const MetricGraphBundle& b, FarTriplePolicy policy)
    : b_(&b), policy_(policy), impl_(std::make_unique<Impl>()) {
  impl_->fibers.resize(b.base().size());
  for (auto& f : impl_->fibers) f = std::make_unique<Impl::Fiber>();
}

SectionFactory::~SectionFactory() = default;

FarTriple SectionFactory::make_triple(Vertex base, std::array<Vertex, 3> v) const {
  const FiberView& fv = b_->fiber_view(base);
  std::sort(v.begin(), v.end());
  FarTriple t;
  t.v = v;
  Vertex l0 = fv.local(v[0]), l1 = fv.local(v[1]), l2 = fv.local(v[2]);
  const DistanceOracle& d = *fv.dist;
  t.min_separation = std::min({d(l0, l1), d(l0, l2), d(l1, l2)});
  t.gromov = {gromov_product(d, l1, l2, l0), gromov_product(d, l0, l2, l1),
              gromov_product(d, l0, l1, l2)};
  t.barycenter = fv.global(barycenter(d, l0, l1, l2).vertex);
  return t;
}

namespace {

std::vector<Vertex> farthest_point_pool(const FiberView& fv, std::size_t size) {
  const std::size_t n = fv.vertices.size();
  const DistanceOracle& d = *fv.dist;
  std::vector<Vertex> pool;
  if (n == 0) return pool;
  size = std::min(size, n);
  std::vector<std::size_t> near(n, std::numeric_limits<std::size_t>::max());
  Vertex next = 0;
  while (pool.size() < size) {
    pool.push_back(next);
    auto row = d.row(next);
    for (Vertex u = 0; u < n; ++u) near[u] = std::min<std::size_t>(near[u], row[u]);
    std::size_t best = 0;
    next = kNoVertex;
    for (Vertex u = 0; u < n; ++u)
      if (near[u] > best) {
        best = near[u];
        next = u;
      }
    if (next == kNoVertex) break;
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

std::size_t SectionFactory::separation(Vertex base) const {
  triples(base);
  return impl_->fibers[base]->separation;
}

const std::vector<Vertex>& SectionFactory::pool(Vertex base) const {
  triples(base);
  return impl_->fibers[base]->pool;
}

const std::vector<FarTriple>& SectionFactory::triples(Vertex base) const {
  auto& f = *impl_->fibers.at(base);
  std::call_once(f.once, [&] {
    const FiberView& fv = b_->fiber_view(base);
    std::size_t diam = fv.dist->diameter();
    std::size_t s = (diam + 2) / 3;
    if (policy_.separation > 0) s = std::min(policy_.separation, s);
    f.separation = s;
    auto local_pool = farthest_point_pool(fv, policy_.pool);
    for (Vertex u : local_pool) f.pool.push_back(fv.global(u));
    if (s == 0) return;
    const DistanceOracle& d = *fv.dist;
    const std::size_t m = local_pool.size();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        if (d(local_pool[i], local_pool[j]) < s) continue;
        for (std::size_t k = j + 1; k < m; ++k) {
          if (d(local_pool[i], local_pool[k]) < s || d(local_pool[j], local_pool[k]) < s) continue;
          f.triples.push_back(make_triple(base, {f.pool[i], f.pool[j], f.pool[k]}));
        }
      }
    if (policy_.random_triples > 0 && fv.vertices.size() >= 3) {
      Rng rng(policy_.seed ^ (0x9e3779b97f4a7c15ULL * (base + 1)));
      for (std::size_t r = 0; r < policy_.random_triples; ++r) {
        auto idx = rng.sample_indices(fv.vertices.size(), 3);
        if (d(idx[0], idx[1]) < s || d(idx[0], idx[2]) < s || d(idx[1], idx[2]) < s) continue;
        f.triples.push_back(make_triple(base, {fv.global(static_cast<Vertex>(idx[0])),
                                               fv.global(static_cast<Vertex>(idx[1])),
                                               fv.global(static_cast<Vertex>(idx[2]))}));
      }
      std::sort(f.triples.begin(), f.triples.end(),
                [](const FarTriple& a, const FarTriple& c) { return a.v < c.v; });
      f.triples.erase(std::unique(f.triples.begin(), f.triples.end(),
                                  [](const FarTriple& a, const FarTriple& c) { return a.v == c.v; }),
                      f.triples.end());
    }
  });
  return f.triples;
}

Section transition_section(const MetricGraphBundle& b, Vertex x) {
  b.total().check(x);
  const Vertex v = b.proj(x);
  auto t = base_tree(b, v);
  Section s;
  s.kind = SectionKind::kTransition;
  s.through = x;
  s.value.assign(b.base().size(), kNoVertex);
  for (Vertex w : t.order)
    s.value[w] = (w == v) ? x : b.transit(s.value[t.parent[w]], w);
  return s;
}

Section constant_section(const MetricGraphBundle& b, Vertex x) {
  b.total().check(x);
  const std::size_t nb = b.base().size();
  if (b.total().size() % nb != 0) throw Error("constant section needs a product bundle");
  const std::size_t nf = b.total().size() / nb;
  Section s;
  s.kind = SectionKind::kConstant;
  s.through = x;
  for (Vertex w = 0; w < nb; ++w) s.value.push_back(static_cast<Vertex>(w * nf + x % nf));
  check_section(b, s);
  return s;
}

Section horocycle_flow_section(const MetricGraphBundle& b, const HorocycleParams& p, double x) {
  auto ix = horocycle_index(p);
  if (b.base().size() != static_cast<std::size_t>(2 * ix.levels + 1))
    throw Error("horocycle parameters do not match the bundle");
  Section s;
  s.kind = SectionKind::kUser;
  for (int k = -ix.levels; k <= ix.levels; ++k) s.value.push_back(horocycle_flow_vertex(p, k, x));
  s.through = s.value[ix.levels];
  check_section(b, s);
  return s;
}

Section SectionFactory::barycenter_flow(Vertex x) const {
  const MetricGraphBundle& b = *b_;
  b.total().check(x);
  const Vertex v = b.proj(x);
  const auto& start = triples(v);
  if (start.empty()) {
    Section s = transition_section(b, x);
    s.fallback = true;
    s.separation = separation(v);
    s.log.push_back("no separated triple in fiber " + std::to_string(v) +
                    "; using the transition section");
    return s;
  }

  // triple whose barycenter is nearest x
  const FarTriple* best = nullptr;
  std::size_t best_d = 0;
  for (const auto& t : start) {
    std::size_t dt = b.fiber_distance(x, t.barycenter);
    if (!best || better_triple(t, *best, dt, best_d)) {
      best = &t;
      best_d = dt;
    }
  }

  Section s;
  s.kind = SectionKind::kBarycenterFlow;
  s.through = x;
  s.separation = separation(v);
  s.anchor_gap = best_d;
  s.value.assign(b.base().size(), kNoVertex);
  std::vector<FarTriple> at(b.base().size());
  at[v] = *best;
  std::vector<Vertex> bary(b.base().size(), kNoVertex);
  bary[v] = best->barycenter;
  s.value[v] = x;

  auto t = base_tree(b, v);
  for (Vertex w : t.order) {
    if (w == v) continue;
    const Vertex p = t.parent[w];
    std::array<Vertex, 3> moved;
    for (int i = 0; i < 3; ++i) moved[i] = b.transit(at[p].v[i], w);
    FarTriple cur = make_triple(w, moved);
    const std::size_t sw = separation(w);
    if (2 * cur.min_separation < sw) {
      const auto& cand = triples(w);
      const FarTriple* pick = nullptr;
      std::size_t pick_d = 0;
      for (const auto& c : cand) {
        std::size_t dc = b.fiber_distance(c.barycenter, cur.barycenter);
        if (!pick || better_triple(c, *pick, dc, pick_d)) {
          pick = &c;
          pick_d = dc;
        }
      }
      if (pick) {
        std::ostringstream msg;
        msg << "re-anchored at base vertex " << w << ": separation " << cur.min_separation
            << " < " << sw << "/2, barycenter moved " << pick_d;
        s.log.push_back(msg.str());
        ++s.reanchors;
        cur = *pick;
      }
    }
    at[w] = cur;
    bary[w] = cur.barycenter;
    s.value[w] = cur.barycenter;
    s.coherence = std::max(s.coherence, b.fiber_distance(b.transit(bary[p], w), bary[w]));
  }
  return s;
}

Section barycenter_flow_section(const MetricGraphBundle& b, Vertex x, std::size_t separation) {
  FarTriplePolicy pol;
  pol.separation = separation;
  SectionFactory f(b, pol);
  return f.barycenter_flow(x);
}

namespace {

constexpr int kEpsCap = 32;

double grid_k(int i) { return 1.0 + 0.25 * i; }
constexpr int kGridK = 29;  // 1 .. 8

// Smallest integer eps with d1/k - eps <= d2 <= k*d1 + eps. Exact in quarters.
long needed_eps(int i, std::size_t d1, std::size_t d2) {
  const long q = 4 + i;  // 4k
  const long a = static_cast<long>(d1), c = static_cast<long>(d2);
  long up = 4 * c - q * a;              // 4(d2 - k d1)
  long lo = 4 * a - q * c;              // q(d1/k - d2)
  long e_up = up <= 0 ? 0 : (up + 3) / 4;
  long e_lo = lo <= 0 ? 0 : (lo + q - 1) / q;
  return std::max(e_up, e_lo);
}

}  // namespace

SectionQuality measure_section_quality(const MetricGraphBundle& b, const Section& s,
                                       const SectionQualityPolicy& policy) {
  check_section(b, s);
  const std::size_t nb = b.base().size();
  const DistanceOracle& db = b.base_distance();
  const DistanceOracle& dt = b.total_distance();
  std::vector<std::pair<Vertex, Vertex>> pairs;
  SectionQuality q;
  if (nb <= policy.exhaustive_base_limit) {
    for (Vertex w = 0; w < nb; ++w)
      for (Vertex z = w + 1; z < nb; ++z) pairs.emplace_back(w, z);
  } else {
    q.exhaustive = false;
    Rng rng(policy.seed);
    for (std::size_t i = 0; i < policy.samples; ++i) {
      auto w = static_cast<Vertex>(rng.below(nb));
      auto z = static_cast<Vertex>(rng.below(nb));
      if (w != z) pairs.emplace_back(std::min(w, z), std::max(w, z));
    }
    for (auto [u, w] : b.base().edges()) pairs.emplace_back(u, w);
  }
  q.pairs = pairs.size();
  std::vector<long> eps(kGridK, 0);
  std::vector<std::pair<Vertex, Vertex>> wit(kGridK, {0, 0});
  for (auto [w, z] : pairs) {
    std::size_t d1 = db(w, z), d2 = dt(s.value[w], s.value[z]);
    if (d1 > d2) q.lower_bound_holds = false;
    if (d1 == 1) q.max_hop = std::max(q.max_hop, d2);
    for (int i = 0; i < kGridK; ++i) {
      long e = needed_eps(i, d1, d2);
      if (e > eps[i]) {
        eps[i] = e;
        wit[i] = {w, z};
      }
    }
  }
  int best = -1;
  for (int i = 0; i < kGridK; ++i) {
    if (eps[i] > kEpsCap) continue;
    if (best < 0 || grid_k(i) + eps[i] < grid_k(best) + eps[best]) best = i;
  }
  if (best < 0) {
    best = kGridK - 1;
    q.within_grid = false;
  }
  q.k = grid_k(best);
  q.eps = static_cast<int>(eps[best]);
  q.witness_w = wit[best].first;
  q.witness_z = wit[best].second;
  return q;
}

VertexSet level_set(const MetricGraphBundle& b, const Section& s1, const Section& s2,
                    std::size_t A) {
  check_section(b, s1);
  check_section(b, s2);
  VertexSet u;
  for (Vertex w = 0; w < b.base().size(); ++w)
    if (b.fiber_distance(s1.value[w], s2.value[w]) <= A) u.push_back(w);
  return u;
}

LevelSetReport level_set_report(const MetricGraphBundle& b, const Section& s1,
                                const Section& s2, std::size_t A) {
  LevelSetReport r;
  r.A = A;
  r.U = level_set(b, s1, s2, A);
  r.empty = r.U.empty();
  const std::size_t nb = b.base().size();
  r.min_fiber_distance = std::numeric_limits<std::size_t>::max();
  for (Vertex w = 0; w < nb; ++w)
    r.min_fiber_distance =
        std::min(r.min_fiber_distance, b.fiber_distance(s1.value[w], s2.value[w]));
  if (r.empty) return r;
  const DistanceOracle& db = b.base_distance();
  r.quasiconvexity = quasiconvexity_constant(db, r.U);
  r.diameter = set_diameter(db, r.U);
  auto to_u = multi_source_bfs(b.base(), r.U);
  for (Vertex w = 0; w < nb; ++w) {
    if (std::binary_search(r.U.begin(), r.U.end(), w)) continue;
    r.outside.push_back({w, b.fiber_distance(s1.value[w], s2.value[w]), to_u[w]});
    r.max_distance_to_U = std::max<std::size_t>(r.max_distance_to_U, to_u[w]);
  }
  std::stable_sort(r.outside.begin(), r.outside.end(),
                   [](const auto& a, const auto& c) { return a[1] > c[1]; });
  return r;
}

SurjectivityReport barycenter_surjectivity_report(const MetricGraphBundle& b,
                                                  const std::vector<std::size_t>& grid,
                                                  const FarTriplePolicy& policy) {
  FarTriplePolicy pol = policy;
  if (pol.random_triples == 0) pol.random_triples = 2000;
  SectionFactory f(b, pol);
  SurjectivityReport r;
  const std::size_t nb = b.base().size();
  r.fibers.resize(nb);
  parallel_for(nb, [&](std::size_t i) {
    const Vertex w = static_cast<Vertex>(i);
    const FiberView& fv = b.fiber_view(w);
    FiberSurjectivity& fs = r.fibers[i];
    fs.base = w;
    fs.fiber_size = fv.vertices.size();
    fs.diameter = fv.dist->diameter();
    const auto& tr = f.triples(w);
    fs.triples = tr.size();
    VertexSet centers;
    for (const auto& t : tr) centers.push_back(fv.local(t.barycenter));
    centers = make_vertex_set(std::move(centers));
    fs.barycenters = centers.size();
    if (fs.fiber_size <= 1) {
      fs.radius = 0;
    } else if (centers.empty()) {
      fs.radius = fs.diameter;
    } else {
      auto dist = multi_source_bfs(*fv.graph, centers);
      for (Dist x : dist) fs.radius = std::max<std::size_t>(fs.radius, x);
    }
    for (std::size_t g : grid)
      if (g >= fs.radius && (fs.grid_value < 0 || static_cast<long>(g) < fs.grid_value))
        fs.grid_value = static_cast<long>(g);
    fs.weak = 4 * fs.radius > fs.diameter;
  });
  for (const auto& fs : r.fibers) {
    r.max_radius = std::max(r.max_radius, fs.radius);
    r.any_weak = r.any_weak || fs.weak;
  }
  return r;
}

void write_section(std::ostream& out, const Section& s) {
  out << "# section " << to_string(s.kind) << "\n";
  for (Vertex w = 0; w < s.value.size(); ++w) out << w << ' ' << s.value[w] << '\n';
}

Section read_section(std::istream& in, const MetricGraphBundle& b) {
  Section s;
  s.value.assign(b.base().size(), kNoVertex);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long w = -1, x = -1;
    std::string junk;
    if (!(ls >> w >> x) || (ls >> junk) || w < 0 || x < 0 ||
        w >= static_cast<long long>(b.base().size()) ||
        x >= static_cast<long long>(b.total().size()))
      throw GraphError("section line " + std::to_string(lineno) + ": expected 'base total'",
                       lineno);
    s.value[w] = static_cast<Vertex>(x);
  }
  check_section(b, s);
  return s;
}

}  // namespace mgb
