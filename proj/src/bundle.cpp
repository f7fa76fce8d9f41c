#include "mgb/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "mgb/util.hpp"

namespace mgb {

struct MetricGraphBundle::Cache {
  explicit Cache(std::size_t base_n) : fiber_once(base_n), fibers(base_n) {}
  std::vector<std::once_flag> fiber_once;
  std::vector<std::unique_ptr<FiberView>> fibers;
  std::once_flag total_once, base_once;
  std::unique_ptr<DistanceOracle> total, base;
};

Vertex FiberView::local(Vertex global) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), global);
  if (it == vertices.end() || *it != global)
    throw Error("vertex " + std::to_string(global) + " is not in the fiber over " +
                std::to_string(base));
  return static_cast<Vertex>(it - vertices.begin());
}

std::size_t MetricGraphBundle::max_fiber_size() const {
  std::size_t m = 0;
  for (const auto& f : fibers_) m = std::max(m, f.size());
  return m;
}

const FiberView& MetricGraphBundle::fiber_view(Vertex b) const {
  base_->check(b);
  std::call_once(cache_->fiber_once[b], [&] {
    auto v = std::make_unique<FiberView>();
    v->base = b;
    v->vertices = fibers_[b];
    v->graph = std::make_shared<Graph>(total_->induced(v->vertices));
    v->dist = std::make_unique<DistanceOracle>(v->graph);
    cache_->fibers[b] = std::move(v);
  });
  return *cache_->fibers[b];
}

std::size_t MetricGraphBundle::fiber_distance(Vertex x, Vertex y) const {
  total_->check(x);
  total_->check(y);
  if (proj_[x] != proj_[y]) throw Error("fiber distance between different fibers");
  return fiber_view(proj_[x]).distance(x, y);
}

const DistanceOracle& MetricGraphBundle::total_distance() const {
  std::call_once(cache_->total_once,
                 [&] { cache_->total = std::make_unique<DistanceOracle>(total_); });
  return *cache_->total;
}

const DistanceOracle& MetricGraphBundle::base_distance() const {
  std::call_once(cache_->base_once,
                 [&] { cache_->base = std::make_unique<DistanceOracle>(base_); });
  return *cache_->base;
}

std::size_t MetricGraphBundle::boundary_count() const {
  return static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), 1));
}

Vertex MetricGraphBundle::transit(Vertex x, Vertex b2) const {
  total_->check(x);
  if (proj_[x] == b2) return x;
  for (Vertex w : total_->neighbors(x))
    if (proj_[w] == b2) return w;
  throw Error("no neighbor of " + std::to_string(x) + " over base vertex " +
              std::to_string(b2));
}

Vertex MetricGraphBundle::flow(Vertex x, Vertex z) const {
  Path p = geodesic(base_distance(), proj_[x], z);
  for (std::size_t i = 1; i < p.size(); ++i) x = transit(x, p[i]);
  return x;
}

MetricGraphBundle verify_bundle(Graph total, Graph base, std::vector<Vertex> proj,
                                std::vector<std::uint8_t> boundary) {
  const std::size_t n = total.size();
  if (proj.size() != n)
    throw BundleError("projection", {},
                      "projection has " + std::to_string(proj.size()) + " entries for " +
                          std::to_string(n) + " total vertices");
  for (Vertex x = 0; x < n; ++x)
    if (proj[x] >= base.size())
      throw BundleError("projection", {x},
                        "vertex " + std::to_string(x) + " maps outside the base");
  if (!boundary.empty() && boundary.size() != n)
    throw BundleError("projection", {}, "boundary flag count mismatch");

  std::vector<VertexSet> fibers(base.size());
  for (Vertex x = 0; x < n; ++x) fibers[proj[x]].push_back(x);
  for (Vertex b = 0; b < base.size(); ++b)
    if (fibers[b].empty())
      throw BundleError("surjective", {b},
                        "no total vertex over base vertex " + std::to_string(b));

  for (auto [x, y] : total.edges()) {
    Vertex bx = proj[x], by = proj[y];
    if (bx != by && !base.adjacent(bx, by))
      throw BundleError("simplicial", {x, y},
                        "edge (" + std::to_string(x) + "," + std::to_string(y) +
                            ") maps to the non-edge (" + std::to_string(bx) + "," +
                            std::to_string(by) + ")");
  }

  for (Vertex b = 0; b < base.size(); ++b) {
    Graph fg = total.induced(fibers[b]);
    if (fg.size() > 1) {
      auto d = bfs_distances(fg, 0);
      for (Vertex i = 0; i < d.size(); ++i)
        if (d[i] == kUnreachable)
          throw BundleError("fiber-connected", {b, fibers[b][0], fibers[b][i]},
                            "fiber over " + std::to_string(b) + " is disconnected: " +
                                std::to_string(fibers[b][0]) + " cannot reach " +
                                std::to_string(fibers[b][i]));
    }
  }

  for (Vertex x = 0; x < n; ++x) {
    for (Vertex nb : base.neighbors(proj[x])) {
      bool found = false;
      for (Vertex w : total.neighbors(x))
        if (proj[w] == nb) {
          found = true;
          break;
        }
      if (!found)
        throw BundleError("cross-edge", {x, nb},
                          "vertex " + std::to_string(x) + " has no neighbor over base vertex " +
                              std::to_string(nb));
    }
  }

  MetricGraphBundle out;
  out.total_ = std::make_shared<Graph>(std::move(total));
  out.base_ = std::make_shared<Graph>(std::move(base));
  out.proj_ = std::move(proj);
  out.fibers_ = std::move(fibers);
  out.boundary_ = std::move(boundary);
  out.cache_ = std::make_shared<MetricGraphBundle::Cache>(out.base_->size());
  return out;
}

PropernessProfile measure_properness(const MetricGraphBundle& b,
                                     const PropernessPolicy& policy) {
  PropernessProfile prof;
  const auto& td = b.total_distance();
  std::vector<std::size_t> by_total;  // max fiber distance at exact total distance
  std::mutex mu;
  const std::size_t nb = b.base().size();
  std::vector<std::vector<std::size_t>> local(nb);
  std::vector<std::size_t> pairs(nb, 0);
  std::vector<char> sampled(nb, 0);
  parallel_for(nb, [&](std::size_t bi) {
    const Vertex base_v = static_cast<Vertex>(bi);
    const auto& fv = b.fiber_view(base_v);
    const auto& verts = fv.vertices;
    auto& acc = local[bi];
    auto take = [&](Vertex i, Vertex j) {
      std::size_t dt = td(verts[i], verts[j]);
      std::size_t df = (*fv.dist)(i, j);
      if (acc.size() <= dt) acc.resize(dt + 1, 0);
      acc[dt] = std::max(acc[dt], df);
      ++pairs[bi];
    };
    if (verts.size() <= policy.exhaustive_fiber_limit) {
      for (Vertex i = 0; i < verts.size(); ++i)
        for (Vertex j = i; j < verts.size(); ++j) take(i, j);
    } else {
      sampled[bi] = 1;
      Rng rng(policy.seed + bi * 0x9E3779B97F4A7C15ull);
      for (std::size_t s = 0; s < policy.samples_per_fiber; ++s)
        take(static_cast<Vertex>(rng.below(verts.size())),
             static_cast<Vertex>(rng.below(verts.size())));
    }
  });
  for (std::size_t bi = 0; bi < nb; ++bi) {
    if (by_total.size() < local[bi].size()) by_total.resize(local[bi].size(), 0);
    for (std::size_t i = 0; i < local[bi].size(); ++i)
      by_total[i] = std::max(by_total[i], local[bi][i]);
    prof.pairs += pairs[bi];
    if (sampled[bi]) prof.exhaustive = false;
  }
  prof.table = by_total;
  for (std::size_t i = 1; i < prof.table.size(); ++i)
    prof.table[i] = std::max(prof.table[i], prof.table[i - 1]);
  return prof;
}

double single_qi_constant(std::size_t d1, std::size_t d2) {
  const double x = static_cast<double>(d1), y = static_cast<double>(d2);
  double k = std::max(1.0, y / (x + 1.0));
  k = std::max(k, (-y + std::sqrt(y * y + 4.0 * x)) / 2.0);
  return k;
}

FiberTransition fiber_transition(const MetricGraphBundle& b, Vertex b1, Vertex b2,
                                 std::size_t exhaustive_limit, std::uint64_t seed) {
  b.base().check(b1);
  b.base().check(b2);
  if (!b.base().adjacent(b1, b2))
    throw Error("fiber transition between non-adjacent base vertices");
  FiberTransition t;
  t.source = b1;
  t.target = b2;
  const auto& src = b.fiber_view(b1);
  const auto& dst = b.fiber_view(b2);
  t.map.reserve(src.vertices.size());
  for (Vertex x : src.vertices) t.map.push_back(b.transit(x, b2));
  std::vector<Vertex> img(t.map.size());
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = dst.local(t.map[i]);
  const std::size_t m = src.vertices.size();
  auto take = [&](Vertex i, Vertex j) {
    t.k = std::max(t.k, single_qi_constant((*src.dist)(i, j), (*dst.dist)(img[i], img[j])));
  };
  if (m <= exhaustive_limit) {
    for (Vertex i = 0; i < m; ++i)
      for (Vertex j = i + 1; j < m; ++j) take(i, j);
  } else {
    t.exhaustive = false;
    Rng rng(seed);
    for (std::size_t s = 0; s < 50000; ++s)
      take(static_cast<Vertex>(rng.below(m)), static_cast<Vertex>(rng.below(m)));
  }
  return t;
}

ComposedTransition transition_along_geodesic(const MetricGraphBundle& b, Vertex w,
                                             Vertex z) {
  ComposedTransition c;
  c.from = w;
  c.to = z;
  c.base_path = geodesic(b.base_distance(), w, z);
  c.map = b.fiber(w);
  for (std::size_t i = 1; i < c.base_path.size(); ++i)
    for (Vertex& x : c.map) x = b.transit(x, c.base_path[i]);
  return c;
}

NetResult net_approximation(const MetricSample& s, double c) {
  if (s.base_of.size() != s.point_count) throw Error("net approximation: base_of size mismatch");
  auto fd = s.fiber_distance ? s.fiber_distance : s.distance;

  // greedy maximal 1-separated nets in id order
  std::vector<std::size_t> net_base;
  for (std::size_t u = 0; u < s.base_point_count; ++u) {
    bool ok = true;
    for (std::size_t v : net_base)
      if (s.base_distance(u, v) < 1.0) {
        ok = false;
        break;
      }
    if (ok) net_base.push_back(u);
  }
  std::vector<std::vector<std::size_t>> over(s.base_point_count);
  for (std::size_t p = 0; p < s.point_count; ++p) over[s.base_of[p]].push_back(p);

  NetResult res;
  std::vector<Vertex> proj;
  std::vector<std::vector<Vertex>> fiber_vertices(net_base.size());
  std::vector<std::string> labels;
  for (std::size_t bi = 0; bi < net_base.size(); ++bi) {
    const auto& pts = over[net_base[bi]];
    if (pts.empty())
      throw BundleError("surjective", {static_cast<Vertex>(bi)},
                        "empty fiber over net vertex " + std::to_string(bi) +
                            " (sample point " + std::to_string(net_base[bi]) + ")");
    std::vector<std::size_t> chosen;
    for (std::size_t p : pts) {
      bool ok = true;
      for (std::size_t q : chosen)
        if (fd(p, q) < 1.0) {
          ok = false;
          break;
        }
      if (ok) chosen.push_back(p);
    }
    for (std::size_t p : chosen) {
      fiber_vertices[bi].push_back(static_cast<Vertex>(res.point_of.size()));
      res.point_of.push_back(p);
      proj.push_back(static_cast<Vertex>(bi));
      if (!s.labels.empty()) labels.push_back(s.labels[p]);
    }
  }
  res.base_point_of = net_base;

  std::vector<Edge> base_edges;
  for (std::size_t i = 0; i < net_base.size(); ++i)
    for (std::size_t j = i + 1; j < net_base.size(); ++j)
      if (s.base_distance(net_base[i], net_base[j]) <= net_base_threshold())
        base_edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
  Graph base = Graph::from_edges(net_base.size(), base_edges);

  const double thr = net_fiber_threshold(c);
  std::vector<Edge> edges;
  const std::size_t n = res.point_of.size();
  for (Vertex x = 0; x < n; ++x)
    for (Vertex y = x + 1; y < n; ++y) {
      Vertex bx = proj[x], by = proj[y];
      if (bx != by && !base.adjacent(bx, by)) continue;
      if (s.distance(res.point_of[x], res.point_of[y]) <= thr) edges.emplace_back(x, y);
    }
  Graph total = Graph::from_edges(n, edges, false);
  if (!labels.empty()) total.set_labels(std::move(labels));
  res.bundle = verify_bundle(std::move(total), std::move(base), std::move(proj));
  res.bundle.meta()["generator"] = "net";
  res.bundle.meta()["c"] = c;
  res.bundle.meta()["fiber_threshold"] = thr;
  res.bundle.meta()["base_threshold"] = net_base_threshold();
  return res;
}

}  // namespace mgb
