#include "mgb/ladders.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "mgb/hyperbolicity.hpp"
#include "mgb/util.hpp"

namespace mgb {

bool Ladder::contains(Vertex x) const {
  return std::binary_search(vertices.begin(), vertices.end(), x);
}

long Ladder::position(Vertex b, Vertex x) const {
  const Path& r = rungs.at(b);
  auto it = std::find(r.begin(), r.end(), x);
  return it == r.end() ? -1 : static_cast<long>(it - r.begin());
}

Vertex Ladder::cl_local(Vertex x) const {
  auto it = std::lower_bound(neighborhood.begin(), neighborhood.end(), x);
  if (it == neighborhood.end() || *it != x) return kNoVertex;
  return static_cast<Vertex>(it - neighborhood.begin());
}

namespace {

Path fiber_geodesic(const MetricGraphBundle& b, Vertex x, Vertex y) {
  const FiberView& fv = b.fiber_view(b.proj(x));
  Path p = geodesic(*fv.dist, fv.local(x), fv.local(y));
  for (Vertex& v : p) v = fv.global(v);
  return p;
}

// Nearest point of x on `targets` (global ids in x's fiber) in the fiber metric.
TripodPoint fiber_nearest(const MetricGraphBundle& b, Vertex x, const Path& targets) {
  const FiberView& fv = b.fiber_view(b.proj(x));
  auto row = fv.dist->row(fv.local(x));
  TripodPoint best{kNoVertex, std::numeric_limits<std::size_t>::max()};
  for (Vertex t : targets) {
    std::size_t d = row[fv.local(t)];
    if (d < best.displacement || (d == best.displacement && t < best.target)) best = {t, d};
  }
  return best;
}

}  // namespace

Ladder build_ladder(const MetricGraphBundle& b, const Section& s1, const Section& s2,
                    std::size_t L) {
  check_section(b, s1);
  check_section(b, s2);
  Ladder l;
  l.s1 = s1;
  l.s2 = s2;
  l.requested_L = L;
  const std::size_t nb = b.base().size();
  l.rungs.resize(nb);
  for (Vertex w = 0; w < nb; ++w) {
    l.rungs[w] = fiber_geodesic(b, s1(w), s2(w));
    l.vertices.insert(l.vertices.end(), l.rungs[w].begin(), l.rungs[w].end());
  }
  l.vertices = make_vertex_set(std::move(l.vertices));
  auto dist = multi_source_bfs(b.total(), l.vertices);
  for (;; ++L) {
    VertexSet nbh;
    for (Vertex x = 0; x < b.total().size(); ++x)
      if (dist[x] <= L) nbh.push_back(x);
    Graph g = nbh.size() == 0 ? Graph() : b.total().induced(nbh);
    if (g.connected()) {
      l.neighborhood = std::move(nbh);
      l.cl_graph = std::make_shared<const Graph>(std::move(g));
      break;
    }
    l.log.push_back("C_" + std::to_string(L) + " is disconnected; raising L to " +
                    std::to_string(L + 1));
  }
  l.L = L;
  return l;
}

std::size_t girth(const Ladder& l) {
  std::size_t g = std::numeric_limits<std::size_t>::max();
  for (const auto& r : l.rungs) g = std::min(g, path_length(r));
  return l.rungs.empty() ? 0 : g;
}

Vertex retraction(const MetricGraphBundle& b, const Ladder& l, Vertex x) {
  b.total().check(x);
  return fiber_nearest(b, x, l.rungs[b.proj(x)]).target;
}

LipschitzReport retraction_lipschitz(const MetricGraphBundle& b, const Ladder& l,
                                     const VertexSet& domain) {
  const std::size_t n = b.total().size();
  std::vector<Vertex> pi(n);
  parallel_for(n, [&](std::size_t x) { pi[x] = retraction(b, l, static_cast<Vertex>(x)); });
  LipschitzReport r;
  const DistanceOracle& d = b.total_distance();
  auto in = [&](Vertex x) {
    return domain.empty() || std::binary_search(domain.begin(), domain.end(), x);
  };
  for (auto [x, y] : b.total().edges()) {
    if (!in(x) || !in(y)) continue;
    ++r.pairs;
    std::size_t v = d(pi[x], pi[y]);
    if (v > r.constant) r = {v, x, y, r.pairs};
  }
  return r;
}

Section project_section_into_ladder(const MetricGraphBundle& b, const Ladder& l,
                                    const Section& s) {
  check_section(b, s);
  Section out;
  out.kind = SectionKind::kProjection;
  out.through = s.through;
  out.value.resize(s.size());
  for (Vertex w = 0; w < s.size(); ++w) out.value[w] = fiber_nearest(b, s(w), l.rungs[w]).target;
  return out;
}

Section ladder_section_through(const SectionFactory& f, const Ladder& l, Vertex x) {
  auto s = project_section_into_ladder(f.bundle(), l, f.barycenter_flow(x));
  s.through = x;
  return s;
}

std::size_t horizontal_distance(const MetricGraphBundle& b, const Section& s,
                                const Section& t) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (Vertex w = 0; w < s.size(); ++w) best = std::min(best, b.fiber_distance(s(w), t(w)));
  return best;
}

std::size_t ladder_coboundedness(const MetricGraphBundle& b, const Ladder& l) {
  DistanceOracle d(l.cl_graph);
  VertexSet u, v;
  for (Vertex w = 0; w < b.base().size(); ++w) {
    u.push_back(l.cl_local(l.s1(w)));
    v.push_back(l.cl_local(l.s2(w)));
  }
  return coboundedness(d, make_vertex_set(std::move(u)), make_vertex_set(std::move(v)));
}

std::size_t default_decomposition_threshold(std::size_t A0, std::size_t M) {
  return std::max(A0 + 2, M + 1);
}

DecompositionRecord decompose_ladder(const MetricGraphBundle& b, const Ladder& l,
                                     std::size_t A, const SectionFactory& f) {
  DecompositionRecord rec;
  rec.A = A;
  const std::size_t nb = b.base().size();
  for (Vertex w = 0; w < nb; ++w)
    if (path_length(l.rungs[w]) > rec.anchor_length) {
      rec.anchor = w;
      rec.anchor_length = path_length(l.rungs[w]);
    }
  const Path& alpha = l.rungs[rec.anchor];
  const std::size_t len = rec.anchor_length;

  std::map<std::size_t, Section> cand;
  auto through = [&](std::size_t t) -> const Section& {
    auto it = cand.find(t);
    if (it == cand.end()) it = cand.emplace(t, ladder_section_through(f, l, alpha[t])).first;
    return it->second;
  };

  rec.sections.push_back(l.s1);
  rec.positions.push_back(0);
  std::size_t si = 0;
  while (true) {
    const Section& cur = rec.sections.back();
    std::size_t to_end = horizontal_distance(b, cur, l.s2);
    if (to_end <= A || si == len) {
      rec.sections.push_back(l.s2);
      rec.positions.push_back(len);
      rec.girths.push_back(to_end);
      rec.type2.push_back(to_end > A);
      rec.witness_positions.push_back(-1);
      break;
    }
    std::size_t u = si;
    long exact = -1;
    for (std::size_t t = si + 1; t <= len; ++t) {
      std::size_t h = horizontal_distance(b, through(t), cur);
      if (h <= A) u = t;
      if (h == A) exact = static_cast<long>(t);
    }
    std::size_t next;
    long witness = -1;
    if (exact >= 0) {
      next = static_cast<std::size_t>(exact);
    } else {
      next = std::min(len, u + 1);
      if (u > si) witness = static_cast<long>(u);
    }
    Section y = next == len ? l.s2 : through(next);
    std::size_t h = horizontal_distance(b, y, cur);
    rec.girths.push_back(h);
    rec.type2.push_back(h > A);
    rec.witness_positions.push_back(h > A ? witness : -1);
    if (h > A) {
      std::ostringstream msg;
      msg << "type-2 step " << rec.sections.size() - 1 << " -> " << rec.sections.size()
          << ": girth " << h << " > " << A;
      if (witness >= 0) msg << ", witness through anchor position " << witness;
      rec.log.push_back(msg.str());
    }
    rec.sections.push_back(std::move(y));
    rec.positions.push_back(next);
    if (next == len) break;
    si = next;
  }

  for (const auto& s : rec.sections) rec.k = std::max(rec.k, measure_section_quality(b, s).k);
  for (std::size_t i = 0; i + 1 < rec.sections.size(); ++i)
    for (Vertex w = 0; w < nb; ++w) {
      long p = l.position(w, rec.sections[i](w));
      long q = l.position(w, rec.sections[i + 1](w));
      if (q < p) {
        ++rec.violations;
        rec.max_violation = std::max<std::size_t>(rec.max_violation, p - q);
      }
    }
  rec.monotone = rec.violations == 0;
  rec.within_slack = static_cast<double>(rec.max_violation) <= 4.0 * rec.k * rec.k;
  return rec;
}

PathFamily::PathFamily(std::string tag, Builder build)
    : tag_(std::move(tag)), build_(std::move(build)) {}

const FamilyPath& PathFamily::get(Vertex x, Vertex y) const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = memo_.find({x, y});
    if (it != memo_.end()) return *it->second;
  }
  auto p = std::make_unique<FamilyPath>(build_(x, y));
  std::lock_guard<std::mutex> lk(mu_);
  if (!p->note.empty() && !memo_.count({x, y})) log_.push_back(p->note);
  auto [it, fresh] = memo_.emplace(std::make_pair(x, y), std::move(p));
  return *it->second;
}

PathFamily small_girth_paths(const MetricGraphBundle& b, const Ladder& l,
                             const SectionFactory& f, std::size_t A) {
  return PathFamily("small-girth", [&b, &l, &f, A](Vertex x, Vertex y) {
    if (!l.contains(x) || !l.contains(y)) throw Error("small-girth paths need ladder points");
    FamilyPath out;
    if (x == y) {
      out.points = {x};
      out.segments = {1, 0, 0};
      return out;
    }
    Section s3 = ladder_section_through(f, l, x);
    Section s4 = ladder_section_through(f, l, y);
    VertexSet u = level_set(b, s3, s4, A);
    if (u.empty()) {
      std::size_t a = horizontal_distance(b, s3, s4);
      u = level_set(b, s3, s4, a);
      out.note = "level set empty for (" + std::to_string(x) + "," + std::to_string(y) +
                 "); threshold raised to " + std::to_string(a);
    }
    const DistanceOracle& db = b.base_distance();
    Vertex bx = b.proj(x), by = b.proj(y);
    Vertex meet = nearest_point_projection(db, bx, u).target;
    Path g1 = geodesic(db, bx, meet);
    Path g2 = geodesic(db, meet, by);
    auto push = [&](Vertex v) {
      if (out.points.empty() || out.points.back() != v) out.points.push_back(v);
    };
    for (Vertex w : g1) push(s3(w));
    out.segments[0] = out.points.size();
    Path rung = fiber_geodesic(b, s3(meet), s4(meet));
    for (Vertex v : rung) push(v);
    out.segments[1] = out.points.size() - out.segments[0];
    for (Vertex w : g2) push(s4(w));
    out.segments[2] = out.points.size() - out.segments[0] - out.segments[1];
    return out;
  });
}

PathFamily geodesic_paths(const DistanceOracle& d) {
  return PathFamily("geodesic", [&d](Vertex x, Vertex y) {
    FamilyPath out;
    out.points = geodesic(d, x, y);
    out.segments = {out.points.size(), 0, 0};
    return out;
  });
}

PathFamily global_paths(const MetricGraphBundle& b, const SectionFactory& f, std::size_t L) {
  struct Shared {
    std::mutex mu;
    std::map<Vertex, std::shared_ptr<const Section>> sections;
  };
  auto shared = std::make_shared<Shared>();
  auto section = [&f, shared](Vertex x) {
    {
      std::lock_guard<std::mutex> lk(shared->mu);
      auto it = shared->sections.find(x);
      if (it != shared->sections.end()) return it->second;
    }
    auto s = std::make_shared<const Section>(f.barycenter_flow(x));
    std::lock_guard<std::mutex> lk(shared->mu);
    return shared->sections.emplace(x, s).first->second;
  };
  return PathFamily("global", [&b, L, section](Vertex x, Vertex y) {
    FamilyPath out;
    if (x == y) {
      out.points = {x};
      out.segments = {1, 0, 0};
      return out;
    }
    const bool flip = y < x;
    if (flip) std::swap(x, y);
    auto sx = section(x);
    auto sy = section(y);
    Ladder l = build_ladder(b, *sx, *sy, L);
    Path p = geodesic(*l.cl_graph, l.cl_local(x), l.cl_local(y));
    for (Vertex& v : p) v = l.neighborhood[v];
    if (flip) std::reverse(p.begin(), p.end());
    out.points = std::move(p);
    out.segments = {out.points.size(), 0, 0};
    return out;
  });
}

Tripod build_tripod(const MetricGraphBundle& b, const Section& s1, const Section& s2,
                    const Section& s3, std::size_t L) {
  Tripod t;
  t.s1 = s1;
  t.s2 = s2;
  t.s3 = s3;
  t.l12 = build_ladder(b, s1, s2, L);
  t.s4 = project_section_into_ladder(b, t.l12, s3);
  t.l34 = build_ladder(b, s3, t.s4, L);
  return t;
}

TripodPoint tripod_project(const MetricGraphBundle& b, const Tripod& t, Vertex x) {
  b.total().check(x);
  Vertex w = b.proj(x);
  Path both = t.l12.rungs[w];
  both.insert(both.end(), t.l34.rungs[w].begin(), t.l34.rungs[w].end());
  return fiber_nearest(b, x, both);
}

TripodPoint tripod_project_to_base_ladder(const MetricGraphBundle& b, const Tripod& t,
                                          Vertex x) {
  b.total().check(x);
  return fiber_nearest(b, x, t.l12.rungs[b.proj(x)]);
}

LipschitzReport tripod_lipschitz(const MetricGraphBundle& b, const Tripod& t) {
  VertexSet dom = t.l12.neighborhood;
  dom.insert(dom.end(), t.l34.neighborhood.begin(), t.l34.neighborhood.end());
  dom = make_vertex_set(std::move(dom));
  std::vector<Vertex> pi(b.total().size(), kNoVertex);
  parallel_for(dom.size(), [&](std::size_t i) { pi[dom[i]] = tripod_project(b, t, dom[i]).target; });
  LipschitzReport r;
  const DistanceOracle& d = b.total_distance();
  for (auto [x, y] : b.total().edges()) {
    if (pi[x] == kNoVertex || pi[y] == kNoVertex) continue;
    ++r.pairs;
    std::size_t v = d(pi[x], pi[y]);
    if (v > r.constant) r = {v, x, y, r.pairs};
  }
  return r;
}

std::size_t tripod_triangle_hausdorff(const MetricGraphBundle& b, const Tripod& t) {
  std::size_t worst = 0;
  for (Vertex w = 0; w < b.base().size(); ++w) {
    const FiberView& fv = b.fiber_view(w);
    const DistanceOracle& d = *fv.dist;
    Triangle tri = canonical_triangle(d, fv.local(t.s1(w)), fv.local(t.s2(w)), fv.local(t.s3(w)));
    VertexSet a, c;
    for (const auto& side : tri.side) a.insert(a.end(), side.begin(), side.end());
    for (Vertex v : t.l12.rungs[w]) c.push_back(fv.local(v));
    for (Vertex v : t.l34.rungs[w]) c.push_back(fv.local(v));
    worst = std::max(worst, hausdorff_distance(d, make_vertex_set(std::move(a)),
                                               make_vertex_set(std::move(c))));
  }
  return worst;
}

namespace {

std::size_t discrete_length(const DistanceOracle& d, const Path& p) {
  std::size_t s = 0;
  for (std::size_t i = 1; i < p.size(); ++i) s += d(p[i - 1], p[i]);
  return s;
}

// max over p in a of d(p, b)
std::size_t one_sided(const DistanceOracle& d, const Path& a, const Path& b1, const Path* b2,
                      Vertex* far = nullptr) {
  std::size_t worst = 0;
  for (Vertex p : a) {
    auto row = d.row(p);
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (Vertex q : b1) m = std::min<std::size_t>(m, row[q]);
    if (b2)
      for (Vertex q : *b2) m = std::min<std::size_t>(m, row[q]);
    if (m > worst || (far && m == worst && worst == 0)) {
      worst = m;
      if (far) *far = p;
    }
  }
  return worst;
}

}  // namespace

HamenstadtReport hamenstadt_check(const PathFamily& pf, const DistanceOracle& d,
                                  const std::vector<Vertex>& sample,
                                  const HamenstadtPolicy& policy) {
  HamenstadtReport r;
  r.witnesses.resize(4);
  const char* names[4] = {"gap", "short-pair", "subpath", "slim"};
  for (int i = 0; i < 4; ++i) r.witnesses[i].property = names[i];
  auto note = [&](int i, std::size_t v, std::vector<Vertex> pts) {
    if (v > r.measured[i] || r.witnesses[i].points.empty()) {
      r.measured[i] = std::max(r.measured[i], v);
      r.witnesses[i] = {names[i], std::move(pts), v};
    }
  };

  std::vector<std::pair<Vertex, Vertex>> pairs;
  for (std::size_t i = 0; i < sample.size(); ++i)
    for (std::size_t j = 0; j < sample.size(); ++j)
      if (i != j) pairs.emplace_back(sample[i], sample[j]);
  // short pairs around each sample point
  std::vector<std::pair<Vertex, Vertex>> shorts;
  for (Vertex x : sample) {
    auto row = d.row(x);
    for (Vertex y = 0; y < d.graph().size(); ++y)
      if (y != x && row[y] <= policy.short_pair) shorts.emplace_back(x, y);
  }
  std::vector<const Path*> paths(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    paths[i] = &pf.path(pairs[i].first, pairs[i].second);
  });
  std::vector<const Path*> spaths(shorts.size());
  parallel_for(shorts.size(), [&](std::size_t i) {
    spaths[i] = &pf.path(shorts[i].first, shorts[i].second);
  });
  r.pairs = pairs.size() + shorts.size();

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Path& p = *paths[i];
    if (p.empty() || p.front() != pairs[i].first || p.back() != pairs[i].second)
      throw Error("path family returned a path with wrong endpoints");
    for (std::size_t j = 1; j < p.size(); ++j)
      note(0, d(p[j - 1], p[j]), {pairs[i].first, pairs[i].second, p[j - 1], p[j]});
  }
  for (std::size_t i = 0; i < shorts.size(); ++i) {
    const Path& p = *spaths[i];
    for (std::size_t j = 1; j < p.size(); ++j)
      note(0, d(p[j - 1], p[j]), {shorts[i].first, shorts[i].second, p[j - 1], p[j]});
    note(1, discrete_length(d, p), {shorts[i].first, shorts[i].second});
  }

  // subpath stability
  Rng rng(policy.seed);
  struct Sub {
    std::size_t path;
    std::size_t a, c;
  };
  std::vector<Sub> subs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Path& p = *paths[i];
    if (p.size() < 3) continue;
    std::size_t all = p.size() * (p.size() - 1) / 2;
    if (all <= policy.subpath_pairs) {
      for (std::size_t a = 0; a < p.size(); ++a)
        for (std::size_t c = a + 1; c < p.size(); ++c) subs.push_back({i, a, c});
    } else {
      for (std::size_t k = 0; k < policy.subpath_pairs; ++k) {
        auto idx = rng.sample_indices(p.size(), 2);
        subs.push_back({i, std::min(idx[0], idx[1]), std::max(idx[0], idx[1])});
      }
    }
  }
  std::vector<std::size_t> subval(subs.size());
  parallel_for(subs.size(), [&](std::size_t k) {
    const Path& p = *paths[subs[k].path];
    Path seg(p.begin() + subs[k].a, p.begin() + subs[k].c + 1);
    if (seg.front() == seg.back()) return;
    const Path& q = pf.path(seg.front(), seg.back());
    subval[k] = std::max(one_sided(d, seg, q, nullptr), one_sided(d, q, seg, nullptr));
  });
  for (std::size_t k = 0; k < subs.size(); ++k) {
    const Path& p = *paths[subs[k].path];
    note(2, subval[k], {p.front(), p.back(), p[subs[k].a], p[subs[k].c]});
  }

  // slim triangles
  std::vector<std::array<Vertex, 3>> tris;
  const std::size_t m = sample.size();
  if (m >= 3) {
    std::size_t all = m * (m - 1) * (m - 2) / 6;
    if (all <= policy.triangles) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
          for (std::size_t k = j + 1; k < m; ++k) tris.push_back({sample[i], sample[j], sample[k]});
    } else {
      for (std::size_t t = 0; t < policy.triangles; ++t) {
        auto idx = rng.sample_indices(m, 3);
        tris.push_back({sample[idx[0]], sample[idx[1]], sample[idx[2]]});
      }
    }
  }
  r.triangles = tris.size();
  std::vector<std::pair<std::size_t, Vertex>> slim(tris.size());
  parallel_for(tris.size(), [&](std::size_t t) {
    auto [x, y, z] = tris[t];
    const Path& xy = pf.path(x, y);
    const Path& yz = pf.path(y, z);
    const Path& xz = pf.path(x, z);
    Vertex f1 = x, f2 = y, f3 = z;
    std::size_t a = one_sided(d, xy, yz, &xz, &f1);
    std::size_t b = one_sided(d, yz, xy, &xz, &f2);
    std::size_t c = one_sided(d, xz, xy, &yz, &f3);
    if (a >= b && a >= c) slim[t] = {a, f1};
    else if (b >= c) slim[t] = {b, f2};
    else slim[t] = {c, f3};
  });
  for (std::size_t t = 0; t < tris.size(); ++t)
    note(3, slim[t].first, {tris[t][0], tris[t][1], tris[t][2], slim[t].second});

  for (int i = 0; i < 4; ++i) {
    r.D[i] = -1;
    for (std::size_t g : policy.grid)
      if (g >= r.measured[i] && (r.D[i] < 0 || static_cast<long>(g) < r.D[i]))
        r.D[i] = static_cast<long>(g);
    if (r.D[i] < 0) r.pass = false;
  }
  return r;
}

std::vector<Vertex> interior_sample(const MetricGraphBundle& b, std::size_t k,
                                    std::uint64_t seed) {
  std::vector<Vertex> in;
  for (Vertex x = 0; x < b.total().size(); ++x)
    if (!b.boundary(x)) in.push_back(x);
  Rng rng(seed);
  std::vector<Vertex> out;
  for (auto i : rng.sample_indices(in.size(), std::min(k, in.size()))) out.push_back(in[i]);
  std::sort(out.begin(), out.end());
  return out;
}

HamenstadtReport hamenstadt_check(const PathFamily& pf, const DistanceOracle& d,
                                  const HamenstadtPolicy& policy) {
  const std::size_t n = d.graph().size();
  Rng rng(policy.seed);
  std::vector<Vertex> sample;
  for (auto i : rng.sample_indices(n, std::min(n, policy.sample_vertices)))
    sample.push_back(static_cast<Vertex>(i));
  std::sort(sample.begin(), sample.end());
  return hamenstadt_check(pf, d, sample, policy);
}

}  // namespace mgb
