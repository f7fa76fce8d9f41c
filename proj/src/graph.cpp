#include "mgb/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>

#include "mgb/util.hpp"

namespace mgb {

Graph Graph::from_edges(std::size_t n, const std::vector<Edge>& edges,
                        bool require_connected) {
  if (n >= kNoVertex) throw GraphError("too many vertices");
  std::vector<Edge> e;
  e.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n)
      throw GraphError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") references a vertex outside [0," + std::to_string(n) + ")");
    if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
    e.emplace_back(u, v);
    e.emplace_back(v, u);
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());

  Graph g;
  g.offsets_.assign(n + 1, 0);
  for (auto [u, v] : e) ++g.offsets_[u + 1];
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.adj_.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) g.adj_[i] = e[i].second;
  if (require_connected && !g.connected())
    throw GraphError("graph is disconnected");
  return g;
}

bool Graph::adjacent(Vertex u, Vertex v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

void Graph::check(Vertex v) const {
  if (v >= size())
    throw GraphError("invalid vertex id " + std::to_string(v) + " (graph has " +
                     std::to_string(size()) + " vertices)");
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Vertex u = 0; u < size(); ++u)
    for (Vertex v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

bool Graph::connected() const {
  if (size() <= 1) return true;
  auto d = bfs_distances(*this, 0);
  return std::find(d.begin(), d.end(), kUnreachable) == d.end();
}

void Graph::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != size())
    throw GraphError("label count does not match vertex count");
  labels_ = std::move(labels);
}

Graph Graph::induced(const VertexSet& verts) const {
  std::vector<Edge> e;
  for (Vertex i = 0; i < verts.size(); ++i) {
    for (Vertex w : neighbors(verts[i])) {
      auto it = std::lower_bound(verts.begin(), verts.end(), w);
      if (it != verts.end() && *it == w) {
        Vertex j = static_cast<Vertex>(it - verts.begin());
        if (i < j) e.emplace_back(i, j);
      }
    }
  }
  return from_edges(verts.size(), e, false);
}

namespace {

bool parse_uint(std::string_view s, std::uint64_t& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && !(s[j] == ' ' || s[j] == '\t' || s[j] == '\r' || s[j] == ',')) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

Graph load_graph(std::istream& in) {
  std::vector<Edge> edges;
  std::uint64_t max_id = 0;
  bool any = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s(line);
    if (auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
    auto tok = split_ws(s);
    if (tok.empty()) continue;
    std::uint64_t a = 0, b = 0;
    if (tok.size() > 2 || !parse_uint(tok[0], a) ||
        (tok.size() == 2 && !parse_uint(tok[1], b)))
      throw GraphError("malformed line " + std::to_string(lineno) + ": '" + line + "'",
                       lineno);
    if (tok.size() == 1) b = a;
    if (a >= kNoVertex || b >= kNoVertex)
      throw GraphError("vertex id too large on line " + std::to_string(lineno), lineno);
    if (tok.size() == 2) {
      if (a == b)
        throw GraphError("self-loop on line " + std::to_string(lineno), lineno);
      edges.emplace_back(static_cast<Vertex>(a), static_cast<Vertex>(b));
    }
    max_id = std::max({max_id, a, b});
    any = true;
  }
  if (!any) throw GraphError("empty graph");
  return Graph::from_edges(max_id + 1, edges, true);
}

Graph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path);
  return load_graph(in);
}

void write_graph(std::ostream& out, const Graph& g) {
  if (g.size() == 1) out << "0\n";
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

void bfs_fill(const Graph& g, Vertex src, std::span<Dist> out) {
  std::fill(out.begin(), out.end(), kUnreachable);
  thread_local std::vector<Vertex> queue;
  queue.resize(g.size());
  std::size_t head = 0, tail = 0;
  out[src] = 0;
  queue[tail++] = src;
  while (head < tail) {
    Vertex u = queue[head++];
    Dist du = static_cast<Dist>(out[u] + 1);
    for (Vertex w : g.neighbors(u)) {
      if (out[w] == kUnreachable) {
        out[w] = du;
        queue[tail++] = w;
      }
    }
  }
}

std::vector<Dist> bfs_distances(const Graph& g, Vertex src) {
  g.check(src);
  std::vector<Dist> d(g.size());
  bfs_fill(g, src, d);
  return d;
}

std::vector<Dist> multi_source_bfs(const Graph& g, std::span<const Vertex> sources) {
  std::vector<Dist> d(g.size(), kUnreachable);
  std::vector<Vertex> queue;
  queue.reserve(g.size());
  for (Vertex s : sources) {
    g.check(s);
    if (d[s] != 0) {
      d[s] = 0;
      queue.push_back(s);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Vertex u = queue[head];
    for (Vertex w : g.neighbors(u)) {
      if (d[w] == kUnreachable) {
        d[w] = static_cast<Dist>(d[u] + 1);
        queue.push_back(w);
      }
    }
  }
  return d;
}

namespace {

// Distances from sources first..first+count-1 (count <= 64) at once, one bit
// per source. Writes column entries of the symmetric matrix, i.e.
// m[v * n + source].
void bfs_fill_batch(const Graph& g, Vertex first, unsigned count, Dist* m) {
  const std::size_t n = g.size();
  thread_local std::vector<std::uint64_t> seen, frontier, next;
  seen.assign(n, 0);
  frontier.assign(n, 0);
  next.assign(n, 0);
  const std::uint64_t full = count == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
  for (unsigned j = 0; j < count; ++j) {
    seen[first + j] |= std::uint64_t{1} << j;
    frontier[first + j] |= std::uint64_t{1} << j;
    m[std::size_t{first + j} * n + first + j] = 0;
  }
  bool active = true;
  for (Dist level = 1; active; ++level) {
    active = false;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] = 0;
      if (seen[v] == full) continue;
      std::uint64_t acc = 0;
      for (Vertex u : g.neighbors(static_cast<Vertex>(v))) acc |= frontier[u];
      acc &= ~seen[v];
      if (!acc) continue;
      next[v] = acc;
      seen[v] |= acc;
      active = true;
      Dist* row = m + v * n + first;
      while (acc) {
        row[std::countr_zero(acc)] = level;
        acc &= acc - 1;
      }
    }
    std::swap(frontier, next);
  }
}

}  // namespace

DistanceOracle::DistanceOracle(std::shared_ptr<const Graph> g,
                               std::size_t matrix_threshold)
    : g_(std::move(g)) {
  const std::size_t n = g_->size();
  if (n > 0 && n <= matrix_threshold) {
    mode_ = Mode::kMatrix;
    matrix_.assign(n * n, kUnreachable);
    parallel_for((n + 63) / 64, [&](std::size_t batch) {
      const std::size_t first = batch * 64;
      bfs_fill_batch(*g_, static_cast<Vertex>(first),
                     static_cast<unsigned>(std::min<std::size_t>(64, n - first)), matrix_.data());
    });
  } else {
    mode_ = Mode::kOnDemand;
    rows_.resize(n);
  }
}

std::span<const Dist> DistanceOracle::row(Vertex u) const {
  g_->check(u);
  const std::size_t n = g_->size();
  if (mode_ == Mode::kMatrix) return {matrix_.data() + std::size_t{u} * n, n};
  {
    std::lock_guard lk(mu_);
    if (rows_[u]) return *rows_[u];
  }
  auto r = std::make_unique<std::vector<Dist>>(n);
  bfs_fill(*g_, u, *r);
  std::lock_guard lk(mu_);
  if (!rows_[u]) rows_[u] = std::move(r);
  return *rows_[u];
}

Dist DistanceOracle::operator()(Vertex u, Vertex v) const {
  g_->check(v);
  if (mode_ == Mode::kMatrix) {
    g_->check(u);
    return matrix_[std::size_t{u} * g_->size() + v];
  }
  return row(u)[v];
}

std::size_t DistanceOracle::diameter() const {
  std::size_t best = 0;
  for (Vertex u = 0; u < g_->size(); ++u) {
    auto r = row(u);
    for (Dist d : r)
      if (d != kUnreachable) best = std::max<std::size_t>(best, d);
  }
  return best;
}

std::size_t distance(const Graph& g, Vertex u, Vertex v) {
  g.check(v);
  return bfs_distances(g, u)[v];
}

Path geodesic_from_row(const Graph& g, std::span<const Dist> row_u, Vertex u,
                       Vertex v) {
  g.check(u);
  g.check(v);
  if (row_u[v] == kUnreachable) throw GraphError("no path between vertices");
  Path p(static_cast<std::size_t>(row_u[v]) + 1);
  Vertex cur = v;
  for (std::size_t i = p.size(); i-- > 0;) {
    p[i] = cur;
    if (i == 0) break;
    for (Vertex w : g.neighbors(cur)) {
      if (row_u[w] + 1 == row_u[cur]) {
        cur = w;
        break;
      }
    }
  }
  return p;
}

Path geodesic(const Graph& g, Vertex u, Vertex v) {
  g.check(u);
  return geodesic_from_row(g, bfs_distances(g, u), u, v);
}

Path geodesic(const DistanceOracle& d, Vertex u, Vertex v) {
  return geodesic_from_row(d.graph(), d.row(u), u, v);
}

VertexSet ball(const Graph& g, Vertex center, std::size_t radius) {
  auto d = bfs_distances(g, center);
  VertexSet out;
  for (Vertex v = 0; v < g.size(); ++v)
    if (d[v] <= radius) out.push_back(v);
  return out;
}

std::size_t diameter(const Graph& g) {
  std::size_t best = 0;
  std::vector<Dist> d(g.size());
  for (Vertex u = 0; u < g.size(); ++u) {
    bfs_fill(g, u, d);
    for (Dist x : d)
      if (x != kUnreachable) best = std::max<std::size_t>(best, x);
  }
  return best;
}

bool is_path(const Graph& g, const Path& p) {
  if (p.empty()) return false;
  for (Vertex v : p)
    if (!g.valid(v)) return false;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    if (!g.adjacent(p[i], p[i + 1])) return false;
  return true;
}

Graph cone_off(const Graph& g, const std::vector<VertexSet>& subsets) {
  auto e = g.edges();
  Vertex apex = static_cast<Vertex>(g.size());
  for (const auto& s : subsets) {
    if (s.empty()) throw GraphError("cone_off: empty subset");
    for (Vertex v : s) {
      g.check(v);
      e.emplace_back(v, apex);
    }
    ++apex;
  }
  Graph out = Graph::from_edges(apex, e, g.connected());
  if (!g.labels().empty()) {
    auto labels = g.labels();
    for (Vertex a = static_cast<Vertex>(g.size()); a < apex; ++a)
      labels.push_back("apex" + std::to_string(a - g.size()));
    out.set_labels(std::move(labels));
  }
  return out;
}

Graph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::from_edges(n, e);
}

Graph cycle_graph(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i < n; ++i) e.emplace_back(i, static_cast<Vertex>((i + 1) % n));
  return Graph::from_edges(n, e);
}

Graph grid_graph(std::size_t rows, std::size_t cols) {
  std::vector<Edge> e;
  auto id = [&](std::size_t r, std::size_t c) { return static_cast<Vertex>(r * cols + c); };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) e.emplace_back(id(r, c), id(r + 1, c));
    }
  return Graph::from_edges(rows * cols, e);
}

Graph random_tree(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> e;
  for (Vertex i = 1; i < n; ++i) e.emplace_back(static_cast<Vertex>(rng.below(i)), i);
  return Graph::from_edges(n, e);
}

Graph random_connected_graph(std::size_t n, double edge_prob, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> e;
  for (Vertex i = 1; i < n; ++i) e.emplace_back(static_cast<Vertex>(rng.below(i)), i);
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  if (n <= 2000) {
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = u + 1; v < n; ++v)
        if (rng.unit() < edge_prob) e.emplace_back(u, v);
  } else {
    auto extra = static_cast<std::size_t>(edge_prob * pairs);
    for (std::size_t k = 0; k < extra; ++k) {
      Vertex u = static_cast<Vertex>(rng.below(n));
      Vertex v = static_cast<Vertex>(rng.below(n));
      if (u != v) e.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, e);
}

}  // namespace mgb
