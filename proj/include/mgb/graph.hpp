#pragma once

#include <istream>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mgb/common.hpp"

namespace mgb {

using Edge = std::pair<Vertex, Vertex>;

// Immutable undirected unit-edge graph in CSR form.
class Graph {
 public:
  Graph() = default;

  // Duplicate edges are merged. Throws GraphError on self-loops, ids out of
  // range, or (if require_connected) a disconnected result.
  static Graph from_edges(std::size_t n, const std::vector<Edge>& edges,
                          bool require_connected = true);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return adj_.size() / 2; }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  bool adjacent(Vertex u, Vertex v) const;
  bool valid(Vertex v) const { return v < size(); }
  void check(Vertex v) const;

  std::vector<Edge> edges() const;  // u < v, sorted
  bool connected() const;

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels);
  std::string label(Vertex v) const {
    return v < labels_.size() ? labels_[v] : std::string();
  }

  // Subgraph induced on a sorted vertex set; vertex i of the result is
  // verts[i]. May be disconnected.
  Graph induced(const VertexSet& verts) const;

  bool operator==(const Graph& o) const {
    return offsets_ == o.offsets_ && adj_ == o.adj_;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> adj_;
  std::vector<std::string> labels_;
};

// Edge list text: "u v" per line, '#' comments, a lone "v" declares a vertex.
Graph load_graph(std::istream& in);
Graph load_graph_file(const std::string& path);
void write_graph(std::ostream& out, const Graph& g);

// BFS from src into out (size g.size()). Unreached vertices get kUnreachable.
void bfs_fill(const Graph& g, Vertex src, std::span<Dist> out);
std::vector<Dist> bfs_distances(const Graph& g, Vertex src);
std::vector<Dist> multi_source_bfs(const Graph& g, std::span<const Vertex> sources);

// Exact distances: a full 16-bit matrix up to a vertex threshold, cached
// BFS rows above it. Thread-safe.
class DistanceOracle {
 public:
  enum class Mode { kMatrix, kOnDemand };

  static constexpr std::size_t kDefaultMatrixThreshold = 20000;

  explicit DistanceOracle(std::shared_ptr<const Graph> g,
                          std::size_t matrix_threshold = kDefaultMatrixThreshold);

  const Graph& graph() const { return *g_; }
  std::shared_ptr<const Graph> graph_ptr() const { return g_; }
  Mode mode() const { return mode_; }

  Dist operator()(Vertex u, Vertex v) const;
  // Valid for the lifetime of the oracle.
  std::span<const Dist> row(Vertex u) const;

  std::size_t diameter() const;

 private:
  std::shared_ptr<const Graph> g_;
  Mode mode_;
  std::vector<Dist> matrix_;
  mutable std::mutex mu_;
  mutable std::vector<std::unique_ptr<std::vector<Dist>>> rows_;
};

std::size_t distance(const Graph& g, Vertex u, Vertex v);

// Lowest-id predecessor rule: walking back from v, always step to the
// smallest neighbor one unit closer to u.
Path geodesic(const Graph& g, Vertex u, Vertex v);
Path geodesic(const DistanceOracle& d, Vertex u, Vertex v);
Path geodesic_from_row(const Graph& g, std::span<const Dist> row_u, Vertex u,
                       Vertex v);

VertexSet ball(const Graph& g, Vertex center, std::size_t radius);
std::size_t diameter(const Graph& g);

bool is_path(const Graph& g, const Path& p);
inline std::size_t path_length(const Path& p) {
  return p.empty() ? 0 : p.size() - 1;
}

// Adds one apex per subset (ids n, n+1, ...) joined to every member.
Graph cone_off(const Graph& g, const std::vector<VertexSet>& subsets);

// Small constructors used by tests, generators and the CLI.
Graph path_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
Graph grid_graph(std::size_t rows, std::size_t cols);
Graph random_connected_graph(std::size_t n, double edge_prob, std::uint64_t seed);
Graph random_tree(std::size_t n, std::uint64_t seed);

}  // namespace mgb
