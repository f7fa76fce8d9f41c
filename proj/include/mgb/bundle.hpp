#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgb/graph.hpp"

namespace mgb {

struct FiberView {
  Vertex base = 0;
  VertexSet vertices;  // global ids, sorted
  std::shared_ptr<const Graph> graph;
  std::unique_ptr<DistanceOracle> dist;

  Vertex local(Vertex global) const;
  Vertex global(Vertex local) const { return vertices[local]; }
  std::size_t distance(Vertex x, Vertex y) const { return (*dist)(local(x), local(y)); }
};

// Total graph, base graph and a simplicial surjection between them. Fiber
// data and distance oracles are built lazily and shared between copies.
class MetricGraphBundle {
 public:
  MetricGraphBundle() = default;

  const Graph& total() const { return *total_; }
  const Graph& base() const { return *base_; }
  std::shared_ptr<const Graph> total_ptr() const { return total_; }
  std::shared_ptr<const Graph> base_ptr() const { return base_; }

  Vertex proj(Vertex x) const { return proj_[x]; }
  const std::vector<Vertex>& projection() const { return proj_; }
  const VertexSet& fiber(Vertex b) const { return fibers_[b]; }
  std::size_t max_fiber_size() const;

  const FiberView& fiber_view(Vertex b) const;
  std::size_t fiber_distance(Vertex x, Vertex y) const;
  const DistanceOracle& total_distance() const;
  const DistanceOracle& base_distance() const;

  bool boundary(Vertex x) const { return !boundary_.empty() && boundary_[x]; }
  const std::vector<std::uint8_t>& boundary_flags() const { return boundary_; }
  std::size_t boundary_count() const;

  // Lowest-id neighbor of x in the fiber over b2; b2 adjacent to proj(x).
  Vertex transit(Vertex x, Vertex b2) const;
  // Image of x under the composed transitions along the canonical base
  // geodesic from proj(x) to z.
  Vertex flow(Vertex x, Vertex z) const;

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

 private:
  friend MetricGraphBundle verify_bundle(Graph, Graph, std::vector<Vertex>,
                                         std::vector<std::uint8_t>);
  struct Cache;

  std::shared_ptr<const Graph> total_, base_;
  std::vector<Vertex> proj_;
  std::vector<VertexSet> fibers_;
  std::vector<std::uint8_t> boundary_;
  std::shared_ptr<Cache> cache_;
  nlohmann::json meta_ = nlohmann::json::object();
};

// Throws BundleError whose axiom() is one of: projection, surjective,
// simplicial, fiber-connected, cross-edge.
MetricGraphBundle verify_bundle(Graph total, Graph base, std::vector<Vertex> proj,
                                std::vector<std::uint8_t> boundary = {});

struct PropernessPolicy {
  std::size_t exhaustive_fiber_limit = 500;
  std::size_t samples_per_fiber = 20000;
  std::uint64_t seed = 1;
};

struct PropernessProfile {
  std::vector<std::size_t> table;  // f(N) for N < table.size(), constant after
  bool exhaustive = true;
  std::size_t pairs = 0;

  std::size_t f(std::size_t n) const {
    if (table.empty()) return 0;
    return table[std::min(n, table.size() - 1)];
  }
  std::size_t K() const { return f(4); }
};

PropernessProfile measure_properness(const MetricGraphBundle& b,
                                     const PropernessPolicy& policy = {});

// Smallest K >= 1 with d1/K - K <= d2 <= K*d1 + K.
double single_qi_constant(std::size_t d1, std::size_t d2);

struct FiberTransition {
  Vertex source = 0;
  Vertex target = 0;
  std::vector<Vertex> map;  // indexed by position in fiber(source)
  double k = 1.0;           // single-constant qi measurement
  bool exhaustive = true;
};

FiberTransition fiber_transition(const MetricGraphBundle& b, Vertex b1, Vertex b2,
                                 std::size_t exhaustive_limit = 500,
                                 std::uint64_t seed = 1);

struct ComposedTransition {
  Vertex from = 0;
  Vertex to = 0;
  Path base_path;
  std::vector<Vertex> map;  // indexed by position in fiber(from)
};

ComposedTransition transition_along_geodesic(const MetricGraphBundle& b, Vertex w, Vertex z);

// Finite metric space sampled over a finite base metric space.
struct MetricSample {
  std::size_t point_count = 0;
  std::size_t base_point_count = 0;
  std::vector<std::size_t> base_of;  // point -> base point
  std::function<double(std::size_t, std::size_t)> distance;
  std::function<double(std::size_t, std::size_t)> base_distance;
  // Horizontal metric between two points over the same base point.
  std::function<double(std::size_t, std::size_t)> fiber_distance;
  std::vector<std::string> labels;
};

struct NetResult {
  MetricGraphBundle bundle;
  std::vector<std::size_t> point_of;       // total vertex -> sample point
  std::vector<std::size_t> base_point_of;  // base vertex -> base sample point
};

inline double net_base_threshold() { return 3.0; }
inline double net_fiber_threshold(double c) { return 6.0 * c + 3.0; }

NetResult net_approximation(const MetricSample& s, double c);

MetricGraphBundle generate_product_bundle(const Graph& base, const Graph& fiber);

struct HorocycleParams {
  double T = 4.0;
  double W = 16.0;
  double h = 1.0;
};

struct HorocycleIndex {
  int levels = 0;  // k in [-levels, levels]
  int half = 0;    // i in [-half, half]
  Vertex id(int k, int i) const {
    return static_cast<Vertex>((k + levels) * (2 * half + 1) + (i + half));
  }
  int level_of(Vertex v) const { return static_cast<int>(v) / (2 * half + 1) - levels; }
  int index_of(Vertex v) const { return static_cast<int>(v) % (2 * half + 1) - half; }
};

HorocycleIndex horocycle_index(const HorocycleParams& p);
// Level t = k*h, fiber point x = i*h*e^t (intrinsic spacing h).
MetricGraphBundle generate_horocycle_bundle(const HorocycleParams& p);
// Vertex at level k nearest to the flow line through horizontal coordinate x.
Vertex horocycle_flow_vertex(const HorocycleParams& p, int k, double x);

// Rank-2 free group words over a, b with inverses A, B.
namespace freegroup {

std::string reduce(const std::string& w);
std::string inverse(const std::string& w);
std::string multiply(const std::string& u, const std::string& v);
bool is_word(const std::string& w);
// Reduced words of length <= r in shortlex order, letters ordered a A b B.
std::vector<std::string> ball(int r);

struct Automorphism {
  std::string a = "a";
  std::string b = "b";

  std::string apply(const std::string& w) const;
  Automorphism then(const Automorphism& next) const;  // next after this
  Automorphism inverse() const;                      // throws if not invertible
  bool operator==(const Automorphism&) const = default;
  std::string str() const;
};

Automorphism parse_automorphism(const std::string& s);
// g with u = g v g^-1, if one exists.
std::optional<std::string> conjugator(const std::string& u, const std::string& v);
bool commute_up_to_inner(const Automorphism& f, const Automorphism& g);

}  // namespace freegroup

struct ExtensionParams {
  int R = 4;
  // Interval base 0..length when box == 0, else a box x box grid.
  int length = 6;
  int box = 0;
  std::vector<freegroup::Automorphism> monodromy{freegroup::Automorphism{}};
};

MetricGraphBundle generate_extension_bundle(const ExtensionParams& p);

void write_bundle(std::ostream& out, const MetricGraphBundle& b);
MetricGraphBundle read_bundle(std::istream& in);
void save_bundle(const std::string& path, const MetricGraphBundle& b);
MetricGraphBundle load_bundle(const std::string& path);

}  // namespace mgb
