#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgb/graph.hpp"

namespace mgb {

HalfInt gromov_product(const DistanceOracle& d, Vertex y, Vertex z, Vertex x);
HalfInt gromov_product(const Graph& g, Vertex y, Vertex z, Vertex x);

// A point of the metric graph: a vertex (a == b) or the midpoint of edge ab.
struct GraphPoint {
  Vertex a = 0;
  Vertex b = 0;
  bool is_vertex() const { return a == b; }
  auto operator<=>(const GraphPoint&) const = default;
};

// Point at arc length twice/2 from the start of p.
GraphPoint point_on_path(const Path& p, std::int64_t twice);
// Metric-graph distance, doubled.
std::int64_t point_distance_twice(const DistanceOracle& d, GraphPoint p, GraphPoint q);

// side[k] joins the two corners other than x[k], running from the lower
// corner index to the higher one.
struct Triangle {
  std::array<Vertex, 3> x{};
  std::array<Path, 3> side;
};

Triangle canonical_triangle(const DistanceOracle& d, Vertex x0, Vertex x1, Vertex x2);

struct TriangleMeasure {
  HalfInt slim;    // smallest D with each side in N_D(other two)
  HalfInt insize;  // diameter of the internal points
  HalfInt thin;    // largest gap between synchronized points on two legs
};

// Exact on the metric graph, including edge interiors.
TriangleMeasure measure_triangle(const DistanceOracle& d, const Triangle& t);

struct InternalPoint {
  Vertex from = 0;        // x_i, the corner the arc is measured from
  Vertex to = 0;          // x_j
  HalfInt arc;            // d(x_i, c)
  GraphPoint exact;
  Vertex snapped = 0;     // floor of the arc toward x_i
};

// c[k] lies on side[k] of the canonical triangle.
std::array<InternalPoint, 3> internal_points(const DistanceOracle& d, Vertex x0,
                                             Vertex x1, Vertex x2);
std::array<InternalPoint, 3> internal_points(const DistanceOracle& d, const Triangle& t);

struct Barycenter {
  Vertex vertex = 0;
  std::array<std::size_t, 3> side_distance{};  // distance to side[k]
};

Barycenter barycenter(const DistanceOracle& d, Vertex x0, Vertex x1, Vertex x2);
Vertex barycenter(const Graph& g, Vertex x0, Vertex x1, Vertex x2);

enum class SlimMode { kAuto, kExact, kCanonical, kSampled };

struct TrianglePolicy {
  SlimMode mode = SlimMode::kAuto;
  std::size_t exact_threshold = 40;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  // Cap on the total number of geodesic combinations in exact mode.
  std::uint64_t exact_budget = 4'000'000;
};

struct HyperbolicityReport {
  HalfInt delta_slim;
  std::optional<HalfInt> delta_4pt;
  Triangle witness;
  HalfInt insize_max;
  HalfInt thin_max;
  std::string mode;  // exact | canonical | sampled
  std::uint64_t seed = 0;
  std::uint64_t triangles = 0;
  // Largest insize and thinness seen on any single triangle relative to the
  // global delta; negative values mean slack.
  HalfInt insize_excess;
  HalfInt thin_excess;
};

HyperbolicityReport delta_slim(const DistanceOracle& d, const TrianglePolicy& policy = {});

// All geodesics from u to v, or nullopt if there are more than limit.
std::optional<std::vector<Path>> all_geodesics(const DistanceOracle& d, Vertex u,
                                               Vertex v, std::size_t limit);
// Saturating count of geodesics from u to v.
std::uint64_t geodesic_count(const DistanceOracle& d, Vertex u, Vertex v);

struct FourPointPolicy {
  std::size_t exact_cap = 5000;
  bool allow_sampling = false;
  std::size_t samples = 2'000'000;
  std::uint64_t seed = 1;
};

struct FourPointResult {
  HalfInt delta;
  std::array<Vertex, 4> witness{};
  bool exact = true;
};

FourPointResult delta_four_point(const DistanceOracle& d, const FourPointPolicy& policy = {});

// Pairs whose endpoints cannot be pushed further apart by a single step.
std::vector<Edge> far_apart_pairs(const DistanceOracle& d);

struct PairSample {
  std::size_t exhaustive_limit = 200;  // |A| up to this: all pairs
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
};

std::size_t quasiconvexity_constant(const DistanceOracle& d, const VertexSet& a,
                                    const PairSample& sample = {});

struct ProjectionWitness {
  Vertex source = 0;
  Vertex target = 0;
  std::size_t distance = 0;
};

ProjectionWitness nearest_point_projection(const DistanceOracle& d, Vertex x,
                                           const VertexSet& a);
ProjectionWitness nearest_point_projection(const Graph& g, Vertex x, const VertexSet& a);

struct QuasiGeodesicParams {
  double k = 1.0;
  int eps = 0;
  bool within_grid = true;
  std::size_t witness_s = 0, witness_t = 0;
};

// Grid: k in {1, 1.25, ..., 8}, eps in {0, ..., 32}; smallest k first.
// p may be a discrete path (consecutive vertices need not be adjacent).
QuasiGeodesicParams quasigeodesic_params(const DistanceOracle& d, const Path& p);

std::size_t coboundedness(const DistanceOracle& d, const VertexSet& u, const VertexSet& v);
std::size_t hausdorff_distance(const DistanceOracle& d, const VertexSet& a,
                               const VertexSet& b);
std::size_t hausdorff_distance(const Graph& g, const VertexSet& a, const VertexSet& b);
std::size_t set_diameter(const DistanceOracle& d, const VertexSet& a);

// max over x of d(pi_V(pi_U(x)), pi_V(x)) for V inside U.
std::size_t nested_projection_defect(const DistanceOracle& d, const VertexSet& u,
                                     const VertexSet& v);

}  // namespace mgb
