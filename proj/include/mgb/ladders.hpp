#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mgb/bundle.hpp"
#include "mgb/sections.hpp"

namespace mgb {

struct Ladder {
  Section s1, s2;
  std::vector<Path> rungs;  // per base vertex: canonical fiber geodesic s1(b) -> s2(b)
  VertexSet vertices;
  std::size_t requested_L = 0;
  std::size_t L = 0;
  VertexSet neighborhood;                  // C_L, global ids
  std::shared_ptr<const Graph> cl_graph;   // induced on neighborhood
  std::vector<std::string> log;

  bool contains(Vertex x) const;
  // Index of x along the rung over b, or -1.
  long position(Vertex b, Vertex x) const;
  // Local id of x in cl_graph, or kNoVertex.
  Vertex cl_local(Vertex x) const;
};

// L is raised until C_L is connected; every raise is logged.
Ladder build_ladder(const MetricGraphBundle& b, const Section& s1, const Section& s2,
                    std::size_t L);

std::size_t girth(const Ladder& l);

// Fiberwise nearest point on the rung of x's fiber, lowest id on ties.
Vertex retraction(const MetricGraphBundle& b, const Ladder& l, Vertex x);

struct LipschitzReport {
  std::size_t constant = 0;
  Vertex x = 0, y = 0;  // witness edge
  std::size_t pairs = 0;
};

// max d(Pi x, Pi y) over adjacent x, y (restricted to `domain` when non-empty).
LipschitzReport retraction_lipschitz(const MetricGraphBundle& b, const Ladder& l,
                                     const VertexSet& domain = {});

// Projection of s onto the rungs, fiber by fiber.
Section project_section_into_ladder(const MetricGraphBundle& b, const Ladder& l,
                                    const Section& s);

// project_section_into_ladder of the barycenter-flow section through x.
Section ladder_section_through(const SectionFactory& f, const Ladder& l, Vertex x);

// Horizontal distance: min over b of d_b(s(b), t(b)).
std::size_t horizontal_distance(const MetricGraphBundle& b, const Section& s, const Section& t);

// Coboundedness of s1 and s2 inside C_L with its own path metric.
std::size_t ladder_coboundedness(const MetricGraphBundle& b, const Ladder& l);

struct DecompositionRecord {
  Vertex anchor = 0;
  std::size_t anchor_length = 0;
  std::size_t A = 0;
  std::vector<Section> sections;         // X'_0 = s1 .. X'_m = s2
  std::vector<std::size_t> positions;    // footpoint on the anchor rung
  std::vector<std::size_t> girths;       // d_h(X'_i, X'_{i+1})
  std::vector<bool> type2;               // girth > A, witness attached
  std::vector<long> witness_positions;   // anchor position of the witness, -1 if none
  double k = 1.0;                        // max measured section constant
  std::size_t violations = 0;            // (fiber, i) with footpoint order reversed
  std::size_t max_violation = 0;
  bool monotone = true;
  bool within_slack = true;              // max_violation <= 4 k^2
  std::vector<std::string> log;
};

DecompositionRecord decompose_ladder(const MetricGraphBundle& b, const Ladder& l,
                                     std::size_t A, const SectionFactory& f);

// A = max(A0 + 2, M + 1) with K1 = 1.
std::size_t default_decomposition_threshold(std::size_t A0, std::size_t M);

struct FamilyPath {
  Path points;
  std::array<std::size_t, 3> segments{};  // point counts of lift1, rung, lift2
  std::string note;                       // copied to the family log
};

// (x, y) -> discrete path, memoized. Thread-safe.
class PathFamily {
 public:
  using Builder = std::function<FamilyPath(Vertex, Vertex)>;
  PathFamily(std::string tag, Builder build);

  const std::string& tag() const { return tag_; }
  const FamilyPath& get(Vertex x, Vertex y) const;
  const Path& path(Vertex x, Vertex y) const { return get(x, y).points; }
  std::vector<std::string> log() const {
    std::lock_guard<std::mutex> lk(mu_);
    return log_;
  }

 private:
  std::string tag_;
  Builder build_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<Vertex, Vertex>, std::unique_ptr<FamilyPath>> memo_;
  mutable std::vector<std::string> log_;
};

// The returned families keep references to their arguments.
PathFamily small_girth_paths(const MetricGraphBundle& b, const Ladder& l,
                             const SectionFactory& f, std::size_t A);

PathFamily geodesic_paths(const DistanceOracle& d);

// Sections through x and y from the factory, ladder between them, canonical
// geodesic inside C_L.
PathFamily global_paths(const MetricGraphBundle& b, const SectionFactory& f, std::size_t L);

struct Tripod {
  Section s1, s2, s3, s4;
  Ladder l12, l34;
};

Tripod build_tripod(const MetricGraphBundle& b, const Section& s1, const Section& s2,
                    const Section& s3, std::size_t L);

struct TripodPoint {
  Vertex target = 0;
  std::size_t displacement = 0;  // horizontal distance moved
};

// Pi: fiberwise nearest point on the union of both rungs.
TripodPoint tripod_project(const MetricGraphBundle& b, const Tripod& t, Vertex x);
// Pi_1: fiberwise nearest point on the rung of C(s1, s2).
TripodPoint tripod_project_to_base_ladder(const MetricGraphBundle& b, const Tripod& t,
                                          Vertex x);
LipschitzReport tripod_lipschitz(const MetricGraphBundle& b, const Tripod& t);
// max over b of the fiber Hausdorff distance between the tripod rungs and the
// canonical triangle on s1(b), s2(b), s3(b).
std::size_t tripod_triangle_hausdorff(const MetricGraphBundle& b, const Tripod& t);

struct HamenstadtPolicy {
  std::size_t short_pair = 2;  // property (2) applies when d(x, y) <= short_pair
  std::vector<std::size_t> grid{0, 1, 2, 3, 4};  // the last value is the cap
  std::size_t sample_vertices = 48;
  std::size_t subpath_pairs = 12;   // per path
  std::size_t triangles = 4000;
  std::uint64_t seed = 1;
};

struct HamenstadtWitness {
  std::string property;
  std::vector<Vertex> points;  // pair or triangle corners (and the far point last)
  std::size_t value = 0;
};

struct HamenstadtReport {
  std::array<std::size_t, 4> measured{};  // gap, short-pair length, subpath, slimness
  std::array<long, 4> D{};                // grid values, -1 when above the cap
  bool pass = true;
  std::vector<HamenstadtWitness> witnesses;  // worst case per property
  std::size_t pairs = 0, triangles = 0;
};

HamenstadtReport hamenstadt_check(const PathFamily& pf, const DistanceOracle& d,
                                  const std::vector<Vertex>& sample,
                                  const HamenstadtPolicy& policy = {});
// Random vertices away from truncation boundaries.
std::vector<Vertex> interior_sample(const MetricGraphBundle& b, std::size_t k,
                                    std::uint64_t seed);
// Picks policy.sample_vertices vertices with the policy seed.
HamenstadtReport hamenstadt_check(const PathFamily& pf, const DistanceOracle& d,
                                  const HamenstadtPolicy& policy = {});

}  // namespace mgb
