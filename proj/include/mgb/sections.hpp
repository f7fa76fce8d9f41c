#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mgb/bundle.hpp"
#include "mgb/common.hpp"

namespace mgb {

enum class SectionKind { kBarycenterFlow, kProjection, kConstant, kTransition, kUser };

std::string to_string(SectionKind k);

struct Section {
  std::vector<Vertex> value;  // indexed by base vertex
  SectionKind kind = SectionKind::kUser;
  Vertex through = kNoVertex;
  bool fallback = false;        // no separated triple near the start fiber
  std::size_t separation = 0;   // s used at the start fiber
  std::size_t anchor_gap = 0;   // fiber distance from `through` to the chosen barycenter
  std::size_t reanchors = 0;
  std::size_t coherence = 0;    // max fiber jump between flowed and transited barycenters
  std::vector<std::string> log;

  Vertex operator()(Vertex b) const { return value[b]; }
  std::size_t size() const { return value.size(); }
};

// Throws Error when s does not pick one vertex in every fiber.
void check_section(const MetricGraphBundle& b, const Section& s);

struct FarTriple {
  std::array<Vertex, 3> v{};            // global ids, sorted
  std::size_t min_separation = 0;
  std::array<HalfInt, 3> gromov{};       // (v1.v2)_v0, (v0.v2)_v1, (v0.v1)_v2 in the fiber
  Vertex barycenter = 0;                 // global id
};

struct FarTriplePolicy {
  std::size_t pool = 40;           // farthest-point sample size per fiber
  std::size_t separation = 0;      // 0: ceil(diam / 3) per fiber
  std::size_t random_triples = 0;  // extra sampled triples (surjectivity report)
  std::uint64_t seed = 1;
};

// Builds and caches far triples per fiber. Thread-safe.
class SectionFactory {
 public:
  explicit SectionFactory(const MetricGraphBundle& b, FarTriplePolicy policy = {});
  ~SectionFactory();

  const MetricGraphBundle& bundle() const { return *b_; }
  std::size_t separation(Vertex base) const;
  const std::vector<Vertex>& pool(Vertex base) const;
  const std::vector<FarTriple>& triples(Vertex base) const;
  FarTriple make_triple(Vertex base, std::array<Vertex, 3> v) const;

  Section barycenter_flow(Vertex x) const;

 private:
  struct Impl;
  const MetricGraphBundle* b_;
  FarTriplePolicy policy_;
  std::unique_ptr<Impl> impl_;
};

Section barycenter_flow_section(const MetricGraphBundle& b, Vertex x,
                                std::size_t separation = 0);

// s(w) = flow(x, w).
Section transition_section(const MetricGraphBundle& b, Vertex x);
// Product bundles only: same fiber coordinate everywhere.
Section constant_section(const MetricGraphBundle& b, Vertex x);
Section horocycle_flow_section(const MetricGraphBundle& b, const HorocycleParams& p, double x);

struct SectionQualityPolicy {
  std::size_t exhaustive_base_limit = 400;
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
};

struct SectionQuality {
  double k = 1.0;
  int eps = 0;
  std::size_t max_hop = 0;
  bool within_grid = true;
  bool lower_bound_holds = true;  // d_base(w,z) <= d_total(s(w),s(z))
  bool exhaustive = true;
  Vertex witness_w = 0, witness_z = 0;
  std::size_t pairs = 0;
};

// Grid k in {1, 1.25, ..., 8}, eps in {0..32}; picks the point minimizing k + eps.
SectionQuality measure_section_quality(const MetricGraphBundle& b, const Section& s,
                                       const SectionQualityPolicy& policy = {});

VertexSet level_set(const MetricGraphBundle& b, const Section& s1, const Section& s2,
                    std::size_t A);

struct LevelSetReport {
  VertexSet U;
  std::size_t A = 0;
  bool empty = true;
  std::size_t quasiconvexity = 0;
  std::size_t diameter = 0;
  std::size_t min_fiber_distance = 0;  // min over b of d_b(s1(b), s2(b))
  // (u, d_u(s1(u), s2(u)), d(u, U)) for u outside U, by decreasing fiber distance
  std::vector<std::array<std::size_t, 3>> outside;
  std::size_t max_distance_to_U = 0;
};

LevelSetReport level_set_report(const MetricGraphBundle& b, const Section& s1,
                                const Section& s2, std::size_t A);

struct FiberSurjectivity {
  Vertex base = 0;
  std::size_t fiber_size = 0;
  std::size_t diameter = 0;
  std::size_t triples = 0;
  std::size_t barycenters = 0;
  std::size_t radius = 0;   // covering radius of the barycenter image
  long grid_value = -1;     // smallest grid N >= radius, -1 if none
  bool weak = false;        // radius > diameter / 4
};

struct SurjectivityReport {
  std::vector<FiberSurjectivity> fibers;
  std::size_t max_radius = 0;
  bool any_weak = false;
};

SurjectivityReport barycenter_surjectivity_report(const MetricGraphBundle& b,
                                                  const std::vector<std::size_t>& grid,
                                                  const FarTriplePolicy& policy = {});

void write_section(std::ostream& out, const Section& s);
Section read_section(std::istream& in, const MetricGraphBundle& b);

}  // namespace mgb
