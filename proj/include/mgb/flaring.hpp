#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mgb/bundle.hpp"
#include "mgb/hyperbolicity.hpp"
#include "mgb/ladders.hpp"
#include "mgb/sections.hpp"

namespace mgb {

struct Lift {
  Path points;
  std::size_t length = 0;  // sum of total-space hops
  std::size_t max_hop = 0;
  double bound = 0;        // 2 k len(gamma)
  bool within_bound = true;
};

// Index-wise values of s along gamma.
Lift qi_lift(const MetricGraphBundle& b, const Path& gamma, const Section& s, double k);
// Single constant max(k, eps) of a measured section.
double single_section_constant(const SectionQuality& q);

// Lift of gamma through x over gamma[center] by successive transits.
Path transition_lift(const MetricGraphBundle& b, const Path& gamma, std::size_t center, Vertex x);

struct LiftPair {
  Path gamma;  // gamma[0] is index -n
  Path a, c;   // the two lifts
  std::vector<std::size_t> distances;
  std::vector<std::uint8_t> flagged;  // either lift on a truncation boundary
  std::size_t hop = 1;

  std::size_t n() const { return gamma.size() / 2; }
  std::size_t central() const { return distances[n()]; }
  std::size_t far() const { return std::max(distances.front(), distances.back()); }
  bool touches_boundary() const;
};

LiftPair make_lift_pair(const MetricGraphBundle& b, Path gamma, Path a, Path c);
LiftPair transition_lift_pair(const MetricGraphBundle& b, const Path& gamma, Vertex x, Vertex y);

enum class Verdict { kPass, kFail, kVacuous };
std::string to_string(Verdict v);

struct HopBucket {
  std::size_t lo = 1, hi = 2;
  bool contains(std::size_t h) const { return lo <= h && h <= hi; }
  std::string str() const { return std::to_string(lo) + "-" + std::to_string(hi); }
};

inline std::vector<HopBucket> default_buckets() { return {{1, 2}, {3, 4}, {5, 8}}; }

enum class LiftSource { kTransition, kSections, kBoth };

struct FlarePolicy {
  std::size_t geodesics = 200;
  std::size_t pairs = 50;  // per geodesic
  std::vector<double> lambdas{1.05, 1.1, 1.25, 1.5, 2.0, std::exp(1.0)};
  std::vector<std::size_t> M;  // empty: quantiles of the central distances
  std::vector<double> quantiles{0.0, 0.25, 0.5, 0.75, 0.9};
  LiftSource source = LiftSource::kTransition;
  bool keep_samples = false;
  std::size_t witnesses = 3;
  std::uint64_t seed = 1;
};

struct FlareRow {
  std::size_t M = 0;
  std::size_t pairs = 0;
  double min_ratio = 0;
  double lambda = 0;  // 0 when no grid value holds
};

struct FlaringEstimate {
  HopBucket bucket;
  std::size_t n = 0;
  Verdict verdict = Verdict::kVacuous;
  std::size_t M = 0;
  double lambda = 0;
  std::vector<FlareRow> rows;  // increasing M
  std::size_t sampled = 0;     // pairs in the bucket after exclusions
  std::size_t excluded = 0;    // touched a truncation boundary
  double min_ratio = 0, max_ratio = 0;
  std::vector<LiftPair> witnesses;  // flattest first
  std::vector<LiftPair> samples;
};

// Throws Error when the base has no geodesic of length 2n.
FlaringEstimate flare_test(const MetricGraphBundle& b, const HopBucket& bucket, std::size_t n,
                           const FlarePolicy& policy = {});

void write_flare_csv(std::ostream& out, const std::vector<LiftPair>& pairs);

struct BoundedFlaringPolicy {
  std::size_t max_N = 4;
  std::size_t samples = 2000;  // per N
  std::size_t max_C = 8;
  std::uint64_t seed = 1;
};

struct BoundedFlaringProfile {
  std::size_t k = 1;
  std::size_t K = 0;
  std::vector<std::size_t> g;       // g(C) = K + 2 f(C + 2)
  std::vector<double> mu;           // mu(N) = g(2k)^N
  std::vector<double> empirical;    // max measured ratio per N
  std::vector<std::size_t> counts;  // pairs per N
  std::size_t violations = 0;
  bool dominated = true;
  std::vector<Vertex> witness;      // x1, y1, x2, y2 of the largest ratio
};

inline std::size_t flaring_g(const PropernessProfile& p, std::size_t C) {
  return p.K() + 2 * p.f(C + 2);
}
inline double flaring_mu(const PropernessProfile& p, std::size_t k, std::size_t N) {
  return std::pow(static_cast<double>(flaring_g(p, 2 * k)), static_cast<double>(N));
}

// Empirical side uses transition lifts, which are 1-qi lifts, between distinct
// unflagged points.
BoundedFlaringProfile bounded_flaring_profile(const MetricGraphBundle& b,
                                              const PropernessProfile& p, std::size_t k = 1,
                                              const BoundedFlaringPolicy& policy = {});

struct DivergenceFit {
  std::size_t C = 0;
  long T = -1;  // first index with d >= C, -1 if none
  double A = 0, base = 0;
  std::size_t points = 0;
  bool monotone = true;
};

struct DivergenceReport {
  int direction = 0;  // +1 toward the end of gamma, -1 toward the start
  std::vector<std::size_t> profile;  // from the centre outward, cut at the first flagged index
  std::vector<DivergenceFit> fits;
  bool diverges = false;
  std::string note;
  double base() const;  // fit of the largest crossing C with >= 2 points, 0 if none
};

DivergenceReport divergence_test(const LiftPair& lp, const std::vector<std::size_t>& C_grid);

struct LadderFlareConfig {
  std::size_t n = 2;
  std::size_t M = 1;
  double factor = 2.0;
  std::size_t geodesics_per_center = 8;
  std::optional<std::size_t> A;  // decomposition threshold, general case only
};

struct LadderFlareWitness {
  Path gamma;
  std::size_t left = 0, center = 0, right = 0;
};

struct LadderFlarePiece {
  std::size_t index = 0;
  std::size_t checked = 0, failed = 0;
};

struct LadderFlareResult {
  std::string regime;  // vacuous | type-1 | type-2 | general
  Verdict verdict = Verdict::kVacuous;
  std::size_t n = 0, M = 0;
  std::size_t checked = 0, failed = 0, excluded = 0;
  double worst_ratio = 0;
  std::vector<LadderFlareWitness> witnesses;
  std::vector<LadderFlarePiece> pieces;
  std::vector<std::string> log;
};

// Doubling of rung length across windows of radius n centred at rungs >= M.
// With a factory the ladder is decomposed first and each piece is checked too.
LadderFlareResult ladder_flare_check(const MetricGraphBundle& b, const Ladder& l,
                                     const LadderFlareConfig& config = {},
                                     const SectionFactory* f = nullptr);

struct NecessityPolicy {
  std::size_t n = 2;
  FlarePolicy flare;
  FourPointPolicy four_point;
};

struct NecessityReport {
  HalfInt delta_total;
  bool delta_exact = true;
  HalfInt delta_fibers_max;
  std::vector<FlaringEstimate> buckets;
  Verdict verdict = Verdict::kVacuous;
  std::string note;
};

NecessityReport necessity_report(const MetricGraphBundle& b, const NecessityPolicy& policy = {});

struct ScaleConsistency {
  std::vector<HalfInt> deltas;
  std::vector<Verdict> verdicts;
  bool delta_growing = false;  // nondecreasing with last > first
  bool delta_stable = false;   // max <= 2 max(min, 1)
  bool consistent = true;      // fail => growing, stable => not fail
};

ScaleConsistency scale_consistency(const std::vector<NecessityReport>& reports);

}  // namespace mgb
