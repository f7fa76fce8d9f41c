#pragma once

#include <json.hpp>

#include "mgb/flaring.hpp"
#include "mgb/hyperbolicity.hpp"
#include "mgb/ladders.hpp"
#include "mgb/sections.hpp"

namespace mgb::report {

using nlohmann::json;

inline json half(HalfInt h) { return static_cast<double>(h.twice()) / 2.0; }

inline json to_json(const HyperbolicityReport& r) {
  return {{"delta_slim", half(r.delta_slim)},
          {"delta_four_point", r.delta_4pt ? half(*r.delta_4pt) : json()},
          {"insize_max", half(r.insize_max)},
          {"thin_max", half(r.thin_max)},
          {"insize_excess", half(r.insize_excess)},
          {"thin_excess", half(r.thin_excess)},
          {"mode", r.mode},
          {"triangles", r.triangles},
          {"witness", r.witness.x}};
}

inline json to_json(const FourPointResult& r) {
  return {{"delta", half(r.delta)}, {"exact", r.exact}, {"witness", r.witness}};
}

inline json to_json(const SectionQuality& q) {
  return {{"k", q.k},
          {"eps", q.eps},
          {"max_hop", q.max_hop},
          {"within_grid", q.within_grid},
          {"lower_bound_holds", q.lower_bound_holds},
          {"exhaustive", q.exhaustive},
          {"witness", {q.witness_w, q.witness_z}},
          {"pairs", q.pairs}};
}

inline json to_json(const Section& s) {
  return {{"kind", to_string(s.kind)},
          {"through", s.through},
          {"fallback", s.fallback},
          {"separation", s.separation},
          {"anchor_gap", s.anchor_gap},
          {"reanchors", s.reanchors},
          {"coherence", s.coherence},
          {"log", s.log}};
}

inline json to_json(const LipschitzReport& r) {
  return {{"constant", r.constant}, {"witness", {r.x, r.y}}, {"pairs", r.pairs}};
}

inline json to_json(const DecompositionRecord& r) {
  return {{"anchor", r.anchor},
          {"anchor_length", r.anchor_length},
          {"A", r.A},
          {"sections", r.sections.size()},
          {"positions", r.positions},
          {"girths", r.girths},
          {"type2", r.type2},
          {"witness_positions", r.witness_positions},
          {"k", r.k},
          {"violations", r.violations},
          {"max_violation", r.max_violation},
          {"monotone", r.monotone},
          {"within_slack", r.within_slack},
          {"log", r.log}};
}

inline json to_json(const HamenstadtReport& r) {
  json w = json::array();
  for (const auto& x : r.witnesses)
    w.push_back({{"property", x.property}, {"points", x.points}, {"value", x.value}});
  return {{"measured", r.measured}, {"D", r.D},           {"pass", r.pass},
          {"witnesses", w},         {"pairs", r.pairs},   {"triangles", r.triangles}};
}

inline json to_json(const LiftPair& lp) {
  return {{"gamma", lp.gamma}, {"pair", {lp.a[lp.n()], lp.c[lp.n()]}}, {"distances", lp.distances}};
}

inline json to_json(const FlaringEstimate& e) {
  json rows = json::array();
  for (const auto& r : e.rows)
    rows.push_back({{"M", r.M}, {"pairs", r.pairs}, {"min_ratio", r.min_ratio}, {"lambda", r.lambda}});
  json wit = json::array();
  for (const auto& lp : e.witnesses) wit.push_back(to_json(lp));
  return {{"bucket", e.bucket.str()},
          {"n", e.n},
          {"verdict", to_string(e.verdict)},
          {"M", e.M},
          {"lambda", e.lambda},
          {"rows", rows},
          {"sampled", e.sampled},
          {"excluded", e.excluded},
          {"min_ratio", e.min_ratio},
          {"max_ratio", e.max_ratio},
          {"witnesses", wit}};
}

inline json to_json(const BoundedFlaringProfile& p) {
  return {{"k", p.k},
          {"K", p.K},
          {"g", p.g},
          {"mu", p.mu},
          {"empirical", p.empirical},
          {"counts", p.counts},
          {"violations", p.violations},
          {"dominated", p.dominated},
          {"witness", p.witness}};
}

inline json to_json(const LadderFlareResult& r) {
  json wit = json::array();
  for (const auto& w : r.witnesses)
    wit.push_back({{"gamma", w.gamma}, {"rungs", {w.left, w.center, w.right}}});
  json pieces = json::array();
  for (const auto& p : r.pieces)
    pieces.push_back({{"index", p.index}, {"checked", p.checked}, {"failed", p.failed}});
  return {{"regime", r.regime},         {"verdict", to_string(r.verdict)},
          {"n", r.n},                   {"M", r.M},
          {"checked", r.checked},       {"failed", r.failed},
          {"excluded", r.excluded},     {"worst_ratio", r.worst_ratio},
          {"witnesses", wit},           {"pieces", pieces},
          {"log", r.log}};
}

inline json to_json(const NecessityReport& r) {
  json buckets = json::array();
  for (const auto& e : r.buckets) buckets.push_back({{"bucket", e.bucket.str()}, {"verdict", to_string(e.verdict)}});
  return {{"delta_total", half(r.delta_total)},
          {"delta_exact", r.delta_exact},
          {"delta_fibers_max", half(r.delta_fibers_max)},
          {"buckets", buckets},
          {"verdict", to_string(r.verdict)},
          {"note", r.note}};
}

}  // namespace mgb::report
