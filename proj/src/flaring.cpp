#include "mgb/flaring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "mgb/util.hpp"

namespace mgb {

namespace {

// All canonical base geodesics of length len, sampled with replacement.
std::vector<Path> sample_geodesics(const MetricGraphBundle& b, std::size_t len,
                                   std::size_t count, Rng& rng) {
  const DistanceOracle& db = b.base_distance();
  const std::size_t nb = b.base().size();
  std::vector<Edge> ends;
  for (Vertex u = 0; u < nb; ++u) {
    auto row = db.row(u);
    for (Vertex v = 0; v < nb; ++v)
      if (row[v] == len) ends.emplace_back(u, v);
  }
  if (ends.empty())
    throw Error("no base geodesic of length " + std::to_string(len));
  std::vector<Path> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto [u, v] = ends[rng.below(ends.size())];
    out.push_back(geodesic(db, u, v));
  }
  return out;
}

std::vector<Vertex> unflagged(const MetricGraphBundle& b, Vertex w) {
  std::vector<Vertex> out;
  for (Vertex x : b.fiber(w))
    if (!b.boundary(x)) out.push_back(x);
  return out;
}

std::size_t max_hop(const MetricGraphBundle& b, const Path& p) {
  std::size_t h = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    h = std::max<std::size_t>(h, b.total_distance()(p[i - 1], p[i]));
  return h;
}

double ratio(const LiftPair& lp) {
  return static_cast<double>(lp.far()) / static_cast<double>(std::max<std::size_t>(lp.central(), 1));
}

}  // namespace

double single_section_constant(const SectionQuality& q) {
  return std::max(q.k, static_cast<double>(q.eps));
}

Lift qi_lift(const MetricGraphBundle& b, const Path& gamma, const Section& s, double k) {
  Lift out;
  for (Vertex w : gamma) {
    Vertex x = s(w);
    if (b.proj(x) != w) throw Error("section value off its fiber at " + std::to_string(w));
    out.points.push_back(x);
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    std::size_t h = b.total_distance()(out.points[i - 1], out.points[i]);
    out.length += h;
    out.max_hop = std::max(out.max_hop, h);
  }
  out.bound = 2.0 * k * static_cast<double>(gamma.empty() ? 0 : gamma.size() - 1);
  out.within_bound = static_cast<double>(out.length) <= out.bound + 1e-9;
  return out;
}

Path transition_lift(const MetricGraphBundle& b, const Path& gamma, std::size_t center,
                     Vertex x) {
  if (center >= gamma.size() || b.proj(x) != gamma[center])
    throw Error("lift start is not over the given base point");
  Path out(gamma.size());
  out[center] = x;
  for (std::size_t i = center + 1; i < gamma.size(); ++i) out[i] = b.transit(out[i - 1], gamma[i]);
  for (std::size_t i = center; i-- > 0;) out[i] = b.transit(out[i + 1], gamma[i]);
  return out;
}

bool LiftPair::touches_boundary() const {
  return std::find(flagged.begin(), flagged.end(), 1) != flagged.end();
}

LiftPair make_lift_pair(const MetricGraphBundle& b, Path gamma, Path a, Path c) {
  if (a.size() != gamma.size() || c.size() != gamma.size())
    throw Error("lift length does not match the base path");
  LiftPair lp;
  lp.gamma = std::move(gamma);
  lp.a = std::move(a);
  lp.c = std::move(c);
  for (std::size_t i = 0; i < lp.gamma.size(); ++i) {
    lp.distances.push_back(b.fiber_distance(lp.a[i], lp.c[i]));
    lp.flagged.push_back(b.boundary(lp.a[i]) || b.boundary(lp.c[i]));
  }
  lp.hop = std::max<std::size_t>(1, std::max(max_hop(b, lp.a), max_hop(b, lp.c)));
  return lp;
}

LiftPair transition_lift_pair(const MetricGraphBundle& b, const Path& gamma, Vertex x, Vertex y) {
  std::size_t center = gamma.size() / 2;
  return make_lift_pair(b, gamma, transition_lift(b, gamma, center, x),
                        transition_lift(b, gamma, center, y));
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAIL";
    case Verdict::kVacuous: return "VACUOUS";
  }
  return "?";
}

FlaringEstimate flare_test(const MetricGraphBundle& b, const HopBucket& bucket, std::size_t n,
                           const FlarePolicy& policy) {
  FlaringEstimate est;
  est.bucket = bucket;
  est.n = n;
  Rng rng(policy.seed);
  auto geos = sample_geodesics(b, 2 * n, policy.geodesics, rng);
  std::vector<std::uint64_t> seeds(geos.size());
  for (auto& s : seeds) s = rng.next();

  std::optional<SectionFactory> factory;
  if (policy.source != LiftSource::kTransition) factory.emplace(b);

  struct Slot {
    std::vector<LiftPair> kept;
    std::size_t excluded = 0;
  };
  std::vector<Slot> slots(geos.size());
  parallel_for(geos.size(), [&](std::size_t gi) {
    const Path& gamma = geos[gi];
    Rng r(seeds[gi]);
    auto pool = unflagged(b, gamma[n]);
    if (pool.size() < 2) return;
    Slot& slot = slots[gi];
    auto keep = [&](LiftPair lp) {
      if (lp.touches_boundary()) {
        ++slot.excluded;
        return;
      }
      if (bucket.contains(lp.hop)) slot.kept.push_back(std::move(lp));
    };
    for (std::size_t p = 0; p < policy.pairs; ++p) {
      Vertex x = pool[r.below(pool.size())];
      Vertex y = pool[r.below(pool.size() - 1)];
      if (y == x) y = pool.back();
      if (policy.source != LiftSource::kSections) keep(transition_lift_pair(b, gamma, x, y));
      if (factory) {
        Section sx = factory->barycenter_flow(x), sy = factory->barycenter_flow(y);
        Path a, c;
        for (Vertex w : gamma) {
          a.push_back(sx(w));
          c.push_back(sy(w));
        }
        keep(make_lift_pair(b, gamma, std::move(a), std::move(c)));
      }
    }
  });

  std::vector<LiftPair> all;
  for (auto& s : slots) {
    est.excluded += s.excluded;
    for (auto& lp : s.kept)
      if (lp.central() > 0) all.push_back(std::move(lp));
  }
  est.sampled = all.size();
  if (all.empty()) return est;

  std::vector<std::size_t> d0;
  est.min_ratio = est.max_ratio = ratio(all[0]);
  for (const auto& lp : all) {
    d0.push_back(lp.central());
    est.min_ratio = std::min(est.min_ratio, ratio(lp));
    est.max_ratio = std::max(est.max_ratio, ratio(lp));
  }
  std::sort(d0.begin(), d0.end());
  std::vector<std::size_t> grid = policy.M;
  if (grid.empty())
    for (double q : policy.quantiles)
      grid.push_back(d0[static_cast<std::size_t>(q * static_cast<double>(d0.size() - 1))]);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  for (std::size_t M : grid) {
    FlareRow row;
    row.M = M;
    row.min_ratio = INFINITY;
    for (const auto& lp : all)
      if (lp.central() >= M) {
        ++row.pairs;
        row.min_ratio = std::min(row.min_ratio, ratio(lp));
      }
    if (row.pairs == 0) continue;
    for (double l : policy.lambdas)
      if (l <= row.min_ratio * (1 + 1e-12)) row.lambda = std::max(row.lambda, l);
    est.rows.push_back(row);
  }
  std::size_t cut = 0;
  for (const auto& row : est.rows)
    if (row.lambda > est.lambda) {
      est.lambda = row.lambda;
      est.M = row.M;
    }
  if (est.lambda > 1.0) {
    est.verdict = Verdict::kPass;
    cut = est.M;
  } else {
    est.verdict = Verdict::kFail;
    est.M = est.rows.empty() ? 0 : est.rows.back().M;
    cut = est.M;
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all[i].central() >= cut) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    double ri = ratio(all[i]), rj = ratio(all[j]);
    if (ri != rj) return ri < rj;
    return all[i].central() > all[j].central();
  });
  for (std::size_t i = 0; i < std::min(policy.witnesses, order.size()); ++i)
    est.witnesses.push_back(all[order[i]]);
  if (policy.keep_samples) est.samples = std::move(all);
  return est;
}

void write_flare_csv(std::ostream& out, const std::vector<LiftPair>& pairs) {
  out << "pair,t,base,a,b,distance\n";
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& lp = pairs[p];
    long n = static_cast<long>(lp.n());
    for (std::size_t i = 0; i < lp.gamma.size(); ++i)
      out << p << ',' << static_cast<long>(i) - n << ',' << lp.gamma[i] << ',' << lp.a[i] << ','
          << lp.c[i] << ',' << lp.distances[i] << '\n';
  }
}

BoundedFlaringProfile bounded_flaring_profile(const MetricGraphBundle& b,
                                              const PropernessProfile& p, std::size_t k,
                                              const BoundedFlaringPolicy& policy) {
  BoundedFlaringProfile out;
  out.k = k;
  out.K = p.K();
  for (std::size_t C = 0; C <= policy.max_C; ++C) out.g.push_back(flaring_g(p, C));
  for (std::size_t N = 0; N <= policy.max_N; ++N) out.mu.push_back(flaring_mu(p, k, N));
  out.empirical.assign(policy.max_N + 1, 0.0);
  out.counts.assign(policy.max_N + 1, 0);
  out.empirical[0] = 1.0;

  const DistanceOracle& db = b.base_distance();
  const std::size_t nb = b.base().size();
  Rng rng(policy.seed);
  double worst = 0;
  for (std::size_t N = 1; N <= policy.max_N; ++N) {
    std::vector<Edge> ends;
    for (Vertex u = 0; u < nb; ++u) {
      auto row = db.row(u);
      for (Vertex v = 0; v < nb; ++v)
        if (row[v] == N) ends.emplace_back(u, v);
    }
    if (ends.empty()) continue;
    for (std::size_t s = 0; s < policy.samples; ++s) {
      auto [b2, b1] = ends[rng.below(ends.size())];
      auto fib = unflagged(b, b2);
      if (fib.size() < 2) continue;
      Vertex x2 = fib[rng.below(fib.size())];
      Vertex y2 = fib[rng.below(fib.size() - 1)];
      if (y2 == x2) y2 = fib.back();
      Path g = geodesic(db, b2, b1);
      Vertex x1 = x2, y1 = y2;
      bool flagged = false;
      for (std::size_t i = 1; i < g.size(); ++i) {
        x1 = b.transit(x1, g[i]);
        y1 = b.transit(y1, g[i]);
        flagged = flagged || b.boundary(x1) || b.boundary(y1);
      }
      if (flagged) continue;
      double r = static_cast<double>(b.fiber_distance(x1, y1)) /
                 static_cast<double>(std::max<std::size_t>(b.fiber_distance(x2, y2), 1));
      ++out.counts[N];
      out.empirical[N] = std::max(out.empirical[N], r);
      if (r > out.mu[N]) ++out.violations;
      if (r > worst) {
        worst = r;
        out.witness = {x1, y1, x2, y2};
      }
    }
  }
  out.dominated = out.violations == 0;
  return out;
}

double DivergenceReport::base() const {
  for (auto it = fits.rbegin(); it != fits.rend(); ++it)
    if (it->points >= 2) return it->base;
  return 0;
}

DivergenceReport divergence_test(const LiftPair& lp, const std::vector<std::size_t>& C_grid) {
  DivergenceReport rep;
  const std::size_t n = lp.n();
  rep.direction = lp.distances.back() >= lp.distances.front() ? 1 : -1;
  for (std::size_t t = 0; t <= n; ++t) {
    std::size_t i = rep.direction > 0 ? n + t : n - t;
    if (!lp.flagged.empty() && lp.flagged[i]) break;
    rep.profile.push_back(lp.distances[i]);
  }

  std::vector<std::size_t> grid = C_grid;
  std::sort(grid.begin(), grid.end());
  for (std::size_t C : grid) {
    DivergenceFit fit;
    fit.C = C;
    for (std::size_t t = 0; t < rep.profile.size(); ++t)
      if (rep.profile[t] >= std::max<std::size_t>(C, 1)) {
        fit.T = static_cast<long>(t);
        break;
      }
    if (fit.T >= 0) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t t = fit.T; t < rep.profile.size(); ++t) {
        if (t > static_cast<std::size_t>(fit.T) && rep.profile[t] < rep.profile[t - 1])
          fit.monotone = false;
        if (rep.profile[t] == 0) continue;
        double x = static_cast<double>(t), y = std::log(static_cast<double>(rep.profile[t]));
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++fit.points;
      }
      if (fit.points >= 2) {
        double m = static_cast<double>(fit.points);
        double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        fit.base = std::exp(slope);
        fit.A = std::exp((sy - slope * sx) / m);
        if (fit.base > 1.0 + 1e-9) rep.diverges = true;
      }
    }
    rep.fits.push_back(fit);
  }
  if (!rep.diverges) rep.note = "no divergence";
  return rep;
}

namespace {

struct WindowCheck {
  std::size_t checked = 0, failed = 0, excluded = 0;
  double worst = INFINITY;
  std::vector<LadderFlareWitness> witnesses;
};

WindowCheck check_windows(const MetricGraphBundle& b, const Ladder& l,
                          const LadderFlareConfig& cfg) {
  WindowCheck out;
  const DistanceOracle& db = b.base_distance();
  const std::size_t nb = b.base().size();
  std::vector<std::size_t> rung(nb);
  std::vector<bool> flagged(nb, false);
  for (Vertex w = 0; w < nb; ++w) {
    rung[w] = path_length(l.rungs[w]);
    for (Vertex x : l.rungs[w])
      if (b.boundary(x)) flagged[w] = true;
  }
  for (Vertex c = 0; c < nb; ++c) {
    if (rung[c] < std::max<std::size_t>(cfg.M, 1)) continue;
    auto row = db.row(c);
    std::vector<Vertex> ring;
    for (Vertex u = 0; u < nb; ++u)
      if (row[u] == cfg.n) ring.push_back(u);
    std::vector<Edge> ends;
    for (Vertex u : ring)
      for (Vertex v : ring)
        if (u < v && db(u, v) == 2 * cfg.n) ends.emplace_back(u, v);
    if (ends.empty()) continue;
    std::size_t take = std::min(cfg.geodesics_per_center, ends.size());
    for (std::size_t j = 0; j < take; ++j) {
      auto [u, v] = ends[j * ends.size() / take];
      Path left = geodesic(db, c, u);
      Path gamma(left.rbegin(), left.rend());
      Path right = geodesic(db, c, v);
      gamma.insert(gamma.end(), right.begin() + 1, right.end());
      bool bad = false;
      for (Vertex w : gamma) bad = bad || flagged[w];
      if (bad) {
        ++out.excluded;
        continue;
      }
      ++out.checked;
      std::size_t far = std::max(rung[u], rung[v]);
      double r = static_cast<double>(far) / static_cast<double>(rung[c]);
      out.worst = std::min(out.worst, r);
      if (static_cast<double>(far) < cfg.factor * static_cast<double>(rung[c])) {
        ++out.failed;
        if (out.witnesses.size() < 5) out.witnesses.push_back({gamma, rung[u], rung[c], rung[v]});
      }
    }
  }
  return out;
}

}  // namespace

LadderFlareResult ladder_flare_check(const MetricGraphBundle& b, const Ladder& l,
                                     const LadderFlareConfig& config, const SectionFactory* f) {
  LadderFlareResult res;
  res.n = config.n;
  res.M = config.M;
  if (b.base_distance().diameter() < 2 * config.n)
    throw Error("window " + std::to_string(config.n) + " exceeds the base");

  auto wc = check_windows(b, l, config);
  res.checked = wc.checked;
  res.failed = wc.failed;
  res.excluded = wc.excluded;
  res.worst_ratio = wc.checked ? wc.worst : 0;
  res.witnesses = std::move(wc.witnesses);
  if (res.checked == 0) {
    res.regime = "vacuous";
    res.log.push_back("no unflagged window centred at a rung of length >= " +
                      std::to_string(config.M));
  } else {
    res.regime = girth(l) >= config.M ? "type-1" : "type-2";
    res.verdict = res.failed ? Verdict::kFail : Verdict::kPass;
  }

  if (f) {
    res.regime = res.checked ? "general" : res.regime;
    std::size_t A = config.A.value_or(std::max<std::size_t>(config.M, 1));
    auto rec = decompose_ladder(b, l, A, *f);
    for (std::size_t i = 0; i + 1 < rec.sections.size(); ++i) {
      Ladder sub = build_ladder(b, rec.sections[i], rec.sections[i + 1], l.L);
      auto pc = check_windows(b, sub, config);
      res.pieces.push_back({i, pc.checked, pc.failed});
      std::ostringstream msg;
      msg << "piece " << i << ": girth " << rec.girths[i] << (rec.type2[i] ? " (type-2)" : "")
          << ", windows " << pc.checked << ", failed " << pc.failed;
      res.log.push_back(msg.str());
    }
  }
  return res;
}

NecessityReport necessity_report(const MetricGraphBundle& b, const NecessityPolicy& policy) {
  NecessityReport rep;
  auto fp = delta_four_point(b.total_distance(), policy.four_point);
  rep.delta_total = fp.delta;
  rep.delta_exact = fp.exact;
  for (Vertex w = 0; w < b.base().size(); ++w) {
    auto ff = delta_four_point(*b.fiber_view(w).dist, policy.four_point);
    rep.delta_fibers_max = std::max(rep.delta_fibers_max, ff.delta);
    rep.delta_exact = rep.delta_exact && ff.exact;
  }
  if (b.base_distance().diameter() < 2 * policy.n) {
    rep.note = "base shorter than the window";
    return rep;
  }
  bool pass = false, fail = false;
  for (const auto& bucket : default_buckets()) {
    rep.buckets.push_back(flare_test(b, bucket, policy.n, policy.flare));
    pass = pass || rep.buckets.back().verdict == Verdict::kPass;
    fail = fail || rep.buckets.back().verdict == Verdict::kFail;
  }
  rep.verdict = fail ? Verdict::kFail : pass ? Verdict::kPass : Verdict::kVacuous;
  return rep;
}

ScaleConsistency scale_consistency(const std::vector<NecessityReport>& reports) {
  ScaleConsistency out;
  bool any_fail = false;
  for (const auto& r : reports) {
    out.deltas.push_back(r.delta_total);
    out.verdicts.push_back(r.verdict);
    any_fail = any_fail || r.verdict == Verdict::kFail;
  }
  if (reports.empty()) return out;
  out.delta_growing = out.deltas.back() > out.deltas.front();
  for (std::size_t i = 1; i < out.deltas.size(); ++i)
    out.delta_growing = out.delta_growing && !(out.deltas[i] < out.deltas[i - 1]);
  auto [lo, hi] = std::minmax_element(out.deltas.begin(), out.deltas.end());
  out.delta_stable = hi->twice() <= 2 * std::max<std::int64_t>(lo->twice(), 2);
  out.consistent = (!any_fail || out.delta_growing) && (!out.delta_stable || !any_fail);
  return out;
}

}  // namespace mgb
