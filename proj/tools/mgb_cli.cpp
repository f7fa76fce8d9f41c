#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "mgb/flaring.hpp"
#include "mgb/util.hpp"
#include "report_json.hpp"

#ifndef MGB_VERSION
#define MGB_VERSION "0.0.0"
#endif

using namespace mgb;
using nlohmann::json;
using report::to_json;

namespace {

struct Common {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void progress(const std::string& msg) { std::cerr << "[mgb] " << msg << std::endl; }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

// path:N, cycle:N, grid:RxC, tree:N[:seed], random:N:p[:seed], file:PATH
Graph parse_graph_spec(const std::string& spec) {
  auto parts = split(spec, ':');
  if (parts.size() < 2) throw UsageError("graph spec needs kind:args, got '" + spec + "'");
  const std::string& kind = parts[0];
  try {
    if (kind == "path") return path_graph(std::stoul(parts[1]));
    if (kind == "cycle") return cycle_graph(std::stoul(parts[1]));
    if (kind == "grid") {
      auto rc = split(parts[1], 'x');
      if (rc.size() != 2) throw UsageError("grid spec is grid:RxC");
      return grid_graph(std::stoul(rc[0]), std::stoul(rc[1]));
    }
    if (kind == "tree")
      return random_tree(std::stoul(parts[1]), parts.size() > 2 ? std::stoull(parts[2]) : 1);
    if (kind == "random" && parts.size() >= 3)
      return random_connected_graph(std::stoul(parts[1]), std::stod(parts[2]),
                                    parts.size() > 3 ? std::stoull(parts[3]) : 1);
    if (kind == "file") return load_graph_file(spec.substr(5));
  } catch (const std::invalid_argument&) {
    throw UsageError("bad number in graph spec '" + spec + "'");
  }
  throw UsageError("unknown graph spec '" + spec + "'");
}

json option_value(const CLI::Option* o) {
  auto res = o->results();
  if (res.empty()) {
    if (o->get_type_size() == 0) return false;
    return o->get_default_str();
  }
  if (o->get_type_size() == 0) return true;
  if (o->get_expected_max() > 1) return res;
  return res.front();
}

json run_config(const CLI::App& app, const CLI::App& sub) {
  json opts = json::object();
  for (const CLI::App* a : {&app, &sub})
    for (const CLI::Option* o : a->get_options()) {
      std::string name = o->get_single_name();
      if (name.empty() || name == "help" || name == "config") continue;
      opts[name] = option_value(o);
    }
  return {{"command", sub.get_name()}, {"options", opts}};
}

void emit(const json& j, const std::string& path) {
  std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

bool all_true(const json& inv) {
  for (const auto& [k, v] : inv.items())
    if (!v.get<bool>()) return false;
  return true;
}

MetricGraphBundle load(const std::string& path) {
  progress("loading " + path);
  return load_bundle(path);
}

std::vector<Vertex> random_vertices(const MetricGraphBundle& b, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vertex> out;
  auto idx = rng.sample_indices(b.total().size(), std::min(k, b.total().size()));
  for (auto i : idx) out.push_back(static_cast<Vertex>(i));
  return out;
}

// ---- analyses ----

struct AnalyzeOptions {
  std::size_t sections = 12;
  std::size_t L = 2;
  std::size_t n = 2;
  std::size_t triangles = 20000;
  std::size_t geodesics = 200;
  std::size_t pairs = 50;
};

json analyze_hyperbolicity(const MetricGraphBundle& b, const Common& c, const AnalyzeOptions& o,
                           json& inv) {
  progress("hyperbolicity");
  FourPointPolicy fp;
  fp.seed = c.seed;
  fp.allow_sampling = true;
  auto total4 = delta_four_point(b.total_distance(), fp);
  TrianglePolicy tp;
  tp.seed = c.seed;
  tp.samples = o.triangles;
  auto slim = delta_slim(b.total_distance(), tp);
  HalfInt fib_max;
  bool fib_exact = true;
  for (Vertex w = 0; w < b.base().size(); ++w) {
    auto r = delta_four_point(*b.fiber_view(w).dist, fp);
    fib_max = std::max(fib_max, r.delta);
    fib_exact = fib_exact && r.exact;
  }
  inv["insize_le_4_delta"] = slim.insize_excess <= HalfInt();
  inv["thin_le_6_delta"] = slim.thin_excess <= HalfInt();
  return {{"total_four_point", to_json(total4)},
          {"total_slim", to_json(slim)},
          {"fibers_four_point_max", report::half(fib_max)},
          {"fibers_exact", fib_exact}};
}

json analyze_sections(const MetricGraphBundle& b, const SectionFactory& f, const Common& c,
                      const AnalyzeOptions& o, json& inv) {
  progress("sections");
  json list = json::array();
  bool proj_ok = true, lift_ok = true;
  double kmax = 0;
  for (Vertex x : random_vertices(b, o.sections, c.seed)) {
    Section s = f.barycenter_flow(x);
    for (Vertex w = 0; w < b.base().size(); ++w) proj_ok = proj_ok && b.proj(s(w)) == w;
    SectionQualityPolicy qp;
    qp.seed = c.seed;
    auto q = measure_section_quality(b, s, qp);
    double k = single_section_constant(q);
    kmax = std::max(kmax, q.k);
    for (Vertex u = 0; u < b.base().size(); u += std::max<Vertex>(1, b.base().size() / 16))
      for (Vertex v = 0; v < b.base().size(); ++v)
        lift_ok = lift_ok && qi_lift(b, geodesic(b.base_distance(), u, v), s, k).within_bound;
    json e = to_json(s);
    e["quality"] = to_json(q);
    list.push_back(e);
  }
  inv["section_projects_to_identity"] = proj_ok;
  inv["lift_length_le_2k_len"] = lift_ok;
  return {{"sections", list}, {"k_max", kmax}};
}

json analyze_ladder(const MetricGraphBundle& b, const SectionFactory& f, Vertex x1, Vertex x2,
                    std::size_t L, std::optional<std::size_t> A, std::size_t n, json& inv) {
  progress("ladder");
  Section s1 = f.barycenter_flow(x1), s2 = f.barycenter_flow(x2);
  Ladder l = build_ladder(b, s1, s2, L);
  bool idem = true;
  for (Vertex x : l.vertices) idem = idem && retraction(b, l, x) == x;
  auto lip = retraction_lipschitz(b, l);
  std::size_t a = A.value_or(std::max<std::size_t>(1, girth(l)));
  auto rec = decompose_ladder(b, l, a, f);
  json j = {{"through", {x1, x2}},
            {"girth", girth(l)},
            {"requested_L", l.requested_L},
            {"L", l.L},
            {"vertices", l.vertices.size()},
            {"neighborhood", l.neighborhood.size()},
            {"log", l.log},
            {"retraction_idempotent", idem},
            {"lipschitz", to_json(lip)},
            {"coboundedness", ladder_coboundedness(b, l)},
            {"decomposition", to_json(rec)}};
  json rungs = json::array();
  for (const auto& r : l.rungs) rungs.push_back(path_length(r));
  j["rungs"] = rungs;
  if (b.base_distance().diameter() >= 2 * n) {
    LadderFlareConfig cfg;
    cfg.n = n;
    j["flare"] = to_json(ladder_flare_check(b, l, cfg));
  }
  inv["retraction_idempotent"] = idem;
  inv["decomposition_within_slack"] = rec.within_slack;
  return j;
}

json analyze_flaring(const MetricGraphBundle& b, const Common& c, const AnalyzeOptions& o,
                     const std::vector<HopBucket>& buckets, LiftSource source, json& inv,
                     std::vector<LiftPair>* samples) {
  progress("flaring");
  json j;
  const std::size_t diam = b.base_distance().diameter();
  std::size_t n = o.n;
  if (diam < 2 * n && diam >= 2) {
    n = diam / 2;
    j["note"] = "window reduced to " + std::to_string(n) + " to fit the base";
  }
  j["n"] = n;
  if (diam < 2 * n) {
    j["verdict"] = to_string(Verdict::kVacuous);
    j["note"] = "base shorter than the window";
  } else {
    FlarePolicy fp;
    fp.seed = c.seed;
    fp.geodesics = o.geodesics;
    fp.pairs = o.pairs;
    fp.source = source;
    fp.keep_samples = samples != nullptr;
    json list = json::array();
    bool pass = false, fail = false;
    for (const auto& bk : buckets) {
      auto e = flare_test(b, bk, n, fp);
      pass = pass || e.verdict == Verdict::kPass;
      fail = fail || e.verdict == Verdict::kFail;
      list.push_back(to_json(e));
      if (samples) samples->insert(samples->end(), e.samples.begin(), e.samples.end());
    }
    j["buckets"] = list;
    j["verdict"] = to_string(fail ? Verdict::kFail : pass ? Verdict::kPass : Verdict::kVacuous);
  }
  PropernessPolicy pp;
  pp.seed = c.seed;
  BoundedFlaringPolicy bp;
  bp.seed = c.seed;
  auto prof = bounded_flaring_profile(b, measure_properness(b, pp), 1, bp);
  j["bounded_flaring"] = to_json(prof);
  inv["bounded_flaring_dominated"] = prof.dominated;
  return j;
}

std::vector<HopBucket> parse_buckets(const std::string& s) {
  if (s.empty() || s == "all") return default_buckets();
  std::vector<HopBucket> out;
  for (const auto& part : split(s, ',')) {
    auto lh = split(part, '-');
    if (lh.size() != 2) throw UsageError("bucket is lo-hi, got '" + part + "'");
    out.push_back({std::stoul(lh[0]), std::stoul(lh[1])});
  }
  return out;
}

LiftSource parse_source(const std::string& s) {
  if (s == "transition") return LiftSource::kTransition;
  if (s == "sections") return LiftSource::kSections;
  if (s == "both") return LiftSource::kBoth;
  throw UsageError("unknown lift source '" + s + "'");
}

std::vector<std::pair<Vertex, Vertex>> read_pairs(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read pairs file " + path);
  std::vector<std::pair<Vertex, Vertex>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long x, y;
    if (!(ls >> x >> y)) throw UsageError(path + ":" + std::to_string(no) + ": expected 'x y'");
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= n || static_cast<std::size_t>(y) >= n)
      throw UsageError(path + ":" + std::to_string(no) + ": pair outside vertex range");
    out.emplace_back(static_cast<Vertex>(x), static_cast<Vertex>(y));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric graph bundle toolkit"};
  app.set_version_flag("--version", std::string(MGB_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option values");
  Common c;
  app.add_option("--seed", c.seed, "random seed")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads, 0 = hardware")->capture_default_str();
  app.add_option("--out", c.out, "output path (report; bundle for generate)");

  // generate
  auto* gen = app.add_subcommand("generate", "build a bundle instance");
  std::string kind, base_spec = "path:5", fiber_spec = "path:5";
  HorocycleParams hp;
  freegroup::Automorphism id;
  int R = 4, length = 6, box = 0;
  std::vector<std::string> monodromy;
  gen->add_option("--kind", kind, "product | horocycle | extension")
      ->required()
      ->check(CLI::IsMember({"product", "horocycle", "extension"}));
  gen->add_option("--base", base_spec, "product base graph spec")->capture_default_str();
  gen->add_option("--fiber", fiber_spec, "product fiber graph spec")->capture_default_str();
  gen->add_option("--T", hp.T, "horocycle base radius")->capture_default_str();
  gen->add_option("--W", hp.W, "horocycle fiber extent")->capture_default_str();
  gen->add_option("--mesh", hp.h, "horocycle mesh")->capture_default_str();
  gen->add_option("--R", R, "free group ball radius")->capture_default_str();
  gen->add_option("--length", length, "interval base length")->capture_default_str();
  gen->add_option("--box", box, "box base side, 0 for an interval")->capture_default_str();
  gen->add_option("--monodromy", monodromy, "automorphisms like a->ab,b->a");

  // verify
  auto* ver = app.add_subcommand("verify", "load a bundle file and check the axioms");
  std::string bundle_path;
  ver->add_option("bundle", bundle_path)->required();

  // analyze
  auto* ana = app.add_subcommand("analyze", "run module analyses on a bundle");
  std::string which = "full";
  AnalyzeOptions ao;
  ana->add_option("bundle", bundle_path)->required();
  ana->add_option("--which", which)
      ->check(CLI::IsMember({"hyperbolicity", "sections", "ladder", "flaring", "full"}))
      ->capture_default_str();
  ana->add_option("--sections", ao.sections, "sections to measure")->capture_default_str();
  ana->add_option("--L", ao.L, "ladder neighbourhood radius")->capture_default_str();
  ana->add_option("--n", ao.n, "flaring window")->capture_default_str();
  ana->add_option("--triangles", ao.triangles, "sampled triangles")->capture_default_str();
  ana->add_option("--geodesics", ao.geodesics)->capture_default_str();
  ana->add_option("--pairs", ao.pairs)->capture_default_str();

  // section
  auto* sec = app.add_subcommand("section", "barycenter-flow section through a vertex");
  Vertex through = 0;
  std::string section_file;
  sec->add_option("bundle", bundle_path)->required();
  sec->add_option("--through", through)->required();
  sec->add_option("--section-file", section_file, "write the section values here");

  // ladder
  auto* lad = app.add_subcommand("ladder", "ladder between sections through two vertices");
  Vertex x1 = 0, x2 = 0;
  std::size_t L = 2, window = 2;
  std::optional<std::size_t> A;
  lad->add_option("bundle", bundle_path)->required();
  lad->add_option("--x1", x1)->required();
  lad->add_option("--x2", x2)->required();
  lad->add_option("--L", L)->capture_default_str();
  lad->add_option("--A", A, "decomposition threshold");
  lad->add_option("--n", window, "flaring window")->capture_default_str();

  // flare
  auto* fl = app.add_subcommand("flare", "flaring estimate");
  std::string buckets = "all", source = "transition", csv;
  fl->add_option("bundle", bundle_path)->required();
  fl->add_option("--n", ao.n)->capture_default_str();
  fl->add_option("--bucket", buckets, "lo-hi[,lo-hi...] or all")->capture_default_str();
  fl->add_option("--source", source)
      ->check(CLI::IsMember({"transition", "sections", "both"}))
      ->capture_default_str();
  fl->add_option("--geodesics", ao.geodesics)->capture_default_str();
  fl->add_option("--pairs", ao.pairs)->capture_default_str();
  fl->add_option("--csv", csv, "per-index fiber distances");

  // paths
  auto* pa = app.add_subcommand("paths", "path family dump and Hamenstadt check");
  std::string pairs_file, graph_spec, family = "global";
  HamenstadtPolicy hpol;
  pa->add_option("bundle", bundle_path);
  pa->add_option("--graph", graph_spec, "plain graph spec; uses canonical geodesics");
  pa->add_option("--pairs-file", pairs_file, "lines 'x y'");
  pa->add_option("--family", family)->check(CLI::IsMember({"global", "geodesic"}))->capture_default_str();
  pa->add_option("--L", L)->capture_default_str();
  pa->add_option("--sample", hpol.sample_vertices)->capture_default_str();
  pa->add_option("--triangles", hpol.triangles)->capture_default_str();

  // report
  auto* rep = app.add_subcommand("report", "summarize JSON reports");
  std::vector<std::string> reports;
  rep->add_option("reports", reports)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  set_thread_count(c.threads);
  hpol.seed = c.seed;
  try {
    CLI::App* sub = app.get_subcommands().front();
    json out = {{"version", MGB_VERSION}, {"config", run_config(app, *sub)}};
    json inv = json::object();

    if (sub == gen) {
      if (c.out.empty()) throw UsageError("generate needs --out");
      MetricGraphBundle b;
      if (kind == "product") {
        b = generate_product_bundle(parse_graph_spec(base_spec), parse_graph_spec(fiber_spec));
      } else if (kind == "horocycle") {
        b = generate_horocycle_bundle(hp);
      } else {
        ExtensionParams ep{R, length, box, {}};
        for (const auto& m : monodromy) ep.monodromy.push_back(freegroup::parse_automorphism(m));
        if (ep.monodromy.empty()) ep.monodromy.push_back(id);
        b = generate_extension_bundle(ep);
      }
      save_bundle(c.out, b);
      auto reloaded = load_bundle(c.out);
      inv["reload_verifies"] = reloaded.total() == b.total() && reloaded.projection() == b.projection();
      out["bundle"] = {{"path", c.out},
                       {"vertices", b.total().size()},
                       {"edges", b.total().edge_count()},
                       {"base_vertices", b.base().size()},
                       {"max_fiber", b.max_fiber_size()},
                       {"boundary", b.boundary_count()},
                       {"meta", b.meta()}};
      out["invariants"] = inv;
      out["ok"] = all_true(inv);
      emit(out, c.out + ".json");
      std::cout << out.dump(2) << "\n";
      return out["ok"].get<bool>() ? 0 : 1;
    }

    if (sub == rep) {
      bool ok = true;
      for (const auto& path : reports) {
        std::ifstream in(path);
        if (!in) throw UsageError("cannot read " + path);
        json r = json::parse(in);
        bool rok = r.value("ok", false);
        ok = ok && rok;
        std::string cmd = r.contains("config") ? r["config"].value("command", "?") : "?";
        std::cout << path << "\t" << cmd << "\t" << (rok ? "ok" : "FAILED");
        if (r.contains("flaring") && r["flaring"].contains("verdict"))
          std::cout << "\tflaring " << r["flaring"]["verdict"].get<std::string>();
        if (r.contains("hamenstadt")) std::cout << "\thamenstadt " << (r["hamenstadt"]["pass"].get<bool>() ? "PASS" : "FAIL");
        std::cout << "\n";
      }
      return ok ? 0 : 1;
    }

    if (sub == pa && bundle_path.empty() && !graph_spec.empty()) {
      auto g = std::make_shared<Graph>(parse_graph_spec(graph_spec));
      DistanceOracle d(g);
      auto pf = geodesic_paths(d);
      json dump = json::array();
      if (!pairs_file.empty())
        for (auto [x, y] : read_pairs(pairs_file, g->size())) dump.push_back({{"pair", {x, y}}, {"path", pf.path(x, y)}});
      auto hr = hamenstadt_check(pf, d, hpol);
      out["paths"] = dump;
      out["hamenstadt"] = to_json(hr);
      out["invariants"] = inv;
      out["ok"] = true;
      emit(out, c.out);
      return 0;
    }
    if (bundle_path.empty()) throw UsageError("a bundle file is required");

    MetricGraphBundle b;
    try {
      b = load(bundle_path);
    } catch (const BundleError& e) {
      out["ok"] = false;
      out["error"] = {{"axiom", e.axiom()}, {"witness", e.witness()}, {"message", e.what()}};
      emit(out, c.out);
      return 1;
    }
    out["bundle"] = {{"path", bundle_path},
                     {"vertices", b.total().size()},
                     {"base_vertices", b.base().size()},
                     {"max_fiber", b.max_fiber_size()},
                     {"boundary", b.boundary_count()},
                     {"meta", b.meta()}};
    FarTriplePolicy ftp;
    ftp.seed = c.seed;
    SectionFactory f(b, ftp);

    if (sub == ver) {
      inv["axioms"] = true;
    } else if (sub == ana) {
      bool full = which == "full";
      if (full || which == "hyperbolicity") out["hyperbolicity"] = analyze_hyperbolicity(b, c, ao, inv);
      if (full || which == "sections") out["sections"] = analyze_sections(b, f, c, ao, inv);
      if (full || which == "ladder") {
        auto vs = random_vertices(b, b.total().size(), c.seed);
        Vertex a = vs.front(), z = a;
        for (Vertex v : b.fiber(b.proj(a)))
          if (b.fiber_distance(a, v) > b.fiber_distance(a, z)) z = v;
        out["ladder"] = analyze_ladder(b, f, a, z, ao.L, std::nullopt, ao.n, inv);
      }
      if (full || which == "flaring")
        out["flaring"] = analyze_flaring(b, c, ao, default_buckets(), LiftSource::kTransition, inv, nullptr);
    } else if (sub == sec) {
      b.total().check(through);
      Section s = f.barycenter_flow(through);
      SectionQualityPolicy qp;
      qp.seed = c.seed;
      auto q = measure_section_quality(b, s, qp);
      bool proj_ok = true;
      for (Vertex w = 0; w < b.base().size(); ++w) proj_ok = proj_ok && b.proj(s(w)) == w;
      inv["section_projects_to_identity"] = proj_ok;
      inv["passes_through"] = s(b.proj(through)) == through;
      out["section"] = to_json(s);
      out["section"]["quality"] = to_json(q);
      out["section"]["values"] = s.value;
      if (!section_file.empty()) {
        std::ofstream sf(section_file);
        write_section(sf, s);
      }
    } else if (sub == lad) {
      b.total().check(x1);
      b.total().check(x2);
      out["ladder"] = analyze_ladder(b, f, x1, x2, L, A, window, inv);
    } else if (sub == fl) {
      std::vector<LiftPair> samples;
      out["flaring"] = analyze_flaring(b, c, ao, parse_buckets(buckets), parse_source(source), inv,
                                       csv.empty() ? nullptr : &samples);
      if (!csv.empty()) {
        std::ofstream cf(csv);
        write_flare_csv(cf, samples);
      }
    } else if (sub == pa) {
      PathFamily pf = family == "global" ? global_paths(b, f, L) : geodesic_paths(b.total_distance());
      json dump = json::array();
      if (!pairs_file.empty())
        for (auto [x, y] : read_pairs(pairs_file, b.total().size()))
          dump.push_back({{"pair", {x, y}}, {"path", pf.path(x, y)}});
      progress("hamenstadt check");
      auto sample = interior_sample(b, hpol.sample_vertices, c.seed);
      auto hr = hamenstadt_check(pf, b.total_distance(), sample, hpol);
      out["paths"] = dump;
      out["hamenstadt"] = to_json(hr);
      out["family_log"] = pf.log();
    }
    out["invariants"] = inv;
    out["ok"] = all_true(inv);
    emit(out, c.out);
    return out["ok"].get<bool>() ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
