#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mgb/flaring.hpp"
#include "mgb/util.hpp"

namespace py = pybind11;
using namespace mgb;

namespace {

double half(HalfInt h) { return static_cast<double>(h.twice()) / 2.0; }

Graph graph_from_edges(std::size_t n, const std::vector<Edge>& edges) {
  return Graph::from_edges(n, edges, false);
}

py::dict hyperbolicity(const Graph& g, const std::string& mode, std::uint64_t seed) {
  TrianglePolicy tp;
  tp.seed = seed;
  if (mode == "exact") tp.mode = SlimMode::kExact;
  else if (mode == "canonical") tp.mode = SlimMode::kCanonical;
  else if (mode == "sampled") tp.mode = SlimMode::kSampled;
  else if (mode != "auto") throw Error("unknown mode: " + mode);
  FourPointPolicy fp;
  fp.seed = seed;
  fp.allow_sampling = true;
  HyperbolicityReport slim;
  FourPointResult four;
  {
    py::gil_scoped_release release;
    DistanceOracle d(std::make_shared<Graph>(g));
    slim = delta_slim(d, tp);
    four = delta_four_point(d, fp);
  }
  py::dict out;
  out["delta_slim"] = half(slim.delta_slim);
  out["delta_four_point"] = half(four.delta);
  out["four_point_exact"] = four.exact;
  out["insize_max"] = half(slim.insize_max);
  out["thin_max"] = half(slim.thin_max);
  out["mode"] = slim.mode;
  out["triangles"] = slim.triangles;
  return out;
}

py::dict hamenstadt(const HamenstadtReport& r) {
  py::dict out;
  out["measured"] = r.measured;
  out["D"] = r.D;
  out["pairs"] = r.pairs;
  out["triangles"] = r.triangles;
  out["passed"] = r.pass;
  py::list w;
  for (const auto& x : r.witnesses) w.append(py::make_tuple(x.property, x.points, x.value));
  out["witnesses"] = w;
  return out;
}

py::dict hamenstadt_global(const MetricGraphBundle& b, std::size_t L, std::size_t sample,
                           std::uint64_t seed) {
  SectionFactory f(b);
  auto pf = global_paths(b, f, L);
  HamenstadtPolicy pol;
  pol.sample_vertices = sample;
  pol.seed = seed;
  HamenstadtReport r;
  {
    py::gil_scoped_release release;
    r = hamenstadt_check(pf, b.total_distance(), interior_sample(b, sample, seed), pol);
  }
  return hamenstadt(r);
}

py::dict hamenstadt_geodesics(const Graph& g, std::size_t sample, std::uint64_t seed) {
  HamenstadtPolicy pol;
  pol.sample_vertices = sample;
  pol.seed = seed;
  HamenstadtReport r;
  {
    py::gil_scoped_release release;
    DistanceOracle d(std::make_shared<Graph>(g));
    auto pf = geodesic_paths(d);
    r = hamenstadt_check(pf, d, pol);
  }
  return hamenstadt(r);
}

Path global_path(const MetricGraphBundle& b, Vertex x, Vertex y, std::size_t L) {
  SectionFactory f(b);
  auto pf = global_paths(b, f, L);
  return pf.path(x, y);
}

}  // namespace

PYBIND11_MODULE(_mgb, m) {
  m.doc() = "Metric graph bundles: hyperbolicity, sections, ladders and flaring";
  m.attr("__version__") = MGB_VERSION;

  py::register_exception<Error>(m, "Error");
  m.def("set_threads", &set_thread_count, py::arg("n"));

  py::class_<Graph>(m, "Graph")
      .def(py::init(&graph_from_edges), py::arg("n"), py::arg("edges"))
      .def("__len__", &Graph::size)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def("edges", &Graph::edges)
      .def("neighbors", [](const Graph& g, Vertex v) {
        g.check(v);
        auto s = g.neighbors(v);
        return std::vector<Vertex>(s.begin(), s.end());
      })
      .def("connected", &Graph::connected)
      .def("distances", [](const Graph& g, Vertex s) {
        g.check(s);
        return bfs_distances(g, s);
      })
      .def("geodesic", [](const Graph& g, Vertex u, Vertex v) { return geodesic(g, u, v); });

  m.def("path_graph", &path_graph);
  m.def("cycle_graph", &cycle_graph);
  m.def("grid_graph", &grid_graph, py::arg("rows"), py::arg("cols"));
  m.def("random_tree", &random_tree, py::arg("n"), py::arg("seed") = 1);
  m.def("random_connected_graph", &random_connected_graph, py::arg("n"), py::arg("p"),
        py::arg("seed") = 1);
  m.def("hyperbolicity", &hyperbolicity, py::arg("graph"), py::arg("mode") = "auto",
        py::arg("seed") = 1);

  py::class_<MetricGraphBundle>(m, "Bundle")
      .def_property_readonly("total", &MetricGraphBundle::total, py::return_value_policy::copy)
      .def_property_readonly("base", &MetricGraphBundle::base, py::return_value_policy::copy)
      .def("proj", [](const MetricGraphBundle& b, Vertex x) {
        b.total().check(x);
        return b.proj(x);
      })
      .def("fiber", [](const MetricGraphBundle& b, Vertex w) {
        b.base().check(w);
        return b.fiber(w);
      })
      .def("fiber_distance", [](const MetricGraphBundle& b, Vertex x, Vertex y) {
        b.total().check(x);
        b.total().check(y);
        if (b.proj(x) != b.proj(y)) throw Error("points lie in different fibers");
        return b.fiber_distance(x, y);
      })
      .def("boundary", &MetricGraphBundle::boundary)
      .def_property_readonly("meta", [](const MetricGraphBundle& b) { return b.meta().dump(); })
      .def("save", [](const MetricGraphBundle& b, const std::string& path) { save_bundle(path, b); });

  m.def("load_bundle", &load_bundle);
  m.def("product_bundle", &generate_product_bundle, py::arg("base"), py::arg("fiber"));
  m.def(
      "horocycle_bundle",
      [](double T, double W, double h) { return generate_horocycle_bundle({T, W, h}); },
      py::arg("T") = 4.0, py::arg("W") = 16.0, py::arg("h") = 1.0);
  m.def(
      "extension_bundle",
      [](int R, int length, int box, const std::vector<std::string>& monodromy) {
        ExtensionParams p{R, length, box, {}};
        for (const auto& s : monodromy) p.monodromy.push_back(freegroup::parse_automorphism(s));
        if (p.monodromy.empty()) p.monodromy.emplace_back();
        return generate_extension_bundle(p);
      },
      py::arg("R") = 4, py::arg("length") = 6, py::arg("box") = 0,
      py::arg("monodromy") = std::vector<std::string>{});

  py::class_<Section>(m, "Section")
      .def_readonly("value", &Section::value)
      .def_property_readonly("kind", [](const Section& s) { return to_string(s.kind); })
      .def_readonly("fallback", &Section::fallback)
      .def_readonly("through", &Section::through)
      .def("__call__", &Section::operator())
      .def("__len__", &Section::size);

  py::class_<SectionQuality>(m, "SectionQuality")
      .def_readonly("k", &SectionQuality::k)
      .def_readonly("eps", &SectionQuality::eps)
      .def_readonly("max_hop", &SectionQuality::max_hop)
      .def_readonly("lower_bound_holds", &SectionQuality::lower_bound_holds);

  m.def("barycenter_flow_section", [](const MetricGraphBundle& b, Vertex x) {
    b.total().check(x);
    return barycenter_flow_section(b, x);
  });
  m.def("constant_section", &constant_section);
  m.def("section_quality", [](const MetricGraphBundle& b, const Section& s) {
    return measure_section_quality(b, s);
  });

  py::class_<Ladder>(m, "Ladder")
      .def_readonly("L", &Ladder::L)
      .def_readonly("vertices", &Ladder::vertices)
      .def_readonly("rungs", &Ladder::rungs)
      .def_property_readonly("girth", [](const Ladder& l) { return girth(l); });

  m.def("build_ladder", &build_ladder, py::arg("bundle"), py::arg("s1"), py::arg("s2"),
        py::arg("L") = 2);
  m.def("retraction", &retraction);
  m.def("retraction_lipschitz", [](const MetricGraphBundle& b, const Ladder& l) {
    return retraction_lipschitz(b, l).constant;
  });
  m.def(
      "decompose_ladder",
      [](const MetricGraphBundle& b, const Ladder& l, std::size_t A) {
        SectionFactory f(b);
        auto r = decompose_ladder(b, l, A, f);
        py::dict out;
        out["positions"] = r.positions;
        out["girths"] = r.girths;
        out["monotone"] = r.monotone;
        out["within_slack"] = r.within_slack;
        out["k"] = r.k;
        return out;
      },
      py::arg("bundle"), py::arg("ladder"), py::arg("A"));

  m.def("global_path", &global_path, py::arg("bundle"), py::arg("x"), py::arg("y"),
        py::arg("L") = 2);
  m.def("hamenstadt_global", &hamenstadt_global, py::arg("bundle"), py::arg("L") = 2,
        py::arg("sample") = 48, py::arg("seed") = 1);
  m.def("hamenstadt_geodesics", &hamenstadt_geodesics, py::arg("graph"), py::arg("sample") = 48,
        py::arg("seed") = 1);

  py::class_<FlaringEstimate>(m, "FlaringEstimate")
      .def_property_readonly("verdict", [](const FlaringEstimate& e) { return to_string(e.verdict); })
      .def_readonly("M", &FlaringEstimate::M)
      .def_readonly("lam", &FlaringEstimate::lambda)
      .def_readonly("n", &FlaringEstimate::n)
      .def_readonly("sampled", &FlaringEstimate::sampled)
      .def_readonly("excluded", &FlaringEstimate::excluded)
      .def_readonly("min_ratio", &FlaringEstimate::min_ratio)
      .def_readonly("max_ratio", &FlaringEstimate::max_ratio);

  m.def(
      "flare_test",
      [](const MetricGraphBundle& b, std::size_t n, std::size_t lo, std::size_t hi,
         std::size_t geodesics, std::size_t pairs, std::uint64_t seed) {
        FlarePolicy p;
        p.geodesics = geodesics;
        p.pairs = pairs;
        p.seed = seed;
        return flare_test(b, {lo, hi}, n, p);
      },
      py::arg("bundle"), py::arg("n"), py::arg("lo") = 1, py::arg("hi") = 2,
      py::arg("geodesics") = 200, py::arg("pairs") = 50, py::arg("seed") = 1,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "bounded_flaring",
      [](const MetricGraphBundle& b, std::size_t k) {
        auto p = bounded_flaring_profile(b, measure_properness(b), k);
        py::dict out;
        out["g"] = p.g;
        out["mu"] = p.mu;
        out["empirical"] = p.empirical;
        out["dominated"] = p.dominated;
        return out;
      },
      py::arg("bundle"), py::arg("k") = 1);

  m.def(
      "necessity",
      [](const MetricGraphBundle& b, std::size_t n) {
        NecessityPolicy p;
        p.n = n;
        auto r = necessity_report(b, p);
        py::dict out;
        out["delta_total"] = half(r.delta_total);
        out["delta_fibers_max"] = half(r.delta_fibers_max);
        out["verdict"] = to_string(r.verdict);
        return out;
      },
      py::arg("bundle"), py::arg("n") = 2);
}
