#include <fstream>
#include <sstream>

#include "mgb/bundle.hpp"

namespace mgb {

void write_bundle(std::ostream& out, const MetricGraphBundle& b) {
  out << "# mgb-bundle 1\n";
  out << "# meta " << b.meta().dump() << "\n";
  out << "TOTAL\n";
  for (auto [u, v] : b.total().edges()) out << u << ' ' << v << '\n';
  out << "FIBER\n";
  for (Vertex x = 0; x < b.total().size(); ++x) out << x << ' ' << b.proj(x) << '\n';
  out << "BASE\n";
  if (b.base().size() == 1) out << "0\n";
  for (auto [u, v] : b.base().edges()) out << u << ' ' << v << '\n';
  if (b.boundary_count() > 0) {
    out << "BOUNDARY\n";
    for (Vertex x = 0; x < b.total().size(); ++x)
      if (b.boundary(x)) out << x << '\n';
  }
  if (!b.total().labels().empty()) {
    out << "LABELS\n";
    for (Vertex x = 0; x < b.total().size(); ++x) out << x << ' ' << b.total().label(x) << '\n';
  }
  if (!b.base().labels().empty()) {
    out << "BASE_LABELS\n";
    for (Vertex x = 0; x < b.base().size(); ++x) out << x << ' ' << b.base().label(x) << '\n';
  }
}

MetricGraphBundle read_bundle(std::istream& in) {
  enum class Sec { kNone, kTotal, kFiber, kBase, kBoundary, kLabels, kBaseLabels };
  Sec sec = Sec::kNone;
  std::vector<Edge> total_edges, base_edges;
  std::vector<std::pair<Vertex, Vertex>> fiber;
  std::vector<Vertex> boundary;
  std::vector<std::pair<Vertex, std::string>> labels, base_labels;
  std::size_t base_n = 0;
  nlohmann::json meta = nlohmann::json::object();
  std::string line;
  std::size_t lineno = 0;
  auto bad = [&](const std::string& why) {
    throw GraphError("bundle file line " + std::to_string(lineno) + ": " + why, lineno);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# meta ", 0) == 0) {
      try {
        meta = nlohmann::json::parse(line.substr(7));
      } catch (const nlohmann::json::exception&) {
        bad("malformed meta");
      }
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (line == "TOTAL") { sec = Sec::kTotal; continue; }
    if (line == "FIBER") { sec = Sec::kFiber; continue; }
    if (line == "BASE") { sec = Sec::kBase; continue; }
    if (line == "BOUNDARY") { sec = Sec::kBoundary; continue; }
    if (line == "LABELS") { sec = Sec::kLabels; continue; }
    if (line == "BASE_LABELS") { sec = Sec::kBaseLabels; continue; }
    std::istringstream ls(line);
    long long a = -1, c = -1;
    if (!(ls >> a) || a < 0 || a >= static_cast<long long>(kNoVertex)) bad("expected a vertex id");
    if (sec == Sec::kLabels || sec == Sec::kBaseLabels) {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      (sec == Sec::kLabels ? labels : base_labels).emplace_back(static_cast<Vertex>(a), rest);
      continue;
    }
    bool two = static_cast<bool>(ls >> c);
    std::string junk;
    if (ls >> junk) bad("trailing tokens");
    if (two && (c < 0 || c >= static_cast<long long>(kNoVertex))) bad("bad vertex id");
    switch (sec) {
      case Sec::kTotal:
        if (!two) bad("expected an edge");
        total_edges.emplace_back(static_cast<Vertex>(a), static_cast<Vertex>(c));
        break;
      case Sec::kFiber:
        if (!two) bad("expected 'vertex base-vertex'");
        fiber.emplace_back(static_cast<Vertex>(a), static_cast<Vertex>(c));
        base_n = std::max<std::size_t>(base_n, c + 1);
        break;
      case Sec::kBase:
        base_n = std::max<std::size_t>(base_n, a + 1);
        if (two) {
          base_n = std::max<std::size_t>(base_n, c + 1);
          base_edges.emplace_back(static_cast<Vertex>(a), static_cast<Vertex>(c));
        }
        break;
      case Sec::kBoundary:
        if (two) bad("expected a single vertex");
        boundary.push_back(static_cast<Vertex>(a));
        break;
      default:
        bad("data outside a section");
    }
  }
  const std::size_t n = fiber.size();
  std::vector<Vertex> proj(n, kNoVertex);
  for (auto [x, b] : fiber) {
    if (x >= n || proj[x] != kNoVertex) throw GraphError("FIBER section must list each vertex 0..n-1 once");
    proj[x] = b;
  }
  Graph total = Graph::from_edges(n, total_edges);
  Graph base = Graph::from_edges(base_n, base_edges);
  std::vector<std::uint8_t> flags;
  if (!boundary.empty()) {
    flags.assign(n, 0);
    for (Vertex x : boundary) {
      if (x >= n) throw GraphError("BOUNDARY vertex out of range");
      flags[x] = 1;
    }
  }
  auto apply_labels = [](Graph& g, const std::vector<std::pair<Vertex, std::string>>& l) {
    if (l.empty()) return;
    std::vector<std::string> v(g.size());
    for (const auto& [x, s] : l) {
      if (x >= g.size()) throw GraphError("label for a vertex out of range");
      v[x] = s;
    }
    g.set_labels(std::move(v));
  };
  apply_labels(total, labels);
  apply_labels(base, base_labels);
  auto b = verify_bundle(std::move(total), std::move(base), std::move(proj), std::move(flags));
  b.meta() = meta;
  return b;
}

void save_bundle(const std::string& path, const MetricGraphBundle& b) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_bundle(out, b);
}

MetricGraphBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_bundle(in);
}

}  // namespace mgb
