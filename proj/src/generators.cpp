#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "mgb/bundle.hpp"

namespace mgb {

MetricGraphBundle generate_product_bundle(const Graph& base, const Graph& fiber) {
  const std::size_t nb = base.size(), nf = fiber.size();
  if (nb == 0 || nf == 0) throw Error("product bundle of an empty graph");
  auto id = [&](Vertex b, Vertex f) { return static_cast<Vertex>(b * nf + f); };
  std::vector<Edge> e;
  std::vector<Vertex> proj(nb * nf);
  std::vector<std::string> labels(nb * nf);
  for (Vertex b = 0; b < nb; ++b)
    for (Vertex f = 0; f < nf; ++f) {
      proj[id(b, f)] = b;
      labels[id(b, f)] = "(" + std::to_string(b) + "," + std::to_string(f) + ")";
    }
  for (Vertex b = 0; b < nb; ++b)
    for (auto [f1, f2] : fiber.edges()) e.emplace_back(id(b, f1), id(b, f2));
  for (auto [b1, b2] : base.edges())
    for (Vertex f = 0; f < nf; ++f) e.emplace_back(id(b1, f), id(b2, f));
  Graph total = Graph::from_edges(nb * nf, e);
  total.set_labels(std::move(labels));
  auto out = verify_bundle(std::move(total), base, std::move(proj));
  out.meta()["generator"] = "product";
  out.meta()["base_vertices"] = nb;
  out.meta()["fiber_vertices"] = nf;
  return out;
}

HorocycleIndex horocycle_index(const HorocycleParams& p) {
  if (!(p.h > 0.0) || p.h > 1.0) throw Error("horocycle bundle: mesh must lie in (0, 1]");
  if (!(p.T >= 0.0) || !(p.W > 0.0)) throw Error("horocycle bundle: T and W must be positive");
  HorocycleIndex ix;
  ix.levels = static_cast<int>(std::floor(p.T / p.h + 1e-9));
  ix.half = static_cast<int>(std::floor(p.W / (2.0 * p.h) + 1e-9));
  if (ix.half < 1) throw Error("horocycle bundle: degenerate mesh (fiber has one point)");
  return ix;
}

Vertex horocycle_flow_vertex(const HorocycleParams& p, int k, double x) {
  auto ix = horocycle_index(p);
  if (k < -ix.levels || k > ix.levels) throw Error("horocycle level out of range");
  long i = std::lround(x / (p.h * std::exp(k * p.h)));
  i = std::clamp<long>(i, -ix.half, ix.half);
  return ix.id(k, static_cast<int>(i));
}

MetricGraphBundle generate_horocycle_bundle(const HorocycleParams& p) {
  const auto ix = horocycle_index(p);
  const int K = ix.levels, m = ix.half;
  const std::size_t width = 2 * m + 1, levels = 2 * K + 1;
  const std::size_t n = width * levels;
  std::vector<Edge> e;
  std::vector<Vertex> proj(n);
  std::vector<std::uint8_t> flag(n, 0);
  std::vector<std::string> labels(n);
  const double up = std::exp(-p.h), down = std::exp(p.h);
  for (int k = -K; k <= K; ++k)
    for (int i = -m; i <= m; ++i) {
      Vertex v = ix.id(k, i);
      proj[v] = static_cast<Vertex>(k + K);
      char buf[64];
      std::snprintf(buf, sizeof buf, "(%.6g,%.6g)", i * p.h * std::exp(k * p.h), k * p.h);
      labels[v] = buf;
      if (i == -m || i == m) flag[v] = 1;
      if (i < m) e.emplace_back(v, ix.id(k, i + 1));
      if (k < K) {
        long j = std::lround(i * up);
        e.emplace_back(v, ix.id(k + 1, static_cast<int>(j)));
        long back = std::lround(i * down);
        if (back < -m || back > m) {
          flag[ix.id(k + 1, i)] = 1;
          back = std::clamp<long>(back, -m, m);
        }
        e.emplace_back(ix.id(k + 1, i), ix.id(k, static_cast<int>(back)));
      }
    }
  Graph total = Graph::from_edges(n, e);
  total.set_labels(std::move(labels));
  Graph base = path_graph(levels);
  std::vector<std::string> bl(levels);
  for (int k = -K; k <= K; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", k * p.h);
    bl[k + K] = buf;
  }
  base.set_labels(std::move(bl));
  auto out = verify_bundle(std::move(total), std::move(base), std::move(proj), std::move(flag));
  out.meta()["generator"] = "horocycle";
  out.meta()["T"] = p.T;
  out.meta()["W"] = p.W;
  out.meta()["h"] = p.h;
  out.meta()["levels"] = K;
  out.meta()["half_width"] = m;
  return out;
}

namespace freegroup {

namespace {
char inv(char c) {
  switch (c) {
    case 'a': return 'A';
    case 'A': return 'a';
    case 'b': return 'B';
    case 'B': return 'b';
  }
  throw Error(std::string("invalid free group letter '") + c + "'");
}

std::size_t cyclic_strip(const std::string& w) {
  std::size_t k = 0;
  while (2 * k + 1 < w.size() && w[k] == inv(w[w.size() - 1 - k])) ++k;
  return k;
}
}  // namespace

bool is_word(const std::string& w) {
  return std::all_of(w.begin(), w.end(),
                     [](char c) { return c == 'a' || c == 'A' || c == 'b' || c == 'B'; });
}

std::string reduce(const std::string& w) {
  std::string out;
  for (char c : w) {
    if (!out.empty() && out.back() == inv(c))
      out.pop_back();
    else
      out.push_back(c);
  }
  return out;
}

std::string inverse(const std::string& w) {
  std::string out(w.rbegin(), w.rend());
  for (char& c : out) c = inv(c);
  return out;
}

std::string multiply(const std::string& u, const std::string& v) { return reduce(u + v); }

std::vector<std::string> ball(int r) {
  static const char order[4] = {'a', 'A', 'b', 'B'};
  std::vector<std::string> out{""};
  std::size_t lo = 0;
  for (int len = 1; len <= r; ++len) {
    const std::size_t hi = out.size();
    for (std::size_t i = lo; i < hi; ++i)
      for (char c : order) {
        const std::string& w = out[i];
        if (!w.empty() && w.back() == inv(c)) continue;
        out.push_back(w + c);
      }
    lo = hi;
  }
  return out;
}

std::string Automorphism::apply(const std::string& w) const {
  std::string out;
  const std::string ia = freegroup::inverse(a), ib = freegroup::inverse(b);
  for (char c : w) {
    switch (c) {
      case 'a': out += a; break;
      case 'A': out += ia; break;
      case 'b': out += b; break;
      case 'B': out += ib; break;
      default: throw Error(std::string("invalid free group letter '") + c + "'");
    }
  }
  return reduce(out);
}

Automorphism Automorphism::then(const Automorphism& next) const {
  return {next.apply(a), next.apply(b)};
}

std::string Automorphism::str() const {
  return "a->" + (a.empty() ? std::string("1") : a) + ",b->" + (b.empty() ? std::string("1") : b);
}

Automorphism Automorphism::inverse() const {
  // Nielsen reduction of (u, v) = (phi(a), phi(b)), tracking preimages.
  std::string u = reduce(a), v = reduce(b), p = "a", q = "b";
  for (int guard = 0; guard < 10000; ++guard) {
    if (u.size() == 1 && v.size() == 1 && std::tolower(u[0]) != std::tolower(v[0])) {
      std::string pa, pb;
      for (auto [img, pre] : {std::pair{u, p}, std::pair{v, q}}) {
        std::string val = img[0] == 'a' || img[0] == 'b' ? pre : freegroup::inverse(pre);
        (std::tolower(img[0]) == 'a' ? pa : pb) = reduce(val);
      }
      return {pa, pb};
    }
    std::size_t best = u.size() + v.size();
    int move = -1;
    std::string cand[8] = {multiply(u, v), multiply(u, freegroup::inverse(v)),
                           multiply(v, u), multiply(freegroup::inverse(v), u),
                           multiply(v, u), multiply(v, freegroup::inverse(u)),
                           multiply(u, v), multiply(freegroup::inverse(u), v)};
    for (int k = 0; k < 8; ++k) {
      std::size_t len = k < 4 ? cand[k].size() + v.size() : u.size() + cand[k].size();
      if (len < best) {
        best = len;
        move = k;
      }
    }
    if (move < 0) throw Error("not an automorphism: " + str());
    const std::string iq = freegroup::inverse(q), ip = freegroup::inverse(p);
    switch (move) {
      case 0: u = cand[0]; p = multiply(p, q); break;
      case 1: u = cand[1]; p = multiply(p, iq); break;
      case 2: u = cand[2]; p = multiply(q, p); break;
      case 3: u = cand[3]; p = multiply(iq, p); break;
      case 4: v = cand[4]; q = multiply(q, p); break;
      case 5: v = cand[5]; q = multiply(q, ip); break;
      case 6: v = cand[6]; q = multiply(p, q); break;
      case 7: v = cand[7]; q = multiply(ip, q); break;
    }
  }
  throw Error("not an automorphism: " + str());
}

Automorphism parse_automorphism(const std::string& s) {
  Automorphism out;
  bool seen_a = false, seen_b = false;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string part;
    for (char c : s.substr(pos, comma - pos))
      if (!std::isspace(static_cast<unsigned char>(c))) part.push_back(c);
    pos = comma + 1;
    if (part.empty()) continue;
    auto arrow = part.find("->");
    if (arrow != 1 || (part[0] != 'a' && part[0] != 'b'))
      throw Error("malformed monodromy term '" + part + "' (expected like a->ab)");
    std::string img = part.substr(3);
    if (img == "1") img.clear();
    if (!is_word(img)) throw Error("malformed monodromy image '" + img + "'");
    if (part[0] == 'a') {
      if (seen_a) throw Error("monodromy gives a twice");
      out.a = reduce(img);
      seen_a = true;
    } else {
      if (seen_b) throw Error("monodromy gives b twice");
      out.b = reduce(img);
      seen_b = true;
    }
  }
  if (!seen_a || !seen_b) throw Error("monodromy must give images of both a and b");
  out.inverse();
  return out;
}

std::optional<std::string> conjugator(const std::string& u0, const std::string& v0) {
  const std::string u = reduce(u0), v = reduce(v0);
  if (u.size() % 2 != v.size() % 2) return std::nullopt;
  const std::size_t ku = cyclic_strip(u), kv = cyclic_strip(v);
  const std::string q = u.substr(0, ku), d = u.substr(ku, u.size() - 2 * ku);
  const std::string p = v.substr(0, kv), c = v.substr(kv, v.size() - 2 * kv);
  if (c.size() != d.size()) return std::nullopt;
  if (c.empty()) return multiply(q, inverse(p));
  for (std::size_t r = 0; r < c.size(); ++r) {
    // c = x y, d = y x = x^-1 c x
    std::string x = c.substr(0, r), y = c.substr(r);
    if (y + x == d) return reduce(q + inverse(x) + inverse(p));
  }
  return std::nullopt;
}

bool commute_up_to_inner(const Automorphism& f, const Automorphism& g) {
  const Automorphism alpha = g.then(f), beta = f.then(g);
  auto g0 = conjugator(alpha.a, beta.a);
  if (!g0) return false;
  // centralizer of beta(a) is generated by its root
  const std::string w = beta.a;
  const std::size_t k = cyclic_strip(w);
  const std::string pre = w.substr(0, k), core = w.substr(k, w.size() - 2 * k);
  std::string root_core = core;
  for (std::size_t per = 1; per <= core.size(); ++per) {
    if (core.size() % per) continue;
    bool ok = true;
    for (std::size_t i = per; i < core.size() && ok; ++i) ok = core[i] == core[i - per];
    if (ok) {
      root_core = core.substr(0, per);
      break;
    }
  }
  const std::string root = reduce(pre + root_core + inverse(pre));
  for (int e = -64; e <= 64; ++e) {
    std::string z;
    const std::string unit = e >= 0 ? root : inverse(root);
    for (int i = 0; i < std::abs(e); ++i) z += unit;
    std::string h = multiply(*g0, z);
    if (reduce(h + beta.b + inverse(h)) == alpha.b) return true;
  }
  return false;
}

}  // namespace freegroup

MetricGraphBundle generate_extension_bundle(const ExtensionParams& p) {
  using namespace freegroup;
  if (p.R < 0) throw Error("extension bundle: negative radius");
  if (p.box <= 0 && p.length < 0) throw Error("extension bundle: negative base length");
  if (p.monodromy.empty()) throw Error("extension bundle: no monodromy given");
  const auto words = ball(p.R);
  const std::size_t nf = words.size();
  std::unordered_map<std::string, Vertex> index;
  for (Vertex i = 0; i < nf; ++i) index.emplace(words[i], i);

  Graph base;
  std::vector<std::string> base_labels;
  std::vector<std::pair<Edge, const Automorphism*>> base_edges;
  std::vector<Automorphism> phi = p.monodromy;
  if (p.box > 0) {
    if (phi.size() == 1) phi.push_back(phi[0]);
    if (phi.size() != 2) throw Error("extension bundle: a box base needs two monodromies");
    if (!commute_up_to_inner(phi[0], phi[1]))
      throw Error("inconsistent monodromy: " + phi[0].str() + " and " + phi[1].str() +
                  " do not commute up to an inner automorphism");
    const int s = p.box;
    base = grid_graph(s, s);
    for (int r = 0; r < s; ++r)
      for (int c = 0; c < s; ++c) {
        base_labels.push_back("(" + std::to_string(r) + "," + std::to_string(c) + ")");
        Vertex v = static_cast<Vertex>(r * s + c);
        if (c + 1 < s) base_edges.push_back({{v, v + 1}, &phi[0]});
        if (r + 1 < s) base_edges.push_back({{v, static_cast<Vertex>(v + s)}, &phi[1]});
      }
  } else {
    if (phi.size() != 1) throw Error("extension bundle: an interval base needs one monodromy");
    base = path_graph(static_cast<std::size_t>(p.length) + 1);
    for (int i = 0; i <= p.length; ++i) base_labels.push_back(std::to_string(i));
    for (Vertex i = 0; i < static_cast<Vertex>(p.length); ++i)
      base_edges.push_back({{i, i + 1}, &phi[0]});
  }
  base.set_labels(base_labels);

  const std::size_t nb = base.size();
  const std::size_t n = nb * nf;
  auto id = [&](Vertex b, Vertex w) { return static_cast<Vertex>(b * nf + w); };
  std::vector<Edge> e;
  std::vector<Vertex> proj(n);
  std::vector<std::uint8_t> flag(n, 0);
  std::vector<std::string> labels(n);
  for (Vertex b = 0; b < nb; ++b)
    for (Vertex w = 0; w < nf; ++w) {
      proj[id(b, w)] = b;
      labels[id(b, w)] = (words[w].empty() ? std::string("1") : words[w]) + "@" + base_labels[b];
      if (!words[w].empty())
        e.emplace_back(id(b, w), id(b, index.at(words[w].substr(0, words[w].size() - 1))));
    }
  const std::size_t R = static_cast<std::size_t>(p.R);
  auto cross = [&](Vertex from_b, Vertex to_b, const Automorphism& f) {
    for (Vertex w = 0; w < nf; ++w) {
      std::string img = f.apply(words[w]);
      bool cut = img.size() > R;
      if (cut) img.resize(R);
      Vertex x = id(from_b, w), y = id(to_b, index.at(img));
      e.emplace_back(x, y);
      if (cut) flag[x] = flag[y] = 1;
    }
  };
  for (const auto& [edge, f] : base_edges) {
    Automorphism finv = f->inverse();
    cross(edge.first, edge.second, *f);
    cross(edge.second, edge.first, finv);
  }
  Graph total = Graph::from_edges(n, e);
  total.set_labels(std::move(labels));
  auto out = verify_bundle(std::move(total), std::move(base), std::move(proj), std::move(flag));
  out.meta()["generator"] = "extension";
  out.meta()["R"] = p.R;
  if (p.box > 0)
    out.meta()["box"] = p.box;
  else
    out.meta()["length"] = p.length;
  auto mono = nlohmann::json::array();
  for (const auto& f : phi) mono.push_back(f.str());
  out.meta()["monodromy"] = mono;
  return out;
}

}  // namespace mgb
