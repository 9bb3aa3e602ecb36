#include "kaplan/graph_io.hpp"

#include <fstream>

#include "kaplan/error.hpp"

namespace kaplan {

using nlohmann::json;

json graph_to_json(const WeightedGraph& g) {
  json vertices = json::array();
  const auto& coords = g.coordinates();
  for (Vertex x = 0; x < g.size(); ++x) {
    json v = {{"id", x}, {"mu", g.mu(x)}, {"boundary", g.is_boundary(x)}};
    if (coords) {
      const auto c = coords->of(x);
      v["coord"] = std::vector<int>(c.begin(), c.end());
    }
    vertices.push_back(std::move(v));
  }
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({{"u", e.u}, {"v", e.v}, {"w", e.w}});
  return {{"vertices", std::move(vertices)},
          {"edges", std::move(edges)},
          {"family", {{"kind", g.family().kind}, {"params", g.family().params}}}};
}

WeightedGraph graph_from_json(const json& doc) {
  try {
    GraphSpec spec;
    const auto& vertices = doc.at("vertices");
    const std::size_t n = vertices.size();
    spec.mu.assign(n, 0.0);
    spec.boundary.assign(n, false);
    std::vector<char> seen(n, 0);
    int dim = -1;
    std::vector<std::vector<int>> coord(n);
    for (const auto& v : vertices) {
      const auto id = v.at("id").get<std::size_t>();
      if (id >= n || seen[id]) {
        throw Error(ErrorCode::ParseError, "vertex ids must be a permutation of 0..n-1");
      }
      seen[id] = 1;
      spec.mu[id] = v.at("mu").get<double>();
      spec.boundary[id] = v.value("boundary", false);
      if (v.contains("coord")) {
        coord[id] = v.at("coord").get<std::vector<int>>();
        const int d = static_cast<int>(coord[id].size());
        if (dim >= 0 && d != dim) throw Error(ErrorCode::ParseError, "inconsistent coordinate dimension");
        dim = d;
      } else if (dim >= 0) {
        throw Error(ErrorCode::ParseError, "coordinates must be given for every vertex or none");
      }
    }
    if (dim >= 0) {
      LatticeCoordinates lc;
      lc.dim = dim;
      lc.flat.reserve(n * static_cast<std::size_t>(dim));
      for (const auto& c : coord) {
        if (static_cast<int>(c.size()) != dim) {
          throw Error(ErrorCode::ParseError, "coordinates must be given for every vertex or none");
        }
        lc.flat.insert(lc.flat.end(), c.begin(), c.end());
      }
      spec.coords = std::move(lc);
    }
    for (const auto& e : doc.at("edges")) {
      spec.edges.push_back({e.at("u").get<Vertex>(), e.at("v").get<Vertex>(), e.at("w").get<double>()});
    }
    if (doc.contains("family")) {
      spec.family.kind = doc["family"].value("kind", std::string("custom"));
      spec.family.params = doc["family"].value("params", json::object());
    }
    return WeightedGraph::build(std::move(spec));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph document: ") + e.what());
  }
}

void save_graph(const WeightedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << graph_to_json(g).dump(1) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

WeightedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return graph_from_json(doc);
}

}  // namespace kaplan
