#include "cmc/serialization.hpp"

#include <fstream>
#include <map>

#include "cmc/error.hpp"

namespace cmc {

namespace {

template <class T>
T get(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("field '") + key + "': " + e.what());
  }
}

const Json& field(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  return doc.at(key);
}

CandidateId parse_id(const std::string& key) {
  try {
    std::size_t used = 0;
    const CandidateId id = std::stoll(key, &used);
    if (used == key.size()) return id;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorCode::Parse, "bad candidate key '" + key + "'");
}

// Reads a map keyed by candidate id and edge key, requiring an exact key match.
template <class T, class Convert>
void read_keyed(const Crag& crag, const Json& nodes, const Json& edges, std::vector<T>& node_out,
                std::vector<T>& edge_out, Convert convert) {
  if (!nodes.is_object() || !edges.is_object()) throw Error(ErrorCode::Parse, "expected keyed objects");
  if (nodes.size() != crag.num_candidates() || edges.size() != crag.num_edges()) {
    throw Error(ErrorCode::KeyMismatch, "entry count does not match CRAG");
  }
  node_out.assign(crag.num_candidates(), T{});
  edge_out.assign(crag.num_edges(), T{});
  std::vector<bool> seen_nodes(crag.num_candidates()), seen_edges(crag.num_edges());
  for (const auto& [key, value] : nodes.items()) {
    const auto index = crag.find(parse_id(key));
    if (!index || seen_nodes[*index]) throw Error(ErrorCode::KeyMismatch, "unexpected candidate key " + key);
    seen_nodes[*index] = true;
    node_out[*index] = convert(value);
  }
  for (const auto& [key, value] : edges.items()) {
    const auto index = crag.find_edge(EdgeKey::parse(key));
    if (!index || seen_edges[*index]) throw Error(ErrorCode::KeyMismatch, "unexpected edge key " + key);
    seen_edges[*index] = true;
    edge_out[*index] = convert(value);
  }
}

}  // namespace

Json crag_to_json(const Crag& crag) {
  Json candidates = Json::array();
  Json subset = Json::array();
  for (int i = 0; i < static_cast<int>(crag.num_candidates()); ++i) {
    Json c{{"id", crag.id(i)}, {"level", crag.level(i)}};
    if (crag.is_leaf(i)) {
      Json runs = Json::array();
      const auto pixels = crag.pixels(i);
      for (std::size_t k = 0; k < pixels.size();) {
        std::size_t j = k;
        while (j + 1 < pixels.size() && pixels[j + 1].row == pixels[k].row && pixels[j + 1].col == pixels[j].col + 1) ++j;
        runs.push_back({{"row", pixels[k].row}, {"col_start", pixels[k].col}, {"col_end", pixels[j].col}});
        k = j + 1;
      }
      c["pixels"] = std::move(runs);
    } else {
      Json children = Json::array();
      for (int child : crag.children(i)) {
        children.push_back(crag.id(child));
        subset.push_back({crag.id(child), crag.id(i)});
      }
      c["children"] = std::move(children);
    }
    candidates.push_back(std::move(c));
  }
  Json adjacency = Json::array();
  for (const auto& e : crag.edges()) adjacency.push_back({e.u, e.v});
  return Json{{"width", crag.width()},
              {"height", crag.height()},
              {"candidates", std::move(candidates)},
              {"adjacency", std::move(adjacency)},
              {"subset", std::move(subset)}};
}

Crag crag_from_json(const Json& doc) {
  const int width = get<int>(doc, "width");
  const int height = get<int>(doc, "height");
  std::vector<CandidateSpec> candidates;
  std::vector<SubsetEdge> subset;
  std::map<std::pair<CandidateId, CandidateId>, bool> subset_seen;
  for (const auto& c : field(doc, "candidates")) {
    CandidateSpec spec{get<CandidateId>(c, "id"), c.contains("level") ? get<int>(c, "level") : 0, {}};
    if (c.contains("pixels")) {
      for (const auto& run : c.at("pixels")) {
        const int row = get<int>(run, "row");
        const int c0 = get<int>(run, "col_start"), c1 = get<int>(run, "col_end");
        if (c1 < c0) throw Error(ErrorCode::Parse, "run with col_end < col_start");
        for (int col = c0; col <= c1; ++col) spec.pixels.push_back({row, col});
      }
    }
    if (c.contains("children")) {
      for (const auto& child : c.at("children")) {
        const auto id = child.get<CandidateId>();
        subset.push_back({id, spec.id});
        subset_seen[{id, spec.id}] = true;
      }
    }
    candidates.push_back(std::move(spec));
  }
  if (doc.contains("subset")) {
    for (const auto& s : doc.at("subset")) {
      if (!s.is_array() || s.size() != 2) throw Error(ErrorCode::Parse, "subset entries must be [child, parent]");
      const auto child = s[0].get<CandidateId>(), parent = s[1].get<CandidateId>();
      if (!subset_seen.count({child, parent})) subset.push_back({child, parent});
    }
  }
  std::vector<EdgeKey> adjacency;
  for (const auto& e : field(doc, "adjacency")) {
    if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::Parse, "adjacency entries must be [id, id]");
    adjacency.push_back(EdgeKey::of(e[0].get<CandidateId>(), e[1].get<CandidateId>()));
  }
  return Crag::build(std::move(candidates), std::move(adjacency), std::move(subset), width, height);
}

Json solution_to_json(const Crag& crag, const Solution& solution) {
  if (solution.y.size() != crag.num_candidates() || solution.m.size() != crag.num_edges()) {
    throw Error(ErrorCode::KeyMismatch, "solution size does not match CRAG");
  }
  Json y = Json::object(), m = Json::object();
  for (int i = 0; i < static_cast<int>(crag.num_candidates()); ++i) y[std::to_string(crag.id(i))] = int{solution.y[i]};
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) m[crag.edges()[e].str()] = int{solution.m[e]};
  return Json{{"y", std::move(y)}, {"m", std::move(m)}, {"objective", solution.objective}};
}

Solution solution_from_json(const Crag& crag, const Json& doc) {
  Solution solution;
  read_keyed(crag, field(doc, "y"), field(doc, "m"), solution.y, solution.m, [](const Json& v) {
    const int bit = v.get<int>();
    if (bit != 0 && bit != 1) throw Error(ErrorCode::Parse, "indicator must be 0 or 1");
    return static_cast<std::uint8_t>(bit);
  });
  solution.objective = doc.contains("objective") ? get<double>(doc, "objective") : 0.0;
  return solution;
}

Json costs_to_json(const Crag& crag, const CostTable& costs) {
  check_costs(crag, costs);
  Json f = Json::object(), g = Json::object();
  for (int i = 0; i < static_cast<int>(crag.num_candidates()); ++i) f[std::to_string(crag.id(i))] = costs.f[i];
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) g[crag.edges()[e].str()] = costs.g[e];
  return Json{{"f", std::move(f)}, {"g", std::move(g)}};
}

CostTable costs_from_json(const Crag& crag, const Json& doc) {
  CostTable costs;
  read_keyed(crag, field(doc, "f"), field(doc, "g"), costs.f, costs.g, [](const Json& v) {
    // decimal strings are accepted so that exact inputs survive editing
    if (!v.is_string()) return v.get<double>();
    const auto text = v.get<std::string>();
    try {
      std::size_t used = 0;
      const double value = std::stod(text, &used);
      if (used == text.size()) return value;
    } catch (const std::logic_error&) {
    }
    throw Error(ErrorCode::Parse, "bad cost '" + text + "'");
  });
  check_costs(crag, costs);
  return costs;
}

Json features_to_json(const Crag& crag, const FeatureSet& features) {
  if (features.nodes.size() != crag.num_candidates() || features.edges.size() != crag.num_edges()) {
    throw Error(ErrorCode::KeyMismatch, "feature set does not match CRAG");
  }
  Json nodes = Json::object(), edges = Json::object();
  for (int i = 0; i < static_cast<int>(crag.num_candidates()); ++i) nodes[std::to_string(crag.id(i))] = features.nodes[i];
  for (int e = 0; e < static_cast<int>(crag.num_edges()); ++e) edges[crag.edges()[e].str()] = features.edges[e];
  return Json{{"schema", {{"node", features.node_schema}, {"edge", features.edge_schema}}},
              {"nodes", std::move(nodes)},
              {"edges", std::move(edges)}};
}

FeatureSet features_from_json(const Crag& crag, const Json& doc) {
  FeatureSet features;
  const auto& schema = field(doc, "schema");
  features.node_schema = get<std::vector<std::string>>(schema, "node");
  features.edge_schema = get<std::vector<std::string>>(schema, "edge");
  read_keyed(crag, field(doc, "nodes"), field(doc, "edges"), features.nodes, features.edges,
             [](const Json& v) { return v.get<FeatureVector>(); });
  for (const auto& row : features.nodes) {
    if (row.size() != features.node_schema.size()) throw Error(ErrorCode::SchemaMismatch, "node row length differs from schema");
  }
  for (const auto& row : features.edges) {
    if (row.size() != features.edge_schema.size()) throw Error(ErrorCode::SchemaMismatch, "edge row length differs from schema");
  }
  return features;
}

Json forest_to_json(const Forest& forest) {
  Json trees = Json::array();
  for (const auto& tree : forest.trees) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"probability", n.probability}});
    }
    trees.push_back(std::move(nodes));
  }
  return Json{{"n_features", forest.n_features}, {"seed", forest.seed}, {"trees", std::move(trees)}};
}

Forest forest_from_json(const Json& doc) {
  Forest forest;
  forest.n_features = get<std::size_t>(doc, "n_features");
  forest.seed = get<std::uint64_t>(doc, "seed");
  for (const auto& t : field(doc, "trees")) {
    DecisionTree tree;
    for (const auto& n : t) {
      tree.nodes.push_back({get<int>(n, "feature"), get<double>(n, "threshold"), get<int>(n, "left"),
                            get<int>(n, "right"), get<double>(n, "probability")});
    }
    const int count = static_cast<int>(tree.nodes.size());
    for (const auto& n : tree.nodes) {
      if (n.feature == -1) {
        if (n.probability < 0.0 || n.probability > 1.0) throw Error(ErrorCode::Parse, "leaf probability outside [0,1]");
        continue;
      }
      if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= forest.n_features || n.left <= 0 ||
          n.right <= 0 || n.left >= count || n.right >= count) {
        throw Error(ErrorCode::Parse, "malformed tree node");
      }
    }
    if (tree.nodes.empty()) throw Error(ErrorCode::Parse, "empty tree");
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

Json model_to_json(const CostModel& model) {
  return Json{{"node_schema", model.node_schema},
              {"edge_schema", model.edge_schema},
              {"node_forest", forest_to_json(model.node_forest)},
              {"edge_forest", forest_to_json(model.edge_forest)}};
}

CostModel model_from_json(const Json& doc) {
  return CostModel{get<std::vector<std::string>>(doc, "node_schema"), get<std::vector<std::string>>(doc, "edge_schema"),
                   forest_from_json(field(doc, "node_forest")), forest_from_json(field(doc, "edge_forest"))};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << doc.dump(1) << "\n";
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

}  // namespace cmc
