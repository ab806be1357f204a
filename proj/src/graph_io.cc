#include "g2/graph_io.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace g2 {

namespace {

using Json = nlohmann::ordered_json;

Json GraphToJson(const GroundGraph& g) {
  Json nodes = Json::array();
  for (const auto& [id, node] : g.nodes) {
    Json spans = Json::array();
    for (const TokenSpan& s : node.spans)
      spans.push_back(Json::array({s.sentence.ToString(), s.begin, s.end}));
    Json n;
    n["id"] = id;
    n["type"] = std::string(NodeTypeName(node.type));
    n["surface"] = node.surface;
    n["spans"] = std::move(spans);
    n["head_pos"] = std::string(PosName(node.head_pos));
    nodes.push_back(std::move(n));
  }
  Json edges = Json::array();
  for (const Edge& e : g.edges) edges.push_back(Json::array({e.src, e.dst}));
  Json j;
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  j["supernode"] = g.supernode ? Json(*g.supernode) : Json(nullptr);
  Json cfg;
  cfg["sp"] = g.config.short_circuit;
  cfg["pc"] = g.config.coordination;
  cfg["mc"] = g.config.coreference;
  cfg["ga"] = g.config.augment;
  cfg["max_nodes"] = g.config.max_nodes;
  cfg["max_context_len"] = g.config.max_context_len;
  cfg["max_knowledge_len"] = g.config.max_knowledge_len;
  j["config"] = std::move(cfg);
  return j;
}

GroundGraph GraphFromJson(const Json& j) {
  GroundGraph g;
  for (const Json& n : j.at("nodes")) {
    PhraseNode node;
    node.id = n.at("id").get<int>();
    auto type = ParseNodeType(n.at("type").get<std::string>());
    if (!type) throw std::invalid_argument("unknown node type");
    node.type = *type;
    node.surface = n.at("surface").get<std::string>();
    for (const Json& s : n.at("spans")) {
      auto ref = SentenceRef::Parse(s.at(0).get<std::string>());
      if (!ref) throw std::invalid_argument("bad span sentence reference");
      node.spans.push_back({*ref, s.at(1).get<int>(), s.at(2).get<int>()});
    }
    if (auto it = n.find("head_pos"); it != n.end()) {
      auto pos = ParsePos(it->get<std::string>());
      if (!pos) throw std::invalid_argument("unknown head_pos");
      node.head_pos = *pos;
    }
    const int id = node.id;
    if (!g.nodes.emplace(id, std::move(node)).second) {
      throw std::invalid_argument("duplicate node id " + std::to_string(id));
    }
  }
  for (const Json& e : j.at("edges")) {
    const int src = e.at(0).get<int>(), dst = e.at(1).get<int>();
    if (!g.HasNode(src)) throw UnknownNode(src);
    if (!g.HasNode(dst)) throw UnknownNode(dst);
    g.AddEdge(src, dst, "");
  }
  if (const Json& s = j.at("supernode"); !s.is_null()) {
    g.supernode = s.get<int>();
    if (!g.HasNode(*g.supernode)) throw UnknownNode(*g.supernode);
  }
  if (auto it = j.find("config"); it != j.end()) {
    const Json& c = *it;
    g.config.short_circuit = c.value("sp", true);
    g.config.coordination = c.value("pc", true);
    g.config.coreference = c.value("mc", true);
    g.config.augment = c.value("ga", true);
    g.config.max_nodes = c.value("max_nodes", size_t{512});
    g.config.max_context_len = c.value("max_context_len", size_t{128});
    g.config.max_knowledge_len = c.value("max_knowledge_len", size_t{896});
  }
  return g;
}

std::string DotEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string_view DotShape(NodeType type) {
  switch (type) {
    case NodeType::kN: return "box";
    case NodeType::kV: return "ellipse";
    case NodeType::kAdj: return "diamond";
    case NodeType::kAdv: return "hexagon";
    case NodeType::kSuper: return "doublecircle";
    case NodeType::kOther: return "plaintext";
  }
  return "plaintext";
}

}  // namespace

std::string ExportJson(const GroundGraph& g) { return GraphToJson(g).dump(); }

GroundGraph ImportJson(const std::string& text) {
  try {
    return GraphFromJson(Json::parse(text));
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("graph JSON: ") + e.what());
  }
}

std::string ExportDot(const GroundGraph& g, const std::string& name) {
  std::ostringstream out;
  out << "digraph \"" << DotEscape(name) << "\" {\n";
  for (const auto& [id, node] : g.nodes) {
    out << "  n" << id << " [shape=" << DotShape(node.type) << ", label=\""
        << DotEscape(node.surface) << "\\n" << NodeTypeName(node.type) << "\"";
    if (g.supernode == id) out << ", supernode=true";
    out << "];\n";
  }
  for (const Edge& e : g.edges) out << "  n" << e.src << " -> n" << e.dst << ";\n";
  out << "}\n";
  return out.str();
}

std::string SerializeGraphRecord(const GraphRecord& record) {
  Json j;
  j["id"] = record.id;
  j["graph"] = GraphToJson(record.graph);
  Json alignment = Json::object();
  for (const auto& [id, positions] : record.alignment)
    alignment[std::to_string(id)] = positions;
  j["alignment"] = std::move(alignment);
  return j.dump();
}

GraphRecord ParseGraphRecord(const std::string& line) {
  try {
    const Json j = Json::parse(line);
    GraphRecord r;
    r.id = j.at("id").get<std::string>();
    r.graph = GraphFromJson(j.at("graph"));
    for (const auto& [key, positions] : j.at("alignment").items())
      r.alignment[std::stoi(key)] = positions.get<std::vector<int>>();
    return r;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("graph record: ") + e.what());
  }
}

std::vector<GraphRecord> ReadGraphRecords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<GraphRecord> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(ParseGraphRecord(line));
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

BuilderConfig BuilderConfigFromKeyValues(const KeyValues& kv) {
  BuilderConfig cfg;
  cfg.short_circuit = kv.GetBool("sp", cfg.short_circuit);
  cfg.coordination = kv.GetBool("pc", cfg.coordination);
  cfg.coreference = kv.GetBool("mc", cfg.coreference);
  cfg.augment = kv.GetBool("ga", cfg.augment);
  auto count = [&](const char* key, size_t fallback) {
    const long long v = kv.GetInt(key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(std::string("config key '") + key + "' is negative");
    return static_cast<size_t>(v);
  };
  cfg.max_nodes = count("max_nodes", cfg.max_nodes);
  cfg.max_context_len = count("max_context_len", cfg.max_context_len);
  cfg.max_knowledge_len = count("max_knowledge_len", cfg.max_knowledge_len);
  return cfg;
}

KeyValues BuilderConfigToKeyValues(const BuilderConfig& cfg) {
  KeyValues kv;
  kv.Set("sp", cfg.short_circuit ? "true" : "false");
  kv.Set("pc", cfg.coordination ? "true" : "false");
  kv.Set("mc", cfg.coreference ? "true" : "false");
  kv.Set("ga", cfg.augment ? "true" : "false");
  kv.Set("max_nodes", std::to_string(cfg.max_nodes));
  kv.Set("max_context_len", std::to_string(cfg.max_context_len));
  kv.Set("max_knowledge_len", std::to_string(cfg.max_knowledge_len));
  return kv;
}

BuilderConfig BuilderConfigFromFile(const std::filesystem::path& path) {
  return BuilderConfigFromKeyValues(KeyValues::FromFile(path));
}

}  // namespace g2
