#include "g2/graph.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <numeric>

namespace g2 {

namespace {

constexpr std::array<std::pair<NodeType, std::string_view>, 6> kNodeTypeNames = {{
    {NodeType::kN, "N"},
    {NodeType::kV, "V"},
    {NodeType::kAdj, "ADJ"},
    {NodeType::kAdv, "ADV"},
    {NodeType::kSuper, "SUPER"},
    {NodeType::kOther, "OTHER"},
}};

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool IsPhraseRelation(std::string_view deprel) {
  const std::string r = Lower(deprel);
  return r == "compound" || r == "flat" || r == "fixed";
}

bool IsConjRelation(std::string_view deprel) { return Lower(deprel) == "conj"; }

class UnionFind {
 public:
  explicit UnionFind(size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  size_t Find(size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void Union(size_t a, size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<size_t> parent_;
};

// Earliest encoder position of a node, or -1 if none of its tokens are placed.
int EarliestPosition(const PhraseNode& node, const InputLayout& layout) {
  int best = -1;
  for (const TokenSpan& span : node.spans) {
    for (int t = span.begin; t < span.end; ++t) {
      if (auto pos = layout.Position(span.sentence, t)) {
        if (best < 0 || *pos < best) best = *pos;
      }
    }
  }
  return best;
}

bool TouchesContext(const PhraseNode& node) {
  return std::any_of(node.spans.begin(), node.spans.end(), [](const TokenSpan& s) {
    return s.sentence.kind == SourceKind::kContext;
  });
}

}  // namespace

std::string_view NodeTypeName(NodeType type) {
  for (const auto& [t, name] : kNodeTypeNames)
    if (t == type) return name;
  return "OTHER";
}

std::optional<NodeType> ParseNodeType(std::string_view name) {
  for (const auto& [t, n] : kNodeTypeNames)
    if (n == name) return t;
  return std::nullopt;
}

NodeType NodeTypeForPos(Pos pos) {
  switch (pos) {
    case Pos::kNoun:
    case Pos::kPropn:
    case Pos::kPron:
      return NodeType::kN;
    case Pos::kVerb:
      return NodeType::kV;
    case Pos::kAdj:
      return NodeType::kAdj;
    case Pos::kAdv:
      return NodeType::kAdv;
    default:
      return NodeType::kOther;
  }
}

void SemanticGraph::AddEdge(int src, int dst, std::string_view relation) {
  if (edges.insert({src, dst}).second) relations[{src, dst}] = std::string(relation);
}

void SemanticGraph::RemoveEdge(const Edge& e) {
  edges.erase(e);
  relations.erase(e);
}

void SemanticGraph::RemoveNode(int id) {
  for (auto it = edges.begin(); it != edges.end();) {
    if (it->src == id || it->dst == id) {
      relations.erase(*it);
      it = edges.erase(it);
    } else {
      ++it;
    }
  }
  nodes.erase(id);
  if (supernode == id) supernode.reset();
}

std::vector<int> SemanticGraph::OutNeighbors(int id) const {
  std::vector<int> out;
  for (auto it = edges.lower_bound({id, std::numeric_limits<int>::min()});
       it != edges.end() && it->src == id; ++it) {
    out.push_back(it->dst);
  }
  return out;
}

std::vector<int> SemanticGraph::InNeighbors(int id) const {
  std::vector<int> in;
  for (const Edge& e : edges)
    if (e.dst == id) in.push_back(e.src);
  return in;
}

std::vector<int> SemanticGraph::NodeIds() const {
  std::vector<int> ids;
  ids.reserve(nodes.size());
  for (const auto& [id, node] : nodes) ids.push_back(id);
  return ids;
}

std::optional<int> InputLayout::Position(const SentenceRef& sentence,
                                         int token) const {
  auto it = placements.find(sentence);
  if (it == placements.end()) return std::nullopt;
  const Placement& p = it->second;
  if (token < p.keep_begin || token >= p.keep_end) return std::nullopt;
  return p.offset + (token - p.keep_begin);
}

std::pair<int, int> InputLayout::KeptRange(const SentenceRef& sentence) const {
  auto it = placements.find(sentence);
  if (it == placements.end()) return {0, 0};
  return {it->second.keep_begin, it->second.keep_end};
}

InputLayout ComputeInputLayout(const AnnotatedDocument& doc,
                               size_t max_context_len, size_t max_knowledge_len) {
  InputLayout layout;
  auto place = [&](const Sentence& s, int keep_begin, int keep_end) {
    if (keep_begin >= keep_end) return;
    layout.placements[s.ref] = {static_cast<int>(layout.slots.size()), keep_begin,
                                keep_end};
    for (int t = keep_begin; t < keep_end; ++t)
      layout.slots.push_back({false, s.ref, t});
  };

  size_t context_tokens = 0;
  for (const Sentence& s : doc.context) context_tokens += s.tokens.size();
  size_t to_drop = context_tokens > max_context_len ? context_tokens - max_context_len : 0;
  for (const Sentence& s : doc.context) {
    const size_t n = s.tokens.size();
    const size_t dropped = std::min(n, to_drop);
    to_drop -= dropped;
    place(s, static_cast<int>(dropped), static_cast<int>(n));
  }
  layout.context_length = layout.slots.size();

  size_t budget = max_knowledge_len;
  auto separator = [&]() {
    if (budget == 0) return false;
    layout.slots.push_back({true, {}, 0});
    --budget;
    return true;
  };
  if (!separator()) return layout;
  for (size_t d = 0; d < doc.knowledge.size(); ++d) {
    if (d > 0 && !separator()) break;
    for (const Sentence& s : doc.knowledge[d]) {
      const size_t keep = std::min(budget, s.tokens.size());
      place(s, 0, static_cast<int>(keep));
      budget -= keep;
    }
  }
  return layout;
}

SentenceGraph MergePhrases(const Sentence& sentence, int first_id) {
  return MergePhrases(sentence, first_id, 0,
                      static_cast<int>(sentence.tokens.size()));
}

SentenceGraph MergePhrases(const Sentence& sentence, int first_id,
                           int keep_begin, int keep_end) {
  const auto& tokens = sentence.tokens;
  const int n = static_cast<int>(tokens.size());
  keep_begin = std::clamp(keep_begin, 0, n);
  keep_end = std::clamp(keep_end, keep_begin, n);
  auto present = [&](int i) {
    return i >= keep_begin && i < keep_end && tokens[i].pos != Pos::kPunct;
  };

  UnionFind groups(n);
  for (int i = 0; i < n; ++i) {
    const Token& t = tokens[i];
    if (!present(i) || t.head == kRootHead || !present(t.head)) continue;
    if (IsPhraseRelation(t.deprel)) groups.Union(i, t.head);
  }

  // A phrase is a maximal run of consecutive present tokens of one group.
  std::vector<int> token_node(n, -1);
  SentenceGraph out;
  int i = 0;
  while (i < n) {
    if (!present(i)) {
      ++i;
      continue;
    }
    int j = i + 1;
    while (j < n && present(j) && groups.Find(j) == groups.Find(i)) ++j;

    // Head: the rightmost token whose own head lies outside the run.
    int head = j - 1;
    for (int k = j - 1; k >= i; --k) {
      const int h = tokens[k].head;
      if (h == kRootHead || h < i || h >= j) {
        head = k;
        break;
      }
    }
    PhraseNode node;
    node.id = first_id + static_cast<int>(out.nodes.size());
    node.head_pos = tokens[head].pos;
    node.type = NodeTypeForPos(node.head_pos);
    for (int k = i; k < j; ++k) {
      if (k > i) node.surface += ' ';
      node.surface += tokens[k].surface;
      token_node[k] = node.id;
    }
    node.spans.push_back({sentence.ref, i, j});
    out.nodes.push_back(std::move(node));
    i = j;
  }

  std::set<Edge> seen;
  for (int k = 0; k < n; ++k) {
    const Token& t = tokens[k];
    if (token_node[k] < 0 || t.head == kRootHead || token_node[t.head] < 0) continue;
    const Edge e{token_node[t.head], token_node[k]};
    if (e.src == e.dst || !seen.insert(e).second) continue;
    out.edges.emplace_back(e, t.deprel);
  }
  return out;
}

SemanticGraph BuildOriginalGraph(const AnnotatedDocument& doc,
                                 const InputLayout* layout) {
  SemanticGraph g;
  g.config.short_circuit = g.config.coordination = g.config.coreference =
      g.config.augment = false;
  int next_id = 0;
  for (const Sentence* s : doc.AllSentences()) {
    auto [keep_begin, keep_end] =
        layout ? layout->KeptRange(s->ref)
               : std::pair<int, int>{0, static_cast<int>(s->tokens.size())};
    SentenceGraph sg = MergePhrases(*s, next_id, keep_begin, keep_end);
    next_id += static_cast<int>(sg.nodes.size());
    for (PhraseNode& node : sg.nodes) {
      const int id = node.id;
      g.nodes.emplace(id, std::move(node));
    }
    for (auto& [edge, rel] : sg.edges) g.AddEdge(edge.src, edge.dst, rel);
  }
  return g;
}

SemanticGraph ShortCircuitPrepositions(SemanticGraph g) {
  std::vector<int> prepositions;
  for (const auto& [id, node] : g.nodes) {
    if (node.head_pos == Pos::kAdp || node.head_pos == Pos::kAux)
      prepositions.push_back(id);
  }
  // Removing bridged nodes one at a time reaches the same fixpoint in any
  // order: a -> b ends up present iff a path a -> ... -> b runs only through
  // preposition nodes.
  for (int p : prepositions) {
    const std::vector<int> in = g.InNeighbors(p);
    const std::vector<int> out = g.OutNeighbors(p);
    for (int a : in) {
      if (a == p) continue;
      for (int b : out) {
        if (b == p || b == a) continue;
        g.AddEdge(a, b, "shortcut");
      }
    }
    g.RemoveNode(p);
  }
  g.config.short_circuit = true;
  return g;
}

SemanticGraph ParallelCoordination(SemanticGraph g) {
  std::vector<int> conjunctions;
  for (const auto& [id, node] : g.nodes)
    if (node.head_pos == Pos::kCconj) conjunctions.push_back(id);
  for (int id : conjunctions) g.RemoveNode(id);

  const std::vector<int> ids = g.NodeIds();
  std::map<int, size_t> index;
  for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
  UnionFind sets(ids.size());
  std::vector<Edge> conj_edges;
  for (const Edge& e : g.edges) {
    auto rel = g.relations.find(e);
    if (rel != g.relations.end() && IsConjRelation(rel->second) && e.src != e.dst) {
      sets.Union(index[e.src], index[e.dst]);
      conj_edges.push_back(e);
    }
  }
  for (const Edge& e : conj_edges) g.RemoveEdge(e);

  std::map<size_t, std::vector<int>> members;
  for (size_t i = 0; i < ids.size(); ++i) members[sets.Find(i)].push_back(ids[i]);
  // Sets that touch each other keep feeding new neighbours into one another,
  // so share until nothing changes.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [root, group] : members) {
      if (group.size() < 2) continue;
      const std::set<int> in_set(group.begin(), group.end());
      std::set<int> ext_out, ext_in;
      for (int m : group) {
        for (int x : g.OutNeighbors(m))
          if (!in_set.count(x)) ext_out.insert(x);
        for (int x : g.InNeighbors(m))
          if (!in_set.count(x)) ext_in.insert(x);
      }
      const size_t before = g.edges.size();
      for (int m : group) {
        for (int x : ext_out) g.AddEdge(m, x, "coordination");
        for (int x : ext_in) g.AddEdge(x, m, "coordination");
      }
      changed = changed || g.edges.size() != before;
    }
  }
  g.config.coordination = true;
  return g;
}

SemanticGraph MergeCoreference(SemanticGraph g, std::span<const CorefChain> chains,
                               const AnnotatedDocument* doc) {
  std::set<int> assigned;
  std::map<int, int> rename;
  for (const CorefChain& chain : chains) {
    std::vector<int> matched;
    std::optional<int> canonical_node;
    for (const auto& [id, node] : g.nodes) {
      if (node.type == NodeType::kOther || node.type == NodeType::kSuper ||
          assigned.count(id)) {
        continue;
      }
      bool hit = false;
      for (size_t m = 0; m < chain.mentions.size(); ++m) {
        const Mention& mention = chain.mentions[m];
        const TokenSpan ms{mention.sentence, mention.begin, mention.end};
        const bool overlaps =
            std::any_of(node.spans.begin(), node.spans.end(),
                        [&](const TokenSpan& s) { return s.Overlaps(ms); });
        if (!overlaps) continue;
        hit = true;
        if (static_cast<int>(m) == chain.canonical && !canonical_node)
          canonical_node = id;
      }
      if (hit) matched.push_back(id);
    }
    assigned.insert(matched.begin(), matched.end());
    if (matched.size() < 2) continue;

    const int keep = matched.front();  // ids iterate ascending
    PhraseNode merged = g.nodes.at(keep);
    const PhraseNode& typed = g.nodes.at(canonical_node.value_or(keep));
    merged.type = typed.type;
    merged.head_pos = typed.head_pos;
    std::set<TokenSpan> spans;
    for (int id : matched) {
      const PhraseNode& n = g.nodes.at(id);
      spans.insert(n.spans.begin(), n.spans.end());
    }
    merged.spans.assign(spans.begin(), spans.end());

    const Mention& canon = chain.mentions.at(chain.canonical);
    const Sentence* s = doc ? doc->Find(canon.sentence) : nullptr;
    if (s && canon.end <= static_cast<int>(s->tokens.size())) {
      merged.surface.clear();
      for (int t = canon.begin; t < canon.end; ++t) {
        if (t > canon.begin) merged.surface += ' ';
        merged.surface += s->tokens[t].surface;
      }
    } else {
      merged.surface = typed.surface;
    }
    for (int id : matched) {
      rename[id] = keep;
      if (id != keep) g.nodes.erase(id);
    }
    g.nodes[keep] = std::move(merged);
  }

  if (!rename.empty()) {
    std::set<Edge> edges;
    std::map<Edge, std::string> relations;
    auto map_id = [&](int id) {
      auto it = rename.find(id);
      return it == rename.end() ? id : it->second;
    };
    for (const Edge& e : g.edges) {
      const Edge r{map_id(e.src), map_id(e.dst)};
      if (edges.insert(r).second) relations[r] = g.relations[e];
    }
    g.edges = std::move(edges);
    g.relations = std::move(relations);
  }
  g.config.coreference = true;
  return g;
}

SemanticGraph RemoveRedundantNodes(SemanticGraph g) {
  std::vector<int> redundant;
  // Without Step 1 the ADP/AUX nodes are still carrying a -> p -> b paths.
  const bool keep_prepositions = !g.config.short_circuit;
  for (const auto& [id, node] : g.nodes) {
    if (node.type != NodeType::kOther) continue;
    if (keep_prepositions && (node.head_pos == Pos::kAdp || node.head_pos == Pos::kAux))
      continue;
    redundant.push_back(id);
  }
  for (int id : redundant) g.RemoveNode(id);
  return g;
}

GroundGraph AugmentGraph(SemanticGraph g) {
  g = RemoveRedundantNodes(std::move(g));
  if (g.supernode) g.RemoveNode(*g.supernode);
  if (g.nodes.empty()) throw EmptyGraph();

  const std::vector<Edge> original(g.edges.begin(), g.edges.end());
  for (const Edge& e : original) g.AddEdge(e.dst, e.src, "reverse");

  const int super_id = g.nodes.rbegin()->first + 1;
  PhraseNode super;
  super.id = super_id;
  super.type = NodeType::kSuper;
  super.surface = "<super>";
  g.nodes.emplace(super_id, std::move(super));
  g.supernode = super_id;
  for (const auto& [id, node] : g.nodes) {
    if (id == super_id) continue;
    g.AddEdge(super_id, id, "super");
    g.AddEdge(id, super_id, "super");
  }
  for (const auto& [id, node] : g.nodes) g.AddEdge(id, id, "self");
  g.config.augment = true;
  return g;
}

SemanticGraph EnforceNodeCap(SemanticGraph g, size_t max_nodes,
                             const InputLayout& layout) {
  const size_t regular = g.nodes.size() - (g.supernode ? 1 : 0);
  if (regular <= max_nodes) return g;

  struct Candidate {
    bool context;
    int position;
    int id;
  };
  std::vector<Candidate> order;
  for (const auto& [id, node] : g.nodes) {
    if (node.type == NodeType::kSuper) continue;
    order.push_back({TouchesContext(node), EarliestPosition(node, layout), id});
  }
  // Eviction order: knowledge nodes from the input tail backwards, then context
  // nodes from the oldest forwards.
  std::sort(order.begin(), order.end(), [](const Candidate& a, const Candidate& b) {
    if (a.context != b.context) return !a.context;
    if (!a.context) {
      if (a.position != b.position) return a.position > b.position;
      return a.id > b.id;
    }
    if (a.position != b.position) return a.position < b.position;
    return a.id < b.id;
  });
  for (size_t k = 0; k < regular - max_nodes; ++k) g.RemoveNode(order[k].id);
  g.config.max_nodes = max_nodes;
  return g;
}

AlignmentMap ComputeAlignment(const SemanticGraph& g, const InputLayout& layout) {
  AlignmentMap map;
  for (const auto& [id, node] : g.nodes) {
    if (node.type == NodeType::kSuper) continue;
    std::set<int> positions;
    for (const TokenSpan& span : node.spans)
      for (int t = span.begin; t < span.end; ++t)
        if (auto p = layout.Position(span.sentence, t)) positions.insert(*p);
    map[id].assign(positions.begin(), positions.end());
  }
  return map;
}

GroundGraphResult BuildGroundGraph(const AnnotatedDocument& doc,
                                   const BuilderConfig& cfg) {
  GroundGraphResult result;
  result.layout = ComputeInputLayout(doc, cfg.max_context_len, cfg.max_knowledge_len);
  SemanticGraph g = BuildOriginalGraph(doc, &result.layout);
  if (cfg.short_circuit) g = ShortCircuitPrepositions(std::move(g));
  if (cfg.coordination) g = ParallelCoordination(std::move(g));
  if (cfg.coreference) g = MergeCoreference(std::move(g), doc.chains, &doc);
  g = RemoveRedundantNodes(std::move(g));
  if (g.nodes.empty()) throw EmptyGraph();
  g = EnforceNodeCap(std::move(g), cfg.max_nodes, result.layout);
  if (cfg.augment) g = AugmentGraph(std::move(g));
  g.config = cfg;
  result.alignment = ComputeAlignment(g, result.layout);
  result.graph = std::move(g);
  return result;
}

std::vector<int> NodeOrder(const SemanticGraph& g) {
  std::vector<int> order = g.NodeIds();
  if (g.supernode) {
    auto it = std::find(order.begin(), order.end(), *g.supernode);
    if (it != order.end()) std::rotate(it, it + 1, order.end());
  }
  return order;
}

Tensor AdjacencyMatrix(const SemanticGraph& g, std::span<const int> node_order) {
  std::map<int, size_t> index;
  for (size_t i = 0; i < node_order.size(); ++i) {
    if (!g.HasNode(node_order[i])) throw UnknownNode(node_order[i]);
    if (!index.emplace(node_order[i], i).second) {
      throw std::invalid_argument("node order repeats node " +
                                  std::to_string(node_order[i]));
    }
  }
  if (node_order.size() != g.nodes.size()) {
    throw std::invalid_argument("node order is not a permutation of the graph");
  }
  Tensor m = Tensor::Zeros(node_order.size(), node_order.size());
  for (const Edge& e : g.edges) m.at(index.at(e.src), index.at(e.dst)) = 1.0;
  return m;
}

GraphStats ComputeGraphStats(std::span<const GroundGraph> corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  double nodes = 0, edges = 0;
  for (const GroundGraph& g : corpus) {
    nodes += static_cast<double>(g.nodes.size());
    edges += static_cast<double>(g.edges.size());
  }
  const double n = static_cast<double>(corpus.size());
  return {nodes / n, edges / n};
}

}  // namespace g2
