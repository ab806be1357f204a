#ifndef G2_GRAPH_H_
#define G2_GRAPH_H_

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "g2/annotation.h"
#include "g2/tensor.h"

namespace g2 {

// OTHER exists only between phrase merging and augmentation.
enum class NodeType { kN, kV, kAdj, kAdv, kSuper, kOther };

std::string_view NodeTypeName(NodeType type);
std::optional<NodeType> ParseNodeType(std::string_view name);
NodeType NodeTypeForPos(Pos pos);

struct TokenSpan {
  SentenceRef sentence;
  int begin = 0;  // [begin, end) within the sentence
  int end = 0;

  bool Overlaps(const TokenSpan& other) const {
    return sentence == other.sentence && begin < other.end && other.begin < end;
  }
  friend auto operator<=>(const TokenSpan&, const TokenSpan&) = default;
};

struct PhraseNode {
  int id = 0;
  NodeType type = NodeType::kOther;
  std::string surface;
  std::vector<TokenSpan> spans;  // sorted; empty only for the supernode
  Pos head_pos = Pos::kOther;

  friend bool operator==(const PhraseNode&, const PhraseNode&) = default;
};

struct Edge {
  int src = 0;
  int dst = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Which construction steps run (each can be switched off for ablations) and
// the input caps the graph is aligned against.
struct BuilderConfig {
  bool short_circuit = true;   // SP
  bool coordination = true;    // PC
  bool coreference = true;     // MC
  bool augment = true;         // GA
  size_t max_nodes = 512;
  size_t max_context_len = 128;
  size_t max_knowledge_len = 896;

  friend bool operator==(const BuilderConfig&, const BuilderConfig&) = default;
};

// Phrase-level semantic graph. Edges are untyped; `relations` keeps the label
// of the arc that first produced each edge for debugging and for locating
// conjunct arcs.
struct SemanticGraph {
  std::map<int, PhraseNode> nodes;
  std::set<Edge> edges;
  std::map<Edge, std::string> relations;
  std::optional<int> supernode;
  BuilderConfig config;

  bool HasNode(int id) const { return nodes.count(id) != 0; }
  bool HasEdge(int src, int dst) const { return edges.count({src, dst}) != 0; }
  void AddEdge(int src, int dst, std::string_view relation);
  void RemoveEdge(const Edge& e);
  void RemoveNode(int id);
  std::vector<int> OutNeighbors(int id) const;
  std::vector<int> InNeighbors(int id) const;
  std::vector<int> NodeIds() const;

  // Structural equality; debug relation labels are ignored.
  friend bool operator==(const SemanticGraph& a, const SemanticGraph& b) {
    return a.nodes == b.nodes && a.edges == b.edges &&
           a.supernode == b.supernode && a.config == b.config;
  }
};

using GroundGraph = SemanticGraph;

// Node id -> sorted token positions in the encoder input [C; SEP; d_0; ...].
using AlignmentMap = std::map<int, std::vector<int>>;

class EmptyGraph : public std::runtime_error {
 public:
  EmptyGraph() : std::runtime_error("no graph nodes survive construction") {}
};

class UnknownNode : public std::invalid_argument {
 public:
  explicit UnknownNode(int id)
      : std::invalid_argument("unknown graph node " + std::to_string(id)) {}
};

class EmptyCorpus : public std::invalid_argument {
 public:
  EmptyCorpus() : std::invalid_argument("empty corpus") {}
};

// Placement of the encoder input. Context keeps its most recent
// `max_context_len` tokens; then a separator, the first document, and a
// separator before every further document, all within `max_knowledge_len`.
struct InputLayout {
  struct Slot {
    bool separator = false;
    SentenceRef sentence;
    int token = 0;
  };
  struct Placement {
    int offset = 0;      // position of token `keep_begin`
    int keep_begin = 0;  // kept token range within the sentence
    int keep_end = 0;
  };

  std::vector<Slot> slots;
  std::map<SentenceRef, Placement> placements;
  size_t context_length = 0;

  size_t size() const { return slots.size(); }
  std::optional<int> Position(const SentenceRef& sentence, int token) const;
  // Kept [begin, end) range of a sentence; {0, 0} when fully truncated.
  std::pair<int, int> KeptRange(const SentenceRef& sentence) const;
};

InputLayout ComputeInputLayout(const AnnotatedDocument& doc,
                               size_t max_context_len, size_t max_knowledge_len);

struct SentenceGraph {
  std::vector<PhraseNode> nodes;
  std::vector<std::pair<Edge, std::string>> edges;  // with originating deprel
};

// Drops punctuation, merges compound/flat/fixed runs into phrases and turns
// dependency arcs (head -> dependent) into node edges. Ids start at
// `first_id`; tokens outside [keep_begin, keep_end) are treated as absent.
SentenceGraph MergePhrases(const Sentence& sentence, int first_id = 0);
SentenceGraph MergePhrases(const Sentence& sentence, int first_id,
                           int keep_begin, int keep_end);

// Disjoint union of per-sentence phrase graphs, context first. With a layout,
// truncated tokens are left out.
SemanticGraph BuildOriginalGraph(const AnnotatedDocument& doc,
                                 const InputLayout* layout = nullptr);

// Step 1. Removes ADP/AUX-headed nodes after bridging every a -> p -> b path
// with a -> b.
SemanticGraph ShortCircuitPrepositions(SemanticGraph g);
// Step 2. Drops CCONJ nodes, closes conj arcs into coordination sets and gives
// every member the union of the set's external edges.
SemanticGraph ParallelCoordination(SemanticGraph g);
// Step 3. Collapses the non-OTHER nodes overlapping each chain's mentions.
SemanticGraph MergeCoreference(SemanticGraph g, std::span<const CorefChain> chains,
                               const AnnotatedDocument* doc = nullptr);
// Drops OTHER nodes. ADP/AUX-headed nodes stay while Step 1 has not run
// (g.config.short_circuit false), so the w/o-SP variant keeps them.
SemanticGraph RemoveRedundantNodes(SemanticGraph g);
// Step 4. Removes OTHER nodes, then adds the supernode, reversed edges and
// self-loops. Throws EmptyGraph when nothing survives.
GroundGraph AugmentGraph(SemanticGraph g);

// Keeps at most `max_nodes` non-super nodes, evicting knowledge nodes from the
// tail of the input first and context nodes (oldest first) only as a last
// resort.
SemanticGraph EnforceNodeCap(SemanticGraph g, size_t max_nodes,
                             const InputLayout& layout);

AlignmentMap ComputeAlignment(const SemanticGraph& g, const InputLayout& layout);

struct GroundGraphResult {
  GroundGraph graph;
  AlignmentMap alignment;
  InputLayout layout;
};

GroundGraphResult BuildGroundGraph(const AnnotatedDocument& doc,
                                   const BuilderConfig& cfg);

// Node ids in ascending order (the supernode, when present, is last).
std::vector<int> NodeOrder(const SemanticGraph& g);
Tensor AdjacencyMatrix(const SemanticGraph& g, std::span<const int> node_order);

struct GraphStats {
  double avg_nodes = 0;
  double avg_edges = 0;
};
GraphStats ComputeGraphStats(std::span<const GroundGraph> corpus);

}  // namespace g2

#endif  // G2_GRAPH_H_
