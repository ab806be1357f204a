#ifndef G2_GRAPH_IO_H_
#define G2_GRAPH_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "g2/config.h"
#include "g2/graph.h"

namespace g2 {

// JSON schema: {nodes:[{id,type,surface,spans,head_pos}], edges:[[src,dst]],
// supernode:id|null, config:{sp,pc,mc,ga,max_nodes,...}}. Span entries are
// [sent_ref, start, end].
std::string ExportJson(const GroundGraph& g);
GroundGraph ImportJson(const std::string& text);

// Graphviz digraph; node shape encodes the phrase type.
std::string ExportDot(const GroundGraph& g, const std::string& name = "G");

// One line of `build-graph` output.
struct GraphRecord {
  std::string id;
  GroundGraph graph;
  AlignmentMap alignment;

  friend bool operator==(const GraphRecord&, const GraphRecord&) = default;
};

std::string SerializeGraphRecord(const GraphRecord& record);
GraphRecord ParseGraphRecord(const std::string& line);
std::vector<GraphRecord> ReadGraphRecords(const std::filesystem::path& path);

// Plain-text key = value configuration (keys sp, pc, mc, ga, max_nodes,
// max_context_len, max_knowledge_len). Unknown keys are ignored here.
BuilderConfig BuilderConfigFromFile(const std::filesystem::path& path);
BuilderConfig BuilderConfigFromKeyValues(const KeyValues& kv);
KeyValues BuilderConfigToKeyValues(const BuilderConfig& cfg);

}  // namespace g2

#endif  // G2_GRAPH_IO_H_
