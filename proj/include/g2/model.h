#ifndef G2_MODEL_H_
#define G2_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2/autograd.h"
#include "g2/config.h"
#include "g2/graph.h"
#include "g2/nn.h"
#include "g2/vocab.h"

namespace g2 {

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AblationFlags {
  bool use_graph = true;     // false: decoder uses document attention only
  bool use_sequence = true;  // false: decoder uses graph attention only
  bool full_connect = false; // graph encoder attends over all node pairs

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct ModelConfig {
  size_t vocab_size = kNumSpecialTokens;
  size_t d_model = 32;
  size_t heads = 2;
  size_t encoder_layers = 2;
  size_t graph_layers = 1;
  size_t decoder_layers = 2;
  size_t ff_hidden = 0;  // 0 means 4 * d_model
  size_t max_context_len = 128;
  size_t max_knowledge_len = 896;
  size_t max_target_len = 64;
  size_t max_nodes = 512;
  AblationFlags ablation;
  // Graph-encoder mask applied multiplicatively to the attention logits
  // instead of as an additive -inf mask.
  bool literal_mask = false;
  double init_std = 0.2;  // normal(0, init_std) for every weight matrix

  size_t FeedForwardWidth() const { return ff_hidden ? ff_hidden : 4 * d_model; }
  void Validate() const;  // throws InvalidConfig

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Reads the keys named after the fields; vocab_size is left to the caller.
ModelConfig ModelConfigFromKeyValues(const KeyValues& kv);
void WriteModelConfig(const ModelConfig& cfg, KeyValues& kv);

struct TransformerLayerParams {
  AttentionParams self_attn;
  LayerNormParams attn_norm;
  FeedForwardParams ff;
  LayerNormParams ff_norm;
};

struct DecoderLayerParams {
  AttentionParams self_attn;
  LayerNormParams self_norm;
  AttentionParams context_attn;
  LayerNormParams context_norm;
  AttentionParams graph_attn;  // dynamic graph attention
  AttentionParams doc_attn;    // attention over knowledge tokens
  LinearParams fusion;         // [g; d] -> k
  LayerNormParams knowledge_norm;
  FeedForwardParams ff;
  LayerNormParams ff_norm;
};

struct ModelParams {
  ParamStore store;
  ParamId token_embedding = 0;
  ParamId encoder_positions = 0;
  ParamId decoder_positions = 0;
  std::vector<TransformerLayerParams> encoder;
  std::vector<TransformerLayerParams> graph_encoder;
  LinearParams node_init;  // 2d -> d, no bias
  ParamId supernode = 0;
  std::vector<DecoderLayerParams> decoder;
  LinearParams output;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.store == b.store;
  }
};

// Graph-encoder layers start as copies of the text-encoder layers (extra graph
// layers reuse the last encoder layer) and each graph-attention block as a copy
// of the same layer's context attention.
ModelParams InitModel(const ModelConfig& cfg, uint64_t seed);

// Everything the model sees for one example except the target.
struct ModelInput {
  std::vector<int> knowledge_ids;  // [C; SEP; d_0; SEP; d_1 ...]
  std::vector<int> context_ids;    // C alone
  std::vector<int> node_order;     // graph node id of each H_g row
  std::optional<int> supernode;
  AlignmentMap alignment;
  Tensor adjacency;                // |V| x |V| in node_order
};

struct TrainExample {
  std::string id;
  ModelInput input;
  std::vector<int> target;  // y_1..y_n without BOS/EOS
};

// Builds the graph with `builder` (caps taken from `model`) and maps tokens
// through `vocab`. The response is truncated to max_target_len - 1 words so
// that EOS fits. Throws EmptyGraph when no node survives.
ModelInput MakeModelInput(const AnnotatedDocument& doc, const Vocab& vocab,
                          const BuilderConfig& builder, const ModelConfig& model);
TrainExample MakeTrainExample(const AnnotatedDocument& doc, const Vocab& vocab,
                              const BuilderConfig& builder, const ModelConfig& model);
BuilderConfig EffectiveBuilderConfig(const BuilderConfig& builder,
                                     const ModelConfig& model);

struct EncodedText {
  Var knowledge;  // H_k
  Var context;    // H_c
};

struct EncodedState {
  Var knowledge;  // H_k
  Var context;    // H_c
  Var graph;      // H_g; unset (no rows) when use_graph is off
  bool has_graph = false;
};

// Runs the text encoder over the concatenated input and over the context
// alone. An empty context is encoded as a single separator.
EncodedText EncodeText(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                       std::span<const int> knowledge_ids,
                       std::span<const int> context_ids);

// Row i pools the H_k rows aligned with node_order[i] (mean and max,
// concatenated) and projects with W^G; the supernode row is its embedding.
Var InitNodeReps(Tape& tape, ModelParams& params, Var knowledge,
                 const AlignmentMap& alignment, std::span<const int> node_order,
                 std::optional<int> supernode);

// The mask actually used by the graph encoder: all ones under full_connect,
// otherwise adjacency with the diagonal set.
Tensor GraphAttentionMask(const Tensor& adjacency, const ModelConfig& cfg);

Var GraphEncode(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                Var nodes, const Tensor& adjacency);

EncodedState Encode(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                    const ModelInput& input);

// One decoder block over the target representations `x`.
Var DecoderLayer(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                 size_t layer, Var x, const EncodedState& state);

// Logits (len x vocab) for decoder input ids (BOS-prefixed).
Var Decode(Tape& tape, ModelParams& params, const ModelConfig& cfg,
           const EncodedState& state, std::span<const int> decoder_input);

// Full forward pass with teacher forcing: logits for [BOS y_1 .. y_n].
Var Forward(Tape& tape, ModelParams& params, const ModelConfig& cfg,
            const TrainExample& example);

// Mean token NLL over a batch (every target position of every example,
// EOS included, weighs the same).
Var BatchLoss(Tape& tape, ModelParams& params, const ModelConfig& cfg,
              std::span<const TrainExample* const> batch);

enum class DecodeMode { kGreedy, kBeam };

struct GenerateOptions {
  size_t max_len = 64;
  DecodeMode mode = DecodeMode::kGreedy;
  size_t beam_size = 4;
};

// Autoregressive decode from BOS. Returns the ids before EOS; at most
// min(max_len, max_target_len) tokens.
std::vector<int> Generate(const ModelParams& params, const ModelConfig& cfg,
                          const ModelInput& input, const GenerateOptions& options);

}  // namespace g2

#endif  // G2_MODEL_H_
