#include "g2/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace g2 {

void ModelConfig::Validate() const {
  if (d_model == 0) throw InvalidConfig("d_model must be positive");
  if (heads == 0 || d_model % heads != 0) {
    throw InvalidConfig("d_model " + std::to_string(d_model) +
                        " is not divisible by heads " + std::to_string(heads));
  }
  if (!ablation.use_graph && !ablation.use_sequence) {
    throw InvalidConfig("use_graph and use_sequence cannot both be off");
  }
  if (vocab_size < static_cast<size_t>(kNumSpecialTokens)) {
    throw InvalidConfig("vocab_size smaller than the special-token set");
  }
  if (max_knowledge_len == 0) throw InvalidConfig("max_knowledge_len must be positive");
  if (max_target_len == 0) throw InvalidConfig("max_target_len must be positive");
  if (max_nodes == 0) throw InvalidConfig("max_nodes must be positive");
  if (!(init_std > 0) || !std::isfinite(init_std)) {
    throw InvalidConfig("init_std must be positive");
  }
}

ModelConfig ModelConfigFromKeyValues(const KeyValues& kv) {
  ModelConfig c;
  auto size = [&](const char* key, size_t fallback) {
    const long long v = kv.GetInt(key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(std::string("config key '") + key + "' is negative");
    return static_cast<size_t>(v);
  };
  c.vocab_size = size("vocab_size", c.vocab_size);
  c.d_model = size("d_model", c.d_model);
  c.heads = size("heads", c.heads);
  c.encoder_layers = size("encoder_layers", c.encoder_layers);
  c.graph_layers = size("graph_layers", c.graph_layers);
  c.decoder_layers = size("decoder_layers", c.decoder_layers);
  c.ff_hidden = size("ff_hidden", c.ff_hidden);
  c.max_context_len = size("max_context_len", c.max_context_len);
  c.max_knowledge_len = size("max_knowledge_len", c.max_knowledge_len);
  c.max_target_len = size("max_target_len", c.max_target_len);
  c.max_nodes = size("max_nodes", c.max_nodes);
  c.ablation.use_graph = kv.GetBool("use_graph", c.ablation.use_graph);
  c.ablation.use_sequence = kv.GetBool("use_sequence", c.ablation.use_sequence);
  c.ablation.full_connect = kv.GetBool("full_connect", c.ablation.full_connect);
  c.literal_mask = kv.GetBool("literal_mask", c.literal_mask);
  c.init_std = kv.GetDouble("init_std", c.init_std);
  return c;
}

void WriteModelConfig(const ModelConfig& c, KeyValues& kv) {
  auto put = [&](const char* key, auto v) {
    if constexpr (std::is_same_v<decltype(v), bool>) {
      kv.Set(key, v ? "true" : "false");
    } else if constexpr (std::is_floating_point_v<decltype(v)>) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      kv.Set(key, buf);
    } else {
      kv.Set(key, std::to_string(v));
    }
  };
  put("vocab_size", c.vocab_size);
  put("d_model", c.d_model);
  put("heads", c.heads);
  put("encoder_layers", c.encoder_layers);
  put("graph_layers", c.graph_layers);
  put("decoder_layers", c.decoder_layers);
  put("ff_hidden", c.ff_hidden);
  put("max_context_len", c.max_context_len);
  put("max_knowledge_len", c.max_knowledge_len);
  put("max_target_len", c.max_target_len);
  put("max_nodes", c.max_nodes);
  put("use_graph", c.ablation.use_graph);
  put("use_sequence", c.ablation.use_sequence);
  put("full_connect", c.ablation.full_connect);
  put("literal_mask", c.literal_mask);
  put("init_std", c.init_std);
}

namespace {

TransformerLayerParams AddTransformerLayer(ParamStore& store, Initializer& init,
                                           const std::string& name,
                                           const ModelConfig& cfg, ParamGroup group) {
  TransformerLayerParams p;
  p.self_attn = AddAttention(store, init, name + ".self_attn", cfg.d_model, group);
  p.attn_norm = AddLayerNorm(store, name + ".attn_norm", cfg.d_model, group);
  p.ff = AddFeedForward(store, init, name + ".ff", cfg.d_model,
                        cfg.FeedForwardWidth(), group);
  p.ff_norm = AddLayerNorm(store, name + ".ff_norm", cfg.d_model, group);
  return p;
}

void CopyLayer(ParamStore& store, const TransformerLayerParams& src,
               const TransformerLayerParams& dst) {
  CopyValues(store, src.self_attn, dst.self_attn);
  CopyValues(store, src.ff.expand, dst.ff.expand);
  CopyValues(store, src.ff.contract, dst.ff.contract);
  for (auto [s, d] : {std::pair{src.attn_norm, dst.attn_norm},
                      std::pair{src.ff_norm, dst.ff_norm}}) {
    store[d.gain].value = store[s.gain].value;
    store[d.bias].value = store[s.bias].value;
  }
}

Var Embed(Tape& tape, ModelParams& params, ParamId positions,
          std::span<const int> ids, const ModelConfig& cfg) {
  for (int id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= cfg.vocab_size) throw TokenOutOfVocab(id);
  }
  const Parameter& pos = params.store[positions];
  if (ids.size() > pos.value.rows()) {
    throw ShapeMismatch("sequence of " + std::to_string(ids.size()) +
                        " tokens exceeds " + std::to_string(pos.value.rows()) +
                        " positions");
  }
  std::vector<int> steps(ids.size());
  std::iota(steps.begin(), steps.end(), 0);
  return Add(GatherRows(tape.Leaf(params.store[params.token_embedding]), ids),
             GatherRows(tape.Leaf(params.store[positions]), steps));
}

Var TransformerLayer(Tape& tape, ParamStore& store, const TransformerLayerParams& p,
                     Var x, const Tensor* mask, size_t heads, MaskMode mode) {
  Var attended = MultiHeadAttention(tape, store, p.self_attn, x, x, mask, heads, mode);
  x = ApplyLayerNorm(tape, store, p.attn_norm, Add(x, attended));
  return ApplyLayerNorm(tape, store, p.ff_norm, Add(x, FeedForward(tape, store, p.ff, x)));
}

Var RunEncoder(Tape& tape, ModelParams& params, const ModelConfig& cfg,
               std::span<const int> ids) {
  Var x = Embed(tape, params, params.encoder_positions, ids, cfg);
  for (const TransformerLayerParams& layer : params.encoder) {
    x = TransformerLayer(tape, params.store, layer, x, nullptr, cfg.heads,
                         MaskMode::kAdditive);
  }
  return x;
}

}  // namespace

ModelParams InitModel(const ModelConfig& cfg, uint64_t seed) {
  cfg.Validate();
  constexpr auto kGraph = ParamGroup::kGraphRelevant;
  constexpr auto kOther = ParamGroup::kOther;
  const size_t d = cfg.d_model;
  Initializer init(seed, cfg.init_std);
  ModelParams m;
  ParamStore& s = m.store;

  m.token_embedding = s.Add("embed.tokens", init.Normal(cfg.vocab_size, d), kOther);
  m.encoder_positions = s.Add("embed.encoder_positions",
                              init.Normal(cfg.max_context_len + cfg.max_knowledge_len, d),
                              kOther);
  m.decoder_positions =
      s.Add("embed.decoder_positions", init.Normal(cfg.max_target_len, d), kOther);
  for (size_t l = 0; l < cfg.encoder_layers; ++l) {
    m.encoder.push_back(
        AddTransformerLayer(s, init, "encoder." + std::to_string(l), cfg, kOther));
  }
  for (size_t l = 0; l < cfg.graph_layers; ++l) {
    m.graph_encoder.push_back(
        AddTransformerLayer(s, init, "graph_encoder." + std::to_string(l), cfg, kGraph));
    if (!m.encoder.empty()) {
      CopyLayer(s, m.encoder[std::min(l, m.encoder.size() - 1)], m.graph_encoder.back());
    }
  }
  m.node_init = AddLinear(s, init, "node_init", 2 * d, d, kGraph, /*with_bias=*/false);
  m.supernode = s.Add("supernode", init.Normal(1, d), kGraph);
  for (size_t l = 0; l < cfg.decoder_layers; ++l) {
    const std::string name = "decoder." + std::to_string(l);
    DecoderLayerParams p;
    p.self_attn = AddAttention(s, init, name + ".self_attn", d, kOther);
    p.self_norm = AddLayerNorm(s, name + ".self_norm", d, kOther);
    p.context_attn = AddAttention(s, init, name + ".context_attn", d, kOther);
    p.context_norm = AddLayerNorm(s, name + ".context_norm", d, kOther);
    p.graph_attn = AddAttention(s, init, name + ".graph_attn", d, kGraph);
    CopyValues(s, p.context_attn, p.graph_attn);
    p.doc_attn = AddAttention(s, init, name + ".doc_attn", d, kOther);
    p.fusion = AddLinear(s, init, name + ".fusion", 2 * d, d, kGraph);
    p.knowledge_norm = AddLayerNorm(s, name + ".knowledge_norm", d, kOther);
    p.ff = AddFeedForward(s, init, name + ".ff", d, cfg.FeedForwardWidth(), kOther);
    p.ff_norm = AddLayerNorm(s, name + ".ff_norm", d, kOther);
    m.decoder.push_back(p);
  }
  m.output = AddLinear(s, init, "output", d, cfg.vocab_size, kOther);
  return m;
}

BuilderConfig EffectiveBuilderConfig(const BuilderConfig& builder,
                                     const ModelConfig& model) {
  BuilderConfig b = builder;
  b.max_nodes = model.max_nodes;
  b.max_context_len = model.max_context_len;
  b.max_knowledge_len = model.max_knowledge_len;
  return b;
}

ModelInput MakeModelInput(const AnnotatedDocument& doc, const Vocab& vocab,
                          const BuilderConfig& builder, const ModelConfig& model) {
  GroundGraphResult built = BuildGroundGraph(doc, EffectiveBuilderConfig(builder, model));
  ModelInput in;
  in.knowledge_ids.reserve(built.layout.size());
  for (const InputLayout::Slot& slot : built.layout.slots) {
    if (slot.separator) {
      in.knowledge_ids.push_back(kSepId);
    } else {
      const Sentence* s = doc.Find(slot.sentence);
      in.knowledge_ids.push_back(vocab.Id(Lowercase(s->tokens[slot.token].surface)));
    }
  }
  in.context_ids.assign(in.knowledge_ids.begin(),
                        in.knowledge_ids.begin() + built.layout.context_length);
  in.node_order = NodeOrder(built.graph);
  in.supernode = built.graph.supernode;
  in.adjacency = AdjacencyMatrix(built.graph, in.node_order);
  in.alignment = std::move(built.alignment);
  return in;
}

TrainExample MakeTrainExample(const AnnotatedDocument& doc, const Vocab& vocab,
                              const BuilderConfig& builder, const ModelConfig& model) {
  if (!doc.response) {
    throw std::invalid_argument("record " + doc.id + " has no response");
  }
  TrainExample ex;
  ex.id = doc.id;
  ex.input = MakeModelInput(doc, vocab, builder, model);
  std::vector<std::string> words = Tokenize(*doc.response);
  if (words.empty()) throw std::invalid_argument("record " + doc.id + " has an empty response");
  if (words.size() > model.max_target_len - 1) words.resize(model.max_target_len - 1);
  ex.target = vocab.Encode(words);
  return ex;
}

EncodedText EncodeText(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                       std::span<const int> knowledge_ids,
                       std::span<const int> context_ids) {
  if (knowledge_ids.empty()) throw ShapeMismatch("empty encoder input");
  EncodedText out;
  out.knowledge = RunEncoder(tape, params, cfg, knowledge_ids);
  if (context_ids.empty()) {
    const int sep[] = {kSepId};
    out.context = RunEncoder(tape, params, cfg, sep);
  } else {
    out.context = RunEncoder(tape, params, cfg, context_ids);
  }
  return out;
}

Var InitNodeReps(Tape& tape, ModelParams& params, Var knowledge,
                 const AlignmentMap& alignment, std::span<const int> node_order,
                 std::optional<int> supernode) {
  std::vector<Var> pooled;
  bool has_super = false;
  for (size_t i = 0; i < node_order.size(); ++i) {
    const int id = node_order[i];
    if (supernode && id == *supernode) {
      if (i + 1 != node_order.size()) {
        throw std::invalid_argument("supernode must be the last graph row");
      }
      has_super = true;
      continue;
    }
    auto it = alignment.find(id);
    if (it == alignment.end()) throw UnknownNode(id);
    if (it->second.empty()) throw EmptySpan();
    for (int p : it->second) {
      if (p < 0 || static_cast<size_t>(p) >= knowledge.rows()) {
        throw ShapeMismatch("alignment position " + std::to_string(p) +
                            " outside H_k of " + std::to_string(knowledge.rows()) +
                            " rows");
      }
    }
    Var rows = GatherRows(knowledge, it->second);
    const Var parts[] = {MeanRows(rows), MaxRows(rows)};
    pooled.push_back(ConcatCols(parts));
  }
  std::vector<Var> out;
  if (!pooled.empty()) {
    out.push_back(Linear(tape, params.store, params.node_init, ConcatRows(pooled)));
  }
  if (has_super) out.push_back(tape.Leaf(params.store[params.supernode]));
  if (out.empty()) throw EmptyGraph();
  return out.size() == 1 ? out[0] : ConcatRows(out);
}

Tensor GraphAttentionMask(const Tensor& adjacency, const ModelConfig& cfg) {
  if (adjacency.shape().size() != 2 || adjacency.rows() != adjacency.cols()) {
    throw ShapeMismatch("adjacency must be square, got " + adjacency.ShapeString());
  }
  const size_t n = adjacency.rows();
  if (cfg.ablation.full_connect) return Tensor::Filled(n, n, 1.0);
  Tensor mask = adjacency;
  for (size_t i = 0; i < n; ++i) mask.at(i, i) = 1.0;
  return mask;
}

Var GraphEncode(Tape& tape, ModelParams& params, const ModelConfig& cfg, Var nodes,
                const Tensor& adjacency) {
  if (adjacency.shape().size() != 2 || adjacency.rows() != nodes.rows()) {
    throw ShapeMismatch("adjacency " + adjacency.ShapeString() + " for " +
                        std::to_string(nodes.rows()) + " nodes");
  }
  const Tensor mask = GraphAttentionMask(adjacency, cfg);
  const MaskMode mode = cfg.literal_mask ? MaskMode::kLiteral : MaskMode::kAdditive;
  Var x = nodes;
  for (const TransformerLayerParams& layer : params.graph_encoder) {
    x = TransformerLayer(tape, params.store, layer, x, &mask, cfg.heads, mode);
  }
  return x;
}

EncodedState Encode(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                    const ModelInput& input) {
  EncodedText text = EncodeText(tape, params, cfg, input.knowledge_ids, input.context_ids);
  EncodedState state;
  state.knowledge = text.knowledge;
  state.context = text.context;
  if (cfg.ablation.use_graph) {
    Var h0 = InitNodeReps(tape, params, text.knowledge, input.alignment,
                          input.node_order, input.supernode);
    state.graph = GraphEncode(tape, params, cfg, h0, input.adjacency);
    state.has_graph = true;
  }
  return state;
}

Var DecoderLayer(Tape& tape, ModelParams& params, const ModelConfig& cfg, size_t layer,
                 Var x, const EncodedState& state) {
  const DecoderLayerParams& p = params.decoder.at(layer);
  ParamStore& s = params.store;
  const Tensor causal = CausalMask(x.rows());
  x = ApplyLayerNorm(tape, s, p.self_norm,
                     Add(x, MultiHeadAttention(tape, s, p.self_attn, x, x, &causal,
                                               cfg.heads)));
  Var c = ApplyLayerNorm(tape, s, p.context_norm,
                         Add(x, MultiHeadAttention(tape, s, p.context_attn, x,
                                                   state.context, nullptr, cfg.heads)));
  Var k;
  const bool graph = cfg.ablation.use_graph;
  const bool sequence = cfg.ablation.use_sequence;
  if (graph && !state.has_graph) throw std::invalid_argument("graph state missing");
  if (graph && sequence) {
    const Var parts[] = {
        MultiHeadAttention(tape, s, p.graph_attn, c, state.graph, nullptr, cfg.heads),
        MultiHeadAttention(tape, s, p.doc_attn, c, state.knowledge, nullptr, cfg.heads)};
    k = Linear(tape, s, p.fusion, ConcatCols(parts));
  } else if (graph) {
    k = MultiHeadAttention(tape, s, p.graph_attn, c, state.graph, nullptr, cfg.heads);
  } else {
    k = MultiHeadAttention(tape, s, p.doc_attn, c, state.knowledge, nullptr, cfg.heads);
  }
  Var h = ApplyLayerNorm(tape, s, p.knowledge_norm, Add(c, k));
  return ApplyLayerNorm(tape, s, p.ff_norm, Add(h, FeedForward(tape, s, p.ff, h)));
}

Var Decode(Tape& tape, ModelParams& params, const ModelConfig& cfg,
           const EncodedState& state, std::span<const int> decoder_input) {
  if (decoder_input.empty()) throw ShapeMismatch("empty decoder input");
  Var x = Embed(tape, params, params.decoder_positions, decoder_input, cfg);
  for (size_t l = 0; l < params.decoder.size(); ++l) {
    x = DecoderLayer(tape, params, cfg, l, x, state);
  }
  return Linear(tape, params.store, params.output, x);
}

Var Forward(Tape& tape, ModelParams& params, const ModelConfig& cfg,
            const TrainExample& example) {
  if (example.target.empty()) throw std::invalid_argument("empty target");
  std::vector<int> decoder_input;
  decoder_input.reserve(example.target.size() + 1);
  decoder_input.push_back(kBosId);
  decoder_input.insert(decoder_input.end(), example.target.begin(), example.target.end());
  EncodedState state = Encode(tape, params, cfg, example.input);
  return Decode(tape, params, cfg, state, decoder_input);
}

Var BatchLoss(Tape& tape, ModelParams& params, const ModelConfig& cfg,
              std::span<const TrainExample* const> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  size_t total = 0;
  for (const TrainExample* ex : batch) total += ex->target.size() + 1;
  Var loss;
  bool first = true;
  for (const TrainExample* ex : batch) {
    std::vector<int> gold(ex->target);
    gold.push_back(kEosId);
    std::unique_ptr<bool[]> mask(new bool[gold.size()]);
    std::fill(mask.get(), mask.get() + gold.size(), true);
    Var nll = NllLoss(Forward(tape, params, cfg, *ex), gold,
                      std::span<const bool>(mask.get(), gold.size()));
    Var weighted = Scale(nll, static_cast<double>(gold.size()) / total);
    loss = first ? weighted : Add(loss, weighted);
    first = false;
  }
  return loss;
}

namespace {

std::vector<double> LastRowLogProbs(const Tensor& logits) {
  const size_t r = logits.rows() - 1;
  std::span<const double> row = logits.row(r);
  const double mx = *std::max_element(row.begin(), row.end());
  double z = 0;
  for (double v : row) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  std::vector<double> out(row.size());
  for (size_t i = 0; i < row.size(); ++i) out[i] = row[i] - log_z;
  return out;
}

}  // namespace

std::vector<int> Generate(const ModelParams& params, const ModelConfig& cfg,
                          const ModelInput& input, const GenerateOptions& options) {
  const size_t limit = std::min(options.max_len, cfg.max_target_len);
  if (limit == 0) return {};
  // A non-recording tape never writes to the parameters it borrows.
  ModelParams& borrowed = const_cast<ModelParams&>(params);
  Tape tape(/*record_gradients=*/false);
  const EncodedState state = Encode(tape, borrowed, cfg, input);

  if (options.mode == DecodeMode::kGreedy) {
    std::vector<int> seq = {kBosId};
    while (seq.size() - 1 < limit) {
      const Tensor& logits = Decode(tape, borrowed, cfg, state, seq).value();
      std::span<const double> row = logits.row(logits.rows() - 1);
      const int next =
          static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      if (next == kEosId) break;
      seq.push_back(next);
    }
    return {seq.begin() + 1, seq.end()};
  }

  struct Hypothesis {
    std::vector<int> ids;
    double score = 0;
  };
  const size_t k = std::max<size_t>(1, options.beam_size);
  std::vector<Hypothesis> alive = {{{kBosId}, 0.0}};
  std::optional<Hypothesis> best_finished;
  for (size_t step = 0; step < limit && !alive.empty(); ++step) {
    std::vector<Hypothesis> candidates;
    for (const Hypothesis& h : alive) {
      const std::vector<double> logp =
          LastRowLogProbs(Decode(tape, borrowed, cfg, state, h.ids).value());
      for (size_t v = 0; v < logp.size(); ++v) {
        Hypothesis next{h.ids, h.score + logp[v]};
        next.ids.push_back(static_cast<int>(v));
        candidates.push_back(std::move(next));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hypothesis& a, const Hypothesis& b) {
                       return a.score > b.score;
                     });
    alive.clear();
    for (Hypothesis& c : candidates) {
      if (alive.size() == k) break;
      if (c.ids.back() == kEosId) {
        if (!best_finished || c.score > best_finished->score) {
          c.ids.pop_back();
          best_finished = std::move(c);
        }
        continue;
      }
      alive.push_back(std::move(c));
    }
    // Scores only decrease, so no live hypothesis can overtake a finished one.
    if (best_finished && (alive.empty() || alive.front().score <= best_finished->score)) {
      break;
    }
  }
  const Hypothesis* best = best_finished ? &*best_finished : nullptr;
  for (const Hypothesis& h : alive) {
    if (!best || h.score > best->score) best = &h;
  }
  return {best->ids.begin() + 1, best->ids.end()};
}

}  // namespace g2
