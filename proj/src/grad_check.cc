#include "g2/grad_check.h"

#include <random>

namespace g2 {

GradCheckFixture MakeGradCheckFixture(size_t d_model, size_t heads, uint64_t seed) {
  GradCheckFixture f;
  ModelConfig& c = f.config;
  c.vocab_size = 12;
  c.d_model = d_model;
  c.heads = heads;
  c.encoder_layers = 1;
  c.graph_layers = 1;
  c.decoder_layers = 1;
  c.ff_hidden = 2 * d_model;
  c.max_context_len = 4;
  c.max_knowledge_len = 8;
  c.max_target_len = 6;
  c.max_nodes = 8;
  c.init_std = 0.5;
  f.params = InitModel(c, seed);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> word(kNumSpecialTokens,
                                          static_cast<int>(c.vocab_size) - 1);
  for (int e = 0; e < 2; ++e) {
    TrainExample ex;
    ex.id = "grad-check-" + std::to_string(e);
    ModelInput& in = ex.input;
    // context (3 tokens), SEP, document (4 tokens)
    in.knowledge_ids = {word(rng), word(rng), word(rng), kSepId,
                        word(rng), word(rng), word(rng), word(rng)};
    in.context_ids.assign(in.knowledge_ids.begin(), in.knowledge_ids.begin() + 3);
    in.node_order = {0, 1, 2};
    in.supernode = 2;
    in.alignment = {{0, {0, 1}}, {1, {1, 5, 6}}};
    in.adjacency = Tensor::Filled(3, 3, 1.0);
    if (e == 1) {
      in.adjacency.at(0, 1) = 0;
      in.adjacency.at(1, 0) = 0;
    }
    ex.target = {word(rng), word(rng), word(rng)};
    f.batch.push_back(std::move(ex));
  }
  return f;
}

GradCheckReport CheckModelGradients(GradCheckFixture& fixture, double epsilon) {
  std::vector<const TrainExample*> batch;
  for (const TrainExample& ex : fixture.batch) batch.push_back(&ex);
  std::vector<Parameter*> params;
  for (Parameter& p : fixture.params.store.all()) params.push_back(&p);
  return FiniteDiffCheck(
      [&](Tape& tape) { return BatchLoss(tape, fixture.params, fixture.config, batch); },
      params, epsilon);
}

}  // namespace g2
