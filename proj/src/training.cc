#include "g2/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <thread>

#include "json.hpp"

namespace g2 {

void TrainConfig::Validate() const {
  if (!(lr_graph >= 0) || !(lr_other >= 0)) {
    throw InvalidConfig("learning rates must be non-negative");
  }
  if (batch_size == 0) throw InvalidConfig("batch_size must be at least 1");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw InvalidConfig("betas must lie in [0, 1)");
  }
  if (!(epsilon > 0)) throw InvalidConfig("epsilon must be positive");
  if (!(weight_decay >= 0)) throw InvalidConfig("weight_decay must be non-negative");
}

TrainConfig TrainConfigFromKeyValues(const KeyValues& kv) {
  TrainConfig c;
  auto count = [&](const char* key, size_t fallback) {
    const long long v = kv.GetInt(key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(std::string("config key '") + key + "' is negative");
    return static_cast<size_t>(v);
  };
  c.lr_graph = kv.GetDouble("lr_graph", c.lr_graph);
  c.lr_other = kv.GetDouble("lr_other", c.lr_other);
  c.batch_size = count("batch_size", c.batch_size);
  c.epochs = count("epochs", c.epochs);
  c.max_steps = count("max_steps", c.max_steps);
  c.seed = count("seed", c.seed);
  c.beta1 = kv.GetDouble("beta1", c.beta1);
  c.beta2 = kv.GetDouble("beta2", c.beta2);
  c.epsilon = kv.GetDouble("epsilon", c.epsilon);
  c.weight_decay = kv.GetDouble("weight_decay", c.weight_decay);
  c.clip_norm = kv.GetDouble("clip_norm", c.clip_norm);
  c.checkpoint_every = count("checkpoint_every", c.checkpoint_every);
  return c;
}

void WriteTrainConfig(const TrainConfig& c, KeyValues& kv) {
  auto real = [&](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    kv.Set(key, buf);
  };
  real("lr_graph", c.lr_graph);
  real("lr_other", c.lr_other);
  kv.Set("batch_size", std::to_string(c.batch_size));
  kv.Set("epochs", std::to_string(c.epochs));
  kv.Set("max_steps", std::to_string(c.max_steps));
  kv.Set("seed", std::to_string(c.seed));
  real("beta1", c.beta1);
  real("beta2", c.beta2);
  real("epsilon", c.epsilon);
  real("weight_decay", c.weight_decay);
  real("clip_norm", c.clip_norm);
  kv.Set("checkpoint_every", std::to_string(c.checkpoint_every));
}

AdamW::AdamW(const ParamStore& store, const TrainConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  for (const Parameter& p : store.all()) {
    m_.emplace_back(p.value.shape());
    v_.emplace_back(p.value.shape());
  }
}

double AdamW::Step(ParamStore& store) {
  if (store.size() != m_.size()) throw ShapeMismatch("optimizer built for another model");
  double sq = 0;
  for (const Parameter& p : store.all())
    for (double g : p.grad.data()) sq += g * g;
  const double norm = std::sqrt(sq);
  const double clip = cfg_.clip_norm > 0 && norm > cfg_.clip_norm
                          ? cfg_.clip_norm / (norm + 1e-6) : 1.0;
  ++steps_;
  const double bc1 = 1 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (size_t i = 0; i < store.size(); ++i) {
    Parameter& p = store[i];
    const double lr = p.group == ParamGroup::kGraphRelevant ? cfg_.lr_graph : cfg_.lr_other;
    std::vector<double>& w = p.value.data();
    const std::vector<double>& grad = p.grad.data();
    std::vector<double>& m = m_[i].data();
    std::vector<double>& v = v_[i].data();
    for (size_t j = 0; j < w.size(); ++j) {
      const double g = grad.empty() ? 0.0 : grad[j] * clip;
      w[j] *= 1 - lr * cfg_.weight_decay;
      m[j] = cfg_.beta1 * m[j] + (1 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1 - cfg_.beta2) * g * g;
      w[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.epsilon);
    }
  }
  return norm;
}

StepResult TrainStep(ModelParams& params, const ModelConfig& cfg, AdamW& optimizer,
                     std::span<const TrainExample* const> batch) {
  params.store.ZeroGrad();
  StepResult result;
  {
    Tape tape;
    Var loss = BatchLoss(tape, params, cfg, batch);
    result.loss = loss.value()[0];
    if (!std::isfinite(result.loss)) {
      std::string ids;
      for (const TrainExample* ex : batch) ids += (ids.empty() ? "" : ",") + ex->id;
      throw NonFiniteLoss("step " + std::to_string(optimizer.steps() + 1) +
                          ", batch [" + ids + "]");
    }
    tape.Backward(loss);
  }
  for (const Parameter& p : params.store.all()) {
    if (!p.grad.AllFinite()) {
      throw NonFiniteLoss("gradient of " + p.name + " at step " +
                          std::to_string(optimizer.steps() + 1));
    }
  }
  result.grad_norm = optimizer.Step(params.store);
  return result;
}

std::string SerializeStepRecord(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["loss"] = r.loss;
  j["lr_graph"] = r.lr_graph;
  j["lr_other"] = r.lr_other;
  return j.dump();
}

size_t PlannedSteps(size_t corpus_size, const TrainConfig& cfg) {
  if (corpus_size == 0 || cfg.batch_size == 0) return 0;
  const size_t per_epoch = (corpus_size + cfg.batch_size - 1) / cfg.batch_size;
  const size_t total = per_epoch * cfg.epochs;
  return cfg.max_steps ? std::min(total, cfg.max_steps) : total;
}

TrainResult TrainLoop(std::span<const TrainExample> corpus, const TrainConfig& cfg,
                      const ModelConfig& model_cfg, ModelParams params,
                      const TrainHooks& hooks) {
  if (corpus.empty()) throw EmptyCorpus();
  cfg.Validate();
  model_cfg.Validate();
  const size_t planned = PlannedSteps(corpus.size(), cfg);
  AdamW optimizer(params.store, cfg);
  std::mt19937_64 rng(cfg.seed);
  std::vector<size_t> order(corpus.size());
  TrainResult result;
  size_t step = 0;
  while (step < planned) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t begin = 0; begin < order.size() && step < planned;
         begin += cfg.batch_size) {
      const size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<const TrainExample*> batch;
      for (size_t i = begin; i < end; ++i) batch.push_back(&corpus[order[i]]);
      const StepResult r = TrainStep(params, model_cfg, optimizer, batch);
      ++step;
      result.losses.push_back(r.loss);
      if (hooks.on_step) hooks.on_step({step, r.loss, cfg.lr_graph, cfg.lr_other});
      if (hooks.on_checkpoint && cfg.checkpoint_every && step % cfg.checkpoint_every == 0 &&
          step != planned) {
        hooks.on_checkpoint(params, step);
      }
    }
  }
  if (hooks.on_checkpoint) hooks.on_checkpoint(params, step);
  result.steps = step;
  result.params = std::move(params);
  return result;
}

std::vector<std::vector<std::string>> GenerateAll(const ModelParams& params,
                                                  const ModelConfig& cfg,
                                                  std::span<const ModelInput> inputs,
                                                  const Vocab& vocab,
                                                  const GenerateOptions& options) {
  std::vector<std::vector<std::string>> out(inputs.size());
  const size_t workers = std::clamp<size_t>(std::thread::hardware_concurrency(), 1, 8);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (size_t i = w; i < inputs.size(); i += workers) {
          out[i] = vocab.Decode(Generate(params, cfg, inputs[i], options));
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<AblationVariant> AblationVariants(const BuilderConfig& builder,
                                              const ModelConfig& model) {
  std::vector<AblationVariant> v(8, {"", builder, model});
  v[0].name = "full";
  v[1].name = "w/o SP";
  v[1].builder.short_circuit = false;
  v[2].name = "w/o PC";
  v[2].builder.coordination = false;
  v[3].name = "w/o MC";
  v[3].builder.coreference = false;
  v[4].name = "w/o GA";
  v[4].builder.augment = false;
  v[5].name = "w/o structure";
  v[5].model.ablation.full_connect = true;
  v[6].name = "w/o sequence";
  v[6].model.ablation.use_sequence = false;
  v[7].name = "w/o graph";
  v[7].model.ablation.use_graph = false;
  return v;
}

std::vector<AblationRow> RunAblationSuite(std::span<const AnnotatedDocument> corpus,
                                          const Vocab& vocab,
                                          const BuilderConfig& builder,
                                          const ModelConfig& model,
                                          const TrainConfig& train) {
  if (corpus.empty()) throw EmptyCorpus();
  std::vector<AblationRow> rows;
  for (const AblationVariant& variant : AblationVariants(builder, model)) {
    std::vector<TrainExample> examples;
    for (const AnnotatedDocument& doc : corpus) {
      try {
        examples.push_back(MakeTrainExample(doc, vocab, variant.builder, variant.model));
      } catch (const EmptyGraph&) {
      }
    }
    if (examples.empty()) throw EmptyCorpus();
    TrainResult trained =
        TrainLoop(examples, train, variant.model, InitModel(variant.model, train.seed));
    std::vector<ModelInput> inputs;
    for (const TrainExample& ex : examples) inputs.push_back(ex.input);
    GenerateOptions options;
    options.max_len = variant.model.max_target_len;
    const auto hyps = GenerateAll(trained.params, variant.model, inputs, vocab, options);
    std::vector<EvalPair> pairs;
    for (size_t i = 0; i < examples.size(); ++i)
      pairs.push_back({hyps[i], vocab.Decode(examples[i].target)});
    rows.push_back({variant.name, Evaluate(pairs),
                    trained.losses.empty() ? 0.0 : trained.losses.back()});
  }
  return rows;
}

std::string FormatAblationTable(std::span<const AblationRow> rows) {
  size_t width = 7;
  for (const AblationRow& r : rows) width = std::max(width, r.name.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  std::string out = pad("variant") + "   BLEU-2   BLEU-4  ROUGE-1  ROUGE-2     loss\n";
  for (const AblationRow& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, " %8.4f %8.4f %8.4f %8.4f %8.4f\n", r.scores.bleu[1],
                  r.scores.bleu[3], r.scores.rouge1, r.scores.rouge2, r.final_loss);
    out += pad(r.name) + buf;
  }
  return out;
}

}  // namespace g2
