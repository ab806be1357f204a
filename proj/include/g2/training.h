#ifndef G2_TRAINING_H_
#define G2_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "g2/config.h"
#include "g2/graph.h"
#include "g2/metrics.h"
#include "g2/model.h"
#include "g2/vocab.h"

namespace g2 {

struct TrainConfig {
  double lr_graph = 5e-4;
  double lr_other = 5e-5;
  size_t batch_size = 16;
  size_t epochs = 25;
  size_t max_steps = 0;  // 0: no cap beyond the epoch budget
  uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 1.0;  // <= 0 disables clipping
  size_t checkpoint_every = 0;  // steps; 0 saves only at the end

  void Validate() const;  // throws InvalidConfig

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

TrainConfig TrainConfigFromKeyValues(const KeyValues& kv);
void WriteTrainConfig(const TrainConfig& cfg, KeyValues& kv);

// Adam moments with decoupled weight decay. Each parameter uses the learning
// rate of its group.
class AdamW {
 public:
  AdamW(const ParamStore& store, const TrainConfig& cfg);

  // Clips the global gradient norm, then updates every parameter in place.
  // Returns the gradient norm before clipping.
  double Step(ParamStore& store);
  size_t steps() const { return steps_; }

 private:
  TrainConfig cfg_;
  std::vector<Tensor> m_, v_;
  size_t steps_ = 0;
};

struct StepResult {
  double loss = 0;
  double grad_norm = 0;
};

// Forward, loss, backward and one optimizer update. Throws NonFiniteLoss
// (parameters untouched) when the loss or any gradient is not finite.
StepResult TrainStep(ModelParams& params, const ModelConfig& cfg, AdamW& optimizer,
                     std::span<const TrainExample* const> batch);

struct StepRecord {
  size_t step = 0;
  double loss = 0;
  double lr_graph = 0;
  double lr_other = 0;
};

std::string SerializeStepRecord(const StepRecord& r);

struct TrainHooks {
  // Called after every step.
  std::function<void(const StepRecord&)> on_step;
  // Called every checkpoint_every steps and once at the end.
  std::function<void(const ModelParams&, size_t step)> on_checkpoint;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> losses;  // one per step
  size_t steps = 0;
};

size_t PlannedSteps(size_t corpus_size, const TrainConfig& cfg);

// Seeded epoch shuffling over `corpus`; the last batch of an epoch may be
// short. Throws EmptyCorpus.
TrainResult TrainLoop(std::span<const TrainExample> corpus, const TrainConfig& cfg,
                      const ModelConfig& model_cfg, ModelParams params,
                      const TrainHooks& hooks = {});

// Greedy decode of every example (parallel over examples) turned into words.
std::vector<std::vector<std::string>> GenerateAll(const ModelParams& params,
                                                  const ModelConfig& cfg,
                                                  std::span<const ModelInput> inputs,
                                                  const Vocab& vocab,
                                                  const GenerateOptions& options);

struct AblationVariant {
  std::string name;
  BuilderConfig builder;
  ModelConfig model;
};

// full, w/o SP, w/o PC, w/o MC, w/o GA, w/o structure, w/o sequence,
// w/o graph. Each differs from the base in one toggle.
std::vector<AblationVariant> AblationVariants(const BuilderConfig& builder,
                                              const ModelConfig& model);

struct AblationRow {
  std::string name;
  EvalScores scores;
  double final_loss = 0;
};

// Trains and evaluates every variant on `corpus` (greedy decode against the
// corpus responses). Records whose graph comes out empty under a variant are
// skipped for that variant.
std::vector<AblationRow> RunAblationSuite(std::span<const AnnotatedDocument> corpus,
                                          const Vocab& vocab,
                                          const BuilderConfig& builder,
                                          const ModelConfig& model,
                                          const TrainConfig& train);

std::string FormatAblationTable(std::span<const AblationRow> rows);

}  // namespace g2

#endif  // G2_TRAINING_H_
