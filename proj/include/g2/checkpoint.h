#ifndef G2_CHECKPOINT_H_
#define G2_CHECKPOINT_H_

#include <filesystem>
#include <stdexcept>
#include <string>

#include "g2/graph.h"
#include "g2/model.h"
#include "g2/training.h"
#include "g2/vocab.h"

namespace g2 {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig model;
  BuilderConfig builder;
  TrainConfig train;
  Vocab vocab;
  ModelParams params;
  size_t step = 0;
};

// Structured text: a "G2-CKPT 1" line, key = value sections for the
// configurations, the vocabulary, then every parameter as
// "param <name> <group> <rows> <cols>" followed by its values (%.17g, so the
// round trip is exact).
std::string SerializeCheckpoint(const Checkpoint& ckpt);
// Rebuilds the model from the stored config and checks every tensor against
// it; throws CheckpointError on any mismatch.
Checkpoint ParseCheckpoint(const std::string& text);

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace g2

#endif  // G2_CHECKPOINT_H_
