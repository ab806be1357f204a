#ifndef G2_GRAD_CHECK_H_
#define G2_GRAD_CHECK_H_

#include <cstdint>
#include <vector>

#include "g2/model.h"
#include "g2/nn.h"

namespace g2 {

// A tiny model (one layer per stack) plus a two-example batch whose graphs
// have three nodes (two phrases and a supernode). The examples differ in
// whether the two phrases are connected.
struct GradCheckFixture {
  ModelConfig config;
  ModelParams params;
  std::vector<TrainExample> batch;
};

GradCheckFixture MakeGradCheckFixture(size_t d_model, size_t heads, uint64_t seed);

// Finite-difference check of the batch loss over every model parameter.
GradCheckReport CheckModelGradients(GradCheckFixture& fixture, double epsilon);

}  // namespace g2

#endif  // G2_GRAD_CHECK_H_
