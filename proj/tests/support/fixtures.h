#ifndef G2_TESTS_SUPPORT_FIXTURES_H_
#define G2_TESTS_SUPPORT_FIXTURES_H_

#include <filesystem>
#include <random>
#include <vector>

#include "g2/annotation.h"
#include "g2/graph_io.h"
#include "g2/model.h"
#include "g2/training.h"

namespace g2::testing {

std::filesystem::path DataPath(const std::string& name);
std::filesystem::path TempPath(const std::string& name);

// "I love spreading cream cheese and peanut butter on bagels ." with the
// knowledge sentence "Peanut butter is often served on toasted bagels ." and
// one chain linking both "peanut butter" mentions.
AnnotatedDocument Fig2Document();

// The committed expected build-graph record for Fig2Document().
GraphRecord ReadGolden();

std::vector<AnnotatedDocument> ToyCorpus();

struct RandomDocOptions {
  int max_context_sentences = 2;
  int max_documents = 3;
  int max_sentences_per_document = 2;
  int max_sentence_length = 9;
  int max_chains = 3;
};

// Valid annotation with random dependency trees, POS tags and coreference
// chains. Relation labels favour the ones graph construction reacts to.
AnnotatedDocument RandomDocument(std::mt19937_64& rng, const RandomDocOptions& options = {});

// The configuration the toy overfitting run uses (d_model 32, 2/1/2 layers).
ModelConfig ToyModelConfig(size_t vocab_size);
TrainConfig ToyTrainConfig();

}  // namespace g2::testing

#endif  // G2_TESTS_SUPPORT_FIXTURES_H_
