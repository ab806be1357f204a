#include "fixtures.h"

#include <unistd.h>

namespace g2::testing {

std::filesystem::path DataPath(const std::string& name) {
  return std::filesystem::path(G2_TEST_DATA_DIR) / name;
}

std::filesystem::path TempPath(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("g2-tests-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

AnnotatedDocument Fig2Document() {
  return ParseAnnotationFile(DataPath("fig2_annotation.jsonl")).at(0);
}

GraphRecord ReadGolden() {
  return ReadGraphRecords(DataPath("fig2_graph.golden.jsonl")).at(0);
}

std::vector<AnnotatedDocument> ToyCorpus() {
  return ParseAnnotationFile(DataPath("toy_corpus.jsonl"));
}

namespace {

constexpr Pos kAllPos[] = {Pos::kNoun, Pos::kPropn, Pos::kVerb, Pos::kAdj,
                           Pos::kAdv, Pos::kAdp, Pos::kAux, Pos::kCconj,
                           Pos::kPron, Pos::kDet, Pos::kPunct, Pos::kOther};

const char* const kWords[] = {"alpha", "beta", "gamma", "delta", "eps", "zeta",
                              "eta", "theta", "iota", "kappa", "lambda", "mu"};

Sentence RandomSentence(std::mt19937_64& rng, const SentenceRef& ref, int max_len) {
  std::uniform_int_distribution<int> len_dist(1, max_len);
  const int n = len_dist(rng);
  std::uniform_int_distribution<int> pos_dist(0, std::size(kAllPos) - 1);
  std::uniform_int_distribution<int> word_dist(0, std::size(kWords) - 1);
  std::uniform_real_distribution<double> u(0, 1);
  Sentence s;
  s.ref = ref;
  const int root = std::uniform_int_distribution<int>(0, n - 1)(rng);
  // Attach tokens in random order to any already attached token.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::iter_swap(order.begin(), std::find(order.begin(), order.end(), root));
  std::vector<int> head(n, kRootHead);
  for (int k = 1; k < n; ++k) {
    const int t = order[k];
    // Prefer adjacent heads so compounds and short arcs are common.
    if (u(rng) < 0.5) {
      int best = order[0];
      for (int j = 0; j < k; ++j)
        if (std::abs(order[j] - t) < std::abs(best - t)) best = order[j];
      head[t] = best;
    } else {
      head[t] = order[std::uniform_int_distribution<int>(0, k - 1)(rng)];
    }
  }
  for (int i = 0; i < n; ++i) {
    Token t;
    t.index = i;
    t.pos = kAllPos[pos_dist(rng)];
    t.surface = t.pos == Pos::kPunct ? "." : kWords[word_dist(rng)];
    t.head = head[i];
    if (i == root) {
      t.deprel = "ROOT";
    } else if (t.pos == Pos::kCconj) {
      t.deprel = "cc";
    } else {
      const double r = u(rng);
      t.deprel = r < 0.2 ? "conj" : r < 0.35 ? "compound" : r < 0.42 ? "flat"
               : r < 0.47 ? "fixed" : r < 0.6 ? "pobj" : r < 0.7 ? "prep" : "dep";
    }
    s.tokens.push_back(std::move(t));
  }
  return s;
}

}  // namespace

AnnotatedDocument RandomDocument(std::mt19937_64& rng, const RandomDocOptions& o) {
  AnnotatedDocument doc;
  doc.id = "random-" + std::to_string(rng() % 1000000);
  auto count = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n_context = count(0, o.max_context_sentences);
  for (int i = 0; i < n_context; ++i)
    doc.context.push_back(
        RandomSentence(rng, {SourceKind::kContext, 0, i}, o.max_sentence_length));
  const int n_docs = count(n_context == 0 ? 1 : 0, o.max_documents);
  for (int d = 0; d < n_docs; ++d) {
    std::vector<Sentence> sentences;
    const int n_sent = count(1, o.max_sentences_per_document);
    for (int i = 0; i < n_sent; ++i)
      sentences.push_back(
          RandomSentence(rng, {SourceKind::kKnowledge, d, i}, o.max_sentence_length));
    doc.knowledge.push_back(std::move(sentences));
  }
  const std::vector<const Sentence*> all = doc.AllSentences();
  const int n_chains = count(0, o.max_chains);
  for (int c = 0; c < n_chains; ++c) {
    CorefChain chain;
    const int n_mentions = count(1, 3);
    for (int m = 0; m < n_mentions; ++m) {
      const Sentence* s = all[count(0, static_cast<int>(all.size()) - 1)];
      const int len = static_cast<int>(s->tokens.size());
      const int begin = count(0, len - 1);
      const int end = count(begin + 1, std::min(len, begin + 3));
      chain.mentions.push_back({s->ref, begin, end});
    }
    chain.canonical = count(0, n_mentions - 1);
    doc.chains.push_back(std::move(chain));
  }
  doc.response = "random response";
  return doc;
}

ModelConfig ToyModelConfig(size_t vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.d_model = 32;
  c.heads = 2;
  c.encoder_layers = 2;
  c.graph_layers = 1;
  c.decoder_layers = 2;
  return c;
}

TrainConfig ToyTrainConfig() {
  TrainConfig t;
  t.lr_graph = 5e-4;
  t.lr_other = 5e-5;
  t.batch_size = 16;
  t.epochs = 2000;
  t.max_steps = 2000;
  t.seed = 1;
  return t;
}

}  // namespace g2::testing
