#ifndef G2_METRICS_H_
#define G2_METRICS_H_

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace g2 {

struct EvalPair {
  std::vector<std::string> hypothesis;
  std::vector<std::string> reference;  // must be non-empty
};

// Corpus BLEU with clipped n-gram counts summed over the corpus, geometric
// mean over orders 1..max_n and brevity penalty exp(1 - r/c) when c < r.
// No smoothing: a zero match count at any order gives 0. Throws EmptyCorpus.
double CorpusBleu(std::span<const EvalPair> pairs, int max_n);

// F1 (beta = 1) of clipped n-gram overlap. An empty hypothesis scores 0.
double RougeN(const EvalPair& pair, int n);
// F1 over the longest common subsequence.
double RougeL(const EvalPair& pair);
size_t LcsLength(std::span<const std::string> a, std::span<const std::string> b);

struct EvalScores {
  std::array<double, 4> bleu{};  // BLEU-1..4
  double rouge1 = 0;
  double rouge2 = 0;
  double rouge_l = 0;  // sentence scores averaged over the corpus
};

EvalScores Evaluate(std::span<const EvalPair> pairs);

// Fixed-width table: a header, then one row per (label, scores) with scores
// in [0, 1] to four decimals.
std::string FormatEvalTable(
    std::span<const std::pair<std::string, EvalScores>> rows);

}  // namespace g2

#endif  // G2_METRICS_H_
