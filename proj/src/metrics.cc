#include "g2/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "g2/graph.h"

namespace g2 {

namespace {

using NgramCounts = std::map<std::vector<std::string>, size_t>;

NgramCounts CountNgrams(std::span<const std::string> tokens, size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

size_t ClippedMatches(const NgramCounts& hyp, const NgramCounts& ref) {
  size_t matches = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return matches;
}

void RequireReference(const EvalPair& pair) {
  if (pair.reference.empty()) throw std::invalid_argument("empty reference");
}

double F1(double matches, double hyp_total, double ref_total) {
  if (matches == 0 || hyp_total == 0 || ref_total == 0) return 0.0;
  const double p = matches / hyp_total;
  const double r = matches / ref_total;
  return 2 * p * r / (p + r);
}

}  // namespace

double CorpusBleu(std::span<const EvalPair> pairs, int max_n) {
  if (pairs.empty()) throw EmptyCorpus();
  if (max_n < 1 || max_n > 4) throw std::invalid_argument("BLEU order must be 1..4");
  std::vector<double> matches(max_n, 0), totals(max_n, 0);
  double hyp_len = 0, ref_len = 0;
  for (const EvalPair& pair : pairs) {
    RequireReference(pair);
    hyp_len += pair.hypothesis.size();
    ref_len += pair.reference.size();
    for (int n = 1; n <= max_n; ++n) {
      const NgramCounts h = CountNgrams(pair.hypothesis, n);
      matches[n - 1] += ClippedMatches(h, CountNgrams(pair.reference, n));
      if (pair.hypothesis.size() >= static_cast<size_t>(n))
        totals[n - 1] += pair.hypothesis.size() - n + 1;
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_sum = 0;
  for (int n = 0; n < max_n; ++n) {
    if (matches[n] == 0) return 0.0;
    log_sum += std::log(matches[n] / totals[n]);
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return bp * std::exp(log_sum / max_n);
}

double RougeN(const EvalPair& pair, int n) {
  RequireReference(pair);
  if (n < 1) throw std::invalid_argument("ROUGE order must be positive");
  if (pair.hypothesis.empty()) return 0.0;
  const NgramCounts h = CountNgrams(pair.hypothesis, n);
  const NgramCounts r = CountNgrams(pair.reference, n);
  if (h.empty() && r.empty()) return pair.hypothesis == pair.reference ? 1.0 : 0.0;
  const double hyp_total = pair.hypothesis.size() >= static_cast<size_t>(n)
                               ? pair.hypothesis.size() - n + 1 : 0;
  const double ref_total = pair.reference.size() >= static_cast<size_t>(n)
                               ? pair.reference.size() - n + 1 : 0;
  return F1(static_cast<double>(ClippedMatches(h, r)), hyp_total, ref_total);
}

size_t LcsLength(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double RougeL(const EvalPair& pair) {
  RequireReference(pair);
  if (pair.hypothesis.empty()) return 0.0;
  return F1(static_cast<double>(LcsLength(pair.hypothesis, pair.reference)),
            static_cast<double>(pair.hypothesis.size()),
            static_cast<double>(pair.reference.size()));
}

EvalScores Evaluate(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw EmptyCorpus();
  EvalScores s;
  for (int n = 1; n <= 4; ++n) s.bleu[n - 1] = CorpusBleu(pairs, n);
  for (const EvalPair& p : pairs) {
    s.rouge1 += RougeN(p, 1);
    s.rouge2 += RougeN(p, 2);
    s.rouge_l += RougeL(p);
  }
  s.rouge1 /= pairs.size();
  s.rouge2 /= pairs.size();
  s.rouge_l /= pairs.size();
  return s;
}

std::string FormatEvalTable(
    std::span<const std::pair<std::string, EvalScores>> rows) {
  size_t label_width = 5;
  for (const auto& [label, s] : rows) label_width = std::max(label_width, label.size());
  auto pad = [&](const std::string& s) {
    return s + std::string(label_width - s.size(), ' ');
  };
  std::string out = pad("model");
  for (const char* h : {"BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "ROUGE-1", "ROUGE-2",
                        "ROUGE-L"}) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %8s", h);
    out += buf;
  }
  out += '\n';
  for (const auto& [label, s] : rows) {
    out += pad(label);
    for (double v : {s.bleu[0], s.bleu[1], s.bleu[2], s.bleu[3], s.rouge1, s.rouge2,
                     s.rouge_l}) {
      char buf[32];
      std::snprintf(buf, sizeof buf, " %8.4f", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace g2
