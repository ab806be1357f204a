#include "g2/vocab.h"

#include <algorithm>
#include <cctype>
#include <map>

namespace g2 {

namespace {

const std::vector<std::string>& SpecialTokens() {
  static const std::vector<std::string> kTokens = {"<pad>", "<unk>", "<s>", "</s>",
                                                   "<sep>"};
  return kTokens;
}

}  // namespace

std::string Lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string JoinWords(std::span<const std::string> words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

Vocab::Vocab() : words_(SpecialTokens()) { Index(); }

Vocab::Vocab(std::span<const std::string> words)
    : words_(words.begin(), words.end()) {
  const auto& special = SpecialTokens();
  if (words_.size() < special.size() ||
      !std::equal(special.begin(), special.end(), words_.begin())) {
    throw std::invalid_argument("vocabulary must start with the special tokens");
  }
  Index();
}

void Vocab::Index() {
  ids_.clear();
  for (size_t i = 0; i < words_.size(); ++i) {
    if (!ids_.emplace(words_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary entry: " + words_[i]);
    }
  }
}

Vocab Vocab::Build(std::span<const AnnotatedDocument> corpus) {
  std::map<std::string, size_t> counts;
  for (const AnnotatedDocument& doc : corpus) {
    for (const Sentence* s : doc.AllSentences())
      for (const Token& t : s->tokens) ++counts[Lowercase(t.surface)];
    if (doc.response)
      for (const std::string& w : Tokenize(*doc.response)) ++counts[w];
  }
  for (const std::string& s : SpecialTokens()) counts.erase(s);
  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words = SpecialTokens();
  for (auto& [w, n] : ranked) words.push_back(w);
  return Vocab(words);
}

int Vocab::Id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocab::Word(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= words_.size()) throw TokenOutOfVocab(id);
  return words_[id];
}

bool Vocab::Contains(std::string_view word) const {
  return ids_.count(std::string(word)) != 0;
}

std::vector<int> Vocab::Encode(std::span<const std::string> words) const {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const std::string& w : words) ids.push_back(Id(w));
  return ids;
}

std::vector<std::string> Vocab::Decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id < kNumSpecialTokens && id != kUnkId) continue;
    out.push_back(Word(id));
  }
  return out;
}

}  // namespace g2
