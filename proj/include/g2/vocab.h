#ifndef G2_VOCAB_H_
#define G2_VOCAB_H_

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "g2/annotation.h"

namespace g2 {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr int kSepId = 4;
inline constexpr int kNumSpecialTokens = 5;

class TokenOutOfVocab : public std::out_of_range {
 public:
  explicit TokenOutOfVocab(int id)
      : std::out_of_range("token id " + std::to_string(id) + " outside vocabulary") {}
};

// Closed, lowercased word vocabulary. Ids 0..4 are <pad> <unk> <s> </s> <sep>.
class Vocab {
 public:
  Vocab();
  explicit Vocab(std::span<const std::string> words);

  // Every annotated token and response word of the corpus, most frequent
  // first (ties alphabetical).
  static Vocab Build(std::span<const AnnotatedDocument> corpus);

  int Id(std::string_view word) const;  // kUnkId when absent
  const std::string& Word(int id) const;
  bool Contains(std::string_view word) const;
  size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  std::vector<int> Encode(std::span<const std::string> words) const;
  // Drops special tokens.
  std::vector<std::string> Decode(std::span<const int> ids) const;

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.words_ == b.words_; }

 private:
  void Index();

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

std::string Lowercase(std::string_view s);
std::string JoinWords(std::span<const std::string> words);

}  // namespace g2

#endif  // G2_VOCAB_H_
