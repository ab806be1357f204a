#ifndef G2_ANNOTATION_H_
#define G2_ANNOTATION_H_

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace g2 {

// Coarse part-of-speech set. Finer tagsets are mapped down before ingest.
enum class Pos {
  kNoun, kPropn, kPron, kVerb, kAux, kAdj, kAdv, kAdp, kDet, kCconj, kPunct,
  kOther,
};

std::string_view PosName(Pos pos);
std::optional<Pos> ParsePos(std::string_view name);

inline constexpr int kRootHead = -1;

struct Token {
  int index = 0;
  std::string surface;
  Pos pos = Pos::kOther;
  int head = kRootHead;  // index within the sentence, or kRootHead
  std::string deprel;

  bool is_root() const;
  friend bool operator==(const Token&, const Token&) = default;
};

enum class SourceKind { kContext, kKnowledge };

// Addresses one sentence: "c.<i>" for context sentence i, "k.<d>.<i>" for
// sentence i of knowledge document d.
struct SentenceRef {
  SourceKind kind = SourceKind::kContext;
  int document = 0;  // always 0 for context
  int sentence = 0;

  std::string ToString() const;
  static std::optional<SentenceRef> Parse(std::string_view text);

  friend auto operator<=>(const SentenceRef&, const SentenceRef&) = default;
};

struct Sentence {
  SentenceRef ref;
  std::vector<Token> tokens;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Mention {
  SentenceRef sentence;
  int begin = 0;  // [begin, end) token span
  int end = 0;

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct CorefChain {
  std::vector<Mention> mentions;
  int canonical = 0;  // index into mentions

  friend bool operator==(const CorefChain&, const CorefChain&) = default;
};

struct AnnotatedDocument {
  std::string id;
  std::vector<Sentence> context;
  std::vector<std::vector<Sentence>> knowledge;
  std::vector<CorefChain> chains;
  std::optional<std::string> response;

  const Sentence* Find(const SentenceRef& ref) const;
  // Context sentences first, then each knowledge document in order.
  std::vector<const Sentence*> AllSentences() const;

  friend bool operator==(const AnnotatedDocument&,
                         const AnnotatedDocument&) = default;
};

class AnnotationError : public std::runtime_error {
 public:
  AnnotationError(size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  // 1-based line of the offending record; 0 when not reading a file.
  size_t line() const { return line_; }

 private:
  size_t line_;
};

class MalformedRecord : public AnnotationError {
 public:
  MalformedRecord(size_t line, const std::string& reason)
      : AnnotationError(line, "malformed record: " + reason) {}
};

class IndexOutOfRange : public AnnotationError {
 public:
  IndexOutOfRange(size_t line, const std::string& field)
      : AnnotationError(line, "index out of range: " + field), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Throws MalformedRecord / IndexOutOfRange when an invariant is violated.
void ValidateDocument(const AnnotatedDocument& doc, size_t line = 0);

AnnotatedDocument ParseAnnotationRecord(std::string_view line, size_t line_no = 0);
std::string SerializeAnnotation(const AnnotatedDocument& doc);

// One record per line. Blank lines are skipped; the first bad record aborts
// the whole parse.
std::vector<AnnotatedDocument> ParseAnnotations(std::istream& in);
std::vector<AnnotatedDocument> ParseAnnotationFile(const std::filesystem::path& path);
std::string SerializeAnnotations(std::span<const AnnotatedDocument> docs);
void WriteAnnotationFile(std::span<const AnnotatedDocument> docs,
                         const std::filesystem::path& path);

// Lowercased whitespace tokenization used for responses and metrics.
std::vector<std::string> Tokenize(std::string_view text);

}  // namespace g2

#endif  // G2_ANNOTATION_H_
