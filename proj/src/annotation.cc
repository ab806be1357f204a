#include "g2/annotation.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "g2/file_util.h"
#include "json.hpp"

namespace g2 {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr std::array<std::pair<Pos, std::string_view>, 12> kPosNames = {{
    {Pos::kNoun, "NOUN"}, {Pos::kPropn, "PROPN"}, {Pos::kPron, "PRON"},
    {Pos::kVerb, "VERB"}, {Pos::kAux, "AUX"},     {Pos::kAdj, "ADJ"},
    {Pos::kAdv, "ADV"},   {Pos::kAdp, "ADP"},     {Pos::kDet, "DET"},
    {Pos::kCconj, "CCONJ"}, {Pos::kPunct, "PUNCT"}, {Pos::kOther, "OTHER"},
}};

bool ParseInt(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && out >= 0;
}

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Reads fields out of a parsed record, reporting the record's line on error.
class RecordReader {
 public:
  explicit RecordReader(size_t line) : line_(line) {}

  const Json& Field(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) Fail(where + ": missing field '" + key + "'");
    return *it;
  }

  const Json& Array(const Json& v, const std::string& where) {
    if (!v.is_array()) Fail(where + ": expected an array");
    return v;
  }

  std::string String(const Json& v, const std::string& where) {
    if (!v.is_string()) Fail(where + ": expected a string");
    return v.get<std::string>();
  }

  int Int(const Json& v, const std::string& where) {
    if (!v.is_number_integer()) Fail(where + ": expected an integer");
    const auto n = v.get<long long>();
    if (n < -1 || n > 1'000'000'000) throw IndexOutOfRange(line_, where);
    return static_cast<int>(n);
  }

  [[noreturn]] void Fail(const std::string& reason) {
    throw MalformedRecord(line_, reason);
  }

  Token ReadToken(const Json& v, int index, const std::string& where) {
    if (!v.is_object()) Fail(where + ": token must be an object");
    Token tok;
    tok.index = index;
    tok.surface = String(Field(v, "t", where), where + ".t");
    const std::string pos = String(Field(v, "pos", where), where + ".pos");
    auto parsed = ParsePos(pos);
    if (!parsed) Fail(where + ": unknown POS tag '" + pos + "'");
    tok.pos = *parsed;
    tok.head = Int(Field(v, "head", where), where + ".head");
    tok.deprel = String(Field(v, "rel", where), where + ".rel");
    // spaCy marks the root by pointing it at itself.
    if (tok.is_root() && tok.head == index) tok.head = kRootHead;
    return tok;
  }

  Sentence ReadSentence(const Json& v, SentenceRef ref) {
    const std::string where = ref.ToString();
    Sentence s;
    s.ref = ref;
    int i = 0;
    for (const Json& t : Array(v, where)) {
      s.tokens.push_back(ReadToken(t, i, where + "[" + std::to_string(i) + "]"));
      ++i;
    }
    return s;
  }

  Mention ReadMention(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) {
      Fail(where + ": mention must be [sent_ref, start, end]");
    }
    const std::string ref_text = String(v[0], where + "[0]");
    auto ref = SentenceRef::Parse(ref_text);
    if (!ref) Fail(where + ": bad sentence reference '" + ref_text + "'");
    return {*ref, Int(v[1], where + ".start"), Int(v[2], where + ".end")};
  }

 private:
  size_t line_;
};

OrderedJson TokenJson(const Token& t) {
  OrderedJson j;
  j["t"] = t.surface;
  j["pos"] = std::string(PosName(t.pos));
  j["head"] = t.head;
  j["rel"] = t.deprel;
  return j;
}

OrderedJson SentenceJson(const Sentence& s) {
  OrderedJson arr = OrderedJson::array();
  for (const Token& t : s.tokens) arr.push_back(TokenJson(t));
  return arr;
}

}  // namespace

std::string_view PosName(Pos pos) {
  for (const auto& [p, name] : kPosNames)
    if (p == pos) return name;
  return "OTHER";
}

std::optional<Pos> ParsePos(std::string_view name) {
  for (const auto& [p, n] : kPosNames)
    if (n == name) return p;
  return std::nullopt;
}

bool Token::is_root() const { return EqualsIgnoreCase(deprel, "root"); }

std::string SentenceRef::ToString() const {
  if (kind == SourceKind::kContext) return "c." + std::to_string(sentence);
  return "k." + std::to_string(document) + "." + std::to_string(sentence);
}

std::optional<SentenceRef> SentenceRef::Parse(std::string_view text) {
  SentenceRef ref;
  if (text.starts_with("c.")) {
    ref.kind = SourceKind::kContext;
    if (!ParseInt(text.substr(2), ref.sentence)) return std::nullopt;
    return ref;
  }
  if (text.starts_with("k.")) {
    text.remove_prefix(2);
    const size_t dot = text.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    ref.kind = SourceKind::kKnowledge;
    if (!ParseInt(text.substr(0, dot), ref.document) ||
        !ParseInt(text.substr(dot + 1), ref.sentence)) {
      return std::nullopt;
    }
    return ref;
  }
  return std::nullopt;
}

const Sentence* AnnotatedDocument::Find(const SentenceRef& ref) const {
  if (ref.sentence < 0) return nullptr;
  if (ref.kind == SourceKind::kContext) {
    if (ref.document != 0 || ref.sentence >= static_cast<int>(context.size()))
      return nullptr;
    return &context[ref.sentence];
  }
  if (ref.document < 0 || ref.document >= static_cast<int>(knowledge.size()))
    return nullptr;
  const auto& doc = knowledge[ref.document];
  if (ref.sentence >= static_cast<int>(doc.size())) return nullptr;
  return &doc[ref.sentence];
}

std::vector<const Sentence*> AnnotatedDocument::AllSentences() const {
  std::vector<const Sentence*> out;
  for (const Sentence& s : context) out.push_back(&s);
  for (const auto& doc : knowledge)
    for (const Sentence& s : doc) out.push_back(&s);
  return out;
}

void ValidateDocument(const AnnotatedDocument& doc, size_t line) {
  auto check_sentence = [&](const Sentence& s, const SentenceRef& expected) {
    const std::string where = expected.ToString();
    if (s.ref != expected) {
      throw MalformedRecord(line, where + ": sentence carries reference " +
                                      s.ref.ToString());
    }
    if (s.tokens.empty()) throw MalformedRecord(line, where + ": empty sentence");
    const int n = static_cast<int>(s.tokens.size());
    int roots = 0;
    for (int i = 0; i < n; ++i) {
      const Token& t = s.tokens[i];
      const std::string tw = where + "[" + std::to_string(i) + "]";
      if (t.index != i) throw MalformedRecord(line, tw + ": token index " +
                                                        std::to_string(t.index));
      if (t.is_root()) {
        ++roots;
        if (t.head != kRootHead) {
          throw MalformedRecord(line, tw + ": root token must have a ROOT head");
        }
        continue;
      }
      if (t.head == kRootHead) {
        throw MalformedRecord(line, tw + ": ROOT head on a non-root relation");
      }
      if (t.head < 0 || t.head >= n) throw IndexOutOfRange(line, tw + ".head");
      if (t.head == i) throw MalformedRecord(line, tw + ": token heads itself");
    }
    if (roots != 1) {
      throw MalformedRecord(line, where + ": expected exactly one root, found " +
                                      std::to_string(roots));
    }
  };

  for (size_t i = 0; i < doc.context.size(); ++i) {
    check_sentence(doc.context[i],
                   {SourceKind::kContext, 0, static_cast<int>(i)});
  }
  for (size_t d = 0; d < doc.knowledge.size(); ++d) {
    for (size_t i = 0; i < doc.knowledge[d].size(); ++i) {
      check_sentence(doc.knowledge[d][i],
                     {SourceKind::kKnowledge, static_cast<int>(d),
                      static_cast<int>(i)});
    }
  }
  for (size_t c = 0; c < doc.chains.size(); ++c) {
    const CorefChain& chain = doc.chains[c];
    const std::string where = "coref[" + std::to_string(c) + "]";
    if (chain.mentions.empty()) throw MalformedRecord(line, where + ": no mentions");
    for (size_t m = 0; m < chain.mentions.size(); ++m) {
      const Mention& mention = chain.mentions[m];
      const std::string mw = where + ".mentions[" + std::to_string(m) + "]";
      const Sentence* s = doc.Find(mention.sentence);
      if (!s) throw IndexOutOfRange(line, mw + " sentence " + mention.sentence.ToString());
      if (mention.begin < 0 || mention.begin >= mention.end ||
          mention.end > static_cast<int>(s->tokens.size())) {
        throw IndexOutOfRange(line, mw + " span");
      }
    }
    if (chain.canonical < 0 ||
        chain.canonical >= static_cast<int>(chain.mentions.size())) {
      throw IndexOutOfRange(line, where + ".canonical");
    }
  }
}

AnnotatedDocument ParseAnnotationRecord(std::string_view line, size_t line_no) {
  Json record;
  try {
    record = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
  }
  RecordReader r(line_no);
  if (!record.is_object()) r.Fail("record must be an object");

  AnnotatedDocument doc;
  doc.id = r.String(r.Field(record, "id", "record"), "id");
  int i = 0;
  for (const Json& s : r.Array(r.Field(record, "context", "record"), "context")) {
    doc.context.push_back(r.ReadSentence(s, {SourceKind::kContext, 0, i++}));
  }
  int d = 0;
  for (const Json& kd : r.Array(r.Field(record, "knowledge", "record"), "knowledge")) {
    std::vector<Sentence> sentences;
    int j = 0;
    for (const Json& s : r.Array(kd, "knowledge[" + std::to_string(d) + "]")) {
      sentences.push_back(r.ReadSentence(s, {SourceKind::kKnowledge, d, j++}));
    }
    doc.knowledge.push_back(std::move(sentences));
    ++d;
  }
  if (auto it = record.find("coref"); it != record.end()) {
    int c = 0;
    for (const Json& chain_json : r.Array(*it, "coref")) {
      const std::string where = "coref[" + std::to_string(c++) + "]";
      if (!chain_json.is_object()) r.Fail(where + ": expected an object");
      CorefChain chain;
      int m = 0;
      for (const Json& mj : r.Array(r.Field(chain_json, "mentions", where),
                                    where + ".mentions")) {
        chain.mentions.push_back(
            r.ReadMention(mj, where + ".mentions[" + std::to_string(m++) + "]"));
      }
      chain.canonical = r.Int(r.Field(chain_json, "canonical", where),
                              where + ".canonical");
      doc.chains.push_back(std::move(chain));
    }
  }
  if (auto it = record.find("response"); it != record.end() && !it->is_null()) {
    doc.response = r.String(*it, "response");
  }
  ValidateDocument(doc, line_no);
  return doc;
}

std::string SerializeAnnotation(const AnnotatedDocument& doc) {
  OrderedJson j;
  j["id"] = doc.id;
  OrderedJson context = OrderedJson::array();
  for (const Sentence& s : doc.context) context.push_back(SentenceJson(s));
  j["context"] = std::move(context);
  OrderedJson knowledge = OrderedJson::array();
  for (const auto& kd : doc.knowledge) {
    OrderedJson sentences = OrderedJson::array();
    for (const Sentence& s : kd) sentences.push_back(SentenceJson(s));
    knowledge.push_back(std::move(sentences));
  }
  j["knowledge"] = std::move(knowledge);
  OrderedJson coref = OrderedJson::array();
  for (const CorefChain& chain : doc.chains) {
    OrderedJson mentions = OrderedJson::array();
    for (const Mention& m : chain.mentions) {
      mentions.push_back(OrderedJson::array({m.sentence.ToString(), m.begin, m.end}));
    }
    OrderedJson cj;
    cj["mentions"] = std::move(mentions);
    cj["canonical"] = chain.canonical;
    coref.push_back(std::move(cj));
  }
  j["coref"] = std::move(coref);
  if (doc.response) j["response"] = *doc.response;
  return j.dump();
}

std::vector<AnnotatedDocument> ParseAnnotations(std::istream& in) {
  std::vector<AnnotatedDocument> docs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    docs.push_back(ParseAnnotationRecord(line, line_no));
  }
  return docs;
}

std::vector<AnnotatedDocument> ParseAnnotationFile(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ParseAnnotations(in);
}

std::string SerializeAnnotations(std::span<const AnnotatedDocument> docs) {
  std::string out;
  for (const AnnotatedDocument& d : docs) {
    out += SerializeAnnotation(d);
    out += '\n';
  }
  return out;
}

void WriteAnnotationFile(std::span<const AnnotatedDocument> docs,
                         const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeAnnotations(docs));
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    out.push_back(std::move(word));
  }
  return out;
}

}  // namespace g2
