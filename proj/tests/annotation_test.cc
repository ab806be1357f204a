#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "g2/annotation.h"
#include "support/fixtures.h"

namespace g2 {
namespace {

constexpr const char* kTiny =
    R"({"id":"x","context":[[{"t":"Dogs","pos":"NOUN","head":1,"rel":"nsubj"},)"
    R"({"t":"bark","pos":"VERB","head":-1,"rel":"ROOT"}]],"knowledge":[]})";

TEST(AnnotationTest, ParsesMinimalRecord) {
  const AnnotatedDocument doc = ParseAnnotationRecord(kTiny);
  EXPECT_EQ(doc.id, "x");
  ASSERT_EQ(doc.context.size(), 1u);
  EXPECT_EQ(doc.context[0].tokens[0].surface, "Dogs");
  EXPECT_EQ(doc.context[0].tokens[0].pos, Pos::kNoun);
  EXPECT_EQ(doc.context[0].tokens[1].head, kRootHead);
  EXPECT_TRUE(doc.context[0].tokens[1].is_root());
  EXPECT_FALSE(doc.response.has_value());
  EXPECT_TRUE(doc.chains.empty());
}

TEST(AnnotationTest, Fig2FixtureRoundTrips) {
  const AnnotatedDocument doc = testing::Fig2Document();
  EXPECT_EQ(doc.knowledge.size(), 1u);
  EXPECT_EQ(doc.chains.size(), 1u);
  EXPECT_EQ(ParseAnnotationRecord(SerializeAnnotation(doc)), doc);
}

TEST(AnnotationTest, RandomDocumentsRoundTripThroughAFile) {
  std::mt19937_64 rng(3);
  std::vector<AnnotatedDocument> docs;
  for (int i = 0; i < 50; ++i) docs.push_back(testing::RandomDocument(rng));
  const auto path = testing::TempPath("roundtrip.jsonl");
  WriteAnnotationFile(docs, path);
  EXPECT_EQ(ParseAnnotationFile(path), docs);
}

TEST(AnnotationTest, SelfHeadedRootIsNormalized) {
  std::string line = kTiny;
  line.replace(line.find("\"head\":-1"), 9, "\"head\":1");
  EXPECT_EQ(ParseAnnotationRecord(line).context[0].tokens[1].head, kRootHead);
}

TEST(AnnotationTest, BlankLinesAreSkipped) {
  std::istringstream in(std::string("\n") + kTiny + "\n\n" + kTiny + "\n");
  EXPECT_EQ(ParseAnnotations(in).size(), 2u);
}

TEST(AnnotationTest, InvalidJsonIsMalformedWithLineNumber) {
  std::istringstream in(std::string(kTiny) + "\n{not json\n");
  try {
    ParseAnnotations(in);
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(AnnotationTest, MissingFieldIsMalformed) {
  EXPECT_THROW(ParseAnnotationRecord(R"({"id":"x","knowledge":[]})"), MalformedRecord);
}

TEST(AnnotationTest, UnknownPosIsMalformed) {
  std::string line = kTiny;
  line.replace(line.find("NOUN"), 4, "NOUNISH");
  EXPECT_THROW(ParseAnnotationRecord(line), MalformedRecord);
}

TEST(AnnotationTest, HeadOutsideSentenceIsOutOfRange) {
  std::string line = kTiny;
  line.replace(line.find("\"head\":1"), 8, "\"head\":7");
  EXPECT_THROW(ParseAnnotationRecord(line), IndexOutOfRange);
}

TEST(AnnotationTest, TwoRootsAreMalformed) {
  std::string line = kTiny;
  line.replace(line.find("\"head\":1,\"rel\":\"nsubj\""), 22, "\"head\":-1,\"rel\":\"ROOT\"");
  EXPECT_THROW(ParseAnnotationRecord(line), MalformedRecord);
}

TEST(AnnotationTest, MentionSpanOutsideSentenceIsOutOfRange) {
  std::string line = kTiny;
  line.insert(line.size() - 1, R"(,"coref":[{"mentions":[["c.0",0,3]],"canonical":0}])");
  EXPECT_THROW(ParseAnnotationRecord(line), IndexOutOfRange);
}

TEST(AnnotationTest, MentionInMissingSentenceIsOutOfRange) {
  std::string line = kTiny;
  line.insert(line.size() - 1, R"(,"coref":[{"mentions":[["k.2.0",0,1]],"canonical":0}])");
  EXPECT_THROW(ParseAnnotationRecord(line), IndexOutOfRange);
}

TEST(AnnotationTest, CanonicalOutsideChainIsOutOfRange) {
  std::string line = kTiny;
  line.insert(line.size() - 1, R"(,"coref":[{"mentions":[["c.0",0,1]],"canonical":4}])");
  EXPECT_THROW(ParseAnnotationRecord(line), IndexOutOfRange);
}

TEST(SentenceRefTest, ParsesAndPrints) {
  const auto k = SentenceRef::Parse("k.3.1");
  ASSERT_TRUE(k);
  EXPECT_EQ(k->kind, SourceKind::kKnowledge);
  EXPECT_EQ(k->document, 3);
  EXPECT_EQ(k->sentence, 1);
  EXPECT_EQ(k->ToString(), "k.3.1");
  EXPECT_EQ(SentenceRef::Parse("c.2")->ToString(), "c.2");
  EXPECT_FALSE(SentenceRef::Parse("c.x"));
  EXPECT_FALSE(SentenceRef::Parse("k.1"));
  EXPECT_FALSE(SentenceRef::Parse(""));
}

TEST(TokenizeTest, LowercasesAndSplitsOnWhitespace) {
  EXPECT_EQ(Tokenize("  The Cat\tsat \n"), (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_TRUE(Tokenize("   ").empty());
}

}  // namespace
}  // namespace g2
