#include <doctest.h>

#include "crossfake/json_io.hpp"
#include "crossfake/text.hpp"
#include "crossfake/tokenizer.hpp"
#include "helpers.hpp"

using namespace crossfake;
using crossfake::testing::kFixtures;

namespace {

const Json& golden() {
  static const Json g = read_json_file(kFixtures / "tiny_bert" / "golden.json");
  return g;
}

}  // namespace

TEST_CASE("utf8 decoding replaces malformed sequences") {
  CHECK(text::decode_utf8("a\xC3\xA9") == U"aé");
  CHECK(text::decode_utf8("\xFF") == U"�");
  CHECK(text::decode_utf8("x\xE4\xB8") == U"x�");
  CHECK(text::encode_utf8(U"新冠") == "\xE6\x96\xB0\xE5\x86\xA0");
}

TEST_CASE("character classes") {
  CHECK(text::is_whitespace(U'\t'));
  CHECK(text::is_whitespace(U'　'));
  CHECK_FALSE(text::is_whitespace(U'a'));
  CHECK(text::is_punctuation(U'$'));
  CHECK(text::is_punctuation(U'。'));
  CHECK(text::is_cjk_ideograph(U'新'));
  CHECK_FALSE(text::is_cjk_ideograph(U'a'));
  CHECK(text::to_lower(U'É') == U'é');
  CHECK(text::strip_accent(U'é') == U'e');
}

TEST_CASE("trim and blank") {
  CHECK(text::trim("  x y \n") == "x y");
  CHECK(text::is_blank(" \t\n"));
  CHECK_FALSE(text::is_blank(" a "));
}

TEST_CASE("basic tokenization matches the reference tokenizer") {
  for (const auto& item : golden().at("hashword")) {
    const auto text = item.at("text").get<std::string>();
    CAPTURE(text);
    CHECK(text::basic_tokenize(text, true) == item.at("words").get<std::vector<std::string>>());
  }
}

TEST_CASE("hash-word ids match the reference values") {
  const HashWordTokenizer tok;
  CHECK(tok.id() == "hashword-v1/1048576/uncased");
  for (const auto& item : golden().at("hashword")) {
    const auto text = item.at("text").get<std::string>();
    CAPTURE(text);
    CHECK(tok.encode(text) == item.at("ids").get<std::vector<TokenId>>());
  }
}

TEST_CASE("hash-word ids stay above the reserved range") {
  const HashWordTokenizer tok(16);
  for (const auto id : tok.encode("one two three four five six seven")) {
    CHECK(id >= HashWordTokenizer::kFirstId);
    CHECK(id < HashWordTokenizer::kFirstId + 16);
  }
}

TEST_CASE("wordpiece ids match the reference tokenizer") {
  const auto tok = WordPieceTokenizer::from_file(kFixtures / "tiny_bert" / "vocab.txt");
  CHECK(tok.id().rfind("wordpiece/", 0) == 0);
  CHECK(tok.vocab_size() == 64);
  for (const auto& item : golden().at("wordpiece")) {
    const auto text = item.at("text").get<std::string>();
    CAPTURE(text);
    CHECK(tok.encode(text) == item.at("ids").get<std::vector<TokenId>>());
  }
}

TEST_CASE("wordpiece maps overlong words to UNK") {
  const auto tok = WordPieceTokenizer::from_file(kFixtures / "tiny_bert" / "vocab.txt");
  const auto ids = tok.encode(std::string(150, 'a'));
  REQUIRE(ids.size() == 1);
  CHECK(ids[0] == tok.unk_id());
}
