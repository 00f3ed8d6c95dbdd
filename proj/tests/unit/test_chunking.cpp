#include <doctest.h>

#include <numeric>

#include "crossfake/chunking.hpp"
#include "crossfake/error.hpp"
#include "crossfake/tokenizer.hpp"
#include "helpers.hpp"

using namespace crossfake;
using crossfake::testing::make_article;

namespace {

TokenSequence sequence(std::size_t n) {
  TokenSequence s{"a", std::vector<TokenId>(n)};
  std::iota(s.tokens.begin(), s.tokens.end(), TokenId{1});
  return s;
}

}  // namespace

TEST_CASE("group counts at the window boundaries") {
  CHECK(slice_groups(sequence(1), 500).size() == 1);
  CHECK(slice_groups(sequence(500), 500).size() == 1);
  CHECK(slice_groups(sequence(501), 500).size() == 2);
  CHECK(slice_groups(sequence(1000), 100).size() == 10);
  CHECK(group_count(1001, 100) == 11);
}

TEST_CASE("groups are contiguous, ordered and only the last is short") {
  const auto seq = sequence(1234);
  const auto groups = slice_groups(seq, 500);
  REQUIRE(groups.size() == 3);
  std::vector<TokenId> joined;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    CHECK(groups[i].index == i);
    CHECK(groups[i].window == 500);
    CHECK(groups[i].article_id == "a");
    joined.insert(joined.end(), groups[i].tokens.begin(), groups[i].tokens.end());
  }
  CHECK(groups[0].tokens.size() == 500);
  CHECK(groups[1].tokens.size() == 500);
  CHECK(groups[2].tokens.size() == 234);
  CHECK(joined == seq.tokens);
}

TEST_CASE("zero window is a configuration error") {
  CHECK_THROWS_AS(slice_groups(sequence(3), 0), ConfigError);
}

TEST_CASE("tokenize rejects empty bodies and keeps the title optional") {
  const HashWordTokenizer tok;
  CHECK_THROWS_AS(tokenize(make_article("e", "  \n"), tok), ValidationError);
  CHECK_THROWS_AS(tokenize(make_article("p", "\x01\x02"), tok), ValidationError);

  auto a = make_article("t", "body words here");
  a.title = "a title";
  CHECK(tokenize(a, tok).length() == 3);
  CHECK(tokenize(a, tok, {true}).length() == 5);
}
