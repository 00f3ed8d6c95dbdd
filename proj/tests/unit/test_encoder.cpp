#include <doctest.h>

#include <set>

#include "crossfake/bert.hpp"
#include "crossfake/encoder.hpp"
#include "crossfake/error.hpp"
#include "crossfake/json_io.hpp"
#include "crossfake/rng.hpp"
#include "helpers.hpp"

using namespace crossfake;
using crossfake::testing::kFixtures;

namespace {

std::vector<TokenId> random_tokens(Rng& rng, std::size_t n) {
  std::vector<TokenId> t(n);
  for (auto& x : t) x = static_cast<TokenId>(1000 + rng.below(5000));
  return t;
}

double max_abs_diff(const Eigen::VectorXd& a, const std::vector<double>& b) {
  REQUIRE(static_cast<std::size_t>(a.size()) == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    m = std::max(m, std::abs(a[static_cast<Eigen::Index>(i)] - b[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("mock encoder is deterministic and unit norm") {
  const MockEncoder enc(5);
  const std::vector<TokenId> t = {1001, 1002, 1003};
  const auto a = enc.embed(t);
  const auto b = MockEncoder(5).embed(t);
  CHECK(a == b);
  CHECK(a.size() == 32);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(enc.fingerprint() == "mock-v1/seed=5/dim=32");
  CHECK(MockEncoder(6).embed(t) != a);
}

TEST_CASE("mock encoder separates different token lists") {
  const MockEncoder enc;
  Rng rng(99);
  std::size_t equal = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_tokens(rng, 1 + rng.below(50));
    auto b = random_tokens(rng, 1 + rng.below(50));
    if (a == b) b.push_back(1);
    if (enc.embed(a) == enc.embed(b)) ++equal;
  }
  CHECK(equal == 0);
  const std::vector<TokenId> ab = {1001, 1002};
  const std::vector<TokenId> ba = {1002, 1001};
  CHECK(enc.embed(ab) != enc.embed(ba));
}

TEST_CASE("groups longer than the encoder limit are rejected") {
  const MockEncoder enc;
  Rng rng(1);
  CHECK_NOTHROW(encode_group(enc, TokenGroup{"a", 0, random_tokens(rng, 510), 510}));
  CHECK_THROWS_AS(encode_group(enc, TokenGroup{"a", 0, random_tokens(rng, 511), 511}),
                  ValidationError);
  std::vector<TokenGroup> groups = {TokenGroup{"a", 0, random_tokens(rng, 10), 600},
                                    TokenGroup{"a", 1, random_tokens(rng, 600), 600}};
  try {
    encode_article(enc, groups);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("group index 1") != std::string::npos);
  }
}

TEST_CASE("encode_article equals per-group encoding") {
  const MockEncoder enc;
  Rng rng(2);
  std::vector<TokenGroup> groups;
  for (std::size_t i = 0; i < 5; ++i) groups.push_back({"a", i, random_tokens(rng, 100), 100});
  const auto batch = encode_article(enc, groups);
  REQUIRE(batch.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(batch[i].group_index == i);
    CHECK(batch[i].vector == encode_group(enc, groups[i]).vector);
  }
}

TEST_CASE("registry builds encoders by name") {
  EncoderSpec spec;
  spec.mock_seed = 3;
  spec.mock_dim = 8;
  const auto bundle = make_encoder(spec);
  CHECK(bundle.encoder->info().dim == 8);
  CHECK(bundle.tokenizer->id() == "hashword-v1/1048576/uncased");

  spec.name = "nope";
  CHECK_THROWS_AS(make_encoder(spec), ConfigError);
  spec.name = "bert";
  CHECK_THROWS_AS(make_encoder(spec), ConfigError);

  const auto round = EncoderSpec::from_json(EncoderSpec{}.to_json());
  CHECK(round.name == "mock");
}

TEST_CASE("BERT forward pass matches the reference implementation") {
  const Json golden = read_json_file(kFixtures / "tiny_bert" / "golden.json");
  const auto dir = kFixtures / "tiny_bert";
  EncoderSpec spec;
  spec.name = "bert";
  spec.model_dir = dir;
  spec.pooling = Pooling::cls;
  const auto cls_bundle = make_encoder(spec);
  spec.pooling = Pooling::mean;
  const auto mean_bundle = make_encoder(spec);
  CHECK(cls_bundle.encoder->info().dim == 16);
  CHECK(cls_bundle.encoder->fingerprint() != mean_bundle.encoder->fingerprint());
  CHECK(cls_bundle.tokenizer->id().rfind("wordpiece/", 0) == 0);

  for (const auto& item : golden.at("encodings")) {
    const auto text = item.at("text").get<std::string>();
    CAPTURE(text);
    const auto ids = cls_bundle.tokenizer->encode(text);
    CHECK(ids == item.at("ids").get<std::vector<TokenId>>());
    CHECK(max_abs_diff(cls_bundle.encoder->embed(ids), item.at("cls").get<std::vector<double>>()) <
          1e-4);
    CHECK(max_abs_diff(mean_bundle.encoder->embed(ids), item.at("mean").get<std::vector<double>>()) <
          1e-4);
  }
}

TEST_CASE("BERT rejects sequences beyond its position table") {
  const auto enc = BertEncoder::load(kFixtures / "tiny_bert", Pooling::cls, 2, 3);
  CHECK(enc.info().max_tokens == 64);
  std::vector<TokenId> ids(63, 10);
  CHECK_THROWS_AS(encode_group(enc, TokenGroup{"a", 0, ids, 63}), ValidationError);
  ids.resize(62);
  CHECK_NOTHROW(encode_group(enc, TokenGroup{"a", 0, ids, 62}));
}

TEST_CASE("BERT refuses a missing model directory") {
  CHECK_THROWS_AS(BertEncoder::load(kFixtures / "absent", Pooling::cls, 2, 3), ConfigError);
}
