#include <doctest.h>

#include <cmath>
#include <fstream>

#include "crossfake/error.hpp"
#include "crossfake/model.hpp"
#include "crossfake/rng.hpp"
#include "crossfake/synthetic.hpp"
#include "helpers.hpp"

using namespace crossfake;
using crossfake::testing::make_article;
using crossfake::testing::TempDir;

namespace {

GroupEmbedding group(std::vector<double> v) {
  GroupEmbedding g;
  g.article_id = "a";
  g.vector = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return g;
}

// 2 -> 2 -> 2 -> 1 head with hand-picked weights.
ClassifierHead tiny_head() {
  ClassifierHead h = ClassifierHead::zeros({2, 2, 2});
  h.fc_weight << 1.0, 2.0, -1.0, 0.5;
  h.fc_bias << 0.1, -0.2;
  h.mlp_weight << 0.5, -1.0, 1.0, 1.0;
  h.mlp_bias << 0.0, 0.3;
  h.out_weight << 2.0, -1.0;
  h.out_bias = 0.25;
  return h;
}

Dataset small_corpus(std::size_t n_fake, std::size_t n_real, std::uint64_t seed) {
  synthetic::PlantedOptions opts;
  opts.n_fake = n_fake;
  opts.n_real = n_real;
  opts.seed = seed;
  return synthetic::planted_corpus(opts).dataset;
}

}  // namespace

TEST_CASE("forward pass matches a hand computation") {
  const auto head = tiny_head();
  // groups (1, 0) and (0, 1) average to (0.5, 0.5)
  //   h = [1*0.5 + 2*0.5 + 0.1, -0.5 + 0.25 - 0.2] = [1.6, -0.45]
  //   a = relu([0.8 + 0.45, 1.6 - 0.45 + 0.3]) = [1.25, 1.45]
  //   z = 2*1.25 - 1.45 + 0.25 = 1.3
  const std::vector<GroupEmbedding> groups = {group({1.0, 0.0}), group({0.0, 1.0})};
  const auto emb = embed_article(head, groups);
  CHECK(emb.vector[0] == doctest::Approx(1.6));
  CHECK(emb.vector[1] == doctest::Approx(-0.45));
  CHECK(score(head, emb) == doctest::Approx(1.0 / (1.0 + std::exp(-1.3))).epsilon(1e-12));
}

TEST_CASE("mean embedding checks its input") {
  CHECK_THROWS_AS(mean_embedding({}), ValidationError);
  const std::vector<GroupEmbedding> mixed = {group({1.0, 0.0}), group({1.0})};
  CHECK_THROWS_AS(mean_embedding(mixed), ValidationError);
  const std::vector<GroupEmbedding> one = {group({0.3, 0.7})};
  CHECK(mean_embedding(one) == one[0].vector);
}

TEST_CASE("binary cross-entropy anchors") {
  CHECK(std::abs(binary_cross_entropy(0.5, Label::fake) - std::log(2.0)) < 1e-9);
  CHECK(std::abs(binary_cross_entropy(0.9, Label::real) + std::log(0.1)) < 1e-9);
  CHECK(binary_cross_entropy(0.0, Label::fake) == doctest::Approx(-std::log(kLossEpsilon)));
  CHECK(std::isfinite(binary_cross_entropy(1.0, Label::real)));
}

TEST_CASE("sigmoid is stable at the extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) == 0.0);
  const auto head = tiny_head();
  ClassifierHead big = head;
  big.out_bias = 1e6;
  const std::vector<GroupEmbedding> g = {group({1.0, 0.0})};
  const double s = score(big, embed_article(big, g));
  CHECK(s < 1.0);
  CHECK(s > 0.0);
}

TEST_CASE("gradient agrees with central differences") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const ClassifierHead head = ClassifierHead::initialize({4, 5, 3}, 100 + trial);
    std::vector<PooledExample> batch;
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd x(4);
      for (auto& v : x) v = rng.uniform(-1.0, 1.0);
      batch.push_back({x, rng.bernoulli(0.5) ? Label::fake : Label::real});
    }
    const auto analytic = loss_and_gradient(head, batch).gradient.flatten();
    auto params = head.flatten();
    ClassifierHead probe = head;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double orig = params[k];
      params[k] = orig + 1e-5;
      probe.assign(params);
      const double up = loss_and_gradient(probe, batch).loss;
      params[k] = orig - 1e-5;
      probe.assign(params);
      const double down = loss_and_gradient(probe, batch).loss;
      params[k] = orig;
      CHECK(analytic[k] == doctest::Approx((up - down) / 2e-5).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("loss and loss_and_gradient agree") {
  const auto head = ClassifierHead::initialize({3, 4, 2}, 1);
  Eigen::VectorXd x(3);
  x << 0.2, -0.4, 0.9;
  const std::vector<PooledExample> pooled = {{x, Label::fake}};
  GroupEmbedding g;
  g.vector = x;
  const std::vector<GroupEmbedding> groups = {g};
  const std::vector<LabeledEmbedding> labeled = {{embed_article(head, groups), Label::fake}};
  CHECK(loss(head, labeled) == doctest::Approx(loss_and_gradient(head, pooled).loss));
  CHECK_THROWS_AS(loss(head, {}), ValidationError);
}

TEST_CASE("head parameters flatten and assign in a fixed order") {
  const auto head = ClassifierHead::initialize({6, 4, 3}, 9);
  CHECK(head.parameter_count() == 6 * 4 + 4 + 4 * 3 + 3 + 3 + 1);
  CHECK(head.fc_bias.isZero());
  CHECK(head.mlp_bias.isZero());
  CHECK(head.out_bias == 0.0);
  auto copy = ClassifierHead::zeros(head.shape());
  copy.assign(head.flatten());
  CHECK(copy == head);
  CHECK(head.flatten()[1] == head.fc_weight(0, 1));
  CHECK_THROWS_AS(copy.assign(std::vector<double>(3)), ValidationError);
  CHECK(ClassifierHead::initialize({6, 4, 3}, 9) == head);
  CHECK_FALSE(ClassifierHead::initialize({6, 4, 3}, 10) == head);
}

TEST_CASE("sub-mode threshold is inclusive") {
  CHECK(decide_sub("a", {0.8}, 0.8).verdict == Label::fake);
  CHECK(decide_sub("a", {0.6, 1.0}, 0.8).verdict == Label::fake);
  CHECK(decide_sub("a", {0.79999}, 0.8).verdict == Label::real);
  const auto r = decide_sub("a", {0.2, 0.4}, 0.5);
  CHECK(r.aggregate_score == doctest::Approx(0.3));
  CHECK(r.chunk_scores.size() == 2);
  CHECK_THROWS_AS(decide_sub("a", {}, 0.8), ValidationError);
  CHECK_THROWS_AS(decide_sub("a", {0.5}, 0.0), ConfigError);
  CHECK_THROWS_AS(decide_sub("a", {0.5}, 1.0), ConfigError);
}

TEST_CASE("prediction records round trip through JSON") {
  const PredictionRecord r{"x", PredictionMode::sub, {0.25, 0.5}, 0.375, 0.8, Label::real};
  const auto back = PredictionRecord::from_json(Json::parse(r.to_json().dump()));
  CHECK(back.article_id == "x");
  CHECK(back.chunk_scores == r.chunk_scores);
  CHECK(back.aggregate_score == r.aggregate_score);
  CHECK(back.verdict == Label::real);
  CHECK(r.to_json().dump() ==
        R"({"id":"x","mode":"sub","chunk_scores":[0.25,0.5],"aggregate_score":0.375,"theta":0.8,"verdict":0})");
}

TEST_CASE("zero epochs returns the initialisation") {
  const auto ds = small_corpus(4, 4, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 21;
  const auto ckpt = train(ds, Dataset{}, cfg);
  const auto init = ClassifierHead::initialize({MockEncoder::kDefaultDim, 128, 64}, 21);
  CHECK(ckpt.head == init);
  CHECK(ckpt.manifest.history.empty());
  CHECK(ckpt.manifest.selected_epoch == 0);
}

TEST_CASE("training is deterministic and records its history") {
  const auto ds = small_corpus(20, 20, 2);
  const auto [tr, va] = split_dataset(ds, 4, 0.25);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 4;
  const auto a = train(tr, va, cfg);
  cfg.threads = 3;
  const auto b = train(tr, va, cfg);
  CHECK(a.head == b.head);
  CHECK(a.manifest.history.size() == 2);
  CHECK(a.manifest.val_metrics.has_value());
  CHECK(a.manifest.train_data.sha256 == fingerprint(tr));
  CHECK(a.manifest.encoder_fingerprint == "mock-v1/seed=0/dim=32");
  cfg.seed = 5;
  CHECK_FALSE(train(tr, va, cfg).head == a.head);
}

TEST_CASE("training preconditions") {
  auto ds = small_corpus(2, 2, 3);
  TrainConfig cfg;
  cfg.fine_tune = true;
  CHECK_THROWS_AS(train(ds, Dataset{}, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.window_train = 511;
  CHECK_THROWS_AS(train(ds, Dataset{}, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(ds, Dataset{}, cfg), ConfigError);
  cfg = TrainConfig{};
  ds.articles[1].label.reset();
  CHECK_THROWS_AS(train(ds, Dataset{}, cfg), ValidationError);
  CHECK_THROWS_AS(train(Dataset{}, Dataset{}, cfg), ValidationError);
}

TEST_CASE("checkpoints round trip and guard compatibility") {
  TempDir dir("model");
  const auto ds = small_corpus(6, 6, 4);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.fc_dim = 16;
  cfg.hidden_dim = 8;
  const auto ckpt = train(ds, Dataset{}, cfg);
  save_checkpoint(ckpt, dir / "ck");
  const auto back = load_checkpoint(dir / "ck");
  CHECK(back.head == ckpt.head);
  CHECK(back.manifest.to_json() == ckpt.manifest.to_json());

  CHECK_NOTHROW(Classifier::open(dir / "ck"));
  EncoderSpec other;
  other.mock_seed = 1;
  CHECK_THROWS_AS(Classifier(back, make_encoder(other)), ConfigError);

  std::ofstream(dir / "ck" / "head.bin", std::ios::binary | std::ios::trunc) << "CFHEAD01";
  CHECK_THROWS_AS(load_checkpoint(dir / "ck"), ConfigError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing"), ConfigError);
}

TEST_CASE("avg and sub agree on single-group articles") {
  const auto ds = small_corpus(4, 4, 5);
  TrainConfig cfg;
  cfg.epochs = 1;
  const Classifier clf(train(ds, Dataset{}, cfg), make_encoder(EncoderSpec{}));
  Rng rng(8);
  const auto a = make_article("s", synthetic::neutral_text(rng, 60));
  const auto avg = clf.predict_avg(a);
  const auto sub = clf.predict_sub(a);
  REQUIRE(sub.chunk_scores.size() == 1);
  CHECK(avg.chunk_scores.empty());
  CHECK(avg.aggregate_score == sub.chunk_scores[0]);
  CHECK(avg.theta == kAvgThreshold);
}

TEST_CASE("truncation only sees the first tokens") {
  const auto ds = small_corpus(4, 4, 6);
  TrainConfig cfg;
  cfg.epochs = 1;
  const Classifier clf(train(ds, Dataset{}, cfg), make_encoder(EncoderSpec{}));
  Rng rng(9);
  const std::string head_text = synthetic::neutral_text(rng, 510);
  const auto a = make_article("a", head_text + " " + synthetic::neutral_text(rng, 300));
  const auto b = make_article("a", head_text + " miracle cure hoax bleach");
  const auto ta = clf.predict_truncated(a, 512, 0.8);
  CHECK(ta.mode == PredictionMode::truncated);
  CHECK(ta.aggregate_score == clf.predict_truncated(b, 512, 0.8).aggregate_score);
  CHECK(clf.predict_truncated(a, 100, 0.8).aggregate_score != ta.aggregate_score);
  CHECK_THROWS_AS(clf.predict_truncated(a, 2, 0.8), ConfigError);
}

TEST_CASE("batch prediction keeps input order for any thread count") {
  const auto ds = small_corpus(6, 6, 7);
  TrainConfig cfg;
  cfg.epochs = 1;
  const Classifier clf(train(ds, Dataset{}, cfg), make_encoder(EncoderSpec{}));
  PredictOptions opts;
  opts.threads = 1;
  const auto one = predict_all(clf, ds.articles, opts);
  opts.threads = 4;
  const auto four = predict_all(clf, ds.articles, opts);
  REQUIRE(one.size() == ds.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].article_id == ds.articles[i].id);
    CHECK(one[i].to_json() == four[i].to_json());
  }
}
