#include "crossfake/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/hashing.hpp"
#include "crossfake/parallel.hpp"
#include "crossfake/rng.hpp"

namespace crossfake {
namespace {

constexpr double kMinScore = std::numeric_limits<double>::min();
const double kMaxScore = std::nextafter(1.0, 0.0);

void fill_uniform(Eigen::MatrixXd& m, double limit, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
  }
}

double logit(const ClassifierHead& head, const Eigen::VectorXd& h) {
  const Eigen::VectorXd hidden = (head.mlp_weight * h + head.mlp_bias).cwiseMax(0.0);
  return head.out_weight.dot(hidden) + head.out_bias;
}

Eigen::VectorXd project(const ClassifierHead& head, const Eigen::VectorXd& pooled) {
  if (pooled.size() != head.fc_weight.cols()) {
    throw ValidationError(fmt::format("embedding has length {}, head expects {}", pooled.size(),
                                      head.fc_weight.cols()));
  }
  if (!pooled.allFinite()) throw ValidationError("embedding has non-finite entries");
  return head.fc_weight * pooled + head.fc_bias;
}

double score_vector(const ClassifierHead& head, const Eigen::VectorXd& h) {
  if (!h.allFinite()) throw ValidationError("embedding has non-finite entries");
  return std::clamp(sigmoid(logit(head, h)), kMinScore, kMaxScore);
}

void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ConfigError(fmt::format("theta must lie in (0, 1), got {}", theta));
  }
}

// Pre-fc vectors for every article, computed in parallel but stored by index.
std::vector<Eigen::VectorXd> pool_articles(const Dataset& ds, const EncoderBundle& bundle,
                                           std::size_t window, const TokenizeOptions& tok,
                                           std::size_t threads) {
  std::vector<Eigen::VectorXd> pooled(ds.size());
  parallel_for(ds.size(), threads, [&](std::size_t i) {
    const auto& article = ds.articles[i];
    const auto groups = slice_groups(tokenize(article, *bundle.tokenizer, tok), window);
    const auto embs = encode_article(*bundle.encoder, groups);
    pooled[i] = mean_embedding(embs);
  });
  return pooled;
}

struct Evaluation {
  double loss = 0.0;
  RunMetrics metrics;
};

Evaluation evaluate_pooled(const ClassifierHead& head, std::span<const PooledExample> examples) {
  std::vector<Label> preds;
  std::vector<Label> labels;
  Evaluation out;
  for (const auto& ex : examples) {
    const double p = score_vector(head, project(head, ex.pooled));
    out.loss += binary_cross_entropy(p, ex.label);
    preds.push_back(p >= kAvgThreshold ? Label::fake : Label::real);
    labels.push_back(ex.label);
  }
  out.loss /= static_cast<double>(examples.size());
  out.metrics = compute_metrics(preds, labels);
  return out;
}

std::vector<PooledExample> labeled_examples(const Dataset& ds,
                                            std::vector<Eigen::VectorXd> pooled) {
  std::vector<PooledExample> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out.push_back({std::move(pooled[i]), *ds.articles[i].label});
  }
  return out;
}

void require_labeled(const Dataset& ds, std::string_view role) {
  for (const auto& a : ds.articles) {
    if (!a.label) {
      throw ValidationError(fmt::format("{} article '{}' has no label", role, a.id));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Head

ClassifierHead ClassifierHead::initialize(const HeadShape& shape, std::uint64_t seed) {
  if (shape.input_dim == 0 || shape.fc_dim == 0 || shape.hidden_dim == 0) {
    throw ConfigError("head dimensions must be positive");
  }
  ClassifierHead head = zeros(shape);
  Rng rng(mix64(seed ^ 0x68656164ULL));
  const auto in = static_cast<double>(shape.input_dim);
  const auto fc = static_cast<double>(shape.fc_dim);
  const auto hid = static_cast<double>(shape.hidden_dim);
  fill_uniform(head.fc_weight, std::sqrt(6.0 / (in + fc)), rng);
  fill_uniform(head.mlp_weight, std::sqrt(6.0 / fc), rng);
  const double out_limit = std::sqrt(6.0 / (hid + 1.0));
  for (Eigen::Index i = 0; i < head.out_weight.size(); ++i) {
    head.out_weight[i] = rng.uniform(-out_limit, out_limit);
  }
  return head;
}

ClassifierHead ClassifierHead::zeros(const HeadShape& shape) {
  const auto in = static_cast<Eigen::Index>(shape.input_dim);
  const auto fc = static_cast<Eigen::Index>(shape.fc_dim);
  const auto hid = static_cast<Eigen::Index>(shape.hidden_dim);
  return ClassifierHead{Eigen::MatrixXd::Zero(fc, in), Eigen::VectorXd::Zero(fc),
                        Eigen::MatrixXd::Zero(hid, fc), Eigen::VectorXd::Zero(hid),
                        Eigen::VectorXd::Zero(hid), 0.0};
}

HeadShape ClassifierHead::shape() const noexcept {
  return {static_cast<std::size_t>(fc_weight.cols()), static_cast<std::size_t>(fc_weight.rows()),
          static_cast<std::size_t>(mlp_weight.rows())};
}

std::size_t ClassifierHead::parameter_count() const noexcept {
  return static_cast<std::size_t>(fc_weight.size() + fc_bias.size() + mlp_weight.size() +
                                  mlp_bias.size() + out_weight.size() + 1);
}

std::vector<double> ClassifierHead::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  const auto push_matrix = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    }
  };
  const auto push_vector = [&](const Eigen::VectorXd& v) {
    out.insert(out.end(), v.data(), v.data() + v.size());
  };
  push_matrix(fc_weight);
  push_vector(fc_bias);
  push_matrix(mlp_weight);
  push_vector(mlp_bias);
  push_vector(out_weight);
  out.push_back(out_bias);
  return out;
}

void ClassifierHead::assign(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw ValidationError(fmt::format("head expects {} parameters, got {}", parameter_count(),
                                      params.size()));
  }
  std::size_t k = 0;
  const auto take_matrix = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = params[k++];
    }
  };
  const auto take_vector = [&](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = params[k++];
  };
  take_matrix(fc_weight);
  take_vector(fc_bias);
  take_matrix(mlp_weight);
  take_vector(mlp_bias);
  take_vector(out_weight);
  out_bias = params[k];
}

bool ClassifierHead::all_finite() const noexcept {
  return fc_weight.allFinite() && fc_bias.allFinite() && mlp_weight.allFinite() &&
         mlp_bias.allFinite() && out_weight.allFinite() && std::isfinite(out_bias);
}

bool ClassifierHead::operator==(const ClassifierHead& other) const {
  return shape() == other.shape() && flatten() == other.flatten();
}

// ---------------------------------------------------------------------------
// Forward pass and loss

Eigen::VectorXd mean_embedding(std::span<const GroupEmbedding> groups) {
  if (groups.empty()) throw ValidationError("cannot average an empty list of group embeddings");
  Eigen::VectorXd sum = groups.front().vector;
  for (std::size_t i = 1; i < groups.size(); ++i) {
    if (groups[i].vector.size() != sum.size()) {
      throw ValidationError(fmt::format("group {} has length {}, expected {}", i,
                                        groups[i].vector.size(), sum.size()));
    }
    sum += groups[i].vector;
  }
  return sum / static_cast<double>(groups.size());
}

ArticleEmbedding embed_article(const ClassifierHead& head, std::span<const GroupEmbedding> groups) {
  return {groups.empty() ? std::string{} : groups.front().article_id,
          project(head, mean_embedding(groups))};
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double score(const ClassifierHead& head, const ArticleEmbedding& emb) {
  if (emb.vector.size() != head.mlp_weight.cols()) {
    throw ValidationError(fmt::format("article embedding has length {}, head expects {}",
                                      emb.vector.size(), head.mlp_weight.cols()));
  }
  return score_vector(head, emb.vector);
}

double score_group(const ClassifierHead& head, const GroupEmbedding& group) {
  return score_vector(head, project(head, group.vector));
}

double binary_cross_entropy(double p, Label y) noexcept {
  const double q = std::clamp(p, kLossEpsilon, 1.0 - kLossEpsilon);
  return y == Label::fake ? -std::log(q) : -std::log(1.0 - q);
}

double loss(const ClassifierHead& head, std::span<const LabeledEmbedding> batch) {
  if (batch.empty()) throw ValidationError("loss: empty batch");
  double total = 0.0;
  for (const auto& ex : batch) total += binary_cross_entropy(score(head, ex.embedding), ex.label);
  return total / static_cast<double>(batch.size());
}

LossGradient loss_and_gradient(const ClassifierHead& head, std::span<const PooledExample> batch) {
  if (batch.empty()) throw ValidationError("loss: empty batch");
  LossGradient out{0.0, ClassifierHead::zeros(head.shape())};
  auto& g = out.gradient;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const Eigen::VectorXd h = project(head, ex.pooled);
    const Eigen::VectorXd pre = head.mlp_weight * h + head.mlp_bias;
    const Eigen::VectorXd hidden = pre.cwiseMax(0.0);
    const double p = std::clamp(sigmoid(head.out_weight.dot(hidden) + head.out_bias), kMinScore,
                                kMaxScore);
    const double y = ex.label == Label::fake ? 1.0 : 0.0;
    out.loss += binary_cross_entropy(p, ex.label) * inv_n;

    // d(BCE)/dz = p - y inside the clamp, zero where the clamp is active.
    const bool clamped = p <= kLossEpsilon || p >= 1.0 - kLossEpsilon;
    const double dz = clamped ? 0.0 : (p - y) * inv_n;
    if (dz == 0.0) continue;
    g.out_weight += dz * hidden;
    g.out_bias += dz;
    const Eigen::VectorXd dpre =
        (dz * head.out_weight).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    g.mlp_weight += dpre * h.transpose();
    g.mlp_bias += dpre;
    const Eigen::VectorXd dh = head.mlp_weight.transpose() * dpre;
    g.fc_weight += dh * ex.pooled.transpose();
    g.fc_bias += dh;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (window_train < 1) throw ConfigError("window_train must be at least 1");
  check_theta(theta);
  if (fc_dim < 1 || hidden_dim < 1) throw ConfigError("head widths must be positive");
}

Checkpoint train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                 const EncoderBundle& bundle) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  require_labeled(train_set, "training");
  require_labeled(val_set, "validation");
  if (!val_set.empty() && val_set.language != train_set.language) {
    throw ValidationError("training and validation sets differ in language");
  }
  const auto& info = bundle.encoder->info();
  if (cfg.fine_tune && !info.trainable) {
    throw ConfigError(fmt::format("encoder '{}' is frozen; fine-tuning is not supported", info.name));
  }
  if (cfg.window_train > info.max_group_tokens()) {
    throw ConfigError(fmt::format("window_train {} exceeds encoder limit {}", cfg.window_train,
                                  info.max_group_tokens()));
  }

  const TokenizeOptions tok{cfg.include_title};
  const auto train_examples = labeled_examples(
      train_set, pool_articles(train_set, bundle, cfg.window_train, tok, cfg.threads));
  const auto val_examples =
      labeled_examples(val_set, pool_articles(val_set, bundle, cfg.window_train, tok, cfg.threads));

  ClassifierHead head =
      ClassifierHead::initialize({info.dim, cfg.fc_dim, cfg.hidden_dim}, cfg.seed);

  Manifest manifest;
  manifest.language = train_set.language;
  manifest.tokenizer_id = bundle.tokenizer->id();
  manifest.encoder_fingerprint = bundle.encoder->fingerprint();
  manifest.config = cfg;
  manifest.train_data = {train_set.name, train_set.size(), fingerprint(train_set)};
  if (!val_set.empty()) manifest.val_data = DataFingerprint{val_set.name, val_set.size(), fingerprint(val_set)};

  ClassifierHead best = head;
  std::optional<Evaluation> best_eval;
  if (!val_examples.empty()) best_eval = evaluate_pooled(head, val_examples);

  Rng shuffle_rng(mix64(cfg.seed ^ 0x73687566ULL));
  std::vector<std::size_t> order(train_examples.size());
  std::vector<PooledExample> batch;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train_examples[order[k]]);
      const auto step = loss_and_gradient(head, batch);
      epoch_loss += step.loss * static_cast<double>(batch.size());
      head.fc_weight -= cfg.learning_rate * step.gradient.fc_weight;
      head.fc_bias -= cfg.learning_rate * step.gradient.fc_bias;
      head.mlp_weight -= cfg.learning_rate * step.gradient.mlp_weight;
      head.mlp_bias -= cfg.learning_rate * step.gradient.mlp_bias;
      head.out_weight -= cfg.learning_rate * step.gradient.out_weight;
      head.out_bias -= cfg.learning_rate * step.gradient.out_bias;
    }
    if (!head.all_finite()) {
      throw ValidationError(fmt::format("training diverged in epoch {}; lower the learning rate",
                                        epoch));
    }

    EpochRecord record{epoch, epoch_loss / static_cast<double>(order.size()), {}, {}};
    if (val_examples.empty()) {
      best = head;
      manifest.selected_epoch = epoch;
    } else {
      auto ev = evaluate_pooled(head, val_examples);
      record.val_loss = ev.loss;
      record.val_accuracy = ev.metrics.values.accuracy;
      const bool better =
          epoch == 1 || ev.metrics.values.accuracy > best_eval->metrics.values.accuracy ||
          (ev.metrics.values.accuracy == best_eval->metrics.values.accuracy &&
           ev.loss < best_eval->loss);
      if (better) {
        best = head;
        best_eval = std::move(ev);
        manifest.selected_epoch = epoch;
      }
    }
    manifest.history.push_back(record);
  }

  if (best_eval) {
    manifest.val_metrics = best_eval->metrics;
    manifest.val_loss = best_eval->loss;
  }
  return {std::move(best), std::move(manifest)};
}

Checkpoint train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
  return train(train_set, val_set, cfg, make_encoder(cfg.encoder));
}

// ---------------------------------------------------------------------------
// Prediction

std::optional<PredictionMode> parse_mode(std::string_view name) noexcept {
  if (name == "avg") return PredictionMode::avg;
  if (name == "sub") return PredictionMode::sub;
  if (name == "truncated") return PredictionMode::truncated;
  return std::nullopt;
}

std::string_view to_string(PredictionMode mode) noexcept {
  switch (mode) {
    case PredictionMode::avg: return "avg";
    case PredictionMode::sub: return "sub";
    case PredictionMode::truncated: return "truncated";
  }
  return "?";
}

Json PredictionRecord::to_json() const {
  Json j;
  j["id"] = article_id;
  j["mode"] = to_string(mode);
  j["chunk_scores"] = chunk_scores;
  j["aggregate_score"] = aggregate_score;
  j["theta"] = theta;
  j["verdict"] = static_cast<int>(verdict);
  return j;
}

PredictionRecord PredictionRecord::from_json(const Json& j) {
  PredictionRecord r;
  r.article_id = j.at("id").get<std::string>();
  const auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw ValidationError("prediction record has an unknown mode");
  r.mode = *mode;
  r.chunk_scores = j.at("chunk_scores").get<std::vector<double>>();
  r.aggregate_score = j.at("aggregate_score").get<double>();
  r.theta = j.at("theta").get<double>();
  const int verdict = j.at("verdict").get<int>();
  if (verdict != 0 && verdict != 1) throw ValidationError("prediction verdict must be 0 or 1");
  r.verdict = verdict == 1 ? Label::fake : Label::real;
  return r;
}

PredictionRecord decide_sub(std::string article_id, std::vector<double> chunk_scores,
                            double theta, PredictionMode mode) {
  check_theta(theta);
  if (chunk_scores.empty()) throw ValidationError("no chunk scores to aggregate");
  double sum = 0.0;
  for (double s : chunk_scores) sum += s;
  const double mean = sum / static_cast<double>(chunk_scores.size());
  return {std::move(article_id), mode, std::move(chunk_scores), mean, theta,
          mean >= theta ? Label::fake : Label::real};
}

PredictionRecord aggregate_avg(const ClassifierHead& head, std::string article_id,
                               std::span<const GroupEmbedding> groups) {
  const double p = score(head, embed_article(head, groups));
  return {std::move(article_id), PredictionMode::avg, {}, p, kAvgThreshold,
          p >= kAvgThreshold ? Label::fake : Label::real};
}

PredictionRecord aggregate_sub(const ClassifierHead& head, std::string article_id,
                               std::span<const GroupEmbedding> groups, double theta) {
  std::vector<double> scores;
  scores.reserve(groups.size());
  for (const auto& g : groups) scores.push_back(score_group(head, g));
  return decide_sub(std::move(article_id), std::move(scores), theta);
}

Classifier::Classifier(Checkpoint checkpoint, EncoderBundle bundle)
    : checkpoint_(std::move(checkpoint)), bundle_(std::move(bundle)) {
  const auto& m = checkpoint_.manifest;
  if (bundle_.tokenizer->id() != m.tokenizer_id) {
    throw ConfigError(fmt::format("checkpoint was trained with tokenizer '{}', got '{}'",
                                  m.tokenizer_id, bundle_.tokenizer->id()));
  }
  if (bundle_.encoder->info().name != m.config.encoder.name ||
      bundle_.encoder->fingerprint() != m.encoder_fingerprint) {
    throw ConfigError(fmt::format("checkpoint was trained with encoder '{}' ({}), got '{}' ({})",
                                  m.config.encoder.name, m.encoder_fingerprint,
                                  bundle_.encoder->info().name, bundle_.encoder->fingerprint()));
  }
  if (bundle_.encoder->info().dim != checkpoint_.head.shape().input_dim) {
    throw ConfigError("encoder dimension does not match the classifier head");
  }
  tokenize_options_.include_title = m.config.include_title;
}

Classifier Classifier::open(const std::filesystem::path& dir,
                            const std::optional<std::filesystem::path>& model_dir) {
  auto ckpt = load_checkpoint(dir);
  EncoderSpec spec = ckpt.manifest.config.encoder;
  if (model_dir) spec.model_dir = *model_dir;
  auto bundle = make_encoder(spec);
  return Classifier(std::move(ckpt), std::move(bundle));
}

std::vector<GroupEmbedding> Classifier::embed_groups(const NewsArticle& article,
                                                     std::size_t window) const {
  const auto seq = tokenize(article, *bundle_.tokenizer, tokenize_options_);
  return encode_article(*bundle_.encoder, slice_groups(seq, window));
}

PredictionRecord Classifier::predict_avg(const NewsArticle& article, std::size_t window) const {
  return aggregate_avg(checkpoint_.head, article.id, embed_groups(article, window));
}

PredictionRecord Classifier::predict_sub(const NewsArticle& article, std::size_t window,
                                         double theta) const {
  check_theta(theta);
  return aggregate_sub(checkpoint_.head, article.id, embed_groups(article, window), theta);
}

PredictionRecord Classifier::predict_truncated(const NewsArticle& article, std::size_t limit,
                                               double theta) const {
  check_theta(theta);
  const std::size_t overhead = bundle_.encoder->info().special_overhead;
  if (limit <= overhead) {
    throw ConfigError(fmt::format("truncation limit {} leaves no room after {} boundary tokens",
                                  limit, overhead));
  }
  auto seq = tokenize(article, *bundle_.tokenizer, tokenize_options_);
  const std::size_t keep = std::min(limit - overhead, seq.length());
  seq.tokens.resize(keep);
  const auto group = encode_group(*bundle_.encoder, TokenGroup{article.id, 0, seq.tokens, keep});
  return decide_sub(article.id, {score_group(checkpoint_.head, group)}, theta,
                    PredictionMode::truncated);
}

PredictionRecord predict(const Classifier& clf, const NewsArticle& article,
                         const PredictOptions& options) {
  switch (options.mode) {
    case PredictionMode::avg: return clf.predict_avg(article, options.window);
    case PredictionMode::sub: return clf.predict_sub(article, options.window, options.theta);
    case PredictionMode::truncated:
      return clf.predict_truncated(article, options.limit, options.theta);
  }
  throw ConfigError("unknown prediction mode");
}

std::vector<PredictionRecord> predict_all(const Classifier& clf,
                                          std::span<const NewsArticle> articles,
                                          const PredictOptions& options) {
  if (options.mode != PredictionMode::avg) check_theta(options.theta);
  std::vector<PredictionRecord> out(articles.size());
  parallel_for(articles.size(), options.threads,
               [&](std::size_t i) { out[i] = predict(clf, articles[i], options); });
  return out;
}

}  // namespace crossfake
