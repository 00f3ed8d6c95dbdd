#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crossfake/chunking.hpp"
#include "crossfake/corpus.hpp"
#include "crossfake/encoder.hpp"
#include "crossfake/eval.hpp"
#include "crossfake/json_io.hpp"

namespace crossfake {

inline constexpr double kDefaultTheta = 0.8;
// Decision boundary for avg mode, which has no tuned threshold.
inline constexpr double kAvgThreshold = 0.5;
// Probability clamp inside the loss.
inline constexpr double kLossEpsilon = 1e-7;

struct HeadShape {
  std::size_t input_dim = 0;
  std::size_t fc_dim = 128;
  std::size_t hidden_dim = 64;

  bool operator==(const HeadShape&) const = default;
};

// Classifier head on top of the encoder:
//   h     = fc_weight * mean(group vectors) + fc_bias
//   score = sigmoid(out_weight . relu(mlp_weight * h + mlp_bias) + out_bias)
struct ClassifierHead {
  Eigen::MatrixXd fc_weight;   // fc_dim x input_dim
  Eigen::VectorXd fc_bias;     // fc_dim
  Eigen::MatrixXd mlp_weight;  // hidden_dim x fc_dim
  Eigen::VectorXd mlp_bias;    // hidden_dim
  Eigen::VectorXd out_weight;  // hidden_dim
  double out_bias = 0.0;

  /// Glorot-uniform fc/output weights, He-uniform hidden weights, zero biases.
  static ClassifierHead initialize(const HeadShape& shape, std::uint64_t seed);
  static ClassifierHead zeros(const HeadShape& shape);

  HeadShape shape() const noexcept;
  std::size_t parameter_count() const noexcept;

  /// Parameters in declaration order, row-major within matrices.
  std::vector<double> flatten() const;
  void assign(std::span<const double> params);

  bool all_finite() const noexcept;
  bool operator==(const ClassifierHead& other) const;
};

struct ArticleEmbedding {
  std::string article_id;
  Eigen::VectorXd vector;  // fc output
};

/// Unweighted mean of the group vectors. Throws ValidationError when empty
/// or when lengths differ.
Eigen::VectorXd mean_embedding(std::span<const GroupEmbedding> groups);

/// fc(mean of group vectors).
ArticleEmbedding embed_article(const ClassifierHead& head, std::span<const GroupEmbedding> groups);

double sigmoid(double z) noexcept;

/// Fake-class probability in (0, 1) of an fc-projected embedding.
double score(const ClassifierHead& head, const ArticleEmbedding& emb);

/// A single group pushed through fc and the classifier.
double score_group(const ClassifierHead& head, const GroupEmbedding& group);

/// -[y log p + (1-y) log(1-p)] with p clamped to [kLossEpsilon, 1-kLossEpsilon].
double binary_cross_entropy(double p, Label y) noexcept;

struct LabeledEmbedding {
  ArticleEmbedding embedding;
  Label label;
};

/// Mean BCE over the batch. Throws ValidationError on an empty batch.
double loss(const ClassifierHead& head, std::span<const LabeledEmbedding> batch);

// Pre-fc article vector (mean of group embeddings) with its label.
struct PooledExample {
  Eigen::VectorXd pooled;
  Label label;
};

struct LossGradient {
  double loss = 0.0;
  ClassifierHead gradient;  // same shapes as the head
};

/// Mean BCE and its exact gradient with respect to every head parameter.
LossGradient loss_and_gradient(const ClassifierHead& head, std::span<const PooledExample> batch);

enum class Optimizer : std::uint8_t { sgd };

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t epochs = 3;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  std::size_t window_train = kTrainWindow;
  Optimizer optimizer = Optimizer::sgd;
  double theta = kDefaultTheta;
  EncoderSpec encoder;
  bool fine_tune = false;
  std::size_t fc_dim = 128;
  std::size_t hidden_dim = 64;
  bool include_title = false;
  std::size_t threads = 0;  // embedding workers; 0 = hardware concurrency

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  Json to_json() const;
  static TrainConfig from_json(const Json& j);
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
};

struct DataFingerprint {
  std::string name;
  std::size_t size = 0;
  std::string sha256;
};

// Binds a trained head to the exact tokenizer and encoder it was trained
// with; prediction refuses any other combination.
struct Manifest {
  Language language = Language::en;
  std::string tokenizer_id;
  std::string encoder_fingerprint;
  TrainConfig config;
  DataFingerprint train_data;
  std::optional<DataFingerprint> val_data;
  std::vector<EpochRecord> history;
  std::size_t selected_epoch = 0;
  std::optional<RunMetrics> val_metrics;
  std::optional<double> val_loss;
  Json run_config;  // resolved CLI configuration, when trained from the CLI

  Json to_json() const;
  static Manifest from_json(const Json& j);
};

struct Checkpoint {
  ClassifierHead head;
  Manifest manifest;
};

/// SGD on per-article BCE over fc(mean of window_train-token group
/// embeddings). Keeps the epoch with the best validation accuracy (ties to
/// lower validation loss, then earlier epoch); with no validation set the
/// last epoch is kept. Deterministic for fixed data, config and seed.
Checkpoint train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                 const EncoderBundle& bundle);

/// Builds the encoder from cfg.encoder.
Checkpoint train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

enum class PredictionMode : std::uint8_t { avg, sub, truncated };

std::optional<PredictionMode> parse_mode(std::string_view name) noexcept;
std::string_view to_string(PredictionMode mode) noexcept;

struct PredictionRecord {
  std::string article_id;
  PredictionMode mode = PredictionMode::sub;
  std::vector<double> chunk_scores;  // empty in avg mode
  double aggregate_score = 0.0;
  double theta = kDefaultTheta;
  Label verdict = Label::real;

  Json to_json() const;
  static PredictionRecord from_json(const Json& j);
};

/// Fake iff the mean chunk score is >= theta. Throws ConfigError unless
/// 0 < theta < 1 and ValidationError on no scores.
PredictionRecord decide_sub(std::string article_id, std::vector<double> chunk_scores,
                            double theta, PredictionMode mode = PredictionMode::sub);

/// Score of fc(mean of groups); verdict at kAvgThreshold.
PredictionRecord aggregate_avg(const ClassifierHead& head, std::string article_id,
                               std::span<const GroupEmbedding> groups);

/// Scores each group through the full pipeline, then decide_sub.
PredictionRecord aggregate_sub(const ClassifierHead& head, std::string article_id,
                               std::span<const GroupEmbedding> groups, double theta);

// A checkpoint paired with a compatible encoder. Read-only after
// construction; predictions may run concurrently.
class Classifier {
 public:
  /// Throws ConfigError when the bundle's tokenizer or encoder differ from
  /// the ones recorded in the manifest.
  Classifier(Checkpoint checkpoint, EncoderBundle bundle);

  /// Loads `dir` and rebuilds the recorded encoder; `model_dir` overrides the
  /// recorded model location (the weights fingerprint must still match).
  static Classifier open(const std::filesystem::path& dir,
                         const std::optional<std::filesystem::path>& model_dir = std::nullopt);

  const Checkpoint& checkpoint() const noexcept { return checkpoint_; }
  const EncoderBundle& bundle() const noexcept { return bundle_; }

  std::vector<GroupEmbedding> embed_groups(const NewsArticle& article, std::size_t window) const;

  PredictionRecord predict_avg(const NewsArticle& article, std::size_t window = kTestWindow) const;
  PredictionRecord predict_sub(const NewsArticle& article, std::size_t window = kTestWindow,
                               double theta = kDefaultTheta) const;
  /// Only the first min(limit - boundary tokens, length) tokens are scored.
  PredictionRecord predict_truncated(const NewsArticle& article, std::size_t limit = 512,
                                     double theta = kDefaultTheta) const;

 private:
  Checkpoint checkpoint_;
  EncoderBundle bundle_;
  TokenizeOptions tokenize_options_;
};

struct PredictOptions {
  PredictionMode mode = PredictionMode::sub;
  std::size_t window = kTestWindow;
  std::size_t limit = 512;
  double theta = kDefaultTheta;
  std::size_t threads = 0;
};

PredictionRecord predict(const Classifier& clf, const NewsArticle& article,
                         const PredictOptions& options);

/// One record per article, in input order regardless of thread count.
std::vector<PredictionRecord> predict_all(const Classifier& clf,
                                          std::span<const NewsArticle> articles,
                                          const PredictOptions& options);

}  // namespace crossfake
