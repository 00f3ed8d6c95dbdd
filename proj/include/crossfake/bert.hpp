#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crossfake/encoder.hpp"

namespace crossfake {

// Inference-only BERT encoder reading a Hugging Face model directory
// (config.json, model.safetensors). Weights are frozen.
class BertEncoder final : public EncoderBackend {
 public:
  using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::VectorXf;

  struct Config {
    std::size_t vocab_size = 0;
    std::size_t hidden = 0;
    std::size_t layers = 0;
    std::size_t heads = 0;
    std::size_t intermediate = 0;
    std::size_t max_positions = 0;
    double layer_norm_eps = 1e-12;
    std::string activation = "gelu";
  };

  static BertEncoder load(const std::filesystem::path& model_dir, Pooling pooling,
                          TokenId cls_id, TokenId sep_id);

  const EncoderInfo& info() const noexcept override { return info_; }
  std::string fingerprint() const override { return fingerprint_; }
  Eigen::VectorXd embed(std::span<const TokenId> tokens) const override;

  /// Final-layer states, one row per position of `ids` (special tokens
  /// included by the caller).
  Matrix hidden_states(std::span<const TokenId> ids) const;

  const Config& config() const noexcept { return config_; }

 private:
  struct Linear {
    Matrix weight;  // out x in
    Vector bias;
  };
  struct Norm {
    Vector gamma;
    Vector beta;
  };
  struct Layer {
    Linear query, key, value, attn_out;
    Norm attn_norm;
    Linear ffn_in, ffn_out;
    Norm out_norm;
  };

  Matrix apply(const Linear& l, const Matrix& x) const;
  void normalize(Matrix& x, const Norm& n) const;
  void activate(Matrix& x) const;

  Config config_;
  EncoderInfo info_;
  std::string fingerprint_;
  Pooling pooling_ = Pooling::cls;
  TokenId cls_id_ = 0;
  TokenId sep_id_ = 0;
  Matrix word_embeddings_;
  Matrix position_embeddings_;
  Vector token_type_embedding_;
  Norm embedding_norm_;
  std::vector<Layer> layers_;
};

}  // namespace crossfake
