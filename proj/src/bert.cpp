#include "crossfake/bert.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/hashing.hpp"
#include "crossfake/json_io.hpp"
#include "crossfake/safetensors.hpp"

namespace crossfake {
namespace {

// Resolves HF parameter names across checkpoint flavours: with or without
// the "bert." prefix, LayerNorm as weight/bias or gamma/beta.
class WeightReader {
 public:
  explicit WeightReader(const SafetensorsFile& file) : file_(file) {
    prefix_ = file.contains("bert.embeddings.word_embeddings.weight") ? "bert." : "";
  }

  BertEncoder::Matrix matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
    const std::string key = resolve(name);
    const auto& info = file_.info(key);
    if (info.shape.size() != 2 || static_cast<std::size_t>(info.shape[0]) != rows ||
        static_cast<std::size_t>(info.shape[1]) != cols) {
      throw ConfigError(fmt::format("tensor '{}' has unexpected shape", key));
    }
    const auto data = file_.read(key);
    return Eigen::Map<const BertEncoder::Matrix>(data.data(), static_cast<Eigen::Index>(rows),
                                                 static_cast<Eigen::Index>(cols));
  }

  BertEncoder::Vector vector(const std::string& name, std::size_t size) const {
    const std::string key = resolve(name);
    const auto& info = file_.info(key);
    if (info.shape.size() != 1 || static_cast<std::size_t>(info.shape[0]) != size) {
      throw ConfigError(fmt::format("tensor '{}' has unexpected shape", key));
    }
    const auto data = file_.read(key);
    return Eigen::Map<const BertEncoder::Vector>(data.data(), static_cast<Eigen::Index>(size));
  }

 private:
  std::string resolve(const std::string& name) const {
    std::string key = prefix_ + name;
    if (file_.contains(key)) return key;
    for (const auto& [modern, legacy] : {std::pair{".weight", ".gamma"}, std::pair{".bias", ".beta"}}) {
      const std::string_view suffix = modern;
      if (key.find("LayerNorm") != std::string::npos && key.ends_with(suffix)) {
        std::string alt = key.substr(0, key.size() - suffix.size()) + legacy;
        if (file_.contains(alt)) return alt;
      }
    }
    throw ConfigError(fmt::format("model weights lack '{}'", key));
  }

  const SafetensorsFile& file_;
  std::string prefix_;
};

}  // namespace

BertEncoder BertEncoder::load(const std::filesystem::path& model_dir, Pooling pooling,
                              TokenId cls_id, TokenId sep_id) {
  for (const char* name : {"config.json", "model.safetensors"}) {
    if (!std::filesystem::is_regular_file(model_dir / name)) {
      throw ConfigError(fmt::format("model directory '{}' lacks {}", model_dir.string(), name));
    }
  }
  const Json cfg = read_json_file(model_dir / "config.json");
  BertEncoder enc;
  auto& c = enc.config_;
  c.vocab_size = cfg.at("vocab_size").get<std::size_t>();
  c.hidden = cfg.at("hidden_size").get<std::size_t>();
  c.layers = cfg.at("num_hidden_layers").get<std::size_t>();
  c.heads = cfg.at("num_attention_heads").get<std::size_t>();
  c.intermediate = cfg.at("intermediate_size").get<std::size_t>();
  c.max_positions = cfg.at("max_position_embeddings").get<std::size_t>();
  c.layer_norm_eps = cfg.value("layer_norm_eps", 1e-12);
  c.activation = cfg.value("hidden_act", std::string{"gelu"});
  if (c.heads == 0 || c.hidden % c.heads != 0) {
    throw ConfigError("hidden_size must be a multiple of num_attention_heads");
  }
  if (c.activation != "gelu" && c.activation != "gelu_new" &&
      c.activation != "gelu_pytorch_tanh" && c.activation != "relu") {
    throw ConfigError(fmt::format("unsupported activation '{}'", c.activation));
  }
  if (cls_id < 0 || sep_id < 0 || static_cast<std::size_t>(std::max(cls_id, sep_id)) >= c.vocab_size) {
    throw ConfigError("special token ids fall outside the model vocabulary");
  }

  const auto weights_path = model_dir / "model.safetensors";
  const auto file = SafetensorsFile::open(weights_path);
  const WeightReader w(file);
  const std::size_t h = c.hidden;

  enc.word_embeddings_ = w.matrix("embeddings.word_embeddings.weight", c.vocab_size, h);
  enc.position_embeddings_ = w.matrix("embeddings.position_embeddings.weight", c.max_positions, h);
  const auto type_vocab = cfg.value("type_vocab_size", std::size_t{2});
  enc.token_type_embedding_ =
      w.matrix("embeddings.token_type_embeddings.weight", type_vocab, h).row(0).transpose();
  enc.embedding_norm_ = {w.vector("embeddings.LayerNorm.weight", h),
                         w.vector("embeddings.LayerNorm.bias", h)};

  const auto linear = [&](const std::string& base, std::size_t out, std::size_t in) {
    return Linear{w.matrix(base + ".weight", out, in), w.vector(base + ".bias", out)};
  };
  const auto norm = [&](const std::string& base) {
    return Norm{w.vector(base + ".weight", h), w.vector(base + ".bias", h)};
  };
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string p = fmt::format("encoder.layer.{}.", l);
    enc.layers_.push_back(Layer{
        linear(p + "attention.self.query", h, h),
        linear(p + "attention.self.key", h, h),
        linear(p + "attention.self.value", h, h),
        linear(p + "attention.output.dense", h, h),
        norm(p + "attention.output.LayerNorm"),
        linear(p + "intermediate.dense", c.intermediate, h),
        linear(p + "output.dense", h, c.intermediate),
        norm(p + "output.LayerNorm"),
    });
  }

  enc.pooling_ = pooling;
  enc.cls_id_ = cls_id;
  enc.sep_id_ = sep_id;
  enc.info_ = EncoderInfo{"bert", h, c.max_positions, 2, false};
  enc.fingerprint_ = fmt::format("bert/{}/{}", sha256_file(weights_path).substr(0, 16),
                                 to_string(pooling));
  return enc;
}

BertEncoder::Matrix BertEncoder::apply(const Linear& l, const Matrix& x) const {
  Matrix y = x * l.weight.transpose();
  y.rowwise() += l.bias.transpose();
  return y;
}

void BertEncoder::normalize(Matrix& x, const Norm& n) const {
  const auto eps = static_cast<float>(config_.layer_norm_eps);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const float mean = row.mean();
    row.array() -= mean;
    const float var = row.squaredNorm() / static_cast<float>(row.size());
    row *= 1.0f / std::sqrt(var + eps);
    row = row.cwiseProduct(n.gamma.transpose()) + n.beta.transpose();
  }
}

void BertEncoder::activate(Matrix& x) const {
  if (config_.activation == "relu") {
    x = x.cwiseMax(0.0f);
  } else if (config_.activation == "gelu") {
    x = x.unaryExpr([](float v) { return 0.5f * v * (1.0f + std::erf(v * float(M_SQRT1_2))); });
  } else {
    x = x.unaryExpr([](float v) {
      const float k = std::sqrt(2.0f / float(M_PI));
      return 0.5f * v * (1.0f + std::tanh(k * (v + 0.044715f * v * v * v)));
    });
  }
}

BertEncoder::Matrix BertEncoder::hidden_states(std::span<const TokenId> ids) const {
  const auto len = static_cast<Eigen::Index>(ids.size());
  if (ids.empty() || ids.size() > config_.max_positions) {
    throw ValidationError(fmt::format("bert: sequence of {} positions outside [1, {}]",
                                      ids.size(), config_.max_positions));
  }
  Matrix x(len, static_cast<Eigen::Index>(config_.hidden));
  for (Eigen::Index i = 0; i < len; ++i) {
    const TokenId id = ids[static_cast<std::size_t>(i)];
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw ValidationError(fmt::format("bert: token id {} outside vocabulary", id));
    }
    x.row(i) = word_embeddings_.row(id) + position_embeddings_.row(i) +
               token_type_embedding_.transpose();
  }
  normalize(x, embedding_norm_);

  const auto head_dim = static_cast<Eigen::Index>(config_.hidden / config_.heads);
  const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim));
  for (const auto& layer : layers_) {
    const Matrix q = apply(layer.query, x);
    const Matrix k = apply(layer.key, x);
    const Matrix v = apply(layer.value, x);
    Matrix context(len, x.cols());
    for (std::size_t hd = 0; hd < config_.heads; ++hd) {
      const Eigen::Index off = static_cast<Eigen::Index>(hd) * head_dim;
      Matrix scores = (q.middleCols(off, head_dim) * k.middleCols(off, head_dim).transpose()) * scale;
      for (Eigen::Index r = 0; r < len; ++r) {
        auto row = scores.row(r);
        row.array() = (row.array() - row.maxCoeff()).exp();
        row /= row.sum();
      }
      context.middleCols(off, head_dim) = scores * v.middleCols(off, head_dim);
    }
    Matrix attn = apply(layer.attn_out, context) + x;
    normalize(attn, layer.attn_norm);
    Matrix inner = apply(layer.ffn_in, attn);
    activate(inner);
    x = apply(layer.ffn_out, inner) + attn;
    normalize(x, layer.out_norm);
  }
  return x;
}

Eigen::VectorXd BertEncoder::embed(std::span<const TokenId> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(cls_id_);
  ids.insert(ids.end(), tokens.begin(), tokens.end());
  ids.push_back(sep_id_);
  const Matrix states = hidden_states(ids);
  if (pooling_ == Pooling::cls) return states.row(0).transpose().cast<double>();
  return states.cast<double>().colwise().mean().transpose();
}

}  // namespace crossfake
