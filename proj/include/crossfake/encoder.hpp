#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crossfake/chunking.hpp"
#include "crossfake/json_io.hpp"
#include "crossfake/tokenizer.hpp"

namespace crossfake {

struct EncoderInfo {
  std::string name;
  std::size_t dim = 0;
  std::size_t max_tokens = 512;
  std::size_t special_overhead = 2;  // boundary tokens the encoder adds per group
  bool trainable = false;

  /// Largest group the encoder accepts.
  std::size_t max_group_tokens() const noexcept {
    return max_tokens > special_overhead ? max_tokens - special_overhead : 0;
  }
};

// Maps one token group to a fixed-length vector. Inference is const and may
// run concurrently from several threads.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual const EncoderInfo& info() const noexcept = 0;

  /// Identifies the weights, so a checkpoint can refuse a different model
  /// registered under the same name.
  virtual std::string fingerprint() const = 0;

  /// Embeds a group given without special tokens.
  virtual Eigen::VectorXd embed(std::span<const TokenId> tokens) const = 0;
};

struct GroupEmbedding {
  std::string article_id;
  std::size_t group_index = 0;
  Eigen::VectorXd vector;
};

/// Throws ValidationError when the group plus boundary tokens exceeds the
/// encoder's limit.
GroupEmbedding encode_group(const EncoderBackend& backend, const TokenGroup& group);

/// encode_group over `groups`, in order. Errors name the failing group index.
std::vector<GroupEmbedding> encode_article(const EncoderBackend& backend,
                                           std::span<const TokenGroup> groups);

// Deterministic stand-in for a transformer. Each token id is hashed to a
// pseudo-random direction; a group's vector is the mean of its token
// directions plus a small component hashed from the ordered id list, scaled
// to unit norm. Keyword content therefore survives into the embedding while
// different sequences still map to different vectors.
class MockEncoder final : public EncoderBackend {
 public:
  static constexpr std::size_t kDefaultDim = 32;
  static constexpr double kOrderWeight = 0.05;

  explicit MockEncoder(std::uint64_t seed = 0, std::size_t dim = kDefaultDim,
                       std::size_t max_tokens = 512);

  const EncoderInfo& info() const noexcept override { return info_; }
  std::string fingerprint() const override;
  Eigen::VectorXd embed(std::span<const TokenId> tokens) const override;

 private:
  Eigen::VectorXd direction(std::uint64_t key) const;

  EncoderInfo info_;
  std::uint64_t seed_;
};

enum class Pooling : std::uint8_t { cls, mean };

std::optional<Pooling> parse_pooling(std::string_view name) noexcept;
std::string_view to_string(Pooling pooling) noexcept;

// Everything needed to rebuild an encoder; stored in checkpoint manifests.
struct EncoderSpec {
  std::string name = "mock";
  std::filesystem::path model_dir;
  Pooling pooling = Pooling::cls;
  std::uint64_t mock_seed = 0;
  std::size_t mock_dim = MockEncoder::kDefaultDim;

  Json to_json() const;
  static EncoderSpec from_json(const Json& j);
};

struct EncoderBundle {
  std::shared_ptr<const Tokenizer> tokenizer;
  std::shared_ptr<const EncoderBackend> encoder;
};

using EncoderFactory = std::function<EncoderBundle(const EncoderSpec&)>;

// Backends by name. "mock" (hash tokenizer + MockEncoder) and "bert"
// (WordPiece + BertEncoder loaded from spec.model_dir) are built in.
class EncoderRegistry {
 public:
  static EncoderRegistry& global();

  void add(std::string name, EncoderFactory factory);
  EncoderBundle create(const EncoderSpec& spec) const;
  std::vector<std::string> names() const;

 private:
  EncoderRegistry();
  std::map<std::string, EncoderFactory, std::less<>> factories_;
};

inline EncoderBundle make_encoder(const EncoderSpec& spec) {
  return EncoderRegistry::global().create(spec);
}

}  // namespace crossfake
