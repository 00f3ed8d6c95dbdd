#include "crossfake/encoder.hpp"

#include <cmath>

#include <fmt/format.h>

#include "crossfake/bert.hpp"
#include "crossfake/error.hpp"
#include "crossfake/hashing.hpp"
#include "crossfake/rng.hpp"

namespace crossfake {

GroupEmbedding encode_group(const EncoderBackend& backend, const TokenGroup& group) {
  const auto& info = backend.info();
  if (group.tokens.size() > info.max_group_tokens()) {
    throw ValidationError(fmt::format(
        "group {} of article '{}' has {} tokens; encoder '{}' accepts at most {} ({} minus {} "
        "boundary tokens)",
        group.index, group.article_id, group.tokens.size(), info.name, info.max_group_tokens(),
        info.max_tokens, info.special_overhead));
  }
  GroupEmbedding out{group.article_id, group.index, backend.embed(group.tokens)};
  if (static_cast<std::size_t>(out.vector.size()) != info.dim || !out.vector.allFinite()) {
    throw std::runtime_error(fmt::format("encoder '{}' produced an invalid vector for group {}",
                                         info.name, group.index));
  }
  return out;
}

std::vector<GroupEmbedding> encode_article(const EncoderBackend& backend,
                                           std::span<const TokenGroup> groups) {
  std::vector<GroupEmbedding> out;
  out.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    try {
      out.push_back(encode_group(backend, groups[i]));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("group index {}: {}", i, e.what()));
    }
  }
  return out;
}

MockEncoder::MockEncoder(std::uint64_t seed, std::size_t dim, std::size_t max_tokens)
    : info_{"mock", dim, max_tokens, 2, false}, seed_(seed) {
  if (dim < 1) throw ConfigError("mock encoder dimension must be at least 1");
  if (max_tokens <= info_.special_overhead) throw ConfigError("mock encoder max_tokens too small");
}

std::string MockEncoder::fingerprint() const {
  return fmt::format("mock-v1/seed={}/dim={}", seed_, info_.dim);
}

Eigen::VectorXd MockEncoder::direction(std::uint64_t key) const {
  Rng rng(mix64(seed_ ^ mix64(key)));
  Eigen::VectorXd v(static_cast<Eigen::Index>(info_.dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = 2.0 * rng.uniform() - 1.0;
  return v;
}

Eigen::VectorXd MockEncoder::embed(std::span<const TokenId> tokens) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(info_.dim));
  std::uint64_t order_hash = 0x6d6f636bULL;
  for (TokenId t : tokens) {
    v += direction(static_cast<std::uint64_t>(t));
    order_hash = mix64(order_hash ^ static_cast<std::uint64_t>(t));
  }
  if (!tokens.empty()) v /= static_cast<double>(tokens.size());
  v += kOrderWeight * direction(order_hash ^ 0xa5a5a5a5a5a5a5a5ULL);
  const double norm = v.norm();
  return norm > 0.0 ? Eigen::VectorXd(v / norm) : v;
}

std::optional<Pooling> parse_pooling(std::string_view name) noexcept {
  if (name == "cls") return Pooling::cls;
  if (name == "mean") return Pooling::mean;
  return std::nullopt;
}

std::string_view to_string(Pooling pooling) noexcept {
  return pooling == Pooling::cls ? "cls" : "mean";
}

Json EncoderSpec::to_json() const {
  Json j;
  j["name"] = name;
  if (name == "mock") {
    j["mock_seed"] = mock_seed;
    j["mock_dim"] = mock_dim;
  } else {
    j["model_dir"] = model_dir.string();
    j["pooling"] = to_string(pooling);
  }
  return j;
}

EncoderSpec EncoderSpec::from_json(const Json& j) {
  EncoderSpec s;
  s.name = j.at("name").get<std::string>();
  if (j.contains("mock_seed")) s.mock_seed = j["mock_seed"].get<std::uint64_t>();
  if (j.contains("mock_dim")) s.mock_dim = j["mock_dim"].get<std::size_t>();
  if (j.contains("model_dir")) s.model_dir = j["model_dir"].get<std::string>();
  if (j.contains("pooling")) {
    const auto p = parse_pooling(j["pooling"].get<std::string>());
    if (!p) throw ConfigError("unknown pooling in encoder spec");
    s.pooling = *p;
  }
  return s;
}

EncoderRegistry::EncoderRegistry() {
  add("mock", [](const EncoderSpec& spec) {
    return EncoderBundle{std::make_shared<HashWordTokenizer>(),
                         std::make_shared<MockEncoder>(spec.mock_seed, spec.mock_dim)};
  });
  add("bert", [](const EncoderSpec& spec) {
    if (spec.model_dir.empty()) throw ConfigError("encoder 'bert' requires a model directory");
    auto tokenizer = std::make_shared<WordPieceTokenizer>(
        WordPieceTokenizer::from_file(spec.model_dir / "vocab.txt"));
    auto encoder = std::make_shared<BertEncoder>(
        BertEncoder::load(spec.model_dir, spec.pooling, tokenizer->cls_id(), tokenizer->sep_id()));
    return EncoderBundle{std::move(tokenizer), std::move(encoder)};
  });
}

EncoderRegistry& EncoderRegistry::global() {
  static EncoderRegistry registry;
  return registry;
}

void EncoderRegistry::add(std::string name, EncoderFactory factory) {
  factories_.insert_or_assign(std::move(name), std::move(factory));
}

EncoderBundle EncoderRegistry::create(const EncoderSpec& spec) const {
  const auto it = factories_.find(spec.name);
  if (it == factories_.end()) {
    std::string known;
    for (const auto& [name, _] : factories_) known += (known.empty() ? "" : ", ") + name;
    throw ConfigError(fmt::format("unknown encoder '{}' (known: {})", spec.name, known));
  }
  return it->second(spec);
}

std::vector<std::string> EncoderRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

}  // namespace crossfake
