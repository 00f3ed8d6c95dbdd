#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crossfake {

using TokenId = std::int32_t;

// Maps text to token ids. Implementations are immutable after construction
// and safe to share across threads.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  /// Stable identifier recorded in checkpoint manifests; two tokenizers with
  /// the same id produce the same ids for every input.
  virtual std::string id() const = 0;

  /// Token ids without boundary/special tokens.
  virtual std::vector<TokenId> encode(std::string_view text) const = 0;
};

// Word-level tokenizer that needs no vocabulary file: BERT basic
// tokenization, then each word hashed (FNV-1a) into `buckets` ids starting
// at kFirstId. Ids below kFirstId are reserved for special tokens.
class HashWordTokenizer final : public Tokenizer {
 public:
  static constexpr TokenId kFirstId = 1000;
  static constexpr std::uint32_t kDefaultBuckets = 1u << 20;

  explicit HashWordTokenizer(std::uint32_t buckets = kDefaultBuckets, bool lower_case = true);

  std::string id() const override;
  std::vector<TokenId> encode(std::string_view text) const override;
  TokenId word_id(std::string_view word) const noexcept;

 private:
  std::uint32_t buckets_;
  bool lower_case_;
};

// BERT WordPiece: basic tokenization followed by greedy longest-match-first
// sub-word splitting against a vocab.txt.
class WordPieceTokenizer final : public Tokenizer {
 public:
  static WordPieceTokenizer from_file(const std::filesystem::path& vocab_path,
                                      bool lower_case = true);
  WordPieceTokenizer(std::vector<std::string> vocab, bool lower_case = true);

  std::string id() const override;
  std::vector<TokenId> encode(std::string_view text) const override;

  TokenId cls_id() const noexcept { return cls_; }
  TokenId sep_id() const noexcept { return sep_; }
  TokenId unk_id() const noexcept { return unk_; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }

 private:
  void wordpiece(std::string_view word, std::vector<TokenId>& out) const;

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  bool lower_case_;
  std::string vocab_digest_;
  TokenId cls_ = 0;
  TokenId sep_ = 0;
  TokenId unk_ = 0;
  std::size_t max_chars_per_word_ = 100;
};

}  // namespace crossfake
