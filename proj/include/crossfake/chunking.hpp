#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crossfake/corpus.hpp"
#include "crossfake/tokenizer.hpp"

namespace crossfake {

// Default sub-text windows. Boundary tokens added by the encoder are not
// counted, so a 500-token group still fits a 512-token encoder.
inline constexpr std::size_t kTrainWindow = 500;
inline constexpr std::size_t kTestWindow = 100;

struct TokenSequence {
  std::string article_id;
  std::vector<TokenId> tokens;

  std::size_t length() const noexcept { return tokens.size(); }
};

struct TokenGroup {
  std::string article_id;
  std::size_t index = 0;
  std::vector<TokenId> tokens;
  std::size_t window = 0;
};

struct TokenizeOptions {
  bool include_title = false;
};

/// Tokenizes the article body (optionally prefixed by its title). Throws
/// ValidationError on an empty body or when nothing survives tokenization.
TokenSequence tokenize(const NewsArticle& article, const Tokenizer& tokenizer,
                       const TokenizeOptions& options = {});

/// Contiguous, non-overlapping groups of `window` tokens; only the last group
/// may be shorter. Throws ConfigError when window is zero.
std::vector<TokenGroup> slice_groups(const TokenSequence& seq, std::size_t window);

/// ceil(length / window)
constexpr std::size_t group_count(std::size_t length, std::size_t window) noexcept {
  return (length + window - 1) / window;
}

}  // namespace crossfake
