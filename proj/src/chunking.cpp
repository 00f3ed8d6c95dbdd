#include "crossfake/chunking.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/text.hpp"

namespace crossfake {

TokenSequence tokenize(const NewsArticle& article, const Tokenizer& tokenizer,
                       const TokenizeOptions& options) {
  if (text::is_blank(article.body)) {
    throw ValidationError(fmt::format("article '{}': empty body", article.id));
  }
  TokenSequence seq{article.id, {}};
  if (options.include_title && article.title) seq.tokens = tokenizer.encode(*article.title);
  const auto body = tokenizer.encode(article.body);
  seq.tokens.insert(seq.tokens.end(), body.begin(), body.end());
  if (seq.tokens.empty()) {
    throw ValidationError(fmt::format("article '{}': body has no tokens", article.id));
  }
  return seq;
}

std::vector<TokenGroup> slice_groups(const TokenSequence& seq, std::size_t window) {
  if (window < 1) throw ConfigError("slice_groups: window must be at least 1");
  const std::size_t n = group_count(seq.length(), window);
  std::vector<TokenGroup> groups;
  groups.reserve(n);
  for (std::size_t g = 0; g < n; ++g) {
    const auto first = seq.tokens.begin() + static_cast<std::ptrdiff_t>(g * window);
    const auto last = seq.tokens.begin() +
                      static_cast<std::ptrdiff_t>(std::min(seq.length(), (g + 1) * window));
    groups.push_back({seq.article_id, g, std::vector<TokenId>(first, last), window});
  }
  return groups;
}

}  // namespace crossfake
