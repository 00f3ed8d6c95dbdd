#include "crossfake/tokenizer.hpp"

#include <fstream>

#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/hashing.hpp"
#include "crossfake/text.hpp"

namespace crossfake {

HashWordTokenizer::HashWordTokenizer(std::uint32_t buckets, bool lower_case)
    : buckets_(buckets), lower_case_(lower_case) {
  if (buckets_ == 0) throw ConfigError("hash tokenizer needs at least one bucket");
}

std::string HashWordTokenizer::id() const {
  return fmt::format("hashword-v1/{}/{}", buckets_, lower_case_ ? "uncased" : "cased");
}

TokenId HashWordTokenizer::word_id(std::string_view word) const noexcept {
  return kFirstId + static_cast<TokenId>(fnv1a64(word) % buckets_);
}

std::vector<TokenId> HashWordTokenizer::encode(std::string_view text) const {
  const auto words = text::basic_tokenize(text, lower_case_);
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(word_id(w));
  return ids;
}

WordPieceTokenizer WordPieceTokenizer::from_file(const std::filesystem::path& vocab_path,
                                                 bool lower_case) {
  std::ifstream in(vocab_path);
  if (!in) throw ConfigError(fmt::format("cannot open vocabulary '{}'", vocab_path.string()));
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  return WordPieceTokenizer(std::move(vocab), lower_case);
}

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> vocab, bool lower_case)
    : vocab_(std::move(vocab)), lower_case_(lower_case) {
  std::string joined;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    index_.emplace(vocab_[i], static_cast<TokenId>(i));
    joined += vocab_[i];
    joined += '\n';
  }
  vocab_digest_ = sha256_hex(joined).substr(0, 16);
  const auto require = [&](const char* token) {
    const auto it = index_.find(token);
    if (it == index_.end()) throw ConfigError(fmt::format("vocabulary lacks {}", token));
    return it->second;
  };
  cls_ = require("[CLS]");
  sep_ = require("[SEP]");
  unk_ = require("[UNK]");
}

std::string WordPieceTokenizer::id() const {
  return fmt::format("wordpiece/{}/{}", vocab_digest_, lower_case_ ? "uncased" : "cased");
}

void WordPieceTokenizer::wordpiece(std::string_view word, std::vector<TokenId>& out) const {
  const std::u32string chars = text::decode_utf8(word);
  if (chars.size() > max_chars_per_word_) {
    out.push_back(unk_);
    return;
  }
  std::vector<TokenId> pieces;
  std::size_t start = 0;
  while (start < chars.size()) {
    std::size_t end = chars.size();
    TokenId match = -1;
    while (start < end) {
      std::string candidate = start > 0 ? "##" : "";
      candidate += text::encode_utf8(std::u32string_view(chars).substr(start, end - start));
      if (const auto it = index_.find(candidate); it != index_.end()) {
        match = it->second;
        break;
      }
      --end;
    }
    if (match < 0) {
      out.push_back(unk_);
      return;
    }
    pieces.push_back(match);
    start = end;
  }
  out.insert(out.end(), pieces.begin(), pieces.end());
}

std::vector<TokenId> WordPieceTokenizer::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& word : text::basic_tokenize(text, lower_case_)) wordpiece(word, ids);
  return ids;
}

}  // namespace crossfake
