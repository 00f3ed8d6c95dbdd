#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crossfake/json_io.hpp"

namespace crossfake {

class Tokenizer;

enum class Language : std::uint8_t { en, zh };

std::optional<Language> parse_language(std::string_view code) noexcept;
std::string_view to_code(Language lang) noexcept;

// Positive class is fake.
enum class Label : std::uint8_t { real = 0, fake = 1 };

enum class Split : std::uint8_t { train, val, test };

std::optional<Split> parse_split(std::string_view tag) noexcept;
std::string_view to_string(Split split) noexcept;

struct NewsArticle {
  std::string id;
  Language language = Language::en;
  std::optional<std::string> title;
  std::string body;
  std::optional<Label> label;
  std::optional<std::string> source_url;
  std::optional<std::string> published_at;
  std::optional<Split> split;

  bool operator==(const NewsArticle&) const = default;
};

/// Reason the article violates its invariants, or nullopt when valid.
std::optional<std::string> check_article(const NewsArticle& article);

struct Dataset {
  std::string name;
  Language language = Language::en;
  std::vector<NewsArticle> articles;

  std::size_t size() const noexcept { return articles.size(); }
  bool empty() const noexcept { return articles.empty(); }
  bool operator==(const Dataset&) const = default;
};

/// Throws ValidationError unless ids are unique, every article is valid and
/// shares the declared language.
void check_dataset(const Dataset& ds);

enum class Format : std::uint8_t { jsonl, csv };

std::optional<Format> parse_format(std::string_view name) noexcept;

struct RowRejection {
  std::size_t row;  // 1-based record number within the file
  std::string reason;
};

struct LoadOptions {
  // When unset the first valid row fixes the dataset language.
  std::optional<Language> language;
  std::optional<std::string> name;
};

struct LoadResult {
  Dataset dataset;
  std::vector<RowRejection> rejected;
};

/// Reads and validates a JSONL or CSV corpus. Invalid rows are reported, not
/// fatal; throws ValidationError when the file is missing or has no valid row.
LoadResult load_articles(const std::filesystem::path& path, Format format,
                         const LoadOptions& options = {});

/// Same as load_articles but fails on the first rejected row.
Dataset load_dataset(const std::filesystem::path& path, Format format = Format::jsonl,
                     const LoadOptions& options = {});

Json to_json(const NewsArticle& article);

/// Parses one record; throws ValidationError with the rejection reason.
NewsArticle article_from_json(const Json& record);

/// Canonical JSONL: one article per line, fixed key order, absent optionals
/// omitted.
std::string to_jsonl(const Dataset& ds);
void save_jsonl(const Dataset& ds, const std::filesystem::path& path);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

/// SHA-256 of the canonical JSONL form.
std::string fingerprint(const Dataset& ds);

struct StatsReport {
  std::size_t total = 0;
  std::size_t labeled = 0;
  std::size_t fake = 0;
  std::size_t long_text = 0;
  std::optional<double> fake_fraction;  // absent when nothing is labeled
  double long_text_fraction = 0.0;
  std::size_t token_limit = 512;
  std::string tokenizer_id;
};

/// Counts articles whose body tokenizes to more than `token_limit` tokens.
/// Throws ValidationError on an empty dataset.
StatsReport dataset_stats(const Dataset& ds, const Tokenizer& tokenizer,
                          std::size_t token_limit = 512);

Json to_json(const StatsReport& report);

/// Deterministic stratified split into (train, val). Labels are stratified
/// with largest-remainder allocation so the validation size is exactly
/// round(val_fraction * |ds|).
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::uint64_t seed,
                                          double val_fraction);

}  // namespace crossfake
