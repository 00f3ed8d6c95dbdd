#include "crossfake/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <unordered_set>

#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/hashing.hpp"
#include "crossfake/rng.hpp"
#include "crossfake/text.hpp"
#include "crossfake/tokenizer.hpp"

namespace crossfake {
namespace {

constexpr std::array<std::string_view, 8> kFields{
    "id", "language", "title", "body", "label", "source_url", "published_at", "split"};

bool is_iso8601(const std::string& s) {
  static const std::regex re(
      R"(^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?$)");
  return std::regex_match(s, re);
}

std::optional<std::string> optional_string(const Json& record, const char* key) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(fmt::format("{} is not a string", key));
  return it->get<std::string>();
}

std::optional<Label> parse_label(const Json& value) {
  if (value.is_null()) return std::nullopt;
  long long n = 0;
  if (value.is_number_integer()) {
    n = value.get<long long>();
  } else if (value.is_string()) {
    const std::string s{text::trim(value.get<std::string>())};
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    try {
      n = std::stoll(s, &used);
    } catch (const std::exception&) {
      throw ValidationError("label is not an integer");
    }
    if (used != s.size()) throw ValidationError("label is not an integer");
  } else {
    throw ValidationError("label is not an integer");
  }
  if (n != 0 && n != 1) throw ValidationError("label out of range");
  return n == 1 ? Label::fake : Label::real;
}

// RFC 4180 records: quoted fields may contain separators, quotes ("") and
// newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& data) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
      if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
      record.clear();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted CSV field");
  if (field_started || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string{s};
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Collects valid rows and per-row rejections; shared by both formats.
class RowCollector {
 public:
  explicit RowCollector(const LoadOptions& options) : options_(options) {}

  void add(std::size_t row, const Json& record) {
    NewsArticle article;
    try {
      Json patched = record;
      if ((!patched.contains("language") || patched["language"].is_null()) && options_.language) {
        patched["language"] = std::string{to_code(*options_.language)};
      }
      article = article_from_json(patched);
    } catch (const ValidationError& e) {
      reject(row, e.what());
      return;
    }
    if (!language_) language_ = options_.language.value_or(article.language);
    if (article.language != *language_) {
      reject(row, fmt::format("language '{}' differs from dataset language '{}'",
                              to_code(article.language), to_code(*language_)));
      return;
    }
    if (!ids_.insert(article.id).second) {
      reject(row, fmt::format("duplicate id '{}'", article.id));
      return;
    }
    articles_.push_back(std::move(article));
  }

  void reject(std::size_t row, std::string reason) {
    rejected_.push_back({row, std::move(reason)});
  }

  LoadResult finish(const std::filesystem::path& path) && {
    if (articles_.empty()) {
      std::string detail;
      if (!rejected_.empty()) {
        detail = fmt::format(" (row {}: {})", rejected_.front().row, rejected_.front().reason);
      }
      throw ValidationError(fmt::format("'{}' contains no valid articles{}", path.string(), detail));
    }
    LoadResult result;
    result.dataset.name = options_.name.value_or(path.stem().string());
    result.dataset.language = *language_;
    result.dataset.articles = std::move(articles_);
    result.rejected = std::move(rejected_);
    return result;
  }

 private:
  const LoadOptions& options_;
  std::optional<Language> language_;
  std::unordered_set<std::string> ids_;
  std::vector<NewsArticle> articles_;
  std::vector<RowRejection> rejected_;
};

}  // namespace

std::optional<Language> parse_language(std::string_view code) noexcept {
  if (code == "en") return Language::en;
  if (code == "zh") return Language::zh;
  return std::nullopt;
}

std::string_view to_code(Language lang) noexcept {
  switch (lang) {
    case Language::en: return "en";
    case Language::zh: return "zh";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view tag) noexcept {
  if (tag == "train") return Split::train;
  if (tag == "val") return Split::val;
  if (tag == "test") return Split::test;
  return std::nullopt;
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Format> parse_format(std::string_view name) noexcept {
  if (name == "jsonl") return Format::jsonl;
  if (name == "csv") return Format::csv;
  return std::nullopt;
}

std::optional<std::string> check_article(const NewsArticle& article) {
  if (text::trim(article.id).empty()) return "missing id";
  if (text::is_blank(article.body)) return "empty body";
  if (article.published_at && !is_iso8601(*article.published_at)) {
    return "published_at is not ISO-8601";
  }
  return std::nullopt;
}

void check_dataset(const Dataset& ds) {
  std::unordered_set<std::string> ids;
  for (const auto& a : ds.articles) {
    if (auto reason = check_article(a)) {
      throw ValidationError(fmt::format("article '{}': {}", a.id, *reason));
    }
    if (a.language != ds.language) {
      throw ValidationError(fmt::format("article '{}' has language '{}', dataset is '{}'", a.id,
                                        to_code(a.language), to_code(ds.language)));
    }
    if (!ids.insert(a.id).second) {
      throw ValidationError(fmt::format("duplicate id '{}'", a.id));
    }
  }
}

NewsArticle article_from_json(const Json& record) {
  if (!record.is_object()) throw ValidationError("record is not an object");
  NewsArticle a;

  const auto id = record.find("id");
  if (id == record.end() || id->is_null()) throw ValidationError("missing id");
  if (id->is_string()) {
    a.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    a.id = std::to_string(id->get<long long>());
  } else {
    throw ValidationError("id is not a string");
  }

  const auto lang = optional_string(record, "language");
  if (!lang) throw ValidationError("missing language");
  const auto parsed = parse_language(*lang);
  if (!parsed) throw ValidationError(fmt::format("unknown language '{}'", *lang));
  a.language = *parsed;

  const auto body = optional_string(record, "body");
  if (!body) throw ValidationError("missing body");
  a.body = *body;

  a.title = optional_string(record, "title");
  if (const auto it = record.find("label"); it != record.end()) a.label = parse_label(*it);
  a.source_url = optional_string(record, "source_url");
  a.published_at = optional_string(record, "published_at");
  if (const auto split = optional_string(record, "split")) {
    a.split = parse_split(*split);
    if (!a.split) throw ValidationError(fmt::format("unknown split '{}'", *split));
  }
  // CSV cells are always present; treat empty optional text as absent.
  for (auto* field : {&a.title, &a.source_url, &a.published_at}) {
    if (*field && field->value().empty()) field->reset();
  }

  if (auto reason = check_article(a)) throw ValidationError(*reason);
  return a;
}

Json to_json(const NewsArticle& a) {
  Json j;
  j["id"] = a.id;
  j["language"] = to_code(a.language);
  if (a.title) j["title"] = *a.title;
  j["body"] = a.body;
  if (a.label) j["label"] = static_cast<int>(*a.label);
  if (a.source_url) j["source_url"] = *a.source_url;
  if (a.published_at) j["published_at"] = *a.published_at;
  if (a.split) j["split"] = to_string(*a.split);
  return j;
}

LoadResult load_articles(const std::filesystem::path& path, Format format,
                         const LoadOptions& options) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ValidationError(fmt::format("file not found: '{}'", path.string()));
  }
  const std::string data = read_text_file(path);
  RowCollector rows(options);

  if (format == Format::jsonl) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < data.size()) {
      std::size_t end = data.find('\n', start);
      if (end == std::string::npos) end = data.size();
      ++line_no;
      const std::string_view line = text::trim(std::string_view(data).substr(start, end - start));
      start = end + 1;
      if (line.empty()) continue;
      Json record;
      try {
        record = Json::parse(line);
      } catch (const Json::parse_error&) {
        rows.reject(line_no, "malformed JSON");
        continue;
      }
      rows.add(line_no, record);
    }
    return std::move(rows).finish(path);
  }

  const auto records = parse_csv(data);
  if (records.empty()) throw ValidationError(fmt::format("'{}' is empty", path.string()));
  const auto& header = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& cells = records[r];
    if (cells.size() != header.size()) {
      rows.reject(r, fmt::format("expected {} columns, found {}", header.size(), cells.size()));
      continue;
    }
    Json record = Json::object();
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string name{text::trim(header[c])};
      if (std::find(kFields.begin(), kFields.end(), name) == kFields.end()) continue;
      if (cells[c].empty() && name != "body") {
        record[name] = nullptr;
      } else {
        record[name] = cells[c];
      }
    }
    rows.add(r, record);
  }
  return std::move(rows).finish(path);
}

Dataset load_dataset(const std::filesystem::path& path, Format format,
                     const LoadOptions& options) {
  auto result = load_articles(path, format, options);
  if (!result.rejected.empty()) {
    const auto& first = result.rejected.front();
    throw ValidationError(
        fmt::format("'{}' row {}: {}", path.string(), first.row, first.reason));
  }
  return std::move(result.dataset);
}

std::string to_jsonl(const Dataset& ds) {
  std::string out;
  for (const auto& a : ds.articles) {
    out += to_json(a).dump();
    out += '\n';
  }
  return out;
}

void save_jsonl(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file(path, to_jsonl(ds));
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < kFields.size(); ++i) {
    if (i) out += ',';
    out += kFields[i];
  }
  out += '\n';
  for (const auto& a : ds.articles) {
    const std::string label = a.label ? std::to_string(static_cast<int>(*a.label)) : "";
    const std::string split = a.split ? std::string{to_string(*a.split)} : "";
    const std::array<std::string, 8> cells{
        a.id, std::string{to_code(a.language)}, a.title.value_or(""), a.body, label,
        a.source_url.value_or(""), a.published_at.value_or(""), split};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cells[i]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

std::string fingerprint(const Dataset& ds) { return sha256_hex(to_jsonl(ds)); }

StatsReport dataset_stats(const Dataset& ds, const Tokenizer& tokenizer, std::size_t token_limit) {
  if (ds.empty()) throw ValidationError("dataset_stats: dataset is empty");
  StatsReport r;
  r.total = ds.size();
  r.token_limit = token_limit;
  r.tokenizer_id = tokenizer.id();
  for (const auto& a : ds.articles) {
    if (a.label) {
      ++r.labeled;
      if (*a.label == Label::fake) ++r.fake;
    }
    if (tokenizer.encode(a.body).size() > token_limit) ++r.long_text;
  }
  if (r.labeled > 0) {
    r.fake_fraction = static_cast<double>(r.fake) / static_cast<double>(r.labeled);
  }
  r.long_text_fraction = static_cast<double>(r.long_text) / static_cast<double>(r.total);
  return r;
}

Json to_json(const StatsReport& r) {
  Json j;
  j["total"] = r.total;
  j["labeled"] = r.labeled;
  j["fake"] = r.fake;
  j["fake_fraction"] = r.fake_fraction ? Json(*r.fake_fraction) : Json(nullptr);
  j["long_text"] = r.long_text;
  j["long_text_fraction"] = r.long_text_fraction;
  j["token_limit"] = r.token_limit;
  j["tokenizer"] = r.tokenizer_id;
  return j;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::uint64_t seed,
                                          double val_fraction) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError(fmt::format("val_fraction must be in [0, 1), got {}", val_fraction));
  }
  // Strata: fake, real, unlabeled.
  std::array<std::vector<std::size_t>, 3> strata;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& label = ds.articles[i].label;
    strata[!label ? 2 : (*label == Label::fake ? 0 : 1)].push_back(i);
  }

  const auto target = static_cast<std::size_t>(
      std::llround(val_fraction * static_cast<double>(ds.size())));
  std::array<std::size_t, 3> take{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double quota = val_fraction * static_cast<double>(strata[s].size());
    take[s] = static_cast<std::size_t>(std::floor(quota));
    remainder[s] = quota - std::floor(quota);
    assigned += take[s];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target && k < 3; ++k) {
    const std::size_t s = order[k];
    if (take[s] < strata[s].size()) {
      ++take[s];
      ++assigned;
    }
  }

  std::vector<bool> in_val(ds.size(), false);
  for (std::size_t s = 0; s < 3; ++s) {
    Rng rng(mix64(seed ^ (0x5151ULL + s)));
    auto& idx = strata[s];
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t k = 0; k < take[s]; ++k) in_val[idx[k]] = true;
  }

  Dataset train{ds.name + ".train", ds.language, {}};
  Dataset val{ds.name + ".val", ds.language, {}};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (in_val[i] ? val : train).articles.push_back(ds.articles[i]);
  }
  return {std::move(train), std::move(val)};
}

}  // namespace crossfake
