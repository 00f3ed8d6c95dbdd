#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crossfake/corpus.hpp"

namespace crossfake {

struct TranslationRequest {
  Language source = Language::zh;
  Language target = Language::en;
  std::string text;
};

/// sha256 of the JSON array [source, target, text].
std::string cache_key(const TranslationRequest& request);

// One machine-translation service. Implementations throw ServiceError:
// retryable for transport failures and overload, not retryable for answers
// that can never succeed (missing fixture entry, empty output, 4xx).
class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  virtual std::string name() const = 0;
  virtual std::string translate(const TranslationRequest& request) const = 0;
};

// Returns the input unchanged. For pipelines whose input is already in the
// target language and for tests.
class IdentityBackend final : public TranslationBackend {
 public:
  std::string name() const override { return "identity"; }
  std::string translate(const TranslationRequest& request) const override;
};

// Replays recorded translations from JSONL lines of
// {source_lang, target_lang, text, output}.
class FixtureBackend final : public TranslationBackend {
 public:
  static std::shared_ptr<FixtureBackend> from_file(const std::filesystem::path& path);
  void add(const TranslationRequest& request, std::string output);
  std::size_t size() const noexcept { return entries_.size(); }

  std::string name() const override { return "fixture"; }
  std::string translate(const TranslationRequest& request) const override;

 private:
  std::unordered_map<std::string, std::string> entries_;  // cache_key -> output
};

struct HttpBackendOptions {
  std::string url = "http://127.0.0.1:5000";  // scheme://host[:port][/prefix]
  std::string api_key;
  std::chrono::milliseconds timeout{30000};
};

// Speaks the LibreTranslate JSON protocol: POST <url>/translate with
// {q, source, target, format, api_key} and reads {translatedText}.
class HttpBackend final : public TranslationBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  std::string name() const override { return "live"; }
  std::string translate(const TranslationRequest& request) const override;

 private:
  HttpBackendOptions options_;
  std::string origin_;
  std::string path_prefix_;
};

struct CacheEntry {
  std::string key;
  Language source_lang = Language::zh;
  Language target_lang = Language::en;
  std::string input_hash;
  std::string output;
};

// Translation memo keyed by cache_key. With a file it is persistent: existing
// entries are loaded on open and new ones appended as JSONL, one flushed line
// each. Lookups may run concurrently; appends are serialised.
class TranslationCache {
 public:
  TranslationCache() = default;
  explicit TranslationCache(std::filesystem::path file);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const TranslationRequest& request, const std::string& output);

  std::size_t size() const;
  /// Lines skipped on load because they were not valid entries.
  std::size_t skipped_lines() const noexcept { return skipped_; }
  const std::optional<std::filesystem::path>& file() const noexcept { return file_; }

 private:
  std::optional<std::filesystem::path> file_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::mutex write_mutex_;
  std::size_t skipped_ = 0;
};

struct RetryPolicy {
  std::size_t max_attempts = 4;
  std::chrono::milliseconds initial_delay{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{5000};

  std::chrono::milliseconds delay_before(std::size_t attempt) const;  // attempt >= 1
};

struct TranslatorOptions {
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
};

// Cache-first translation with a bound on concurrent backend calls and
// exponential backoff on retryable failures. Concurrent requests for the same
// text share one backend call.
class Translator {
 public:
  Translator(std::shared_ptr<const TranslationBackend> backend,
             std::shared_ptr<TranslationCache> cache, TranslatorOptions options = {});

  /// Throws ValidationError on same-language or empty requests and
  /// ServiceError when the backend fails (retryable after exhausting retries).
  std::string translate(const TranslationRequest& request);

  std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
  const TranslationBackend& backend() const noexcept { return *backend_; }
  TranslationCache& cache() noexcept { return *cache_; }

 private:
  std::string call_with_retry(const TranslationRequest& request);

  std::shared_ptr<const TranslationBackend> backend_;
  std::shared_ptr<TranslationCache> cache_;
  TranslatorOptions options_;
  std::counting_semaphore<> slots_;
  std::mutex pending_mutex_;
  std::unordered_map<std::string, std::shared_future<std::string>> pending_;
  std::atomic<std::size_t> backend_calls_{0};
};

// Case-insensitive phrase substitutions applied to translated text, used to
// map literal renderings of domain terms onto their standard names.
class TermGlossary {
 public:
  /// Known literal renderings of COVID-19 terminology.
  static TermGlossary covid_default();
  /// Lines of "phrase<TAB>replacement"; blank lines and '#' comments skipped.
  static TermGlossary load_tsv(const std::filesystem::path& path);

  void add(std::string phrase, std::string replacement);
  /// Appends `other`'s entries; a repeated phrase takes the new replacement.
  void extend(const TermGlossary& other);
  std::size_t size() const noexcept { return terms_.size(); }

  /// Each phrase in insertion order replaces all of its occurrences that
  /// fall on word boundaries, matching ASCII case-insensitively.
  std::string apply(const std::string& text) const;

 private:
  std::vector<std::pair<std::string, std::string>> terms_;  // lower-cased phrase
};

std::string normalize_terms(const std::string& text, const TermGlossary& glossary);

/// Translates the body (title untouched) and applies the glossary. The
/// result carries the target language.
NewsArticle translate_article(const NewsArticle& article, Language target, Translator& translator,
                              const TermGlossary& glossary);

struct TranslationFailure {
  std::string article_id;
  std::string reason;
};

struct DatasetTranslation {
  Dataset dataset;
  std::vector<TranslationFailure> failures;
};

/// Every article translated, in input order. When allow_partial is false the
/// first failure is rethrown; otherwise failed articles are dropped and
/// listed.
DatasetTranslation translate_dataset(const Dataset& ds, Language target, Translator& translator,
                                     const TermGlossary& glossary, std::size_t threads,
                                     bool allow_partial);

}  // namespace crossfake
