#include "crossfake/translate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/hashing.hpp"
#include "crossfake/json_io.hpp"
#include "crossfake/parallel.hpp"
#include "crossfake/text.hpp"

namespace crossfake {
namespace {

Language language_field(const Json& j, const char* key) {
  const auto lang = parse_language(j.at(key).get<std::string>());
  if (!lang) throw ValidationError(fmt::format("unknown language in field '{}'", key));
  return *lang;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

std::string cache_key(const TranslationRequest& request) {
  const Json triple = Json::array(
      {std::string(to_code(request.source)), std::string(to_code(request.target)), request.text});
  return sha256_hex(triple.dump());
}

std::string IdentityBackend::translate(const TranslationRequest& request) const {
  return request.text;
}

std::shared_ptr<FixtureBackend> FixtureBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open translation fixture '{}'", path.string()));
  auto backend = std::make_shared<FixtureBackend>();
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (text::is_blank(line)) continue;
    try {
      const Json j = Json::parse(line);
      backend->add({language_field(j, "source_lang"), language_field(j, "target_lang"),
                    j.at("text").get<std::string>()},
                   j.at("output").get<std::string>());
    } catch (const Json::exception& e) {
      throw ConfigError(fmt::format("{}:{}: malformed fixture entry: {}", path.string(), row,
                                    e.what()));
    } catch (const ValidationError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path.string(), row, e.what()));
    }
  }
  return backend;
}

void FixtureBackend::add(const TranslationRequest& request, std::string output) {
  entries_[cache_key(request)] = std::move(output);
}

std::string FixtureBackend::translate(const TranslationRequest& request) const {
  const auto it = entries_.find(cache_key(request));
  if (it == entries_.end()) {
    throw ServiceError(fmt::format("no fixture translation for {}->{} text of {} bytes",
                                   to_code(request.source), to_code(request.target),
                                   request.text.size()),
                       false);
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Cache

TranslationCache::TranslationCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(*file_, std::ios::binary);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (text::is_blank(line)) continue;
    try {
      const Json j = Json::parse(line);
      entries_[j.at("key").get<std::string>()] = j.at("output").get<std::string>();
    } catch (const Json::exception&) {
      ++skipped_;
    }
  }
}

std::optional<std::string> TranslationCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::store(const TranslationRequest& request, const std::string& output) {
  const std::string key = cache_key(request);
  std::lock_guard write_lock(write_mutex_);
  {
    std::shared_lock lock(mutex_);
    if (entries_.contains(key)) return;
  }
  if (file_) {
    Json j;
    j["key"] = key;
    j["source_lang"] = to_code(request.source);
    j["target_lang"] = to_code(request.target);
    j["input_hash"] = sha256_hex(request.text);
    j["output"] = output;
    if (file_->has_parent_path()) std::filesystem::create_directories(file_->parent_path());
    std::ofstream out(*file_, std::ios::binary | std::ios::app);
    if (!out) throw ConfigError(fmt::format("cannot append to cache '{}'", file_->string()));
    out << j.dump() << '\n';
    if (!out.flush()) throw ConfigError(fmt::format("write to cache '{}' failed", file_->string()));
  }
  std::unique_lock lock(mutex_);
  entries_.emplace(key, output);
}

std::size_t TranslationCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// Translator

std::chrono::milliseconds RetryPolicy::delay_before(std::size_t attempt) const {
  double ms = static_cast<double>(initial_delay.count());
  for (std::size_t i = 1; i < attempt; ++i) ms *= multiplier;
  ms = std::min(ms, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

Translator::Translator(std::shared_ptr<const TranslationBackend> backend,
                       std::shared_ptr<TranslationCache> cache, TranslatorOptions options)
    : backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<TranslationCache>()),
      options_(options),
      slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options.max_in_flight))) {
  if (!backend_) throw ConfigError("translator needs a backend");
  if (options_.retry.max_attempts == 0) throw ConfigError("retry policy needs at least one attempt");
}

std::string Translator::call_with_retry(const TranslationRequest& request) {
  std::string last_error;
  for (std::size_t attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(options_.retry.delay_before(attempt - 1));
    std::string out;
    slots_.acquire();
    try {
      ++backend_calls_;
      out = backend_->translate(request);
      slots_.release();
    } catch (const ServiceError& e) {
      slots_.release();
      if (!e.retryable()) throw;
      last_error = e.what();
      continue;
    } catch (...) {
      slots_.release();
      throw;
    }
    if (text::is_blank(out)) {
      throw ServiceError(fmt::format("{} backend returned an empty translation", backend_->name()),
                         false);
    }
    return out;
  }
  throw ServiceError(fmt::format("{} backend unavailable after {} attempts: {}", backend_->name(),
                                 options_.retry.max_attempts, last_error),
                     true);
}

std::string Translator::translate(const TranslationRequest& request) {
  if (request.source == request.target) {
    throw ValidationError(fmt::format("source and target language are both '{}'",
                                      to_code(request.source)));
  }
  if (text::is_blank(request.text)) throw ValidationError("cannot translate empty text");

  const std::string key = cache_key(request);
  if (auto hit = cache_->lookup(key)) return *hit;

  std::promise<std::string> promise;
  std::shared_future<std::string> shared;
  bool owner = false;
  {
    std::lock_guard lock(pending_mutex_);
    if (auto hit = cache_->lookup(key)) return *hit;
    const auto it = pending_.find(key);
    if (it != pending_.end()) {
      shared = it->second;
    } else {
      shared = promise.get_future().share();
      pending_.emplace(key, shared);
      owner = true;
    }
  }
  if (!owner) return shared.get();

  try {
    std::string out = call_with_retry(request);
    cache_->store(request, out);
    promise.set_value(out);
    std::lock_guard lock(pending_mutex_);
    pending_.erase(key);
    return out;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(pending_mutex_);
    pending_.erase(key);
    throw;
  }
}

// ---------------------------------------------------------------------------
// Glossary

TermGlossary TermGlossary::covid_default() {
  TermGlossary g;
  g.add("new crown pneumonia", "COVID-19");
  g.add("new coronary pneumonia", "COVID-19");
  g.add("new crown virus", "coronavirus");
  return g;
}

TermGlossary TermGlossary::load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open glossary '{}'", path.string()));
  TermGlossary g;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected phrase<TAB>replacement", path.string(), row));
    }
    const std::string_view view(line);
    g.add(std::string(text::trim(view.substr(0, tab))), std::string(text::trim(view.substr(tab + 1))));
  }
  return g;
}

void TermGlossary::add(std::string phrase, std::string replacement) {
  if (text::is_blank(phrase)) throw ConfigError("glossary phrase is empty");
  std::string key = ascii_lower(phrase);
  for (auto& [p, r] : terms_) {
    if (p == key) {
      r = std::move(replacement);
      return;
    }
  }
  terms_.emplace_back(std::move(key), std::move(replacement));
}

void TermGlossary::extend(const TermGlossary& other) {
  for (const auto& [phrase, replacement] : other.terms_) add(phrase, replacement);
}

std::string TermGlossary::apply(const std::string& input) const {
  std::string text = input;
  for (const auto& [phrase, replacement] : terms_) {
    const std::string lower = ascii_lower(text);
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
      const std::size_t end = i + phrase.size();
      if ((i == 0 || !word_char(text[i - 1])) && end <= text.size() &&
          lower.compare(i, phrase.size(), phrase) == 0 &&
          (end == text.size() || !word_char(text[end]))) {
        out += replacement;
        i = end;
      } else {
        out.push_back(text[i++]);
      }
    }
    text = std::move(out);
  }
  return text;
}

std::string normalize_terms(const std::string& text, const TermGlossary& glossary) {
  return glossary.apply(text);
}

// ---------------------------------------------------------------------------

NewsArticle translate_article(const NewsArticle& article, Language target, Translator& translator,
                              const TermGlossary& glossary) {
  NewsArticle out = article;
  const std::string translated = translator.translate({article.language, target, article.body});
  out.body = normalize_terms(translated, glossary);
  out.language = target;
  return out;
}

DatasetTranslation translate_dataset(const Dataset& ds, Language target, Translator& translator,
                                     const TermGlossary& glossary, std::size_t threads,
                                     bool allow_partial) {
  std::vector<std::optional<NewsArticle>> done(ds.size());
  std::vector<std::string> errors(ds.size());
  parallel_for(ds.size(), threads, [&](std::size_t i) {
    try {
      done[i] = translate_article(ds.articles[i], target, translator, glossary);
    } catch (const ServiceError& e) {
      if (!allow_partial) throw;
      errors[i] = e.what();
    }
  });
  DatasetTranslation out;
  out.dataset.name = ds.name;
  out.dataset.language = target;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (done[i]) {
      out.dataset.articles.push_back(std::move(*done[i]));
    } else {
      out.failures.push_back({ds.articles[i].id, errors[i]});
    }
  }
  return out;
}

}  // namespace crossfake
