#include "crossfake/synthetic.hpp"

#include <algorithm>
#include <span>

#include <fmt/format.h>

#include "crossfake/error.hpp"
#include "crossfake/text.hpp"

namespace crossfake::synthetic {
namespace {

constexpr std::size_t kNeutralWords = 500;

std::string marker_text(Rng& rng, std::size_t n, double marker_rate) {
  const auto& neutral = neutral_vocabulary();
  const auto& markers = marker_vocabulary();
  std::string out;
  out.reserve(n * 7);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out.push_back(' ');
    if (rng.bernoulli(marker_rate)) {
      out += markers[rng.below(markers.size())];
    } else {
      out += neutral[rng.below(neutral.size())];
    }
  }
  return out;
}

std::string cjk_text(Rng& rng, std::size_t n) {
  std::string out;
  out.reserve(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    text::append_utf8(out, static_cast<char32_t>(0x4E00 + rng.below(2000)));
  }
  return out;
}

std::string join(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + " " + b;
}

}  // namespace

const std::vector<std::string>& neutral_vocabulary() {
  static const std::vector<std::string> words = [] {
    static constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                                                   "p", "r", "s", "t", "v", "z", "ch", "sh",
                                                   "th", "tr", "pl", "gr"};
    static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u"};
    std::vector<std::string> out;
    out.reserve(kNeutralWords);
    for (std::size_t i = 0; i < kNeutralWords; ++i) {
      std::size_t k = i;
      std::string w;
      for (int syllable = 0; syllable < 3; ++syllable) {
        w += kOnsets[k % 20];
        k /= 20;
        w += kVowels[(i + static_cast<std::size_t>(syllable)) % 5];
      }
      out.push_back(std::move(w));
    }
    return out;
  }();
  return words;
}

const std::vector<std::string>& marker_vocabulary() {
  static const std::vector<std::string> words = {"miracle", "cure",    "hoax",   "bleach",
                                                 "plandemic", "coverup", "secret", "banned"};
  return words;
}

std::string neutral_text(Rng& rng, std::size_t n) {
  const auto& vocab = neutral_vocabulary();
  std::string out;
  out.reserve(n * 7);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out.push_back(' ');
    out += vocab[rng.below(vocab.size())];
  }
  return out;
}

PlantedCorpus planted_corpus(const PlantedOptions& options) {
  if (options.n_fake + options.n_real == 0) throw ConfigError("planted corpus needs articles");
  if (!(options.marker_rate > 0.0 && options.marker_rate <= 1.0)) {
    throw ConfigError("marker_rate must lie in (0, 1]");
  }
  Rng rng(mix64(options.seed ^ 0x706c616e74ULL));
  const auto n_late = static_cast<std::size_t>(
      std::llround(options.late_fraction * static_cast<double>(options.n_fake)));

  struct Draft {
    NewsArticle article;
    std::optional<std::size_t> start;
  };
  std::vector<Draft> drafts;
  drafts.reserve(options.n_fake + options.n_real);
  for (std::size_t i = 0; i < options.n_fake; ++i) {
    const bool late = i < n_late;
    const auto intro = static_cast<std::size_t>(late ? rng.between(530, 700) : rng.between(0, 400));
    const std::size_t body =
        std::max<std::size_t>(600, options.body_ratio * intro) + rng.below(late ? 800 : 1000);
    NewsArticle a;
    a.label = Label::fake;
    a.body = join(neutral_text(rng, intro), marker_text(rng, body, options.marker_rate));
    drafts.push_back({std::move(a), intro});
  }
  for (std::size_t i = 0; i < options.n_real; ++i) {
    NewsArticle a;
    a.label = Label::real;
    a.body = neutral_text(rng, static_cast<std::size_t>(rng.between(400, 4000)));
    drafts.push_back({std::move(a), std::nullopt});
  }
  rng.shuffle(std::span<Draft>(drafts));

  PlantedCorpus out;
  out.dataset.name = "planted";
  out.dataset.language = Language::en;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    drafts[i].article.id = fmt::format("syn-{:04d}", i);
    drafts[i].article.language = Language::en;
    out.dataset.articles.push_back(std::move(drafts[i].article));
    out.signal_start.push_back(drafts[i].start);
  }
  return out;
}

std::vector<std::size_t> late_signal_indices(const PlantedCorpus& corpus,
                                             std::size_t token_limit) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.signal_start.size(); ++i) {
    if (corpus.signal_start[i] && *corpus.signal_start[i] >= token_limit) out.push_back(i);
  }
  return out;
}

Dataset composition_fixture(const CompositionSpec& spec) {
  if (spec.fake > spec.total || spec.long_text > spec.total) {
    throw ConfigError("composition counts exceed the total");
  }
  Rng rng(mix64(spec.seed ^ 0x636f6d70ULL));
  std::vector<Label> labels(spec.total, Label::real);
  std::fill_n(labels.begin(), spec.fake, Label::fake);
  rng.shuffle(std::span<Label>(labels));
  std::vector<std::size_t> long_order(spec.total);
  for (std::size_t i = 0; i < spec.total; ++i) long_order[i] = i;
  rng.shuffle(std::span<std::size_t>(long_order));

  Dataset ds;
  ds.name = spec.name;
  ds.language = spec.language;
  ds.articles.reserve(spec.total);
  for (std::size_t i = 0; i < spec.total; ++i) {
    const bool long_text = long_order[i] < spec.long_text;
    const auto limit = static_cast<std::int64_t>(spec.token_limit);
    const auto n = static_cast<std::size_t>(long_text ? rng.between(limit + 1, limit + 700)
                                                      : rng.between(20, limit));
    NewsArticle a;
    a.id = fmt::format("{}-{:05d}", spec.name, i);
    a.language = spec.language;
    a.label = labels[i];
    a.body = spec.language == Language::zh ? cjk_text(rng, n) : neutral_text(rng, n);
    ds.articles.push_back(std::move(a));
  }
  return ds;
}

CompositionSpec training_composition() {
  return {"train", Language::en, 2840, 1398, 2325, 512, 11};
}

CompositionSpec test_composition() {
  return {"test", Language::zh, 200, 86, 82, 512, 13};
}

}  // namespace crossfake::synthetic
