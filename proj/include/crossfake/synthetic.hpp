#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crossfake/corpus.hpp"
#include "crossfake/rng.hpp"

namespace crossfake::synthetic {

/// Fixed pool of lower-case pseudo-words that carry no label signal.
const std::vector<std::string>& neutral_vocabulary();

/// Words planted into fake bodies.
const std::vector<std::string>& marker_vocabulary();

/// `n` space-separated neutral words; each is one token under the hash
/// tokenizer.
std::string neutral_text(Rng& rng, std::size_t n);

struct PlantedOptions {
  std::size_t n_fake = 200;
  std::size_t n_real = 200;
  // Share of fakes whose signal starts after the first 512 tokens.
  double late_fraction = 1.0 / 3.0;
  // Probability that a token in a fake body is a marker.
  double marker_rate = 0.5;
  // Signal body is at least this many times the neutral lead-in.
  std::size_t body_ratio = 9;
  std::uint64_t seed = 7;
};

struct PlantedCorpus {
  Dataset dataset;
  // Token offset of the first signal-bearing token; absent for real articles.
  std::vector<std::optional<std::size_t>> signal_start;
};

// Fake articles open with a neutral lead-in and continue with a body in which
// marker words are mixed among neutral ones. Late fakes have a lead-in longer
// than 512 tokens, so a truncating classifier never sees their signal. Real
// articles are neutral throughout. Article order is shuffled.
PlantedCorpus planted_corpus(const PlantedOptions& options = {});

/// Indices of fakes whose signal starts at or beyond `token_limit`.
std::vector<std::size_t> late_signal_indices(const PlantedCorpus& corpus,
                                             std::size_t token_limit = 512);

// Target composition of a statistics fixture.
struct CompositionSpec {
  std::string name;
  Language language = Language::en;
  std::size_t total = 0;
  std::size_t fake = 0;
  // Articles whose hash-tokenizer length exceeds token_limit.
  std::size_t long_text = 0;
  std::size_t token_limit = 512;
  std::uint64_t seed = 1;
};

/// Labeled dataset with exactly the requested counts. English bodies are
/// neutral words, Chinese bodies CJK characters (one token each).
Dataset composition_fixture(const CompositionSpec& spec);

/// 2840 English articles, 1398 fake, 2325 longer than 512 tokens.
CompositionSpec training_composition();
/// 200 Chinese articles, 86 fake, 82 longer than 512 tokens.
CompositionSpec test_composition();

}  // namespace crossfake::synthetic
