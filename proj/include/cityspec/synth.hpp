// synth.hpp : controllable requirement synthesis
//
// Rows are produced by filling KB patterns from per-kind phrase streams. Each
// stream is a concatenation of seeded random permutations of that kind's
// vocabulary, and a kind's cursor only moves when a pattern consumes it, so
// after lambda*|V_k| consumptions every phrase of kind k has appeared at
// least lambda times.
//
// The row count is lambda * max|V_k| over the kinds the patterns use. Which
// pattern fills a row is the policy's choice:
//   coverage_first  - a pattern that consumes every kind whose outstanding
//                     need equals the rows left (so the lambda guarantee
//                     holds whenever one pattern uses all kinds), the one
//                     covering most outstanding need; ties round-robin.
//   round_robin     - patterns cycled in KB order.
//   uniform_random  - seeded uniform choice.
// Only coverage_first guarantees the minimum; the others are kept for
// comparison and report the achieved minimum in the manifest.

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cityspec/knowledge.hpp"

namespace cityspec {

class EmptyVocabulary : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoPatterns : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PatternPolicy { CoverageFirst, RoundRobin, UniformRandom };
std::string_view policy_name(PatternPolicy p);
std::optional<PatternPolicy> policy_from_name(std::string_view s);

struct SynthesisConfig {
  std::size_t lambda = 5;
  std::uint64_t seed = 42;
  PatternPolicy policy = PatternPolicy::CoverageFirst;
};

// Portable seeded randomness: mt19937_64 is fully specified, the standard
// distributions and std::shuffle are not, so both are done by hand here.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);
template <class T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

std::size_t compute_volume(std::size_t lambda, const std::vector<std::size_t>& vocab_sizes);

// Infinite per-kind stream; phrases() grows by whole permutations.
class PhraseStream {
 public:
  PhraseStream(std::vector<std::string> vocab, std::uint64_t seed);
  const std::string& next();
  // First n elements (extends as needed).
  std::vector<std::string> prefix(std::size_t n);
  std::size_t consumed() const { return cursor_; }

 private:
  void extend();
  std::vector<std::string> vocab_;
  std::vector<std::string> items_;
  std::mt19937_64 rng_;
  std::size_t cursor_ = 0;
};

// Stream arrays of length >= ell (rounded up to whole permutations) for every
// kind with a non-empty vocabulary. Throws EmptyVocabulary if none is.
std::map<KeyKind, std::vector<std::string>> build_streams(const KnowledgeBase& kb, std::size_t ell,
                                                          std::uint64_t seed);

// Train/test hygiene: phrases (normalized) and patterns never to be emitted.
struct Exclusions {
  std::array<std::set<std::string>, 5> phrases;
  std::set<std::string> patterns;
  bool empty() const;
};
Exclusions exclusions_from(const std::vector<Requirement>& reqs);

struct SynthesizedRequirement {
  std::string text;
  SlotSet gold;  // spans recomputed on the text's tokens
  std::string pattern;
  std::vector<std::string> phrases;  // in placeholder order
  std::size_t row = 0;
};

struct SynthesisManifest {
  std::size_t lambda = 0;
  std::uint64_t seed = 0;
  PatternPolicy policy = PatternPolicy::CoverageFirst;
  std::size_t volume = 0;
  std::vector<KeyKind> kinds;                // kinds used by the patterns
  std::array<std::size_t, 5> vocab_sizes{};  // after exclusions
  std::size_t min_occurrence = 0;            // over every phrase of a used kind
  std::size_t patterns_available = 0;
  std::size_t excluded_phrases = 0;
  std::size_t excluded_patterns = 0;
  bool coverage_guaranteed = false;  // some pattern uses every used kind
};

struct SynthesisResult {
  std::vector<SynthesizedRequirement> rows;
  SynthesisManifest manifest;
};

// Throws NoPatterns when no pattern survives the exclusions, EmptyVocabulary
// when a kind used by a pattern has no phrase.
SynthesisResult synthesize(const KnowledgeBase& kb, const SynthesisConfig& cfg, const Exclusions& exclude = {});

Json synthesized_to_json(const SynthesizedRequirement& r);
Json manifest_to_json(const SynthesisManifest& m);

}  // namespace cityspec
