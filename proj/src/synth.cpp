// synth.cpp : pattern-based requirement synthesis

#include "cityspec/synth.hpp"

#include <algorithm>
#include <limits>

namespace cityspec {

std::string_view policy_name(PatternPolicy p) {
  switch (p) {
    case PatternPolicy::CoverageFirst: return "coverage_first";
    case PatternPolicy::RoundRobin: return "round_robin";
    case PatternPolicy::UniformRandom: return "uniform_random";
  }
  return "?";
}

std::optional<PatternPolicy> policy_from_name(std::string_view s) {
  for (auto p : {PatternPolicy::CoverageFirst, PatternPolicy::RoundRobin, PatternPolicy::UniformRandom})
    if (policy_name(p) == s) return p;
  return std::nullopt;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  // rejection sampling keeps the result unbiased
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

std::size_t compute_volume(std::size_t lambda, const std::vector<std::size_t>& sizes) {
  if (lambda < 1) throw std::invalid_argument("lambda must be >= 1");
  if (sizes.empty()) throw EmptyVocabulary("no vocabulary sizes given");
  std::size_t mx = 0;
  for (auto s : sizes) {
    if (s == 0) throw EmptyVocabulary("a vocabulary is empty");
    mx = std::max(mx, s);
  }
  return lambda * mx;
}

// ── Streams ─────────────────────────────────────────────────────────────────

PhraseStream::PhraseStream(std::vector<std::string> vocab, std::uint64_t seed)
    : vocab_(std::move(vocab)), rng_(seed) {
  if (vocab_.empty()) throw EmptyVocabulary("empty vocabulary for stream");
}

void PhraseStream::extend() {
  std::vector<std::string> perm = vocab_;
  portable_shuffle(perm, rng_);
  items_.insert(items_.end(), perm.begin(), perm.end());
}

const std::string& PhraseStream::next() {
  while (cursor_ >= items_.size()) extend();
  return items_[cursor_++];
}

std::vector<std::string> PhraseStream::prefix(std::size_t n) {
  while (items_.size() < n) extend();
  return {items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(n)};
}

namespace {

std::vector<std::string> vocab_texts(const KnowledgeBase& kb, KeyKind k, const Exclusions& ex) {
  std::vector<std::string> out;
  for (const auto& e : kb.vocab(k))
    if (!ex.phrases[kind_index(k)].count(normalize_phrase(e.text))) out.push_back(e.text);
  return out;
}

std::uint64_t stream_seed(std::uint64_t seed, KeyKind k) { return mix_seed(seed, kind_index(k)); }

}  // namespace

std::map<KeyKind, std::vector<std::string>> build_streams(const KnowledgeBase& kb, std::size_t ell,
                                                          std::uint64_t seed) {
  std::map<KeyKind, std::vector<std::string>> out;
  for (KeyKind k : kAllKinds) {
    auto vocab = vocab_texts(kb, k, {});
    if (vocab.empty()) continue;
    std::size_t n = vocab.size();
    std::size_t len = std::max<std::size_t>(1, (ell + n - 1) / n) * n;
    PhraseStream s(std::move(vocab), stream_seed(seed, k));
    out[k] = s.prefix(len);
  }
  if (out.empty()) throw EmptyVocabulary("knowledge base has no vocabulary");
  return out;
}

bool Exclusions::empty() const {
  return patterns.empty() && std::all_of(phrases.begin(), phrases.end(), [](const auto& s) { return s.empty(); });
}

Exclusions exclusions_from(const std::vector<Requirement>& reqs) {
  Exclusions ex;
  for (const auto& r : reqs) {
    for (KeyKind k : kAllKinds)
      for (const auto& p : r.slots.get(k)) ex.phrases[kind_index(k)].insert(normalize_phrase(p.text));
    try {
      ex.patterns.insert(extract_pattern(r));
    } catch (const std::exception&) {
      // unannotated test requirement: nothing to exclude
    }
  }
  return ex;
}

// ── Synthesis ───────────────────────────────────────────────────────────────

namespace {

struct PatternInfo {
  std::string text;
  std::array<std::size_t, 5> uses{};  // placeholder count per kind
};

// Token span covering bytes [b, e) of the filled text, if aligned.
std::optional<Span> align(const std::vector<Token>& tokens, std::size_t b, std::size_t e) {
  std::optional<std::size_t> tb, te;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].begin == b) tb = i;
    if (tokens[i].end == e) te = i + 1;
  }
  if (tb && te && *tb < *te) return Span{*tb, *te};
  return std::nullopt;
}

}  // namespace

SynthesisResult synthesize(const KnowledgeBase& kb, const SynthesisConfig& cfg, const Exclusions& exclude) {
  if (cfg.lambda < 1) throw std::invalid_argument("lambda must be >= 1");
  SynthesisResult result;
  SynthesisManifest& m = result.manifest;
  m.lambda = cfg.lambda;
  m.seed = cfg.seed;
  m.policy = cfg.policy;

  std::vector<PatternInfo> patterns;
  for (const auto& p : kb.patterns()) {
    if (exclude.patterns.count(p.text)) {
      ++m.excluded_patterns;
      continue;
    }
    PatternInfo info{p.text, {}};
    for (KeyKind k : pattern_placeholders(p.text)) ++info.uses[kind_index(k)];
    patterns.push_back(std::move(info));
  }
  if (patterns.empty()) throw NoPatterns("no pattern available for synthesis");
  m.patterns_available = patterns.size();

  std::array<bool, 5> used{};
  for (const auto& p : patterns)
    for (KeyKind k : kAllKinds) used[kind_index(k)] = used[kind_index(k)] || p.uses[kind_index(k)] > 0;

  std::array<std::vector<std::string>, 5> vocab;
  std::vector<std::size_t> sizes;
  for (KeyKind k : kAllKinds) {
    std::size_t i = kind_index(k);
    vocab[i] = vocab_texts(kb, k, exclude);
    m.excluded_phrases += kb.vocab(k).size() - vocab[i].size();
    m.vocab_sizes[i] = vocab[i].size();
    if (!used[i]) continue;
    if (vocab[i].empty()) throw EmptyVocabulary("no phrase for #" + std::string(kind_name(k)));
    m.kinds.push_back(k);
    sizes.push_back(vocab[i].size());
  }
  m.volume = compute_volume(cfg.lambda, sizes);
  m.coverage_guaranteed = std::any_of(patterns.begin(), patterns.end(), [&](const PatternInfo& p) {
    return std::all_of(m.kinds.begin(), m.kinds.end(), [&](KeyKind k) { return p.uses[kind_index(k)] > 0; });
  });

  std::vector<std::optional<PhraseStream>> streams(5);
  for (KeyKind k : m.kinds) streams[kind_index(k)].emplace(vocab[kind_index(k)], stream_seed(cfg.seed, k));

  // outstanding consumptions per kind before every phrase has lambda uses
  std::array<std::size_t, 5> need{};
  for (KeyKind k : m.kinds) need[kind_index(k)] = cfg.lambda * vocab[kind_index(k)].size();

  std::mt19937_64 pick_rng(mix_seed(cfg.seed, 99));
  std::size_t rr = 0;
  std::array<std::map<std::string, std::size_t>, 5> occurrences;

  for (std::size_t row = 0; row < m.volume; ++row) {
    std::size_t chosen = 0;
    switch (cfg.policy) {
      case PatternPolicy::RoundRobin:
        chosen = row % patterns.size();
        break;
      case PatternPolicy::UniformRandom:
        chosen = uniform_below(pick_rng, patterns.size());
        break;
      case PatternPolicy::CoverageFirst: {
        std::size_t rows_left = m.volume - row;
        auto covers_critical = [&](const PatternInfo& p) {
          for (KeyKind k : m.kinds)
            if (need[kind_index(k)] >= rows_left && p.uses[kind_index(k)] == 0) return false;
          return true;
        };
        auto gain = [&](const PatternInfo& p) {
          std::size_t g = 0;
          for (KeyKind k : m.kinds) g += std::min(p.uses[kind_index(k)], need[kind_index(k)]);
          return g;
        };
        bool any_covers = std::any_of(patterns.begin(), patterns.end(), covers_critical);
        std::optional<std::size_t> best;
        std::size_t best_gain = 0;
        for (std::size_t j = 0; j < patterns.size(); ++j) {
          std::size_t idx = (rr + j) % patterns.size();
          if (any_covers && !covers_critical(patterns[idx])) continue;
          std::size_t g = gain(patterns[idx]);
          if (!best || g > best_gain) best = idx, best_gain = g;
        }
        chosen = *best;
        rr = (chosen + 1) % patterns.size();
        break;
      }
    }

    const PatternInfo& p = patterns[chosen];
    SynthesizedRequirement r;
    r.row = row;
    r.pattern = p.text;
    for (KeyKind k : pattern_placeholders(p.text)) {
      std::size_t i = kind_index(k);
      r.phrases.push_back(streams[i]->next());
      if (need[i] > 0) --need[i];
      ++occurrences[i][r.phrases.back()];
    }
    FilledPattern filled = fill_pattern(p.text, r.phrases);
    r.text = filled.text;
    auto tokens = tokenize(r.text);
    for (std::size_t s = 0; s < filled.slots.size(); ++s) {
      KeyedPhrase kp;
      kp.kind = filled.slots[s].kind;
      kp.text = r.phrases[s];
      kp.span = align(tokens, filled.slots[s].begin, filled.slots[s].end);
      try {
        r.gold.add(kp);
      } catch (const SlotError&) {
        kp.span.reset();
        r.gold.add(kp);
      }
    }
    result.rows.push_back(std::move(r));
  }

  std::size_t min_occ = std::numeric_limits<std::size_t>::max();
  for (KeyKind k : m.kinds)
    for (const auto& phrase : vocab[kind_index(k)]) {
      auto it = occurrences[kind_index(k)].find(phrase);
      min_occ = std::min(min_occ, it == occurrences[kind_index(k)].end() ? std::size_t{0} : it->second);
    }
  m.min_occurrence = m.kinds.empty() ? 0 : min_occ;
  return result;
}

Json synthesized_to_json(const SynthesizedRequirement& r) {
  Json j;
  j["text"] = r.text;
  j["slots"] = slots_to_json(r.gold);
  j["pattern"] = r.pattern;
  j["row"] = r.row;
  return j;
}

Json manifest_to_json(const SynthesisManifest& m) {
  Json j;
  j["lambda"] = m.lambda;
  j["seed"] = m.seed;
  j["policy"] = std::string(policy_name(m.policy));
  j["volume"] = m.volume;
  Json kinds = Json::array();
  for (KeyKind k : m.kinds) kinds.push_back(std::string(kind_name(k)));
  j["kinds"] = kinds;
  Json sizes = Json::object();
  for (KeyKind k : kAllKinds) sizes[std::string(kind_name(k))] = m.vocab_sizes[kind_index(k)];
  j["vocab_sizes"] = sizes;
  j["min_occurrence"] = m.min_occurrence;
  j["patterns_available"] = m.patterns_available;
  j["excluded_phrases"] = m.excluded_phrases;
  j["excluded_patterns"] = m.excluded_patterns;
  j["coverage_guaranteed"] = m.coverage_guaranteed;
  return j;
}

}  // namespace cityspec
