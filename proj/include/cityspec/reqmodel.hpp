// reqmodel.hpp : requirement data model
//
// A requirement is raw text, its tokens, and a SlotSet holding the five keyed
// phrases (entity, quantifier, location, time, condition). Phrases found in
// the source carry a token span; phrases supplied later by the user (answers,
// revisions) carry none.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cityspec/sastl.hpp"

namespace cityspec {

// ── Keys ────────────────────────────────────────────────────────────────────

enum class KeyKind { Entity, Quantifier, Location, Time, Condition };

inline constexpr std::array<KeyKind, 5> kAllKinds = {KeyKind::Entity, KeyKind::Quantifier, KeyKind::Location,
                                                     KeyKind::Time, KeyKind::Condition};

std::string_view kind_name(KeyKind k);
std::optional<KeyKind> kind_from_name(std::string_view s);
inline std::size_t kind_index(KeyKind k) { return static_cast<std::size_t>(k); }

// ── Tokens ──────────────────────────────────────────────────────────────────

struct Token {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the source
  std::size_t end = 0;
  friend bool operator==(const Token&, const Token&) = default;
};

// Whitespace split; . , ; : ! ? ( ) become their own tokens, except a '.'
// followed by an alphanumeric ("0.3", "a.m") and a ',' or ':' between digits
// ("1,000", "8:00"). Hyphens and slashes stay inside tokens.
std::vector<Token> tokenize(std::string_view text);
std::string detokenize(const std::vector<Token>& tokens);
std::vector<std::string> token_texts(const std::vector<Token>& tokens);

// ── Lexical helpers shared by the tagger and the checks ─────────────────────

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
// Lowercased, whitespace-collapsed form used for case-insensitive matching.
std::string normalize_phrase(std::string_view s);
// "one".."twenty" and "zero".
std::optional<int> number_word_value(std::string_view lower_word);
// Digits ("10", "0.3", "1,000", "1/2") or a number word.
std::optional<Rational> parse_number_token(std::string_view token);
// Naive plural stripping: taxis -> taxi, cities -> city, boxes -> box.
std::string singularize(std::string_view word);

// ── Phrases and slots ───────────────────────────────────────────────────────

struct Span {
  std::size_t begin = 0;  // token indices, half-open
  std::size_t end = 0;
  bool overlaps(const Span& o) const { return begin < o.end && o.begin < end; }
  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct KeyedPhrase {
  KeyKind kind = KeyKind::Entity;
  std::string text;
  std::optional<Span> span;
  double confidence = 1.0;
  // Form used when assembling a formula (e.g. the vocabulary entry "taxi" for
  // source text "taxis"). Empty means `text`.
  std::string canonical;

  const std::string& display() const { return canonical.empty() ? text : canonical; }
};

class SlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Normalized views filled in by refinement.
struct TimeSpec {
  sastl::TimeInterval interval;
  std::optional<std::string> date;  // ISO yyyy-mm-dd when the phrase names a day
  std::vector<std::string> notes;   // e.g. dropped periodicity markers
  bool defaulted = false;           // no time phrase; [0,+inf) was filled in
  friend bool operator==(const TimeSpec&, const TimeSpec&) = default;
};

struct ConditionParse {
  sastl::Comparator comparator = sastl::Comparator::Le;
  Rational constant;
  std::string unit;
  bool negated = false;  // comparator is stored after the flip
  std::string comparator_phrase;
  friend bool operator==(const ConditionParse&, const ConditionParse&) = default;
};

class SlotSet {
 public:
  // Throws SlotError if the phrase's span overlaps an existing span.
  void add(KeyedPhrase p);
  void replace(KeyKind k, std::vector<KeyedPhrase> phrases);
  void clear(KeyKind k);

  const std::vector<KeyedPhrase>& get(KeyKind k) const { return phrases_[kind_index(k)]; }
  bool has(KeyKind k) const { return !get(k).empty(); }
  const KeyedPhrase* first(KeyKind k) const { return has(k) ? &get(k).front() : nullptr; }
  std::vector<KeyedPhrase> all() const;  // sorted by span start, span-less last
  bool empty() const;

  // Kind, text and span agree (confidence and normalized views ignored).
  bool same_phrases(const SlotSet& o) const;

  std::optional<TimeSpec> time;
  std::optional<ConditionParse> condition;
  std::optional<sastl::SpatialDomain> location;

 private:
  std::array<std::vector<KeyedPhrase>, 5> phrases_;
};

// Checks every span is inside the token range, non-empty, and that the
// phrase text equals the source substring covered by the span.
void validate_spans(const SlotSet& slots, std::string_view source, const std::vector<Token>& tokens);
std::string span_text(std::string_view source, const std::vector<Token>& tokens, const Span& span);

// ── Requirement ─────────────────────────────────────────────────────────────

enum class Status { Draft, AwaitingClarification, Proposed, Confirmed };
std::string_view status_name(Status s);
std::optional<Status> status_from_name(std::string_view s);

struct Requirement {
  std::string id;
  std::string source_text;
  std::vector<Token> tokens;
  SlotSet slots;
  Status status = Status::Draft;
  std::optional<sastl::Formula> formula;

  static Requirement from_text(std::string id, std::string text);
};

// Deterministic id derived from the whitespace-normalized text.
std::string requirement_id_for(std::string_view text);

// ── Checks ──────────────────────────────────────────────────────────────────

enum class CompletenessMode { Lenient, Strict };

struct CompletenessReport {
  std::vector<KeyKind> missing;
  std::vector<KeyKind> defaulted;
  bool complete() const { return missing.empty(); }
};

// Strict: every kind without a phrase is missing.
// Lenient: an absent time is defaulted to [0,+inf). When exactly one of
// entity/quantifier is present the other is defaulted too, so a requirement
// like "Up to four vending vehicles ..." names its subject once.
CompletenessReport check_completeness(const SlotSet& slots, CompletenessMode mode = CompletenessMode::Lenient);
std::vector<KeyKind> completeness_check(const SlotSet& slots, CompletenessMode mode = CompletenessMode::Lenient);

struct VagueTerms {
  std::vector<std::string> terms;
  static VagueTerms defaults();
  // One term per line; blank lines and '#' comments ignored.
  static VagueTerms load(const std::string& path);
};

enum class AmbiguityReason { VagueDistance, VagueTime, VagueTerm, NonNumeric };
std::string_view reason_name(AmbiguityReason r);

struct Ambiguity {
  KeyKind kind;
  std::string phrase;
  AmbiguityReason reason;
  std::string term;  // the vague term that matched; empty for NonNumeric
  friend bool operator==(const Ambiguity&, const Ambiguity&) = default;
};

std::vector<Ambiguity> ambiguity_check(const SlotSet& slots, const VagueTerms& vague = VagueTerms::defaults());

}  // namespace cityspec
