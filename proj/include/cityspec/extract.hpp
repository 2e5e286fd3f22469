// extract.hpp : slot tagging and refinement
//
// Text goes through a tagger (anything implementing Tagger) to a raw SlotSet,
// then refine() fills the normalized views: time -> TimeInterval, condition ->
// (comparator, constant, unit), location -> SpatialDomain. LexiconTagger is
// the deterministic reference tagger driven by the knowledge base.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cityspec/knowledge.hpp"
#include "cityspec/reqmodel.hpp"

namespace cityspec {

// Dialogue signals rather than failures: the phrase needs clarification.
class AmbiguousTime : public std::runtime_error {
 public:
  explicit AmbiguousTime(std::string phrase)
      : std::runtime_error("ambiguous time expression '" + phrase + "'"), phrase_(std::move(phrase)) {}
  const std::string& phrase() const { return phrase_; }

 private:
  std::string phrase_;
};

class NoNumericConstant : public std::runtime_error {
 public:
  explicit NoNumericConstant(std::string phrase)
      : std::runtime_error("no numeric constant in '" + phrase + "'"), phrase_(std::move(phrase)) {}
  const std::string& phrase() const { return phrase_; }

 private:
  std::string phrase_;
};

class TaggerContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ── Time ────────────────────────────────────────────────────────────────────

// "from 8:00 to 16:00" -> [8,16]; "between 7 am to 8 am" -> [7,8];
// ""/"always"/"every day"/"at any time" -> [0,+inf) ;
// "2023-05-01"/"05-01-2023" -> [0,24] with date tag.
// An end before the start wraps past midnight ("22:00 to 6:00" -> [22,30]).
// Vague or unrecognized phrases throw AmbiguousTime.
TimeSpec normalize_time(std::string_view phrase);

// Renders an interval the way the template sentence shows it:
// [7,8] -> "between 7:00 to 8:00", [0,+inf) -> "always".
std::string describe_time(const TimeSpec& t);

// ── Conditions ──────────────────────────────────────────────────────────────

// Comparator phrases, matched case-insensitively on whole tokens. `before`
// entries precede the number ("no more than 5"), `after` entries follow it
// ("5 or less").
struct ComparatorLexicon {
  struct Entry {
    std::vector<std::string> words;  // lowercase tokens
    sastl::Comparator comparator;
    bool after = false;
    std::string text() const;
  };
  std::vector<Entry> entries;
  sastl::Comparator fallback = sastl::Comparator::Le;  // bare number

  static ComparatorLexicon defaults();
  // {"before": {"LE": [...], ...}, "after": {...}, "default": "LE"}
  static ComparatorLexicon from_json(const Json& j);
  static ComparatorLexicon load(const std::string& path);
  Json to_json() const;
};

// Negation cues ("not", "no", "never", "cannot", "*n't") among `tokens`
// within the clause containing `span`, skipping tokens flagged in `ignore`.
// Odd count = negated. Clauses are delimited by . , ; : ! ?
bool detect_negation(const std::vector<Token>& tokens, const Span& span, const std::vector<bool>& ignore = {});

// "0.3 cfm per square foot" tail after the number -> "cfm/foot²".
std::string normalize_unit(const std::vector<std::string>& words);

// Parses the first condition phrase of `slots`. A phrase with a span is read
// in the context of `text`; a phrase without one (user answer) is read on its
// own, falling back to comparator phrases in `text`. Throws NoNumericConstant.
ConditionParse parse_condition(std::string_view text, const SlotSet& slots, const ComparatorLexicon& lexicon);

// ── Location ────────────────────────────────────────────────────────────────

// "within 200 meters of all the schools" -> school & [0,200];
// "Golf Cart Path" -> Golf Cart Path & [0,+inf).
sastl::SpatialDomain normalize_location(std::string_view phrase);

// ── Tagging ─────────────────────────────────────────────────────────────────

class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual SlotSet tag(std::string_view text, const KnowledgeBase& kb) const = 0;
};

// Reference tagger. Candidates come from exact (case-insensitive) vocabulary
// hits (confidence 1.0), plural-stem vocabulary hits, time expressions,
// numbers with units, and "within N <unit> of <place>" / "nearby <place>"
// locations (0.6). Overlapping candidates of one kind merge into a run; a
// token claimed by several kinds goes to the longest run, then to the kind
// whose run sits in a context seen around that placeholder in a KB pattern,
// then location > time > condition > quantifier > entity.
class LexiconTagger : public Tagger {
 public:
  SlotSet tag(std::string_view text, const KnowledgeBase& kb) const override;
};

// Runs `tagger` and rejects output that breaks the SlotSet invariants.
SlotSet checked_tag(const Tagger& tagger, std::string_view text, const KnowledgeBase& kb);

// ── Refinement ──────────────────────────────────────────────────────────────

struct RefineResult {
  SlotSet slots;
  std::vector<Ambiguity> issues;  // AmbiguousTime / NoNumericConstant signals
};

// Recomputes every normalized view from the phrases; idempotent. An absent
// time phrase yields the defaulted [0,+inf).
RefineResult refine(const SlotSet& slots, std::string_view text, const ComparatorLexicon& lexicon);

// ── Assembly ────────────────────────────────────────────────────────────────

class IncompleteSlots : public std::runtime_error {
 public:
  explicit IncompleteSlots(std::vector<KeyKind> missing);
  const std::vector<KeyKind>& missing() const { return missing_; }

 private:
  std::vector<KeyKind> missing_;
};

// Subject variable: "number of taxi" for a counting entity, "Golf Cart speed"
// when the quantifier comes first in the text, "air infiltration rate of
// glass" when the entity does, or whichever of the two is present.
std::string subject_variable(const SlotSet& slots);

// Everywhere_{D} Always_I inner, inner being an atom over the subject
// variable, or Agg_op_{D} when the entity names an average/maximum/minimum/
// total. Needs refined slots; throws IncompleteSlots.
sastl::Formula assemble_specification(const SlotSet& slots);

// "[number] of [taxi] should be [<] [10] [between 7:00 to 8:00] [within 200
// meters of all the schools]". Throws IncompleteSlots.
std::string render_template(const SlotSet& slots);

}  // namespace cityspec
