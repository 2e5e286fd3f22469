#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cityspec/extract.hpp"
#include "support.hpp"

using namespace cityspec;
using sastl::Comparator;

namespace {

KeyedPhrase at(KeyKind k, const std::vector<Token>& toks, std::size_t b, std::size_t e, const std::string& src) {
  KeyedPhrase p;
  p.kind = k;
  p.span = Span{b, e};
  p.text = span_text(src, toks, *p.span);
  return p;
}

// Condition parse of `text`, whose condition is the token "5" and entity "speed".
ConditionParse condition_of(const std::string& text, const ComparatorLexicon& lex) {
  auto toks = tokenize(text);
  SlotSet s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].text == "5") s.add(at(KeyKind::Condition, toks, i, i + 1, text));
    if (toks[i].text == "speed") s.add(at(KeyKind::Entity, toks, i, i + 1, text));
  }
  return parse_condition(text, s, lex);
}

std::string words_of(const ComparatorLexicon::Entry& e) { return e.text(); }

std::string formula_for(const Requirement& gold) {
  RefineResult r = refine(gold.slots, gold.source_text, ComparatorLexicon::defaults());
  REQUIRE(r.issues.empty());
  return sastl::print_formula(assemble_specification(r.slots));
}

}  // namespace

// ── Time ────────────────────────────────────────────────────────────────────

TEST_CASE("time phrases normalize to hour intervals") {
  using sastl::TimeInterval;
  auto iv = [](long long a, long long b) { return TimeInterval::make(Rational(a), Bound::finite(Rational(b))); };
  CHECK(normalize_time("from 8:00 to 16:00").interval == iv(8, 16));
  CHECK(normalize_time("between 7 am to 8 am").interval == iv(7, 8));
  CHECK(normalize_time("22:00 to 6:00").interval == iv(22, 30));
  for (const char* always : {"", "always", "every day", "at any time"})
    CHECK(normalize_time(always).interval == TimeInterval::unbounded());
  TimeSpec d = normalize_time("2023-05-01");
  CHECK(d.interval == iv(0, 24));
  CHECK(d.date == "2023-05-01");
  CHECK(normalize_time("05-01-2023").date == "2023-05-01");
  CHECK_THROWS_AS(normalize_time("after midnight"), AmbiguousTime);
  CHECK_THROWS_AS(normalize_time("soon"), AmbiguousTime);
}

TEST_CASE("time intervals render for the template sentence") {
  CHECK(describe_time(normalize_time("between 7 am to 8 am")) == "between 7:00 to 8:00");
  CHECK(describe_time(normalize_time("always")) == "always");
}

// ── Conditions ──────────────────────────────────────────────────────────────

TEST_CASE("units normalize") {
  CHECK(normalize_unit({"cfm", "per", "square", "foot"}) == "cfm/foot²");
  CHECK(normalize_unit({"miles", "per", "hour"}) == "miles/hour");
  CHECK(normalize_unit({}).empty());
}

TEST_CASE("every comparator entry parses as itself and flips under one negation") {
  const ComparatorLexicon lex = ComparatorLexicon::defaults();
  REQUIRE(lex.entries.size() > 40);
  for (const auto& e : lex.entries) {
    std::string w = words_of(e);
    std::string plain = e.after ? "the speed shall be 5 " + w + " ." : "the speed shall be " + w + " 5 .";
    std::string negated = e.after ? "the speed shall not be 5 " + w + " ." : "the speed shall not be " + w + " 5 .";
    std::string twice = e.after ? "it is not true that the speed shall never be 5 " + w + " ."
                                : "it is not true that the speed shall never be " + w + " 5 .";
    INFO(w);
    ConditionParse p = condition_of(plain, lex);
    CHECK(p.comparator == e.comparator);
    CHECK_FALSE(p.negated);
    CHECK(p.constant == Rational(5));

    ConditionParse n = condition_of(negated, lex);
    CHECK(n.comparator == sastl::flip(e.comparator));
    CHECK(n.negated);

    ConditionParse nn = condition_of(twice, lex);
    CHECK(nn.comparator == e.comparator);
    CHECK_FALSE(nn.negated);
  }
}

TEST_CASE("negation cues stay inside their clause and skip ignored tokens") {
  auto toks = tokenize("if not raining, speed below 5");
  CHECK_FALSE(detect_negation(toks, Span{5, 7}));
  auto own = tokenize("speed must not exceed 5");
  CHECK(detect_negation(own, Span{4, 5}));
  std::vector<bool> ignore(own.size(), false);
  ignore[2] = true;
  CHECK_FALSE(detect_negation(own, Span{4, 5}, ignore));
  CHECK(detect_negation(tokenize("speed can't be over 5"), Span{4, 5}));
}

TEST_CASE("a bare number uses the configured fallback") {
  ComparatorLexicon lex = ComparatorLexicon::defaults();
  CHECK(condition_of("the speed is 5 .", lex).comparator == Comparator::Le);
  lex.fallback = Comparator::Lt;
  CHECK(condition_of("the speed is 5 .", lex).comparator == Comparator::Lt);
}

TEST_CASE("a condition without a number signals NoNumericConstant") {
  std::string text = "the speed should be slow";
  auto toks = tokenize(text);
  SlotSet s;
  s.add(at(KeyKind::Condition, toks, 4, 5, text));
  CHECK_THROWS_AS(parse_condition(text, s, ComparatorLexicon::defaults()), NoNumericConstant);
}

TEST_CASE("comparators file matches the built-in lexicon") {
  ComparatorLexicon file = ComparatorLexicon::load(testing::source_path("data/comparators.json"));
  CHECK(file.to_json() == ComparatorLexicon::defaults().to_json());
}

// ── Location ────────────────────────────────────────────────────────────────

TEST_CASE("locations normalize to labelled domains") {
  auto d = normalize_location("within 200 meters of all the schools");
  CHECK(d == sastl::SpatialDomain::make(sastl::Proposition::make_label("school"), Rational(0),
                                        Bound::finite(Rational(200))));
  CHECK(normalize_location("Golf Cart Path") ==
        sastl::SpatialDomain::make(sastl::Proposition::make_label("Golf Cart Path"), Rational(0), Bound::infinite()));
}

// ── Tagging ─────────────────────────────────────────────────────────────────

TEST_CASE("taxi sentence tags four kinds and no location") {
  SlotSet s = checked_tag(LexiconTagger{}, testing::taxi_sentence(), testing::seed_kb());
  REQUIRE(s.has(KeyKind::Entity));
  REQUIRE(s.has(KeyKind::Quantifier));
  REQUIRE(s.has(KeyKind::Time));
  REQUIRE(s.has(KeyKind::Condition));
  CHECK_FALSE(s.has(KeyKind::Location));
  CHECK(s.first(KeyKind::Entity)->text == "the number");
  CHECK(s.first(KeyKind::Quantifier)->text == "taxis");
  CHECK(s.first(KeyKind::Quantifier)->display() == "taxi");
  CHECK(s.first(KeyKind::Time)->text == "between 7 am to 8 am");
  CHECK(s.first(KeyKind::Condition)->text == "10");
}

TEST_CASE("table one sentences tag to their gold phrases") {
  auto gold = testing::seed_markup();
  for (std::size_t i = 0; i < 3; ++i) {
    INFO(gold[i].source_text);
    SlotSet s = checked_tag(LexiconTagger{}, gold[i].source_text, testing::seed_kb());
    CHECK(s.same_phrases(gold[i].slots));
  }
}

TEST_CASE("a promoted term is tagged with full confidence") {
  KnowledgeBase kb = testing::seed_kb();
  std::string text = "the number of taxis on Music Row should be less than 10";
  SlotSet before = checked_tag(LexiconTagger{}, text, kb);
  CHECK_FALSE(before.has(KeyKind::Location));
  kb.add_term(KeyKind::Location, "Music Row", Provenance::Promoted);
  SlotSet after = checked_tag(LexiconTagger{}, text, kb);
  REQUIRE(after.has(KeyKind::Location));
  CHECK(after.first(KeyKind::Location)->text == "Music Row");
  CHECK(after.first(KeyKind::Location)->confidence == 1.0);
}

TEST_CASE("property: adding vocabulary never removes a full-confidence phrase of another span") {
  // Every exact vocabulary hit survives when an unrelated term is added.
  const KnowledgeBase& base = testing::seed_kb();
  for (const auto& r : testing::seed_markup()) {
    SlotSet before = checked_tag(LexiconTagger{}, r.source_text, base);
    KnowledgeBase kb = base;
    kb.add_term(KeyKind::Location, "Zzyzx Road", Provenance::Promoted);
    SlotSet after = checked_tag(LexiconTagger{}, r.source_text, kb);
    INFO(r.source_text);
    CHECK(after.same_phrases(before));
  }
}

namespace {
class OverlappingTagger : public Tagger {
 public:
  SlotSet tag(std::string_view, const KnowledgeBase&) const override {
    SlotSet s;
    KeyedPhrase p;
    p.kind = KeyKind::Entity;
    p.text = "nonsense";
    p.span = Span{0, 1};
    s.add(p);
    return s;
  }
};
}  // namespace

TEST_CASE("checked_tag rejects a tagger whose spans disagree with the text") {
  CHECK_THROWS_AS(checked_tag(OverlappingTagger{}, "the speed", testing::seed_kb()), TaggerContractViolation);
}

// ── Refinement and assembly ─────────────────────────────────────────────────

TEST_CASE("refine is idempotent on the seed corpus") {
  auto lex = ComparatorLexicon::defaults();
  for (const auto& r : testing::seed_markup()) {
    RefineResult once = refine(r.slots, r.source_text, lex);
    RefineResult twice = refine(once.slots, r.source_text, lex);
    INFO(r.source_text);
    CHECK(twice.slots.time == once.slots.time);
    CHECK(twice.slots.condition == once.slots.condition);
    CHECK(twice.slots.location == once.slots.location);
    CHECK(twice.issues == once.issues);
  }
}

TEST_CASE("table one assembles from gold slots") {
  auto gold = testing::seed_markup();
  CHECK(formula_for(gold[0]) ==
        "Everywhere_{Sliding glass doors} Always_[0,inf) air infiltration rate <= 0.3 cfm/foot²");
  // "restricted to a maximum" reads as <=; the published row shows <.
  CHECK(formula_for(gold[1]) == "Everywhere_{Golf Cart Path} Always_[8,16] Golf Cart speed <= 15 miles/hour");
  CHECK(formula_for(gold[2]) == "Everywhere_{city block} Always_[0,inf) vending vehicles <= 4");
}

TEST_CASE("aggregation words select Agg only from inside the entity phrase") {
  auto gold = testing::seed_markup();
  // annotated with "average" outside the entity span
  CHECK(formula_for(gold[3]) == "Everywhere_{building} Always_[0,inf) concentration of TVOC <= 0.6 mg/m3");

  Requirement r = gold[3];
  KeyedPhrase e;
  e.kind = KeyKind::Entity;
  e.text = "average concentration";
  r.slots.replace(KeyKind::Entity, {e});
  CHECK(formula_for(r) ==
        "Everywhere_{building} Always_[0,inf) Agg_avg_{building} concentration of TVOC <= 0.6 mg/m3");
}

TEST_CASE("template sentence for the worked example") {
  std::string text = testing::taxi_sentence();
  SlotSet s = checked_tag(LexiconTagger{}, text, testing::seed_kb());
  KeyedPhrase loc;
  loc.kind = KeyKind::Location;
  loc.text = "within 200 meters of all the schools";
  s.add(loc);
  SlotSet refined = refine(s, text, ComparatorLexicon::defaults()).slots;
  CHECK(render_template(refined) ==
        "[number] of [taxi] should be [<] [10] [between 7:00 to 8:00] [within 200 meters of all the schools]");
  CHECK(sastl::print_formula(assemble_specification(refined)) ==
        "Everywhere_{school & [0,200]} Always_[7,8] number of taxi < 10");
}

TEST_CASE("assembly reports missing kinds") {
  SlotSet s = checked_tag(LexiconTagger{}, testing::taxi_sentence(), testing::seed_kb());
  SlotSet refined = refine(s, testing::taxi_sentence(), ComparatorLexicon::defaults()).slots;
  try {
    assemble_specification(refined);
    FAIL("expected IncompleteSlots");
  } catch (const IncompleteSlots& e) {
    CHECK(e.missing() == std::vector<KeyKind>{KeyKind::Location});
  }
}
