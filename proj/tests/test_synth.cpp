#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cityspec/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cityspec;
using namespace cityspec::testing;

// ── Volume ──────────────────────────────────────────────────────────────────

TEST_CASE("volume is lambda times the largest vocabulary") {
  CHECK(compute_volume(5, {38, 40, 47, 38, 51}) == 255);
  CHECK(compute_volume(1, {3}) == 3);
  CHECK(compute_volume(10, {1, 2}) == 20);
  CHECK_THROWS_AS(compute_volume(0, {3}), std::invalid_argument);
  CHECK_THROWS_AS(compute_volume(1, {}), EmptyVocabulary);
}

// ── Streams ─────────────────────────────────────────────────────────────────

TEST_CASE("seed mixing and streams match the reference implementation") {
  // values from tests/oracles/stream_oracle.py
  CHECK(mix_seed(42, 0) == 13679457532755275413ULL);
  CHECK(mix_seed(42, 4) == 701532786141963250ULL);
  PhraseStream s({"a", "b", "c", "d", "e"}, mix_seed(42, 0));
  CHECK(s.prefix(12) == std::vector<std::string>{"d", "a", "c", "e", "b", "e", "a", "b", "d", "c", "c", "d"});
  PhraseStream digits({"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"}, 42);
  CHECK(digits.prefix(10) == std::vector<std::string>{"1", "7", "9", "0", "3", "8", "4", "2", "5", "6"});
}

TEST_CASE("streams are whole permutations and consume lazily") {
  PhraseStream s({"a", "b", "c"}, 1);
  CHECK(s.consumed() == 0);
  auto p = s.prefix(9);
  for (std::size_t block = 0; block < 3; ++block) {
    std::vector<std::string> part(p.begin() + 3 * block, p.begin() + 3 * block + 3);
    std::sort(part.begin(), part.end());
    CHECK(part == std::vector<std::string>{"a", "b", "c"});
  }
  CHECK(s.next() == p[0]);
  CHECK(s.consumed() == 1);
  CHECK_THROWS_AS(PhraseStream({}, 1), EmptyVocabulary);

  KnowledgeBase kb;
  kb.add_term(KeyKind::Entity, "x");
  kb.add_term(KeyKind::Entity, "y");
  kb.add_term(KeyKind::Entity, "z");
  auto streams = build_streams(kb, 7, 3);
  REQUIRE(streams.count(KeyKind::Entity));
  CHECK(streams.at(KeyKind::Entity).size() == 9);  // rounded up to whole permutations
  CHECK_FALSE(streams.count(KeyKind::Location));
  CHECK_THROWS_AS(build_streams(KnowledgeBase{}, 3, 1), EmptyVocabulary);
}

// ── Synthesis ───────────────────────────────────────────────────────────────

TEST_CASE("single pattern: every phrase appears lambda times, the short kind repeats") {
  KnowledgeBase kb;
  for (const char* e : {"a", "b", "c"}) kb.add_term(KeyKind::Entity, e);
  kb.add_term(KeyKind::Location, "x");
  kb.add_pattern("#entity at #location");
  SynthesisResult r = synthesize(kb, {2, 5, PatternPolicy::CoverageFirst});
  CHECK(r.rows.size() == 6);
  auto occ = recount_occurrences(r);
  for (const char* e : {"a", "b", "c"}) CHECK(occ[{KeyKind::Entity, e}] == 2);
  CHECK(occ[{KeyKind::Location, "x"}] == 6);
  CHECK(r.manifest.min_occurrence == 2);
  CHECK(r.manifest.coverage_guaranteed);
}

TEST_CASE("round robin can miss the minimum where coverage-first meets it") {
  KnowledgeBase kb;
  kb.add_term(KeyKind::Entity, "e1");
  kb.add_term(KeyKind::Entity, "e2");
  kb.add_term(KeyKind::Location, "l1");
  kb.add_term(KeyKind::Location, "l2");
  kb.add_pattern("only #entity");
  kb.add_pattern("#entity in #location");

  SynthesisResult rr = synthesize(kb, {1, 0, PatternPolicy::RoundRobin});
  CHECK(rr.rows.size() == 2);
  CHECK(rr.manifest.min_occurrence == 0);

  SynthesisResult cf = synthesize(kb, {1, 0, PatternPolicy::CoverageFirst});
  CHECK(cf.rows.size() == 2);
  CHECK(cf.manifest.min_occurrence == 1);
  auto occ = recount_occurrences(cf);
  CHECK(occ[{KeyKind::Location, "l1"}] == 1);
  CHECK(occ[{KeyKind::Location, "l2"}] == 1);
}

TEST_CASE("property: coverage over random knowledge bases") {
  testing::FormulaGen g(31337);
  for (int n = 0; n < 200; ++n) {
    KnowledgeBase kb = random_kb(g);
    auto kinds = used_kinds(kb);
    std::size_t max_v = 0;
    for (KeyKind k : kinds) max_v = std::max(max_v, kb.vocab(k).size());
    for (std::size_t lambda : {1, 2, 5, 10}) {
      SynthesisResult r = synthesize(kb, {lambda, static_cast<std::uint64_t>(n), PatternPolicy::CoverageFirst});
      REQUIRE(r.rows.size() == lambda * max_v);
      REQUIRE(r.manifest.coverage_guaranteed);
      auto occ = recount_occurrences(r);
      for (KeyKind k : kinds)
        for (const auto& v : kb.vocab(k)) {
          INFO("kb " << n << " lambda " << lambda << " " << kind_name(k) << " " << v.text);
          REQUIRE(occ[{k, v.text}] >= lambda);
        }
    }
  }
}

TEST_CASE("synthesis is a pure function of (kb, config)") {
  const KnowledgeBase& kb = testing::seed_kb();
  for (auto pol : {PatternPolicy::CoverageFirst, PatternPolicy::RoundRobin, PatternPolicy::UniformRandom}) {
    SynthesisResult a = synthesize(kb, {2, 11, pol});
    SynthesisResult b = synthesize(kb, {2, 11, pol});
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      CHECK(dump_line(synthesized_to_json(a.rows[i])) == dump_line(synthesized_to_json(b.rows[i])));
    CHECK(dump_line(manifest_to_json(a.manifest)) == dump_line(manifest_to_json(b.manifest)));
  }
  SynthesisResult c = synthesize(kb, {2, 12});
  SynthesisResult d = synthesize(kb, {2, 11});
  CHECK(c.rows.front().text != d.rows.front().text);
}

TEST_CASE("gold slots point at the substituted phrases") {
  SynthesisResult r = synthesize(testing::seed_kb(), {1, 42});
  std::size_t spanned = 0, total = 0;
  for (const auto& row : r.rows) {
    auto toks = tokenize(row.text);
    INFO(row.text);
    CHECK_NOTHROW(validate_spans(row.gold, row.text, toks));
    auto kinds = pattern_placeholders(row.pattern);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const auto& list = row.gold.get(kinds[i]);
      bool found = std::any_of(list.begin(), list.end(), [&](const KeyedPhrase& p) { return p.text == row.phrases[i]; });
      CHECK(found);
    }
    for (const auto& p : row.gold.all()) {
      ++total;
      spanned += p.span.has_value();
    }
  }
  // placeholders glued to punctuation still split cleanly on the seed patterns
  CHECK(spanned == total);
}

TEST_CASE("seed kb at lambda 5 gives 255 rows with every phrase at least five times") {
  SynthesisResult r = synthesize(testing::seed_kb(), {5, 42});
  CHECK(r.rows.size() == 255);
  CHECK(r.manifest.volume == 255);
  CHECK(r.manifest.min_occurrence >= 5);
  CHECK(r.manifest.coverage_guaranteed);
  CHECK(r.manifest.patterns_available == 48);
}

TEST_CASE("exclusions keep held-out phrases and patterns out") {
  auto reqs = testing::seed_markup();
  std::vector<Requirement> held(reqs.begin(), reqs.begin() + 5);
  Exclusions ex = exclusions_from(held);
  CHECK_FALSE(ex.empty());
  SynthesisResult r = synthesize(testing::seed_kb(), {1, 42}, ex);
  CHECK(r.manifest.excluded_patterns == ex.patterns.size());
  for (const auto& row : r.rows) {
    CHECK_FALSE(ex.patterns.count(row.pattern));
    auto kinds = pattern_placeholders(row.pattern);
    for (std::size_t i = 0; i < kinds.size(); ++i)
      CHECK_FALSE(ex.phrases[kind_index(kinds[i])].count(normalize_phrase(row.phrases[i])));
  }
}

TEST_CASE("synthesis errors") {
  KnowledgeBase no_patterns;
  no_patterns.add_term(KeyKind::Entity, "x");
  CHECK_THROWS_AS(synthesize(no_patterns, {}), NoPatterns);
  KnowledgeBase empty_kind;
  empty_kind.add_term(KeyKind::Entity, "x");
  empty_kind.add_pattern("#entity near #location");
  CHECK_THROWS_AS(synthesize(empty_kind, {}), EmptyVocabulary);
  CHECK(policy_from_name("round_robin") == PatternPolicy::RoundRobin);
  CHECK_FALSE(policy_from_name("greedy"));
}
