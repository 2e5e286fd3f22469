#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cityspec/eval.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cityspec;
using namespace cityspec::testing;

namespace {

Requirement tagged(const std::string& text, std::vector<std::pair<KeyKind, Span>> spans) {
  Requirement r = Requirement::from_text("", text);
  for (auto [k, s] : spans) {
    KeyedPhrase p;
    p.kind = k;
    p.span = s;
    p.text = span_text(text, r.tokens, s);
    r.slots.add(p);
  }
  return r;
}

}  // namespace

// ── Edit distance ───────────────────────────────────────────────────────────

TEST_CASE("dld goldens") {
  CHECK(dld("", "") == 0);
  CHECK(dld("abc", "") == 3);
  CHECK(dld("kitten", "sitting") == 3);
  CHECK(dld("ab", "ba") == 1);
  CHECK(dld("ca", "abc") == 2);
  CHECK(osa_distance("ca", "abc") == 3);
  CHECK(dld("café", "cafe") == 1);
  CHECK(dld("≤", "<") == 1);
  CHECK(utf8_codepoints("a≤").size() == 2);
}

TEST_CASE("dld equals the shortest edit path on every pair up to length 4") {
  const std::string alpha = "abc";
  auto strings = all_strings(alpha, 4);
  for (const auto& a : strings) {
    auto dist = bfs_distances(a, alpha, 6);
    for (const auto& b : strings) {
      INFO(a << " -> " << b);
      REQUIRE(dld(a, b) == dist.at(b));
    }
  }
}

TEST_CASE("dld metric axioms on 10000 random triples") {
  testing::FormulaGen g(4242);
  auto rnd = [&] {
    std::string s;
    std::size_t len = g.pick(9);
    for (std::size_t i = 0; i < len; ++i) s += "abcd"[g.pick(4)];
    return s;
  };
  for (int n = 0; n < 10000; ++n) {
    std::string a = rnd(), b = rnd(), c = rnd();
    INFO(a << " | " << b << " | " << c);
    REQUIRE(dld(a, a) == 0);
    REQUIRE((dld(a, b) == 0) == (a == b));
    REQUIRE(dld(a, b) == dld(b, a));
    REQUIRE(dld(a, c) <= dld(a, b) + dld(b, c));
    REQUIRE(dld(a, b) <= std::max(a.size(), b.size()));
    REQUIRE(dld(a, b) <= osa_distance(a, b));
  }
}

// ── Corpus metrics ──────────────────────────────────────────────────────────

TEST_CASE("seven of ten key tokens right") {
  // 10 gold key tokens; the prediction gets the first 7 and mislabels 3
  std::string text = "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11";
  Requirement gold = tagged(text, {{KeyKind::Entity, {0, 4}}, {KeyKind::Location, {4, 7}}, {KeyKind::Time, {7, 10}}});
  Requirement pred = tagged(text, {{KeyKind::Entity, {0, 4}}, {KeyKind::Location, {4, 7}},
                                   {KeyKind::Condition, {7, 10}}, {KeyKind::Time, {10, 12}}});
  EvalReport r = evaluate({gold}, {pred});
  CHECK(r.token_acc == Rational(7, 10));
  CHECK(r.precision == Rational(7, 12));
  CHECK(r.recall == Rational(7, 10));
  CHECK(r.f1 == Rational(7, 11));
  CHECK(r.sent_acc == Rational(0));
  CHECK(r.per_kind[kind_index(KeyKind::Entity)].f1 == Rational(1));
  CHECK(r.per_kind[kind_index(KeyKind::Time)].precision == Rational(0));
}

TEST_CASE("sentence accuracy needs every phrase exact") {
  std::string text = "the speed on Golf Cart Path";
  Requirement gold = tagged(text, {{KeyKind::Entity, {1, 2}}, {KeyKind::Location, {3, 6}}});
  Requirement same = tagged(text, {{KeyKind::Entity, {1, 2}}, {KeyKind::Location, {3, 6}}});
  Requirement short_span = tagged(text, {{KeyKind::Entity, {1, 2}}, {KeyKind::Location, {4, 6}}});
  Requirement extra = tagged(text, {{KeyKind::Entity, {1, 2}}, {KeyKind::Location, {3, 6}}, {KeyKind::Time, {0, 1}}});
  CHECK(sentence_accuracy({gold, gold, gold}, {same, short_span, extra}) == Rational(1, 3));
  CHECK(sentence_accuracy({}, {}) == Rational(0));
  CHECK(token_accuracy({tagged("a b", {})}, {tagged("a b", {})}) == Rational(1));
}

TEST_CASE("misaligned corpora are refused") {
  CHECK_THROWS_AS(evaluate({tagged("a b", {})}, {}), MisalignedCorpora);
  CHECK_THROWS_AS(evaluate({tagged("a b", {})}, {tagged("a c", {})}), MisalignedCorpora);
}

TEST_CASE("metrics match a direct recount on random corpora up to 50 tokens") {
  testing::FormulaGen g(777);
  for (int n = 0; n < 3000; ++n) {
    std::vector<Requirement> gold, pred;
    std::size_t budget = 1 + g.pick(50);
    while (budget > 0) {
      std::size_t len = 1 + g.pick(std::min<std::size_t>(budget, 15));
      budget -= len;
      std::string text;
      for (std::size_t t = 0; t < len; ++t) text += (t ? " w" : "w") + std::to_string(g.pick(6));
      Requirement a = Requirement::from_text("", text), b = a;
      random_slots(a, g);
      if (g.pick(4) == 0) b = a;  // some exact matches
      else random_slots(b, g);
      gold.push_back(std::move(a));
      pred.push_back(std::move(b));
    }
    EvalReport r = evaluate(gold, pred);
    Recount o = recount(gold, pred);
    REQUIRE(r.n_tokens <= 50);
    REQUIRE(r.token_acc == o.token_acc);
    REQUIRE(r.sent_acc == o.sent_acc);
    REQUIRE(r.precision == o.p);
    REQUIRE(r.recall == o.r);
    REQUIRE(r.f1 == o.f1);
  }
}

TEST_CASE("report json carries exact and decimal values") {
  std::string text = "a b c";
  EvalReport r = evaluate({tagged(text, {{KeyKind::Entity, {0, 3}}})}, {tagged(text, {{KeyKind::Entity, {0, 1}}})});
  Json j = report_to_json(r);
  CHECK(j["token_acc"]["exact"] == "1/3");
  CHECK(j["token_acc"]["value"].get<double>() == doctest::Approx(1.0 / 3));
  CHECK(j["precision"]["exact"] == "1");
}
