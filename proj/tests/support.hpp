// support.hpp : shared fixtures for the test binaries
#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "cityspec/knowledge.hpp"
#include "cityspec/sastl.hpp"
#include "cityspec/synth.hpp"

#ifndef CITYSPEC_SOURCE_DIR
#error "CITYSPEC_SOURCE_DIR must point at the repository root"
#endif

namespace cityspec::testing {

inline std::string source_path(const std::string& rel) { return std::string(CITYSPEC_SOURCE_DIR) + "/" + rel; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::vector<Requirement> seed_markup() {
  std::ifstream in(source_path("data/seed_requirements.txt"));
  return read_markup(in);
}

// The shipped seed KB file.
inline const KnowledgeBase& seed_kb() {
  static const KnowledgeBase kb = load_kb(source_path("data/seed_kb.jsonl"));
  return kb;
}

// Table I sentences, in order.
inline const std::vector<std::string>& table_one() {
  static const std::vector<std::string> rows = {
      "Sliding glass doors shall have an air infiltration rate of no more than 0.3 cfm per square foot.",
      "The operation of a Golf Cart upon a Golf Cart Path shall be restricted to a maximum speed of 15 miles per "
      "hour from 8:00 to 16:00.",
      "Up to four vending vehicles may dispense merchandise in any given city block at any time."};
  return rows;
}

inline const std::string& taxi_sentence() {
  static const std::string s =
      "due to safety concerns, the number of taxis should be less than 10 between 7 am to 8 am";
  return s;
}

// Random letter/symbol strings of length 3..12, claimed kinds cycling
// entity..condition. Used to check the validator rejects junk.
inline std::vector<std::pair<std::string, KeyKind>> junk_terms(std::uint64_t seed, std::size_t n) {
  static const std::string alpha = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ#!@$%&*?~^";
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::string, KeyKind>> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = 3 + uniform_below(rng, 10);
    std::string s;
    for (std::size_t j = 0; j < len; ++j) s += alpha[uniform_below(rng, alpha.size())];
    out.emplace_back(std::move(s), kAllKinds[i % 5]);
  }
  return out;
}

// ── Random formulas ─────────────────────────────────────────────────────────

class FormulaGen {
 public:
  explicit FormulaGen(std::uint64_t seed) : rng_(seed) {}

  sastl::Formula formula(int depth) {
    using namespace sastl;
    int choice = depth <= 0 ? static_cast<int>(pick(3)) : static_cast<int>(pick(12));
    switch (choice) {
      case 0: return atom(text(), comparator(), constant(), pick(2) ? text() : std::string());
      case 1: return aggregate(agg(), domain(), text(), comparator(), constant(), pick(2) ? text() : std::string());
      case 2: return pick(4) ? atom(text(), comparator(), constant()) : truth();
      case 3: return negation(formula(depth - 1));
      case 4: return conjunction(formula(depth - 1), formula(depth - 1));
      case 5: return until(interval(), formula(depth - 1), formula(depth - 1));
      case 6: return always(interval(), formula(depth - 1));
      case 7: return eventually(interval(), formula(depth - 1));
      case 8: return count(agg(), domain(), formula(depth - 1), comparator(), constant());
      case 9: return everywhere(domain(), formula(depth - 1));
      case 10: return somewhere(domain(), formula(depth - 1));
      default: return atom(text(), comparator(), constant());
    }
  }

  sastl::TimeInterval interval() {
    Rational lo(static_cast<long long>(pick(24)));
    if (pick(3) == 0) return sastl::TimeInterval::make(lo, Bound::infinite());
    return sastl::TimeInterval::make(lo, Bound::finite(lo + Rational(static_cast<long long>(pick(24)))));
  }

  sastl::SpatialDomain domain() {
    Rational lo(static_cast<long long>(pick(3) * 50));
    Bound hi = pick(2) ? Bound::infinite() : Bound::finite(lo + Rational(static_cast<long long>(1 + pick(500))));
    return sastl::SpatialDomain::make(proposition(2), lo, hi);
  }

  sastl::Proposition proposition(int depth) {
    using P = sastl::Proposition;
    switch (depth <= 0 ? 0 : pick(5)) {
      case 1: return P::make_not(proposition(depth - 1));
      case 2: return P::make_and(proposition(depth - 1), proposition(depth - 1));
      case 3: return P::make_or(proposition(depth - 1), proposition(depth - 1));
      case 4: return pick(3) ? P::make_label(text()) : P::truth();
      default: return P::make_label(text());
    }
  }

  std::string text() {
    static const char* words[] = {"school", "Golf Cart Path", "number of taxi", "TVOC", "speed",
                                  "mg/m3",  "cfm/foot²",      "a",              "x1",   "true",
                                  "inf",    "U_",             "Always_",        "p-q",  "a \"q\" b",
                                  "x,y",    "(paren)",        "50%",            "O'Hare", " lead"};
    std::string s = words[pick(std::size(words))];
    if (pick(4) == 0) s += std::string(" ") + words[pick(std::size(words))];
    return s;
  }

  sastl::Comparator comparator() { return static_cast<sastl::Comparator>(pick(4)); }
  sastl::AggOp agg() { return static_cast<sastl::AggOp>(pick(4)); }

  Rational constant() {
    switch (pick(4)) {
      case 0: return Rational(static_cast<long long>(pick(100)));
      case 1: return Rational(static_cast<long long>(pick(1000)), 10);
      case 2: return Rational(static_cast<long long>(pick(100)) + 1, 3);  // non-terminating
      default: return Rational(-static_cast<long long>(pick(50)));
    }
  }

  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(uniform_below(rng_, n)); }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace cityspec::testing
