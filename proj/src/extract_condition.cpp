// extract_condition.cpp : comparator lexicon, negation, units, locations

#include <algorithm>
#include <fstream>
#include <set>

#include "extract_internal.hpp"

namespace cityspec {

using sastl::Comparator;

namespace detail {

std::vector<std::string> lower_tokens(std::string_view phrase) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(phrase)) out.push_back(to_lower(t.text));
  return out;
}

bool is_clause_delimiter(std::string_view t) {
  return t == "." || t == "," || t == ";" || t == ":" || t == "!" || t == "?";
}

bool is_negation_cue(std::string_view t) {
  return t == "not" || t == "no" || t == "never" || t == "cannot" || t == "nor" ||
         (t.size() > 3 && t.ends_with("n't")) || (t.size() > 3 && t.ends_with("n’t"));
}

bool is_unit_word(std::string_view t) {
  static const std::set<std::string, std::less<>> k = {
      "mg", "g", "kg", "ug", "µg", "μg", "ppm", "ppb", "cfm", "db", "dba", "db(a)", "decibel", "decibels",
      "percent", "%", "mph", "kph", "km/h", "m", "cm", "mm", "km", "meter", "meters", "metre", "metres",
      "kilometer", "kilometers", "foot", "feet", "ft", "inch", "inches", "yard", "yards", "mile", "miles",
      "hour", "hours", "hr", "hrs", "minute", "minutes", "min", "mins", "second", "seconds", "sec", "secs",
      "day", "days", "week", "weeks", "month", "months", "year", "years", "lux", "kw", "kwh", "w", "watt",
      "watts", "gallon", "gallons", "gal", "liter", "liters", "litre", "litres", "degree", "degrees", "°f", "°c",
      "fahrenheit", "celsius", "pound", "pounds", "lb", "lbs", "ton", "tons", "tonnes", "acre", "acres",
      "hectare", "hectares", "square", "cubic", "per", "m2", "m3", "ft2", "ft3", "sq", "psi", "gpm", "kmh"};
  if (k.count(t)) return true;
  return t.find('/') != std::string_view::npos && t.size() > 1;
}

Rational meters_per(std::string_view t) {
  if (t == "m" || t == "meter" || t == "meters" || t == "metre" || t == "metres") return Rational(1);
  if (t == "km" || t == "kilometer" || t == "kilometers" || t == "kilometre" || t == "kilometres")
    return Rational(1000);
  if (t == "ft" || t == "foot" || t == "feet") return Rational(3048, 10000);
  if (t == "yard" || t == "yards" || t == "yd" || t == "yds") return Rational(9144, 10000);
  if (t == "mile" || t == "miles" || t == "mi") return Rational(1609344, 1000);
  return Rational(0);
}

}  // namespace detail

using detail::is_clause_delimiter;
using detail::lower_tokens;

// ── Comparator lexicon ──────────────────────────────────────────────────────

std::string ComparatorLexicon::Entry::text() const {
  std::string s;
  for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
  return s;
}

ComparatorLexicon ComparatorLexicon::defaults() {
  // kept in sync with data/comparators.json
  static const std::vector<std::pair<const char*, std::vector<const char*>>> before = {
      {"LE", {"no more than", "not more than", "at most", "up to", "maximum of", "a maximum of", "maximum",
              "restricted to", "limited to", "not exceed", "not to exceed", "not exceeding", "no greater than",
              "no higher than", "less than or equal to", "not greater than", "no larger than"}},
      {"LT", {"less than", "below", "under", "lower than", "fewer than", "smaller than"}},
      {"GE", {"at least", "no less than", "not less than", "minimum of", "a minimum of", "minimum",
              "no fewer than", "greater than or equal to", "not below"}},
      {"GT", {"more than", "greater than", "exceed", "exceeds", "exceeding", "above", "over", "higher than",
              "larger than"}},
  };
  static const std::vector<std::pair<const char*, std::vector<const char*>>> after = {
      {"LE", {"or less", "or fewer", "or lower", "or below", "at most", "maximum"}},
      {"GE", {"or more", "or greater", "or higher", "or above", "at least", "minimum"}},
  };
  ComparatorLexicon lex;
  for (bool is_after : {false, true}) {
    for (const auto& [name, phrases] : is_after ? after : before)
      for (const char* p : phrases)
        lex.entries.push_back({lower_tokens(p), *sastl::comparator_from_name(name), is_after});
  }
  return lex;
}

ComparatorLexicon ComparatorLexicon::from_json(const Json& j) {
  ComparatorLexicon lex;
  for (bool is_after : {false, true}) {
    const char* key = is_after ? "after" : "before";
    if (!j.contains(key)) continue;
    for (const auto& [name, list] : j.at(key).items()) {
      auto c = sastl::comparator_from_name(name);
      if (!c) throw SchemaError("unknown comparator '" + name + "' in lexicon");
      for (const auto& p : list) {
        auto words = lower_tokens(p.get<std::string>());
        if (words.empty()) throw SchemaError("empty comparator phrase");
        lex.entries.push_back({std::move(words), *c, is_after});
      }
    }
  }
  if (j.contains("default")) {
    auto c = sastl::comparator_from_name(j.at("default").get<std::string>());
    if (!c) throw SchemaError("unknown default comparator");
    lex.fallback = *c;
  }
  return lex;
}

ComparatorLexicon ComparatorLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read comparator lexicon: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("comparator lexicon: ") + e.what());
  }
  return from_json(j);
}

Json ComparatorLexicon::to_json() const {
  Json j;
  for (bool is_after : {false, true}) {
    Json side = Json::object();
    for (const auto& e : entries) {
      if (e.after != is_after) continue;
      side[std::string(sastl::comparator_name(e.comparator))].push_back(e.text());
    }
    j[is_after ? "after" : "before"] = std::move(side);
  }
  j["default"] = std::string(sastl::comparator_name(fallback));
  return j;
}

// ── Negation ────────────────────────────────────────────────────────────────

namespace {

Span clause_of(const std::vector<Token>& tokens, const Span& span) {
  std::size_t b = span.begin;
  while (b > 0 && !is_clause_delimiter(tokens[b - 1].text)) --b;
  std::size_t e = span.end;
  while (e < tokens.size() && !is_clause_delimiter(tokens[e].text)) ++e;
  return {b, e};
}

}  // namespace

bool detect_negation(const std::vector<Token>& tokens, const Span& span, const std::vector<bool>& ignore) {
  if (tokens.empty()) return false;
  Span clause = clause_of(tokens, span);
  int cues = 0;
  for (std::size_t i = clause.begin; i < clause.end; ++i) {
    if (i < ignore.size() && ignore[i]) continue;
    if (detail::is_negation_cue(to_lower(tokens[i].text))) ++cues;
  }
  return cues % 2 == 1;
}

// ── Units ───────────────────────────────────────────────────────────────────

std::string normalize_unit(const std::vector<std::string>& words) {
  std::string out;
  bool after_per = false;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string w = words[i];
    std::string lw = to_lower(w);
    if (lw == "per") {
      out += "/";
      after_per = true;
      continue;
    }
    std::string power;
    if ((lw == "square" || lw == "sq" || lw == "cubic") && i + 1 < words.size()) {
      power = lw == "cubic" ? "³" : "²";
      w = words[++i];
    }
    if (!out.empty() && !after_per && out.back() != '/') out += ' ';
    out += w + power;
    after_per = false;
  }
  return out;
}

// ── Conditions ──────────────────────────────────────────────────────────────

namespace {

struct ComparatorHit {
  const ComparatorLexicon::Entry* entry = nullptr;
  Span span;
};

bool matches_at(const std::vector<std::string>& lower, std::size_t i, const std::vector<std::string>& words,
                const std::vector<bool>& blocked) {
  if (i + words.size() > lower.size()) return false;
  for (std::size_t k = 0; k < words.size(); ++k)
    if (lower[i + k] != words[k] || (i + k < blocked.size() && blocked[i + k])) return false;
  return true;
}

// Nearest `before` entry ending at or before `limit` inside [lo, limit), or
// nearest `after` entry starting at or after `from` inside [from, hi). Ties on
// distance go to the longer phrase.
std::optional<ComparatorHit> find_comparator(const std::vector<std::string>& lower, const ComparatorLexicon& lex,
                                             std::size_t lo, std::size_t limit, std::size_t from, std::size_t hi,
                                             const std::vector<bool>& blocked) {
  std::optional<ComparatorHit> best;
  std::size_t best_dist = 0;
  for (const auto& e : lex.entries) {
    std::size_t n = e.words.size();
    if (!e.after) {
      for (std::size_t i = lo; i + n <= limit; ++i) {
        if (!matches_at(lower, i, e.words, blocked)) continue;
        std::size_t dist = limit - (i + n);
        if (!best || dist < best_dist || (dist == best_dist && n > best->entry->words.size()))
          best = ComparatorHit{&e, {i, i + n}}, best_dist = dist;
      }
    } else {
      for (std::size_t i = from; i + n <= hi; ++i) {
        if (!matches_at(lower, i, e.words, blocked)) continue;
        std::size_t dist = i - from;
        // a `before` phrase right next to the number wins over a trailing one
        if (!best || dist < best_dist || (dist == best_dist && n > best->entry->words.size()))
          best = ComparatorHit{&e, {i, i + n}}, best_dist = dist;
      }
    }
  }
  return best;
}

struct NumberHit {
  Rational value;
  std::size_t index;
  std::string percent_unit;
};

std::optional<NumberHit> first_number(const std::vector<Token>& tokens, Span within) {
  for (std::size_t i = within.begin; i < within.end; ++i) {
    if (auto v = parse_number_token(tokens[i].text))
      return NumberHit{*v, i, tokens[i].text.ends_with("%") ? "%" : ""};
  }
  return std::nullopt;
}

ConditionParse read_condition(const std::vector<Token>& tokens, Span phrase, Span search, const std::vector<bool>& blocked_in,
                              const ComparatorLexicon& lex, const std::string& phrase_text) {
  auto num = first_number(tokens, phrase);
  if (!num) throw NoNumericConstant(phrase_text);

  ConditionParse out;
  out.constant = num->value;
  std::vector<std::string> unit_words;
  for (std::size_t i = num->index + 1; i < phrase.end; ++i) {
    std::string lw = to_lower(tokens[i].text);
    if (is_clause_delimiter(lw)) break;
    // a trailing comparator ("5 or less") is not part of the unit
    bool starts_cmp = false;
    for (const auto& e : lex.entries)
      if (e.after && !e.words.empty() && e.words[0] == lw) starts_cmp = true;
    if (starts_cmp) break;
    unit_words.push_back(tokens[i].text);
  }
  out.unit = unit_words.empty() ? num->percent_unit : normalize_unit(unit_words);

  std::vector<std::string> lower;
  for (const auto& t : tokens) lower.push_back(to_lower(t.text));
  std::vector<bool> blocked = blocked_in;
  blocked.resize(tokens.size(), false);

  Span clause = clause_of(tokens, phrase);
  clause.begin = std::max(clause.begin, search.begin);
  clause.end = std::min(clause.end, search.end);
  std::size_t num_end = num->index + 1;
  // "no more than 10" inside the phrase, otherwise before it in its clause
  auto hit = find_comparator(lower, lex, clause.begin, num->index, num_end, clause.end, blocked);

  std::vector<bool> ignore = blocked;
  if (hit) {
    out.comparator = hit->entry->comparator;
    out.comparator_phrase = hit->entry->text();
    for (std::size_t i = hit->span.begin; i < hit->span.end; ++i) ignore[i] = true;
  } else {
    out.comparator = lex.fallback;
  }
  // negation is counted inside the searched window only
  std::vector<Token> window(tokens.begin() + static_cast<std::ptrdiff_t>(clause.begin),
                            tokens.begin() + static_cast<std::ptrdiff_t>(clause.end));
  std::vector<bool> window_ignore(ignore.begin() + static_cast<std::ptrdiff_t>(clause.begin),
                                  ignore.begin() + static_cast<std::ptrdiff_t>(clause.end));
  Span local{phrase.begin - clause.begin, phrase.end - clause.begin};
  if (!window.empty() && detect_negation(window, local, window_ignore)) {
    out.negated = true;
    out.comparator = sastl::flip(out.comparator);
  }
  return out;
}

}  // namespace

ConditionParse parse_condition(std::string_view text, const SlotSet& slots, const ComparatorLexicon& lex) {
  const KeyedPhrase* cond = slots.first(KeyKind::Condition);
  if (!cond) throw NoNumericConstant("");

  if (cond->span) {
    auto tokens = tokenize(text);
    if (cond->span->end > tokens.size()) throw SlotError("condition span outside the text");
    // other slots' tokens never count as comparator or negation words
    std::vector<bool> blocked(tokens.size(), false);
    for (const auto& p : slots.all())
      if (p.span && p.kind != KeyKind::Condition)
        for (std::size_t i = p.span->begin; i < p.span->end && i < tokens.size(); ++i) blocked[i] = true;
    return read_condition(tokens, *cond->span, {0, tokens.size()}, blocked, lex, cond->text);
  }

  // A user-supplied phrase: read it on its own first.
  auto own = tokenize(cond->text);
  ConditionParse parsed = read_condition(own, {0, own.size()}, {0, own.size()}, {}, lex, cond->text);
  if (!parsed.comparator_phrase.empty() || text.empty()) return parsed;

  // No comparator in the answer: borrow the last one the requirement text uses.
  auto tokens = tokenize(text);
  std::vector<std::string> lower;
  for (const auto& t : tokens) lower.push_back(to_lower(t.text));
  std::vector<bool> blocked(tokens.size(), false);
  for (const auto& p : slots.all())
    if (p.span)
      for (std::size_t i = p.span->begin; i < p.span->end && i < tokens.size(); ++i) blocked[i] = true;
  std::optional<ComparatorHit> last;
  for (const auto& e : lex.entries) {
    if (e.after) continue;
    for (std::size_t i = 0; i + e.words.size() <= lower.size(); ++i) {
      if (!matches_at(lower, i, e.words, blocked)) continue;
      std::size_t end = i + e.words.size();
      if (!last || end > last->span.end || (end == last->span.end && e.words.size() > last->entry->words.size()))
        last = ComparatorHit{&e, {i, end}};
    }
  }
  if (!last) return parsed;
  parsed.comparator = last->entry->comparator;
  parsed.comparator_phrase = last->entry->text();
  parsed.negated = false;
  std::vector<bool> ignore = blocked;
  for (std::size_t i = last->span.begin; i < last->span.end; ++i) ignore[i] = true;
  if (detect_negation(tokens, last->span, ignore)) {
    parsed.negated = true;
    parsed.comparator = sastl::flip(parsed.comparator);
  }
  return parsed;
}

// ── Locations ───────────────────────────────────────────────────────────────

namespace {

bool is_universal(std::string_view w) { return w == "all" || w == "every" || w == "each" || w == "any"; }
bool is_article(std::string_view w) { return w == "the" || w == "a" || w == "an"; }

const std::vector<std::vector<std::string>>& vague_location_words() {
  static const std::vector<std::vector<std::string>> k = {{"nearby"}, {"near"}, {"close", "to"}, {"around"},
                                                          {"next", "to"}, {"in", "the", "vicinity", "of"}};
  return k;
}

}  // namespace

sastl::SpatialDomain normalize_location(std::string_view phrase) {
  auto tokens = tokenize(phrase);
  std::vector<std::string> lower;
  for (const auto& t : tokens) lower.push_back(to_lower(t.text));
  while (!tokens.empty() && is_clause_delimiter(tokens.back().text)) {
    tokens.pop_back();
    lower.pop_back();
  }
  std::size_t i = 0;
  Rational lo(0);
  Bound hi = Bound::infinite();

  // within N <unit> of X
  if (lower.size() >= 4 && lower[0] == "within") {
    auto n = parse_number_token(lower[1]);
    Rational per = detail::meters_per(lower[2]);
    if (n && per != Rational(0) && lower[3] == "of") {
      hi = Bound::finite(*n * per);
      i = 4;
    }
  }
  for (bool again = true; again && i < lower.size();) {
    again = false;
    for (const auto& v : vague_location_words()) {
      if (i + v.size() <= lower.size() &&
          std::equal(v.begin(), v.end(), lower.begin() + static_cast<std::ptrdiff_t>(i))) {
        i += v.size();
        again = true;
      }
    }
    if (i < lower.size() && (lower[i] == "in" || lower[i] == "at" || lower[i] == "on" || lower[i] == "upon")) {
      ++i;
      again = true;
    }
  }
  bool universal = false;
  while (i < lower.size() && (is_universal(lower[i]) || is_article(lower[i]) || lower[i] == "given")) {
    universal = universal || is_universal(lower[i]);
    ++i;
  }
  if (i >= tokens.size()) throw std::invalid_argument("location phrase names no place: '" + std::string(phrase) + "'");

  std::string label(phrase.substr(tokens[i].begin, tokens.back().end - tokens[i].begin));
  if (universal) {
    // "all the schools" -> "school"
    std::size_t head = label.find_last_of(' ');
    std::size_t at = head == std::string::npos ? 0 : head + 1;
    label = label.substr(0, at) + singularize(label.substr(at));
  }
  if (Rational(0) == lo && hi.is_infinite()) return sastl::SpatialDomain::make(sastl::Proposition::make_label(label));
  return sastl::SpatialDomain::make(sastl::Proposition::make_label(label), lo, hi);
}

}  // namespace cityspec
