// extract_assemble.cpp : refinement, formula assembly, template rendering

#include <algorithm>

#include "extract_internal.hpp"

namespace cityspec {

// ── Refinement ──────────────────────────────────────────────────────────────

RefineResult refine(const SlotSet& slots, std::string_view text, const ComparatorLexicon& lexicon) {
  RefineResult out;
  out.slots = slots;
  out.slots.time.reset();
  out.slots.condition.reset();
  out.slots.location.reset();

  // time: no phrase -> the defaulted [0,+inf)
  const auto& times = slots.get(KeyKind::Time);
  if (times.empty()) {
    TimeSpec t;
    t.defaulted = true;
    out.slots.time = t;
  } else {
    std::optional<TimeSpec> chosen;
    bool ambiguous = false;
    for (const auto& p : times) {
      try {
        TimeSpec t = normalize_time(p.text);
        if (!chosen) {
          chosen = t;
        } else if (chosen->interval.is_unbounded() && !chosen->date && !t.interval.is_unbounded()) {
          t.notes.push_back("periodicity dropped; clock interval kept");
          chosen = t;
        } else if (!(t == *chosen) && !t.interval.is_unbounded()) {
          chosen->notes.push_back("second time phrase '" + p.text + "' ignored");
        }
      } catch (const AmbiguousTime&) {
        ambiguous = true;
        out.issues.push_back({KeyKind::Time, p.text, AmbiguityReason::VagueTime, {}});
      }
    }
    if (!ambiguous) out.slots.time = chosen;
  }

  if (const KeyedPhrase* c = slots.first(KeyKind::Condition)) {
    try {
      out.slots.condition = parse_condition(text, slots, lexicon);
    } catch (const NoNumericConstant&) {
      out.issues.push_back({KeyKind::Condition, c->text, AmbiguityReason::NonNumeric, {}});
    }
  }

  const auto& locs = slots.get(KeyKind::Location);
  if (!locs.empty()) {
    std::optional<sastl::SpatialDomain> combined;
    bool bad = false;
    for (const auto& p : locs) {
      try {
        auto d = normalize_location(p.text);
        if (!combined) {
          combined = d;
          continue;
        }
        Rational lo = std::max(combined->distance_lo, d.distance_lo);
        Bound hi = combined->distance_hi;
        if (hi.is_infinite() || (!d.distance_hi.is_infinite() && *d.distance_hi.value < *hi.value)) hi = d.distance_hi;
        combined = sastl::SpatialDomain::make(
            sastl::Proposition::make_and(combined->proposition, d.proposition), lo, hi);
      } catch (const std::invalid_argument&) {
        bad = true;
        out.issues.push_back({KeyKind::Location, p.text, AmbiguityReason::VagueDistance, {}});
      }
    }
    if (!bad) out.slots.location = combined;
  }
  return out;
}

// ── Assembly ────────────────────────────────────────────────────────────────

namespace {

std::string join_kinds(const std::vector<KeyKind>& ks) {
  std::string s;
  for (KeyKind k : ks) s += (s.empty() ? "" : ", ") + std::string(kind_name(k));
  return s;
}

std::string strip_article(const std::string& s) {
  for (const char* a : {"the ", "a ", "an "}) {
    std::string_view av(a);
    if (s.size() > av.size() && to_lower(s.substr(0, av.size())) == av) return trim(s.substr(av.size()));
  }
  return s;
}

std::optional<sastl::AggOp> agg_word(std::string_view lower_word) {
  if (lower_word == "average" || lower_word == "mean") return sastl::AggOp::Avg;
  if (lower_word == "maximum" || lower_word == "max") return sastl::AggOp::Max;
  if (lower_word == "minimum" || lower_word == "min") return sastl::AggOp::Min;
  if (lower_word == "total" || lower_word == "sum") return sastl::AggOp::Sum;
  return std::nullopt;
}

bool is_counting(const std::string& entity) {
  std::string e = normalize_phrase(strip_article(entity));
  return e == "number" || e == "total number" || e == "count" || e == "number of";
}

struct Subject {
  std::string variable;
  std::optional<sastl::AggOp> agg;
};

Subject subject_of(const SlotSet& slots) {
  const KeyedPhrase* e = slots.first(KeyKind::Entity);
  const KeyedPhrase* q = slots.first(KeyKind::Quantifier);
  std::string E = e ? strip_article(e->display()) : "";
  std::string Q = q ? strip_article(q->display()) : "";
  Subject s;
  if (e && is_counting(e->display())) {
    s.variable = Q.empty() ? "number" : "number of " + Q;
    return s;
  }
  if (!E.empty()) {
    std::size_t sp = E.find(' ');
    std::string first = to_lower(E.substr(0, sp));
    if (auto op = agg_word(first); op && sp != std::string::npos) {
      s.agg = op;
      E = strip_article(trim(E.substr(sp + 1)));
    }
  }
  if (E.empty()) {
    s.variable = Q;
  } else if (Q.empty()) {
    s.variable = E;
  } else if (e->span && q->span && q->span->begin < e->span->begin) {
    s.variable = Q + " " + E;
  } else {
    s.variable = E + " of " + Q;
  }
  return s;
}

void require_complete(const SlotSet& slots) {
  auto report = check_completeness(slots);
  std::vector<KeyKind> missing = report.missing;
  auto need = [&](KeyKind k, bool normalized) {
    if (slots.has(k) && !normalized && std::find(missing.begin(), missing.end(), k) == missing.end())
      missing.push_back(k);
  };
  need(KeyKind::Condition, slots.condition.has_value());
  need(KeyKind::Location, slots.location.has_value());
  need(KeyKind::Time, slots.time.has_value());
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    throw IncompleteSlots(missing);
  }
}

}  // namespace

IncompleteSlots::IncompleteSlots(std::vector<KeyKind> missing)
    : std::runtime_error("incomplete slots: " + join_kinds(missing)), missing_(std::move(missing)) {}

std::string subject_variable(const SlotSet& slots) { return subject_of(slots).variable; }

sastl::Formula assemble_specification(const SlotSet& slots) {
  require_complete(slots);
  const sastl::SpatialDomain& domain = *slots.location;
  sastl::TimeInterval interval = slots.time ? slots.time->interval : sastl::TimeInterval::unbounded();
  const ConditionParse& c = *slots.condition;
  Subject subj = subject_of(slots);
  sastl::Formula inner = subj.agg ? sastl::aggregate(*subj.agg, domain, subj.variable, c.comparator, c.constant, c.unit)
                                  : sastl::atom(subj.variable, c.comparator, c.constant, c.unit);
  return sastl::everywhere(domain, sastl::always(interval, inner));
}

std::string render_template(const SlotSet& slots) {
  require_complete(slots);
  const KeyedPhrase* e = slots.first(KeyKind::Entity);
  const KeyedPhrase* q = slots.first(KeyKind::Quantifier);
  std::string out;
  if (e) out += "[" + strip_article(e->display()) + "]";
  if (e && q) out += " of ";
  if (q) out += "[" + strip_article(q->display()) + "]";
  const ConditionParse& c = *slots.condition;
  out += " should be [" + std::string(sastl::symbol(c.comparator)) + "] [" + c.constant.to_string() +
         (c.unit.empty() ? "" : " " + c.unit) + "]";
  TimeSpec t = slots.time ? *slots.time : TimeSpec{};
  out += " [" + describe_time(t) + "]";
  std::string where;
  for (const auto& p : slots.get(KeyKind::Location)) where += (where.empty() ? "" : " and ") + p.text;
  out += " [" + where + "]";
  return out;
}

}  // namespace cityspec
