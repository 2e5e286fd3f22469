// extract_time.cpp : time-phrase normalization

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

#include "extract_internal.hpp"

namespace cityspec {

namespace {

using Words = std::vector<std::string>;

// Lowercase, "a.m." -> "am", split "7am" / "8:00-16:00" into parts.
Words time_words(std::string_view phrase) {
  std::string s = to_lower(phrase);
  for (const char* from : {"a.m.", "a.m"}) {
    for (std::size_t p; (p = s.find(from)) != std::string::npos;) s.replace(p, std::string_view(from).size(), "am");
  }
  for (const char* from : {"p.m.", "p.m"}) {
    for (std::size_t p; (p = s.find(from)) != std::string::npos;) s.replace(p, std::string_view(from).size(), "pm");
  }
  Words raw;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) raw.push_back(cur);
    cur.clear();
  };
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';' || c == '(' || c == ')') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();

  Words out;
  for (std::string w : raw) {
    while (!w.empty() && (w.back() == '.' || w.back() == '!' || w.back() == '?')) w.pop_back();
    if (w.empty()) continue;
    // 8:00-16:00, 7-8pm
    std::size_t dash = w.find_first_of("-–");
    bool date_like = std::count(w.begin(), w.end(), '-') == 2;
    if (dash != std::string::npos && dash > 0 && !date_like && std::isdigit(static_cast<unsigned char>(w[0]))) {
      out.push_back(w.substr(0, dash));
      out.push_back("-");
      std::size_t rest = w.find_first_not_of("-–", dash);
      if (rest != std::string::npos) w = w.substr(rest);
      else continue;
    }
    // 7am, 10:30pm
    if (w.size() > 2 && std::isdigit(static_cast<unsigned char>(w[0])) &&
        (w.ends_with("am") || w.ends_with("pm"))) {
      out.push_back(w.substr(0, w.size() - 2));
      out.push_back(w.substr(w.size() - 2));
      continue;
    }
    out.push_back(w);
  }
  return out;
}

struct ClockTime {
  Rational hours;
  bool has_meridiem = false;
  int raw_hour = 0;
};

std::optional<ClockTime> clock_value(const Words& w, std::size_t& i) {
  if (i >= w.size()) return std::nullopt;
  const std::string& t = w[i];
  ClockTime c;
  if (t == "noon" || t == "midday") {
    ++i;
    c.hours = Rational(12);
    c.has_meridiem = true;
    return c;
  }
  if (t == "midnight") {
    ++i;
    c.hours = Rational(0);
    c.has_meridiem = true;
    return c;
  }
  int h = -1, m = 0;
  if (auto nw = number_word_value(t)) {
    h = *nw;
  } else {
    std::size_t colon = t.find(':');
    std::string hs = t.substr(0, colon);
    std::string ms = colon == std::string::npos ? "" : t.substr(colon + 1);
    auto all_digits = [](const std::string& s) {
      return !s.empty() && s.size() <= 2 && std::all_of(s.begin(), s.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
    };
    if (!all_digits(hs)) return std::nullopt;
    if (colon != std::string::npos && (!all_digits(ms) || ms.size() != 2)) return std::nullopt;
    h = std::stoi(hs);
    if (!ms.empty()) m = std::stoi(ms);
  }
  if (h < 0 || h > 24 || m >= 60 || (h == 24 && m != 0)) return std::nullopt;
  ++i;
  if (i < w.size() && w[i] == "o'clock") ++i;
  if (i < w.size() && (w[i] == "am" || w[i] == "pm")) {
    if (h == 0 || h > 12) return std::nullopt;
    if (w[i] == "am" && h == 12) h = 0;
    if (w[i] == "pm" && h < 12) h += 12;
    c.has_meridiem = true;
    ++i;
  }
  c.raw_hour = h;
  c.hours = Rational(h) + Rational(m, 60);
  return c;
}

bool is_separator(const std::string& w) {
  return w == "to" || w == "and" || w == "until" || w == "till" || w == "til" || w == "through" || w == "thru" ||
         w == "-" || w == "–";
}

std::optional<sastl::TimeInterval> clock_interval(const Words& w) {
  std::size_t i = 0;
  if (i < w.size() && (w[i] == "between" || w[i] == "from")) ++i;
  auto a = clock_value(w, i);
  if (!a) return std::nullopt;
  if (i >= w.size() || !is_separator(w[i])) return std::nullopt;
  ++i;
  auto b = clock_value(w, i);
  if (!b || i != w.size()) return std::nullopt;
  // "from 7 to 9 pm": the meridiem of the end applies to the start
  if (!a->has_meridiem && b->has_meridiem && a->raw_hour < 12 && b->hours >= Rational(12) &&
      a->hours + Rational(12) <= b->hours)
    a->hours = a->hours + Rational(12);
  Rational lo = a->hours;
  Rational hi = b->hours;
  if (hi <= lo) hi = hi + Rational(24);
  return sastl::TimeInterval::make(lo, Bound::finite(hi));
}

std::optional<std::string> iso_date(const Words& w) {
  std::size_t i = 0;
  if (i < w.size() && w[i] == "on") ++i;
  if (i + 1 != w.size()) return std::nullopt;
  const std::string& t = w[i];
  int y, m, d;
  char s1, s2;
  char tail;
  auto ok = [&](int yy, int mm, int dd) { return yy >= 1000 && mm >= 1 && mm <= 12 && dd >= 1 && dd <= 31; };
  if (std::sscanf(t.c_str(), "%4d%c%2d%c%2d%c", &y, &s1, &m, &s2, &d, &tail) == 5 && s1 == s2 &&
      (s1 == '-' || s1 == '/') && t.size() == 10 && ok(y, m, d)) {
  } else if (std::sscanf(t.c_str(), "%2d%c%2d%c%4d%c", &m, &s1, &d, &s2, &y, &tail) == 5 && s1 == s2 &&
             (s1 == '-' || s1 == '/') && t.size() == 10 && ok(y, m, d)) {
  } else {
    return std::nullopt;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return std::string(buf);
}

const std::vector<Words>& always_phrases() {
  static const std::vector<Words> k = {
      {"always"},         {"at", "any", "time"},          {"any", "time"},  {"anytime"},
      {"at", "all", "times"}, {"all", "times"},            {"at", "any", "given", "time"},
      {"all", "day"},     {"24", "hours", "a", "day"},    {"24/7"},         {"all", "the", "time"},
      {"at", "all", "time"}, {"year", "round"},           {"year-round"},
  };
  return k;
}

const std::vector<Words>& periodicity_phrases() {
  static const std::vector<Words> k = {
      {"every", "day"}, {"everyday"}, {"daily"}, {"each", "day"}, {"per", "day"}, {"on", "a", "daily", "basis"},
  };
  return k;
}

// Removes periodicity markers, returning what was removed.
std::vector<std::string> strip_periodicity(Words& w) {
  std::vector<std::string> removed;
  bool again = true;
  while (again) {
    again = false;
    for (const auto& p : periodicity_phrases()) {
      for (std::size_t i = 0; i + p.size() <= w.size(); ++i) {
        if (!std::equal(p.begin(), p.end(), w.begin() + static_cast<std::ptrdiff_t>(i))) continue;
        std::string text;
        for (const auto& x : p) text += (text.empty() ? "" : " ") + x;
        removed.push_back(text);
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(i + p.size()));
        // a dangling "for"/"on" left in front of the marker
        if (i > 0 && (w[i - 1] == "for" || w[i - 1] == "on")) w.erase(w.begin() + static_cast<std::ptrdiff_t>(i - 1));
        again = true;
        break;
      }
      if (again) break;
    }
  }
  return removed;
}

std::string clock_text(const Rational& hours) {
  Rational h = hours;
  while (h >= Rational(24)) h = h - Rational(24);
  const auto& v = h.value();
  boost::multiprecision::cpp_int whole = boost::multiprecision::numerator(v) / boost::multiprecision::denominator(v);
  Rational minutes = (h - Rational(Rational::value_type(whole))) * Rational(60);
  if (!minutes.is_integer()) return hours.to_string();
  std::string mm = minutes.to_string();
  if (mm.size() < 2) mm = "0" + mm;
  return whole.str() + ":" + mm;
}

}  // namespace

TimeSpec normalize_time(std::string_view phrase) {
  Words w = time_words(phrase);
  TimeSpec out;
  if (!w.empty() && w.front() == "for") w.erase(w.begin());
  auto removed = strip_periodicity(w);
  if (w.empty()) return out;  // "" or a bare "every day"

  for (const auto& p : always_phrases())
    if (w == p) return out;

  if (auto d = iso_date(w)) {
    out.interval = sastl::TimeInterval::make(Rational(0), Bound::finite(Rational(24)));
    out.date = *d;
  } else if (auto iv = clock_interval(w)) {
    out.interval = *iv;
  } else {
    throw AmbiguousTime(trim(phrase));
  }
  for (const auto& r : removed) out.notes.push_back("periodicity '" + r + "' dropped; clock interval kept");
  return out;
}

std::string describe_time(const TimeSpec& t) {
  if (t.date) return "on " + *t.date;
  if (t.interval.is_unbounded()) return "always";
  if (t.interval.hi.is_infinite()) return "from " + clock_text(t.interval.lo);
  return "between " + clock_text(t.interval.lo) + " to " + clock_text(*t.interval.hi.value);
}

namespace detail {

TimeMatch classify_time_phrase(std::string_view phrase) {
  Words w = time_words(phrase);
  if (w.empty()) return TimeMatch::None;
  // must carry some time signal of its own; normalize_time("for") succeeds
  // on an empty remainder and is not a time expression
  Words probe = w;
  if (probe.front() == "for") return TimeMatch::None;
  try {
    normalize_time(phrase);
    return TimeMatch::Exact;
  } catch (const AmbiguousTime&) {
  }
  static const std::set<std::string> leads = {"after", "before", "until", "by", "past"};
  static const std::set<std::string> anchors = {"midnight", "noon", "dark", "dusk", "dawn", "sunset", "sunrise",
                                                "daybreak", "nightfall"};
  if (w.size() == 2 && leads.count(w[0]) && anchors.count(w[1])) return TimeMatch::Vague;
  if (w.size() >= 2 && leads.count(w[0])) {
    std::size_t i = 1;
    if (clock_value(w, i) && i == w.size()) return TimeMatch::Vague;
  }
  static const std::vector<Words> vague = {
      {"at", "night"},       {"overnight"},          {"in", "the", "morning"}, {"in", "the", "evening"},
      {"in", "the", "afternoon"}, {"during", "the", "night"}, {"on", "weekends"}, {"on", "weekdays"},
      {"soon"},              {"during", "peak", "hours"}, {"at", "peak", "hours"}, {"during", "business", "hours"},
  };
  for (const auto& v : vague)
    if (w == v) return TimeMatch::Vague;
  return TimeMatch::None;
}

}  // namespace detail

}  // namespace cityspec
