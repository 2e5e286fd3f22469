#include "cityspec/reqmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace cityspec {

std::string_view kind_name(KeyKind k) {
  switch (k) {
    case KeyKind::Entity: return "entity";
    case KeyKind::Quantifier: return "quantifier";
    case KeyKind::Location: return "location";
    case KeyKind::Time: return "time";
    case KeyKind::Condition: return "condition";
  }
  return "?";
}

std::optional<KeyKind> kind_from_name(std::string_view s) {
  for (KeyKind k : kAllKinds)
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

// ── Tokens ──────────────────────────────────────────────────────────────────

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?': case '(': case ')':
      return true;
    default:
      return false;
  }
}

// Punctuation that stays inside the current token.
bool internal_punct(std::string_view s, std::size_t i, bool token_open) {
  char c = s[i];
  bool next_alnum = i + 1 < s.size() && is_alnum(s[i + 1]);
  bool prev_digit = i > 0 && is_digit(s[i - 1]);
  bool next_digit = i + 1 < s.size() && is_digit(s[i + 1]);
  if (!token_open) return false;
  if (c == '.') return next_alnum;
  if (c == ',' || c == ':') return prev_digit && next_digit;
  return false;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  constexpr std::size_t kNone = std::string_view::npos;
  std::size_t open = kNone;
  auto close = [&](std::size_t end) {
    if (open != kNone) {
      out.push_back({std::string(text.substr(open, end - open)), open, end});
      open = kNone;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (is_space(c)) {
      close(i);
    } else if (is_punct(c) && !internal_punct(text, i, open != kNone)) {
      close(i);
      out.push_back({std::string(1, c), i, i + 1});
    } else if (open == kNone) {
      open = i;
    }
    ++i;
  }
  close(text.size());
  return out;
}

std::string detokenize(const std::vector<Token>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

std::vector<std::string> token_texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

// ── Lexical helpers ─────────────────────────────────────────────────────────

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_phrase(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::optional<int> number_word_value(std::string_view w) {
  static constexpr std::string_view kWords[] = {
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
      "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
      "nineteen", "twenty"};
  for (int i = 0; i <= 20; ++i)
    if (w == kWords[i]) return i;
  return std::nullopt;
}

std::optional<Rational> parse_number_token(std::string_view token) {
  std::string lower = to_lower(token);
  if (auto w = number_word_value(lower)) return Rational(*w);
  std::string digits;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    char c = lower[i];
    // thousands separators only between digits
    if (c == ',' && i > 0 && i + 1 < lower.size() && is_digit(lower[i - 1]) && is_digit(lower[i + 1])) continue;
    digits += c;
  }
  if (!digits.empty() && digits.back() == '%') digits.pop_back();
  return Rational::parse(digits);
}

std::string singularize(std::string_view word) {
  std::string w(word);
  std::string lower = to_lower(w);
  auto ends = [&](std::string_view suf) {
    return lower.size() > suf.size() && lower.compare(lower.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (lower.size() <= 3) return w;
  if (ends("ies")) return w.substr(0, w.size() - 3) + (std::isupper(static_cast<unsigned char>(w.back())) ? "Y" : "y");
  if (ends("sses") || ends("shes") || ends("ches") || ends("xes") || ends("zes")) return w.substr(0, w.size() - 2);
  // singular -is words are mostly -sis (basis, analysis); "taxis" is a plural
  if (ends("ss") || ends("us") || ends("sis") || lower == "this" || lower == "axis" || lower == "tennis" ||
      lower == "chassis" || lower == "debris" || lower == "iris")
    return w;
  if (ends("s")) return w.substr(0, w.size() - 1);
  return w;
}

// ── Slots ───────────────────────────────────────────────────────────────────

void SlotSet::add(KeyedPhrase p) {
  if (p.span) {
    if (p.span->begin >= p.span->end) throw SlotError("empty span for " + std::string(kind_name(p.kind)));
    for (const auto& list : phrases_)
      for (const auto& q : list)
        if (q.span && q.span->overlaps(*p.span))
          throw SlotError("span of '" + p.text + "' overlaps '" + q.text + "'");
  }
  phrases_[kind_index(p.kind)].push_back(std::move(p));
}

void SlotSet::replace(KeyKind k, std::vector<KeyedPhrase> phrases) {
  clear(k);
  for (auto& p : phrases) {
    p.kind = k;
    add(std::move(p));
  }
}

void SlotSet::clear(KeyKind k) {
  phrases_[kind_index(k)].clear();
  switch (k) {
    case KeyKind::Time: time.reset(); break;
    case KeyKind::Condition: condition.reset(); break;
    case KeyKind::Location: location.reset(); break;
    default: break;
  }
}

std::vector<KeyedPhrase> SlotSet::all() const {
  std::vector<KeyedPhrase> out;
  for (const auto& list : phrases_) out.insert(out.end(), list.begin(), list.end());
  std::stable_sort(out.begin(), out.end(), [](const KeyedPhrase& a, const KeyedPhrase& b) {
    if (a.span && b.span) return a.span->begin < b.span->begin;
    return a.span.has_value() && !b.span.has_value();
  });
  return out;
}

bool SlotSet::empty() const {
  return std::all_of(phrases_.begin(), phrases_.end(), [](const auto& l) { return l.empty(); });
}

bool SlotSet::same_phrases(const SlotSet& o) const {
  for (KeyKind k : kAllKinds) {
    const auto& a = get(k);
    const auto& b = o.get(k);
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].text != b[i].text || a[i].span != b[i].span) return false;
  }
  return true;
}

std::string span_text(std::string_view source, const std::vector<Token>& tokens, const Span& span) {
  if (span.begin >= span.end || span.end > tokens.size()) throw SlotError("span out of range");
  std::size_t b = tokens[span.begin].begin;
  std::size_t e = tokens[span.end - 1].end;
  return std::string(source.substr(b, e - b));
}

void validate_spans(const SlotSet& slots, std::string_view source, const std::vector<Token>& tokens) {
  std::vector<Span> seen;
  for (KeyKind k : kAllKinds) {
    for (const auto& p : slots.get(k)) {
      if (!p.span) continue;
      if (p.span->begin >= p.span->end || p.span->end > tokens.size())
        throw SlotError("span of '" + p.text + "' outside the token range");
      if (span_text(source, tokens, *p.span) != p.text)
        throw SlotError("phrase '" + p.text + "' does not match its span");
      for (const auto& s : seen)
        if (s.overlaps(*p.span)) throw SlotError("overlapping spans at '" + p.text + "'");
      seen.push_back(*p.span);
    }
  }
}

// ── Requirement ─────────────────────────────────────────────────────────────

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Draft: return "draft";
    case Status::AwaitingClarification: return "awaiting_clarification";
    case Status::Proposed: return "proposed";
    case Status::Confirmed: return "confirmed";
  }
  return "?";
}

std::optional<Status> status_from_name(std::string_view s) {
  for (Status st : {Status::Draft, Status::AwaitingClarification, Status::Proposed, Status::Confirmed})
    if (status_name(st) == s) return st;
  return std::nullopt;
}

std::string requirement_id_for(std::string_view text) {
  // FNV-1a over the normalized text
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : normalize_phrase(text)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << "req-" << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

Requirement Requirement::from_text(std::string id, std::string text) {
  Requirement r;
  r.id = id.empty() ? requirement_id_for(text) : std::move(id);
  r.tokens = tokenize(text);
  r.source_text = std::move(text);
  return r;
}

// ── Checks ──────────────────────────────────────────────────────────────────

CompletenessReport check_completeness(const SlotSet& slots, CompletenessMode mode) {
  CompletenessReport r;
  bool strict = mode == CompletenessMode::Strict;
  bool subject_named = slots.has(KeyKind::Entity) || slots.has(KeyKind::Quantifier);
  for (KeyKind k : kAllKinds) {
    if (slots.has(k)) continue;
    bool defaultable = (k == KeyKind::Time) || ((k == KeyKind::Entity || k == KeyKind::Quantifier) && subject_named);
    if (!strict && defaultable)
      r.defaulted.push_back(k);
    else
      r.missing.push_back(k);
  }
  return r;
}

std::vector<KeyKind> completeness_check(const SlotSet& slots, CompletenessMode mode) {
  return check_completeness(slots, mode).missing;
}

VagueTerms VagueTerms::defaults() {
  return VagueTerms{{"nearby", "close to", "near", "around", "after midnight", "soon"}};
}

VagueTerms VagueTerms::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vague-term list: " + path);
  VagueTerms v;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    v.terms.push_back(normalize_phrase(t));
  }
  return v;
}

std::string_view reason_name(AmbiguityReason r) {
  switch (r) {
    case AmbiguityReason::VagueDistance: return "vague-distance";
    case AmbiguityReason::VagueTime: return "vague-time";
    case AmbiguityReason::VagueTerm: return "vague-term";
    case AmbiguityReason::NonNumeric: return "non-numeric";
  }
  return "?";
}

namespace {

std::vector<std::string> lower_words(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(s)) out.push_back(to_lower(t.text));
  return out;
}

bool contains_words(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

}  // namespace

std::vector<Ambiguity> ambiguity_check(const SlotSet& slots, const VagueTerms& vague) {
  std::vector<Ambiguity> out;
  std::vector<std::vector<std::string>> terms;
  for (const auto& t : vague.terms) terms.push_back(lower_words(t));

  for (KeyKind k : kAllKinds) {
    for (const auto& p : slots.get(k)) {
      auto words = lower_words(p.text);
      bool flagged = false;
      for (std::size_t i = 0; i < terms.size() && !flagged; ++i) {
        if (!contains_words(words, terms[i])) continue;
        AmbiguityReason reason = k == KeyKind::Location ? AmbiguityReason::VagueDistance
                                 : k == KeyKind::Time   ? AmbiguityReason::VagueTime
                                                        : AmbiguityReason::VagueTerm;
        out.push_back({k, p.text, reason, vague.terms[i]});
        flagged = true;
      }
      if (!flagged && k == KeyKind::Condition) {
        bool numeric = std::any_of(words.begin(), words.end(),
                                   [](const std::string& w) { return parse_number_token(w).has_value(); });
        if (!numeric) out.push_back({k, p.text, AmbiguityReason::NonNumeric, {}});
      }
    }
  }
  return out;
}

}  // namespace cityspec
