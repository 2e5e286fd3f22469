// extract_tagger.cpp : lexicon + pattern reference tagger

#include <algorithm>
#include <map>
#include <set>

#include "extract_internal.hpp"

namespace cityspec {

namespace {

struct Candidate {
  KeyKind kind;
  Span span;
  bool exact = false;     // exact vocabulary hit
  std::string canonical;  // vocabulary spelling for stem hits
};

struct Run {
  KeyKind kind;
  Span span;
  int context = 0;
};

// Lower priority number wins ties.
int priority(KeyKind k) {
  switch (k) {
    case KeyKind::Location: return 0;
    case KeyKind::Time: return 1;
    case KeyKind::Condition: return 2;
    case KeyKind::Quantifier: return 3;
    case KeyKind::Entity: return 4;
  }
  return 5;
}

bool is_stop(std::string_view w) {
  static const std::set<std::string, std::less<>> k = {
      "between", "from", "during", "for", "at", "on", "in", "should", "shall", "must", "may", "can", "will",
      "would", "is", "are", "be", "when", "while", "if", "after", "before", "until", "every", "daily", "always",
      "that", "which", "where", "with", "to", "by", "than"};
  return k.count(w) > 0;
}

// Placeholder neighbours seen in KB patterns, per kind.
struct PatternContext {
  std::array<std::set<std::string>, 5> prev, next;

  explicit PatternContext(const KnowledgeBase& kb) {
    for (const auto& p : kb.patterns()) {
      auto toks = tokenize(p.text);
      for (std::size_t i = 0; i < toks.size(); ++i) {
        const std::string& t = toks[i].text;
        if (t.size() < 2 || t[0] != '#') continue;
        auto kind = kind_from_name(t.substr(1));
        if (!kind) continue;
        std::string before = i == 0 ? "^" : to_lower(toks[i - 1].text);
        std::string after = i + 1 == toks.size() ? "$" : to_lower(toks[i + 1].text);
        if (before[0] != '#') prev[kind_index(*kind)].insert(before);
        if (after[0] != '#') next[kind_index(*kind)].insert(after);
      }
    }
  }

  int score(KeyKind k, const std::vector<std::string>& lower, const Span& s) const {
    std::string before = s.begin == 0 ? "^" : lower[s.begin - 1];
    std::string after = s.end >= lower.size() ? "$" : lower[s.end];
    return static_cast<int>(prev[kind_index(k)].count(before)) + static_cast<int>(next[kind_index(k)].count(after));
  }
};

void vocabulary_candidates(const KnowledgeBase& kb, const std::vector<std::string>& lower,
                           const std::vector<std::string>& stems, std::vector<Candidate>& out) {
  std::size_t n = lower.size();
  for (KeyKind k : kAllKinds) {
    for (const auto& entry : kb.vocab(k)) {
      auto words = detail::lower_tokens(entry.text);
      if (words.empty() || words.size() > n) continue;
      std::vector<std::string> wstems;
      for (const auto& w : words) wstems.push_back(singularize(w));
      for (std::size_t i = 0; i + words.size() <= n; ++i) {
        bool exact = true, stem = true;
        for (std::size_t j = 0; j < words.size() && (exact || stem); ++j) {
          exact = exact && lower[i + j] == words[j];
          stem = stem && stems[i + j] == wstems[j];
        }
        if (exact)
          out.push_back({k, {i, i + words.size()}, true, {}});
        else if (stem)
          out.push_back({k, {i, i + words.size()}, false, entry.text});
      }
    }
  }
}

void time_candidates(std::string_view text, const std::vector<Token>& tokens, std::vector<Candidate>& out) {
  std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (detail::is_clause_delimiter(tokens[i].text)) continue;
    std::size_t max_len = std::min<std::size_t>(12, n - i);
    for (std::size_t len = max_len; len >= 1; --len) {
      bool crosses = false;
      for (std::size_t j = i; j < i + len; ++j) crosses = crosses || detail::is_clause_delimiter(tokens[j].text);
      if (crosses) continue;
      std::string phrase = span_text(text, tokens, {i, i + len});
      if (detail::classify_time_phrase(phrase) != detail::TimeMatch::None) {
        out.push_back({KeyKind::Time, {i, i + len}, false, {}});
        break;
      }
    }
  }
}

void condition_candidates(const std::vector<Token>& tokens, const std::vector<std::string>& lower,
                          std::vector<Candidate>& out) {
  std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!parse_number_token(tokens[i].text)) continue;
    std::size_t j = i + 1;
    while (j < n && detail::is_unit_word(lower[j])) ++j;
    while (j > i + 1 && (lower[j - 1] == "per" || lower[j - 1] == "square" || lower[j - 1] == "cubic")) --j;
    out.push_back({KeyKind::Condition, {i, j}, false, {}});
  }
}

// Noun phrase after a location cue, stopping at punctuation and function words.
std::size_t place_end(const std::vector<Token>& tokens, const std::vector<std::string>& lower, std::size_t i) {
  while (i < tokens.size() && !detail::is_clause_delimiter(tokens[i].text) && !is_stop(lower[i])) ++i;
  return i;
}

void location_candidates(const std::vector<Token>& tokens, const std::vector<std::string>& lower,
                         std::vector<Candidate>& out) {
  std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    // within N <distance unit> of X
    if (lower[i] == "within" && i + 4 < n && parse_number_token(lower[i + 1]) &&
        detail::meters_per(lower[i + 2]) != Rational(0) && lower[i + 3] == "of") {
      std::size_t e = place_end(tokens, lower, i + 4);
      if (e > i + 4) out.push_back({KeyKind::Location, {i, e}, false, {}});
      continue;
    }
    // nearby X, near X, close to X: kept whole so the vagueness gets clarified
    std::size_t cue = 0;
    if (lower[i] == "nearby" || lower[i] == "near") cue = 1;
    if ((lower[i] == "close" || lower[i] == "next") && i + 1 < n && lower[i + 1] == "to") cue = 2;
    if (cue && i + cue < n && !parse_number_token(lower[i + cue])) {
      std::size_t e = place_end(tokens, lower, i + cue);
      if (e > i + cue) out.push_back({KeyKind::Location, {i, e}, false, {}});
    }
  }
}

}  // namespace

SlotSet LexiconTagger::tag(std::string_view text, const KnowledgeBase& kb) const {
  auto tokens = tokenize(text);
  std::size_t n = tokens.size();
  std::vector<std::string> lower, stems;
  for (const auto& t : tokens) {
    lower.push_back(to_lower(t.text));
    stems.push_back(singularize(lower.back()));
  }

  std::vector<Candidate> cands;
  vocabulary_candidates(kb, lower, stems, cands);
  time_candidates(text, tokens, cands);
  condition_candidates(tokens, lower, cands);
  location_candidates(tokens, lower, cands);

  // Merge overlapping candidates of one kind into runs.
  PatternContext ctx(kb);
  std::vector<Run> runs;
  for (KeyKind k : kAllKinds) {
    std::vector<Span> spans;
    for (const auto& c : cands)
      if (c.kind == k) spans.push_back(c.span);
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
      return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
    });
    for (const auto& s : spans) {
      if (!runs.empty() && runs.back().kind == k && s.begin < runs.back().span.end)
        runs.back().span.end = std::max(runs.back().span.end, s.end);
      else
        runs.push_back({k, s, 0});
    }
  }
  for (auto& r : runs) r.context = ctx.score(r.kind, lower, r.span);

  // Assign each token to the strongest run covering it.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(n, kNone);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (t < runs[r].span.begin || t >= runs[r].span.end) continue;
      if (owner[t] == kNone) {
        owner[t] = r;
        continue;
      }
      const Run& a = runs[r];
      const Run& b = runs[owner[t]];
      auto key = [](const Run& x) { return std::make_tuple(x.span.size(), x.context, -priority(x.kind)); };
      if (key(a) > key(b)) owner[t] = r;
    }
  }

  SlotSet out;
  for (std::size_t t = 0; t < n;) {
    if (owner[t] == kNone) {
      ++t;
      continue;
    }
    std::size_t r = owner[t];
    std::size_t e = t + 1;
    while (e < n && owner[e] == r) ++e;
    Span span{t, e};
    KeyedPhrase p;
    p.kind = runs[r].kind;
    p.span = span;
    p.text = span_text(text, tokens, span);
    p.confidence = 0.6;
    for (const auto& c : cands) {
      if (c.kind != p.kind || !(c.span == span)) continue;
      if (c.exact) {
        p.confidence = 1.0;
        p.canonical.clear();
        break;
      }
      if (!c.canonical.empty() && p.canonical.empty()) p.canonical = c.canonical;
    }
    if (p.canonical == p.text) p.canonical.clear();
    out.add(std::move(p));
    t = e;
  }
  return out;
}

SlotSet checked_tag(const Tagger& tagger, std::string_view text, const KnowledgeBase& kb) {
  SlotSet s = tagger.tag(text, kb);
  auto tokens = tokenize(text);
  try {
    validate_spans(s, text, tokens);
  } catch (const SlotError& e) {
    throw TaggerContractViolation(std::string("tagger output rejected: ") + e.what());
  }
  for (KeyKind k : kAllKinds) {
    for (const auto& p : s.get(k)) {
      if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
        throw TaggerContractViolation("tagger output rejected: confidence outside [0,1] for '" + p.text + "'");
      if (p.kind != k) throw TaggerContractViolation("tagger output rejected: phrase filed under the wrong kind");
      if (!p.span) throw TaggerContractViolation("tagger output rejected: phrase '" + p.text + "' has no span");
    }
  }
  return s;
}

}  // namespace cityspec
