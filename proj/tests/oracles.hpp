// oracles.hpp : independent reference computations the tests compare against
#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "cityspec/eval.hpp"
#include "cityspec/synth.hpp"
#include "support.hpp"

namespace cityspec::testing {

// ── Synthesis ───────────────────────────────────────────────────────────────

inline const char* placeholder(KeyKind k) {
  switch (k) {
    case KeyKind::Entity: return "#entity";
    case KeyKind::Quantifier: return "#quantifier";
    case KeyKind::Location: return "#location";
    case KeyKind::Time: return "#time";
    case KeyKind::Condition: return "#condition";
  }
  return "";
}

// Random KB: 1-5 used kinds with 1-9 phrases each, 1-6 patterns over random
// subsets plus one pattern using every used kind; sometimes an unused kind
// with a larger vocabulary that must not affect the volume.
inline KnowledgeBase random_kb(FormulaGen& g) {
  KnowledgeBase kb;
  std::vector<KeyKind> kinds(kAllKinds.begin(), kAllKinds.end());
  portable_shuffle(kinds, g.rng());
  std::size_t used = 1 + g.pick(5);
  std::vector<KeyKind> use(kinds.begin(), kinds.begin() + static_cast<std::ptrdiff_t>(used));
  for (KeyKind k : use) {
    std::size_t n = 1 + g.pick(9);
    for (std::size_t i = 0; i < n; ++i)
      kb.add_term(k, std::string(kind_name(k)) + "-" + std::to_string(i), Provenance::Synthetic);
  }
  if (used < 5 && g.pick(3) == 0)
    for (int i = 0; i < 20; ++i) kb.add_term(kinds.back(), "unused-" + std::to_string(i), Provenance::Synthetic);

  std::size_t extra = g.pick(6);
  for (std::size_t p = 0; p < extra; ++p) {
    std::string text = "row " + std::to_string(p);
    for (KeyKind k : use)
      if (g.pick(2)) text += std::string(" ") + placeholder(k) + " and";
    if (text != "row " + std::to_string(p)) kb.add_pattern(text, Provenance::Synthetic);
  }
  std::string full = "full";
  std::vector<KeyKind> order = use;
  portable_shuffle(order, g.rng());
  for (KeyKind k : order) full += std::string(" ") + placeholder(k) + " ,";
  kb.add_pattern(full, Provenance::Synthetic);
  return kb;
}

// Occurrences recounted from the rows, not taken from the manifest.
inline std::map<std::pair<KeyKind, std::string>, std::size_t> recount_occurrences(const SynthesisResult& r) {
  std::map<std::pair<KeyKind, std::string>, std::size_t> occ;
  for (const auto& row : r.rows) {
    auto kinds = pattern_placeholders(row.pattern);
    if (kinds.size() != row.phrases.size()) throw std::logic_error("row phrases disagree with its pattern");
    for (std::size_t i = 0; i < kinds.size(); ++i) ++occ[{kinds[i], row.phrases[i]}];
  }
  return occ;
}

inline std::vector<KeyKind> used_kinds(const KnowledgeBase& kb) {
  std::set<KeyKind> used;
  for (const auto& p : kb.patterns())
    for (KeyKind k : pattern_placeholders(p.text)) used.insert(k);
  return {used.begin(), used.end()};
}

// ── Edit distance and metrics ───────────────────────────────────────────────

// Shortest path in the edit graph (insert, delete, substitute, swap adjacent)
// from `src` to every string over `alpha` no longer than `cap`.
inline std::unordered_map<std::string, std::size_t> bfs_distances(const std::string& src, const std::string& alpha,
                                                           std::size_t cap) {
  std::unordered_map<std::string, std::size_t> dist{{src, 0}};
  std::deque<std::string> q{src};
  while (!q.empty()) {
    std::string s = q.front();
    q.pop_front();
    std::size_t d = dist[s];
    std::vector<std::string> next;
    for (std::size_t i = 0; i <= s.size(); ++i)
      if (s.size() < cap)
        for (char c : alpha) next.push_back(s.substr(0, i) + c + s.substr(i));
    for (std::size_t i = 0; i < s.size(); ++i) {
      next.push_back(s.substr(0, i) + s.substr(i + 1));
      for (char c : alpha) {
        std::string t = s;
        t[i] = c;
        next.push_back(t);
      }
      if (i + 1 < s.size()) {
        std::string t = s;
        std::swap(t[i], t[i + 1]);
        next.push_back(t);
      }
    }
    for (auto& t : next)
      if (dist.emplace(t, d + 1).second) q.push_back(std::move(t));
  }
  return dist;
}

inline std::vector<std::string> all_strings(const std::string& alpha, std::size_t max_len) {
  std::vector<std::string> out{""};
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].size() < max_len)
      for (char c : alpha) out.push_back(out[i] + c);
  return out;
}

struct Recount {
  Rational token_acc, sent_acc, p, r, f1;
};

// Token labels straight from the spans, then the definitions term by term.
inline Recount recount(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred) {
  long long gold_keys = 0, pred_keys = 0, correct = 0, exact = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::size_t n = gold[i].tokens.size();
    std::vector<int> g(n, -1), p(n, -1);
    for (const auto& ph : gold[i].slots.all())
      if (ph.span)
        for (auto t = ph.span->begin; t < ph.span->end; ++t) g[t] = static_cast<int>(ph.kind);
    for (const auto& ph : pred[i].slots.all())
      if (ph.span)
        for (auto t = ph.span->begin; t < ph.span->end; ++t) p[t] = static_cast<int>(ph.kind);
    for (std::size_t t = 0; t < n; ++t) {
      gold_keys += g[t] >= 0;
      pred_keys += p[t] >= 0;
      correct += g[t] >= 0 && g[t] == p[t];
    }
    std::set<std::tuple<int, std::string, std::size_t, std::size_t>> a, b;
    for (const auto& ph : gold[i].slots.all())
      a.emplace(static_cast<int>(ph.kind), ph.text, ph.span ? ph.span->begin : 0, ph.span ? ph.span->end : 0);
    for (const auto& ph : pred[i].slots.all())
      b.emplace(static_cast<int>(ph.kind), ph.text, ph.span ? ph.span->begin : 0, ph.span ? ph.span->end : 0);
    exact += a == b;
  }
  Recount r;
  r.token_acc = gold_keys ? Rational(correct, gold_keys) : Rational(1);
  r.sent_acc = gold.empty() ? Rational(0) : Rational(exact, static_cast<long long>(gold.size()));
  r.p = pred_keys ? Rational(correct, pred_keys) : Rational(0);
  r.r = gold_keys ? Rational(correct, gold_keys) : Rational(0);
  r.f1 = (r.p + r.r) == Rational(0) ? Rational(0) : Rational(2) * r.p * r.r / (r.p + r.r);
  return r;
}

// Random non-overlapping phrases over the requirement's tokens.
inline void random_slots(Requirement& req, FormulaGen& g) {
  std::size_t n = req.tokens.size();
  std::size_t i = 0;
  while (i < n) {
    if (g.pick(3) == 0) {
      std::size_t len = 1 + g.pick(std::min<std::size_t>(3, n - i));
      KeyedPhrase p;
      p.kind = kAllKinds[g.pick(5)];
      p.span = Span{i, i + len};
      p.text = span_text(req.source_text, req.tokens, *p.span);
      req.slots.add(p);
      i += len;
    } else {
      ++i;
    }
  }
}

}  // namespace cityspec::testing
