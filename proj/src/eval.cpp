// eval.cpp : token/sentence metrics and Damerau–Levenshtein distance

#include "cityspec/eval.hpp"

#include <algorithm>
#include <map>

namespace cityspec {

TokenLabels token_labels(const Requirement& req) {
  TokenLabels labels(req.tokens.size());
  for (const auto& p : req.slots.all()) {
    if (!p.span) continue;
    for (std::size_t i = p.span->begin; i < p.span->end && i < labels.size(); ++i) labels[i] = p.kind;
  }
  return labels;
}

namespace {

void check_aligned(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred) {
  if (gold.size() != pred.size())
    throw MisalignedCorpora("corpora differ in size: " + std::to_string(gold.size()) + " vs " +
                            std::to_string(pred.size()));
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (token_texts(gold[i].tokens) != token_texts(pred[i].tokens))
      throw MisalignedCorpora("requirement " + std::to_string(i + 1) + " has different tokens");
}

struct Counts {
  std::size_t gold_keyed = 0, pred_keyed = 0, correct = 0;
};

// kind = nullopt counts every key token; otherwise only tokens of that kind.
Counts count(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred,
             std::optional<KeyKind> kind = std::nullopt) {
  check_aligned(gold, pred);
  Counts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto g = token_labels(gold[i]), p = token_labels(pred[i]);
    for (std::size_t t = 0; t < g.size(); ++t) {
      bool gk = g[t] && (!kind || *g[t] == *kind);
      bool pk = p[t] && (!kind || *p[t] == *kind);
      c.gold_keyed += gk;
      c.pred_keyed += pk;
      c.correct += gk && pk && *g[t] == *p[t];
    }
  }
  return c;
}

Rational ratio(std::size_t num, std::size_t den) {
  return den == 0 ? Rational(0) : Rational(static_cast<long long>(num), static_cast<long long>(den));
}

Prf prf(const Counts& c) {
  Prf r{ratio(c.correct, c.pred_keyed), ratio(c.correct, c.gold_keyed), Rational(0)};
  if (r.precision + r.recall != Rational(0))
    r.f1 = Rational(2) * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

}  // namespace

Rational token_accuracy(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred) {
  Counts c = count(gold, pred);
  if (c.gold_keyed == 0) return Rational(1);
  return ratio(c.correct, c.gold_keyed);
}

Rational sentence_accuracy(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred) {
  check_aligned(gold, pred);
  if (gold.empty()) return Rational(0);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) exact += gold[i].slots.same_phrases(pred[i].slots);
  return ratio(exact, gold.size());
}

Prf precision_recall_f1(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred) {
  return prf(count(gold, pred));
}

std::array<Prf, 5> per_kind_prf(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred) {
  std::array<Prf, 5> out;
  for (KeyKind k : kAllKinds) out[kind_index(k)] = prf(count(gold, pred, k));
  return out;
}

EvalReport evaluate(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred) {
  EvalReport r;
  r.token_acc = token_accuracy(gold, pred);
  r.sent_acc = sentence_accuracy(gold, pred);
  Prf micro = precision_recall_f1(gold, pred);
  r.precision = micro.precision;
  r.recall = micro.recall;
  r.f1 = micro.f1;
  r.per_kind = per_kind_prf(gold, pred);
  r.n_requirements = gold.size();
  for (const auto& g : gold) r.n_tokens += g.tokens.size();
  return r;
}

namespace {

Json metric(const Rational& r) {
  Json j;
  j["exact"] = r.to_string();
  j["value"] = r.to_double();
  return j;
}

}  // namespace

Json report_to_json(const EvalReport& r) {
  Json j;
  j["token_acc"] = metric(r.token_acc);
  j["sent_acc"] = metric(r.sent_acc);
  j["precision"] = metric(r.precision);
  j["recall"] = metric(r.recall);
  j["f1"] = metric(r.f1);
  Json kinds = Json::object();
  for (KeyKind k : kAllKinds) {
    const Prf& p = r.per_kind[kind_index(k)];
    kinds[std::string(kind_name(k))] = {{"precision", metric(p.precision)},
                                        {"recall", metric(p.recall)},
                                        {"f1", metric(p.f1)}};
  }
  j["per_kind"] = kinds;
  j["n_requirements"] = r.n_requirements;
  j["n_tokens"] = r.n_tokens;
  return j;
}

// ── Edit distance ───────────────────────────────────────────────────────────

std::u32string utf8_codepoints(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) ok = (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
    if (!ok) {
      out.push_back(c);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : c & (0x7f >> len);
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t dld(std::string_view sa, std::string_view sb) {
  // Lowrance–Wagner with a last-row-seen table per symbol.
  std::u32string a = utf8_codepoints(sa), b = utf8_codepoints(sb);
  const std::size_t n = a.size(), m = b.size(), inf = n + m;
  std::vector<std::vector<std::size_t>> d(n + 2, std::vector<std::size_t>(m + 2, 0));
  d[0][0] = inf;
  for (std::size_t i = 0; i <= n; ++i) d[i + 1][0] = inf, d[i + 1][1] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j + 1] = inf, d[1][j + 1] = j;
  std::map<char32_t, std::size_t> last_row;
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t last_col = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      auto it = last_row.find(b[j - 1]);
      std::size_t i1 = it == last_row.end() ? 0 : it->second;
      std::size_t j1 = last_col;
      std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      if (cost == 0) last_col = j;
      d[i + 1][j + 1] = std::min({d[i][j] + cost, d[i + 1][j] + 1, d[i][j + 1] + 1,
                                  d[i1][j1] + (i - i1 - 1) + 1 + (j - j1 - 1)});
    }
    last_row[a[i - 1]] = i;
  }
  return d[n + 1][m + 1];
}

std::size_t osa_distance(std::string_view sa, std::string_view sb) {
  std::u32string a = utf8_codepoints(sa), b = utf8_codepoints(sb);
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
    }
  return d[n][m];
}

}  // namespace cityspec
