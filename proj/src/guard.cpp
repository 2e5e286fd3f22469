// guard.cpp : n-gram validator, session cache, promotion

#include "cityspec/guard.hpp"

#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace cityspec {

std::string_view decision_name(Decision d) {
  switch (d) {
    case Decision::Accept: return "accept";
    case Decision::RejectFaultI: return "reject_fault_I";
    case Decision::RejectFaultII: return "reject_fault_II";
  }
  return "?";
}

Json verdict_to_json(const ValidationVerdict& v) {
  Json j;
  j["term"] = v.term;
  j["claimed"] = std::string(kind_name(v.claimed));
  j["predicted"] = std::string(kind_name(v.predicted));
  j["uncertainty"] = v.uncertainty;
  j["decision"] = std::string(decision_name(v.decision));
  return j;
}

std::vector<std::string> char_ngrams(std::string_view term) {
  std::string s = "^" + normalize_phrase(term) + "$";
  std::vector<std::string> out;
  for (std::size_t n : {2u, 3u})
    for (std::size_t i = 0; i + n <= s.size(); ++i) out.push_back(s.substr(i, n));
  return out;
}

// ── Validator ───────────────────────────────────────────────────────────────

Validator Validator::train(const KnowledgeBase& kb, ValidatorConfig cfg) {
  if (cfg.passes < 1) throw std::invalid_argument("validator needs at least one pass");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw std::invalid_argument("dropout must be in [0,1)");
  Validator v;
  v.cfg_ = cfg;
  std::set<std::string> distinct;
  for (KeyKind k : kAllKinds) {
    if (kb.vocab(k).empty()) throw EmptyVocabulary("no phrase of kind " + std::string(kind_name(k)));
    std::size_t i = kind_index(k);
    for (const auto& e : kb.vocab(k))
      for (auto& g : char_ngrams(e.text)) {
        ++v.counts_[i][g];
        ++v.totals_[i];
        distinct.insert(std::move(g));
      }
  }
  v.features_ = distinct.size();
  return v;
}

std::array<double, 5> Validator::score(std::string_view term) const {
  std::array<double, 5> s{};
  auto grams = char_ngrams(term);
  for (KeyKind k : kAllKinds) {
    std::size_t i = kind_index(k);
    double denom = std::log(static_cast<double>(totals_[i] + features_ + 1));
    for (const auto& g : grams) {
      auto it = counts_[i].find(g);
      s[i] += std::log((it == counts_[i].end() ? 0.0 : it->second) + 1.0) - denom;
    }
  }
  return s;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

bool is_subject(KeyKind k) { return k == KeyKind::Entity || k == KeyKind::Quantifier; }

}  // namespace

ValidationVerdict Validator::validate(std::string_view term, KeyKind claimed) const {
  return validate(term, claimed, cfg_.threshold);
}

ValidationVerdict Validator::validate(std::string_view term, KeyKind claimed, double threshold) const {
  std::string norm = normalize_phrase(term);
  if (norm.empty()) throw EmptyTerm();
  auto grams = char_ngrams(norm);

  // per-gram log-likelihoods, computed once
  std::vector<std::array<double, 5>> ll(grams.size());
  std::vector<std::array<bool, 5>> seen(grams.size());
  for (std::size_t g = 0; g < grams.size(); ++g)
    for (KeyKind k : kAllKinds) {
      std::size_t i = kind_index(k);
      auto it = counts_[i].find(grams[g]);
      double c = it == counts_[i].end() ? 0.0 : it->second;
      seen[g][i] = c > 0;
      ll[g][i] = std::log(c + 1.0) - std::log(static_cast<double>(totals_[i] + features_ + 1));
    }

  std::mt19937_64 rng(mix_seed(cfg_.seed, fnv1a(norm)));
  const double keep = 1.0 - cfg_.dropout;
  ValidationVerdict v;
  v.term = std::string(term);
  v.claimed = claimed;
  for (std::size_t pass = 0; pass < cfg_.passes; ++pass) {
    std::array<double, 5> s{};
    std::array<std::size_t, 5> hits{};
    std::size_t kept = 0;
    for (std::size_t g = 0; g < grams.size(); ++g) {
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u >= keep) continue;
      ++kept;
      for (std::size_t i = 0; i < 5; ++i) {
        s[i] += ll[g][i];
        hits[i] += seen[g][i];
      }
    }
    if (kept == 0) continue;
    std::size_t best = 0;
    for (std::size_t i = 1; i < 5; ++i)
      if (s[i] > s[best]) best = i;
    if (static_cast<double>(hits[best]) / static_cast<double>(kept) < cfg_.min_coverage) continue;
    ++v.votes[best];
  }

  // Majority kind. With merging, entity and quantifier votes pool into one
  // subject bucket and the prediction is whichever of the two got more.
  std::size_t majority = 0;
  std::optional<KeyKind> winner;
  auto consider = [&](std::size_t count, KeyKind k) {
    if (count > majority) majority = count, winner = k;
  };
  std::size_t e = v.votes[kind_index(KeyKind::Entity)], q = v.votes[kind_index(KeyKind::Quantifier)];
  if (cfg_.merge_entity_quantifier) {
    consider(e + q, q > e ? KeyKind::Quantifier : KeyKind::Entity);
  } else {
    consider(e, KeyKind::Entity);
    consider(q, KeyKind::Quantifier);
  }
  for (KeyKind k : {KeyKind::Location, KeyKind::Time, KeyKind::Condition}) consider(v.votes[kind_index(k)], k);

  if (!winner) {
    // every pass abstained: report the undropped argmax, fully uncertain
    auto full = score(norm);
    std::size_t best = 0;
    for (std::size_t i = 1; i < 5; ++i)
      if (full[i] > full[best]) best = i;
    winner = kAllKinds[best];
  }
  v.predicted = *winner;
  v.uncertainty = 1.0 - static_cast<double>(majority) / static_cast<double>(cfg_.passes);

  bool match = v.predicted == claimed ||
               (cfg_.merge_entity_quantifier && is_subject(v.predicted) && is_subject(claimed));
  if (!match)
    v.decision = Decision::RejectFaultI;
  else if (v.uncertainty >= threshold)
    v.decision = Decision::RejectFaultII;
  else
    v.decision = Decision::Accept;
  return v;
}

// ── Session cache ───────────────────────────────────────────────────────────

void SessionCache::require_open() const {
  if (closed_) throw SessionClosed();
}

void SessionCache::put_answer(const std::string& requirement_id, KeyKind k, const std::string& phrase) {
  require_open();
  answers_[{requirement_id, k}] = phrase;
}

std::optional<std::string> SessionCache::get_answer(const std::string& requirement_id, KeyKind k) const {
  require_open();
  auto it = answers_.find({requirement_id, k});
  if (it == answers_.end()) return std::nullopt;
  return it->second;
}

void SessionCache::put_term(const std::string& term, KeyKind k) {
  require_open();
  std::string norm = normalize_phrase(term);
  if (norm.empty()) return;
  auto it = term_index_.find(norm);
  if (it != term_index_.end()) {
    terms_[it->second] = {trim(term), k};
    return;
  }
  term_index_[norm] = terms_.size();
  terms_.emplace_back(trim(term), k);
}

std::optional<KeyKind> SessionCache::get_term(std::string_view term) const {
  require_open();
  auto it = term_index_.find(normalize_phrase(term));
  if (it == term_index_.end()) return std::nullopt;
  return terms_[it->second].second;
}

void SessionCache::close() {
  answers_.clear();
  terms_.clear();
  term_index_.clear();
  closed_ = true;
}

// ── Promotion ───────────────────────────────────────────────────────────────

PromoteResult promote(const KnowledgeBase& kb, const Validator& validator, std::string_view term, KeyKind kind,
                      double threshold) {
  PromoteResult r{kb, validator.validate(term, kind, threshold), false};
  if (r.verdict.accepted()) r.added = r.kb.add_term(kind, trim(term), Provenance::Promoted);
  return r;
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

AuditLog::AuditLog(std::string path) : path_(std::move(path)) {
  if (!path_.empty()) {
    out_.open(path_, std::ios::app);
    if (!out_) throw IoError("cannot open audit log " + path_);
  }
}

void AuditLog::record(const ValidationVerdict& v) {
  if (path_.empty()) return;
  Json j = verdict_to_json(v);
  j["timestamp"] = utc_timestamp();
  std::lock_guard lock(mutex_);
  out_ << dump_line(j) << '\n';
}

void AuditLog::flush() {
  std::lock_guard lock(mutex_);
  if (out_.is_open()) out_.flush();
}

Guard::Guard(KnowledgeStore& store, ValidatorConfig cfg, std::string audit_path, std::size_t retrain_every)
    : store_(store),
      cfg_(cfg),
      audit_(std::move(audit_path)),
      retrain_every_(std::max<std::size_t>(1, retrain_every)),
      validator_(std::make_shared<const Validator>(Validator::train(*store.snapshot(), cfg))) {}

std::shared_ptr<const Validator> Guard::validator() const {
  std::lock_guard lock(mutex_);
  return validator_;
}

ValidationVerdict Guard::validate(std::string_view term, KeyKind claimed) const {
  return validator()->validate(term, claimed);
}

ValidationVerdict Guard::promote(std::string_view term, KeyKind kind) {
  ValidationVerdict v = validate(term, kind);
  audit_.record(v);
  if (v.accepted() && store_.add_term(kind, trim(term), Provenance::Promoted)) {
    bool due;
    {
      std::lock_guard lock(mutex_);
      due = ++pending_ >= retrain_every_;
    }
    if (due) retrain();
  }
  return v;
}

void Guard::retrain() {
  auto fresh = std::make_shared<const Validator>(Validator::train(*store_.snapshot(), cfg_));
  std::lock_guard lock(mutex_);
  validator_ = std::move(fresh);
  pending_ = 0;
}

std::size_t Guard::pending_promotions() const {
  std::lock_guard lock(mutex_);
  return pending_;
}

void Guard::flush() { audit_.flush(); }

}  // namespace cityspec
