// guard.hpp : online learning — session cache, term validation, promotion
//
// The validator is a character n-gram (n = 2, 3) naive-Bayes model with one
// table per kind. Uncertainty comes from M stochastic passes, each scoring the
// term with a random p-fraction of its n-gram occurrences masked; every pass
// votes for its best kind, or abstains when fewer than `min_coverage` of the
// kept n-grams were ever seen for that kind. Then
//
//   uncertainty = 1 - (votes of the majority kind) / M
//
// fault I  : predicted kind differs from the claimed one
//            (entity and quantifier count as one kind when merging is on)
// fault II : kinds agree but uncertainty >= threshold
//
// Passes draw from mt19937_64 seeded by (validator seed, term), so a verdict
// is a pure function of (validator, term, claimed kind).

#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "cityspec/knowledge.hpp"
#include "cityspec/synth.hpp"

namespace cityspec {

class EmptyTerm : public std::invalid_argument {
 public:
  EmptyTerm() : std::invalid_argument("term is empty") {}
};

class SessionClosed : public std::runtime_error {
 public:
  SessionClosed() : std::runtime_error("session is closed") {}
};

enum class Decision { Accept, RejectFaultI, RejectFaultII };
std::string_view decision_name(Decision d);

struct ValidatorConfig {
  std::size_t passes = 30;   // M
  double dropout = 0.5;      // p
  double threshold = 0.5;
  bool merge_entity_quantifier = true;
  double min_coverage = 0.6;
  std::uint64_t seed = 7;
};

struct ValidationVerdict {
  std::string term;
  KeyKind claimed = KeyKind::Entity;
  KeyKind predicted = KeyKind::Entity;
  double uncertainty = 1.0;
  Decision decision = Decision::RejectFaultII;
  std::array<std::size_t, 5> votes{};
  bool accepted() const { return decision == Decision::Accept; }
};

Json verdict_to_json(const ValidationVerdict& v);

// Character n-grams of the lowercased, whitespace-collapsed term padded with
// '^' and '$'. Byte-level.
std::vector<std::string> char_ngrams(std::string_view term);

class Validator {
 public:
  // Throws EmptyVocabulary when a kind has no phrase.
  static Validator train(const KnowledgeBase& kb, ValidatorConfig cfg = {});

  ValidationVerdict validate(std::string_view term, KeyKind claimed) const;
  ValidationVerdict validate(std::string_view term, KeyKind claimed, double threshold) const;

  // Per-kind log-likelihood of the term with no dropout.
  std::array<double, 5> score(std::string_view term) const;

  const ValidatorConfig& config() const { return cfg_; }
  std::size_t feature_count() const { return features_; }

  friend bool operator==(const Validator& a, const Validator& b) {
    return a.counts_ == b.counts_ && a.totals_ == b.totals_ && a.features_ == b.features_;
  }

 private:
  ValidatorConfig cfg_;
  std::array<std::map<std::string, std::uint32_t>, 5> counts_;
  std::array<std::uint64_t, 5> totals_{};
  std::size_t features_ = 0;  // distinct n-grams over all kinds
};

// ── Session cache ───────────────────────────────────────────────────────────

class SessionCache {
 public:
  // Answers keyed by (requirement id, kind). put overwrites.
  void put_answer(const std::string& requirement_id, KeyKind k, const std::string& phrase);
  std::optional<std::string> get_answer(const std::string& requirement_id, KeyKind k) const;

  // Terms the user supplied this session; the tagger sees them as vocabulary.
  void put_term(const std::string& term, KeyKind k);
  std::optional<KeyKind> get_term(std::string_view term) const;
  // (display text, kind) in insertion order
  const std::vector<std::pair<std::string, KeyKind>>& terms() const { return terms_; }

  void close();
  bool closed() const { return closed_; }
  bool empty() const { return answers_.empty() && terms_.empty(); }

 private:
  void require_open() const;
  std::map<std::pair<std::string, KeyKind>, std::string> answers_;
  std::vector<std::pair<std::string, KeyKind>> terms_;
  std::unordered_map<std::string, std::size_t> term_index_;  // normalized -> position
  bool closed_ = false;
};

// ── Promotion ───────────────────────────────────────────────────────────────

struct PromoteResult {
  KnowledgeBase kb;
  ValidationVerdict verdict;
  bool added = false;
};

// Pure form: the KB is returned unchanged unless the verdict is accept.
PromoteResult promote(const KnowledgeBase& kb, const Validator& validator, std::string_view term, KeyKind kind,
                      double threshold);

// Appends one JSON line per verdict; thread-safe.
class AuditLog {
 public:
  explicit AuditLog(std::string path = {});
  void record(const ValidationVerdict& v);
  void flush();
  const std::string& path() const { return path_; }

 private:
  std::mutex mutex_;
  std::string path_;
  std::ofstream out_;
};

std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now());

// Service-level guard: owns the current validator snapshot, funnels accepted
// terms into the knowledge store and retrains after every `retrain_every`
// promotions (or on demand).
class Guard {
 public:
  Guard(KnowledgeStore& store, ValidatorConfig cfg, std::string audit_path = {}, std::size_t retrain_every = 25);

  std::shared_ptr<const Validator> validator() const;
  ValidationVerdict validate(std::string_view term, KeyKind claimed) const;
  ValidationVerdict promote(std::string_view term, KeyKind kind);
  void retrain();
  std::size_t pending_promotions() const;
  void flush();

 private:
  KnowledgeStore& store_;
  ValidatorConfig cfg_;
  AuditLog audit_;
  std::size_t retrain_every_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Validator> validator_;
  std::size_t pending_ = 0;
};

}  // namespace cityspec
