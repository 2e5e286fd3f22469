// knowledge.hpp : city knowledge base (per-key vocabularies and a pattern set)
//
// File format, one JSON object per line, fields in this order:
//
//   {"type":"term","kind":"location","text":"Golf Cart Path","source":"seed"}
//   {"type":"pattern","text":"In #location, the average #entity ...","source":"seed"}
//
// source is one of seed | promoted | synthetic. Terms are written grouped by
// kind (entity, quantifier, location, time, condition) in insertion order,
// then patterns. Appending term lines to an existing file is valid.

#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cityspec/json_io.hpp"
#include "cityspec/reqmodel.hpp"

namespace cityspec {

enum class Provenance { Seed, Promoted, Synthetic };
std::string_view provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(std::string_view s);

struct VocabEntry {
  std::string text;
  Provenance source = Provenance::Seed;
  friend bool operator==(const VocabEntry&, const VocabEntry&) = default;
};

struct PatternEntry {
  std::string text;
  Provenance source = Provenance::Seed;
  friend bool operator==(const PatternEntry&, const PatternEntry&) = default;
};

class PatternError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverlapError : public SlotError {
 public:
  using SlotError::SlotError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Placeholders of a pattern in order of appearance. Throws PatternError on a
// '#word' that is not one of the five kinds, or when there are none.
std::vector<KeyKind> pattern_placeholders(std::string_view pattern);
bool is_valid_pattern(std::string_view pattern);

struct FilledPattern {
  struct Slot {
    KeyKind kind;
    std::size_t begin;  // byte range of the substituted phrase in `text`
    std::size_t end;
  };
  std::string text;
  std::vector<Slot> slots;
};

// Substitutes phrases for placeholders in order. `phrases.size()` must equal
// the placeholder count.
FilledPattern fill_pattern(std::string_view pattern, const std::vector<std::string>& phrases);

// Source text with every annotated span replaced by "#kind". Phrases without
// a span are ignored. Throws OverlapError on overlapping spans and
// PatternError when nothing is annotated.
std::string extract_pattern(const Requirement& req);

class KnowledgeBase {
 public:
  // Case-insensitive dedupe; the first spelling is kept for display.
  bool add_term(KeyKind k, std::string_view text, Provenance source = Provenance::Seed);
  bool add_pattern(std::string_view text, Provenance source = Provenance::Seed);

  bool contains_term(KeyKind k, std::string_view text) const;
  bool contains_pattern(std::string_view text) const;

  const std::vector<VocabEntry>& vocab(KeyKind k) const { return vocab_[kind_index(k)]; }
  const std::vector<PatternEntry>& patterns() const { return patterns_; }

  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
    return a.vocab_ == b.vocab_ && a.patterns_ == b.patterns_;
  }

 private:
  std::array<std::vector<VocabEntry>, 5> vocab_;
  std::array<std::unordered_set<std::string>, 5> index_;
  std::vector<PatternEntry> patterns_;
  std::unordered_set<std::string> pattern_index_;
};

struct KbStats {
  std::array<std::size_t, 5> per_kind{};
  std::size_t patterns = 0;
  std::size_t total_phrases() const;
  friend bool operator==(const KbStats&, const KbStats&) = default;
};

KbStats kb_stats(const KnowledgeBase& kb);
Json kb_stats_to_json(const KbStats& s);

struct IngestReport {
  std::size_t requirements = 0;
  std::size_t terms_added = 0;
  std::size_t patterns_added = 0;
  std::vector<std::string> skipped;  // one message per malformed entry
};

// Adds every annotated phrase to its kind's vocabulary and every extracted
// pattern to the pattern set. Idempotent.
IngestReport ingest_annotations(KnowledgeBase& kb, const std::vector<Requirement>& reqs,
                                Provenance source = Provenance::Seed);

std::string term_record(KeyKind k, std::string_view text, Provenance source);
std::string pattern_record(std::string_view text, Provenance source);

void write_kb(const KnowledgeBase& kb, std::ostream& out);
KnowledgeBase read_kb(std::istream& in);
void save_kb(const KnowledgeBase& kb, const std::string& path);
KnowledgeBase load_kb(const std::string& path);

// Inline annotation markup: "In [all buildings]{location}, the average
// [concentration]{entity} of ...". Phrase boundaries must fall on token
// boundaries. Throws SchemaError.
Requirement parse_markup(std::string_view markup, std::string id = {});
// One requirement per line; blank lines and lines starting with '#' skipped.
std::vector<Requirement> read_markup(std::istream& in);

// Annotated requirement corpus, one requirement JSON per line. Malformed lines
// are reported in `errors` ("line N: ...") and skipped.
struct Corpus {
  std::vector<Requirement> requirements;
  std::vector<std::string> errors;
};
Corpus read_corpus(std::istream& in);
Corpus load_corpus(const std::string& path);

// Holds the current knowledge base as an immutable snapshot. Readers take a
// shared_ptr and keep a consistent view; writers are serialized and swap in a
// modified copy. When a backing file is set, new terms are appended to it.
class KnowledgeStore {
 public:
  explicit KnowledgeStore(KnowledgeBase kb = {}, std::string backing_file = {});

  std::shared_ptr<const KnowledgeBase> snapshot() const;

  // Applies `edit` to a copy and publishes it. Returns whatever `edit` returns.
  bool update(const std::function<bool(KnowledgeBase&)>& edit);
  // Adds one term; appends it to the backing file when it was new.
  bool add_term(KeyKind k, const std::string& text, Provenance source);

 private:
  mutable std::mutex read_mutex_;
  std::mutex write_mutex_;
  std::shared_ptr<const KnowledgeBase> current_;
  std::string backing_file_;
};

}  // namespace cityspec
