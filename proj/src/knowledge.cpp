#include "cityspec/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace cityspec {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Seed: return "seed";
    case Provenance::Promoted: return "promoted";
    case Provenance::Synthetic: return "synthetic";
  }
  return "?";
}

std::optional<Provenance> provenance_from_name(std::string_view s) {
  for (Provenance p : {Provenance::Seed, Provenance::Promoted, Provenance::Synthetic})
    if (provenance_name(p) == s) return p;
  return std::nullopt;
}

// ── Patterns ────────────────────────────────────────────────────────────────

namespace {

struct Placeholder {
  KeyKind kind;
  std::size_t begin;
  std::size_t end;
};

std::vector<Placeholder> scan_placeholders(std::string_view pattern) {
  std::vector<Placeholder> out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '#') continue;
    std::size_t j = i + 1;
    while (j < pattern.size() && std::islower(static_cast<unsigned char>(pattern[j]))) ++j;
    if (j == i + 1) continue;  // '#' not followed by a word is literal text
    std::string_view word = pattern.substr(i + 1, j - i - 1);
    auto kind = kind_from_name(word);
    if (!kind) throw PatternError("unknown placeholder '#" + std::string(word) + "'");
    out.push_back({*kind, i, j});
    i = j - 1;
  }
  if (out.empty()) throw PatternError("pattern has no placeholder: " + std::string(pattern));
  return out;
}

}  // namespace

std::vector<KeyKind> pattern_placeholders(std::string_view pattern) {
  std::vector<KeyKind> out;
  for (const auto& p : scan_placeholders(pattern)) out.push_back(p.kind);
  return out;
}

bool is_valid_pattern(std::string_view pattern) {
  try {
    scan_placeholders(pattern);
    return true;
  } catch (const PatternError&) {
    return false;
  }
}

FilledPattern fill_pattern(std::string_view pattern, const std::vector<std::string>& phrases) {
  auto holes = scan_placeholders(pattern);
  if (holes.size() != phrases.size())
    throw PatternError("pattern expects " + std::to_string(holes.size()) + " phrases, got " +
                       std::to_string(phrases.size()));
  FilledPattern out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < holes.size(); ++i) {
    out.text.append(pattern.substr(cursor, holes[i].begin - cursor));
    std::size_t b = out.text.size();
    out.text += phrases[i];
    out.slots.push_back({holes[i].kind, b, out.text.size()});
    cursor = holes[i].end;
  }
  out.text.append(pattern.substr(cursor));
  return out;
}

std::string extract_pattern(const Requirement& req) {
  struct Piece {
    KeyKind kind;
    std::size_t begin, end;  // bytes
    Span span;
  };
  std::vector<Piece> pieces;
  for (KeyKind k : kAllKinds) {
    for (const auto& p : req.slots.get(k)) {
      if (!p.span) continue;
      if (p.span->begin >= p.span->end || p.span->end > req.tokens.size())
        throw SlotError("span of '" + p.text + "' outside the token range");
      pieces.push_back({k, req.tokens[p.span->begin].begin, req.tokens[p.span->end - 1].end, *p.span});
    }
  }
  if (pieces.empty()) throw PatternError("requirement has no annotated phrase");
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < pieces.size(); ++i)
    if (pieces[i - 1].span.overlaps(pieces[i].span))
      throw OverlapError("overlapping annotations in requirement " + req.id);

  std::string out;
  std::size_t cursor = 0;
  for (const auto& p : pieces) {
    out.append(req.source_text, cursor, p.begin - cursor);
    out += '#';
    out += kind_name(p.kind);
    cursor = p.end;
  }
  out.append(req.source_text, cursor, std::string::npos);
  return out;
}

// ── KnowledgeBase ───────────────────────────────────────────────────────────

bool KnowledgeBase::add_term(KeyKind k, std::string_view text, Provenance source) {
  std::string display = trim(text);
  if (display.empty()) return false;
  std::string key = normalize_phrase(display);
  if (!index_[kind_index(k)].insert(key).second) return false;
  vocab_[kind_index(k)].push_back({std::move(display), source});
  return true;
}

bool KnowledgeBase::add_pattern(std::string_view text, Provenance source) {
  std::string t = trim(text);
  scan_placeholders(t);
  if (!pattern_index_.insert(t).second) return false;
  patterns_.push_back({std::move(t), source});
  return true;
}

bool KnowledgeBase::contains_term(KeyKind k, std::string_view text) const {
  return index_[kind_index(k)].count(normalize_phrase(text)) > 0;
}

bool KnowledgeBase::contains_pattern(std::string_view text) const { return pattern_index_.count(trim(text)) > 0; }

std::size_t KbStats::total_phrases() const {
  std::size_t n = 0;
  for (auto c : per_kind) n += c;
  return n;
}

KbStats kb_stats(const KnowledgeBase& kb) {
  KbStats s;
  for (KeyKind k : kAllKinds) s.per_kind[kind_index(k)] = kb.vocab(k).size();
  s.patterns = kb.patterns().size();
  return s;
}

Json kb_stats_to_json(const KbStats& s) {
  Json j;
  for (KeyKind k : kAllKinds) j[std::string(kind_name(k))] = s.per_kind[kind_index(k)];
  j["patterns"] = s.patterns;
  j["phrases"] = s.total_phrases();
  return j;
}

IngestReport ingest_annotations(KnowledgeBase& kb, const std::vector<Requirement>& reqs, Provenance source) {
  IngestReport report;
  for (const auto& r : reqs) {
    ++report.requirements;
    std::string pattern;
    try {
      validate_spans(r.slots, r.source_text, r.tokens);
      pattern = extract_pattern(r);
      pattern_placeholders(pattern);
    } catch (const std::exception& e) {
      report.skipped.push_back(r.id + ": " + e.what());
      continue;
    }
    for (KeyKind k : kAllKinds)
      for (const auto& p : r.slots.get(k))
        if (p.span && kb.add_term(k, p.text, source)) ++report.terms_added;
    if (kb.add_pattern(pattern, source)) ++report.patterns_added;
  }
  return report;
}

// ── Persistence ─────────────────────────────────────────────────────────────

std::string term_record(KeyKind k, std::string_view text, Provenance source) {
  Json j;
  j["type"] = "term";
  j["kind"] = std::string(kind_name(k));
  j["text"] = std::string(text);
  j["source"] = std::string(provenance_name(source));
  return dump_line(j);
}

std::string pattern_record(std::string_view text, Provenance source) {
  Json j;
  j["type"] = "pattern";
  j["text"] = std::string(text);
  j["source"] = std::string(provenance_name(source));
  return dump_line(j);
}

void write_kb(const KnowledgeBase& kb, std::ostream& out) {
  for (KeyKind k : kAllKinds)
    for (const auto& e : kb.vocab(k)) out << term_record(k, e.text, e.source) << '\n';
  for (const auto& p : kb.patterns()) out << pattern_record(p.text, p.source) << '\n';
}

KnowledgeBase read_kb(std::istream& in) {
  KnowledgeBase kb;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!j.is_object() || !j.contains("type") || !j.contains("text") || !j["type"].is_string() ||
        !j["text"].is_string())
      throw SchemaError("record needs string fields 'type' and 'text'", lineno);
    Provenance source = Provenance::Seed;
    if (j.contains("source")) {
      auto p = j["source"].is_string() ? provenance_from_name(j["source"].get<std::string>()) : std::nullopt;
      if (!p) throw SchemaError("unknown source", lineno);
      source = *p;
    }
    std::string type = j["type"].get<std::string>();
    if (type == "term") {
      if (!j.contains("kind") || !j["kind"].is_string()) throw SchemaError("term record needs 'kind'", lineno);
      auto k = kind_from_name(j["kind"].get<std::string>());
      if (!k) throw SchemaError("unknown key kind '" + j["kind"].get<std::string>() + "'", lineno);
      kb.add_term(*k, j["text"].get<std::string>(), source);
    } else if (type == "pattern") {
      try {
        kb.add_pattern(j["text"].get<std::string>(), source);
      } catch (const PatternError& e) {
        throw SchemaError(e.what(), lineno);
      }
    } else {
      throw SchemaError("unknown record type '" + type + "'", lineno);
    }
  }
  return kb;
}

void save_kb(const KnowledgeBase& kb, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write knowledge base: " + path);
  write_kb(kb, out);
  if (!out) throw IoError("write failed: " + path);
}

KnowledgeBase load_kb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read knowledge base: " + path);
  return read_kb(in);
}

Requirement parse_markup(std::string_view markup, std::string id) {
  struct Mark {
    KeyKind kind;
    std::size_t begin, end;  // bytes in the plain text
  };
  std::string plain;
  std::vector<Mark> marks;
  for (std::size_t i = 0; i < markup.size();) {
    if (markup[i] != '[') {
      plain += markup[i++];
      continue;
    }
    std::size_t close = markup.find("]{", i);
    std::size_t brace = close == std::string_view::npos ? close : markup.find('}', close);
    if (brace == std::string_view::npos) throw SchemaError("unterminated annotation in: " + std::string(markup));
    std::string_view phrase = markup.substr(i + 1, close - i - 1);
    std::string_view name = markup.substr(close + 2, brace - close - 2);
    auto kind = kind_from_name(name);
    if (!kind) throw SchemaError("unknown key kind '" + std::string(name) + "'");
    marks.push_back({*kind, plain.size(), plain.size() + phrase.size()});
    plain += phrase;
    i = brace + 1;
  }
  Requirement r = Requirement::from_text(std::move(id), plain);
  for (const auto& m : marks) {
    std::optional<std::size_t> b, e;
    for (std::size_t t = 0; t < r.tokens.size(); ++t) {
      if (r.tokens[t].begin == m.begin) b = t;
      if (r.tokens[t].end == m.end) e = t + 1;
    }
    if (!b || !e || *b >= *e)
      throw SchemaError("annotation '" + plain.substr(m.begin, m.end - m.begin) + "' does not fall on token boundaries");
    KeyedPhrase p;
    p.kind = m.kind;
    p.span = Span{*b, *e};
    p.text = plain.substr(m.begin, m.end - m.begin);
    try {
      r.slots.add(std::move(p));
    } catch (const SlotError& err) {
      throw SchemaError(err.what());
    }
  }
  return r;
}

std::vector<Requirement> read_markup(std::istream& in) {
  std::vector<Requirement> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      out.push_back(parse_markup(t));
    } catch (const SchemaError& e) {
      throw SchemaError(e.what(), lineno);
    }
  }
  return out;
}

Corpus read_corpus(std::istream& in) {
  Corpus c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      c.requirements.push_back(requirement_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      c.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read corpus: " + path);
  return read_corpus(in);
}

// ── KnowledgeStore ──────────────────────────────────────────────────────────

KnowledgeStore::KnowledgeStore(KnowledgeBase kb, std::string backing_file)
    : current_(std::make_shared<const KnowledgeBase>(std::move(kb))), backing_file_(std::move(backing_file)) {}

std::shared_ptr<const KnowledgeBase> KnowledgeStore::snapshot() const {
  std::lock_guard lock(read_mutex_);
  return current_;
}

bool KnowledgeStore::update(const std::function<bool(KnowledgeBase&)>& edit) {
  std::lock_guard writer(write_mutex_);
  auto next = std::make_shared<KnowledgeBase>(*snapshot());
  bool changed = edit(*next);
  if (changed) {
    std::lock_guard lock(read_mutex_);
    current_ = std::move(next);
  }
  return changed;
}

bool KnowledgeStore::add_term(KeyKind k, const std::string& text, Provenance source) {
  std::lock_guard writer(write_mutex_);
  auto base = snapshot();
  if (base->contains_term(k, text)) return false;
  auto next = std::make_shared<KnowledgeBase>(*base);
  next->add_term(k, text, source);
  if (!backing_file_.empty()) {
    std::ofstream out(backing_file_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to knowledge base: " + backing_file_);
    out << term_record(k, trim(text), source) << '\n';
  }
  std::lock_guard lock(read_mutex_);
  current_ = std::move(next);
  return true;
}

}  // namespace cityspec
