// dialogue.cpp : clarification state machine and batch processing

#include "cityspec/dialogue.hpp"

#include <algorithm>
#include <istream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

namespace cityspec {

DialogueContext DialogueContext::with_kb(std::shared_ptr<const KnowledgeBase> kb) {
  DialogueContext ctx;
  ctx.kb = std::move(kb);
  ctx.tagger = std::make_shared<LexiconTagger>();
  return ctx;
}

// ── Questions ───────────────────────────────────────────────────────────────

std::string generate_query(KeyKind kind, const std::optional<std::string>& phrase) {
  if (!phrase) {
    switch (kind) {
      case KeyKind::Location: return "What is the location for this requirement?";
      case KeyKind::Quantifier: return "What is the quantifier for this requirement?";
      case KeyKind::Condition: return "What is the numeric limit for this requirement?";
      case KeyKind::Entity: return "What is the entity for this requirement?";
      case KeyKind::Time: return "What is the time range for this requirement?";
    }
  }
  std::string quoted = "'" + phrase.value_or("") + "'";
  switch (kind) {
    case KeyKind::Time: return "What is the time range for " + quoted + "?";
    case KeyKind::Location: return "What is the exact location for " + quoted + "?";
    case KeyKind::Condition: return "What is the numeric limit for " + quoted + "?";
    default: return "What exactly is meant by " + quoted + "?";
  }
}

Analysis analyze(const SlotSet& slots, std::string_view text, const DialogueContext& ctx) {
  Analysis a;
  RefineResult r = refine(slots, text, ctx.lexicon);
  a.slots = std::move(r.slots);
  a.missing = completeness_check(a.slots, ctx.mode);

  std::set<std::pair<KeyKind, std::string>> seen;
  auto take = [&](const Ambiguity& amb) {
    if (seen.insert({amb.kind, normalize_phrase(amb.phrase)}).second) a.ambiguities.push_back(amb);
  };
  for (const auto& amb : r.issues) take(amb);
  for (const auto& amb : ambiguity_check(a.slots, ctx.vague)) take(amb);

  for (KeyKind k : kQuestionOrder) {
    if (std::find(a.missing.begin(), a.missing.end(), k) != a.missing.end())
      a.questions.push_back({k, std::nullopt, generate_query(k)});
    for (const auto& amb : a.ambiguities)
      if (amb.kind == k) a.questions.push_back({k, amb.phrase, generate_query(k, amb.phrase)});
  }
  return a;
}

// ── Replies ─────────────────────────────────────────────────────────────────

std::string_view reply_kind_name(ReplyKind k) {
  switch (k) {
    case ReplyKind::Question: return "question";
    case ReplyKind::Proposal: return "proposal";
    case ReplyKind::Ack: return "ack";
    case ReplyKind::Error: return "error";
  }
  return "?";
}

Json reply_to_json(const AssistantReply& r) {
  Json j;
  j["kind"] = std::string(reply_kind_name(r.kind));
  j["text"] = r.text;
  if (r.proposal) {
    j["proposal"] = {{"template_sentence", r.proposal->template_sentence},
                     {"formula_text", r.proposal->formula_text},
                     {"slot_table", r.proposal->slot_table}};
  }
  return j;
}

ProposalBundle make_proposal(const SlotSet& refined) {
  return {render_template(refined), sastl::print_formula(assemble_specification(refined)),
          slots_to_json(refined)};
}

std::string_view state_name(DialogueState s) {
  switch (s) {
    case DialogueState::Idle: return "idle";
    case DialogueState::Clarifying: return "clarifying";
    case DialogueState::Proposing: return "proposing";
    case DialogueState::Done: return "done";
  }
  return "?";
}

// ── Session ─────────────────────────────────────────────────────────────────

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  std::ostringstream os;
  os << std::hex << rng();
  return os.str();
}

Session::Session(std::string id, DialogueContext ctx) : id_(std::move(id)), ctx_(std::move(ctx)) {
  if (!ctx_.kb) throw std::invalid_argument("dialogue needs a knowledge base");
  if (!ctx_.tagger) ctx_.tagger = std::make_shared<LexiconTagger>();
}

void Session::hear(std::string_view text) { transcript_.push_back({"user", std::string(text)}); }

AssistantReply Session::say(AssistantReply r) {
  if (r.kind == ReplyKind::Question) ++clarifications_;
  transcript_.push_back({"assistant", r.text});
  return r;
}

AssistantReply Session::handle_message(std::string_view text) {
  if (closed_) throw SessionDone();
  hear(text);
  switch (state_) {
    case DialogueState::Clarifying: return answer(text);
    case DialogueState::Proposing:
      return say({ReplyKind::Error, "Please confirm or revise the proposed requirement first.", std::nullopt});
    case DialogueState::Idle:
    case DialogueState::Done: return start_requirement(text);
  }
  return say({ReplyKind::Error, "unreachable", std::nullopt});
}

AssistantReply Session::start_requirement(std::string_view text) {
  if (trim(text).empty()) return say({ReplyKind::Error, "Please enter a requirement.", std::nullopt});
  current_ = Requirement::from_text(requirement_id_for(text), std::string(text));
  pending_.reset();

  // session-supplied terms act as extra vocabulary
  std::shared_ptr<const KnowledgeBase> kb = ctx_.kb;
  if (!cache_.terms().empty()) {
    auto merged = std::make_shared<KnowledgeBase>(*ctx_.kb);
    for (const auto& [term, kind] : cache_.terms()) merged->add_term(kind, term, Provenance::Promoted);
    kb = merged;
  }
  current_.slots = checked_tag(*ctx_.tagger, current_.source_text, *kb);

  for (KeyKind k : kAllKinds) {
    if (current_.slots.has(k)) continue;
    if (auto ans = cache_.get_answer(current_.id, k)) current_.slots.add({k, *ans, std::nullopt, 1.0, {}});
  }
  return advance();
}

AssistantReply Session::answer(std::string_view text) {
  std::string ans = trim(text);
  if (ans.empty()) return say({ReplyKind::Error, "An answer is needed: " + pending_->text, std::nullopt});
  const Question q = *pending_;
  KeyedPhrase kp{q.kind, ans, std::nullopt, 1.0, {}};
  if (q.phrase) {
    std::vector<KeyedPhrase> kept;
    for (const auto& p : current_.slots.get(q.kind))
      if (normalize_phrase(p.text) != normalize_phrase(*q.phrase)) kept.push_back(p);
    kept.push_back(kp);
    current_.slots.replace(q.kind, std::move(kept));
  } else {
    current_.slots.add(kp);
  }
  cache_.put_answer(current_.id, q.kind, ans);
  cache_.put_term(ans, q.kind);
  if (ctx_.on_answer) ctx_.on_answer(ans, q.kind);
  return advance();
}

AssistantReply Session::advance() {
  Analysis a = analyze(current_.slots, current_.source_text, ctx_);
  current_.slots = a.slots;
  if (!a.complete()) {
    pending_ = a.questions.front();
    state_ = DialogueState::Clarifying;
    current_.status = Status::AwaitingClarification;
    return say({ReplyKind::Question, pending_->text, std::nullopt});
  }
  pending_.reset();
  try {
    ProposalBundle b = make_proposal(a.slots);
    current_.formula = assemble_specification(a.slots);
    current_.status = Status::Proposed;
    state_ = DialogueState::Proposing;
    std::string text = b.template_sentence;
    return say({ReplyKind::Proposal, text, std::move(b)});
  } catch (const IncompleteSlots& e) {
    // completeness said yes but assembly disagrees: ask for the first gap
    KeyKind k = e.missing().front();
    pending_ = Question{k, std::nullopt, generate_query(k)};
    state_ = DialogueState::Clarifying;
    current_.status = Status::AwaitingClarification;
    return say({ReplyKind::Question, pending_->text, std::nullopt});
  }
}

AssistantReply Session::confirm() {
  if (closed_) throw SessionDone();
  if (state_ != DialogueState::Proposing) throw NotProposing();
  hear(":confirm");
  current_.status = Status::Confirmed;
  confirmed_.push_back(current_);
  state_ = DialogueState::Done;
  return say({ReplyKind::Ack, "Confirmed: " + sastl::print_formula(*current_.formula), std::nullopt});
}

AssistantReply Session::revise(KeyKind kind, std::string_view phrase) {
  if (closed_) throw SessionDone();
  if (state_ != DialogueState::Proposing) throw NotProposing();
  hear(":revise " + std::string(kind_name(kind)) + " " + std::string(phrase));
  std::string p = trim(phrase);
  if (p.empty()) {
    current_.slots.clear(kind);
  } else {
    current_.slots.replace(kind, {KeyedPhrase{kind, p, std::nullopt, 1.0, {}}});
    cache_.put_answer(current_.id, kind, p);
  }
  current_.formula.reset();
  return advance();
}

AssistantReply Session::dispatch(std::string_view line) {
  std::string t = trim(line);
  if (t == ":confirm") return confirm();
  if (t.rfind(":revise", 0) == 0) {
    std::istringstream is(t.substr(7));
    std::string kind_word;
    is >> kind_word;
    auto kind = kind_from_name(to_lower(kind_word));
    if (!kind) throw std::invalid_argument("usage: :revise <entity|quantifier|location|time|condition> <phrase>");
    std::string rest;
    std::getline(is, rest);
    return revise(*kind, rest);
  }
  return handle_message(line);
}

void Session::close() {
  closed_ = true;
  cache_.close();
}

Json transcript_to_jsonl_entry(const TranscriptEntry& e) {
  Json j;
  j["speaker"] = e.speaker;
  j["text"] = e.text;
  return j;
}

Json confirmed_to_json(const Requirement& r) {
  Json j;
  j["id"] = r.id;
  j["source_text"] = r.source_text;
  j["slots"] = slots_to_json(r.slots);
  j["formula_text"] = r.formula ? sastl::print_formula(*r.formula) : std::string();
  return j;
}

// ── Batch ───────────────────────────────────────────────────────────────────

std::size_t BatchReport::confirmed() const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](auto& i) { return i.confirmed; }));
}

std::size_t BatchReport::pending() const { return items.size() - confirmed(); }

double BatchReport::mean_rounds() const {
  if (items.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& i : items) total += i.rounds();
  return static_cast<double>(total) / static_cast<double>(items.size());
}

std::size_t BatchReport::max_rounds() const {
  std::size_t m = 0;
  for (const auto& i : items) m = std::max(m, i.rounds());
  return m;
}

BatchReport process_batch(std::istream& in, const DialogueContext& ctx) {
  BatchReport report;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    try {
      std::string text = t;
      if (t.front() == '{') {
        Json j = Json::parse(t);
        if (j.contains("text") && j["text"].is_string())
          text = j["text"].get<std::string>();
        else if (j.contains("source_text") && j["source_text"].is_string())
          text = j["source_text"].get<std::string>();
        else
          throw SchemaError("expected \"text\" or \"source_text\"");
      }
      BatchItem item;
      item.line = lineno;
      item.text = text;
      item.id = requirement_id_for(text);
      SlotSet raw = checked_tag(*ctx.tagger, text, *ctx.kb);
      Analysis a = analyze(raw, text, ctx);
      if (a.complete()) {
        item.proposal = make_proposal(a.slots);
        item.confirmed = true;
      } else {
        for (const auto& q : a.questions) item.questions.push_back(q.text);
      }
      report.items.push_back(std::move(item));
    } catch (const std::exception& e) {
      report.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return report;
}

Json batch_report_to_json(const BatchReport& r) {
  Json j;
  j["confirmed"] = r.confirmed();
  j["pending"] = r.pending();
  j["mean_rounds"] = r.mean_rounds();
  j["max_rounds"] = r.max_rounds();
  Json items = Json::array();
  for (const auto& i : r.items) {
    Json it;
    it["line"] = i.line;
    it["id"] = i.id;
    it["text"] = i.text;
    it["status"] = i.confirmed ? "confirmed" : "pending";
    it["rounds"] = i.rounds();
    it["questions"] = i.questions;
    if (i.proposal) {
      it["template_sentence"] = i.proposal->template_sentence;
      it["formula_text"] = i.proposal->formula_text;
    }
    items.push_back(it);
  }
  j["items"] = items;
  j["errors"] = r.errors;
  return j;
}

}  // namespace cityspec
