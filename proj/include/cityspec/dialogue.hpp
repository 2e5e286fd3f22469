// dialogue.hpp : clarification dialogue over the extraction pipeline
//
//   idle ──text──▶ analyze ──missing/ambiguous──▶ clarifying(kind[, phrase])
//                     │                               │ answer
//                     └──complete──▶ proposing ◀──────┘
//   proposing ──confirm──▶ done ──text──▶ (next requirement, same session)
//   proposing ──revise───▶ proposing | clarifying
//
// Questions go in the fixed kind order location, quantifier, condition,
// entity, time; within a kind a missing phrase is asked before ambiguous ones.
// Answers are remembered in the session cache twice: per (requirement, kind)
// so a re-entered requirement needs no second round, and as a session term the
// tagger treats as vocabulary so the same unknown term is not asked about
// again in a later requirement.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cityspec/extract.hpp"
#include "cityspec/guard.hpp"

namespace cityspec {

class SessionDone : public std::runtime_error {
 public:
  SessionDone() : std::runtime_error("session is closed") {}
};

class NotProposing : public std::runtime_error {
 public:
  NotProposing() : std::runtime_error("no proposal to confirm or revise") {}
};

struct DialogueContext {
  std::shared_ptr<const KnowledgeBase> kb;
  std::shared_ptr<const Tagger> tagger;
  ComparatorLexicon lexicon = ComparatorLexicon::defaults();
  VagueTerms vague = VagueTerms::defaults();
  CompletenessMode mode = CompletenessMode::Lenient;
  // Called with every clarification answer (promotion hook); may be empty.
  std::function<void(const std::string& term, KeyKind kind)> on_answer;

  static DialogueContext with_kb(std::shared_ptr<const KnowledgeBase> kb);
};

// ── Questions ───────────────────────────────────────────────────────────────

struct Question {
  KeyKind kind;
  std::optional<std::string> phrase;  // set for an ambiguous phrase
  std::string text;
};

inline constexpr std::array<KeyKind, 5> kQuestionOrder = {KeyKind::Location, KeyKind::Quantifier,
                                                          KeyKind::Condition, KeyKind::Entity, KeyKind::Time};

// "What is the location for this requirement?" /
// "What is the time range for 'after midnight'?"
std::string generate_query(KeyKind kind, const std::optional<std::string>& phrase = std::nullopt);

struct Analysis {
  SlotSet slots;  // refined
  std::vector<KeyKind> missing;
  std::vector<Ambiguity> ambiguities;  // refine issues and vague terms, deduped
  std::vector<Question> questions;     // in asking order
  bool complete() const { return questions.empty(); }
};

Analysis analyze(const SlotSet& slots, std::string_view text, const DialogueContext& ctx);

// ── Replies ─────────────────────────────────────────────────────────────────

struct ProposalBundle {
  std::string template_sentence;
  std::string formula_text;
  Json slot_table;
};

enum class ReplyKind { Question, Proposal, Ack, Error };
std::string_view reply_kind_name(ReplyKind k);

struct AssistantReply {
  ReplyKind kind = ReplyKind::Ack;
  std::string text;
  std::optional<ProposalBundle> proposal;
};

// The wire payload shared by the HTTP and terminal transports.
Json reply_to_json(const AssistantReply& r);

ProposalBundle make_proposal(const SlotSet& refined);

// ── Session ─────────────────────────────────────────────────────────────────

enum class DialogueState { Idle, Clarifying, Proposing, Done };
std::string_view state_name(DialogueState s);

struct TranscriptEntry {
  std::string speaker;  // "user" | "assistant"
  std::string text;
};

class Session {
 public:
  Session(std::string id, DialogueContext ctx);

  AssistantReply handle_message(std::string_view text);
  AssistantReply confirm();
  AssistantReply revise(KeyKind kind, std::string_view phrase);
  // Terminal-style input: ":confirm", ":revise <kind> <phrase>", else a message.
  AssistantReply dispatch(std::string_view line);
  void close();

  const std::string& id() const { return id_; }
  DialogueState state() const { return state_; }
  const std::optional<Question>& pending_question() const { return pending_; }
  const Requirement& current() const { return current_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  std::size_t clarification_count() const { return clarifications_; }
  const SessionCache& cache() const { return cache_; }
  const std::vector<Requirement>& confirmed() const { return confirmed_; }
  const DialogueContext& context() const { return ctx_; }

 private:
  AssistantReply start_requirement(std::string_view text);
  AssistantReply answer(std::string_view text);
  AssistantReply advance();
  AssistantReply say(AssistantReply r);
  void hear(std::string_view text);

  std::string id_;
  DialogueContext ctx_;
  DialogueState state_ = DialogueState::Idle;
  std::optional<Question> pending_;
  Requirement current_;
  SessionCache cache_;
  std::vector<TranscriptEntry> transcript_;
  std::vector<Requirement> confirmed_;
  std::size_t clarifications_ = 0;
  bool closed_ = false;
};

std::string new_session_id();
Json transcript_to_jsonl_entry(const TranscriptEntry& e);
// {source_text, slots, formula_text}
Json confirmed_to_json(const Requirement& r);

// ── Batch ───────────────────────────────────────────────────────────────────

struct BatchItem {
  std::size_t line = 0;
  std::string text;
  std::string id;
  bool confirmed = false;
  std::optional<ProposalBundle> proposal;
  std::vector<std::string> questions;  // outstanding, in asking order
  std::size_t rounds() const { return questions.size(); }
};

struct BatchReport {
  std::vector<BatchItem> items;
  std::vector<std::string> errors;  // "line N: ..."
  std::size_t confirmed() const;
  std::size_t pending() const;
  double mean_rounds() const;
  std::size_t max_rounds() const;
};

// One requirement per line, plain text or JSON ({"text": ...} or a
// requirement object with "source_text"). Blank lines are skipped; bad lines
// are reported and never abort the batch. Complete requirements are
// confirmed as proposed; the rest are queued with their questions. Rounds
// count the questions known up front (answers can raise further ones).
BatchReport process_batch(std::istream& in, const DialogueContext& ctx);
Json batch_report_to_json(const BatchReport& r);

}  // namespace cityspec
