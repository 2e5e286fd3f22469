// server.hpp : service core shared by the HTTP API and the terminal chat
//
// Endpoints (JSON bodies; errors are {"error": "..."}):
//
//   POST   /sessions                      -> 201 {"id"}
//   GET    /sessions/{id}                 -> {"id","state","clarification_count",...}
//   DELETE /sessions/{id}
//   POST   /sessions/{id}/messages {"text"}            -> reply
//   POST   /sessions/{id}/confirm                      -> reply   (409 if nothing proposed)
//   POST   /sessions/{id}/revise   {"kind","phrase"}   -> reply   (409 if nothing proposed)
//   GET    /sessions/{id}/transcript  -> JSONL {"speaker","text"}
//   POST   /requirements/batch        -> batch report (body: lines, JSONL or multipart file)
//   GET    /requirements/{id}         -> requirement
//   GET    /knowledge/stats           -> per-kind counts
//   POST   /knowledge/terms {"term","kind"} -> verdict (+ "added")
//   GET    /export/confirmed          -> JSONL {"id","source_text","slots","formula_text"}
//   GET    /health
//
// A reply is {"kind","text"[,"proposal":{"template_sentence","formula_text",
// "slot_table"}]}, produced by reply_to_json for both transports.

#pragma once

#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "cityspec/dialogue.hpp"
#include "cityspec/guard.hpp"

namespace cityspec {

struct ServiceConfig {
  std::string kb_path = "data/seed_kb.jsonl";
  std::string promoted_path = "cityspec_promoted.jsonl";  // accepted terms are appended here
  std::string comparator_lexicon_path = "data/comparators.json";
  std::string vague_terms_path = "data/vague_terms.txt";
  ValidatorConfig validator;
  std::size_t retrain_every = 25;
  std::size_t synth_lambda = 5;
  std::uint64_t synth_seed = 42;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::chrono::seconds session_ttl{3600};
  std::string audit_path = "cityspec_audit.jsonl";
  std::string confirmed_path = "cityspec_confirmed.jsonl";
  std::string static_dir;  // served under / when set

  // CITYSPEC_KB, CITYSPEC_PROMOTED, CITYSPEC_COMPARATORS, CITYSPEC_VAGUE_TERMS,
  // CITYSPEC_VALIDATOR_PASSES, CITYSPEC_VALIDATOR_DROPOUT,
  // CITYSPEC_VALIDATOR_THRESHOLD, CITYSPEC_VALIDATOR_MERGE,
  // CITYSPEC_RETRAIN_EVERY, CITYSPEC_SYNTH_LAMBDA, CITYSPEC_SYNTH_SEED,
  // CITYSPEC_HOST, CITYSPEC_PORT, CITYSPEC_SESSION_TTL, CITYSPEC_AUDIT_LOG,
  // CITYSPEC_CONFIRMED_STORE, CITYSPEC_STATIC_DIR
  void apply_env();
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

class UnknownSession : public std::runtime_error {
 public:
  explicit UnknownSession(const std::string& id) : std::runtime_error("unknown session " + id) {}
};

class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();

  std::string create_session();
  AssistantReply message(const std::string& id, std::string_view text);
  AssistantReply confirm(const std::string& id);
  AssistantReply revise(const std::string& id, KeyKind kind, std::string_view phrase);
  AssistantReply dispatch(const std::string& id, std::string_view line);  // ":confirm" etc.
  Json session_info(const std::string& id);
  std::vector<TranscriptEntry> transcript(const std::string& id);
  void close_session(const std::string& id);

  BatchReport batch(std::istream& in);
  std::optional<Json> requirement(const std::string& id) const;
  Json knowledge_stats() const;
  Json promote_term(std::string_view term, KeyKind kind);
  std::vector<Json> confirmed() const;

  void evict_expired();
  std::size_t session_count() const;
  void shutdown();  // flushes the audit log

  const ServiceConfig& config() const { return cfg_; }
  KnowledgeStore& store() { return *store_; }
  Guard& guard() { return *guard_; }
  DialogueContext new_context() const;

 private:
  struct Entry {
    std::mutex mutex;
    std::unique_ptr<Session> session;
    std::chrono::steady_clock::time_point last_used;
  };
  std::shared_ptr<Entry> find(const std::string& id);
  template <class F>
  AssistantReply with_session(const std::string& id, F&& f);
  void record(const Session& s);
  void store_confirmed(const Json& j);

  ServiceConfig cfg_;
  ComparatorLexicon lexicon_;
  VagueTerms vague_;
  std::shared_ptr<const Tagger> tagger_;
  std::unique_ptr<KnowledgeStore> store_;
  std::unique_ptr<Guard> guard_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;

  mutable std::mutex records_mutex_;
  std::map<std::string, Json> requirements_;
  std::vector<Json> confirmed_;
  std::ofstream confirmed_out_;
};

// HTTP binding. listen() blocks until stop().
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; then call listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cityspec
