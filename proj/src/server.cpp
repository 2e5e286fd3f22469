// server.cpp : service core and HTTP routes

#include "cityspec/server.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "httplib.h"

namespace cityspec {

namespace fs = std::filesystem;

// ── Config ──────────────────────────────────────────────────────────────────

namespace {

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

template <class T>
T env_number(const char* name, const char* v) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_floating_point_v<T>)
      out = static_cast<T>(std::stod(v, &used));
    else
      out = static_cast<T>(std::stoll(v, &used));
    if (used != std::string_view(v).size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(name) + ": not a number: " + v);
  }
}

bool env_flag(const char* name, const char* v) {
  std::string s = to_lower(v);
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  throw std::invalid_argument(std::string(name) + ": expected a boolean, got " + v);
}

void require_readable(const std::string& field, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(field + ": cannot read " + path);
}

}  // namespace

void ServiceConfig::apply_env() {
  if (auto v = env("CITYSPEC_KB")) kb_path = v;
  if (auto v = env("CITYSPEC_PROMOTED")) promoted_path = v;
  if (auto v = env("CITYSPEC_COMPARATORS")) comparator_lexicon_path = v;
  if (auto v = env("CITYSPEC_VAGUE_TERMS")) vague_terms_path = v;
  if (auto v = env("CITYSPEC_VALIDATOR_PASSES")) validator.passes = env_number<std::size_t>("CITYSPEC_VALIDATOR_PASSES", v);
  if (auto v = env("CITYSPEC_VALIDATOR_DROPOUT")) validator.dropout = env_number<double>("CITYSPEC_VALIDATOR_DROPOUT", v);
  if (auto v = env("CITYSPEC_VALIDATOR_THRESHOLD"))
    validator.threshold = env_number<double>("CITYSPEC_VALIDATOR_THRESHOLD", v);
  if (auto v = env("CITYSPEC_VALIDATOR_MERGE")) validator.merge_entity_quantifier = env_flag("CITYSPEC_VALIDATOR_MERGE", v);
  if (auto v = env("CITYSPEC_RETRAIN_EVERY")) retrain_every = env_number<std::size_t>("CITYSPEC_RETRAIN_EVERY", v);
  if (auto v = env("CITYSPEC_SYNTH_LAMBDA")) synth_lambda = env_number<std::size_t>("CITYSPEC_SYNTH_LAMBDA", v);
  if (auto v = env("CITYSPEC_SYNTH_SEED")) synth_seed = env_number<std::uint64_t>("CITYSPEC_SYNTH_SEED", v);
  if (auto v = env("CITYSPEC_HOST")) host = v;
  if (auto v = env("CITYSPEC_PORT")) port = env_number<int>("CITYSPEC_PORT", v);
  if (auto v = env("CITYSPEC_SESSION_TTL")) session_ttl = std::chrono::seconds(env_number<long long>("CITYSPEC_SESSION_TTL", v));
  if (auto v = env("CITYSPEC_AUDIT_LOG")) audit_path = v;
  if (auto v = env("CITYSPEC_CONFIRMED_STORE")) confirmed_path = v;
  if (auto v = env("CITYSPEC_STATIC_DIR")) static_dir = v;
}

void ServiceConfig::validate() const {
  require_readable("kb_path", kb_path);
  if (!comparator_lexicon_path.empty()) require_readable("comparator_lexicon_path", comparator_lexicon_path);
  if (!vague_terms_path.empty()) require_readable("vague_terms_path", vague_terms_path);
  if (!(validator.threshold > 0.0 && validator.threshold <= 1.0))
    throw std::invalid_argument("validator.threshold must be in (0,1]");
  if (validator.passes < 1) throw std::invalid_argument("validator.passes must be >= 1");
  if (!(validator.dropout >= 0.0 && validator.dropout < 1.0))
    throw std::invalid_argument("validator.dropout must be in [0,1)");
  if (synth_lambda < 1) throw std::invalid_argument("synth_lambda must be >= 1");
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range");
  if (session_ttl.count() <= 0) throw std::invalid_argument("session_ttl must be positive");
  if (!static_dir.empty() && !fs::is_directory(static_dir))
    throw std::invalid_argument("static_dir: not a directory: " + static_dir);
}

// ── Service ─────────────────────────────────────────────────────────────────

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  lexicon_ = cfg_.comparator_lexicon_path.empty() ? ComparatorLexicon::defaults()
                                                  : ComparatorLexicon::load(cfg_.comparator_lexicon_path);
  vague_ = cfg_.vague_terms_path.empty() ? VagueTerms::defaults() : VagueTerms::load(cfg_.vague_terms_path);
  tagger_ = std::make_shared<LexiconTagger>();

  KnowledgeBase kb = load_kb(cfg_.kb_path);
  if (!cfg_.promoted_path.empty() && fs::exists(cfg_.promoted_path)) {
    KnowledgeBase extra = load_kb(cfg_.promoted_path);
    for (KeyKind k : kAllKinds)
      for (const auto& e : extra.vocab(k)) kb.add_term(k, e.text, e.source);
    for (const auto& p : extra.patterns()) kb.add_pattern(p.text, p.source);
  }
  store_ = std::make_unique<KnowledgeStore>(std::move(kb), cfg_.promoted_path);
  guard_ = std::make_unique<Guard>(*store_, cfg_.validator, cfg_.audit_path, cfg_.retrain_every);

  if (!cfg_.confirmed_path.empty()) {
    if (std::ifstream in(cfg_.confirmed_path); in) {
      std::string line;
      while (std::getline(in, line))
        if (!trim(line).empty()) confirmed_.push_back(Json::parse(line));
    }
    confirmed_out_.open(cfg_.confirmed_path, std::ios::app);
    if (!confirmed_out_) throw IoError("cannot open confirmed store " + cfg_.confirmed_path);
  }
}

Service::~Service() { shutdown(); }

DialogueContext Service::new_context() const {
  DialogueContext ctx;
  ctx.kb = store_->snapshot();
  ctx.tagger = tagger_;
  ctx.lexicon = lexicon_;
  ctx.vague = vague_;
  Guard* g = guard_.get();
  ctx.on_answer = [g](const std::string& term, KeyKind kind) { g->promote(term, kind); };
  return ctx;
}

std::string Service::create_session() {
  evict_expired();
  auto e = std::make_shared<Entry>();
  std::string id;
  std::lock_guard lock(sessions_mutex_);
  do id = new_session_id();
  while (sessions_.count(id));
  e->session = std::make_unique<Session>(id, new_context());
  e->last_used = std::chrono::steady_clock::now();
  sessions_[id] = e;
  return id;
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession(id);
  return it->second;
}

template <class F>
AssistantReply Service::with_session(const std::string& id, F&& f) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);  // one turn at a time per session
  e->last_used = std::chrono::steady_clock::now();
  AssistantReply r = f(*e->session);
  record(*e->session);
  return r;
}

void Service::record(const Session& s) {
  std::lock_guard lock(records_mutex_);
  if (!s.current().source_text.empty()) requirements_[s.current().id] = requirement_to_json(s.current());
}

void Service::store_confirmed(const Json& j) {
  std::lock_guard lock(records_mutex_);
  confirmed_.push_back(j);
  if (confirmed_out_.is_open()) {
    confirmed_out_ << dump_line(j) << '\n';
    confirmed_out_.flush();
  }
}

AssistantReply Service::message(const std::string& id, std::string_view text) {
  return with_session(id, [&](Session& s) { return s.handle_message(text); });
}

AssistantReply Service::confirm(const std::string& id) {
  return with_session(id, [&](Session& s) {
    AssistantReply r = s.confirm();
    store_confirmed(confirmed_to_json(s.confirmed().back()));
    return r;
  });
}

AssistantReply Service::revise(const std::string& id, KeyKind kind, std::string_view phrase) {
  return with_session(id, [&](Session& s) { return s.revise(kind, phrase); });
}

AssistantReply Service::dispatch(const std::string& id, std::string_view line) {
  std::string t = trim(line);
  if (t == ":confirm") return confirm(id);
  return with_session(id, [&](Session& s) { return s.dispatch(line); });
}

Json Service::session_info(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  const Session& s = *e->session;
  Json j;
  j["id"] = s.id();
  j["state"] = std::string(state_name(s.state()));
  j["clarification_count"] = s.clarification_count();
  j["pending_question"] = s.pending_question() ? Json(s.pending_question()->text) : Json(nullptr);
  j["requirement"] = s.current().source_text.empty() ? Json(nullptr) : requirement_to_json(s.current());
  return j;
}

std::vector<TranscriptEntry> Service::transcript(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session->transcript();
}

void Service::close_session(const std::string& id) {
  std::shared_ptr<Entry> e;
  {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownSession(id);
    e = it->second;
    sessions_.erase(it);
  }
  std::lock_guard lock(e->mutex);
  e->session->close();
}

void Service::evict_expired() {
  auto now = std::chrono::steady_clock::now();
  std::vector<std::shared_ptr<Entry>> expired;
  {
    std::lock_guard lock(sessions_mutex_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      std::unique_lock entry_lock(it->second->mutex, std::try_to_lock);
      if (entry_lock.owns_lock() && now - it->second->last_used > cfg_.session_ttl) {
        expired.push_back(it->second);
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& e : expired) {
    std::lock_guard lock(e->mutex);
    e->session->close();
  }
}

std::size_t Service::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

BatchReport Service::batch(std::istream& in) {
  DialogueContext ctx = new_context();
  BatchReport report = process_batch(in, ctx);
  for (const auto& item : report.items) {
    if (!item.confirmed) continue;
    Requirement r = Requirement::from_text(item.id, item.text);
    Analysis a = analyze(checked_tag(*ctx.tagger, item.text, *ctx.kb), item.text, ctx);
    r.slots = a.slots;
    r.formula = assemble_specification(a.slots);
    r.status = Status::Confirmed;
    {
      std::lock_guard lock(records_mutex_);
      requirements_[r.id] = requirement_to_json(r);
    }
    store_confirmed(confirmed_to_json(r));
  }
  return report;
}

std::optional<Json> Service::requirement(const std::string& id) const {
  std::lock_guard lock(records_mutex_);
  auto it = requirements_.find(id);
  if (it == requirements_.end()) return std::nullopt;
  return it->second;
}

Json Service::knowledge_stats() const { return kb_stats_to_json(kb_stats(*store_->snapshot())); }

Json Service::promote_term(std::string_view term, KeyKind kind) {
  bool before = store_->snapshot()->contains_term(kind, term);
  ValidationVerdict v = guard_->promote(term, kind);
  Json j = verdict_to_json(v);
  j["added"] = !before && store_->snapshot()->contains_term(kind, term);
  return j;
}

std::vector<Json> Service::confirmed() const {
  std::lock_guard lock(records_mutex_);
  return confirmed_;
}

void Service::shutdown() {
  if (guard_) guard_->flush();
  std::lock_guard lock(records_mutex_);
  if (confirmed_out_.is_open()) confirmed_out_.flush();
}

// ── HTTP ────────────────────────────────────────────────────────────────────

struct HttpServer::Impl {
  Service& service;
  httplib::Server svr;
  explicit Impl(Service& s) : service(s) {}
};

namespace {

void send_json(httplib::Response& res, const Json& j, int status = 200) {
  res.status = status;
  res.set_content(dump_line(j), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, Json{{"error", msg}}, status);
}

Json body_json(const httplib::Request& req) {
  if (trim(req.body).empty()) return Json::object();
  Json j = Json::parse(req.body);  // parse_error -> 400
  if (!j.is_object()) throw SchemaError("request body must be a JSON object");
  return j;
}

std::string required_string(const Json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) throw SchemaError(std::string("missing string field \"") + field + "\"");
  return j[field].get<std::string>();
}

KeyKind required_kind(const Json& j) {
  std::string name = required_string(j, "kind");
  auto k = kind_from_name(name);
  if (!k) throw SchemaError("unknown kind '" + name + "'");
  return *k;
}

template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const UnknownSession& e) {
      send_error(res, 404, e.what());
    } catch (const NotProposing& e) {
      send_error(res, 409, e.what());
    } catch (const SessionDone& e) {
      send_error(res, 409, e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, std::string("bad JSON: ") + e.what());
    } catch (const SchemaError& e) {
      send_error(res, 400, e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

std::string jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) out += dump_line(r) + "\n";
  return out;
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->svr;
  Service& s = service;

  svr.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, Json{{"status", "ok"}});
  }));

  svr.Post("/sessions", guarded([&s](const httplib::Request&, httplib::Response& res) {
    send_json(res, Json{{"id", s.create_session()}}, 201);
  }));

  svr.Get(R"(/sessions/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    send_json(res, s.session_info(req.matches[1]));
  }));

  svr.Delete(R"(/sessions/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    s.close_session(req.matches[1]);
    send_json(res, Json{{"closed", std::string(req.matches[1])}});
  }));

  svr.Post(R"(/sessions/([^/]+)/messages)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    std::string text = required_string(body_json(req), "text");
    send_json(res, reply_to_json(s.message(req.matches[1], text)));
  }));

  svr.Post(R"(/sessions/([^/]+)/confirm)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    send_json(res, reply_to_json(s.confirm(req.matches[1])));
  }));

  svr.Post(R"(/sessions/([^/]+)/revise)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    Json j = body_json(req);
    send_json(res, reply_to_json(s.revise(req.matches[1], required_kind(j), required_string(j, "phrase"))));
  }));

  svr.Get(R"(/sessions/([^/]+)/transcript)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    std::vector<Json> rows;
    for (const auto& e : s.transcript(req.matches[1])) rows.push_back(transcript_to_jsonl_entry(e));
    res.set_content(jsonl(rows), "application/x-ndjson");
  }));

  svr.Post("/requirements/batch", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    std::string body = req.body;
    if (req.is_multipart_form_data()) {
      if (req.files.empty()) throw SchemaError("multipart upload without a file");
      body = req.files.begin()->second.content;
    }
    std::istringstream in(body);
    send_json(res, batch_report_to_json(s.batch(in)));
  }));

  svr.Get(R"(/requirements/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    auto r = s.requirement(req.matches[1]);
    if (!r) return send_error(res, 404, "unknown requirement " + std::string(req.matches[1]));
    send_json(res, *r);
  }));

  svr.Get("/knowledge/stats", guarded([&s](const httplib::Request&, httplib::Response& res) {
    send_json(res, s.knowledge_stats());
  }));

  svr.Post("/knowledge/terms", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    Json j = body_json(req);
    std::string term = required_string(j, "term");
    if (trim(term).empty()) throw SchemaError("term is empty");
    send_json(res, s.promote_term(term, required_kind(j)));
  }));

  svr.Get("/export/confirmed", guarded([&s](const httplib::Request&, httplib::Response& res) {
    res.set_content(jsonl(s.confirmed()), "application/x-ndjson");
  }));

  if (!s.config().static_dir.empty()) svr.set_mount_point("/", s.config().static_dir);
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->svr.listen(host, port); }
int HttpServer::bind_any_port(const std::string& host) { return impl_->svr.bind_to_any_port(host); }
bool HttpServer::listen_after_bind() { return impl_->svr.listen_after_bind(); }
void HttpServer::stop() {
  if (impl_->svr.is_running()) impl_->svr.stop();
}
bool HttpServer::running() const { return impl_->svr.is_running(); }

}  // namespace cityspec
