// cityspec : command-line front end
//
//   cityspec serve | chat | extract | synth | eval [dld] | kb <cmd> | guard <cmd>
//
// Exit codes: 0 success, 1 user error (usage, unreadable or malformed input),
// 2 internal error.

#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "CLI11.hpp"
#include "cityspec/eval.hpp"
#include "cityspec/server.hpp"
#include "cityspec/synth.hpp"

using namespace cityspec;

namespace {

struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

KeyKind parse_kind(const std::string& s) {
  auto k = kind_from_name(to_lower(s));
  if (!k) throw UserError("unknown kind '" + s + "' (entity, quantifier, location, time, condition)");
  return *k;
}

ComparatorLexicon lexicon_from(const std::string& path) {
  return path.empty() ? ComparatorLexicon::defaults() : ComparatorLexicon::load(path);
}

// Writes to `path`, or stdout when empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UserError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void add_service_options(CLI::App* app, ServiceConfig& cfg) {
  app->add_option("--kb", cfg.kb_path, "knowledge base (JSONL)");
  app->add_option("--promoted", cfg.promoted_path, "file receiving promoted terms");
  app->add_option("--comparators", cfg.comparator_lexicon_path, "comparator lexicon (JSON)");
  app->add_option("--vague-terms", cfg.vague_terms_path, "vague-term list");
  app->add_option("--audit", cfg.audit_path, "validation audit log (JSONL)");
  app->add_option("--confirmed", cfg.confirmed_path, "confirmed-requirement store (JSONL)");
  app->add_option("--threshold", cfg.validator.threshold, "validator uncertainty threshold");
  app->add_option("--passes", cfg.validator.passes, "validator stochastic passes");
  app->add_option("--dropout", cfg.validator.dropout, "validator feature dropout");
  app->add_flag("!--no-merge", cfg.validator.merge_entity_quantifier, "treat entity and quantifier as distinct kinds");
  app->add_option("--retrain-every", cfg.retrain_every, "promotions between validator retrains");
}

// ── serve ───────────────────────────────────────────────────────────────────

int run_serve(ServiceConfig cfg) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // inherited by server threads

  Service service(cfg);
  HttpServer http(service);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    http.stop();
  });
  std::cerr << "cityspec listening on " << cfg.host << ":" << cfg.port << "\n";
  bool ok = http.listen(cfg.host, cfg.port);
  if (!ok) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  service.shutdown();
  if (!ok) {
    std::cerr << "error: cannot listen on " << cfg.host << ":" << cfg.port << "\n";
    return 1;
  }
  return 0;
}

// ── chat ────────────────────────────────────────────────────────────────────

void print_reply(const AssistantReply& r) {
  switch (r.kind) {
    case ReplyKind::Question: std::cout << "? " << r.text << "\n"; break;
    case ReplyKind::Proposal: {
      const auto& b = *r.proposal;
      std::cout << "Proposed requirement\n"
                << "  template: " << b.template_sentence << "\n"
                << "  formula:  " << b.formula_text << "\n"
                << "  slots:\n";
      for (KeyKind k : kAllKinds)
        for (const auto& p : b.slot_table[std::string(kind_name(k))])
          std::cout << "    " << kind_name(k) << ": " << p["text"].get<std::string>() << "\n";
      std::cout << "(:confirm to accept, :revise <kind> <phrase> to change)\n";
      break;
    }
    case ReplyKind::Ack: std::cout << r.text << "\n"; break;
    case ReplyKind::Error: std::cout << "! " << r.text << "\n"; break;
  }
}

int run_chat(ServiceConfig cfg, bool json) {
  Service service(cfg);
  std::string id = service.create_session();
  bool interactive = !json && isatty(STDIN_FILENO);
  if (interactive) std::cout << "Enter a requirement (:confirm, :revise <kind> <phrase>, :quit).\n";
  std::string line;
  while (true) {
    if (interactive) std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t == ":quit" || t == ":q") break;
    try {
      AssistantReply r = service.dispatch(id, t);
      if (json)
        std::cout << dump_line(reply_to_json(r)) << std::endl;
      else
        print_reply(r);
    } catch (const std::exception& e) {
      // same body the HTTP transport sends with its 4xx status
      if (json)
        std::cout << dump_line(Json{{"error", e.what()}}) << std::endl;
      else
        std::cout << "! " << e.what() << "\n";
    }
  }
  service.shutdown();
  return 0;
}

// ── extract ─────────────────────────────────────────────────────────────────

int run_extract(const std::string& kb_path, const std::string& lexicon_path, const std::string& text,
                const std::string& input, const std::string& out_path, bool full) {
  KnowledgeBase kb = load_kb(kb_path);
  ComparatorLexicon lexicon = lexicon_from(lexicon_path);
  LexiconTagger tagger;
  if (!text.empty()) {
    SlotSet raw = checked_tag(tagger, text, kb);
    RefineResult r = refine(raw, text, lexicon);
    if (!full) {
      std::cout << slots_to_json(r.slots).dump(2) << "\n";
      return 0;
    }
    DialogueContext ctx = DialogueContext::with_kb(std::make_shared<KnowledgeBase>(kb));
    ctx.lexicon = lexicon;
    Analysis a = analyze(raw, text, ctx);
    Json j;
    j["slots"] = slots_to_json(a.slots);
    Json missing = Json::array();
    for (KeyKind k : a.missing) missing.push_back(std::string(kind_name(k)));
    j["missing"] = missing;
    Json questions = Json::array();
    for (const auto& q : a.questions) questions.push_back(q.text);
    j["questions"] = questions;
    if (a.complete()) {
      j["template"] = render_template(a.slots);
      j["formula"] = sastl::print_formula(assemble_specification(a.slots));
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (input.empty()) throw UserError("extract needs --text or --input");
  std::ifstream in(input);
  if (!in) throw UserError("cannot read " + input);
  Output out(out_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    std::string source = t;
    std::string id;
    if (t.front() == '{') {
      Json j = Json::parse(t);
      if (j.contains("source_text")) source = j["source_text"].get<std::string>();
      else if (j.contains("text")) source = j["text"].get<std::string>();
      else throw UserError("line " + std::to_string(lineno) + ": no text field");
      if (j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
    }
    Requirement r = Requirement::from_text(id.empty() ? requirement_id_for(source) : id, source);
    r.slots = refine(checked_tag(tagger, source, kb), source, lexicon).slots;
    out.stream() << dump_line(requirement_to_json(r)) << "\n";
  }
  return 0;
}

// ── synth ───────────────────────────────────────────────────────────────────

int run_synth(const std::string& kb_path, SynthesisConfig cfg, const std::string& policy,
              const std::string& exclude, const std::string& out_path, const std::string& manifest_path) {
  auto p = policy_from_name(policy);
  if (!p) throw UserError("unknown policy '" + policy + "' (coverage_first, round_robin, uniform_random)");
  cfg.policy = *p;
  KnowledgeBase kb = load_kb(kb_path);
  Exclusions ex;
  if (!exclude.empty()) {
    Corpus c = load_corpus(exclude);
    if (!c.errors.empty()) throw UserError(exclude + ": " + c.errors.front());
    ex = exclusions_from(c.requirements);
  }
  SynthesisResult result = synthesize(kb, cfg, ex);
  Output out(out_path);
  for (const auto& r : result.rows) out.stream() << dump_line(synthesized_to_json(r)) << "\n";
  Json manifest = manifest_to_json(result.manifest);
  if (manifest_path.empty()) {
    std::cerr << dump_line(manifest) << "\n";
  } else {
    std::ofstream m(manifest_path);
    if (!m) throw UserError("cannot write " + manifest_path);
    m << manifest.dump(2) << "\n";
  }
  return 0;
}

// ── eval ────────────────────────────────────────────────────────────────────

std::vector<Requirement> corpus_or_fail(const std::string& path) {
  Corpus c = load_corpus(path);
  if (!c.errors.empty()) throw UserError(path + ": " + c.errors.front());
  return c.requirements;
}

std::string strip_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

// ── kb ──────────────────────────────────────────────────────────────────────

int run_build_seed(const std::string& markup, const std::string& corpus_out, const std::string& kb_out) {
  std::ifstream in(markup);
  if (!in) throw UserError("cannot read " + markup);
  std::vector<Requirement> reqs = read_markup(in);
  KnowledgeBase kb;
  IngestReport rep = ingest_annotations(kb, reqs);
  if (!rep.skipped.empty()) throw UserError("seed corpus has malformed entries: " + rep.skipped.front());
  {
    std::ofstream c(corpus_out);
    if (!c) throw UserError("cannot write " + corpus_out);
    for (const auto& r : reqs) c << dump_line(requirement_to_json(r)) << "\n";
  }
  save_kb(kb, kb_out);
  Json j = kb_stats_to_json(kb_stats(kb));
  j["requirements"] = reqs.size();
  std::cout << dump_line(j) << "\n";
  return 0;
}

int run_ingest(const std::string& kb_path, const std::string& corpus, const std::string& out) {
  KnowledgeBase kb = kb_path.empty() ? KnowledgeBase{} : load_kb(kb_path);
  Corpus c = load_corpus(corpus);
  IngestReport rep = ingest_annotations(kb, c.requirements);
  save_kb(kb, out.empty() ? kb_path : out);
  Json j;
  j["requirements"] = rep.requirements;
  j["terms_added"] = rep.terms_added;
  j["patterns_added"] = rep.patterns_added;
  std::vector<std::string> skipped = c.errors;
  skipped.insert(skipped.end(), rep.skipped.begin(), rep.skipped.end());
  j["skipped"] = skipped;
  std::cout << dump_line(j) << "\n";
  return 0;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"CitySpec: city requirements to spatial-aggregation temporal logic"};
  app.require_subcommand(1);

  ServiceConfig service_cfg;
  service_cfg.apply_env();

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  add_service_options(serve, service_cfg);
  serve->add_option("--host", service_cfg.host);
  serve->add_option("--port", service_cfg.port);
  long long ttl = service_cfg.session_ttl.count();
  serve->add_option("--session-ttl", ttl, "seconds of inactivity before a session is evicted");
  serve->add_option("--static", service_cfg.static_dir, "directory served under /");

  auto* chat = app.add_subcommand("chat", "terminal dialogue over the same pipeline");
  add_service_options(chat, service_cfg);
  bool chat_json = false;
  chat->add_flag("--json", chat_json, "print reply payloads as JSON lines");

  auto* extract = app.add_subcommand("extract", "tag and refine requirement text");
  std::string kb_path = "data/seed_kb.jsonl", lexicon_path, text, input, out_path;
  bool full = false;
  extract->add_option("--kb", kb_path);
  extract->add_option("--comparators", lexicon_path, "comparator lexicon (JSON); built-in when omitted");
  extract->add_option("--text", text);
  extract->add_option("--input", input, "requirements, one per line (text or JSON); writes requirement JSONL");
  extract->add_option("--out", out_path);
  extract->add_flag("--full", full, "also print missing kinds, questions and the formula");

  auto* synth = app.add_subcommand("synth", "synthesize labeled requirements from the KB");
  SynthesisConfig synth_cfg;
  std::string policy = "coverage_first", exclude, manifest_path;
  synth->add_option("--kb", kb_path);
  synth->add_option("--lambda", synth_cfg.lambda)->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_cfg.seed);
  synth->add_option("--policy", policy);
  synth->add_option("--exclude", exclude, "annotated test corpus whose phrases and patterns are withheld");
  synth->add_option("--out", out_path);
  synth->add_option("--manifest", manifest_path);

  auto* eval = app.add_subcommand("eval", "token/sentence accuracy and P/R/F1");
  std::string gold, pred;
  eval->add_option("--gold", gold);
  eval->add_option("--pred", pred);
  auto* dld_cmd = eval->add_subcommand("dld", "Damerau-Levenshtein distance between two files");
  std::string file_a, file_b;
  dld_cmd->add_option("--a", file_a)->required();
  dld_cmd->add_option("--b", file_b)->required();

  auto* kb = app.add_subcommand("kb", "knowledge base administration");
  kb->require_subcommand(1);
  auto* kb_stats_cmd = kb->add_subcommand("stats", "per-kind counts");
  kb_stats_cmd->add_option("--kb", kb_path);
  auto* kb_ingest = kb->add_subcommand("ingest", "add an annotated corpus to a KB");
  std::string corpus, kb_out;
  kb_ingest->add_option("--kb", kb_path);
  kb_ingest->add_option("--corpus", corpus)->required();
  kb_ingest->add_option("--out", kb_out, "output KB (defaults to --kb)");
  auto* kb_seed = kb->add_subcommand("build-seed", "rebuild the seed corpus and KB from markup");
  std::string markup = "data/seed_requirements.txt", corpus_out = "data/seed_requirements.jsonl";
  std::string seed_kb_out = "data/seed_kb.jsonl";
  kb_seed->add_option("--markup", markup);
  kb_seed->add_option("--corpus-out", corpus_out);
  kb_seed->add_option("--kb-out", seed_kb_out);

  auto* guard = app.add_subcommand("guard", "term validation and promotion");
  guard->require_subcommand(1);
  ValidatorConfig vcfg;
  std::string term, kind, audit;
  auto add_guard_options = [&](CLI::App* c) {
    c->add_option("--kb", kb_path);
    c->add_option("--term", term)->required();
    c->add_option("--kind", kind)->required();
    c->add_option("--threshold", vcfg.threshold);
    c->add_option("--passes", vcfg.passes);
    c->add_option("--dropout", vcfg.dropout);
    c->add_option("--seed", vcfg.seed);
    c->add_flag("!--no-merge", vcfg.merge_entity_quantifier);
  };
  auto* g_validate = guard->add_subcommand("validate", "predict the kind of a term and decide");
  add_guard_options(g_validate);
  auto* g_promote = guard->add_subcommand("promote", "validate and, if accepted, append the term to the KB");
  add_guard_options(g_promote);
  g_promote->add_option("--audit", audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*serve) {
    service_cfg.session_ttl = std::chrono::seconds(ttl);
    return run_serve(service_cfg);
  }
  if (*chat) return run_chat(service_cfg, chat_json);
  if (*extract) return run_extract(kb_path, lexicon_path, text, input, out_path, full);
  if (*synth) return run_synth(kb_path, synth_cfg, policy, exclude, out_path, manifest_path);
  if (*eval) {
    if (*dld_cmd) {
      std::cout << dump_line(Json{{"dld", dld(strip_newline(read_file(file_a)), strip_newline(read_file(file_b)))}})
                << "\n";
      return 0;
    }
    if (gold.empty() || pred.empty()) throw UserError("eval needs --gold and --pred (or the dld subcommand)");
    std::cout << report_to_json(evaluate(corpus_or_fail(gold), corpus_or_fail(pred))).dump(2) << "\n";
    return 0;
  }
  if (*kb) {
    if (*kb_stats_cmd) {
      std::cout << kb_stats_to_json(kb_stats(load_kb(kb_path))).dump(2) << "\n";
      return 0;
    }
    if (*kb_ingest) return run_ingest(kb_path, corpus, kb_out);
    if (*kb_seed) return run_build_seed(markup, corpus_out, seed_kb_out);
  }
  if (*guard) {
    KeyKind k = parse_kind(kind);
    if (trim(term).empty()) throw UserError("term is empty");
    if (*g_validate) {
      Validator v = Validator::train(load_kb(kb_path), vcfg);
      std::cout << dump_line(verdict_to_json(v.validate(term, k))) << "\n";
      return 0;
    }
    KnowledgeStore store(load_kb(kb_path), kb_path);
    bool before = store.snapshot()->contains_term(k, term);
    Guard g(store, vcfg, audit);
    Json j = verdict_to_json(g.promote(term, k));
    j["added"] = !before && store.snapshot()->contains_term(k, term);
    std::cout << dump_line(j) << "\n";
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return cli_main(argc, argv);
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const EmptyVocabulary& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NoPatterns& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
