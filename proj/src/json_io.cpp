#include "cityspec/json_io.hpp"

namespace cityspec {

namespace {

Rational rational_field(const Json& j, const char* key) {
  const Json& v = j.at(key);
  std::string text = v.is_string() ? v.get<std::string>() : v.dump();
  auto r = Rational::parse(text);
  if (!r) throw SchemaError(std::string("field '") + key + "' is not a number: " + text);
  return *r;
}

sastl::SpatialDomain domain_from_text(const std::string& text) {
  sastl::Formula f = sastl::parse_formula("Everywhere_" + text + " true");
  return f.as<sastl::EverywhereNode>()->domain;
}

}  // namespace

Json phrase_to_json(const KeyedPhrase& p) {
  Json j;
  j["kind"] = std::string(kind_name(p.kind));
  j["text"] = p.text;
  if (p.span)
    j["span"] = Json::array({p.span->begin, p.span->end});
  else
    j["span"] = nullptr;
  j["confidence"] = p.confidence;
  if (!p.canonical.empty() && p.canonical != p.text) j["canonical"] = p.canonical;
  return j;
}

KeyedPhrase phrase_from_json(const Json& j, KeyKind kind) {
  KeyedPhrase p;
  p.kind = kind;
  if (j.contains("kind")) {
    auto k = kind_from_name(j.at("kind").get<std::string>());
    if (!k) throw SchemaError("unknown key kind '" + j.at("kind").get<std::string>() + "'");
    if (*k != kind) throw SchemaError("phrase kind does not match its slot list");
  }
  p.text = j.at("text").get<std::string>();
  if (j.contains("span") && !j.at("span").is_null()) {
    const Json& s = j.at("span");
    if (!s.is_array() || s.size() != 2) throw SchemaError("span must be [begin, end]");
    p.span = Span{s[0].get<std::size_t>(), s[1].get<std::size_t>()};
  }
  if (j.contains("confidence")) p.confidence = j.at("confidence").get<double>();
  if (p.confidence < 0.0 || p.confidence > 1.0) throw SchemaError("confidence outside [0,1]");
  if (j.contains("canonical")) p.canonical = j.at("canonical").get<std::string>();
  return p;
}

Json slots_to_json(const SlotSet& s) {
  Json j = Json::object();
  for (KeyKind k : kAllKinds) {
    Json list = Json::array();
    for (const auto& p : s.get(k)) list.push_back(phrase_to_json(p));
    j[std::string(kind_name(k))] = std::move(list);
  }
  Json norm = Json::object();
  if (s.time) {
    Json t;
    t["lo"] = s.time->interval.lo.to_string();
    if (s.time->interval.hi.is_infinite())
      t["hi"] = nullptr;
    else
      t["hi"] = s.time->interval.hi.value->to_string();
    t["date"] = s.time->date ? Json(*s.time->date) : Json(nullptr);
    t["defaulted"] = s.time->defaulted;
    t["notes"] = s.time->notes;
    norm["time"] = std::move(t);
  }
  if (s.condition) {
    Json c;
    c["comparator"] = std::string(sastl::comparator_name(s.condition->comparator));
    c["constant"] = s.condition->constant.to_string();
    c["unit"] = s.condition->unit;
    c["negated"] = s.condition->negated;
    c["comparator_phrase"] = s.condition->comparator_phrase;
    norm["condition"] = std::move(c);
  }
  if (s.location) norm["location"] = sastl::print_domain(*s.location);
  if (!norm.empty()) j["normalized"] = std::move(norm);
  return j;
}

SlotSet slots_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("slots must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "normalized" && !kind_from_name(key)) throw SchemaError("unknown key kind '" + key + "'");
  SlotSet s;
  try {
    for (KeyKind k : kAllKinds) {
      auto it = j.find(std::string(kind_name(k)));
      if (it == j.end()) continue;
      if (!it->is_array()) throw SchemaError(std::string(kind_name(k)) + " must be a list");
      for (const auto& p : *it) s.add(phrase_from_json(p, k));
    }
  } catch (const SlotError& e) {
    throw SchemaError(e.what());
  }
  if (auto n = j.find("normalized"); n != j.end()) {
    if (auto t = n->find("time"); t != n->end()) {
      TimeSpec ts;
      Bound hi = t->at("hi").is_null() ? Bound::infinite() : Bound::finite(rational_field(*t, "hi"));
      ts.interval = sastl::TimeInterval::make(rational_field(*t, "lo"), hi);
      if (t->contains("date") && !t->at("date").is_null()) ts.date = t->at("date").get<std::string>();
      ts.defaulted = t->value("defaulted", false);
      if (t->contains("notes")) ts.notes = t->at("notes").get<std::vector<std::string>>();
      s.time = ts;
    }
    if (auto c = n->find("condition"); c != n->end()) {
      ConditionParse cp;
      auto cmp = sastl::comparator_from_name(c->at("comparator").get<std::string>());
      if (!cmp) throw SchemaError("unknown comparator");
      cp.comparator = *cmp;
      cp.constant = rational_field(*c, "constant");
      cp.unit = c->value("unit", "");
      cp.negated = c->value("negated", false);
      cp.comparator_phrase = c->value("comparator_phrase", "");
      s.condition = cp;
    }
    if (auto l = n->find("location"); l != n->end()) s.location = domain_from_text(l->get<std::string>());
  }
  return s;
}

Json requirement_to_json(const Requirement& r) {
  Json j;
  j["id"] = r.id;
  j["source_text"] = r.source_text;
  j["tokens"] = token_texts(r.tokens);
  j["slots"] = slots_to_json(r.slots);
  j["status"] = std::string(status_name(r.status));
  j["formula"] = r.formula ? Json(sastl::print_formula(*r.formula)) : Json(nullptr);
  return j;
}

Requirement requirement_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("requirement must be an object");
  std::string text = j.at("source_text").get<std::string>();
  Requirement r = Requirement::from_text(j.value("id", ""), text);
  if (j.contains("tokens")) {
    auto given = j.at("tokens").get<std::vector<std::string>>();
    if (given != token_texts(r.tokens)) throw SchemaError("tokens do not match source_text");
  }
  if (j.contains("slots")) r.slots = slots_from_json(j.at("slots"));
  try {
    validate_spans(r.slots, r.source_text, r.tokens);
  } catch (const SlotError& e) {
    throw SchemaError(e.what());
  }
  if (j.contains("status")) {
    auto st = status_from_name(j.at("status").get<std::string>());
    if (!st) throw SchemaError("unknown status");
    r.status = *st;
  }
  if (j.contains("formula") && !j.at("formula").is_null())
    r.formula = sastl::parse_formula(j.at("formula").get<std::string>());
  return r;
}

std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

}  // namespace cityspec
