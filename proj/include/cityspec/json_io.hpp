// json_io.hpp : JSON serialization of the requirement model
//
// Field names follow the model types exactly. Objects are key-ordered so the
// output is byte-stable across runs.
//
//   KeyedPhrase  {"kind","text","span":[b,e]|null,"confidence"[,"canonical"]}
//   SlotSet      {"entity":[..],"quantifier":[..],"location":[..],"time":[..],
//                 "condition":[..],"normalized":{...}}
//   Requirement  {"id","source_text","tokens","slots","status","formula"}

#pragma once

#include <string>

#include "cityspec/reqmodel.hpp"
#include "json.hpp"

namespace cityspec {

using Json = nlohmann::ordered_json;

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

Json phrase_to_json(const KeyedPhrase& p);
KeyedPhrase phrase_from_json(const Json& j, KeyKind kind);

Json slots_to_json(const SlotSet& s);
// Spans are not validated here; call validate_spans with the source tokens.
SlotSet slots_from_json(const Json& j);

Json requirement_to_json(const Requirement& r);
// Tokens are recomputed from source_text; an explicit "tokens" array must
// agree with them. Missing id/status default to derived id / draft.
Requirement requirement_from_json(const Json& j);

// Compact single-line dump used for JSONL files and wire payloads.
std::string dump_line(const Json& j);

}  // namespace cityspec
