// eval.hpp : metrics over tagged corpora, and edit distance
//
// Token metrics look only at key tokens: a token's label is the kind of the
// span covering it, or none. Gold and predicted corpora must hold the same
// requirements in the same order with identical token sequences.
//
//   token_acc  = tokens whose predicted kind equals their gold kind
//                / gold key tokens                      (1 when no gold keys)
//   sent_acc   = requirements whose phrases match exactly (kind, text, span)
//   P, R       = micro-averaged over key tokens; 0 when the denominator is 0
//   F1         = 2PR / (P + R), 0 when P + R = 0

#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cityspec/json_io.hpp"
#include "cityspec/reqmodel.hpp"

namespace cityspec {

class MisalignedCorpora : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using TokenLabels = std::vector<std::optional<KeyKind>>;

// Labels of req.tokens from span-carrying phrases.
TokenLabels token_labels(const Requirement& req);

Rational token_accuracy(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred);
Rational sentence_accuracy(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred);

struct Prf {
  Rational precision, recall, f1;
};
Prf precision_recall_f1(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred);
// Same, restricted to one kind (a token counts for kind k when gold or
// prediction says k).
std::array<Prf, 5> per_kind_prf(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred);

struct EvalReport {
  Rational token_acc, sent_acc, precision, recall, f1;
  std::array<Prf, 5> per_kind;
  std::size_t n_requirements = 0;
  std::size_t n_tokens = 0;
};

EvalReport evaluate(const std::vector<Requirement>& gold, const std::vector<Requirement>& pred);
Json report_to_json(const EvalReport& r);

// Code points of UTF-8 text; malformed bytes map to themselves.
std::u32string utf8_codepoints(std::string_view s);

// Damerau–Levenshtein distance over code points (insert, delete, substitute,
// transpose adjacent). This is the unrestricted form, which is a metric; the
// optimal-string-alignment variant is not (osa("ca","abc") = 3 but
// dld("ca","abc") = 2, and osa violates the triangle inequality).
std::size_t dld(std::string_view a, std::string_view b);
std::size_t osa_distance(std::string_view a, std::string_view b);

}  // namespace cityspec
