// extract_internal.hpp : helpers shared by the extract translation units
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cityspec/extract.hpp"

namespace cityspec::detail {

// Lowercased tokens of a phrase.
std::vector<std::string> lower_tokens(std::string_view phrase);

bool is_clause_delimiter(std::string_view token);
bool is_negation_cue(std::string_view lower_token);

// Measurement words accepted after a number ("mg/m3", "miles", "per", ...).
bool is_unit_word(std::string_view lower_token);
// Meters per unit for distance units, 0 when not a distance unit.
Rational meters_per(std::string_view lower_token);

enum class TimeMatch { None, Exact, Vague };
// Whether the phrase as a whole is a time expression the tagger should
// propose. Vague ones ("after midnight") are proposed too, so that they get
// clarified rather than dropped.
TimeMatch classify_time_phrase(std::string_view phrase);

}  // namespace cityspec::detail
