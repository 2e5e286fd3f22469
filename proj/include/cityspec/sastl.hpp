// ============================================================================
// sastl.hpp : SaSTL abstract syntax, canonical printing and parsing
// ============================================================================
//
// Formulas are immutable trees with shared subterms. Copying a Formula is
// cheap (one shared_ptr). Core nodes are Atom, Not, And, Until, Aggregate and
// Count; True, Always, Eventually, Everywhere and Somewhere are derived forms
// that expand_derived() rewrites into the core.
//
// Canonical ASCII rendering (see docs/formula_grammar.md for the EBNF):
//
//   Everywhere_{school & [0,200]} Always_[7,8] number of taxi < 10
//   Count_min_{school} (x < 3) > 0
//   Agg_avg_{all buildings} concentration of TVOC <= 0.6 mg/m3
//   a < 1 U_[0,5] !(b >= 2)
//
// ============================================================================

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cityspec/rational.hpp"

namespace cityspec::sastl {

// ── Comparator ──────────────────────────────────────────────────────────────

enum class Comparator { Lt, Le, Gt, Ge };

// Negation: !(x < c) is x >= c, and so on.
Comparator flip(Comparator c);
std::string_view symbol(Comparator c);
std::optional<Comparator> comparator_from_symbol(std::string_view s);
// Stable names used in config files: "LT", "LE", "GT", "GE".
std::string_view comparator_name(Comparator c);
std::optional<Comparator> comparator_from_name(std::string_view s);

// ── Intervals and spatial domains ───────────────────────────────────────────

// Time interval in hours. hi may be +inf; [0,+inf) is the "always" default.
struct TimeInterval {
  Rational lo{0};
  Bound hi = Bound::infinite();

  static TimeInterval unbounded() { return {}; }
  // Throws std::invalid_argument unless 0 <= lo <= hi.
  static TimeInterval make(Rational lo, Bound hi);
  bool is_unbounded() const { return lo == Rational(0) && hi.is_infinite(); }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

// Boolean expression over location labels.
struct Proposition {
  enum class Kind { True, Label, Not, Or, And };
  Kind kind = Kind::True;
  std::string label;
  std::vector<Proposition> operands;

  static Proposition truth() { return {}; }
  static Proposition make_label(std::string text) { return {Kind::Label, std::move(text), {}}; }
  static Proposition make_not(Proposition p) { return {Kind::Not, {}, {std::move(p)}}; }
  static Proposition make_or(Proposition a, Proposition b) { return {Kind::Or, {}, {std::move(a), std::move(b)}}; }
  static Proposition make_and(Proposition a, Proposition b) { return {Kind::And, {}, {std::move(a), std::move(b)}}; }

  friend bool operator==(const Proposition&, const Proposition&) = default;
};

// ([d_lo, d_hi], psi). Distances in meters.
struct SpatialDomain {
  Rational distance_lo{0};
  Bound distance_hi = Bound::infinite();
  Proposition proposition;

  // Throws std::invalid_argument unless d_lo < d_hi (when finite).
  static SpatialDomain make(Proposition p, Rational lo = Rational(0), Bound hi = Bound::infinite());
  bool has_default_distance() const { return distance_lo == Rational(0) && distance_hi.is_infinite(); }

  friend bool operator==(const SpatialDomain&, const SpatialDomain&) = default;
};

enum class AggOp { Max, Min, Sum, Avg };
std::string_view agg_op_name(AggOp op);
std::optional<AggOp> agg_op_from_name(std::string_view s);

// ── Formula ─────────────────────────────────────────────────────────────────

namespace detail {
struct Node;
}

class Formula;

struct TrueNode {
  friend bool operator==(const TrueNode&, const TrueNode&) = default;
};
struct AtomNode;
struct NotNode;
struct AndNode;
struct UntilNode;
struct AlwaysNode;
struct EventuallyNode;
struct AggregateNode;
struct CountNode;
struct EverywhereNode;
struct SomewhereNode;

class Formula {
 public:
  // Default-constructed formula is `true`.
  Formula();

  const detail::Node& node() const { return *node_; }

  template <class T>
  const T* as() const;

  // True for Atom, Not, And, Until, Aggregate, Count nodes all the way down.
  bool is_core() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  friend struct FormulaFactory;
  explicit Formula(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

struct AtomNode {
  std::string variable;
  Comparator comparator = Comparator::Lt;
  Rational constant;
  std::string unit;
  friend bool operator==(const AtomNode&, const AtomNode&) = default;
};
struct NotNode {
  Formula operand;
  friend bool operator==(const NotNode&, const NotNode&) = default;
};
struct AndNode {
  Formula lhs, rhs;
  friend bool operator==(const AndNode&, const AndNode&) = default;
};
struct UntilNode {
  TimeInterval interval;
  Formula lhs, rhs;
  friend bool operator==(const UntilNode&, const UntilNode&) = default;
};
struct AlwaysNode {
  TimeInterval interval;
  Formula operand;
  friend bool operator==(const AlwaysNode&, const AlwaysNode&) = default;
};
struct EventuallyNode {
  TimeInterval interval;
  Formula operand;
  friend bool operator==(const EventuallyNode&, const EventuallyNode&) = default;
};
struct AggregateNode {
  AggOp op = AggOp::Avg;
  SpatialDomain domain;
  std::string variable;
  Comparator comparator = Comparator::Lt;
  Rational constant;
  std::string unit;
  friend bool operator==(const AggregateNode&, const AggregateNode&) = default;
};
struct CountNode {
  AggOp op = AggOp::Min;
  SpatialDomain domain;
  Formula operand;
  Comparator comparator = Comparator::Gt;
  Rational constant;
  friend bool operator==(const CountNode&, const CountNode&) = default;
};
struct EverywhereNode {
  SpatialDomain domain;
  Formula operand;
  friend bool operator==(const EverywhereNode&, const EverywhereNode&) = default;
};
struct SomewhereNode {
  SpatialDomain domain;
  Formula operand;
  friend bool operator==(const SomewhereNode&, const SomewhereNode&) = default;
};

namespace detail {
struct Node {
  std::variant<TrueNode, AtomNode, NotNode, AndNode, UntilNode, AlwaysNode, EventuallyNode,
               AggregateNode, CountNode, EverywhereNode, SomewhereNode>
      value;
};
}  // namespace detail

template <class T>
const T* Formula::as() const {
  return std::get_if<T>(&node_->value);
}

// ── Construction ────────────────────────────────────────────────────────────

Formula truth();
Formula atom(std::string variable, Comparator c, Rational constant, std::string unit = {});
Formula negation(Formula f);
Formula conjunction(Formula lhs, Formula rhs);
Formula until(TimeInterval i, Formula lhs, Formula rhs);
Formula always(TimeInterval i, Formula f);
Formula eventually(TimeInterval i, Formula f);
Formula aggregate(AggOp op, SpatialDomain d, std::string variable, Comparator c, Rational constant,
                  std::string unit = {});
Formula count(AggOp op, SpatialDomain d, Formula f, Comparator c, Rational constant);
Formula everywhere(SpatialDomain d, Formula f);
Formula somewhere(SpatialDomain d, Formula f);

// ── Transformations ─────────────────────────────────────────────────────────

// Rewrites derived operators into core grammar nodes:
//   Eventually_I f  -> true U_I f
//   Always_I f      -> !(true U_I !f)
//   Everywhere_D f  -> Count_min_D (f) > 0
//   Somewhere_D f   -> Count_max_D (f) > 0
// `true` itself is kept; it is the left operand of the until encoding.
Formula expand_derived(const Formula& f);

// Rewrites `x > c` to `!(x <= c)` and `x >= c` to `!(x < c)` for atoms,
// aggregates and counts, so only the {<, <=} comparators remain.
Formula to_strict_comparators(const Formula& f);

// ── Text ────────────────────────────────────────────────────────────────────

enum class PrintStyle { Ascii, Unicode };

// Canonical, deterministic rendering. Only the ASCII style is parseable.
std::string print_formula(const Formula& f, PrintStyle style = PrintStyle::Ascii);
std::string print_interval(const TimeInterval& i);
std::string print_domain(const SpatialDomain& d);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found);
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

Formula parse_formula(std::string_view text);

}  // namespace cityspec::sastl
