// ============================================================================
// sastl.cpp : formula construction, derived-operator expansion, printing
// ============================================================================

#include "cityspec/sastl.hpp"

#include <array>
#include <sstream>

namespace cityspec::sastl {

// ── Comparator ──────────────────────────────────────────────────────────────

Comparator flip(Comparator c) {
  switch (c) {
    case Comparator::Lt: return Comparator::Ge;
    case Comparator::Le: return Comparator::Gt;
    case Comparator::Gt: return Comparator::Le;
    case Comparator::Ge: return Comparator::Lt;
  }
  return c;
}

std::string_view symbol(Comparator c) {
  switch (c) {
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
  }
  return "?";
}

std::optional<Comparator> comparator_from_symbol(std::string_view s) {
  if (s == "<") return Comparator::Lt;
  if (s == "<=") return Comparator::Le;
  if (s == ">") return Comparator::Gt;
  if (s == ">=") return Comparator::Ge;
  return std::nullopt;
}

std::string_view comparator_name(Comparator c) {
  switch (c) {
    case Comparator::Lt: return "LT";
    case Comparator::Le: return "LE";
    case Comparator::Gt: return "GT";
    case Comparator::Ge: return "GE";
  }
  return "?";
}

std::optional<Comparator> comparator_from_name(std::string_view s) {
  if (s == "LT") return Comparator::Lt;
  if (s == "LE") return Comparator::Le;
  if (s == "GT") return Comparator::Gt;
  if (s == "GE") return Comparator::Ge;
  return std::nullopt;
}

std::string_view agg_op_name(AggOp op) {
  switch (op) {
    case AggOp::Max: return "max";
    case AggOp::Min: return "min";
    case AggOp::Sum: return "sum";
    case AggOp::Avg: return "avg";
  }
  return "?";
}

std::optional<AggOp> agg_op_from_name(std::string_view s) {
  if (s == "max") return AggOp::Max;
  if (s == "min") return AggOp::Min;
  if (s == "sum") return AggOp::Sum;
  if (s == "avg") return AggOp::Avg;
  return std::nullopt;
}

// ── Intervals ───────────────────────────────────────────────────────────────

TimeInterval TimeInterval::make(Rational lo, Bound hi) {
  if (lo < Rational(0)) throw std::invalid_argument("time interval lower bound is negative");
  if (hi.value && *hi.value < lo) throw std::invalid_argument("time interval upper bound below lower bound");
  return TimeInterval{std::move(lo), std::move(hi)};
}

SpatialDomain SpatialDomain::make(Proposition p, Rational lo, Bound hi) {
  if (hi.value && !(lo < *hi.value)) throw std::invalid_argument("spatial interval requires d1 < d2");
  return SpatialDomain{std::move(lo), std::move(hi), std::move(p)};
}

// ── Formula ─────────────────────────────────────────────────────────────────

struct FormulaFactory {
  template <class T>
  static Formula make(T node) {
    return Formula(std::make_shared<const detail::Node>(detail::Node{std::move(node)}));
  }
};

namespace {
const std::shared_ptr<const detail::Node>& true_node() {
  static const auto node = std::make_shared<const detail::Node>(detail::Node{TrueNode{}});
  return node;
}
}  // namespace

Formula::Formula() : node_(true_node()) {}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  return a.node_->value == b.node_->value;
}

bool Formula::is_core() const {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AtomNode> || std::is_same_v<T, AggregateNode> ||
                      std::is_same_v<T, TrueNode>) {
          return true;
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return n.operand.is_core();
        } else if constexpr (std::is_same_v<T, AndNode> || std::is_same_v<T, UntilNode>) {
          return n.lhs.is_core() && n.rhs.is_core();
        } else if constexpr (std::is_same_v<T, CountNode>) {
          return n.operand.is_core();
        } else {
          return false;
        }
      },
      node_->value);
}

Formula truth() { return Formula(); }
Formula atom(std::string variable, Comparator c, Rational constant, std::string unit) {
  return FormulaFactory::make(AtomNode{std::move(variable), c, std::move(constant), std::move(unit)});
}
Formula negation(Formula f) { return FormulaFactory::make(NotNode{std::move(f)}); }
Formula conjunction(Formula lhs, Formula rhs) { return FormulaFactory::make(AndNode{std::move(lhs), std::move(rhs)}); }
Formula until(TimeInterval i, Formula lhs, Formula rhs) {
  return FormulaFactory::make(UntilNode{std::move(i), std::move(lhs), std::move(rhs)});
}
Formula always(TimeInterval i, Formula f) { return FormulaFactory::make(AlwaysNode{std::move(i), std::move(f)}); }
Formula eventually(TimeInterval i, Formula f) {
  return FormulaFactory::make(EventuallyNode{std::move(i), std::move(f)});
}
Formula aggregate(AggOp op, SpatialDomain d, std::string variable, Comparator c, Rational constant,
                  std::string unit) {
  return FormulaFactory::make(
      AggregateNode{op, std::move(d), std::move(variable), c, std::move(constant), std::move(unit)});
}
Formula count(AggOp op, SpatialDomain d, Formula f, Comparator c, Rational constant) {
  return FormulaFactory::make(CountNode{op, std::move(d), std::move(f), c, std::move(constant)});
}
Formula everywhere(SpatialDomain d, Formula f) { return FormulaFactory::make(EverywhereNode{std::move(d), std::move(f)}); }
Formula somewhere(SpatialDomain d, Formula f) { return FormulaFactory::make(SomewhereNode{std::move(d), std::move(f)}); }

// ── Transformations ─────────────────────────────────────────────────────────

Formula expand_derived(const Formula& f) {
  return std::visit(
      [&](const auto& n) -> Formula {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TrueNode> || std::is_same_v<T, AtomNode> ||
                      std::is_same_v<T, AggregateNode>) {
          return f;
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return negation(expand_derived(n.operand));
        } else if constexpr (std::is_same_v<T, AndNode>) {
          return conjunction(expand_derived(n.lhs), expand_derived(n.rhs));
        } else if constexpr (std::is_same_v<T, UntilNode>) {
          return until(n.interval, expand_derived(n.lhs), expand_derived(n.rhs));
        } else if constexpr (std::is_same_v<T, EventuallyNode>) {
          return until(n.interval, truth(), expand_derived(n.operand));
        } else if constexpr (std::is_same_v<T, AlwaysNode>) {
          return negation(until(n.interval, truth(), negation(expand_derived(n.operand))));
        } else if constexpr (std::is_same_v<T, CountNode>) {
          return count(n.op, n.domain, expand_derived(n.operand), n.comparator, n.constant);
        } else if constexpr (std::is_same_v<T, EverywhereNode>) {
          return count(AggOp::Min, n.domain, expand_derived(n.operand), Comparator::Gt, Rational(0));
        } else {
          static_assert(std::is_same_v<T, SomewhereNode>);
          return count(AggOp::Max, n.domain, expand_derived(n.operand), Comparator::Gt, Rational(0));
        }
      },
      f.node().value);
}

Formula to_strict_comparators(const Formula& f) {
  auto strict = [](Comparator c) { return c == Comparator::Gt || c == Comparator::Ge ? flip(c) : c; };
  auto needs_not = [](Comparator c) { return c == Comparator::Gt || c == Comparator::Ge; };
  return std::visit(
      [&](const auto& n) -> Formula {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TrueNode>) {
          return f;
        } else if constexpr (std::is_same_v<T, AtomNode>) {
          if (!needs_not(n.comparator)) return f;
          return negation(atom(n.variable, strict(n.comparator), n.constant, n.unit));
        } else if constexpr (std::is_same_v<T, AggregateNode>) {
          if (!needs_not(n.comparator)) return f;
          return negation(aggregate(n.op, n.domain, n.variable, strict(n.comparator), n.constant, n.unit));
        } else if constexpr (std::is_same_v<T, CountNode>) {
          Formula inner = count(n.op, n.domain, to_strict_comparators(n.operand), strict(n.comparator), n.constant);
          return needs_not(n.comparator) ? negation(inner) : inner;
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return negation(to_strict_comparators(n.operand));
        } else if constexpr (std::is_same_v<T, AndNode>) {
          return conjunction(to_strict_comparators(n.lhs), to_strict_comparators(n.rhs));
        } else if constexpr (std::is_same_v<T, UntilNode>) {
          return until(n.interval, to_strict_comparators(n.lhs), to_strict_comparators(n.rhs));
        } else if constexpr (std::is_same_v<T, AlwaysNode>) {
          return always(n.interval, to_strict_comparators(n.operand));
        } else if constexpr (std::is_same_v<T, EventuallyNode>) {
          return eventually(n.interval, to_strict_comparators(n.operand));
        } else if constexpr (std::is_same_v<T, EverywhereNode>) {
          return everywhere(n.domain, to_strict_comparators(n.operand));
        } else {
          return somewhere(n.domain, to_strict_comparators(n.operand));
        }
      },
      f.node().value);
}

// ── Printing ────────────────────────────────────────────────────────────────

namespace {

bool is_reserved(char c) {
  switch (c) {
    case ' ': case '\t': case '\n': case '\r':
    case '(': case ')': case '[': case ']': case '{': case '}':
    case '&': case '|': case '!': case '<': case '>': case '=':
    case ',': case '"':
      return true;
    default:
      return false;
  }
}

// Bare words are runs of non-reserved bytes separated by single spaces. Any
// text that would not read back the same way is emitted as a quoted string.
bool needs_quotes(std::string_view text) {
  if (text.empty()) return true;
  if (text.front() == ' ' || text.back() == ' ') return true;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(' ', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view word = text.substr(start, end - start);
    if (word.empty() || word == "true" || word == "inf") return true;
    for (char c : word)
      if (is_reserved(c)) return true;
    start = end + 1;
  }
  return false;
}

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string text_token(std::string_view text) {
  return needs_quotes(text) ? quote(text) : std::string(text);
}

struct Printer {
  PrintStyle style;
  std::ostringstream out;

  bool unicode() const { return style == PrintStyle::Unicode; }

  std::string cmp(Comparator c) const {
    if (!unicode()) return std::string(symbol(c));
    switch (c) {
      case Comparator::Le: return "≤";
      case Comparator::Ge: return "≥";
      default: return std::string(symbol(c));
    }
  }

  void interval(const TimeInterval& i) {
    out << '[' << i.lo.to_string() << ',';
    if (i.hi.is_infinite())
      out << (unicode() ? "+∞)" : "inf)");
    else
      out << i.hi.value->to_string() << ']';
  }

  void proposition(const Proposition& p, int min_prec) {
    // precedence: or 1, and 2, not/atomic 3
    int prec = p.kind == Proposition::Kind::Or ? 1 : p.kind == Proposition::Kind::And ? 2 : 3;
    bool parens = prec < min_prec;
    if (parens) out << '(';
    switch (p.kind) {
      case Proposition::Kind::True: out << (unicode() ? "⊤" : "true"); break;
      case Proposition::Kind::Label: out << text_token(p.label); break;
      case Proposition::Kind::Not:
        out << (unicode() ? "¬" : "!");
        proposition(p.operands[0], 3);
        break;
      case Proposition::Kind::Or:
        proposition(p.operands[0], 1);
        out << (unicode() ? " ∨ " : " | ");
        proposition(p.operands[1], 2);
        break;
      case Proposition::Kind::And:
        proposition(p.operands[0], 2);
        out << (unicode() ? " ∧ " : " & ");
        proposition(p.operands[1], 3);
        break;
    }
    if (parens) out << ')';
  }

  void domain(const SpatialDomain& d) {
    out << '{';
    bool default_distance = d.has_default_distance();
    bool trivial_prop = d.proposition.kind == Proposition::Kind::True;
    if (!trivial_prop || default_distance) {
      // A bare conjunction would swallow the distance separator; wrap it.
      proposition(d.proposition, default_distance ? 1 : 3);
    }
    if (!default_distance) {
      if (!trivial_prop) out << (unicode() ? " ∧ " : " & ");
      out << '[' << d.distance_lo.to_string() << ',';
      if (d.distance_hi.is_infinite())
        out << (unicode() ? "+∞)" : "inf)");
      else
        out << d.distance_hi.value->to_string() << ']';
    }
    out << '}';
  }

  static int precedence(const Formula& f) {
    if (f.as<UntilNode>()) return 1;
    if (f.as<AndNode>()) return 2;
    return 3;
  }

  void constant_and_unit(Comparator c, const Rational& k, const std::string& unit) {
    out << ' ' << cmp(c) << ' ' << k.to_string();
    if (!unit.empty()) out << ' ' << (unicode() ? unit : text_token(unit));
  }

  void formula(const Formula& f, int min_prec) {
    bool parens = precedence(f) < min_prec;
    if (parens) out << '(';
    std::visit([&](const auto& n) { node(n); }, f.node().value);
    if (parens) out << ')';
  }

  void node(const TrueNode&) { out << (unicode() ? "⊤" : "true"); }
  void node(const AtomNode& n) {
    out << (unicode() ? n.variable : text_token(n.variable));
    constant_and_unit(n.comparator, n.constant, n.unit);
  }
  void node(const NotNode& n) {
    out << (unicode() ? "¬" : "!");
    bool bare = n.operand.as<TrueNode>() || n.operand.as<NotNode>();
    if (bare) {
      formula(n.operand, 3);
    } else {
      out << '(';
      formula(n.operand, 0);
      out << ')';
    }
  }
  void node(const AndNode& n) {
    formula(n.lhs, 2);
    out << (unicode() ? " ∧ " : " & ");
    formula(n.rhs, 3);
  }
  void node(const UntilNode& n) {
    formula(n.lhs, 2);
    out << (unicode() ? " U" : " U_");
    interval(n.interval);
    out << ' ';
    formula(n.rhs, 2);
  }
  void node(const AlwaysNode& n) {
    out << (unicode() ? "□" : "Always_");
    interval(n.interval);
    out << ' ';
    formula(n.operand, 3);
  }
  void node(const EventuallyNode& n) {
    out << (unicode() ? "◇" : "Eventually_");
    interval(n.interval);
    out << ' ';
    formula(n.operand, 3);
  }
  void node(const AggregateNode& n) {
    out << (unicode() ? "A^" : "Agg_") << agg_op_name(n.op) << '_';
    domain(n.domain);
    out << ' ' << (unicode() ? n.variable : text_token(n.variable));
    constant_and_unit(n.comparator, n.constant, n.unit);
  }
  void node(const CountNode& n) {
    out << (unicode() ? "C^" : "Count_") << agg_op_name(n.op) << '_';
    domain(n.domain);
    out << " (";
    formula(n.operand, 0);
    out << ") " << cmp(n.comparator) << ' ' << n.constant.to_string();
  }
  void node(const EverywhereNode& n) {
    out << (unicode() ? "⊡" : "Everywhere_");
    domain(n.domain);
    out << ' ';
    formula(n.operand, 3);
  }
  void node(const SomewhereNode& n) {
    out << (unicode() ? "⟐" : "Somewhere_");
    domain(n.domain);
    out << ' ';
    formula(n.operand, 3);
  }
};

}  // namespace

std::string print_formula(const Formula& f, PrintStyle style) {
  Printer p{style, {}};
  p.formula(f, 0);
  return p.out.str();
}

std::string print_interval(const TimeInterval& i) {
  Printer p{PrintStyle::Ascii, {}};
  p.interval(i);
  return p.out.str();
}

std::string print_domain(const SpatialDomain& d) {
  Printer p{PrintStyle::Ascii, {}};
  p.domain(d);
  return p.out.str();
}

}  // namespace cityspec::sastl
