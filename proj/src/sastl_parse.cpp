// sastl_parse.cpp : recursive-descent parser for the canonical ASCII grammar

#include <cctype>

#include "cityspec/sastl.hpp"

namespace cityspec::sastl {

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
    : std::runtime_error([&] {
        std::string msg = "parse error at offset " + std::to_string(offset) + ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
          if (i) msg += ", ";
          msg += expected[i];
        }
        msg += "; found " + found;
        return msg;
      }()),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

enum class Tok {
  End, Word, String, Keyword, Cmp,
  LParen, RParen, LBrack, RBrack, LBrace, RBrace, Comma, Amp, Bar, Bang,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool reserved(char c) {
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

bool is_keyword(std::string_view w) {
  static constexpr std::string_view kPlain[] = {"Always_", "Eventually_", "U_", "Everywhere_", "Somewhere_"};
  for (auto k : kPlain)
    if (w == k) return true;
  for (std::string_view prefix : {std::string_view("Agg_"), std::string_view("Count_")}) {
    if (w.size() > prefix.size() && w.substr(0, prefix.size()) == prefix && w.back() == '_') {
      auto op = w.substr(prefix.size(), w.size() - prefix.size() - 1);
      if (agg_op_from_name(op)) return true;
    }
  }
  return false;
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    auto single = [&](Tok t) {
      out.push_back({t, std::string(1, c), start});
      ++i;
    };
    switch (c) {
      case '(': single(Tok::LParen); continue;
      case ')': single(Tok::RParen); continue;
      case '[': single(Tok::LBrack); continue;
      case ']': single(Tok::RBrack); continue;
      case '{': single(Tok::LBrace); continue;
      case '}': single(Tok::RBrace); continue;
      case ',': single(Tok::Comma); continue;
      case '&': single(Tok::Amp); continue;
      case '|': single(Tok::Bar); continue;
      case '!': single(Tok::Bang); continue;
      case '<':
      case '>': {
        std::string op(1, c);
        ++i;
        if (i < s.size() && s[i] == '=') {
          op += '=';
          ++i;
        }
        out.push_back({Tok::Cmp, op, start});
        continue;
      }
      case '=':
        throw ParseError(start, {"comparator"}, "'='");
      case '"': {
        ++i;
        std::string text;
        bool closed = false;
        while (i < s.size()) {
          if (s[i] == '\\' && i + 1 < s.size()) {
            text += s[i + 1];
            i += 2;
          } else if (s[i] == '"') {
            ++i;
            closed = true;
            break;
          } else {
            text += s[i++];
          }
        }
        if (!closed) throw ParseError(s.size(), {"'\"'"}, "end of input");
        out.push_back({Tok::String, std::move(text), start});
        continue;
      }
      default:
        break;
    }
    while (i < s.size() && !reserved(s[i])) ++i;
    std::string word(s.substr(start, i - start));
    bool keyword = i < s.size() && (s[i] == '[' || s[i] == '{') && is_keyword(word);
    out.push_back({keyword ? Tok::Keyword : Tok::Word, std::move(word), start});
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  Formula parse() {
    if (peek().kind == Tok::End) fail({"formula"});
    Formula f = until_level();
    expect(Tok::End, "end of input");
    return f;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  Token next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw ParseError(peek().offset, std::move(expected), describe(peek()));
  }

  Token expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail({what});
    return next();
  }

  // formula := conj ("U_" interval conj)?
  Formula until_level() {
    Formula lhs = conj_level();
    if (peek().kind == Tok::Keyword && peek().text == "U_") {
      next();
      TimeInterval i = interval();
      Formula rhs = conj_level();
      if (peek().kind == Tok::Keyword && peek().text == "U_")
        fail({"'&'", "')'", "end of input"});  // until is non-associative
      return until(std::move(i), std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  // conj := unary ("&" unary)*
  Formula conj_level() {
    Formula lhs = unary();
    while (peek().kind == Tok::Amp) {
      next();
      lhs = conjunction(std::move(lhs), unary());
    }
    return lhs;
  }

  Formula unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Bang:
        next();
        return negation(unary());
      case Tok::LParen: {
        next();
        Formula f = until_level();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Keyword: return keyword_form();
      case Tok::Word:
        if (t.text == "true" && peek(1).kind != Tok::Word && peek(1).kind != Tok::Cmp) {
          next();
          return truth();
        }
        return atom_form();
      case Tok::String: return atom_form();
      default:
        fail({"'!'", "'('", "operator", "variable", "true"});
    }
  }

  Formula keyword_form() {
    Token kw = next();
    const std::string& k = kw.text;
    if (k == "Always_") {
      TimeInterval i = interval();
      return always(std::move(i), unary());
    }
    if (k == "Eventually_") {
      TimeInterval i = interval();
      return eventually(std::move(i), unary());
    }
    if (k == "Everywhere_") {
      SpatialDomain d = domain();
      return everywhere(std::move(d), unary());
    }
    if (k == "Somewhere_") {
      SpatialDomain d = domain();
      return somewhere(std::move(d), unary());
    }
    if (k.rfind("Agg_", 0) == 0) {
      AggOp op = *agg_op_from_name(k.substr(4, k.size() - 5));
      SpatialDomain d = domain();
      std::string var = name();
      Comparator c = comparator();
      Rational value = number();
      std::string u = unit();
      return aggregate(op, std::move(d), std::move(var), c, std::move(value), std::move(u));
    }
    if (k.rfind("Count_", 0) == 0) {
      AggOp op = *agg_op_from_name(k.substr(6, k.size() - 7));
      SpatialDomain d = domain();
      expect(Tok::LParen, "'('");
      Formula inner = until_level();
      expect(Tok::RParen, "')'");
      Comparator c = comparator();
      Rational value = number();
      return count(op, std::move(d), std::move(inner), c, std::move(value));
    }
    // U_ in operand position
    throw ParseError(kw.offset, {"formula"}, "'" + k + "'");
  }

  Formula atom_form() {
    std::string var = name();
    Comparator c = comparator();
    Rational value = number();
    std::string u = unit();
    return atom(std::move(var), c, std::move(value), std::move(u));
  }

  std::string name() {
    if (peek().kind == Tok::String) return next().text;
    if (peek().kind != Tok::Word) fail({"variable"});
    std::string out = next().text;
    while (peek().kind == Tok::Word) out += " " + next().text;
    return out;
  }

  std::string unit() {
    if (peek().kind == Tok::String) return next().text;
    std::string out;
    while (peek().kind == Tok::Word) {
      if (!out.empty()) out += ' ';
      out += next().text;
    }
    return out;
  }

  Comparator comparator() {
    if (peek().kind != Tok::Cmp) fail({"'<'", "'<='", "'>'", "'>='"});
    return *comparator_from_symbol(next().text);
  }

  Rational number() {
    if (peek().kind != Tok::Word) fail({"number"});
    auto r = Rational::parse(peek().text);
    if (!r) fail({"number"});
    next();
    return *r;
  }

  Bound upper_bound() {
    if (peek().kind == Tok::Word && peek().text == "inf") {
      next();
      expect(Tok::RParen, "')'");
      return Bound::infinite();
    }
    Rational hi = number();
    expect(Tok::RBrack, "']'");
    return Bound::finite(std::move(hi));
  }

  TimeInterval interval() {
    std::size_t at = peek().offset;
    expect(Tok::LBrack, "'['");
    Rational lo = number();
    expect(Tok::Comma, "','");
    Bound hi = upper_bound();
    try {
      return TimeInterval::make(std::move(lo), std::move(hi));
    } catch (const std::invalid_argument& e) {
      throw ParseError(at, {"0 <= lo <= hi"}, e.what());
    }
  }

  SpatialDomain domain() {
    std::size_t at = peek().offset;
    expect(Tok::LBrace, "'{'");
    Proposition p = Proposition::truth();
    Rational lo{0};
    Bound hi = Bound::infinite();
    bool has_distance = false;
    if (peek().kind == Tok::LBrack) {
      has_distance = true;
    } else {
      p = prop_or();
      if (peek().kind == Tok::Amp && peek(1).kind == Tok::LBrack) {
        next();
        has_distance = true;
      }
    }
    if (has_distance) {
      expect(Tok::LBrack, "'['");
      lo = number();
      expect(Tok::Comma, "','");
      hi = upper_bound();
    }
    expect(Tok::RBrace, "'}'");
    try {
      return SpatialDomain::make(std::move(p), std::move(lo), std::move(hi));
    } catch (const std::invalid_argument& e) {
      throw ParseError(at, {"d1 < d2"}, e.what());
    }
  }

  Proposition prop_or() {
    Proposition lhs = prop_and();
    while (peek().kind == Tok::Bar) {
      next();
      lhs = Proposition::make_or(std::move(lhs), prop_and());
    }
    return lhs;
  }

  Proposition prop_and() {
    Proposition lhs = prop_unary();
    while (peek().kind == Tok::Amp && peek(1).kind != Tok::LBrack) {
      next();
      lhs = Proposition::make_and(std::move(lhs), prop_unary());
    }
    return lhs;
  }

  Proposition prop_unary() {
    switch (peek().kind) {
      case Tok::Bang:
        next();
        return Proposition::make_not(prop_unary());
      case Tok::LParen: {
        next();
        Proposition p = prop_or();
        expect(Tok::RParen, "')'");
        return p;
      }
      case Tok::String: return Proposition::make_label(next().text);
      case Tok::Word: {
        if (peek().text == "true" && peek(1).kind != Tok::Word) {
          next();
          return Proposition::truth();
        }
        std::string label = next().text;
        while (peek().kind == Tok::Word) label += " " + next().text;
        return Proposition::make_label(std::move(label));
      }
      default:
        fail({"location label", "'!'", "'('", "true"});
    }
  }
};

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).parse(); }

}  // namespace cityspec::sastl
