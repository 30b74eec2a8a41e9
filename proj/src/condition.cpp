#include "etlgen/condition.hpp"

#include <cctype>

namespace etlgen {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Gt:
      return ">";
    case CompareOp::Lt:
      return "<";
    case CompareOp::Ge:
      return ">=";
    case CompareOp::Le:
      return "<=";
    case CompareOp::Eq:
      return "=";
    case CompareOp::Ne:
      return "<>";
    case CompareOp::Like:
      return "like";
  }
  return "?";
}

bool ConditionBinary::operator==(const ConditionBinary& other) const {
  return op == other.op && *lhs == *other.lhs && *rhs == *other.rhs;
}

Condition Condition::atom(CompareOp op, Literal value) {
  return Condition{ConditionAtom{op, std::move(value)}};
}

Condition Condition::both(Condition lhs, Condition rhs) {
  return Condition{ConditionBinary{LogicOp::And, std::make_shared<const Condition>(std::move(lhs)),
                                   std::make_shared<const Condition>(std::move(rhs))}};
}

Condition Condition::either(Condition lhs, Condition rhs) {
  return Condition{ConditionBinary{LogicOp::Or, std::make_shared<const Condition>(std::move(lhs)),
                                   std::make_shared<const Condition>(std::move(rhs))}};
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Condition parse() {
    Condition c = expr();
    skip_space();
    if (pos_ != text_.size()) {
      fail("unexpected trailing input");
    }
    return c;
  }

 private:
  [[noreturn]] void fail(const std::string& detail) const { throw ConditionSyntaxError(pos_, detail); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
      ++pos_;
    }
  }

  bool consume(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  Condition expr() {
    Condition lhs = term();
    while (consume("||")) {
      lhs = Condition::either(std::move(lhs), term());
    }
    return lhs;
  }

  Condition term() {
    Condition lhs = atom();
    while (consume("&&")) {
      lhs = Condition::both(std::move(lhs), atom());
    }
    return lhs;
  }

  Condition atom() {
    skip_space();
    if (consume("(")) {
      Condition inner = expr();
      if (!consume(")")) {
        fail("expected ')'");
      }
      return inner;
    }
    const CompareOp op = compare_op();
    if (!consume("(")) {
      fail("expected '(' after operator");
    }
    Literal value = literal();
    if (!consume(")")) {
      fail("expected ')' after value");
    }
    return Condition::atom(op, std::move(value));
  }

  CompareOp compare_op() {
    // Longest match first.
    if (consume("<>")) return CompareOp::Ne;
    if (consume(">=")) return CompareOp::Ge;
    if (consume("<=")) return CompareOp::Le;
    if (consume(">")) return CompareOp::Gt;
    if (consume("<")) return CompareOp::Lt;
    if (consume("=")) return CompareOp::Eq;
    if (consume("like")) return CompareOp::Like;
    fail("expected one of > < >= <= = <> like");
  }

  Literal literal() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '\'') {
      ++pos_;
      std::string out;
      while (true) {
        if (pos_ >= text_.size()) {
          fail("unterminated string literal");
        }
        if (text_[pos_] == '\'') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
            out += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          return out;
        }
        out += text_[pos_++];
      }
    }
    const std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      ++pos_;
    }
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '.')) {
      ++pos_;
    }
    auto number = Decimal::parse(text_.substr(start, pos_ - start));
    if (!number) {
      pos_ = start;
      fail("expected a decimal numeral or a quoted string");
    }
    return *number;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const Condition& c, std::string& out);

void print_child(const Condition& child, LogicOp parent, bool right, std::string& out) {
  bool parens = false;
  if (const auto* b = std::get_if<ConditionBinary>(&child.node)) {
    // An Or under an And needs parentheses; so does a same-operator right
    // child, because the grammar is left-associative.
    parens = (parent == LogicOp::And && b->op == LogicOp::Or) || (right && b->op == parent);
  }
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const Condition& c, std::string& out) {
  if (const auto* a = std::get_if<ConditionAtom>(&c.node)) {
    out += to_string(a->op);
    out += '(';
    if (const auto* d = std::get_if<Decimal>(&a->value)) {
      out += d->to_string();
    } else {
      out += quote_string(std::get<std::string>(a->value));
    }
    out += ')';
    return;
  }
  const auto& b = std::get<ConditionBinary>(c.node);
  print_child(*b.lhs, b.op, false, out);
  out += b.op == LogicOp::And ? " && " : " || ";
  print_child(*b.rhs, b.op, true, out);
}

}  // namespace

Condition parse_condition(std::string_view text) { return Parser(text).parse(); }

std::string print_condition(const Condition& c) {
  std::string out;
  print(c, out);
  return out;
}

std::string quote_string(std::string_view text) {
  std::string out = "'";
  for (char ch : text) {
    if (ch == '\'') {
      out += '\'';
    }
    out += ch;
  }
  out += '\'';
  return out;
}

namespace {

void collect_type_errors(const Condition& c, DataType type, std::vector<std::string>& out) {
  if (const auto* b = std::get_if<ConditionBinary>(&c.node)) {
    collect_type_errors(*b->lhs, type, out);
    collect_type_errors(*b->rhs, type, out);
    return;
  }
  const auto& atom = std::get<ConditionAtom>(c.node);
  const bool numeric = std::holds_alternative<Decimal>(atom.value);
  switch (type) {
    case DataType::Number:
      if (!numeric) out.push_back("a number column is compared with a string");
      if (atom.op == CompareOp::Like) out.push_back("like is not applicable to a number column");
      break;
    case DataType::String:
      if (numeric) out.push_back("a string column is compared with a number");
      break;
    case DataType::Date:
      if (numeric || !Date::parse(std::get<std::string>(atom.value))) {
        out.push_back("a date column needs a quoted date literal");
      }
      if (atom.op == CompareOp::Like) out.push_back("like is not applicable to a date column");
      break;
  }
}

}  // namespace

std::vector<std::string> condition_type_errors(const Condition& c, DataType column_type) {
  std::vector<std::string> out;
  collect_type_errors(c, column_type, out);
  return out;
}

}  // namespace etlgen
