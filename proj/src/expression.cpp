#include "gcflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>

#include "gcflow/errors.hpp"

namespace gcflow {

namespace {

using UnaryFn = double (*)(double);

const std::map<std::string, UnaryFn>& function_table() {
  static const std::map<std::string, UnaryFn> table = {
      {"cosh", [](double t) { return std::cosh(t); }},
      {"sinh", [](double t) { return std::sinh(t); }},
      {"tanh", [](double t) { return std::tanh(t); }},
      {"exp", [](double t) { return std::exp(t); }},
      {"log", [](double t) { return std::log(t); }},
      {"sin", [](double t) { return std::sin(t); }},
      {"cos", [](double t) { return std::cos(t); }},
      {"sqrt", [](double t) { return std::sqrt(t); }},
      {"abs", [](double t) { return std::fabs(t); }},
  };
  return table;
}

enum class Op { Add, Sub, Mul, Div, Pow, Neg, Call, Var, Lit };

}  // namespace

struct Expression::Node {
  Op op = Op::Lit;
  double literal = 0.0;
  int var_index = -1;
  UnaryFn fn = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(std::span<const double> v) const {
    switch (op) {
      case Op::Lit: return literal;
      case Op::Var: return v[static_cast<std::size_t>(var_index)];
      case Op::Neg: return -lhs->eval(v);
      case Op::Call: return fn(lhs->eval(v));
      case Op::Add: return lhs->eval(v) + rhs->eval(v);
      case Op::Sub: return lhs->eval(v) - rhs->eval(v);
      case Op::Mul: return lhs->eval(v) * rhs->eval(v);
      case Op::Div: return lhs->eval(v) / rhs->eval(v);
      case Op::Pow: return std::pow(lhs->eval(v), rhs->eval(v));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

class Parser {
public:
  Parser(const std::string& text, std::span<const std::string> vars) : text_(text), vars_(vars) {}

  NodePtr run() {
    NodePtr e = sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::Validation,
                "expression '" + text_ + "' at position " + std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  NodePtr sum() {
    NodePtr e = term();
    for (;;) {
      if (accept('+'))
        e = make(Op::Add, e, term());
      else if (accept('-'))
        e = make(Op::Sub, e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (accept('*'))
        e = make(Op::Mul, e, factor());
      else if (accept('/'))
        e = make(Op::Div, e, factor());
      else
        return e;
    }
  }

  NodePtr factor() {
    if (accept('-')) return make(Op::Neg, factor());
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, base, factor());  // right-assoc
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = sum();
      if (!accept(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    try {
      auto n = make(Op::Lit);
      const_cast<Expression::Node&>(*n).literal = std::stod(text_.substr(start, pos_ - start));
      return n;
    } catch (const std::exception&) {
      fail("invalid numeric literal");
    }
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (name == "pi") {
      auto n = make(Op::Lit);
      const_cast<Expression::Node&>(*n).literal = 3.14159265358979323846;
      return n;
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        auto n = make(Op::Var);
        const_cast<Expression::Node&>(*n).var_index = static_cast<int>(i);
        return n;
      }
    }
    auto it = function_table().find(name);
    if (it != function_table().end()) {
      if (!accept('(')) fail("function '" + name + "' requires '('");
      NodePtr arg = sum();
      if (!accept(')')) fail("missing ')' after argument of '" + name + "'");
      auto n = make(Op::Call, arg);
      const_cast<Expression::Node&>(*n).fn = it->second;
      return n;
    }
    fail("unknown identifier '" + name + "'");
  }

  const std::string& text_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, std::span<const std::string> variables) {
  Expression e;
  e.root_ = Parser(text, variables).run();
  e.text_ = text;
  return e;
}

double Expression::eval(std::span<const double> values) const {
  return root_->eval(values);
}

}  // namespace gcflow
