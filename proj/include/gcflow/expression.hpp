#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gcflow {

/// Closed-form scalar expression in named variables.
///
/// Grammar: + - * / ^ (right-assoc power), unary minus, parentheses, numeric
/// literals, and the functions cosh sinh tanh exp log sin cos sqrt abs.
class Expression {
public:
  Expression() = default;

  /// Throws Error(Validation) with the offending position on a bad parse or
  /// an identifier that is neither a variable nor a known function.
  static Expression parse(const std::string& text, std::span<const std::string> variables);

  double eval(std::span<const double> values) const;

  bool empty() const { return root_ == nullptr; }
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace gcflow
