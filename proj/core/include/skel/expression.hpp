#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace skel {

namespace detail {
struct ExprNode;
}

/// Closed-form scalar expression over x1..xk.
///
/// Grammar: numbers, x1..xk (x is an alias of x1), the constants pi and e,
/// binary + - * / ^ (right associative), unary minus, parentheses and the
/// functions sqrt, exp, log, sin, cos, abs.
class Expression {
 public:
  Expression();  // the constant 0

  /// Throws ErrorKind::parse with the column of the offending token, or when a
  /// variable index exceeds `dimension`.
  static Expression parse(std::string_view text, int dimension);
  static Expression constant(double value);

  double evaluate(std::span<const double> x) const;
  /// Symbolic partial derivative with respect to x_{variable+1}.
  Expression derivative(int variable) const;
  std::string to_string() const;
  bool is_constant() const;

 private:
  explicit Expression(std::shared_ptr<const detail::ExprNode> root);
  std::shared_ptr<const detail::ExprNode> root_;
};

}  // namespace skel
