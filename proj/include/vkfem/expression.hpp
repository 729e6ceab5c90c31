#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "vkfem/forms.hpp"

namespace vkfem {

/// Arithmetic expression in the variables x and y.
///
/// Grammar, loosest binding first:
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' integer)*
///   primary := number | 'x' | 'y' | func '(' sum ')' | '(' sum ')'
/// with func one of abs, sqrt, sin, cos, exp. Binary operators associate to
/// the left, so x^2^3 is (x^2)^3 and -x^2 is -(x^2).
class Expression {
 public:
  /// Throws ParseError carrying the 0-based offset of the offending token.
  static Expression parse(std::string_view text);

  double evaluate(double x, double y) const;
  double operator()(double x, double y) const { return evaluate(x, y); }

  /// Fully parenthesized form; parsing it yields the same tree.
  std::string to_string() const;

  /// Total degree when the expression is a polynomial in x and y, else -1.
  int polynomial_degree() const;

  /// True when the expression is the literal constant zero.
  bool is_zero() const;

  ScalarField as_field() const;

  struct Node;

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

}  // namespace vkfem
