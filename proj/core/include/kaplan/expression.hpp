#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kaplan {

/// Arithmetic expression in one variable `u`: numbers, + - * / ^, unary minus,
/// parentheses and the functions exp, log, sqrt. `^` is right associative and
/// binds tighter than unary minus (-u^2 == -(u^2)).
class Expression {
 public:
  Expression() = default;
  /// Throws ParseError with the offending position.
  static Expression parse(std::string_view text);

  [[nodiscard]] double operator()(double u) const;
  [[nodiscard]] const std::string& text() const noexcept { return text_; }

 private:
  enum class Op : unsigned char { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt };
  struct Instr {
    Op op;
    double value;
  };
  friend class ExpressionParser;

  std::string text_;
  std::vector<Instr> program_;  // postfix
};

}  // namespace kaplan
