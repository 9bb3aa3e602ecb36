#include "kaplan/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "kaplan/error.hpp"

namespace kaplan {

namespace {
constexpr std::size_t kMaxDepth = 64;
}

class ExpressionParser {
 public:
  using Op = Expression::Op;

  explicit ExpressionParser(std::string_view text) : text_(text) {}

  std::vector<Expression::Instr> run() {
    expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected character");
    if (out_.empty()) fail("empty expression");
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError,
                what + " at position " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Op op, double v = 0.0) { out_.push_back({op, v}); }

  void expr() {
    term();
    while (true) {
      if (eat('+')) {
        term();
        emit(Op::Add);
      } else if (eat('-')) {
        term();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    while (true) {
      if (eat('*')) {
        unary();
        emit(Op::Mul);
      } else if (eat('/')) {
        unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (eat('-')) {
      unary();
      emit(Op::Neg);
    } else if (eat('+')) {
      unary();
    } else {
      power();
    }
  }

  void power() {
    primary();
    if (eat('^')) {
      unary();
      emit(Op::Pow);
    }
  }

  void primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (eat('(')) {
      expr();
      if (!eat(')')) fail("expected ')'");
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const char* first = text_.data() + pos_;
      const auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(), v);
      if (ec != std::errc{}) fail("malformed number");
      pos_ += static_cast<std::size_t>(ptr - first);
      emit(Op::Const, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "u") {
        emit(Op::Var);
        return;
      }
      Op fn;
      if (name == "exp") fn = Op::Exp;
      else if (name == "log") fn = Op::Log;
      else if (name == "sqrt") fn = Op::Sqrt;
      else {
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
      }
      if (!eat('(')) fail("expected '(' after function name");
      expr();
      if (!eat(')')) fail("expected ')'");
      emit(fn);
      return;
    }
    fail("unexpected character");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Expression::Instr> out_;
};

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  e.program_ = ExpressionParser(text).run();
  std::size_t depth = 0;
  for (const Instr& in : e.program_) {
    if (in.op == Op::Const || in.op == Op::Var) {
      if (++depth > kMaxDepth) throw Error(ErrorCode::ParseError, "expression nesting too deep");
    } else if (in.op == Op::Add || in.op == Op::Sub || in.op == Op::Mul || in.op == Op::Div || in.op == Op::Pow) {
      --depth;
    }
  }
  return e;
}

double Expression::operator()(double u) const {
  if (program_.empty()) return 0.0;
  double stack[kMaxDepth];
  std::size_t top = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::Const: stack[top++] = in.value; break;
      case Op::Var: stack[top++] = u; break;
      case Op::Add: --top; stack[top - 1] += stack[top]; break;
      case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::Div: --top; stack[top - 1] /= stack[top]; break;
      case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case Op::Log: stack[top - 1] = std::log(stack[top - 1]); break;
      case Op::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace kaplan
