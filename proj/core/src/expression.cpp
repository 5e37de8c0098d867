#include "skel/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "skel/csv.hpp"
#include "skel/error.hpp"

namespace skel {
namespace detail {

enum class Op { constant, variable, neg, add, sub, mul, div, pow, sqrt, exp, log, sin, cos, abs, sign };

struct ExprNode {
  Op op;
  double value = 0.0;
  int var = 0;
  std::shared_ptr<const ExprNode> a, b;
};

}  // namespace detail

namespace {

using detail::ExprNode;
using detail::Op;
using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  return std::make_shared<const ExprNode>(ExprNode{op, 0.0, 0, std::move(a), std::move(b)});
}
NodePtr num(double v) { return std::make_shared<const ExprNode>(ExprNode{Op::constant, v, 0, {}, {}}); }
NodePtr var(int i) { return std::make_shared<const ExprNode>(ExprNode{Op::variable, 0.0, i, {}, {}}); }

bool is_num(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }
bool is_const(const NodePtr& n) { return n->op == Op::constant; }

NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return num(a->value + b->value);
  if (is_num(a, 0.0)) return b;
  if (is_num(b, 0.0)) return a;
  return make(Op::add, std::move(a), std::move(b));
}
NodePtr neg(NodePtr a) {
  if (is_const(a)) return num(-a->value);
  return make(Op::neg, std::move(a));
}
NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return num(a->value - b->value);
  if (is_num(b, 0.0)) return a;
  if (is_num(a, 0.0)) return neg(std::move(b));
  return make(Op::sub, std::move(a), std::move(b));
}
NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return num(a->value * b->value);
  if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
  if (is_num(a, 1.0)) return b;
  if (is_num(b, 1.0)) return a;
  return make(Op::mul, std::move(a), std::move(b));
}
NodePtr div(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0)) return num(0.0);
  if (is_num(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return num(a->value / b->value);
  return make(Op::div, std::move(a), std::move(b));
}
NodePtr pow(NodePtr a, NodePtr b) {
  if (is_num(b, 0.0)) return num(1.0);
  if (is_num(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return num(std::pow(a->value, b->value));
  return make(Op::pow, std::move(a), std::move(b));
}
NodePtr fn(Op op, NodePtr a) { return make(op, std::move(a)); }

double eval(const ExprNode& n, std::span<const double> x) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return x[static_cast<std::size_t>(n.var)];
    case Op::neg: return -eval(*n.a, x);
    case Op::add: return eval(*n.a, x) + eval(*n.b, x);
    case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
    case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::div: return eval(*n.a, x) / eval(*n.b, x);
    case Op::pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
    case Op::sqrt: return std::sqrt(eval(*n.a, x));
    case Op::exp: return std::exp(eval(*n.a, x));
    case Op::log: return std::log(eval(*n.a, x));
    case Op::sin: return std::sin(eval(*n.a, x));
    case Op::cos: return std::cos(eval(*n.a, x));
    case Op::abs: return std::fabs(eval(*n.a, x));
    case Op::sign: {
      const double v = eval(*n.a, x);
      return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    }
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, int v) {
  switch (n->op) {
    case Op::constant: return num(0.0);
    case Op::variable: return num(n->var == v ? 1.0 : 0.0);
    case Op::neg: return neg(diff(n->a, v));
    case Op::add: return add(diff(n->a, v), diff(n->b, v));
    case Op::sub: return sub(diff(n->a, v), diff(n->b, v));
    case Op::mul: return add(mul(diff(n->a, v), n->b), mul(n->a, diff(n->b, v)));
    case Op::div:
      return div(sub(mul(diff(n->a, v), n->b), mul(n->a, diff(n->b, v))), mul(n->b, n->b));
    case Op::pow: {
      const NodePtr da = diff(n->a, v);
      if (is_const(n->b))
        return mul(mul(n->b, pow(n->a, num(n->b->value - 1.0))), da);
      const NodePtr db = diff(n->b, v);
      return mul(n, add(mul(db, fn(Op::log, n->a)), div(mul(n->b, da), n->a)));
    }
    case Op::sqrt: return div(diff(n->a, v), mul(num(2.0), n));
    case Op::exp: return mul(n, diff(n->a, v));
    case Op::log: return div(diff(n->a, v), n->a);
    case Op::sin: return mul(fn(Op::cos, n->a), diff(n->a, v));
    case Op::cos: return neg(mul(fn(Op::sin, n->a), diff(n->a, v)));
    case Op::abs: return mul(fn(Op::sign, n->a), diff(n->a, v));
    case Op::sign: return num(0.0);
  }
  return num(0.0);
}

std::string print(const ExprNode& n) {
  auto bin = [&](const char* op) { return "(" + print(*n.a) + " " + op + " " + print(*n.b) + ")"; };
  auto call = [&](const char* f) { return std::string(f) + "(" + print(*n.a) + ")"; };
  switch (n.op) {
    case Op::constant: return format_number(n.value);
    case Op::variable: return "x" + std::to_string(n.var + 1);
    case Op::neg: return "(-" + print(*n.a) + ")";
    case Op::add: return bin("+");
    case Op::sub: return bin("-");
    case Op::mul: return bin("*");
    case Op::div: return bin("/");
    case Op::pow: return bin("^");
    case Op::sqrt: return call("sqrt");
    case Op::exp: return call("exp");
    case Op::log: return call("log");
    case Op::sin: return call("sin");
    case Op::cos: return call("cos");
    case Op::abs: return call("abs");
    case Op::sign: return call("sign");
  }
  return "?";
}

// Recursive descent:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view text, int dimension) : text_(text), dim_(dimension) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::parse, "expression '" + std::string(text_) + "' column " +
                                      std::to_string(pos_ + 1) + ": " + what);
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

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = add(lhs, term());
      else if (accept('-')) lhs = sub(lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = mul(lhs, unary());
      else if (accept('/')) lhs = div(lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) return neg(unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return pow(base, unary());
    return base;
  }
  NodePtr atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(text_.substr(pos_));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - rest.c_str());
      return num(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string id(text_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        static const std::pair<const char*, Op> functions[] = {
            {"sqrt", Op::sqrt}, {"exp", Op::exp}, {"log", Op::log},
            {"sin", Op::sin},   {"cos", Op::cos}, {"abs", Op::abs}};
        for (const auto& [name, op] : functions) {
          if (id == name) {
            ++pos_;
            NodePtr arg = expr();
            if (!accept(')')) fail("expected ')' after argument of " + id);
            return fn(op, arg);
          }
        }
        pos_ = start;
        fail("unknown function '" + id + "'");
      }
      if (id == "pi") return num(std::numbers::pi);
      if (id == "e") return num(std::numbers::e);
      if (id == "x") return var(0);
      if (id.size() > 1 && id[0] == 'x' &&
          id.find_first_not_of("0123456789", 1) == std::string::npos) {
        const int index = std::atoi(id.c_str() + 1);
        if (index < 1 || index > dim_) {
          pos_ = start;
          fail("variable " + id + " outside x1..x" + std::to_string(dim_));
        }
        return var(index - 1);
      }
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(num(0.0)) {}
Expression::Expression(std::shared_ptr<const detail::ExprNode> root) : root_(std::move(root)) {}

Expression Expression::parse(std::string_view text, int dimension) {
  return Expression(Parser(text, dimension).run());
}

Expression Expression::constant(double value) { return Expression(num(value)); }

double Expression::evaluate(std::span<const double> x) const { return eval(*root_, x); }

Expression Expression::derivative(int variable) const { return Expression(diff(root_, variable)); }

std::string Expression::to_string() const { return print(*root_); }

bool Expression::is_constant() const { return root_->op == Op::constant; }

}  // namespace skel
