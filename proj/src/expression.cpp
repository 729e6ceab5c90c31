#include "vkfem/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "vkfem/errors.hpp"

namespace vkfem {

enum class NodeKind { number, var_x, var_y, negate, add, subtract, multiply, divide, power, call };
enum class Function { abs, sqrt, sin, cos, exp };

struct Expression::Node {
  NodeKind kind = NodeKind::number;
  double value = 0.0;  // number literal
  int exponent = 0;    // power
  Function function = Function::abs;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_node(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

const char* function_name(Function f) {
  switch (f) {
    case Function::abs:
      return "abs";
    case Function::sqrt:
      return "sqrt";
    case Function::sin:
      return "sin";
    case Function::cos:
      return "cos";
    case Function::exp:
      return "exp";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr root = sum();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("syntax error: " + what, pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(NodeKind::add, lhs, product());
      } else if (accept('-')) {
        lhs = make_node(NodeKind::subtract, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(NodeKind::multiply, lhs, unary());
      } else if (accept('/')) {
        lhs = make_node(NodeKind::divide, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(NodeKind::negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    while (accept('^')) {
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == start) fail("exponent must be a non-negative integer literal");
      const std::string digits(text_.substr(start, pos_ - start));
      if (digits.size() > 6) {
        pos_ = start;
        fail("exponent too large");
      }
      auto n = std::make_shared<Expression::Node>();
      n->kind = NodeKind::power;
      n->exponent = std::stoi(digits);
      n->lhs = base;
      base = n;
    }
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    const std::string tail(text_.substr(start));
    char* end = nullptr;
    const double v = std::strtod(tail.c_str(), &end);
    if (end == tail.c_str()) fail("malformed number");
    pos_ = start + static_cast<std::size_t>(end - tail.c_str());
    auto n = std::make_shared<Expression::Node>();
    n->kind = NodeKind::number;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "x") return make_node(NodeKind::var_x);
    if (name == "y") return make_node(NodeKind::var_y);
    static const std::pair<const char*, Function> functions[] = {
        {"abs", Function::abs}, {"sqrt", Function::sqrt}, {"sin", Function::sin},
        {"cos", Function::cos}, {"exp", Function::exp}};
    for (const auto& [fname, f] : functions) {
      if (name != fname) continue;
      if (!accept('(')) fail("expected '(' after " + name);
      auto n = std::make_shared<Expression::Node>();
      n->kind = NodeKind::call;
      n->function = f;
      n->lhs = sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    pos_ = start;
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double ipow(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

double eval(const Expression::Node& n, double x, double y) {
  switch (n.kind) {
    case NodeKind::number:
      return n.value;
    case NodeKind::var_x:
      return x;
    case NodeKind::var_y:
      return y;
    case NodeKind::negate:
      return -eval(*n.lhs, x, y);
    case NodeKind::add:
      return eval(*n.lhs, x, y) + eval(*n.rhs, x, y);
    case NodeKind::subtract:
      return eval(*n.lhs, x, y) - eval(*n.rhs, x, y);
    case NodeKind::multiply:
      return eval(*n.lhs, x, y) * eval(*n.rhs, x, y);
    case NodeKind::divide:
      return eval(*n.lhs, x, y) / eval(*n.rhs, x, y);
    case NodeKind::power:
      return ipow(eval(*n.lhs, x, y), n.exponent);
    case NodeKind::call: {
      const double a = eval(*n.lhs, x, y);
      switch (n.function) {
        case Function::abs:
          return std::abs(a);
        case Function::sqrt:
          return std::sqrt(a);
        case Function::sin:
          return std::sin(a);
        case Function::cos:
          return std::cos(a);
        case Function::exp:
          return std::exp(a);
      }
    }
  }
  return 0.0;
}

void print(const Expression::Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case NodeKind::var_x:
      out += 'x';
      return;
    case NodeKind::var_y:
      out += 'y';
      return;
    case NodeKind::negate:
      out += "(-";
      print(*n.lhs, out);
      out += ')';
      return;
    case NodeKind::power:
      out += '(';
      print(*n.lhs, out);
      out += '^' + std::to_string(n.exponent) + ')';
      return;
    case NodeKind::call:
      out += function_name(n.function);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    default:
      break;
  }
  const char* op = n.kind == NodeKind::add        ? " + "
                   : n.kind == NodeKind::subtract ? " - "
                   : n.kind == NodeKind::multiply ? " * "
                                                  : " / ";
  out += '(';
  print(*n.lhs, out);
  out += op;
  print(*n.rhs, out);
  out += ')';
}

int degree(const Expression::Node& n) {
  switch (n.kind) {
    case NodeKind::number:
      return 0;
    case NodeKind::var_x:
    case NodeKind::var_y:
      return 1;
    case NodeKind::negate:
      return degree(*n.lhs);
    case NodeKind::add:
    case NodeKind::subtract: {
      const int a = degree(*n.lhs), b = degree(*n.rhs);
      return a < 0 || b < 0 ? -1 : std::max(a, b);
    }
    case NodeKind::multiply: {
      const int a = degree(*n.lhs), b = degree(*n.rhs);
      return a < 0 || b < 0 ? -1 : a + b;
    }
    case NodeKind::divide: {
      const int a = degree(*n.lhs), b = degree(*n.rhs);
      return a < 0 || b != 0 ? -1 : a;
    }
    case NodeKind::power: {
      const int a = degree(*n.lhs);
      return a < 0 ? -1 : a * n.exponent;
    }
    case NodeKind::call:
      return degree(*n.lhs) == 0 ? 0 : -1;
  }
  return -1;
}

}  // namespace

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

double Expression::evaluate(double x, double y) const { return eval(*root_, x, y); }

std::string Expression::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

int Expression::polynomial_degree() const { return degree(*root_); }

bool Expression::is_zero() const { return root_->kind == NodeKind::number && root_->value == 0.0; }

ScalarField Expression::as_field() const {
  auto root = root_;
  return [root](double x, double y) { return eval(*root, x, y); };
}

}  // namespace vkfem
