#include "fronttrack/expr.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fronttrack::dsl {

ParseError::ParseError(std::size_t position, std::string message, std::vector<std::string> expected)
    : std::runtime_error("parse error at offset " + std::to_string(position) + ": " + message),
      position_(position),
      message_(std::move(message)),
      expected_(std::move(expected)) {}

namespace {

bool is_unary_function(Op op) {
  switch (op) {
    case Op::neg:
    case Op::sin:
    case Op::cos:
    case Op::tanh:
    case Op::exp:
    case Op::sqrt:
      return true;
    default:
      return false;
  }
}

bool is_binary(Op op) {
  return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div;
}

double ipow(double base, int exponent) {
  bool invert = exponent < 0;
  unsigned n = invert ? static_cast<unsigned>(-static_cast<long>(exponent)) : static_cast<unsigned>(exponent);
  double result = 1.0;
  double b = base;
  while (n > 0) {
    if (n & 1u) result *= b;
    b *= b;
    n >>= 1u;
  }
  return invert ? 1.0 / result : result;
}

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::neg: return -a;
    case Op::sin: return std::sin(a);
    case Op::cos: return std::cos(a);
    case Op::tanh: return std::tanh(a);
    case Op::exp: return std::exp(a);
    case Op::sqrt: return std::sqrt(a);
    default: throw std::logic_error("not a unary op");
  }
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::add: return a + b;
    case Op::sub: return a - b;
    case Op::mul: return a * b;
    case Op::div: return a / b;
    default: throw std::logic_error("not a binary op");
  }
}

bool is_const(const NodePtr& n) { return n->op == Op::constant; }
bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

double eval_node(const Node& n, double x, double u) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::var_x: return x;
    case Op::var_u: return u;
    case Op::pow: return ipow(eval_node(*n.lhs, x, u), n.exponent);
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return apply_binary(n.op, eval_node(*n.lhs, x, u), eval_node(*n.rhs, x, u));
    default:
      return apply_unary(n.op, eval_node(*n.lhs, x, u));
  }
}

// Preorder walk; `next_id` is the id of `n` on entry.
double eval_checked(const Node& n, double x, double u, std::size_t& next_id,
                    std::optional<std::size_t>& bad) {
  const std::size_t id = next_id++;
  double result = 0.0;
  bool operands_finite = true;
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::var_x: return x;
    case Op::var_u: return u;
    case Op::pow: {
      double a = eval_checked(*n.lhs, x, u, next_id, bad);
      operands_finite = std::isfinite(a);
      result = ipow(a, n.exponent);
      break;
    }
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      double a = eval_checked(*n.lhs, x, u, next_id, bad);
      double b = eval_checked(*n.rhs, x, u, next_id, bad);
      operands_finite = std::isfinite(a) && std::isfinite(b);
      result = apply_binary(n.op, a, b);
      break;
    }
    default: {
      double a = eval_checked(*n.lhs, x, u, next_id, bad);
      operands_finite = std::isfinite(a);
      result = apply_unary(n.op, a);
      break;
    }
  }
  if (!bad && operands_finite && std::isnan(result)) bad = id;
  return result;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format constant");
  return std::string(buf, ptr);
}

void print_node(const Node& n, std::ostringstream& out) {
  switch (n.op) {
    case Op::constant:
      if (std::signbit(n.value)) {
        out << "(-" << format_number(-n.value) << ")";
      } else {
        out << format_number(n.value);
      }
      return;
    case Op::var_x: out << 'x'; return;
    case Op::var_u: out << 'u'; return;
    case Op::pow:
      out << '(';
      print_node(*n.lhs, out);
      out << ")^" << n.exponent;
      return;
    case Op::neg:
      out << "(-";
      print_node(*n.lhs, out);
      out << ')';
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      const char* sym = n.op == Op::add ? " + " : n.op == Op::sub ? " - " : n.op == Op::mul ? " * " : " / ";
      out << '(';
      print_node(*n.lhs, out);
      out << sym;
      print_node(*n.rhs, out);
      out << ')';
      return;
    }
    case Op::sin: out << "sin("; break;
    case Op::cos: out << "cos("; break;
    case Op::tanh: out << "tanh("; break;
    case Op::exp: out << "exp("; break;
    case Op::sqrt: out << "sqrt("; break;
  }
  print_node(*n.lhs, out);
  out << ')';
}

void collect_vars(const Node& n, std::set<Variable>& vars) {
  if (n.op == Op::var_x) vars.insert(Variable::x);
  if (n.op == Op::var_u) vars.insert(Variable::u);
  if (n.lhs) collect_vars(*n.lhs, vars);
  if (n.rhs) collect_vars(*n.rhs, vars);
}

std::size_t count_nodes(const Node& n) {
  return 1 + (n.lhs ? count_nodes(*n.lhs) : 0) + (n.rhs ? count_nodes(*n.rhs) : 0);
}

bool check_arity(const Node& n) {
  switch (n.op) {
    case Op::constant:
    case Op::var_x:
    case Op::var_u:
      return !n.lhs && !n.rhs;
    case Op::pow:
      return n.lhs && !n.rhs && check_arity(*n.lhs);
    default:
      if (is_binary(n.op)) return n.lhs && n.rhs && check_arity(*n.lhs) && check_arity(*n.rhs);
      if (is_unary_function(n.op)) return n.lhs && !n.rhs && check_arity(*n.lhs);
      return false;
  }
}

// Algebra used by differentiation: constant folding plus the neutral
// elements 0 and 1, which keep derivative trees from ballooning.
NodePtr d_add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return make_binary(Op::add, std::move(a), std::move(b));
}

NodePtr d_sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return make_unary(Op::neg, std::move(b));
  return make_binary(Op::sub, std::move(a), std::move(b));
}

NodePtr d_mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return make_binary(Op::mul, std::move(a), std::move(b));
}

NodePtr d_div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return make_constant(0.0);
  if (is_const(b, 1.0)) return a;
  return make_binary(Op::div, std::move(a), std::move(b));
}

NodePtr d_neg(NodePtr a) {
  if (is_const(a, 0.0)) return a;
  return make_unary(Op::neg, std::move(a));
}

NodePtr derive(const NodePtr& n, Variable var) {
  switch (n->op) {
    case Op::constant:
      return make_constant(0.0);
    case Op::var_x:
      return make_constant(var == Variable::x ? 1.0 : 0.0);
    case Op::var_u:
      return make_constant(var == Variable::u ? 1.0 : 0.0);
    case Op::add:
      return d_add(derive(n->lhs, var), derive(n->rhs, var));
    case Op::sub:
      return d_sub(derive(n->lhs, var), derive(n->rhs, var));
    case Op::mul:
      return d_add(d_mul(derive(n->lhs, var), n->rhs), d_mul(n->lhs, derive(n->rhs, var)));
    case Op::div: {
      // a'/b - a*b'/b^2
      NodePtr first = d_div(derive(n->lhs, var), n->rhs);
      NodePtr second = d_div(d_mul(n->lhs, derive(n->rhs, var)), make_pow(n->rhs, 2));
      return d_sub(std::move(first), std::move(second));
    }
    case Op::pow: {
      NodePtr da = derive(n->lhs, var);
      if (is_const(da, 0.0) || n->exponent == 0) return make_constant(0.0);
      NodePtr lowered = n->exponent == 1 ? make_constant(1.0) : make_pow(n->lhs, n->exponent - 1);
      return d_mul(d_mul(make_constant(static_cast<double>(n->exponent)), std::move(lowered)), std::move(da));
    }
    case Op::neg:
      return d_neg(derive(n->lhs, var));
    case Op::sin:
      return d_mul(make_unary(Op::cos, n->lhs), derive(n->lhs, var));
    case Op::cos:
      return d_mul(d_neg(make_unary(Op::sin, n->lhs)), derive(n->lhs, var));
    case Op::tanh: {
      NodePtr sech2 = d_sub(make_constant(1.0), make_pow(make_unary(Op::tanh, n->lhs), 2));
      return d_mul(std::move(sech2), derive(n->lhs, var));
    }
    case Op::exp:
      return d_mul(n, derive(n->lhs, var));
    case Op::sqrt:
      return d_div(derive(n->lhs, var), d_mul(make_constant(2.0), n));
  }
  throw std::logic_error("unknown node");
}

// --- parser -----------------------------------------------------------------

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end, invalid };

struct Token {
  Tok kind = Tok::end;
  std::size_t pos = 0;
  std::string_view text;
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    Token t;
    t.pos = pos_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::end;
      return t;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      t.kind = Tok::ident;
      t.text = src_.substr(start, pos_ - start);
      return t;
    }
    ++pos_;
    t.text = src_.substr(t.pos, 1);
    switch (c) {
      case '+': t.kind = Tok::plus; break;
      case '-': t.kind = Tok::minus; break;
      case '*': t.kind = Tok::star; break;
      case '/': t.kind = Tok::slash; break;
      case '^': t.kind = Tok::caret; break;
      case '(': t.kind = Tok::lparen; break;
      case ')': t.kind = Tok::rparen; break;
      default: t.kind = Tok::invalid; break;
    }
    return t;
  }

 private:
  Token lex_number() {
    Token t;
    t.pos = pos_;
    std::size_t end = pos_;
    while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) ++end;
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
      if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
        end = e;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      }
    }
    auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + end, t.number);
    if (ec != std::errc{} || ptr != src_.data() + end) {
      throw ParseError(pos_, "malformed number '" + std::string(src_.substr(pos_, end - pos_)) + "'", {"number"});
    }
    t.kind = Tok::number;
    t.text = src_.substr(pos_, end - pos_);
    pos_ = end;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  NodePtr parse_all() {
    NodePtr e = parse_expr();
    if (cur_.kind != Tok::end) fail("unexpected trailing input", {"operator", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    throw ParseError(cur_.pos, msg, std::move(expected));
  }

  void advance() { cur_ = lexer_.next(); }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
      Op op = cur_.kind == Tok::plus ? Op::add : Op::sub;
      advance();
      lhs = make_binary(op, lhs, parse_term());
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
      Op op = cur_.kind == Tok::star ? Op::mul : Op::div;
      advance();
      lhs = make_binary(op, lhs, parse_unary());
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (cur_.kind == Tok::minus) {
      advance();
      return make_unary(Op::neg, parse_unary());
    }
    if (cur_.kind == Tok::plus) {
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    while (cur_.kind == Tok::caret) {
      advance();
      base = make_pow(base, parse_exponent());
    }
    return base;
  }

  int parse_exponent() {
    bool parens = false;
    if (cur_.kind == Tok::lparen) {
      parens = true;
      advance();
    }
    int sign = 1;
    if (cur_.kind == Tok::minus || cur_.kind == Tok::plus) {
      sign = cur_.kind == Tok::minus ? -1 : 1;
      advance();
    }
    if (cur_.kind != Tok::number) fail("expected integer exponent", {"integer"});
    double v = cur_.number;
    if (v != std::floor(v) || cur_.text.find_first_of(".eE") != std::string_view::npos || v > 1024) {
      fail("exponent must be an integer literal", {"integer"});
    }
    advance();
    if (parens) {
      if (cur_.kind != Tok::rparen) fail("expected ')'", {")"});
      advance();
    }
    return sign * static_cast<int>(v);
  }

  NodePtr parse_primary() {
    switch (cur_.kind) {
      case Tok::number: {
        double v = cur_.number;
        advance();
        return make_constant(v);
      }
      case Tok::lparen: {
        advance();
        NodePtr inner = parse_expr();
        if (cur_.kind != Tok::rparen) fail("expected ')'", {")"});
        advance();
        return inner;
      }
      case Tok::ident:
        return parse_identifier();
      default:
        fail(cur_.kind == Tok::end ? "unexpected end of input, expected operand" : "expected operand",
             {"number", "variable", "function", "("});
    }
  }

  NodePtr parse_identifier() {
    const std::string name(cur_.text);
    const std::size_t pos = cur_.pos;
    advance();
    if (name == "x") return make_variable(Variable::x);
    if (name == "u") return make_variable(Variable::u);
    if (name == "pi") return make_constant(std::numbers::pi);
    Op op;
    if (name == "sin") op = Op::sin;
    else if (name == "cos") op = Op::cos;
    else if (name == "tanh") op = Op::tanh;
    else if (name == "exp") op = Op::exp;
    else if (name == "sqrt") op = Op::sqrt;
    else throw ParseError(pos, "unknown identifier '" + name + "'", {"x", "u", "pi", "sin", "cos", "tanh", "exp", "sqrt"});
    if (cur_.kind != Tok::lparen) fail("expected '(' after function name", {"("});
    advance();
    NodePtr arg = parse_expr();
    if (cur_.kind != Tok::rparen) fail("expected ')'", {")"});
    advance();
    return make_unary(op, arg);
  }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = v;
  return n;
}

NodePtr make_variable(Variable v) {
  auto n = std::make_shared<Node>();
  n->op = v == Variable::x ? Op::var_x : Op::var_u;
  return n;
}

NodePtr make_unary(Op op, NodePtr a) {
  if (!is_unary_function(op)) throw std::invalid_argument("make_unary: not a unary operator");
  if (is_const(a)) {
    double v = apply_unary(op, a->value);
    if (std::isfinite(v)) return make_constant(v);
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  if (!is_binary(op)) throw std::invalid_argument("make_binary: not a binary operator");
  if (is_const(a) && is_const(b)) {
    double v = apply_binary(op, a->value, b->value);
    if (std::isfinite(v)) return make_constant(v);
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

NodePtr make_pow(NodePtr a, int exponent) {
  if (is_const(a)) {
    double v = ipow(a->value, exponent);
    if (std::isfinite(v)) return make_constant(v);
  }
  auto n = std::make_shared<Node>();
  n->op = Op::pow;
  n->exponent = exponent;
  n->lhs = std::move(a);
  return n;
}

FluxExpr::FluxExpr() : root_(make_constant(0.0)) {}

FluxExpr::FluxExpr(NodePtr root) : root_(std::move(root)) {
  if (!root_) throw std::invalid_argument("FluxExpr: null root");
}

double FluxExpr::evaluate(double x, double u) const { return eval_node(*root_, x, u); }

EvalResult FluxExpr::evaluate_checked(double x, double u) const {
  EvalResult r;
  std::size_t next_id = 0;
  r.value = eval_checked(*root_, x, u, next_id, r.domain_error_node);
  return r;
}

FluxExpr FluxExpr::differentiate(Variable var) const { return FluxExpr(derive(root_, var)); }

std::string FluxExpr::to_string() const {
  std::ostringstream out;
  print_node(*root_, out);
  return out.str();
}

std::set<Variable> FluxExpr::free_variables() const {
  std::set<Variable> vars;
  collect_vars(*root_, vars);
  return vars;
}

std::size_t FluxExpr::node_count() const { return count_nodes(*root_); }

bool FluxExpr::well_formed() const { return check_arity(*root_); }

FluxExpr parse(std::string_view src) { return FluxExpr(Parser(src).parse_all()); }

}  // namespace fronttrack::dsl
