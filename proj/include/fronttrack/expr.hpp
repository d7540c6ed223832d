#pragma once

// Expression language for user-defined fluxes f(x, u) and initial data u0(x).
//
// Grammar (whitespace insignificant):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' integer)*
//   primary := number | 'x' | 'u' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | tanh | exp | sqrt
// Exponents are integer literals (optionally signed), so every derivative
// stays closed-form.

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fronttrack::dsl {

enum class Op : unsigned char {
  constant,
  var_x,
  var_u,
  add,
  sub,
  mul,
  div,
  pow,
  neg,
  sin,
  cos,
  tanh,
  exp,
  sqrt,
};

enum class Variable : unsigned char { x, u };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::constant;
  double value = 0.0;  // constant payload
  int exponent = 0;    // Op::pow payload
  NodePtr lhs;
  NodePtr rhs;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, std::string message, std::vector<std::string> expected);

  std::size_t position() const noexcept { return position_; }
  const std::string& message() const noexcept { return message_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string message_;
  std::vector<std::string> expected_;
};

// Result of a checked evaluation: `domain_error_node` holds the preorder id of
// the first node that produced NaN from finite operands.
struct EvalResult {
  double value = 0.0;
  std::optional<std::size_t> domain_error_node;
  bool ok() const noexcept { return !domain_error_node.has_value(); }
};

// Immutable expression tree; cheap to copy and safe to share across threads.
class FluxExpr {
 public:
  FluxExpr();
  explicit FluxExpr(NodePtr root);

  const NodePtr& root() const noexcept { return root_; }

  double evaluate(double x, double u) const;
  EvalResult evaluate_checked(double x, double u) const;

  FluxExpr differentiate(Variable var) const;

  // Fully parenthesised form that reparses to an identically-evaluating tree.
  std::string to_string() const;

  std::set<Variable> free_variables() const;
  std::size_t node_count() const;
  bool well_formed() const;

 private:
  NodePtr root_;
};

FluxExpr parse(std::string_view src);

inline FluxExpr differentiate(const FluxExpr& e, Variable var) { return e.differentiate(var); }
inline double evaluate(const FluxExpr& e, double x, double u) { return e.evaluate(x, u); }

// Node constructors. Subtrees made only of constants are folded when the
// folded value is finite; nothing else is rewritten.
NodePtr make_constant(double v);
NodePtr make_variable(Variable v);
NodePtr make_unary(Op op, NodePtr a);
NodePtr make_binary(Op op, NodePtr a, NodePtr b);
NodePtr make_pow(NodePtr a, int exponent);

}  // namespace fronttrack::dsl
