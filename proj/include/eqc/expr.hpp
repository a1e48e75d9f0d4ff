#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eqc/errors.hpp"

namespace eqc {

enum class BinOp { add, sub, mul, div, pow };
enum class UnOp { neg };
enum class Fn { sin, cos, exp, log, sqrt, abs };

const char* fn_name(Fn f);
std::optional<Fn> fn_from_name(const std::string& name);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree. Nodes are shared freely; a node never changes
// after construction. `ident` nodes come out of the parser and are resolved
// into `var`/`param` nodes against a model's declarations.
class Expr {
 public:
  enum class Kind { constant, param, var, ident, unary, binary, call };

  static ExprPtr number(double v);
  static ExprPtr param(std::string name);
  static ExprPtr var(std::string name);
  static ExprPtr ident(std::string name, int line = 0, int col = 0);
  static ExprPtr unary(UnOp op, ExprPtr operand);
  static ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr call(Fn fn, ExprPtr arg);

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  const std::string& name() const { return name_; }
  UnOp un_op() const { return un_op_; }
  BinOp bin_op() const { return bin_op_; }
  Fn fn() const { return fn_; }
  const ExprPtr& lhs() const { return children_[0]; }
  const ExprPtr& rhs() const { return children_[1]; }
  const ExprPtr& operand() const { return children_[0]; }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  Expr() = default;
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  std::string name_;
  UnOp un_op_ = UnOp::neg;
  BinOp bin_op_ = BinOp::add;
  Fn fn_ = Fn::sin;
  ExprPtr children_[2];
  int line_ = 0, col_ = 0;
};

// Tree-walking evaluation over name->value maps. Throws EvalError on an
// unbound name, division by zero, or log of a nonpositive value; all other
// arithmetic follows IEEE double semantics.
double eval_expr(const ExprPtr& e, const std::map<std::string, double>& params,
                 const std::map<std::string, double>& state);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Variable names referenced anywhere in the tree (var + unresolved ident).
std::set<std::string> free_vars(const ExprPtr& e);

// Replace var/ident nodes by the mapped expressions; other nodes are shared.
ExprPtr substitute(const ExprPtr& e,
                   const std::map<std::string, ExprPtr>& repl);

// Minimal-parenthesis rendering in the model-file grammar. Constants are
// printed with shortest round-trip notation, so parse(to_text(e)) == e.
std::string to_text(const ExprPtr& e);

// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

// Folds an expression containing no variable references to its numeric
// value, substituting parameters. nullopt if any variable occurs.
std::optional<double> fold_constant(const ExprPtr& e,
                                    const std::map<std::string, double>& params);

// Decomposition e = sum_v coeff_v * v + rest over the target variables,
// valid when e is affine in the targets. Coefficients are expressions that
// do not reference any target variable; the remainder is recovered by
// substituting 0 for every target. nullopt when e is not affine in the
// targets (a product of targets, a target inside a call, etc.).
std::optional<std::map<std::string, ExprPtr>> affine_decompose(
    const ExprPtr& e, const std::set<std::string>& targets);

// Flat postfix program for fast repeated evaluation against a state vector.
// Parameters are folded to constants at compile time.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const ExprPtr& e, const std::map<std::string, int>& var_slots,
               const std::map<std::string, double>& params);

  // `stack` must have room for stack_depth() doubles.
  double eval(std::span<const double> state, double* stack) const;
  int stack_depth() const { return stack_depth_; }

 private:
  enum class Op : unsigned char {
    push_const, push_var, add, sub, mul, div, pow, neg,
    sin, cos, exp, log, sqrt, abs
  };
  struct Instr {
    Op op;
    int slot = 0;
    double value = 0.0;
  };
  std::vector<Instr> code_;
  int stack_depth_ = 0;
};

}  // namespace eqc
