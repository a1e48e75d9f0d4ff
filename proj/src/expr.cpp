#include "eqc/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

namespace eqc {

const char* fn_name(Fn f) {
  switch (f) {
    case Fn::sin: return "sin";
    case Fn::cos: return "cos";
    case Fn::exp: return "exp";
    case Fn::log: return "log";
    case Fn::sqrt: return "sqrt";
    case Fn::abs: return "abs";
  }
  return "?";
}

std::optional<Fn> fn_from_name(const std::string& name) {
  if (name == "sin") return Fn::sin;
  if (name == "cos") return Fn::cos;
  if (name == "exp") return Fn::exp;
  if (name == "log") return Fn::log;
  if (name == "sqrt") return Fn::sqrt;
  if (name == "abs") return Fn::abs;
  return std::nullopt;
}

ExprPtr Expr::number(double v) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::constant;
  e->value_ = v;
  return e;
}

ExprPtr Expr::param(std::string name) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::param;
  e->name_ = std::move(name);
  return e;
}

ExprPtr Expr::var(std::string name) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::var;
  e->name_ = std::move(name);
  return e;
}

ExprPtr Expr::ident(std::string name, int line, int col) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::ident;
  e->name_ = std::move(name);
  e->line_ = line;
  e->col_ = col;
  return e;
}

ExprPtr Expr::unary(UnOp op, ExprPtr operand) {
  // negation of a literal folds so that negative constants have a single
  // canonical form and printed trees reparse structurally equal
  if (op == UnOp::neg && operand->kind() == Kind::constant)
    return number(-operand->value());
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::unary;
  e->un_op_ = op;
  e->children_[0] = std::move(operand);
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::binary;
  e->bin_op_ = op;
  e->children_[0] = std::move(lhs);
  e->children_[1] = std::move(rhs);
  return e;
}

ExprPtr Expr::call(Fn fn, ExprPtr arg) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = Kind::call;
  e->fn_ = fn;
  e->children_[0] = std::move(arg);
  return e;
}

namespace {

double apply_bin(BinOp op, double a, double b) {
  switch (op) {
    case BinOp::add: return a + b;
    case BinOp::sub: return a - b;
    case BinOp::mul: return a * b;
    case BinOp::div:
      if (b == 0.0) throw EvalError("division by zero");
      return a / b;
    case BinOp::pow: return std::pow(a, b);
  }
  return 0.0;
}

double apply_fn(Fn fn, double a) {
  switch (fn) {
    case Fn::sin: return std::sin(a);
    case Fn::cos: return std::cos(a);
    case Fn::exp: return std::exp(a);
    case Fn::log:
      if (a <= 0.0) throw EvalError("log of nonpositive value");
      return std::log(a);
    case Fn::sqrt: return std::sqrt(a);
    case Fn::abs: return std::fabs(a);
  }
  return 0.0;
}

}  // namespace

double eval_expr(const ExprPtr& e, const std::map<std::string, double>& params,
                 const std::map<std::string, double>& state) {
  switch (e->kind()) {
    case Expr::Kind::constant:
      return e->value();
    case Expr::Kind::param: {
      auto it = params.find(e->name());
      if (it == params.end()) throw EvalError("unbound parameter: " + e->name());
      return it->second;
    }
    case Expr::Kind::var:
    case Expr::Kind::ident: {
      auto it = state.find(e->name());
      if (it != state.end()) return it->second;
      auto pt = params.find(e->name());
      if (pt != params.end()) return pt->second;
      throw EvalError("unbound name: " + e->name());
    }
    case Expr::Kind::unary:
      return -eval_expr(e->operand(), params, state);
    case Expr::Kind::binary:
      return apply_bin(e->bin_op(), eval_expr(e->lhs(), params, state),
                       eval_expr(e->rhs(), params, state));
    case Expr::Kind::call:
      return apply_fn(e->fn(), eval_expr(e->operand(), params, state));
  }
  throw EvalError("corrupt expression node");
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case Expr::Kind::constant: {
      // bit comparison so that -0.0 and 0.0 stay distinguishable
      double x = a->value(), y = b->value();
      return std::memcmp(&x, &y, sizeof(double)) == 0;
    }
    case Expr::Kind::param:
    case Expr::Kind::var:
    case Expr::Kind::ident:
      return a->name() == b->name();
    case Expr::Kind::unary:
      return a->un_op() == b->un_op() && expr_equal(a->operand(), b->operand());
    case Expr::Kind::binary:
      return a->bin_op() == b->bin_op() && expr_equal(a->lhs(), b->lhs()) &&
             expr_equal(a->rhs(), b->rhs());
    case Expr::Kind::call:
      return a->fn() == b->fn() && expr_equal(a->operand(), b->operand());
  }
  return false;
}

namespace {

void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
  switch (e->kind()) {
    case Expr::Kind::var:
    case Expr::Kind::ident:
      out.insert(e->name());
      return;
    case Expr::Kind::unary:
    case Expr::Kind::call:
      collect_vars(e->operand(), out);
      return;
    case Expr::Kind::binary:
      collect_vars(e->lhs(), out);
      collect_vars(e->rhs(), out);
      return;
    default:
      return;
  }
}

}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

ExprPtr substitute(const ExprPtr& e,
                   const std::map<std::string, ExprPtr>& repl) {
  switch (e->kind()) {
    case Expr::Kind::var:
    case Expr::Kind::ident: {
      auto it = repl.find(e->name());
      return it == repl.end() ? e : it->second;
    }
    case Expr::Kind::unary: {
      ExprPtr sub = substitute(e->operand(), repl);
      return sub.get() == e->operand().get() ? e : Expr::unary(e->un_op(), sub);
    }
    case Expr::Kind::binary: {
      ExprPtr l = substitute(e->lhs(), repl);
      ExprPtr r = substitute(e->rhs(), repl);
      if (l.get() == e->lhs().get() && r.get() == e->rhs().get()) return e;
      return Expr::binary(e->bin_op(), l, r);
    }
    case Expr::Kind::call: {
      ExprPtr sub = substitute(e->operand(), repl);
      return sub.get() == e->operand().get() ? e : Expr::call(e->fn(), sub);
    }
    default:
      return e;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

// Precedence levels used by both the printer and the parser:
// add/sub 1, mul/div 2, unary minus 3, pow 4 (right-assoc), atoms 5.
int precedence(const ExprPtr& e) {
  switch (e->kind()) {
    case Expr::Kind::binary:
      switch (e->bin_op()) {
        case BinOp::add:
        case BinOp::sub: return 1;
        case BinOp::mul:
        case BinOp::div: return 2;
        case BinOp::pow: return 4;
      }
      return 1;
    case Expr::Kind::unary: return 3;
    default: return 5;
  }
}

void print_expr(const ExprPtr& e, int parent_prec, std::string& out) {
  int prec = precedence(e);
  bool parens = prec < parent_prec;
  if (parens) out += '(';
  switch (e->kind()) {
    case Expr::Kind::constant: {
      double v = e->value();
      if (v < 0 || (v == 0 && std::signbit(v))) {
        // negative literals render through unary minus to stay in-grammar
        out += '-';
        out += format_double(-v);
      } else {
        out += format_double(v);
      }
      break;
    }
    case Expr::Kind::param:
    case Expr::Kind::var:
    case Expr::Kind::ident:
      out += e->name();
      break;
    case Expr::Kind::unary:
      out += '-';
      print_expr(e->operand(), 3, out);
      break;
    case Expr::Kind::binary: {
      const char* op = "";
      int lp = prec, rp = prec + 1;
      switch (e->bin_op()) {
        case BinOp::add: op = " + "; break;
        case BinOp::sub: op = " - "; break;
        case BinOp::mul: op = "*"; break;
        case BinOp::div: op = "/"; break;
        case BinOp::pow: op = "^"; lp = prec + 1; rp = prec; break;
      }
      print_expr(e->lhs(), lp, out);
      out += op;
      print_expr(e->rhs(), rp, out);
      break;
    }
    case Expr::Kind::call:
      out += fn_name(e->fn());
      out += '(';
      print_expr(e->operand(), 0, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string to_text(const ExprPtr& e) {
  std::string out;
  print_expr(e, 0, out);
  return out;
}

std::optional<double> fold_constant(
    const ExprPtr& e, const std::map<std::string, double>& params) {
  switch (e->kind()) {
    case Expr::Kind::constant:
      return e->value();
    case Expr::Kind::param: {
      auto it = params.find(e->name());
      if (it == params.end()) return std::nullopt;
      return it->second;
    }
    case Expr::Kind::var:
    case Expr::Kind::ident: {
      auto it = params.find(e->name());
      if (it == params.end()) return std::nullopt;
      return it->second;
    }
    case Expr::Kind::unary: {
      auto v = fold_constant(e->operand(), params);
      if (!v) return std::nullopt;
      return -*v;
    }
    case Expr::Kind::binary: {
      auto a = fold_constant(e->lhs(), params);
      auto b = fold_constant(e->rhs(), params);
      if (!a || !b) return std::nullopt;
      try {
        return apply_bin(e->bin_op(), *a, *b);
      } catch (const EvalError&) {
        return std::nullopt;
      }
    }
    case Expr::Kind::call: {
      auto v = fold_constant(e->operand(), params);
      if (!v) return std::nullopt;
      try {
        return apply_fn(e->fn(), *v);
      } catch (const EvalError&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

namespace {

// target variable -> coefficient expression; an empty map means the
// subexpression references no target at all
using AffineForm = std::map<std::string, ExprPtr>;

std::optional<AffineForm> decompose(const ExprPtr& e,
                                    const std::set<std::string>& targets) {
  switch (e->kind()) {
    case Expr::Kind::constant:
    case Expr::Kind::param:
      return AffineForm{};
    case Expr::Kind::var:
    case Expr::Kind::ident: {
      AffineForm f;
      if (targets.count(e->name())) f[e->name()] = Expr::number(1.0);
      return f;
    }
    case Expr::Kind::unary: {
      auto f = decompose(e->operand(), targets);
      if (!f) return std::nullopt;
      for (auto& [v, c] : *f) c = Expr::unary(UnOp::neg, c);
      return f;
    }
    case Expr::Kind::binary: {
      auto a = decompose(e->lhs(), targets);
      auto b = decompose(e->rhs(), targets);
      if (!a || !b) return std::nullopt;
      switch (e->bin_op()) {
        case BinOp::add:
        case BinOp::sub: {
          AffineForm f = *a;
          for (auto& [v, c] : *b) {
            ExprPtr term =
                e->bin_op() == BinOp::sub ? Expr::unary(UnOp::neg, c) : c;
            auto it = f.find(v);
            if (it == f.end())
              f[v] = term;
            else
              it->second = Expr::binary(BinOp::add, it->second, term);
          }
          return f;
        }
        case BinOp::mul: {
          if (!a->empty() && !b->empty())
            return std::nullopt;  // target * target: quadratic
          AffineForm f;
          const AffineForm& lin = a->empty() ? *b : *a;
          const ExprPtr& factor = a->empty() ? e->lhs() : e->rhs();
          for (auto& [v, c] : lin)
            f[v] = Expr::binary(BinOp::mul, c, factor);
          return f;
        }
        case BinOp::div: {
          if (!b->empty()) return std::nullopt;  // target in denominator
          AffineForm f;
          for (auto& [v, c] : *a)
            f[v] = Expr::binary(BinOp::div, c, e->rhs());
          return f;
        }
        case BinOp::pow:
          if (a->empty() && b->empty()) return AffineForm{};
          return std::nullopt;
      }
      return std::nullopt;
    }
    case Expr::Kind::call: {
      auto f = decompose(e->operand(), targets);
      if (!f) return std::nullopt;
      if (!f->empty()) return std::nullopt;
      return AffineForm{};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::map<std::string, ExprPtr>> affine_decompose(
    const ExprPtr& e, const std::set<std::string>& targets) {
  return decompose(e, targets);
}

CompiledExpr::CompiledExpr(const ExprPtr& e,
                           const std::map<std::string, int>& var_slots,
                           const std::map<std::string, double>& params) {
  // emit postfix by explicit traversal; track worst-case stack depth
  int depth = 0;
  auto emit = [&](Instr ins, int delta) {
    code_.push_back(ins);
    depth += delta;
    if (depth > stack_depth_) stack_depth_ = depth;
  };
  struct Frame {
    const Expr* node;
    int stage;
  };
  std::vector<Frame> work{{e.get(), 0}};
  while (!work.empty()) {
    auto [node, stage] = work.back();
    work.pop_back();
    switch (node->kind()) {
      case Expr::Kind::constant:
        emit({Op::push_const, 0, node->value()}, 1);
        break;
      case Expr::Kind::param: {
        auto it = params.find(node->name());
        if (it == params.end())
          throw EvalError("unbound parameter: " + node->name());
        emit({Op::push_const, 0, it->second}, 1);
        break;
      }
      case Expr::Kind::var:
      case Expr::Kind::ident: {
        auto it = var_slots.find(node->name());
        if (it != var_slots.end()) {
          emit({Op::push_var, it->second, 0.0}, 1);
          break;
        }
        auto pt = params.find(node->name());
        if (pt == params.end())
          throw EvalError("unbound name: " + node->name());
        emit({Op::push_const, 0, pt->second}, 1);
        break;
      }
      case Expr::Kind::unary:
        if (stage == 0) {
          work.push_back({node, 1});
          work.push_back({node->operand().get(), 0});
        } else {
          emit({Op::neg, 0, 0.0}, 0);
        }
        break;
      case Expr::Kind::binary:
        if (stage == 0) {
          work.push_back({node, 1});
          work.push_back({node->rhs().get(), 0});
          work.push_back({node->lhs().get(), 0});
        } else {
          Op op = Op::add;
          switch (node->bin_op()) {
            case BinOp::add: op = Op::add; break;
            case BinOp::sub: op = Op::sub; break;
            case BinOp::mul: op = Op::mul; break;
            case BinOp::div: op = Op::div; break;
            case BinOp::pow: op = Op::pow; break;
          }
          emit({op, 0, 0.0}, -1);
        }
        break;
      case Expr::Kind::call:
        if (stage == 0) {
          work.push_back({node, 1});
          work.push_back({node->operand().get(), 0});
        } else {
          Op op = Op::sin;
          switch (node->fn()) {
            case Fn::sin: op = Op::sin; break;
            case Fn::cos: op = Op::cos; break;
            case Fn::exp: op = Op::exp; break;
            case Fn::log: op = Op::log; break;
            case Fn::sqrt: op = Op::sqrt; break;
            case Fn::abs: op = Op::abs; break;
          }
          emit({op, 0, 0.0}, 0);
        }
        break;
    }
  }
}

double CompiledExpr::eval(std::span<const double> state, double* stack) const {
  double* sp = stack;
  for (const Instr& ins : code_) {
    switch (ins.op) {
      case Op::push_const: *sp++ = ins.value; break;
      case Op::push_var: *sp++ = state[static_cast<size_t>(ins.slot)]; break;
      case Op::add: sp[-2] += sp[-1]; --sp; break;
      case Op::sub: sp[-2] -= sp[-1]; --sp; break;
      case Op::mul: sp[-2] *= sp[-1]; --sp; break;
      case Op::div:
        if (sp[-1] == 0.0) throw EvalError("division by zero");
        sp[-2] /= sp[-1];
        --sp;
        break;
      case Op::pow: sp[-2] = std::pow(sp[-2], sp[-1]); --sp; break;
      case Op::neg: sp[-1] = -sp[-1]; break;
      case Op::sin: sp[-1] = std::sin(sp[-1]); break;
      case Op::cos: sp[-1] = std::cos(sp[-1]); break;
      case Op::exp: sp[-1] = std::exp(sp[-1]); break;
      case Op::log:
        if (sp[-1] <= 0.0) throw EvalError("log of nonpositive value");
        sp[-1] = std::log(sp[-1]);
        break;
      case Op::sqrt: sp[-1] = std::sqrt(sp[-1]); break;
      case Op::abs: sp[-1] = std::fabs(sp[-1]); break;
    }
  }
  return stack[0];
}

}  // namespace eqc
