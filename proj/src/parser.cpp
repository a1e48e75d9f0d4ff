#include "eqc/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "eqc/errors.hpp"

namespace eqc {

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return eof() ? '\0' : text[pos]; }

  char advance() {
    char c = text[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r'))
      advance();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line, col);
  }
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string read_ident(Cursor& c) {
  c.skip_inline_ws();
  if (!ident_start(c.peek())) c.fail("expected identifier");
  std::string s;
  while (!c.eof() && ident_char(c.peek())) s += c.advance();
  return s;
}

double read_real(Cursor& c) {
  c.skip_inline_ws();
  size_t start = c.pos;
  if (c.peek() == '+' || c.peek() == '-') c.advance();
  // allow the inf keywords where a signed real is accepted
  if (ident_start(c.peek())) {
    std::string word;
    while (!c.eof() && ident_char(c.peek())) word += c.advance();
    if (word == "inf")
      return c.text[start] == '-' ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity();
    c.fail("expected number");
  }
  while (!c.eof() && (std::isdigit(static_cast<unsigned char>(c.peek())) ||
                      c.peek() == '.'))
    c.advance();
  if (c.peek() == 'e' || c.peek() == 'E') {
    c.advance();
    if (c.peek() == '+' || c.peek() == '-') c.advance();
    while (!c.eof() && std::isdigit(static_cast<unsigned char>(c.peek())))
      c.advance();
  }
  double value = 0.0;
  auto res = std::from_chars(c.text.data() + start, c.text.data() + c.pos, value);
  if (res.ec != std::errc() || res.ptr != c.text.data() + c.pos)
    c.fail("malformed number");
  return value;
}

void expect(Cursor& c, char ch) {
  c.skip_inline_ws();
  if (c.peek() != ch) c.fail(std::string("expected '") + ch + "'");
  c.advance();
}

void expect_word(Cursor& c, const std::string& word) {
  std::string got = read_ident(c);
  if (got != word) c.fail("expected '" + word + "'");
}

// expression grammar
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ['^' unary]
//   atom  := REAL | IDENT | IDENT '(' expr ')' | '(' expr ')'
ExprPtr parse_expr(Cursor& c);

ExprPtr parse_atom(Cursor& c) {
  c.skip_inline_ws();
  char ch = c.peek();
  if (ch == '(') {
    c.advance();
    ExprPtr e = parse_expr(c);
    expect(c, ')');
    return e;
  }
  if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.')
    return Expr::number(read_real(c));
  if (ident_start(ch)) {
    int line = c.line, col = c.col;
    std::string name = read_ident(c);
    c.skip_inline_ws();
    if (c.peek() == '(') {
      auto fn = fn_from_name(name);
      if (!fn) throw ParseError("unknown function: " + name, line, col);
      c.advance();
      ExprPtr arg = parse_expr(c);
      expect(c, ')');
      return Expr::call(*fn, arg);
    }
    if (name == "inf")
      return Expr::number(std::numeric_limits<double>::infinity());
    return Expr::ident(name, line, col);
  }
  c.fail("expected expression");
}

ExprPtr parse_unary(Cursor& c);

ExprPtr parse_power(Cursor& c) {
  ExprPtr base = parse_atom(c);
  c.skip_inline_ws();
  if (c.peek() == '^') {
    c.advance();
    return Expr::binary(BinOp::pow, base, parse_unary(c));
  }
  return base;
}

ExprPtr parse_unary(Cursor& c) {
  c.skip_inline_ws();
  if (c.peek() == '-') {
    c.advance();
    ExprPtr operand = parse_unary(c);
    // negative literals fold so that printed constants round-trip
    if (operand->kind() == Expr::Kind::constant)
      return Expr::number(-operand->value());
    return Expr::unary(UnOp::neg, operand);
  }
  return parse_power(c);
}

ExprPtr parse_term(Cursor& c) {
  ExprPtr e = parse_unary(c);
  for (;;) {
    c.skip_inline_ws();
    char op = c.peek();
    if (op != '*' && op != '/') return e;
    c.advance();
    e = Expr::binary(op == '*' ? BinOp::mul : BinOp::div, e, parse_unary(c));
  }
}

ExprPtr parse_expr(Cursor& c) {
  ExprPtr e = parse_term(c);
  for (;;) {
    c.skip_inline_ws();
    char op = c.peek();
    if (op != '+' && op != '-') return e;
    c.advance();
    e = Expr::binary(op == '+' ? BinOp::add : BinOp::sub, e, parse_term(c));
  }
}

void end_of_statement(Cursor& c) {
  c.skip_inline_ws();
  if (c.eof() || c.peek() == '\n' || c.peek() == '#') return;
  c.fail("unexpected trailing input");
}

// resolve an ident tree against declarations, attributing the error to
// the recorded source location
void check_names(const ExprPtr& e, const std::map<std::string, int>& var_slots,
                 const std::map<std::string, double>& params) {
  switch (e->kind()) {
    case Expr::Kind::ident:
      if (!var_slots.count(e->name()) && !params.count(e->name()))
        throw ParseError("undeclared identifier: " + e->name(), e->line(),
                         e->col());
      return;
    case Expr::Kind::unary:
    case Expr::Kind::call:
      check_names(e->operand(), var_slots, params);
      return;
    case Expr::Kind::binary:
      check_names(e->lhs(), var_slots, params);
      check_names(e->rhs(), var_slots, params);
      return;
    default:
      return;
  }
}

}  // namespace

Model parse_model(const std::string& text) {
  Cursor c{text};

  std::string model_name = "model";
  std::vector<std::pair<std::string, double>> params;
  std::vector<VarDecl> vars;
  std::vector<Group> groups;
  struct Eq {
    std::string var;
    ExprPtr expr;
    int line, col;
  };
  std::vector<Eq> equations;

  while (!c.eof()) {
    c.skip_inline_ws();
    if (c.eof()) break;
    if (c.peek() == '\n') {
      c.advance();
      continue;
    }
    if (c.peek() == '#') {
      while (!c.eof() && c.peek() != '\n') c.advance();
      continue;
    }
    int line = c.line, col = c.col;
    std::string keyword = read_ident(c);
    if (keyword == "model") {
      model_name = read_ident(c);
      end_of_statement(c);
    } else if (keyword == "param") {
      std::string name = read_ident(c);
      expect(c, '=');
      double value = read_real(c);
      end_of_statement(c);
      for (const auto& [p, _] : params)
        if (p == name) throw ParseError("duplicate parameter: " + name, line, col);
      params.emplace_back(name, value);
    } else if (keyword == "var") {
      VarDecl v;
      int vline = c.line, vcol = c.col;
      v.name = read_ident(c);
      expect_word(c, "in");
      expect(c, '[');
      v.lo = read_real(c);
      expect(c, ',');
      v.hi = read_real(c);
      expect(c, ']');
      expect_word(c, "init");
      int iline = c.line, icol = c.col;
      v.init = read_real(c);
      end_of_statement(c);
      for (const VarDecl& other : vars)
        if (other.name == v.name)
          throw ParseError("duplicate variable: " + v.name, vline, vcol);
      if (!(v.lo <= v.hi))
        throw ParseError("empty domain for variable: " + v.name, vline, vcol);
      if (!(v.init >= v.lo && v.init <= v.hi))
        throw ParseError("init outside declared domain for variable: " + v.name,
                         iline, icol);
      vars.push_back(v);
    } else if (keyword == "group") {
      Group g;
      g.name = read_ident(c);
      expect(c, '=');
      expect(c, '(');
      for (;;) {
        g.members.push_back(read_ident(c));
        c.skip_inline_ws();
        if (c.peek() == ',') {
          c.advance();
          continue;
        }
        break;
      }
      expect(c, ')');
      end_of_statement(c);
      groups.push_back(std::move(g));
    } else if (keyword == "ddt") {
      Eq eq;
      eq.line = c.line;
      eq.col = c.col;
      eq.var = read_ident(c);
      expect(c, '=');
      eq.expr = parse_expr(c);
      end_of_statement(c);
      equations.push_back(std::move(eq));
    } else {
      throw ParseError("unknown directive: " + keyword, line, col);
    }
  }

  // name checks with source locations before constructing the model
  std::map<std::string, int> var_slots;
  std::map<std::string, double> param_map;
  for (size_t i = 0; i < vars.size(); ++i) var_slots[vars[i].name] = static_cast<int>(i);
  for (const auto& [p, v] : params) param_map[p] = v;

  std::map<std::string, ExprPtr> rhs;
  for (const Eq& eq : equations) {
    if (!var_slots.count(eq.var))
      throw ParseError("equation for undeclared variable: " + eq.var, eq.line,
                       eq.col);
    if (rhs.count(eq.var))
      throw ParseError("duplicate equation for variable: " + eq.var, eq.line,
                       eq.col);
    check_names(eq.expr, var_slots, param_map);
    rhs[eq.var] = eq.expr;
  }
  for (const VarDecl& v : vars)
    if (!rhs.count(v.name))
      throw ParseError("missing equation for variable: " + v.name, 1, 1);

  try {
    return Model(model_name, std::move(params), std::move(vars),
                 std::move(groups), std::move(rhs));
  } catch (const ModelError& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

ExprPtr parse_expression(const std::string& text) {
  Cursor c{text};
  ExprPtr e = parse_expr(c);
  c.skip_inline_ws();
  if (!c.eof() && c.peek() != '\n') c.fail("unexpected trailing input");
  return e;
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace eqc
