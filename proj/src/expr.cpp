#include "roughspde/expr.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace roughspde {

enum class Op {
  Num, Var, Add, Sub, Mul, Div, Pow, Neg,
  Lt, Le, Gt, Ge, Eq, Ne, If, Min, Max,
  Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Sinh, Cosh, Tanh, Sinc, Sign, DSinc
};

struct Expr::Node {
  Op op;
  double value = 0.0;
  int var = -1;
  std::shared_ptr<const Node> a, b, c;
};

namespace {

using NodeP = std::shared_ptr<const Expr::Node>;

NodeP mk(Op op, NodeP a = nullptr, NodeP b = nullptr, NodeP c = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->c = std::move(c);
  return n;
}

NodeP num(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Num;
  n->value = v;
  return n;
}

NodeP var(int i) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Var;
  n->var = i;
  return n;
}

bool is_num(const NodeP& n, double v) { return n->op == Op::Num && n->value == v; }

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
  return std::sin(x) / x;
}

double dsinc(double x) {
  if (std::abs(x) < 1e-3) return -x / 3.0 + x * x * x / 30.0;
  return (std::cos(x) - std::sin(x) / x) / x;
}

double apply1(Op op, double x) {
  switch (op) {
    case Op::Neg: return -x;
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Tan: return std::tan(x);
    case Op::Exp: return std::exp(x);
    case Op::Log: return std::log(x);
    case Op::Sqrt: return std::sqrt(x);
    case Op::Abs: return std::abs(x);
    case Op::Sinh: return std::sinh(x);
    case Op::Cosh: return std::cosh(x);
    case Op::Tanh: return std::tanh(x);
    case Op::Sinc: return sinc(x);
    case Op::Sign: return (x > 0) - (x < 0);
    case Op::DSinc: return dsinc(x);
    default: return 0.0;
  }
}

double apply2(Op op, double x, double y) {
  switch (op) {
    case Op::Add: return x + y;
    case Op::Sub: return x - y;
    case Op::Mul:
      // 0 * inf = 0: a zero factor switches a branch off
      if (x == 0.0 || y == 0.0) return 0.0;
      return x * y;
    case Op::Div: return x / y;
    case Op::Pow:
      if (y == 2.0) return x * x;
      return std::pow(x, y);
    case Op::Lt: return x < y;
    case Op::Le: return x <= y;
    case Op::Gt: return x > y;
    case Op::Ge: return x >= y;
    case Op::Eq: return x == y;
    case Op::Ne: return x != y;
    case Op::Min: return std::min(x, y);
    case Op::Max: return std::max(x, y);
    default: return 0.0;
  }
}

bool unary(Op op) { return op == Op::Neg || op >= Op::Sin; }

double eval_node(const Expr::Node& n, std::span<const double> v) {
  switch (n.op) {
    case Op::Num: return n.value;
    case Op::Var: return v[n.var];
    case Op::If: return eval_node(*n.a, v) != 0.0 ? eval_node(*n.b, v) : eval_node(*n.c, v);
    default: break;
  }
  if (unary(n.op)) return apply1(n.op, eval_node(*n.a, v));
  return apply2(n.op, eval_node(*n.a, v), eval_node(*n.b, v));
}

void eval_node_vec(const Expr::Node& n, std::span<const double* const> v, size_t cnt, double* out) {
  switch (n.op) {
    case Op::Num:
      std::fill(out, out + cnt, n.value);
      return;
    case Op::Var:
      std::copy(v[n.var], v[n.var] + cnt, out);
      return;
    case Op::If: {
      std::vector<double> c(cnt), a(cnt), b(cnt);
      eval_node_vec(*n.a, v, cnt, c.data());
      eval_node_vec(*n.b, v, cnt, a.data());
      eval_node_vec(*n.c, v, cnt, b.data());
      for (size_t i = 0; i < cnt; ++i) out[i] = c[i] != 0.0 ? a[i] : b[i];
      return;
    }
    default: break;
  }
  if (unary(n.op)) {
    eval_node_vec(*n.a, v, cnt, out);
    for (size_t i = 0; i < cnt; ++i) out[i] = apply1(n.op, out[i]);
    return;
  }
  std::vector<double> b(cnt);
  eval_node_vec(*n.a, v, cnt, out);
  eval_node_vec(*n.b, v, cnt, b.data());
  for (size_t i = 0; i < cnt; ++i) out[i] = apply2(n.op, out[i], b[i]);
}

// constructors with light constant folding, keeps derivative trees small
NodeP add(NodeP a, NodeP b) {
  if (is_num(a, 0)) return b;
  if (is_num(b, 0)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value + b->value);
  return mk(Op::Add, a, b);
}
NodeP sub(NodeP a, NodeP b) {
  if (is_num(b, 0)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value - b->value);
  if (is_num(a, 0)) return mk(Op::Neg, b);
  return mk(Op::Sub, a, b);
}
NodeP mul(NodeP a, NodeP b) {
  if (is_num(a, 0) || is_num(b, 0)) return num(0);
  if (is_num(a, 1)) return b;
  if (is_num(b, 1)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value * b->value);
  return mk(Op::Mul, a, b);
}
NodeP div(NodeP a, NodeP b) {
  if (is_num(a, 0)) return num(0);
  if (is_num(b, 1)) return a;
  return mk(Op::Div, a, b);
}
NodeP neg(NodeP a) {
  if (a->op == Op::Num) return num(-a->value);
  return mk(Op::Neg, a);
}

NodeP diff_node(const NodeP& n, int x) {
  switch (n->op) {
    case Op::Num: return num(0);
    case Op::Var: return num(n->var == x ? 1.0 : 0.0);
    case Op::Add: return add(diff_node(n->a, x), diff_node(n->b, x));
    case Op::Sub: return sub(diff_node(n->a, x), diff_node(n->b, x));
    case Op::Neg: return neg(diff_node(n->a, x));
    case Op::Mul: return add(mul(diff_node(n->a, x), n->b), mul(n->a, diff_node(n->b, x)));
    case Op::Div: {
      auto da = diff_node(n->a, x), db = diff_node(n->b, x);
      return sub(div(da, n->b), div(mul(n->a, db), mul(n->b, n->b)));
    }
    case Op::Pow: {
      auto da = diff_node(n->a, x), db = diff_node(n->b, x);
      if (n->b->op == Op::Num) {
        double p = n->b->value;
        if (p == 0) return num(0);
        return mul(mul(num(p), mk(Op::Pow, n->a, num(p - 1))), da);
      }
      // d(a^b) = a^b (b' log a + b a'/a)
      return mul(n, add(mul(db, mk(Op::Log, n->a)), div(mul(n->b, da), n->a)));
    }
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: case Op::Eq: case Op::Ne:
    case Op::Sign:
      return num(0);
    case Op::If: return mk(Op::If, n->a, diff_node(n->b, x), diff_node(n->c, x));
    case Op::Min: return mk(Op::If, mk(Op::Le, n->a, n->b), diff_node(n->a, x), diff_node(n->b, x));
    case Op::Max: return mk(Op::If, mk(Op::Ge, n->a, n->b), diff_node(n->a, x), diff_node(n->b, x));
    default: break;
  }
  auto da = diff_node(n->a, x);
  if (is_num(da, 0)) return num(0);
  NodeP d;
  switch (n->op) {
    case Op::Sin: d = mk(Op::Cos, n->a); break;
    case Op::Cos: d = neg(mk(Op::Sin, n->a)); break;
    case Op::Tan: d = div(num(1), mul(mk(Op::Cos, n->a), mk(Op::Cos, n->a))); break;
    case Op::Exp: d = n; break;
    case Op::Log: d = div(num(1), n->a); break;
    case Op::Sqrt: d = div(num(0.5), n); break;
    case Op::Abs: d = mk(Op::Sign, n->a); break;
    case Op::Sinh: d = mk(Op::Cosh, n->a); break;
    case Op::Cosh: d = mk(Op::Sinh, n->a); break;
    case Op::Tanh: d = sub(num(1), mul(n, n)); break;
    case Op::Sinc: d = mk(Op::DSinc, n->a); break;
    case Op::DSinc: throw std::invalid_argument("second derivative of sinc is not supported");
    default: d = num(0);
  }
  return mul(d, da);
}

class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  NodeP parse() {
    auto n = comparison();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw ParseError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(const char* tok) {
    skip();
    size_t l = std::char_traits<char>::length(tok);
    if (s_.compare(pos_, l, tok) == 0) {
      pos_ += l;
      return true;
    }
    return false;
  }

  NodeP comparison() {
    auto a = additive();
    static const std::pair<const char*, Op> ops[] = {{"<=", Op::Le}, {">=", Op::Ge}, {"==", Op::Eq},
                                                     {"!=", Op::Ne}, {"<", Op::Lt},  {">", Op::Gt}};
    for (auto& [tok, op] : ops)
      if (eat(tok)) return mk(op, a, additive());
    return a;
  }
  NodeP additive() {
    auto a = multiplicative();
    for (;;) {
      if (eat("+")) a = mk(Op::Add, a, multiplicative());
      else if (eat("-")) a = mk(Op::Sub, a, multiplicative());
      else return a;
    }
  }
  NodeP multiplicative() {
    auto a = signed_term();
    for (;;) {
      if (eat("*")) a = mk(Op::Mul, a, signed_term());
      else if (eat("/")) a = mk(Op::Div, a, signed_term());
      else return a;
    }
  }
  NodeP signed_term() {
    if (eat("-")) return mk(Op::Neg, signed_term());
    if (eat("+")) return signed_term();
    return power();
  }
  NodeP power() {
    auto a = primary();
    if (eat("^")) return mk(Op::Pow, a, signed_term());
    return a;
  }
  NodeP primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char ch = s_[pos_];
    if (eat("(")) {
      auto n = comparison();
      if (!eat(")")) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      size_t used = 0;
      double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return num(v);
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        ++pos_;
        std::vector<NodeP> args;
        if (!eat(")")) {
          do args.push_back(comparison());
          while (eat(","));
          if (!eat(")")) fail("expected ')' after arguments");
        }
        return call(id, args);
      }
      for (size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == id) return var(static_cast<int>(i));
      if (id == "pi") return num(std::numbers::pi);
      if (id == "inf") return num(std::numeric_limits<double>::infinity());
      fail("unknown identifier '" + id + "'");
    }
    fail(std::string("unexpected character '") + ch + "'");
  }

  NodeP call(const std::string& f, std::vector<NodeP>& a) {
    static const std::pair<const char*, Op> f1[] = {
        {"sin", Op::Sin},   {"cos", Op::Cos},   {"tan", Op::Tan},   {"exp", Op::Exp},   {"log", Op::Log},
        {"sqrt", Op::Sqrt}, {"abs", Op::Abs},   {"sinh", Op::Sinh}, {"cosh", Op::Cosh}, {"tanh", Op::Tanh},
        {"sinc", Op::Sinc}, {"sign", Op::Sign}, {"dsinc", Op::DSinc}};
    for (auto& [name, op] : f1)
      if (f == name) {
        if (a.size() != 1) fail(f + " takes one argument");
        return mk(op, a[0]);
      }
    if (f == "min" || f == "max" || f == "pow") {
      if (a.size() != 2) fail(f + " takes two arguments");
      return mk(f == "min" ? Op::Min : f == "max" ? Op::Max : Op::Pow, a[0], a[1]);
    }
    if (f == "if") {
      if (a.size() != 3) fail("if takes three arguments");
      return mk(Op::If, a[0], a[1], a[2]);
    }
    fail("unknown function '" + f + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  size_t pos_ = 0;
};

void print(const Expr::Node& n, const std::vector<std::string>& vars, std::ostringstream& os) {
  static const char* names[] = {"", "", "+", "-", "*", "/", "^", "-", "<", "<=", ">", ">=", "==", "!=",
                                "if", "min", "max", "sin", "cos", "tan", "exp", "log", "sqrt", "abs",
                                "sinh", "cosh", "tanh", "sinc", "sign", "dsinc"};
  const char* nm = names[static_cast<int>(n.op)];
  switch (n.op) {
    case Op::Num: {
      os.precision(17);
      os << n.value;
      return;
    }
    case Op::Var: os << vars[n.var]; return;
    case Op::Neg: os << "(-"; print(*n.a, vars, os); os << ")"; return;
    case Op::If: case Op::Min: case Op::Max:
      os << nm << "(";
      print(*n.a, vars, os);
      os << ",";
      print(*n.b, vars, os);
      if (n.c) { os << ","; print(*n.c, vars, os); }
      os << ")";
      return;
    default: break;
  }
  if (unary(n.op)) {
    os << nm << "(";
    print(*n.a, vars, os);
    os << ")";
    return;
  }
  os << "(";
  print(*n.a, vars, os);
  os << nm;
  print(*n.b, vars, os);
  os << ")";
}

}  // namespace

Expr::Expr() : root_(num(0)) {}

Expr::Expr(std::shared_ptr<const Node> root, std::vector<std::string> vars) : root_(std::move(root)), vars_(std::move(vars)) {}

// variable-free subtrees collapse to numbers, so "0+(1)" reports as constant
static NodeP fold(const NodeP& n) {
  if (n->op == Op::Num || n->op == Op::Var) return n;
  auto r = std::make_shared<Expr::Node>(*n);
  bool all = true;
  for (NodeP* c : {&r->a, &r->b, &r->c})
    if (*c) {
      *c = fold(*c);
      all = all && (*c)->op == Op::Num;
    }
  if (all) return num(eval_node(*r, {}));
  return r;
}

Expr Expr::parse(const std::string& src, const std::vector<std::string>& vars) {
  Parser p(src, vars);
  return Expr(fold(p.parse()), vars);
}

Expr Expr::constant(double v) { return Expr(num(v), {}); }

double Expr::eval(std::span<const double> v) const {
  if (v.size() < vars_.size()) throw std::invalid_argument("too few variables for expression");
  return eval_node(*root_, v);
}

void Expr::eval_vec(std::span<const double* const> v, size_t count, double* out) const {
  if (v.size() < vars_.size()) throw std::invalid_argument("too few variables for expression");
  eval_node_vec(*root_, v, count, out);
}

Expr Expr::diff(int x) const { return Expr(diff_node(root_, x), vars_); }

bool Expr::is_constant(double* value) const {
  if (root_->op != Op::Num) return false;
  if (value) *value = root_->value;
  return true;
}

bool Expr::is_variable(int v) const { return root_->op == Op::Var && root_->var == v; }

std::string Expr::str() const {
  std::ostringstream os;
  print(*root_, vars_, os);
  return os.str();
}

}  // namespace roughspde
