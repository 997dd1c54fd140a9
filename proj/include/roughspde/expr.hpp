#pragma once
// Small arithmetic expression language used by scheme and problem files.
//
//   numbers, pi, inf, named variables
//   + - * / ^, unary minus, comparisons (< <= > >= == !=) yielding 1 or 0
//   sin cos tan exp log sqrt abs sinh cosh tanh sinc(x)=sin(x)/x
//   min(a,b) max(a,b) pow(a,b) if(c,a,b)
//
// Expressions are immutable and can be differentiated symbolically.

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughspde {

struct ParseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class Expr {
 public:
  struct Node;

  Expr();  // the constant 0
  static Expr parse(const std::string& src, const std::vector<std::string>& vars);
  static Expr constant(double v);

  double eval(std::span<const double> vars) const;
  // pointwise evaluation over arrays: vars[i][p], p < count
  void eval_vec(std::span<const double* const> vars, size_t count, double* out) const;

  Expr diff(int var) const;
  bool is_constant(double* value = nullptr) const;
  // true if the expression is exactly variable `var`
  bool is_variable(int var) const;
  std::string str() const;
  const std::vector<std::string>& vars() const { return vars_; }

 private:
  Expr(std::shared_ptr<const Node> root, std::vector<std::string> vars);
  std::shared_ptr<const Node> root_;
  std::vector<std::string> vars_;
};

}  // namespace roughspde
