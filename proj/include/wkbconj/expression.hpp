// Closed-form scalar expressions of (x1, x2, x3, t) with exact differentiation.
//
// Grammar: + - * / ^, sin, cos, exp, sqrt, numeric literals, the variables
// x1 x2 x3 t, and named parameters bound to constants at parse time.
// Expressions are immutable values; evaluation is thread-safe.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wkbconj {

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  std::size_t position;
};

class Expression {
 public:
  Expression();  // constant 0
  static Expression constant(double v);
  static Expression variable(int index);  // 0,1,2 -> x1,x2,x3; 3 -> t
  static Expression parse(const std::string& text,
                          const std::map<std::string, double>& params = {});

  double eval(double x1, double x2, double x3, double t) const;
  double eval(const Eigen::Vector3d& x, double t) const {
    return eval(x[0], x[1], x[2], t);
  }

  // Exact partial derivative with respect to variable `var` (0..3).
  Expression derivative(int var) const;

  bool is_constant(double* value = nullptr) const;
  bool depends_on(int var) const;
  std::string str() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  static Expression sin(const Expression& a);
  static Expression cos(const Expression& a);
  static Expression exp(const Expression& a);
  static Expression sqrt(const Expression& a);
  static Expression pow(const Expression& base, const Expression& expo);

 private:
  enum class Op : std::uint8_t {
    Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt, Log
  };
  struct Node {
    Op op = Op::Const;
    int a = -1, b = -1;
    double value = 0.0;
    int var = 0;
  };

  // Nodes are stored so that children precede parents; root_ indexes nodes_.
  std::vector<Node> nodes_;
  int root_ = -1;

  int import_subtree(const Expression& other, int idx);
  int make(Op op, int a, int b);
  int make_const(double v);
  int make_var(int var);
  void compact();
  std::string str_node(int idx) const;

  static Expression binary(Op op, const Expression& a, const Expression& b);
  static Expression unary(Op op, const Expression& a);

  friend class ExprParser;
};

}  // namespace wkbconj
