#include "wkbconj/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>

namespace wkbconj {

Expression::Expression() { root_ = make_const(0.0); }

Expression Expression::constant(double v) {
  Expression e;
  e.nodes_.clear();
  e.root_ = e.make_const(v);
  return e;
}

Expression Expression::variable(int index) {
  Expression e;
  e.nodes_.clear();
  e.root_ = e.make_var(index);
  return e;
}

int Expression::make_const(double v) {
  nodes_.push_back(Node{Op::Const, -1, -1, v, 0});
  return static_cast<int>(nodes_.size()) - 1;
}

int Expression::make_var(int var) {
  if (var < 0 || var > 3) throw std::invalid_argument("expression variable index out of range");
  Node n;
  n.op = Op::Var;
  n.var = var;
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

// Appends a node, folding constants and eliding identities so that
// mechanically produced derivatives stay small.
int Expression::make(Op op, int a, int b) {
  auto fold1 = [](Op o, double x) {
    switch (o) {
      case Op::Sin: return std::sin(x);
      case Op::Cos: return std::cos(x);
      case Op::Exp: return std::exp(x);
      case Op::Sqrt: return std::sqrt(x);
      case Op::Log: return std::log(x);
      default: return 0.0;
    }
  };
  auto is_c = [&](int i, double* v = nullptr) {
    if (i < 0 || nodes_[i].op != Op::Const) return false;
    if (v) *v = nodes_[i].value;
    return true;
  };
  double va = 0.0, vb = 0.0;
  const bool ca = is_c(a, &va);
  const bool cb = b >= 0 && is_c(b, &vb);

  switch (op) {
    case Op::Add:
      if (ca && cb) return make_const(va + vb);
      if (ca && va == 0.0) return b;
      if (cb && vb == 0.0) return a;
      break;
    case Op::Sub:
      if (ca && cb) return make_const(va - vb);
      if (cb && vb == 0.0) return a;
      if (ca && va == 0.0) return make(Op::Neg, b, -1);
      break;
    case Op::Mul:
      if (ca && cb) return make_const(va * vb);
      if ((ca && va == 0.0) || (cb && vb == 0.0)) return make_const(0.0);
      if (ca && va == 1.0) return b;
      if (cb && vb == 1.0) return a;
      if (ca && va == -1.0) return make(Op::Neg, b, -1);
      if (cb && vb == -1.0) return make(Op::Neg, a, -1);
      break;
    case Op::Div:
      if (ca && cb && vb != 0.0) return make_const(va / vb);
      if (ca && va == 0.0) return make_const(0.0);
      if (cb && vb == 1.0) return a;
      break;
    case Op::Pow:
      if (ca && cb) return make_const(std::pow(va, vb));
      if (cb && vb == 1.0) return a;
      if (cb && vb == 0.0) return make_const(1.0);
      break;
    case Op::Neg:
      if (ca) return make_const(-va);
      if (nodes_[a].op == Op::Neg) return nodes_[a].a;
      break;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt:
    case Op::Log:
      if (ca) return make_const(fold1(op, va));
      break;
    default:
      break;
  }
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

int Expression::import_subtree(const Expression& other, int idx) {
  const auto& n = other.nodes_[idx];
  switch (n.op) {
    case Op::Const:
      return make_const(n.value);
    case Op::Var:
      return make_var(n.var);
    default: {
      const int a = import_subtree(other, n.a);
      const int b = n.b >= 0 ? import_subtree(other, n.b) : -1;
      return make(n.op, a, b);
    }
  }
}

// Drops nodes unreachable from the root and renumbers in topological order.
void Expression::compact() {
  std::vector<int> remap(nodes_.size(), -1);
  std::vector<Node> out;
  std::function<int(int)> visit = [&](int i) -> int {
    if (remap[i] >= 0) return remap[i];
    Node n = nodes_[i];
    if (n.a >= 0) n.a = visit(n.a);
    if (n.b >= 0) n.b = visit(n.b);
    out.push_back(n);
    remap[i] = static_cast<int>(out.size()) - 1;
    return remap[i];
  };
  root_ = visit(root_);
  nodes_ = std::move(out);
}

Expression Expression::binary(Op op, const Expression& a, const Expression& b) {
  Expression r;
  r.nodes_.clear();
  const int ia = r.import_subtree(a, a.root_);
  const int ib = r.import_subtree(b, b.root_);
  r.root_ = r.make(op, ia, ib);
  r.compact();
  return r;
}

Expression Expression::unary(Op op, const Expression& a) {
  Expression r;
  r.nodes_.clear();
  const int ia = r.import_subtree(a, a.root_);
  r.root_ = r.make(op, ia, -1);
  r.compact();
  return r;
}

Expression operator+(const Expression& a, const Expression& b) {
  return Expression::binary(Expression::Op::Add, a, b);
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression::binary(Expression::Op::Sub, a, b);
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression::binary(Expression::Op::Mul, a, b);
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression::binary(Expression::Op::Div, a, b);
}
Expression operator-(const Expression& a) {
  return Expression::unary(Expression::Op::Neg, a);
}
Expression Expression::sin(const Expression& a) { return unary(Op::Sin, a); }
Expression Expression::cos(const Expression& a) { return unary(Op::Cos, a); }
Expression Expression::exp(const Expression& a) { return unary(Op::Exp, a); }
Expression Expression::sqrt(const Expression& a) { return unary(Op::Sqrt, a); }
Expression Expression::pow(const Expression& base, const Expression& expo) {
  return binary(Op::Pow, base, expo);
}

double Expression::eval(double x1, double x2, double x3, double t) const {
  thread_local std::vector<double> v;
  if (v.size() < nodes_.size()) v.resize(nodes_.size());
  const double vars[4] = {x1, x2, x3, t};
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Const: v[i] = n.value; break;
      case Op::Var: v[i] = vars[n.var]; break;
      case Op::Add: v[i] = v[n.a] + v[n.b]; break;
      case Op::Sub: v[i] = v[n.a] - v[n.b]; break;
      case Op::Mul: v[i] = v[n.a] * v[n.b]; break;
      case Op::Div: v[i] = v[n.a] / v[n.b]; break;
      case Op::Pow: v[i] = std::pow(v[n.a], v[n.b]); break;
      case Op::Neg: v[i] = -v[n.a]; break;
      case Op::Sin: v[i] = std::sin(v[n.a]); break;
      case Op::Cos: v[i] = std::cos(v[n.a]); break;
      case Op::Exp: v[i] = std::exp(v[n.a]); break;
      case Op::Sqrt: v[i] = std::sqrt(v[n.a]); break;
      case Op::Log: v[i] = std::log(v[n.a]); break;
    }
  }
  return v[root_];
}

bool Expression::is_constant(double* value) const {
  if (nodes_[root_].op != Op::Const) return false;
  if (value) *value = nodes_[root_].value;
  return true;
}

bool Expression::depends_on(int var) const {
  for (const Node& n : nodes_)
    if (n.op == Op::Var && n.var == var) return true;
  return false;
}

Expression Expression::derivative(int var) const {
  Expression r;
  r.nodes_.clear();
  std::vector<int> orig(nodes_.size(), -1);
  std::vector<int> diff(nodes_.size(), -1);

  std::function<int(int)> imp = [&](int i) -> int {
    if (orig[i] >= 0) return orig[i];
    const Node& n = nodes_[i];
    int out;
    if (n.op == Op::Const) {
      out = r.make_const(n.value);
    } else if (n.op == Op::Var) {
      out = r.make_var(n.var);
    } else {
      const int a = imp(n.a);
      const int b = n.b >= 0 ? imp(n.b) : -1;
      out = r.make(n.op, a, b);
    }
    orig[i] = out;
    return out;
  };

  std::function<int(int)> dd = [&](int i) -> int {
    if (diff[i] >= 0) return diff[i];
    const Node& n = nodes_[i];
    int out = -1;
    switch (n.op) {
      case Op::Const:
        out = r.make_const(0.0);
        break;
      case Op::Var:
        out = r.make_const(n.var == var ? 1.0 : 0.0);
        break;
      case Op::Add:
        out = r.make(Op::Add, dd(n.a), dd(n.b));
        break;
      case Op::Sub:
        out = r.make(Op::Sub, dd(n.a), dd(n.b));
        break;
      case Op::Neg:
        out = r.make(Op::Neg, dd(n.a), -1);
        break;
      case Op::Mul: {
        const int lhs = r.make(Op::Mul, dd(n.a), imp(n.b));
        const int rhs = r.make(Op::Mul, imp(n.a), dd(n.b));
        out = r.make(Op::Add, lhs, rhs);
        break;
      }
      case Op::Div: {
        const int num1 = r.make(Op::Mul, dd(n.a), imp(n.b));
        const int num2 = r.make(Op::Mul, imp(n.a), dd(n.b));
        const int num = r.make(Op::Sub, num1, num2);
        const int den = r.make(Op::Mul, imp(n.b), imp(n.b));
        out = r.make(Op::Div, num, den);
        break;
      }
      case Op::Pow: {
        double e;
        if (nodes_[n.b].op == Op::Const) {
          // d(a^k) = k a^(k-1) a'
          e = nodes_[n.b].value;
          const int k = r.make_const(e);
          const int km1 = r.make_const(e - 1.0);
          const int p = r.make(Op::Pow, imp(n.a), km1);
          out = r.make(Op::Mul, r.make(Op::Mul, k, p), dd(n.a));
        } else {
          // d(a^b) = a^b (b' log a + b a'/a)
          const int ab = r.make(Op::Pow, imp(n.a), imp(n.b));
          const int t1 = r.make(Op::Mul, dd(n.b), r.make(Op::Log, imp(n.a), -1));
          const int t2 = r.make(Op::Div, r.make(Op::Mul, imp(n.b), dd(n.a)), imp(n.a));
          out = r.make(Op::Mul, ab, r.make(Op::Add, t1, t2));
        }
        break;
      }
      case Op::Sin:
        out = r.make(Op::Mul, r.make(Op::Cos, imp(n.a), -1), dd(n.a));
        break;
      case Op::Cos:
        out = r.make(Op::Neg, r.make(Op::Mul, r.make(Op::Sin, imp(n.a), -1), dd(n.a)), -1);
        break;
      case Op::Exp:
        out = r.make(Op::Mul, r.make(Op::Exp, imp(n.a), -1), dd(n.a));
        break;
      case Op::Sqrt: {
        const int den = r.make(Op::Mul, r.make_const(2.0), r.make(Op::Sqrt, imp(n.a), -1));
        out = r.make(Op::Div, dd(n.a), den);
        break;
      }
      case Op::Log:
        out = r.make(Op::Div, dd(n.a), imp(n.a));
        break;
    }
    diff[i] = out;
    return out;
  };

  r.root_ = dd(root_);
  r.compact();
  return r;
}

std::string Expression::str_node(int idx) const {
  static const char* var_names[4] = {"x1", "x2", "x3", "t"};
  const Node& n = nodes_[idx];
  switch (n.op) {
    case Op::Const: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%g", n.value);
      return buf;
    }
    case Op::Var: return var_names[n.var];
    case Op::Add: return "(" + str_node(n.a) + " + " + str_node(n.b) + ")";
    case Op::Sub: return "(" + str_node(n.a) + " - " + str_node(n.b) + ")";
    case Op::Mul: return "(" + str_node(n.a) + " * " + str_node(n.b) + ")";
    case Op::Div: return "(" + str_node(n.a) + " / " + str_node(n.b) + ")";
    case Op::Pow: return "(" + str_node(n.a) + " ^ " + str_node(n.b) + ")";
    case Op::Neg: return "(-" + str_node(n.a) + ")";
    case Op::Sin: return "sin(" + str_node(n.a) + ")";
    case Op::Cos: return "cos(" + str_node(n.a) + ")";
    case Op::Exp: return "exp(" + str_node(n.a) + ")";
    case Op::Sqrt: return "sqrt(" + str_node(n.a) + ")";
    case Op::Log: return "log(" + str_node(n.a) + ")";
  }
  return "?";
}

std::string Expression::str() const { return str_node(root_); }

// ---------------------------------------------------------------------------
// Parser

class ExprParser {
 public:
  ExprParser(const std::string& text, const std::map<std::string, double>& params,
             Expression& out)
      : text_(text), params_(params), e_(out) {}

  void run() {
    e_.nodes_.clear();
    skip_ws();
    e_.root_ = parse_expr();
    skip_ws();
    if (pos_ < text_.size())
      throw ParseError("unexpected trailing input '" + text_.substr(pos_) + "'", pos_);
    e_.compact();
  }

 private:
  using Op = Expression::Op;

  const std::string& text_;
  const std::map<std::string, double>& params_;
  Expression& e_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool match(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (match('+')) {
        lhs = e_.make(Op::Add, lhs, parse_term());
      } else if (match('-')) {
        lhs = e_.make(Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (match('*')) {
        lhs = e_.make(Op::Mul, lhs, parse_unary());
      } else if (match('/')) {
        lhs = e_.make(Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (match('-')) return e_.make(Op::Neg, parse_unary(), -1);
    if (match('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (match('^')) return e_.make(Op::Pow, base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!match(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  int parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    return e_.make_const(v);
  }

  int parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);

    Op fn_op{};
    bool is_fn = true;
    if (name == "sin") fn_op = Op::Sin;
    else if (name == "cos") fn_op = Op::Cos;
    else if (name == "exp") fn_op = Op::Exp;
    else if (name == "sqrt") fn_op = Op::Sqrt;
    else is_fn = false;

    if (is_fn) {
      if (!match('(')) throw ParseError("expected '(' after function '" + name + "'", pos_);
      const int arg = parse_expr();
      if (!match(')')) throw ParseError("expected ')'", pos_);
      return e_.make(fn_op, arg, -1);
    }
    if (name == "x1") return e_.make_var(0);
    if (name == "x2") return e_.make_var(1);
    if (name == "x3") return e_.make_var(2);
    if (name == "t") return e_.make_var(3);
    auto it = params_.find(name);
    if (it != params_.end()) return e_.make_const(it->second);
    throw ParseError("unknown identifier '" + name + "'", start);
  }
};

Expression Expression::parse(const std::string& text,
                             const std::map<std::string, double>& params) {
  Expression e;
  ExprParser(text, params, e).run();
  return e;
}

}  // namespace wkbconj
