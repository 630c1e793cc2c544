#include "stransport/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

namespace stransport {

enum class Op { Const, X1, X2, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt, Abs, Sin, Cos };

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

std::optional<long long> as_integer(const NodePtr& n) {
  if (n->op != Op::Const) return std::nullopt;
  const double v = n->value;
  if (std::abs(v) > 1e15 || std::floor(v) != v) return std::nullopt;
  return static_cast<long long>(v);
}

/// Literal p/q recognized syntactically: integer, int/int, or a negation of either.
std::optional<std::pair<long long, long long>> literal_rational(const NodePtr& n) {
  if (auto i = as_integer(n)) return std::pair{*i, 1LL};
  if (n->op == Op::Div) {
    auto p = as_integer(n->a);
    auto q = as_integer(n->b);
    if (p && q && *q != 0) {
      if (*q < 0) return std::pair{-*p, -*q};
      return std::pair{*p, *q};
    }
  }
  if (n->op == Op::Neg) {
    if (auto r = literal_rational(n->a)) return std::pair{-r->first, r->second};
  }
  return std::nullopt;
}

NodePtr rational_node(long long p, long long q) {
  if (q == 1) return make_const(static_cast<double>(p));
  if (p < 0) return make(Op::Neg, make(Op::Div, make_const(static_cast<double>(-p)),
                                       make_const(static_cast<double>(q))));
  return make(Op::Div, make_const(static_cast<double>(p)), make_const(static_cast<double>(q)));
}

NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
  return make(Op::Add, std::move(a), std::move(b));
}

NodePtr neg(NodePtr a) {
  if (a->op == Op::Const) return make_const(-a->value);
  if (a->op == Op::Neg) return a->a;
  return make(Op::Neg, std::move(a));
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(std::move(b));
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
  return make(Op::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
  return make(Op::Mul, std::move(a), std::move(b));
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  return make(Op::Div, std::move(a), std::move(b));
}

bool depends(const NodePtr& n, Op var) {
  if (!n) return false;
  if (n->op == var) return true;
  return depends(n->a, var) || depends(n->b, var);
}

NodePtr derive(const NodePtr& n, Op var) {
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::X1:
    case Op::X2: return make_const(n->op == var ? 1.0 : 0.0);
    case Op::Add: return add(derive(n->a, var), derive(n->b, var));
    case Op::Sub: return sub(derive(n->a, var), derive(n->b, var));
    case Op::Mul:
      return add(mul(derive(n->a, var), n->b), mul(n->a, derive(n->b, var)));
    case Op::Div: {
      auto da = derive(n->a, var);
      auto db = derive(n->b, var);
      return sub(div(da, n->b), div(mul(n->a, db), mul(n->b, n->b)));
    }
    case Op::Pow: {
      auto da = derive(n->a, var);
      if (!depends(n->b, Op::X1) && !depends(n->b, Op::X2)) {
        NodePtr lowered;
        if (auto r = literal_rational(n->b)) {
          lowered = rational_node(r->first - r->second, r->second);
        } else {
          lowered = sub(n->b, make_const(1.0));
        }
        return mul(mul(n->b, make(Op::Pow, n->a, lowered)), da);
      }
      auto db = derive(n->b, var);
      auto inner = add(mul(db, make(Op::Log, n->a)), div(mul(n->b, da), n->a));
      return mul(n, inner);
    }
    case Op::Neg: return neg(derive(n->a, var));
    case Op::Exp: return mul(n, derive(n->a, var));
    case Op::Log: return div(derive(n->a, var), n->a);
    case Op::Sqrt: return div(derive(n->a, var), mul(make_const(2.0), n));
    case Op::Abs: return mul(div(n->a, n), derive(n->a, var));
    case Op::Sin: return mul(make(Op::Cos, n->a), derive(n->a, var));
    case Op::Cos: return neg(mul(make(Op::Sin, n->a), derive(n->a, var)));
  }
  return make_const(0.0);
}

std::string number_text(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

void print(const NodePtr& n, std::ostream& os) {
  auto fn = [&](const char* name) {
    os << name << '(';
    print(n->a, os);
    os << ')';
  };
  auto bin = [&](const char* sym) {
    os << '(';
    print(n->a, os);
    os << ' ' << sym << ' ';
    print(n->b, os);
    os << ')';
  };
  switch (n->op) {
    case Op::Const:
      if (n->value < 0 || std::signbit(n->value))
        os << "(-" << number_text(-n->value) << ')';
      else
        os << number_text(n->value);
      break;
    case Op::X1: os << "x1"; break;
    case Op::X2: os << "x2"; break;
    case Op::Add: bin("+"); break;
    case Op::Sub: bin("-"); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Pow: bin("^"); break;
    case Op::Neg:
      os << "(-";
      print(n->a, os);
      os << ')';
      break;
    case Op::Exp: fn("exp"); break;
    case Op::Log: fn("log"); break;
    case Op::Sqrt: fn("sqrt"); break;
    case Op::Abs: fn("abs"); break;
    case Op::Sin: fn("sin"); break;
    case Op::Cos: fn("cos"); break;
  }
}

std::string to_text(const NodePtr& n) {
  std::ostringstream os;
  print(n, os);
  return os.str();
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr run() {
    skip();
    if (pos_ == text_.size()) fail("empty expression");
    auto n = expression();
    skip();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }

  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    throw ParseError("syntax error at position " + std::to_string(at) + ": " + msg, at);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expression();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || end != text_.data() + pos_) fail_at("malformed number", start);
    return make_const(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x1") return make(Op::X1);
    if (name == "x2") return make(Op::X2);
    if (name == "pi") return make_const(std::numbers::pi);

    static constexpr std::array<std::pair<std::string_view, Op>, 6> unary_fns{{
        {"exp", Op::Exp}, {"log", Op::Log}, {"sqrt", Op::Sqrt},
        {"abs", Op::Abs}, {"sin", Op::Sin}, {"cos", Op::Cos}}};
    for (const auto& [fname, op] : unary_fns) {
      if (name == fname) {
        expect('(');
        auto arg = expression();
        expect(')');
        return make(op, arg);
      }
    }
    if (name == "pow") {
      expect('(');
      auto base = expression();
      expect(',');
      auto exponent = expression();
      expect(')');
      return make(Op::Pow, base, exponent);
    }
    fail_at("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

// Postfix form of the tree; evaluation walks it with a fixed stack.
struct Expr::Program {
  struct Instr {
    Op op;
    double value;
    // Pow only: -1 generic, 0/1 parity of p for a literal exponent p/q with odd q.
    int odd_root_parity;
    // Div only: denominator is abs(.), a zero there is a kink not a pole.
    bool abs_denominator;
    const Node* node;
  };
  std::vector<Instr> code;
  std::size_t depth = 0;
};

namespace {

std::size_t compile(const Expr::Node* n, std::vector<Expr::Program::Instr>& code) {
  std::size_t depth = 1;
  if (n->a) depth = std::max(depth, compile(n->a.get(), code));
  if (n->b) depth = std::max(depth, 1 + compile(n->b.get(), code));
  Expr::Program::Instr ins{n->op, n->value, -1, false, n};
  if (n->op == Op::Pow) {
    if (auto r = literal_rational(n->b); r && r->second % 2 != 0)
      ins.odd_root_parity = static_cast<int>(std::abs(r->first) % 2);
  }
  if (n->op == Op::Div) ins.abs_denominator = n->b->op == Op::Abs;
  code.push_back(ins);
  return depth;
}

[[noreturn]] void raise(EvalFault fault, const Expr::Node* n, double x1, double x2) {
  std::string what;
  switch (fault) {
    case EvalFault::DivisionByZero: what = "division by zero"; break;
    case EvalFault::Domain: what = "argument outside domain"; break;
    case EvalFault::NonFinite: what = "non-finite value"; break;
    case EvalFault::NonSmooth: what = "non-smooth point (derivative of abs at 0)"; break;
  }
  // Node lifetime is owned by the caller's Expr; rebuild a text view of it.
  auto alias = NodePtr(NodePtr{}, n);
  std::string sub = to_text(alias);
  std::ostringstream os;
  os << what << " in '" << sub << "' at (" << x1 << ", " << x2 << ")";
  throw EvalError(fault, sub, os.str());
}

}  // namespace

Expr::Expr() : Expr(make_const(0.0)) {}

Expr::Expr(double value) : Expr(make_const(value)) {}

Expr::Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {
  auto prog = std::make_shared<Program>();
  prog->depth = compile(root_.get(), prog->code);
  program_ = std::move(prog);
}

Expr Expr::variable(Var v) { return Expr(make(v == Var::X1 ? Op::X1 : Op::X2)); }

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).run()); }

double Expr::operator()(double x1, double x2) const {
  constexpr std::size_t kInline = 64;
  std::array<double, kInline> fixed{};
  std::vector<double> heap;
  double* st = fixed.data();
  if (program_->depth > kInline) {
    heap.resize(program_->depth);
    st = heap.data();
  }
  std::size_t top = 0;
  for (const auto& ins : program_->code) {
    double r = 0.0;
    switch (ins.op) {
      case Op::Const: r = ins.value; break;
      case Op::X1: r = x1; break;
      case Op::X2: r = x2; break;
      case Op::Neg: r = -st[top - 1]; --top; break;
      case Op::Exp: r = std::exp(st[--top]); break;
      case Op::Log: {
        const double v = st[--top];
        if (!(v > 0.0)) raise(EvalFault::Domain, ins.node, x1, x2);
        r = std::log(v);
        break;
      }
      case Op::Sqrt: {
        const double v = st[--top];
        if (v < 0.0) raise(EvalFault::Domain, ins.node, x1, x2);
        r = std::sqrt(v);
        break;
      }
      case Op::Abs: r = std::abs(st[--top]); break;
      case Op::Sin: r = std::sin(st[--top]); break;
      case Op::Cos: r = std::cos(st[--top]); break;
      default: {
        const double rhs = st[--top];
        const double lhs = st[--top];
        switch (ins.op) {
          case Op::Add: r = lhs + rhs; break;
          case Op::Sub: r = lhs - rhs; break;
          case Op::Mul: r = lhs * rhs; break;
          case Op::Div:
            if (rhs == 0.0)
              raise(ins.abs_denominator ? EvalFault::NonSmooth : EvalFault::DivisionByZero,
                    ins.node, x1, x2);
            r = lhs / rhs;
            break;
          case Op::Pow:
            if (lhs > 0.0) {
              r = std::pow(lhs, rhs);
            } else if (lhs == 0.0) {
              if (rhs < 0.0) raise(EvalFault::DivisionByZero, ins.node, x1, x2);
              r = rhs == 0.0 ? 1.0 : 0.0;
            } else if (std::floor(rhs) == rhs) {
              r = std::pow(lhs, rhs);
            } else if (ins.odd_root_parity >= 0) {
              const double mag = std::pow(-lhs, rhs);
              r = ins.odd_root_parity == 1 ? -mag : mag;
            } else {
              raise(EvalFault::Domain, ins.node, x1, x2);
            }
            break;
          default: break;
        }
      }
    }
    if (!std::isfinite(r)) raise(EvalFault::NonFinite, ins.node, x1, x2);
    st[top++] = r;
  }
  return st[0];
}

Expr Expr::derivative(Var v) const {
  return Expr(derive(root_, v == Var::X1 ? Op::X1 : Op::X2));
}

std::string Expr::str() const { return to_text(root_); }

bool Expr::depends_on(Var v) const { return depends(root_, v == Var::X1 ? Op::X1 : Op::X2); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(add(a.root_, b.root_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(sub(a.root_, b.root_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(mul(a.root_, b.root_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make(Op::Div, a.root_, b.root_)); }
Expr operator-(const Expr& a) { return Expr(neg(a.root_)); }
Expr pow(const Expr& base, const Expr& exponent) {
  return Expr(make(Op::Pow, base.root_, exponent.root_));
}
Expr exp(const Expr& a) { return Expr(make(Op::Exp, a.root_)); }

}  // namespace stransport
