#include "relsim/expr.hpp"

#include <cassert>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace relsim {

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // fold away the sign of zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
  Kind kind = Kind::End;
  std::size_t offset = 0;  // 0-based start position in the source
  double number = 0.0;
  std::string ident;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    Token tok;
    tok.offset = pos_;
    if (pos_ >= src_.size()) {
      tok.kind = Token::Kind::End;
      return tok;
    }
    char ch = src_[pos_];
    switch (ch) {
      case '+': ++pos_; tok.kind = Token::Kind::Plus; return tok;
      case '-': ++pos_; tok.kind = Token::Kind::Minus; return tok;
      case '*': ++pos_; tok.kind = Token::Kind::Star; return tok;
      case '/': ++pos_; tok.kind = Token::Kind::Slash; return tok;
      case '^': ++pos_; tok.kind = Token::Kind::Caret; return tok;
      case '(': ++pos_; tok.kind = Token::Kind::LParen; return tok;
      case ')': ++pos_; tok.kind = Token::Kind::RParen; return tok;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return lex_number();
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') return lex_ident();
    throw ParseError(pos_ + 1, "number, name, operator, or parenthesis",
                     std::string("unexpected character '") + ch + "'");
  }

 private:
  Token lex_number() {
    std::size_t start = pos_;
    bool any_digit = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
      any_digit = true;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        any_digit = true;
      }
    }
    if (!any_digit)
      throw ParseError(start + 1, "digit", "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        pos_ = mark;  // 'e' belongs to an identifier? not valid after number; treat as end
      } else {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    Token tok;
    tok.kind = Token::Kind::Number;
    tok.offset = start;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto res = std::from_chars(first, last, tok.number);
    if (res.ec != std::errc() || res.ptr != last)
      throw ParseError(start + 1, "valid number literal", "malformed number");
    return tok;
  }

  Token lex_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    Token tok;
    tok.kind = Token::Kind::Ident;
    tok.offset = start;
    tok.ident = std::string(src_.substr(start, pos_ - start));
    return tok;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

class ExprParser {
 public:
  ExprParser(std::string_view src, std::span<const std::string> params)
      : lexer_(src), src_size_(src.size()) {
    expr_.nodes_.clear();
    expr_.param_names_.assign(params.begin(), params.end());
    advance();
  }

  Expr run() {
    expr_.root_ = parse_expr();
    if (cur_.kind != Token::Kind::End)
      throw ParseError(cur_.offset + 1, "operator or end of input", "trailing input");
    return std::move(expr_);
  }

 private:
  using Kind = Token::Kind;

  void advance() { cur_ = lexer_.next(); }

  std::size_t eof_offset() const { return src_size_ + 1; }  // 1-based position past the end

  int parse_expr() {
    int lhs = parse_term();
    while (cur_.kind == Kind::Plus || cur_.kind == Kind::Minus) {
      bool plus = cur_.kind == Kind::Plus;
      advance();
      int rhs = parse_term();
      Expr::Node n;
      n.op = plus ? Expr::Op::Add : Expr::Op::Sub;
      n.a = lhs;
      n.b = rhs;
      lhs = expr_.add_node(n);
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_unary();
    while (cur_.kind == Kind::Star || cur_.kind == Kind::Slash) {
      bool mul = cur_.kind == Kind::Star;
      advance();
      int rhs = parse_unary();
      Expr::Node n;
      n.op = mul ? Expr::Op::Mul : Expr::Op::Div;
      n.a = lhs;
      n.b = rhs;
      lhs = expr_.add_node(n);
    }
    return lhs;
  }

  int parse_unary() {
    if (cur_.kind == Kind::Minus) {
      advance();
      int child = parse_unary();
      Expr::Node n;
      n.op = Expr::Op::Neg;
      n.a = child;
      return expr_.add_node(n);
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    if (cur_.kind == Kind::Caret) {
      advance();
      int exponent = parse_unary();  // right-associative, unary allowed in exponent
      Expr::Node n;
      n.op = Expr::Op::Pow;
      n.a = base;
      n.b = exponent;
      return expr_.add_node(n);
    }
    return base;
  }

  int parse_atom() {
    switch (cur_.kind) {
      case Kind::Number: {
        int idx = expr_.add_node(Expr::Node::make_lit(cur_.number));
        advance();
        return idx;
      }
      case Kind::Ident:
        return parse_name();
      case Kind::LParen: {
        advance();
        int inner = parse_expr();
        expect_rparen();
        return inner;
      }
      case Kind::Minus:
        // unreachable through parse_unary, kept for safety
        return parse_unary();
      case Kind::End:
        throw ParseError(eof_offset(), "number, name, '(' or '-'", "unexpected end of input");
      default:
        throw ParseError(cur_.offset + 1, "number, name, '(' or '-'", "unexpected token");
    }
  }

  static const Expr::Fn* find_function(const std::string& name) {
    static const std::pair<const char*, Expr::Fn> table[] = {
        {"sin", Expr::Fn::Sin},   {"cos", Expr::Fn::Cos},   {"tan", Expr::Fn::Tan},
        {"exp", Expr::Fn::Exp},   {"log", Expr::Fn::Log},   {"sqrt", Expr::Fn::Sqrt},
        {"sinh", Expr::Fn::Sinh}, {"cosh", Expr::Fn::Cosh}, {"tanh", Expr::Fn::Tanh},
        {"abs", Expr::Fn::Abs},
    };
    for (const auto& entry : table)
      if (name == entry.first) return &entry.second;
    return nullptr;
  }

  int parse_name() {
    Token tok = cur_;
    advance();
    const Expr::Fn* fn = find_function(tok.ident);
    if (cur_.kind == Kind::LParen) {
      if (!fn)
        throw ParseError(tok.offset + 1, "function name",
                         "'" + tok.ident + "' is not a function");
      advance();
      int arg = parse_expr();
      expect_rparen();
      Expr::Node n;
      n.op = Expr::Op::Fun;
      n.fn = *fn;
      n.a = arg;
      return expr_.add_node(n);
    }
    if (tok.ident.size() == 2 && tok.ident[0] == 'q' && tok.ident[1] >= '1' &&
        tok.ident[1] <= '4') {
      Expr::Node n;
      n.op = Expr::Op::Var;
      n.slot = tok.ident[1] - '1';
      return expr_.add_node(n);
    }
    if (tok.ident == "c") {
      Expr::Node n;
      n.op = Expr::Op::LightSpeed;
      return expr_.add_node(n);
    }
    if (tok.ident == "pi") return expr_.add_node(Expr::Node::make_lit(M_PI));
    for (std::size_t i = 0; i < expr_.param_names_.size(); ++i) {
      if (expr_.param_names_[i] == tok.ident) {
        Expr::Node n;
        n.op = Expr::Op::Param;
        n.slot = static_cast<int>(i);
        return expr_.add_node(n);
      }
    }
    throw Error(ErrorCode::UnknownIdentifier,
                "'" + tok.ident + "' at offset " + std::to_string(tok.offset + 1) +
                    " is not q1..q4, c, pi, or a declared parameter");
  }

  void expect_rparen() {
    if (cur_.kind != Kind::RParen) {
      std::size_t off = cur_.kind == Kind::End ? eof_offset() : cur_.offset + 1;
      throw ParseError(off, "')'", "unbalanced parenthesis");
    }
    advance();
  }

  Lexer lexer_;
  std::size_t src_size_;
  Token cur_;
  Expr expr_;
};

Expr Expr::parse(std::string_view source, std::span<const std::string> params) {
  if (source.empty())
    throw ParseError(1, "nonempty expression", "empty source");
  return ExprParser(source, params).run();
}

Expr Expr::scaled(double k, const Expr& e) {
  if (k == 0.0) return Expr::literal(0.0);
  if (k == 1.0) return e;
  Expr out = e;
  int lit = out.add_node(Node::make_lit(k));
  Node mul;
  mul.op = Op::Mul;
  mul.a = lit;
  mul.b = out.root_;
  out.root_ = out.add_node(mul);
  return out;
}

double Expr::value_node(int idx, const std::array<double, 4>& q, double c,
                        std::span<const double> params) const {
  const Node& n = nodes_[idx];
  switch (n.op) {
    case Op::Lit: return n.lit;
    case Op::Var: return q[n.slot];
    case Op::LightSpeed: return c;
    case Op::Param:
      if (n.slot >= static_cast<int>(params.size()))
        throw Error(ErrorCode::UnknownIdentifier,
                    "parameter '" + param_names_[n.slot] + "' has no bound value");
      return params[n.slot];
    case Op::Neg: return -value_node(n.a, q, c, params);
    case Op::Add: return value_node(n.a, q, c, params) + value_node(n.b, q, c, params);
    case Op::Sub: return value_node(n.a, q, c, params) - value_node(n.b, q, c, params);
    case Op::Mul: return value_node(n.a, q, c, params) * value_node(n.b, q, c, params);
    case Op::Div: {
      double den = value_node(n.b, q, c, params);
      if (den == 0.0) domain_error(idx, "division by zero");
      return value_node(n.a, q, c, params) / den;
    }
    case Op::Pow: {
      double base = value_node(n.a, q, c, params);
      double expo = value_node(n.b, q, c, params);
      double integral = 0.0;
      bool int_expo = std::modf(expo, &integral) == 0.0 && std::fabs(expo) < 1e15;
      if (int_expo) {
        if (base == 0.0 && expo < 0.0) domain_error(idx, "zero base with negative exponent");
        return std::pow(base, expo);
      }
      if (base <= 0.0) domain_error(idx, "non-integer power of a non-positive base");
      return std::pow(base, expo);
    }
    case Op::Fun: {
      double a = value_node(n.a, q, c, params);
      switch (n.fn) {
        case Fn::Sin: return std::sin(a);
        case Fn::Cos: return std::cos(a);
        case Fn::Tan:
          if (std::cos(a) == 0.0) domain_error(idx, "tan at a pole");
          return std::tan(a);
        case Fn::Exp: return std::exp(a);
        case Fn::Log:
          if (a <= 0.0) domain_error(idx, "log of a non-positive argument");
          return std::log(a);
        case Fn::Sqrt:
          if (a < 0.0) domain_error(idx, "sqrt of a negative argument");
          return std::sqrt(a);
        case Fn::Sinh: return std::sinh(a);
        case Fn::Cosh: return std::cosh(a);
        case Fn::Tanh: return std::tanh(a);
        case Fn::Abs: return std::fabs(a);
      }
      break;
    }
  }
  throw Error(ErrorCode::DomainError, "corrupt expression node");
}

Dual4 Expr::dual_node(int idx, const std::array<double, 4>& q, double c,
                      std::span<const double> params) const {
  const Node& n = nodes_[idx];
  switch (n.op) {
    case Op::Lit: return dual_const(n.lit);
    case Op::Var: return dual_var(q[n.slot], n.slot);
    case Op::LightSpeed: return dual_const(c);
    case Op::Param:
      if (n.slot >= static_cast<int>(params.size()))
        throw Error(ErrorCode::UnknownIdentifier,
                    "parameter '" + param_names_[n.slot] + "' has no bound value");
      return dual_const(params[n.slot]);
    case Op::Neg: return -dual_node(n.a, q, c, params);
    case Op::Add: return dual_node(n.a, q, c, params) + dual_node(n.b, q, c, params);
    case Op::Sub: return dual_node(n.a, q, c, params) - dual_node(n.b, q, c, params);
    case Op::Mul: return dual_node(n.a, q, c, params) * dual_node(n.b, q, c, params);
    case Op::Div: {
      Dual4 den = dual_node(n.b, q, c, params);
      if (den.val == 0.0) domain_error(idx, "division by zero");
      return dual_node(n.a, q, c, params) / den;
    }
    case Op::Pow: {
      Dual4 base = dual_node(n.a, q, c, params);
      Dual4 expo = dual_node(n.b, q, c, params);
      bool expo_const =
          expo.d[0] == 0.0 && expo.d[1] == 0.0 && expo.d[2] == 0.0 && expo.d[3] == 0.0;
      double integral = 0.0;
      bool int_expo = expo_const && std::modf(expo.val, &integral) == 0.0 &&
                      std::fabs(expo.val) < 1e9;
      if (int_expo) {
        if (base.val == 0.0 && expo.val < 0.0)
          domain_error(idx, "zero base with negative exponent");
        return pow_int(base, static_cast<long long>(integral));
      }
      if (base.val <= 0.0) domain_error(idx, "non-integer power of a non-positive base");
      return pow_general(base, expo);
    }
    case Op::Fun: {
      Dual4 a = dual_node(n.a, q, c, params);
      switch (n.fn) {
        case Fn::Sin: return sin(a);
        case Fn::Cos: return cos(a);
        case Fn::Tan:
          if (std::cos(a.val) == 0.0) domain_error(idx, "tan at a pole");
          return tan(a);
        case Fn::Exp: return exp(a);
        case Fn::Log:
          if (a.val <= 0.0) domain_error(idx, "log of a non-positive argument");
          return log(a);
        case Fn::Sqrt:
          if (a.val < 0.0) domain_error(idx, "sqrt of a negative argument");
          if (a.val == 0.0) {
            if (a.d[0] != 0.0 || a.d[1] != 0.0 || a.d[2] != 0.0 || a.d[3] != 0.0)
              domain_error(idx, "sqrt derivative singular at zero");
            return dual_const(0.0);
          }
          return sqrt(a);
        case Fn::Sinh: return sinh(a);
        case Fn::Cosh: return cosh(a);
        case Fn::Tanh: return tanh(a);
        case Fn::Abs: return abs(a);
      }
      break;
    }
  }
  throw Error(ErrorCode::DomainError, "corrupt expression node");
}

double Expr::value(const std::array<double, 4>& q, double c,
                   std::span<const double> params) const {
  return value_node(root_, q, c, params);
}

Dual4 Expr::dual(const std::array<double, 4>& q, double c,
                 std::span<const double> params) const {
  return dual_node(root_, q, c, params);
}

void Expr::domain_error(int idx, const std::string& reason) const {
  std::string sub;
  print_node(idx, 0, sub);
  throw Error(ErrorCode::DomainError, reason + " in '" + sub + "'");
}

namespace {
const char* fn_name(int fn) {
  static const char* names[] = {"sin",  "cos",  "tan",  "exp",  "log",
                                "sqrt", "sinh", "cosh", "tanh", "abs"};
  return names[fn];
}
}  // namespace

// Precedence levels: additive 1, multiplicative 2, unary minus 3, power 4,
// atoms 5. A node is parenthesized when its level is below what the parent
// position requires.
void Expr::print_node(int idx, int parent_prec, std::string& out) const {
  const Node& n = nodes_[idx];
  int prec;
  switch (n.op) {
    case Op::Add:
    case Op::Sub: prec = 1; break;
    case Op::Mul:
    case Op::Div: prec = 2; break;
    case Op::Neg: prec = 3; break;
    case Op::Pow: prec = 4; break;
    default: prec = 5; break;
  }
  bool parens = prec < parent_prec;
  if (parens) out += '(';
  switch (n.op) {
    case Op::Lit: out += format_double(n.lit); break;
    case Op::Var:
      out += 'q';
      out += static_cast<char>('1' + n.slot);
      break;
    case Op::LightSpeed: out += 'c'; break;
    case Op::Param: out += param_names_[n.slot]; break;
    case Op::Neg:
      out += '-';
      print_node(n.a, 3, out);
      break;
    case Op::Add:
      print_node(n.a, 1, out);
      out += '+';
      print_node(n.b, 2, out);
      break;
    case Op::Sub:
      print_node(n.a, 1, out);
      out += '-';
      print_node(n.b, 2, out);
      break;
    case Op::Mul:
      print_node(n.a, 2, out);
      out += '*';
      print_node(n.b, 3, out);
      break;
    case Op::Div:
      print_node(n.a, 2, out);
      out += '/';
      print_node(n.b, 3, out);
      break;
    case Op::Pow:
      print_node(n.a, 5, out);
      out += '^';
      print_node(n.b, 3, out);
      break;
    case Op::Fun:
      out += fn_name(static_cast<int>(n.fn));
      out += '(';
      print_node(n.a, 0, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

std::string Expr::str() const {
  std::string out;
  print_node(root_, 0, out);
  return out;
}

}  // namespace relsim
