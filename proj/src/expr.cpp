#include "bbo/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>

namespace bbo {

namespace {

enum class Op {
  Literal, LiteralLabel, Var,
  Add, Sub, Mul, Div, Pow, Neg,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or, Not,
  Call1, Call2,
};

}  // namespace

struct Expr::Node {
  Op op = Op::Literal;
  double value = 0.0;
  std::string text;               // label literal / variable name / callee
  std::size_t var_index = 0;
  double (*fn1)(double) = nullptr;
  double (*fn2)(double, double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Token {
  enum Kind { Number, Ident, Label, Sym, End } kind = End;
  double number = 0.0;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  bool accept_sym(const char* sym) {
    if (tok_.kind == Token::Sym && tok_.text == sym) {
      advance();
      return true;
    }
    return false;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ >= s_.size()) {
      tok_ = Token{Token::End, 0.0, ""};
      return;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      std::size_t used = 0;
      double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      tok_ = Token{Token::Number, v, ""};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      tok_ = Token{Token::Ident, 0.0, s_.substr(start, pos_ - start)};
      return;
    }
    if (c == '\'' || c == '"') {
      std::size_t end = s_.find(c, pos_ + 1);
      require(end != std::string::npos, ErrorCode::MalformedConfig,
              "unterminated string literal in expression");
      tok_ = Token{Token::Label, 0.0, s_.substr(pos_ + 1, end - pos_ - 1)};
      pos_ = end + 1;
      return;
    }
    // Two-character operators first.
    static const char* two[] = {"<=", ">=", "==", "!=", "&&", "||"};
    for (const char* t : two) {
      if (s_.compare(pos_, 2, t) == 0) {
        tok_ = Token{Token::Sym, 0.0, t};
        pos_ += 2;
        return;
      }
    }
    tok_ = Token{Token::Sym, 0.0, std::string(1, c)};
    ++pos_;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& variables)
      : lex_(text), vars_(variables) {}

  NodePtr parse() {
    NodePtr e = parse_or();
    require(lex_.peek().kind == Token::End, ErrorCode::MalformedConfig,
            "trailing tokens in expression");
    return e;
  }

 private:
  static NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr parse_or() {
    NodePtr e = parse_and();
    while (true) {
      if (lex_.accept_sym("||") || accept_ident("or")) {
        e = make(Op::Or, e, parse_and());
      } else {
        return e;
      }
    }
  }

  NodePtr parse_and() {
    NodePtr e = parse_not();
    while (true) {
      if (lex_.accept_sym("&&") || accept_ident("and")) {
        e = make(Op::And, e, parse_not());
      } else {
        return e;
      }
    }
  }

  NodePtr parse_not() {
    if (lex_.accept_sym("!") || accept_ident("not")) {
      return make(Op::Not, parse_not());
    }
    return parse_cmp();
  }

  NodePtr parse_cmp() {
    NodePtr e = parse_sum();
    static const std::pair<const char*, Op> cmps[] = {
        {"<=", Op::Le}, {">=", Op::Ge}, {"==", Op::Eq},
        {"!=", Op::Ne}, {"<", Op::Lt}, {">", Op::Gt}};
    for (const auto& [sym, op] : cmps) {
      if (lex_.accept_sym(sym)) return make(op, e, parse_sum());
    }
    return e;
  }

  NodePtr parse_sum() {
    NodePtr e = parse_product();
    while (true) {
      if (lex_.accept_sym("+")) {
        e = make(Op::Add, e, parse_product());
      } else if (lex_.accept_sym("-")) {
        e = make(Op::Sub, e, parse_product());
      } else {
        return e;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr e = parse_unary();
    while (true) {
      if (lex_.accept_sym("*")) {
        e = make(Op::Mul, e, parse_unary());
      } else if (lex_.accept_sym("/")) {
        e = make(Op::Div, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  NodePtr parse_unary() {
    if (lex_.accept_sym("-")) return make(Op::Neg, parse_unary());
    if (lex_.accept_sym("+")) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (lex_.accept_sym("^")) {
      return make(Op::Pow, base, parse_unary());  // right-assoc, binds unary minus
    }
    return base;
  }

  NodePtr parse_primary() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Number) {
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Literal;
      n->value = lex_.take().number;
      return n;
    }
    if (t.kind == Token::Label) {
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::LiteralLabel;
      n->text = lex_.take().text;
      return n;
    }
    if (t.kind == Token::Sym && t.text == "(") {
      lex_.take();
      NodePtr e = parse_or();
      require(lex_.accept_sym(")"), ErrorCode::MalformedConfig, "expected ')'");
      return e;
    }
    if (t.kind == Token::Ident) {
      std::string name = lex_.take().text;
      if (lex_.accept_sym("(")) return parse_call(name);
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) {
          auto n = std::make_shared<Expr::Node>();
          n->op = Op::Var;
          n->text = name;
          n->var_index = i;
          return n;
        }
      }
      raise(ErrorCode::MalformedConfig, "unknown variable '" + name + "' in expression");
    }
    raise(ErrorCode::MalformedConfig, "unexpected token in expression");
  }

  NodePtr parse_call(const std::string& name) {
    static const std::map<std::string, double (*)(double)> fns1 = {
        {"abs", [](double x) { return std::fabs(x); }},
        {"sqrt", [](double x) { return std::sqrt(x); }},
        {"exp", [](double x) { return std::exp(x); }},
        {"log", [](double x) { return std::log(x); }},
        {"sin", [](double x) { return std::sin(x); }},
        {"cos", [](double x) { return std::cos(x); }},
        {"floor", [](double x) { return std::floor(x); }},
        {"ceil", [](double x) { return std::ceil(x); }},
    };
    static const std::map<std::string, double (*)(double, double)> fns2 = {
        {"min", [](double a, double b) { return std::fmin(a, b); }},
        {"max", [](double a, double b) { return std::fmax(a, b); }},
    };
    NodePtr a = parse_or();
    if (lex_.accept_sym(",")) {
      NodePtr b = parse_or();
      require(lex_.accept_sym(")"), ErrorCode::MalformedConfig, "expected ')'");
      auto it = fns2.find(name);
      require(it != fns2.end(), ErrorCode::MalformedConfig,
              "unknown function '" + name + "'");
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::Call2;
      n->text = name;
      n->fn2 = it->second;
      n->lhs = a;
      n->rhs = b;
      return n;
    }
    require(lex_.accept_sym(")"), ErrorCode::MalformedConfig, "expected ')'");
    auto it = fns1.find(name);
    require(it != fns1.end(), ErrorCode::MalformedConfig,
            "unknown function '" + name + "'");
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Call1;
    n->text = name;
    n->fn1 = it->second;
    n->lhs = a;
    return n;
  }

  bool accept_ident(const char* word) {
    if (lex_.peek().kind == Token::Ident && lex_.peek().text == word) {
      lex_.take();
      return true;
    }
    return false;
  }

  Lexer lex_;
  const std::vector<std::string>& vars_;
};

// Label-aware evaluation: equality comparisons may compare labels; every other
// operation requires numeric operands.
Value eval_node(const Expr::Node& n, const Point& p);

double eval_num(const Expr::Node& n, const Point& p) {
  Value v = eval_node(n, p);
  return numeric(v);
}

Value eval_node(const Expr::Node& n, const Point& p) {
  switch (n.op) {
    case Op::Literal: return n.value;
    case Op::LiteralLabel: return n.text;
    case Op::Var:
      require(n.var_index < p.size(), ErrorCode::ArityMismatch,
              "expression variable index out of range");
      return p[n.var_index];
    case Op::Add: return eval_num(*n.lhs, p) + eval_num(*n.rhs, p);
    case Op::Sub: return eval_num(*n.lhs, p) - eval_num(*n.rhs, p);
    case Op::Mul: return eval_num(*n.lhs, p) * eval_num(*n.rhs, p);
    case Op::Div: return eval_num(*n.lhs, p) / eval_num(*n.rhs, p);
    case Op::Pow: return std::pow(eval_num(*n.lhs, p), eval_num(*n.rhs, p));
    case Op::Neg: return -eval_num(*n.lhs, p);
    case Op::Lt: return eval_num(*n.lhs, p) < eval_num(*n.rhs, p) ? 1.0 : 0.0;
    case Op::Le: return eval_num(*n.lhs, p) <= eval_num(*n.rhs, p) ? 1.0 : 0.0;
    case Op::Gt: return eval_num(*n.lhs, p) > eval_num(*n.rhs, p) ? 1.0 : 0.0;
    case Op::Ge: return eval_num(*n.lhs, p) >= eval_num(*n.rhs, p) ? 1.0 : 0.0;
    case Op::Eq:
    case Op::Ne: {
      Value a = eval_node(*n.lhs, p);
      Value b = eval_node(*n.rhs, p);
      bool eq;
      if (std::holds_alternative<std::string>(a) || std::holds_alternative<std::string>(b)) {
        eq = std::holds_alternative<std::string>(a) &&
             std::holds_alternative<std::string>(b) &&
             std::get<std::string>(a) == std::get<std::string>(b);
      } else {
        eq = numeric(a) == numeric(b);
      }
      return (n.op == Op::Eq) == eq ? 1.0 : 0.0;
    }
    case Op::And:
      return (eval_num(*n.lhs, p) != 0.0 && eval_num(*n.rhs, p) != 0.0) ? 1.0 : 0.0;
    case Op::Or:
      return (eval_num(*n.lhs, p) != 0.0 || eval_num(*n.rhs, p) != 0.0) ? 1.0 : 0.0;
    case Op::Not: return eval_num(*n.lhs, p) == 0.0 ? 1.0 : 0.0;
    case Op::Call1: return n.fn1(eval_num(*n.lhs, p));
    case Op::Call2: return n.fn2(eval_num(*n.lhs, p), eval_num(*n.rhs, p));
  }
  raise(ErrorCode::MalformedConfig, "corrupt expression node");
}

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& variables) {
  Parser parser(text, variables);
  Expr e;
  e.root_ = parser.parse();
  e.source_ = text;
  return e;
}

double Expr::eval_numeric(const Point& p) const {
  require(root_ != nullptr, ErrorCode::MalformedConfig, "empty expression");
  return numeric(eval_node(*root_, p));
}

}  // namespace bbo
