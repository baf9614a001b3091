#include "capflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace capflow {

namespace detail {

enum class Op { Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log };

struct ExprNode {
  Op op = Op::Constant;
  double value = 0.0;
  std::size_t variable = 0;
  std::unique_ptr<ExprNode> left;
  std::unique_ptr<ExprNode> right;
};

}  // namespace detail

namespace {

using detail::ExprNode;
using detail::Op;
using NodePtr = std::unique_ptr<ExprNode>;

NodePtr leaf(double value) {
  auto node = std::make_unique<ExprNode>();
  node->value = value;
  return node;
}

NodePtr unary(Op op, NodePtr arg) {
  auto node = std::make_unique<ExprNode>();
  node->op = op;
  node->left = std::move(arg);
  return node;
}

NodePtr binary(Op op, NodePtr lhs, NodePtr rhs) {
  auto node = unary(op, std::move(lhs));
  node->right = std::move(rhs);
  return node;
}

double evaluate(const ExprNode& node, std::span<const double> x) {
  switch (node.op) {
    case Op::Constant: return node.value;
    case Op::Variable: return x[node.variable];
    case Op::Neg: return -evaluate(*node.left, x);
    case Op::Add: return evaluate(*node.left, x) + evaluate(*node.right, x);
    case Op::Sub: return evaluate(*node.left, x) - evaluate(*node.right, x);
    case Op::Mul: return evaluate(*node.left, x) * evaluate(*node.right, x);
    case Op::Div: return evaluate(*node.left, x) / evaluate(*node.right, x);
    case Op::Pow: return std::pow(evaluate(*node.left, x), evaluate(*node.right, x));
    case Op::Sin: return std::sin(evaluate(*node.left, x));
    case Op::Cos: return std::cos(evaluate(*node.left, x));
    case Op::Exp: return std::exp(evaluate(*node.left, x));
    case Op::Log: return std::log(evaluate(*node.left, x));
  }
  return 0.0;
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t d) : text_(text), d_(d) {}

  NodePtr parse() {
    auto root = expression();
    skip_space();
    if (pos_ < text_.size()) {
      error(ErrorKind::SyntaxError, "operator or end of input");
    }
    return root;
  }

 private:
  [[noreturn]] void error(ErrorKind kind, const std::string& expected, std::size_t at) const {
    std::ostringstream msg;
    msg << "at position " << at << ": expected " << expected << ", found ";
    if (at >= text_.size()) {
      msg << "end of input";
    } else {
      msg << "'" << text_[at] << "'";
    }
    throw ParseError(kind, at, expected, msg.str());
  }
  [[noreturn]] void error(ErrorKind kind, const std::string& expected) const { error(kind, expected, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::Add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = binary(Op::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = signed_power();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::Mul, std::move(lhs), signed_power());
      } else if (accept('/')) {
        lhs = binary(Op::Div, std::move(lhs), signed_power());
      } else {
        return lhs;
      }
    }
  }

  NodePtr signed_power() {
    if (accept('-')) {
      return unary(Op::Neg, signed_power());
    }
    if (accept('+')) {
      return signed_power();
    }
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) {
      return binary(Op::Pow, std::move(base), signed_power());
    }
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) {
      error(ErrorKind::SyntaxError, "number, identifier or '('");
    }
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expression();
      if (!accept(')')) {
        error(ErrorKind::SyntaxError, "')'");
      }
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') {
      return number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') {
      return identifier();
    }
    error(ErrorKind::SyntaxError, "number, identifier or '('");
  }

  NodePtr number() {
    double value = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [end, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (ec != std::errc{}) {
      error(ErrorKind::SyntaxError, "number");
    }
    pos_ += static_cast<std::size_t>(end - first);
    return leaf(value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "pi") {
      return leaf(std::numbers::pi);
    }
    static constexpr std::pair<std::string_view, Op> functions[] = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"log", Op::Log}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        if (!accept('(')) {
          error(ErrorKind::SyntaxError, "'(' after " + std::string(name));
        }
        auto arg = expression();
        if (!accept(')')) {
          error(ErrorKind::SyntaxError, "')'");
        }
        return unary(op, std::move(arg));
      }
    }
    if (name.size() >= 2 && name[0] == 'x') {
      std::size_t index = 0;
      auto [end, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc{} && end == name.data() + name.size() && name[1] != '0' && index >= 1 && index <= d_) {
        auto node = std::make_unique<ExprNode>();
        node->op = Op::Variable;
        node->variable = index - 1;
        return node;
      }
    }
    std::ostringstream expected;
    expected << "one of x1..x" << d_ << ", pi, sin, cos, exp, log";
    throw ParseError(ErrorKind::UnknownIdentifier, start, expected.str(),
                     "at position " + std::to_string(start) + ": unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t d_;
  std::size_t pos_ = 0;
};

}  // namespace

double ScalarField::operator()(std::span<const double> x) const {
  require(root_ != nullptr, ErrorKind::InvalidArgument, "evaluating an empty expression");
  require(x.size() >= dimension_, ErrorKind::InvalidArgument, "too few coordinates for the expression");
  return evaluate(*root_, x);
}

ScalarField parse_scalar_field(std::string_view text, std::size_t d) {
  require(d >= 1, ErrorKind::InvalidArgument, "expression dimension must be at least 1");
  ScalarField field;
  field.root_ = Parser(text, d).parse();
  field.dimension_ = d;
  field.source_ = std::string(text);
  return field;
}

}  // namespace capflow
