#include <cctype>
#include <charconv>

#include "dimsr/error.hpp"
#include "dimsr/expr.hpp"

namespace dimsr {

namespace {

// Grammar:
//   sum     := product (('+' | '-') product)*
//   product := prefix (('*' | '/') prefix)*
//   prefix  := '-' prefix | power
//   power   := atom ('^' ['-'] integer)?
//   atom    := number | '{' number '}' | ident '(' sum ')' | ident | '(' sum ')'
class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expr parse() {
    Expr e = sum();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression parse error at column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr sum() {
    Expr e = product();
    for (;;) {
      if (accept('+')) {
        e = e + product();
      } else if (accept('-')) {
        e = e - product();
      } else {
        return e;
      }
    }
  }

  Expr product() {
    Expr e = prefix();
    for (;;) {
      if (accept('*')) {
        e = e * prefix();
      } else if (accept('/')) {
        e = e / prefix();
      } else {
        return e;
      }
    }
  }

  Expr prefix() {
    if (accept('-')) return -prefix();
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (!accept('^')) return base;
    bool negative = accept('-');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    int n = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, n);
    if (negative) n = -n;
    if (n == 0) fail("zero exponent");
    return Expr::powint(std::move(base), n);
  }

  double number() {
    skip_ws();
    std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    };
    if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      digits();
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_) fail("malformed number");
    return v;
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = sum();
      expect(')');
      return e;
    }
    if (c == '{') {
      ++pos_;
      double v = number();
      expect('}');
      return Expr::fitted(v);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr::literal(number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(s_.substr(start, pos_ - start));
      if (accept('(')) {
        Op op = Op::constant;
        try {
          op = op_from_name(name);
        } catch (const ParseError&) {
          fail("unknown function '" + name + "'");
        }
        if (!is_unary(op) || op == Op::neg) fail("'" + name + "' is not a unary function");
        Expr arg = sum();
        expect(')');
        return Expr::unary(op, std::move(arg));
      }
      return Expr::var(std::move(name));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

}  // namespace dimsr
