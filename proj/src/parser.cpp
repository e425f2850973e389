#include <cctype>

#include "dforge/expr.hpp"

namespace dforge {

namespace {

class Parser {
 public:
  Parser(SymbolsPtr syms, std::string_view text) : syms_(std::move(syms)), text_(text) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size())
      fail("unexpected trailing input at '" + std::string(text_.substr(pos_)) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw kernel_error("parse error: " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
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

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (eat('+')) e = e + term();
      else if (eat('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (eat('*')) e = e * unary();
      else if (eat('/')) {
        Expr d = unary();
        if (d.is_zero()) fail("division by zero");
        e = e / d;
      } else return e;
    }
  }

  Expr unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (eat('^')) {
      skip_ws();
      bool neg = false;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        neg = text_[pos_] == '-';
        ++pos_;
      }
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        fail("exponent must be an integer literal");
      long v = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        v = v * 10 + (text_[pos_] - '0');
        if (v > 1000000) fail("exponent too large");
        ++pos_;
      }
      int e = static_cast<int>(neg ? -v : v);
      if (e < 0 && base.is_zero()) fail("division by zero");
      base = base.pow(e);
    }
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return integer_literal();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr integer_literal() {
    std::string digits;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      digits += text_[pos_++];
    if (pos_ < text_.size() && text_[pos_] == '.')
      fail("decimal literals are not allowed in expressions; use a rational like 3/2");
    return Expr::integer(syms_, mpz_class(digits));
  }

  Expr identifier() {
    std::string name;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      name += text_[pos_++];
    if (pos_ < text_.size() && text_[pos_] == '[') {
      std::string idx = "[";
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        idx += text_[pos_++];
      if (pos_ >= text_.size() || text_[pos_] != ']' || idx.size() == 1)
        fail("malformed index suffix on '" + name + "'");
      ++pos_;
      name += idx + "]";
    }
    int primes = 0;
    while (pos_ < text_.size() && text_[pos_] == '\'') {
      ++primes;
      ++pos_;
    }
    if (auto id = syms_->resolve(name, primes)) return Expr::atom(syms_, *id);
    // dot/ddot spellings of derivatives: xdot == x', xddot == x''
    if (name.size() > 4 && name.ends_with("ddot")) {
      std::string base = name.substr(0, name.size() - 4);
      if (auto id = syms_->resolve(base, primes + 2)) return Expr::atom(syms_, *id);
    }
    if (name.size() > 3 && name.ends_with("dot")) {
      std::string base = name.substr(0, name.size() - 3);
      if (auto id = syms_->resolve(base, primes + 1)) return Expr::atom(syms_, *id);
    }
    std::string shown = name;
    for (int i = 0; i < primes; ++i) shown += '\'';
    fail("undeclared atom '" + shown + "'");
  }

  SymbolsPtr syms_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(SymbolsPtr syms, std::string_view text) {
  Parser p(std::move(syms), text);
  return p.parse();
}

}  // namespace dforge
