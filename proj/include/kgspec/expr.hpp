#ifndef KGSPEC_EXPR_HPP
#define KGSPEC_EXPR_HPP

// Tiny recursive-descent parser for real expressions in one variable u.
// Grammar: sum := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
// unary := '-' unary | power, power := atom ('^' unary)?,
// atom := number | 'u' | 'pi' | fn '(' sum ')' | '(' sum ')'.

#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "kgspec/error.hpp"
#include "kgspec/potential.hpp"

namespace kgspec {

namespace detail {

using Node = std::function<double(double)>;

class ExprParser {
 public:
  explicit ExprParser(std::string src) : s_(std::move(src)) {}

  Node parse() {
    Node n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  std::string s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::InvalidArgument,
                "expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Node sum() {
    Node lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = [l = lhs, r = term()](double u) { return l(u) + r(u); };
      } else if (eat('-')) {
        lhs = [l = lhs, r = term()](double u) { return l(u) - r(u); };
      } else {
        return lhs;
      }
    }
  }

  Node term() {
    Node lhs = unary();
    for (;;) {
      if (eat('*')) {
        lhs = [l = lhs, r = unary()](double u) { return l(u) * r(u); };
      } else if (eat('/')) {
        lhs = [l = lhs, r = unary()](double u) { return l(u) / r(u); };
      } else {
        return lhs;
      }
    }
  }

  Node unary() {
    if (eat('-')) return [n = unary()](double u) { return -n(u); };
    if (eat('+')) return unary();
    return power();
  }

  Node power() {
    Node base = atom();
    if (!eat('^')) return base;
    Node ex = unary();
    return [base, ex](double u) { return std::pow(base(u), ex(u)); };
  }

  Node atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      Node n = sum();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return [v](double) { return v; };
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string id = s_.substr(start, pos_ - start);
    if (id == "u") return [](double u) { return u; };
    if (id == "pi") return [](double) { return std::numbers::pi; };
    double (*fn)(double) = nullptr;
    if (id == "sin") fn = [](double x) { return std::sin(x); };
    else if (id == "cos") fn = [](double x) { return std::cos(x); };
    else if (id == "tan") fn = [](double x) { return std::tan(x); };
    else if (id == "exp") fn = [](double x) { return std::exp(x); };
    else if (id == "log") fn = [](double x) { return std::log(x); };
    else if (id == "sqrt") fn = [](double x) { return std::sqrt(x); };
    else if (id == "abs") fn = [](double x) { return std::abs(x); };
    else if (id == "sinh") fn = [](double x) { return std::sinh(x); };
    else if (id == "cosh") fn = [](double x) { return std::cosh(x); };
    else if (id == "tanh") fn = [](double x) { return std::tanh(x); };
    else fail("unknown identifier '" + id + "'");
    if (!eat('(')) fail("expected '(' after " + id);
    Node arg = sum();
    if (!eat(')')) fail("missing ')'");
    return [fn, arg](double u) { return fn(arg(u)); };
  }
};

}  // namespace detail

inline RealFn parse_expression(const std::string& src) { return detail::ExprParser(src).parse(); }

/// Potential from user expressions for V, V' and V''. A positive period
/// marks the potential as periodic.
inline Potential expression_potential(const std::string& V, const std::string& dV, const std::string& d2V,
                                      double period = 0.0) {
  Potential p;
  p.name = "expr";
  p.V = parse_expression(V);
  p.dV = parse_expression(dV);
  p.d2V = parse_expression(d2V);
  if (period > 0.0) {
    p.periodic = true;
    p.u_period = period;
  }
  return p;
}

}  // namespace kgspec

#endif  // KGSPEC_EXPR_HPP
