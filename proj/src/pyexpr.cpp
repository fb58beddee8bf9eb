// SPDX-License-Identifier: Apache-2.0
#include "searchforge/pyexpr.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

namespace sf {
namespace {

struct Value;
using List = std::vector<Value>;

struct None {};

struct Value {
  std::variant<None, bool, std::int64_t, double, std::string, std::shared_ptr<List>> v;
};

struct PyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& kind, const std::string& msg) { throw PyError(kind + ": " + msg); }

bool is_num(const Value& x) {
  return std::holds_alternative<bool>(x.v) || std::holds_alternative<std::int64_t>(x.v) ||
         std::holds_alternative<double>(x.v);
}
bool is_int(const Value& x) { return std::holds_alternative<bool>(x.v) || std::holds_alternative<std::int64_t>(x.v); }
std::int64_t as_int(const Value& x) {
  if (auto b = std::get_if<bool>(&x.v)) return *b ? 1 : 0;
  return std::get<std::int64_t>(x.v);
}
double as_float(const Value& x) {
  if (auto d = std::get_if<double>(&x.v)) return *d;
  return static_cast<double>(as_int(x));
}

std::string float_repr(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, d);
    if (std::strtod(buf, nullptr) == d) break;
  }
  std::string s = buf;
  // Python switches to exponent form at 1e16; %g does so earlier.
  if (s.find('e') != std::string::npos && std::fabs(d) < 1e16 && std::fabs(d) >= 1e-4) {
    std::snprintf(buf, sizeof(buf), "%.17f", d);
    s = buf;
    while (s.back() == '0') s.pop_back();
  }
  if (s.find_first_of(".einf") == std::string::npos) s += ".0";
  if (s.back() == '.') s += "0";
  return s;
}

std::string repr(const Value& x);

std::string str(const Value& x) {
  if (std::holds_alternative<None>(x.v)) return "None";
  if (auto b = std::get_if<bool>(&x.v)) return *b ? "True" : "False";
  if (auto i = std::get_if<std::int64_t>(&x.v)) return std::to_string(*i);
  if (auto d = std::get_if<double>(&x.v)) return float_repr(*d);
  if (auto s = std::get_if<std::string>(&x.v)) return *s;
  const auto& l = *std::get<std::shared_ptr<List>>(x.v);
  std::string out = "[";
  for (std::size_t k = 0; k < l.size(); ++k) {
    if (k) out += ", ";
    out += repr(l[k]);
  }
  return out + "]";
}

std::string repr(const Value& x) {
  if (auto s = std::get_if<std::string>(&x.v)) {
    std::string out = "'";
    for (char c : *s) {
      if (c == '\'' || c == '\\') out.push_back('\\');
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      out.push_back(c);
    }
    return out + "'";
  }
  return str(x);
}

bool truthy(const Value& x) {
  if (std::holds_alternative<None>(x.v)) return false;
  if (is_int(x)) return as_int(x) != 0;
  if (auto d = std::get_if<double>(&x.v)) return *d != 0.0;
  if (auto s = std::get_if<std::string>(&x.v)) return !s->empty();
  return !std::get<std::shared_ptr<List>>(x.v)->empty();
}

std::string type_name(const Value& x) {
  switch (x.v.index()) {
    case 0: return "NoneType";
    case 1: return "bool";
    case 2: return "int";
    case 3: return "float";
    case 4: return "str";
    default: return "list";
  }
}

Value make_list(List l) { return Value{std::make_shared<List>(std::move(l))}; }

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Num, Str, Name, Op, End };

struct Token {
  Tok kind;
  std::string text;
  Value value;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    if (c == '#') break;
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      bool flt = false;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      if (j < src.size() && src[j] == '.') {
        flt = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          flt = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      std::string text;
      for (char ch : src.substr(i, j - i))
        if (ch != '_') text.push_back(ch);
      Token t{Tok::Num, text, {}};
      if (flt) {
        t.value = Value{std::strtod(text.c_str(), nullptr)};
      } else {
        errno = 0;
        long long v = std::strtoll(text.c_str(), nullptr, 10);
        if (errno == ERANGE) fail("OverflowError", "integer literal too large for sandbox");
        t.value = Value{static_cast<std::int64_t>(v)};
      }
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '.')) ++j;
      out.push_back({Tok::Name, std::string(src.substr(i, j - i)), {}});
      i = j;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      std::string s;
      while (j < src.size() && src[j] != c) {
        if (src[j] == '\\' && j + 1 < src.size()) {
          char e = src[++j];
          s.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
        } else {
          s.push_back(src[j]);
        }
        ++j;
      }
      if (j >= src.size()) fail("SyntaxError", "unterminated string literal");
      out.push_back({Tok::Str, s, Value{s}});
      i = j + 1;
      continue;
    }
    static const char* kOps[] = {"**", "//", "==", "!=", "<=", ">=", "+", "-", "*", "/", "%", "<", ">", "(", ")", "[", "]", ",", "="};
    bool matched = false;
    for (const char* op : kOps) {
      std::string_view o(op);
      if (src.substr(i, o.size()) == o) {
        out.push_back({Tok::Op, std::string(o), {}});
        i += o.size();
        matched = true;
        break;
      }
    }
    if (!matched) fail("SyntaxError", std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", {}});
  return out;
}

// ---------------------------------------------------------------------------
// Parser + evaluator (direct evaluation while parsing)

class Interp {
 public:
  explicit Interp(const PyLimits& limits) : limits_(limits) {}

  void exec_line(std::string_view line) {
    toks_ = lex(line);
    pos_ = 0;
    if (peek().kind == Tok::End) return;
    if (peek().kind == Tok::Name && peek().text == "import") {
      ++pos_;
      if (peek().kind != Tok::Name || peek().text != "math") fail("ImportError", "only 'import math' is allowed");
      ++pos_;
      expect_end();
      return;
    }
    if (peek().kind == Tok::Name && toks_[1].kind == Tok::Op && toks_[1].text == "=") {
      std::string name = peek().text;
      if (name.find('.') != std::string::npos || is_keyword(name)) fail("SyntaxError", "cannot assign to " + name);
      pos_ = 2;
      vars_[name] = expr();
      expect_end();
      return;
    }
    if (peek().kind == Tok::Name && peek().text == "print" && toks_[1].kind == Tok::Op && toks_[1].text == "(") {
      pos_ = 2;
      std::string line_out;
      if (!accept(")")) {
        for (bool first = true;; first = false) {
          Value v = expr();
          if (!first) line_out += " ";
          line_out += str(v);
          if (accept(")")) break;
          expect(",");
        }
      }
      expect_end();
      emit(line_out + "\n");
      return;
    }
    expr();
    expect_end();
  }

  const std::string& output() const { return out_; }

 private:
  static bool is_keyword(const std::string& n) {
    return n == "and" || n == "or" || n == "not" || n == "True" || n == "False" || n == "None" || n == "print";
  }

  const Token& peek() const { return toks_[pos_]; }
  bool accept(const std::string& op) {
    if (peek().kind == Tok::Op && peek().text == op) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_name(const std::string& n) {
    if (peek().kind == Tok::Name && peek().text == n) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const std::string& op) {
    if (!accept(op)) fail("SyntaxError", "expected '" + op + "'");
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("SyntaxError", "unexpected '" + peek().text + "'");
  }
  void emit(const std::string& s) {
    if (out_.size() + s.size() > limits_.max_output_chars) fail("OutputLimit", "output limit exceeded");
    out_ += s;
  }

  Value expr() { return or_expr(); }

  Value or_expr() {
    Value left = and_expr();
    while (accept_name("or")) {
      Value right = and_expr();
      left = truthy(left) ? left : right;
    }
    return left;
  }
  Value and_expr() {
    Value left = not_expr();
    while (accept_name("and")) {
      Value right = not_expr();
      left = truthy(left) ? right : left;
    }
    return left;
  }
  Value not_expr() {
    if (accept_name("not")) return Value{!truthy(not_expr())};
    return comparison();
  }
  Value comparison() {
    Value left = arith();
    static const char* kCmp[] = {"==", "!=", "<=", ">=", "<", ">"};
    bool result = true;
    bool chained = false;
    for (;;) {
      std::string op;
      for (const char* c : kCmp)
        if (peek().kind == Tok::Op && peek().text == c) op = c;
      if (op.empty()) break;
      ++pos_;
      Value right = arith();
      result = result && compare(left, right, op);
      chained = true;
      left = right;
    }
    return chained ? Value{result} : left;
  }
  bool compare(const Value& a, const Value& b, const std::string& op) {
    int c = 0;
    if (is_num(a) && is_num(b)) {
      double x = as_float(a), y = as_float(b);
      if (is_int(a) && is_int(b)) {
        auto i = as_int(a), j = as_int(b);
        c = i < j ? -1 : i > j ? 1 : 0;
      } else {
        c = x < y ? -1 : x > y ? 1 : 0;
      }
    } else if (std::holds_alternative<std::string>(a.v) && std::holds_alternative<std::string>(b.v)) {
      c = std::get<std::string>(a.v).compare(std::get<std::string>(b.v));
      c = c < 0 ? -1 : c > 0 ? 1 : 0;
    } else if (op == "==" || op == "!=") {
      bool eq = std::holds_alternative<None>(a.v) && std::holds_alternative<None>(b.v);
      if (!eq && a.v.index() == 5 && b.v.index() == 5) eq = repr(a) == repr(b);
      return op == "==" ? eq : !eq;
    } else {
      fail("TypeError", "'" + op + "' not supported between " + type_name(a) + " and " + type_name(b));
    }
    if (op == "==") return c == 0;
    if (op == "!=") return c != 0;
    if (op == "<") return c < 0;
    if (op == "<=") return c <= 0;
    if (op == ">") return c > 0;
    return c >= 0;
  }

  Value arith() {
    Value left = term();
    for (;;) {
      if (accept("+")) left = binary(left, term(), "+");
      else if (accept("-")) left = binary(left, term(), "-");
      else return left;
    }
  }
  Value term() {
    Value left = unary();
    for (;;) {
      if (accept("*")) left = binary(left, unary(), "*");
      else if (accept("//")) left = binary(left, unary(), "//");
      else if (accept("/")) left = binary(left, unary(), "/");
      else if (accept("%")) left = binary(left, unary(), "%");
      else return left;
    }
  }
  Value unary() {
    if (accept("-")) {
      Value v = unary();
      if (is_int(v)) {
        std::int64_t r;
        if (__builtin_sub_overflow(std::int64_t{0}, as_int(v), &r)) fail("OverflowError", "integer overflow");
        return Value{r};
      }
      if (std::holds_alternative<double>(v.v)) return Value{-std::get<double>(v.v)};
      fail("TypeError", "bad operand type for unary -: " + type_name(v));
    }
    if (accept("+")) {
      Value v = unary();
      if (!is_num(v)) fail("TypeError", "bad operand type for unary +: " + type_name(v));
      return is_int(v) ? Value{as_int(v)} : v;
    }
    return power();
  }
  Value power() {
    Value base = postfix();
    if (accept("**")) return binary(base, unary(), "**");
    return base;
  }
  Value postfix() {
    Value v = atom();
    while (accept("[")) {
      Value idx = expr();
      expect("]");
      if (!is_int(idx)) fail("TypeError", "indices must be integers");
      std::int64_t i = as_int(idx);
      if (auto s = std::get_if<std::string>(&v.v)) {
        std::int64_t n = static_cast<std::int64_t>(s->size());
        if (i < 0) i += n;
        if (i < 0 || i >= n) fail("IndexError", "string index out of range");
        v = Value{std::string(1, (*s)[static_cast<std::size_t>(i)])};
      } else if (auto l = std::get_if<std::shared_ptr<List>>(&v.v)) {
        std::int64_t n = static_cast<std::int64_t>((*l)->size());
        if (i < 0) i += n;
        if (i < 0 || i >= n) fail("IndexError", "list index out of range");
        v = (**l)[static_cast<std::size_t>(i)];
      } else {
        fail("TypeError", "'" + type_name(v) + "' object is not subscriptable");
      }
    }
    return v;
  }
  Value atom() {
    const Token t = peek();
    if (t.kind == Tok::Num || t.kind == Tok::Str) {
      ++pos_;
      return t.value;
    }
    if (accept("(")) {
      Value v = expr();
      expect(")");
      return v;
    }
    if (accept("[")) {
      List items;
      if (!accept("]")) {
        for (;;) {
          items.push_back(expr());
          if (accept("]")) break;
          expect(",");
          if (accept("]")) break;
        }
      }
      return make_list(std::move(items));
    }
    if (t.kind == Tok::Name) {
      ++pos_;
      if (t.text == "True") return Value{true};
      if (t.text == "False") return Value{false};
      if (t.text == "None") return Value{None{}};
      if (t.text == "math.pi") return Value{M_PI};
      if (t.text == "math.e") return Value{M_E};
      if (accept("(")) {
        std::vector<Value> args;
        if (!accept(")")) {
          for (;;) {
            args.push_back(expr());
            if (accept(")")) break;
            expect(",");
          }
        }
        return call(t.text, args);
      }
      auto it = vars_.find(t.text);
      if (it == vars_.end()) fail("NameError", "name '" + t.text + "' is not defined");
      return it->second;
    }
    fail("SyntaxError", t.kind == Tok::End ? "unexpected end of line" : "unexpected '" + t.text + "'");
  }

  Value binary(const Value& a, const Value& b, const std::string& op) {
    if (op == "+" && std::holds_alternative<std::string>(a.v) && std::holds_alternative<std::string>(b.v)) {
      std::string s = std::get<std::string>(a.v) + std::get<std::string>(b.v);
      if (s.size() > limits_.max_string_chars) fail("MemoryError", "string too large");
      return Value{s};
    }
    if (op == "+" && a.v.index() == 5 && b.v.index() == 5) {
      List l = *std::get<std::shared_ptr<List>>(a.v);
      const auto& r = *std::get<std::shared_ptr<List>>(b.v);
      l.insert(l.end(), r.begin(), r.end());
      return make_list(std::move(l));
    }
    if (op == "*" && ((std::holds_alternative<std::string>(a.v) && is_int(b)) ||
                      (is_int(a) && std::holds_alternative<std::string>(b.v)))) {
      const std::string& s = std::holds_alternative<std::string>(a.v) ? std::get<std::string>(a.v) : std::get<std::string>(b.v);
      std::int64_t n = is_int(a) ? as_int(a) : as_int(b);
      if (n > 0 && s.size() * static_cast<std::size_t>(n) > limits_.max_string_chars) fail("MemoryError", "string too large");
      std::string out;
      for (std::int64_t k = 0; k < n; ++k) out += s;
      return Value{out};
    }
    if (!is_num(a) || !is_num(b))
      fail("TypeError", "unsupported operand type(s) for " + op + ": '" + type_name(a) + "' and '" + type_name(b) + "'");
    if (is_int(a) && is_int(b) && op != "/") {
      std::int64_t x = as_int(a), y = as_int(b), r = 0;
      if (op == "+") {
        if (__builtin_add_overflow(x, y, &r)) fail("OverflowError", "integer overflow");
      } else if (op == "-") {
        if (__builtin_sub_overflow(x, y, &r)) fail("OverflowError", "integer overflow");
      } else if (op == "*") {
        if (__builtin_mul_overflow(x, y, &r)) fail("OverflowError", "integer overflow");
      } else if (op == "//" || op == "%") {
        if (y == 0) fail("ZeroDivisionError", "integer division or modulo by zero");
        std::int64_t q = x / y, m = x % y;
        if (m != 0 && ((m < 0) != (y < 0))) {
          --q;
          m += y;
        }
        r = op == "//" ? q : m;
      } else if (op == "**") {
        if (y < 0) return Value{std::pow(static_cast<double>(x), static_cast<double>(y))};
        r = 1;
        for (std::int64_t k = 0; k < y; ++k)
          if (__builtin_mul_overflow(r, x, &r)) fail("OverflowError", "integer overflow");
      }
      return Value{r};
    }
    double x = as_float(a), y = as_float(b);
    if (op == "+") return Value{x + y};
    if (op == "-") return Value{x - y};
    if (op == "*") return Value{x * y};
    if (op == "/") {
      if (y == 0) fail("ZeroDivisionError", "division by zero");
      return Value{x / y};
    }
    if (op == "//") {
      if (y == 0) fail("ZeroDivisionError", "float floor division by zero");
      return Value{std::floor(x / y)};
    }
    if (op == "%") {
      if (y == 0) fail("ZeroDivisionError", "float modulo");
      double m = std::fmod(x, y);
      if (m != 0 && ((m < 0) != (y < 0))) m += y;
      return Value{m};
    }
    return Value{std::pow(x, y)};
  }

  Value call(const std::string& fn, const std::vector<Value>& args) {
    auto need = [&](std::size_t n) {
      if (args.size() != n) fail("TypeError", fn + "() takes " + std::to_string(n) + " argument(s)");
    };
    auto num_arg = [&](std::size_t i) {
      if (!is_num(args[i])) fail("TypeError", fn + "() needs a number");
      return as_float(args[i]);
    };
    auto items = [&]() -> List {
      if (args.size() == 1 && args[0].v.index() == 5) return *std::get<std::shared_ptr<List>>(args[0].v);
      return List(args.begin(), args.end());
    };
    if (fn == "abs") {
      need(1);
      if (is_int(args[0])) {
        std::int64_t v = as_int(args[0]);
        if (v == INT64_MIN) fail("OverflowError", "integer overflow");
        return Value{v < 0 ? -v : v};
      }
      return Value{std::fabs(num_arg(0))};
    }
    if (fn == "len") {
      need(1);
      if (auto s = std::get_if<std::string>(&args[0].v)) return Value{static_cast<std::int64_t>(s->size())};
      if (auto l = std::get_if<std::shared_ptr<List>>(&args[0].v)) return Value{static_cast<std::int64_t>((*l)->size())};
      fail("TypeError", "object of type '" + type_name(args[0]) + "' has no len()");
    }
    if (fn == "str") {
      need(1);
      return Value{str(args[0])};
    }
    if (fn == "int") {
      need(1);
      if (auto s = std::get_if<std::string>(&args[0].v)) {
        try {
          std::size_t used = 0;
          long long v = std::stoll(*s, &used);
          if (used != s->size()) throw std::invalid_argument("trailing");
          return Value{static_cast<std::int64_t>(v)};
        } catch (const std::exception&) {
          fail("ValueError", "invalid literal for int(): " + repr(args[0]));
        }
      }
      if (is_int(args[0])) return Value{as_int(args[0])};
      double d = num_arg(0);
      if (!std::isfinite(d) || std::fabs(d) > 9.2e18) fail("OverflowError", "cannot convert float to int");
      return Value{static_cast<std::int64_t>(std::trunc(d))};
    }
    if (fn == "float") {
      need(1);
      if (auto s = std::get_if<std::string>(&args[0].v)) {
        try {
          return Value{std::stod(*s)};
        } catch (const std::exception&) {
          fail("ValueError", "could not convert string to float: " + repr(args[0]));
        }
      }
      return Value{num_arg(0)};
    }
    if (fn == "round") {
      if (args.empty() || args.size() > 2) fail("TypeError", "round() takes 1 or 2 arguments");
      double x = num_arg(0);
      if (args.size() == 1) {
        double r = std::nearbyint(x);  // banker's rounding like Python
        return Value{static_cast<std::int64_t>(r)};
      }
      if (!is_int(args[1])) fail("TypeError", "ndigits must be an integer");
      const std::int64_t nd = as_int(args[1]);
      if (nd >= 0 && nd <= 300 && std::isfinite(x)) {
        // printf rounds the exact binary value, as Python does
        std::vector<char> buf(static_cast<std::size_t>(std::snprintf(nullptr, 0, "%.*f", static_cast<int>(nd), x)) + 1);
        std::snprintf(buf.data(), buf.size(), "%.*f", static_cast<int>(nd), x);
        return Value{std::strtod(buf.data(), nullptr)};
      }
      double scale = std::pow(10.0, static_cast<double>(nd));
      return Value{std::nearbyint(x * scale) / scale};
    }
    if (fn == "min" || fn == "max" || fn == "sum") {
      List l = items();
      if (fn == "sum") {
        Value acc{std::int64_t{0}};
        for (const auto& x : l) acc = binary(acc, x, "+");
        return acc;
      }
      if (l.empty()) fail("ValueError", fn + "() arg is an empty sequence");
      Value best = l[0];
      for (std::size_t k = 1; k < l.size(); ++k)
        if (compare(l[k], best, fn == "min" ? "<" : ">")) best = l[k];
      return best;
    }
    static const std::map<std::string, double (*)(double)> kMath = {
        {"math.sqrt", [](double x) { return std::sqrt(x); }}, {"math.exp", [](double x) { return std::exp(x); }},
        {"math.log10", [](double x) { return std::log10(x); }}, {"math.sin", [](double x) { return std::sin(x); }},
        {"math.cos", [](double x) { return std::cos(x); }},   {"math.tan", [](double x) { return std::tan(x); }},
        {"math.fabs", [](double x) { return std::fabs(x); }},
    };
    if (fn == "math.floor" || fn == "math.ceil") {
      need(1);
      double x = num_arg(0);
      return Value{static_cast<std::int64_t>(fn == "math.floor" ? std::floor(x) : std::ceil(x))};
    }
    if (fn == "math.log") {
      if (args.empty() || args.size() > 2) fail("TypeError", "log() takes 1 or 2 arguments");
      double x = num_arg(0);
      if (x <= 0) fail("ValueError", "math domain error");
      return Value{args.size() == 2 ? std::log(x) / std::log(num_arg(1)) : std::log(x)};
    }
    auto it = kMath.find(fn);
    if (it != kMath.end()) {
      need(1);
      double x = num_arg(0);
      if (fn == "math.sqrt" && x < 0) fail("ValueError", "math domain error");
      return Value{it->second(x)};
    }
    fail("NameError", "function '" + fn + "' is not available in the sandbox");
  }

  PyLimits limits_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, Value> vars_;
  std::string out_;
};

}  // namespace

PyResult run_restricted_python(std::string_view code, const PyLimits& limits) {
  PyResult result;
  if (code.size() > limits.max_code_chars) {
    result.error = "SandboxLimit: code exceeds " + std::to_string(limits.max_code_chars) + " characters";
    return result;
  }
  Interp interp(limits);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= code.size()) {
    std::size_t end = code.find('\n', start);
    std::string_view line = code.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    std::size_t indent = 0;
    while (indent < line.size() && (line[indent] == ' ' || line[indent] == '\t')) ++indent;
    bool blank = indent == line.size() || line[indent] == '#' || line[indent] == '\r';
    if (!blank && indent > 0) {
      result.output = interp.output();
      result.error = "IndentationError: unexpected indent (line " + std::to_string(line_no) + ")";
      return result;
    }
    try {
      if (!blank) {
        std::string_view body = line;
        if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
        interp.exec_line(body);
      }
    } catch (const PyError& e) {
      result.output = interp.output();
      result.error = std::string(e.what()) + " (line " + std::to_string(line_no) + ")";
      return result;
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  result.output = interp.output();
  return result;
}

}  // namespace sf
