#include "ckdyn/cli/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "ckdyn/core.hpp"
#include "ckdyn/errors.hpp"

namespace ckdyn::cli {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Variables& vars) : text_(text), vars_(vars) {}

  double parse() {
    const double v = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("cannot evaluate \"" + std::string(text_) + "\": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expression() {
    double v = term();
    for (;;) {
      if (accept('+')) {
        v += term();
      } else if (accept('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = unary();
    for (;;) {
      if (accept('*')) {
        v *= unary();
      } else if (accept('/')) {
        v /= unary();
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  double power() {
    const double base = primary();
    if (accept('^')) return std::pow(base, unary());
    return base;
  }

  double primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      const double v = expression();
      if (!accept(')')) fail("missing ')'");
      return v;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  double number() {
    double v = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) fail("bad number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  double identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (accept('(')) {
      const double arg = expression();
      if (!accept(')')) fail("missing ')' after argument of " + std::string(name));
      return call(name, arg);
    }
    if (name == "pi") return kPi;
    const auto it = vars_.find(name);
    if (it == vars_.end()) fail("unknown name '" + std::string(name) + "'");
    return it->second;
  }

  double call(std::string_view name, double x) const {
    if (name == "sqrt") return std::sqrt(x);
    if (name == "exp") return std::exp(x);
    if (name == "log") return std::log(x);
    if (name == "sin") return std::sin(x);
    if (name == "cos") return std::cos(x);
    if (name == "tan") return std::tan(x);
    if (name == "abs") return std::abs(x);
    fail("unknown function '" + std::string(name) + "'");
  }

  std::string_view text_;
  const Variables& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

double evaluate(std::string_view expr, const Variables& vars) {
  const double v = Parser(expr, vars).parse();
  if (!std::isfinite(v)) throw ConfigError("expression \"" + std::string(expr) + "\" is not finite");
  return v;
}

std::vector<double> evaluate_list(std::string_view text, const Variables& vars) {
  std::vector<double> out;
  std::size_t start = 0;
  int depth = 0;
  bool blank = true;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const char c = i < text.size() ? text[i] : ',';
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      const auto item = text.substr(start, i - start);
      if (item.find_first_not_of(" \t") != std::string_view::npos) {
        out.push_back(evaluate(item, vars));
        blank = false;
      } else if (i < text.size() || !blank) {
        throw ConfigError("empty item in list \"" + std::string(text) + "\"");
      }
      start = i + 1;
    }
  }
  return out;
}

}  // namespace ckdyn::cli
