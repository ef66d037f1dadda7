#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ckdyn::cli {

using Variables = std::map<std::string, double, std::less<>>;

/// Evaluates an arithmetic expression such as "0.3*omega0" or "sqrt(hbar/(2*mass*omega0))".
/// Supports + - * / ^, parentheses, unary signs, the constant pi, the variables in `vars` and
/// the functions sqrt, exp, log, sin, cos, tan, abs. Throws ConfigError on malformed input.
double evaluate(std::string_view expr, const Variables& vars);

/// Comma-separated list of expressions; an empty string gives an empty list.
std::vector<double> evaluate_list(std::string_view text, const Variables& vars);

}  // namespace ckdyn::cli
