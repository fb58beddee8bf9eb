// SPDX-License-Identifier: Apache-2.0
//
// Restricted evaluator behind the PythonInterpreter tool endpoint. It accepts
// a small line-oriented subset: assignments, print(...), arithmetic, string
// and list literals, comparisons, boolean operators, and a whitelist of
// builtins and math functions. No loops, definitions, attribute access or
// imports other than `import math`.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace sf {

struct PyLimits {
  std::size_t max_code_chars = 10'000;
  std::size_t max_output_chars = 10'000;
  std::size_t max_string_chars = 100'000;
};

struct PyResult {
  std::string output;
  std::optional<std::string> error;  // "SyntaxError: ..." style message
};

PyResult run_restricted_python(std::string_view code, const PyLimits& limits = {});

}  // namespace sf
