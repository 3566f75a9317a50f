#pragma once

#include <stdexcept>
#include <string>

namespace tinfer {

// Numeric failure inside an algorithm (divergence, ill-conditioned solve,
// non-finite data). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Config-file schema violation. The CLI maps this to exit code 4.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tinfer
