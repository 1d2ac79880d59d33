#pragma once

#include <stdexcept>
#include <string>

namespace stormscope {

/// Malformed input data: bad records, schema violations, inconsistent corpora.
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters passed to an operation (fractions out of range, bad window sizes).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace stormscope
