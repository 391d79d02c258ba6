#pragma once

#include <stdexcept>
#include <string>

namespace sigabc {

/// Bad input: malformed data, violated preconditions, inconsistent config.
/// The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced a non-finite or otherwise unusable value.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}
}  // namespace detail

}  // namespace sigabc
