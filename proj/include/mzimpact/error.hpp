#pragma once

#include <stdexcept>
#include <string>

namespace mzimpact {

// Bad input: configuration, arguments, preconditions. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The numerics could not produce a trustworthy answer. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Contact force undefined because the contact point carries no effective mass jump.
class SingularModelError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

} // namespace mzimpact
