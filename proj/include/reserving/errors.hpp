#pragma once

#include <stdexcept>
#include <string>

namespace reserving {

/// Bad input data or arguments. The CLI maps this to exit status 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to converge or produced no usable result.
/// The CLI maps this to exit status 1.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace reserving
