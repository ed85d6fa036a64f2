#pragma once

#include <stdexcept>
#include <string>

namespace qmarg {

//! Bad user input: malformed setting, wrong spectrum length, etc.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

//! A configured size guard was hit.
struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! A numerical consistency alarm (imaginary residue, bad residual, ...).
struct NumericalAlarm : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! Broken internal invariant.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace qmarg
