#pragma once

#include <stdexcept>
#include <string>

namespace qembed {

// Invalid input or violated precondition. The CLI maps this to exit code 2.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver its postcondition. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Kernel argument |c|^{1/4}|x| is above the configured magnitude cap.
class SaturationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Zero scan ran out of horizon where a definite answer was required.
class HorizonError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateZeroError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Postcondition that should hold by construction failed (ordering, matching).
class ConsistencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace qembed
