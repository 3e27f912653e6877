#pragma once

#include <stdexcept>
#include <string>

namespace bregopt {

/// A point fell outside the (interior of the) domain of a kernel or objective.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid configuration, instance, or experiment description.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iteration produced a non-finite value or left int dom h.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bregopt
