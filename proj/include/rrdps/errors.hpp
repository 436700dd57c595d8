#pragma once

#include <stdexcept>
#include <string>

namespace rrdps {

/// Thrown when an argument violates an operation's documented precondition.
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a mathematical function is evaluated outside its domain.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Raised when the observed double clicks exceed the pre-agreed threshold and
/// the session has to be thrown away.
class SessionDiscarded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const char *what) {
    if (!cond)
        throw PreconditionError(what);
}
} // namespace detail

} // namespace rrdps
