#pragma once

#include <stdexcept>
#include <string>

namespace ovl {

// Every failure raised by the library derives from Error; the CLI maps the
// kind onto its exit code.
enum class ErrorKind { Config, Precondition, Numerical, Budget, Invariant };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

// Bad argument or unsupported model combination.
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::Precondition, what) {}
};

// Quadrature did not converge, divergent integral, degenerate minimizer...
// `partial` carries the best value available when the failure was detected.
struct NumericalError : Error {
    NumericalError(const std::string& what, double partial = 0.0)
        : Error(ErrorKind::Numerical, what), partial(partial) {}
    double partial;
};

struct BudgetError : Error {
    explicit BudgetError(const std::string& what) : Error(ErrorKind::Budget, what) {}
};

// A computed object violated one of its own invariants. Always a bug.
struct InvariantError : Error {
    explicit InvariantError(const std::string& what) : Error(ErrorKind::Invariant, what) {}
};

inline int exitCode(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Budget: return 4;
    default: return 3;
    }
}

} // namespace ovl
