#pragma once

#include <stdexcept>
#include <string>

namespace wmauth {

/// Invalid or unsupported configuration (bad parameters, unreadable config,
/// unsupported code family). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure lost accuracy beyond its tolerance. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (mismatched lengths, out-of-range index).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
    if (!cond) throw ContractViolation(what);
}
} // namespace detail

} // namespace wmauth
