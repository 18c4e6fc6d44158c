#pragma once

#include <stdexcept>
#include <string>

namespace nodba {

/// Base of every error raised by the library.
struct Error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Malformed input file or text.
struct ParseError : Error { using Error::Error; };

/// Well-formed input that violates a domain invariant.
struct ValidationError : Error { using Error::Error; };

/// Lookup of an unknown name.
struct NotFoundError : Error { using Error::Error; };

/// Invalid configuration (budgets, population sizes, dimensions).
struct ConfigError : Error { using Error::Error; };

/// A workload generator profile that cannot be satisfied.
struct ProfileInfeasibleError : ConfigError { using ConfigError::ConfigError; };

/// Workload has more queries than the environment's encoding rows.
struct WorkloadTooLargeError : ConfigError { using ConfigError::ConfigError; };

/// Action on a column the mask forbids.
struct IllegalActionError : Error { using Error::Error; };

/// Numeric argument outside a function's domain.
struct DomainError : Error { using Error::Error; };

/// Policy file whose network shape does not fit the current catalog/environment.
struct ArchMismatchError : Error { using Error::Error; };

/// Exhaustive enumeration refused because it exceeds the configured guard.
struct TooLargeError : Error { using Error::Error; };

/// Failure reported by (or while talking to) a live database.
struct DbError : Error { using Error::Error; };

}
