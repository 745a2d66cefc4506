#ifndef SIGVAR_ERROR_HPP
#define SIGVAR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sigvar {

/// Base of every error raised by the library. The category drives CLI exit codes.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameters supplied by the caller.
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// Malformed, missing, or inconsistent input data.
class DataError : public Error
{
public:
    using Error::Error;
};

/// Non-finite values, solver non-convergence and similar numerical failures.
class NumericalError : public Error
{
public:
    using Error::Error;
};

} // namespace sigvar

#endif // SIGVAR_ERROR_HPP
