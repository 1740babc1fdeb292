#pragma once

#include <stdexcept>
#include <string>

namespace gridforge {

/// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
    config,     ///< invalid parameters or preconditions
    numerical,  ///< domain, singular, integrator or solver failures
    io,         ///< file access and schema problems
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), m_kind(kind), m_code(std::move(code)) {}

    ErrorKind kind() const noexcept { return m_kind; }
    /// Short machine-readable tag such as "singular_jacobian".
    const std::string& code() const noexcept { return m_code; }

private:
    ErrorKind m_kind;
    std::string m_code;
};

namespace detail {
[[noreturn]] inline void fail(ErrorKind kind, const char* code, const std::string& msg)
{
    throw Error(kind, code, msg);
}
[[noreturn]] inline void numerical_failure(const char* code, const std::string& msg)
{
    throw Error(ErrorKind::numerical, code, msg);
}
[[noreturn]] inline void config_failure(const char* code, const std::string& msg)
{
    throw Error(ErrorKind::config, code, msg);
}
} // namespace detail

} // namespace gridforge
