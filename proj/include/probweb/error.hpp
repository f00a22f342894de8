#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace probweb {

// Library-wide error with a stable machine-readable code. The CLI prints
// errors as "error: <code>: <message>" on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* scope_error = "scope_error";
inline constexpr const char* space_mismatch = "space_mismatch";
inline constexpr const char* invalid_argument = "invalid_argument";
inline constexpr const char* not_a_web = "not_a_web";
inline constexpr const char* all_zero_weight = "all_zero_weight";
inline constexpr const char* inconsistent = "inconsistent";
inline constexpr const char* not_converged = "not_converged";
inline constexpr const char* cutoff = "cutoff";
inline constexpr const char* parse_error = "parse_error";
inline constexpr const char* io_error = "io_error";
}  // namespace errc

}  // namespace probweb
