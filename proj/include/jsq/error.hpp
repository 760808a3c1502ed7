#pragma once

#include <stdexcept>
#include <string>

namespace jsq {

enum class errc {
    invalid_argument,
    infinite_capacity,
    degenerate_pivot,
    negative_mass,
    truncation_insufficient,
    window_too_small,
    singular_system,
    dimension_cap,
    degenerate_discriminant,
    domain_violation,
};

inline const char* to_string(errc code) noexcept
{
    switch (code) {
    case errc::invalid_argument: return "invalid-argument";
    case errc::infinite_capacity: return "infinite-capacity";
    case errc::degenerate_pivot: return "pivot-degenerate";
    case errc::negative_mass: return "negative-mass";
    case errc::truncation_insufficient: return "truncation-insufficient";
    case errc::window_too_small: return "window-too-small";
    case errc::singular_system: return "singular-system";
    case errc::dimension_cap: return "dimension-cap";
    case errc::degenerate_discriminant: return "degenerate-discriminant";
    case errc::domain_violation: return "domain-violation";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers can pick a fallback (oracle, rational backend, larger window).
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool condition, errc code, const char* what)
{
    if (!condition)
        fail(code, what);
}

} // namespace jsq
