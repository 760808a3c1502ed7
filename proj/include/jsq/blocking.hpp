#pragma once

// Closed-form blocking probability of the symmetric finite-capacity model and
// the boundary quantities that come with it.

#include <cmath>
#include <cstddef>
#include <string>

#include "jsq/error.hpp"
#include "jsq/model.hpp"
#include "jsq/scalar.hpp"

namespace jsq {

inline constexpr std::size_t max_closed_form_capacity = 1000000;

namespace detail {

template <typename T>
std::size_t closed_form_capacity(const BasicSymmetricParams<T>& p)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    require(K <= max_closed_form_capacity, errc::invalid_argument, "capacity above 10^6");
    return K;
}

// 2 rho^n / (2 sum_{k<=n} rho^k - sum_{k<K} (rho/2)^k), the common shape of
// the even (n = 2K) and odd (n = 2K-1) blocking formulas.
template <typename T>
T blocking_ratio(const T& rho, std::size_t n, std::size_t K)
{
    if constexpr (std::is_floating_point_v<T>) {
        if (rho > T(1)) {
            // Divide through by rho^n so nothing overflows.
            const T inv = T(1) / rho;
            const T head = T(2) * geometric_sum(inv, n + 1);
            T tail(0);
            const T log_half_rho = std::log(rho / T(2));
            const T log_rho_n = static_cast<T>(n) * std::log(rho);
            for (std::size_t k = 0; k < K; ++k)
                tail += std::exp(static_cast<T>(k) * log_half_rho - log_rho_n);
            return T(2) / (head - tail);
        }
    }
    const T numerator = T(2) * int_pow(rho, n);
    const T denominator = T(2) * geometric_sum(rho, n + 1) - geometric_sum(T(rho / T(2)), K);
    return numerator / denominator;
}

} // namespace detail

/// pi_K(K,K): stationary probability that both queues are full.
template <typename T>
T blocking_probability(const BasicSymmetricParams<T>& p)
{
    const std::size_t K = detail::closed_form_capacity(p);
    return detail::blocking_ratio(p.rho, 2 * K, K);
}

/// The rational three-case form; only defined away from rho in {1, 2} in the
/// generic branch. Kept as an independent route for cross-checks.
template <typename T>
T blocking_probability_piecewise(const BasicSymmetricParams<T>& p)
{
    const std::size_t K = detail::closed_form_capacity(p);
    const T& rho = p.rho;
    if (rho == T(1))
        return T(1) / (T(2 * K) + T(1) / int_pow(T(2), K));
    if (rho == T(2))
        return T(1) / (T(2) - T(K + 2) / int_pow(T(2), 2 * K + 1));
    const T numerator = (T(1) - rho) * (T(2) - rho);
    const T denominator = T(1) / int_pow(rho, 2 * K) + (T(1) - rho) / int_pow(T(T(2) * rho), K) - rho * (T(2) - rho);
    return numerator / denominator;
}

/// 2 * pi~_K(K-1,K) for the model that never holds more than 2K-1 customers.
template <typename T>
T blocking_probability_odd(const BasicSymmetricParams<T>& p)
{
    const std::size_t K = detail::closed_form_capacity(p);
    require(K >= 1, errc::invalid_argument, "odd variant needs K >= 1");
    return detail::blocking_ratio(p.rho, 2 * K - 1, K);
}

template <typename T>
T blocking_probability_odd_piecewise(const BasicSymmetricParams<T>& p)
{
    const std::size_t K = detail::closed_form_capacity(p);
    require(K >= 1, errc::invalid_argument, "odd variant needs K >= 1");
    const T& rho = p.rho;
    require(rho != T(1) && rho != T(2), errc::invalid_argument, "piecewise odd form excludes rho in {1,2}");
    const T numerator = (T(1) - rho) * (T(2) - rho);
    const T denominator = T(1) / int_pow(rho, 2 * K - 1) + rho * (T(1) - rho) / int_pow(T(T(2) * rho), K) -
                          rho * (T(2) - rho);
    return numerator / denominator;
}

/// Blocking when only the total L1 + L2 <= M is constrained.
template <typename T>
T blocking_total_constraint(const T& rho, std::size_t M)
{
    BasicSymmetricParams<T> p{rho, Capacity(0)};
    check_params(p);
    if (M % 2 == 0) {
        p.capacity = M / 2;
        return blocking_probability(p);
    }
    p.capacity = (M + 1) / 2;
    return blocking_probability_odd(p);
}

/// A_K(1) = P(L1 = 0) = 1 - rho (1 - pi_K(K,K)).
template <typename T>
T empty_queue_probability(const BasicSymmetricParams<T>& p)
{
    const T value = T(1) - p.rho * (T(1) - blocking_probability(p));
    require(value >= T(0) && value <= T(1), errc::domain_violation, "A_K(1) outside [0,1]");
    return value;
}

/// A_K(1/rho) = rho^(-2K) pi_K(K,K), evaluated without forming rho^(-2K).
template <typename T>
T a_at_inv_rho(const BasicSymmetricParams<T>& p)
{
    const std::size_t K = detail::closed_form_capacity(p);
    const T& rho = p.rho;
    return T(2) / (T(2) * geometric_sum(rho, 2 * K + 1) - geometric_sum(T(rho / T(2)), K));
}

enum class Regime { rho_to_0, rho_to_inf, K_to_inf };

inline Regime parse_regime(const std::string& name)
{
    if (name == "rho_to_0")
        return Regime::rho_to_0;
    if (name == "rho_to_inf")
        return Regime::rho_to_inf;
    if (name == "K_to_inf")
        return Regime::K_to_inf;
    fail(errc::invalid_argument, "unknown regime '" + name + "'");
}

/// Leading-order term of pi_K(K,K) in the requested regime.
inline double blocking_asymptotics(const SymmetricParams& p, Regime regime)
{
    check_params(p);
    const double rho = p.rho;
    const double K = static_cast<double>(p.capacity.value());
    switch (regime) {
    case Regime::rho_to_0:
        return 2.0 * std::pow(rho, 2.0 * K);
    case Regime::rho_to_inf:
        return 1.0 - 1.0 / rho;
    case Regime::K_to_inf:
        if (rho < 1.0)
            return std::pow(rho, 2.0 * K) * (1.0 - rho) * (2.0 - rho);
        if (rho == 1.0)
            return 1.0 / (2.0 * K);
        if (rho == 2.0)
            return 0.5;
        return 1.0 - 1.0 / rho;
    }
    fail(errc::invalid_argument, "unknown regime");
}

} // namespace jsq
