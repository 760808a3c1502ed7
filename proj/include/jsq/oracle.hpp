#pragma once

// Brute-force ground truth: the stationary vector of a generator obtained by
// direct elimination on the full (unreduced) balance equations.

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "jsq/error.hpp"
#include "jsq/model.hpp"
#include "jsq/scalar.hpp"

namespace jsq::oracle {

inline constexpr std::size_t max_states = 10000;

namespace detail {

// Banded matrix with room for the fill-in produced by row pivoting.
template <typename T>
class BandedSystem {
public:
    BandedSystem(std::size_t n, std::size_t lower, std::size_t upper)
        : n_(n), kl_(lower), ku_(upper), width_(2 * lower + upper + 1), a_(n * width_, T(0)), b_(n, T(0))
    {
    }

    T& at(std::size_t row, std::size_t col) { return a_[row * width_ + (col + kl_ - row)]; }
    T& rhs(std::size_t row) { return b_[row]; }

    void clear_row(std::size_t row)
    {
        for (std::size_t i = 0; i < width_; ++i)
            a_[row * width_ + i] = T(0);
    }

    std::vector<T> solve()
    {
        const std::size_t reach = kl_ + ku_;
        for (std::size_t c = 0; c < n_; ++c) {
            const std::size_t last_row = std::min(n_ - 1, c + kl_);
            const std::size_t last_col = std::min(n_ - 1, c + reach);
            std::size_t pivot = c;
            T best = abs_value(at(c, c));
            for (std::size_t r = c + 1; r <= last_row; ++r) {
                T candidate = abs_value(at(r, c));
                if (candidate > best) {
                    best = candidate;
                    pivot = r;
                }
            }
            if (best == T(0))
                fail(errc::singular_system, "generator is not irreducible");
            if (pivot != c) {
                for (std::size_t cc = c; cc <= last_col; ++cc)
                    std::swap(at(c, cc), at(pivot, cc));
                std::swap(b_[c], b_[pivot]);
            }
            const T diag = at(c, c);
            for (std::size_t r = c + 1; r <= last_row; ++r) {
                if (at(r, c) == T(0))
                    continue;
                const T factor = at(r, c) / diag;
                for (std::size_t cc = c; cc <= last_col; ++cc)
                    at(r, cc) -= factor * at(c, cc);
                b_[r] -= factor * b_[c];
            }
        }
        std::vector<T> x(n_, T(0));
        for (std::size_t c = n_; c-- > 0;) {
            T acc = b_[c];
            const std::size_t last_col = std::min(n_ - 1, c + reach);
            for (std::size_t cc = c + 1; cc <= last_col; ++cc)
                acc -= at(c, cc) * x[cc];
            x[c] = acc / at(c, c);
        }
        return x;
    }

private:
    std::size_t n_, kl_, ku_, width_;
    std::vector<T> a_;
    std::vector<T> b_;
};

} // namespace detail

namespace detail {

// Q^T pi = 0 with the balance equation of state `pinned` replaced by
// pi(pinned) = 1. A full row sum = 1 would destroy the band.
template <typename T>
std::vector<T> solve_pinned(const BasicRateMatrix<T>& q, std::size_t pinned)
{
    const std::size_t n = q.dimension();
    const std::size_t band = std::max<std::size_t>(q.bandwidth(), 1);
    BandedSystem<T> system(n, band, band);
    for (std::size_t v = 0; v < n; ++v) {
        system.at(v, v) -= q.exit_rate(v);
        for (const auto& jump : q.jumps(v))
            system.at(jump.to, v) += jump.rate;
    }
    system.clear_row(pinned);
    system.at(pinned, pinned) = T(1);
    system.rhs(pinned) = T(1);
    return system.solve();
}

template <typename T>
bool all_finite(const std::vector<T>& x)
{
    if constexpr (is_rational_v<T>)
        return true;
    else {
        T total(0);
        for (const auto& v : x) {
            if (!std::isfinite(to_double(v)))
                return false;
            total += v;
        }
        return std::isfinite(to_double(total)) && total > T(0);
    }
}

} // namespace detail

/// Unique probability vector with pi Q = 0.
///
/// Solves Q^T pi = 0 by banded Gaussian elimination with partial pivoting.
/// The last balance equation is replaced by pi(last) = 1 and the result is
/// normalised afterwards. When the unnormalised masses overflow (light
/// traffic, large K) the first state is pinned instead.
template <typename T>
std::vector<T> solve_balance_dense(const BasicRateMatrix<T>& q)
{
    const std::size_t n = q.dimension();
    require(n <= max_states, errc::dimension_cap, "oracle is limited to 10^4 states");
    std::vector<T> pi;
    bool ok = false;
    try {
        pi = detail::solve_pinned(q, n - 1);
        ok = detail::all_finite(pi);
    } catch (const error& e) {
        if (e.code() != errc::singular_system || n == 1)
            throw;
    }
    if (!ok) {
        pi = detail::solve_pinned(q, 0);
        require(detail::all_finite(pi), errc::singular_system, "stationary masses do not fit the scalar range");
    }
    T total(0);
    for (const auto& mass : pi)
        total += mass;
    for (auto& mass : pi)
        mass /= total;
    return pi;
}

/// max_v |(pi Q)(v)|.
template <typename T>
double balance_residual(const BasicRateMatrix<T>& q, const std::vector<T>& pi)
{
    std::vector<double> flow(q.dimension(), 0.0);
    for (std::size_t v = 0; v < q.dimension(); ++v) {
        const double mass = to_double(pi[v]);
        flow[v] -= mass * to_double(q.exit_rate(v));
        for (const auto& jump : q.jumps(v))
            flow[jump.to] += mass * to_double(jump.rate);
    }
    double worst = 0.0;
    for (double f : flow)
        worst = std::max(worst, std::abs(f));
    return worst;
}

/// Independent second route: power iteration on the uniformised chain
/// P = I + Q / Lambda with Lambda = max exit rate + 1.
inline std::vector<double> stationary_power_iteration(const RateMatrix& q, std::size_t max_iterations = 2000000,
                                                      double tol = 1e-14)
{
    const std::size_t n = q.dimension();
    double lambda = 0.0;
    for (std::size_t v = 0; v < n; ++v)
        lambda = std::max(lambda, q.exit_rate(v));
    lambda += 1.0;
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        for (std::size_t v = 0; v < n; ++v)
            next[v] = pi[v] * (1.0 - q.exit_rate(v) / lambda);
        for (std::size_t v = 0; v < n; ++v)
            for (const auto& jump : q.jumps(v))
                next[jump.to] += pi[v] * jump.rate / lambda;
        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            change = std::max(change, std::abs(next[v] - pi[v]));
        pi.swap(next);
        if (change < tol)
            break;
    }
    return pi;
}

/// Oracle stationary distribution of a finite-capacity model (full storage,
/// symmetry is not imposed).
template <typename T>
BasicJointDist<T> stationary(const BasicSymmetricParams<T>& p)
{
    const auto q = build_generator(p);
    return BasicJointDist<T>::from_full(p.capacity.value(), solve_balance_dense(q), false);
}

template <typename T>
BasicJointDist<T> stationary(const BasicAsymmetricParams<T>& p)
{
    const auto q = build_generator(p);
    return BasicJointDist<T>::from_full(p.capacity.value(), solve_balance_dense(q), false);
}

/// Oracle for the model that never holds more than 2K-1 customers.
template <typename T>
BasicJointDist<T> stationary_variant(const BasicSymmetricParams<T>& p)
{
    const auto q = build_variant_generator(p);
    return BasicJointDist<T>::from_full(p.capacity.value(), solve_balance_dense(q), false);
}

struct TruncatedSolution {
    JointDist dist;
    double tail_bound = 0.0;
};

/// Mass bound outside the truncation: sum_{n > K} (2-rho)(1-rho) rho^n.
inline double truncation_tail_bound(double rho, std::size_t K)
{
    return (2.0 - rho) * std::pow(rho, static_cast<double>(K + 1));
}

/// Infinite-capacity symmetric model approximated by the K_trunc model.
inline TruncatedSolution truncated_infinite(double rho, std::size_t K_trunc)
{
    SymmetricParams p{rho, Capacity::infinite()};
    check_ergodic(p);
    p.capacity = K_trunc;
    return {stationary(p), truncation_tail_bound(rho, K_trunc)};
}

inline JointDist truncated_infinite(const AsymmetricParams& params, std::size_t K_trunc)
{
    check_ergodic(params);
    return stationary(with_capacity(params, K_trunc));
}

} // namespace jsq::oracle
