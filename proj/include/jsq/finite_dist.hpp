#pragma once

// Stationary distribution of the symmetric finite-capacity model: the
// boundary pi_K(0,l) by back-substitution from the blocking probability, then
// every other state as a finite convolution sum over that boundary.

#include <complex>
#include <cstddef>
#include <vector>

#include "jsq/blocking.hpp"
#include "jsq/cohen_chain.hpp"
#include "jsq/convkernel.hpp"
#include "jsq/error.hpp"
#include "jsq/model.hpp"
#include "jsq/oracle.hpp"
#include "jsq/scalar.hpp"

namespace jsq {

/// pi(0,l) for l = 0..K (or over a window of the infinite model).
template <typename T = double>
using BasicBoundarySeq = std::vector<T>;
using BoundarySeq = BasicBoundarySeq<double>;

namespace detail {

template <typename T>
bool pivot_is_degenerate(const T& pivot, const T& scale)
{
    if constexpr (is_rational_v<T>)
        return pivot == T(0);
    else
        return abs_value(pivot) < T(1e-12) * scale;
}

} // namespace detail

/// Boundary pi_K(0,0..K): the top value from the blocking probability, then
/// one unknown per level going down.
template <typename T>
BasicBoundarySeq<T> boundary_from_blocking(const BasicSymmetricParams<T>& p, const ConvTable<T>& table)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    if (K == 0)
        return {T(1)};
    require(table.kmax() >= K + 1 && table.jmax() >= K + 1, errc::invalid_argument, "convolution table too small");
    const T& rho = p.rho;
    BasicBoundarySeq<T> b(K + 1, T(0));
    b[K] = blocking_probability(p) / (T(2) * rho * (table(1, K - 1) - table(1, K)));
    const T two_plus_rho = T(2) + rho;
    for (std::size_t k = K; k-- > 0;) {
        T rest(0);
        for (std::size_t l = k + 1; l <= K; ++l) {
            const std::size_t m = l - k + 1;
            rest += b[l] * (table(m, k + 2) - two_plus_rho * table(m, k + 1));
        }
        const T pivot = table(1, k + 2) - two_plus_rho * table(1, k + 1);
        const T scale = abs_value(table(1, k + 2)) + two_plus_rho * abs_value(table(1, k + 1));
        if (detail::pivot_is_degenerate(pivot, scale))
            fail(errc::degenerate_pivot, "boundary recursion pivot vanishes at level " + std::to_string(k));
        b[k] = -rest / pivot;
    }
    return b;
}

template <typename T>
BasicBoundarySeq<T> boundary_from_blocking(const BasicSymmetricParams<T>& p)
{
    const std::size_t K = p.capacity.value();
    return boundary_from_blocking(p, ConvTable<T>::symmetric(p.rho, K + 1, K + 1));
}

/// Fills every state from the boundary. pi_K(K,K) comes from the closed form.
template <typename T>
BasicJointDist<T> reconstruct(const BasicSymmetricParams<T>& p, const BasicBoundarySeq<T>& b,
                              const ConvTable<T>& table)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    require(b.size() == K + 1, errc::invalid_argument, "boundary length must be K+1");
    BasicJointDist<T> d(K, true);
    if (K == 0) {
        d.set(0, 0, b[0]);
        return d;
    }
    require(table.kmax() >= K + 1 && table.jmax() >= K + 1, errc::invalid_argument, "convolution table too small");
    for (std::size_t k = 1; k <= K; ++k)
        for (std::size_t j = 0; j < k; ++j) {
            T acc(0);
            for (std::size_t l = k; l <= K; ++l) {
                const std::size_t m = l - k + 1;
                acc += b[l] * (table(m, j) - table(m, j + 1));
            }
            d.set(j, k, acc);
        }
    for (std::size_t k = 0; k < K; ++k) {
        T acc(0);
        for (std::size_t l = k + 1; l <= K; ++l)
            acc += b[l] * table(l - k, k + 1);
        d.set(k, k, T(-acc / p.rho));
    }
    d.set(K, K, blocking_probability(p));
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j <= k; ++j) {
            const bool negative = is_rational_v<T> ? d(j, k) < T(0) : to_double(d(j, k)) < -negative_mass_tolerance;
            if (negative)
                fail(errc::negative_mass, "reconstruction produced a negative mass at (" + std::to_string(j) + "," +
                                              std::to_string(k) + ")");
        }
    return d;
}

template <typename T>
BasicJointDist<T> reconstruct(const BasicSymmetricParams<T>& p, const BasicBoundarySeq<T>& b)
{
    const std::size_t K = p.capacity.value();
    return reconstruct(p, b, ConvTable<T>::symmetric(p.rho, K + 1, K + 1));
}

/// Full distribution. Total mass is whatever the formulas give; it is never
/// renormalised. A degenerate boundary pivot falls back to the oracle boundary.
template <typename T>
BasicJointDist<T> stationary_finite(const BasicSymmetricParams<T>& p)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    const auto table = ConvTable<T>::symmetric(p.rho, K + 1, K + 1);
    BasicBoundarySeq<T> b;
    try {
        b = boundary_from_blocking(p, table);
    } catch (const error& e) {
        if (e.code() != errc::degenerate_pivot)
            throw;
        const auto exact = oracle::stationary(p);
        b.resize(K + 1);
        for (std::size_t l = 0; l <= K; ++l)
            b[l] = exact(0, l);
    }
    return reconstruct(p, b, table);
}

/// Boundary from the functional equation alone: A_K is known at 1/rho, the
/// equation carries it along the chain v_1 = 1/rho, v_2 = 1, v_3 = 1+2rho, ...
/// and K+1 values pin down the degree-K polynomial. Needs distinct chain
/// points; raises degenerate-pivot when the chain revisits a value.
template <typename T>
BasicBoundarySeq<T> boundary_from_chain(const BasicSymmetricParams<T>& p)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    const T& rho = p.rho;
    const T pi_kk = blocking_probability(p);
    std::vector<T> nodes{T(1) / rho};
    std::vector<T> values{a_at_inv_rho(p)};
    T prev = (T(2) + rho) / (rho * rho);
    T cur = nodes[0];
    const T step = T(2) * (T(1) + rho + rho * rho) / rho;
    const T shift = (T(1) + rho) / rho;
    auto phi = [&](const T& y, const T& z) { return rho * y - z - shift; };
    while (nodes.size() < K + 1) {
        const T next = step * cur - prev - shift;
        const T x = (cur + next) / (T(2) * (T(1) + rho));
        const T denom = phi(next, cur);
        if (detail::pivot_is_degenerate(denom, abs_value(next) + abs_value(cur)))
            fail(errc::degenerate_pivot, "phi vanishes along the chain");
        const T value = (phi(cur, next) * values.back() - (T(1) + rho) * int_pow(x, K) * (cur - next) * pi_kk) / denom;
        for (const auto& node : nodes)
            if (detail::pivot_is_degenerate(T(next - node), abs_value(next)))
                fail(errc::degenerate_pivot, "chain revisits a point; interpolation nodes not distinct");
        nodes.push_back(next);
        values.push_back(value);
        prev = cur;
        cur = next;
    }
    // Newton divided differences, then expand to monomial coefficients.
    const std::size_t n = nodes.size();
    std::vector<T> dd = values;
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = n - 1; i >= level; --i)
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - level]);
    std::vector<T> coeffs(n, T(0));
    for (std::size_t i = n; i-- > 0;) {
        // coeffs <- coeffs * (y - nodes[i]) + dd[i]
        std::vector<T> next(n, T(0));
        for (std::size_t c = 0; c < n; ++c) {
            if (c + 1 < n)
                next[c + 1] += coeffs[c];
            next[c] -= nodes[i] * coeffs[c];
        }
        next[0] += dd[i];
        coeffs = std::move(next);
    }
    return coeffs;
}

template <typename T>
std::complex<double> eval_series(const std::vector<T>& coeffs, std::complex<double> y)
{
    std::complex<double> acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;)
        acc = acc * y + to_double(coeffs[i]);
    return acc;
}

template <typename T>
std::vector<double> boundary_of(const BasicJointDist<T>& d)
{
    std::vector<double> b(d.capacity() + 1);
    for (std::size_t k = 0; k <= d.capacity(); ++k)
        b[k] = to_double(d(0, k));
    return b;
}

/// Residual of phi(y,z)A_K(y) - phi(z,y)A_K(z) = (1+rho) x^K (y-z) pi_K(K,K)
/// at the two roots y, z of Y^2 - 2(1+rho) x Y + (1+2 rho x) x.
template <typename T>
std::complex<double> functional_residual_AK(const SymmetricParams& p, const BasicJointDist<T>& d,
                                            std::complex<double> x)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    require(d.capacity() == K, errc::invalid_argument, "distribution capacity mismatch");
    const double rho = p.rho;
    const auto [y, z] = kernel_roots(symmetric_kernel(rho), x);
    if (std::abs(y - z) <= 1e-13 * std::max(1.0, std::abs(y)))
        fail(errc::degenerate_discriminant, "double root; the identity is trivial here");
    const auto b = boundary_of(d);
    const std::complex<double> lhs = phi(rho, y, z) * eval_series(b, y) - phi(rho, z, y) * eval_series(b, z);
    const std::complex<double> rhs =
        (1.0 + rho) * std::pow(x, static_cast<double>(K)) * (y - z) * to_double(d(K, K));
    return lhs - rhs;
}

/// Residual of the bivariate relation between F_K(x,y) = sum_{j<=k} pi(j,k) x^j y^(k-j),
/// A_K and B_K(x) = sum pi(k,k) x^k.
template <typename T>
std::complex<double> functional_residual_FK(const SymmetricParams& p, const BasicJointDist<T>& d,
                                            std::complex<double> x, std::complex<double> y)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    require(d.capacity() == K, errc::invalid_argument, "distribution capacity mismatch");
    const double rho = p.rho;
    std::complex<double> F = 0.0;
    std::complex<double> B = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
        for (std::size_t j = 0; j <= k; ++j)
            F += to_double(d(j, k)) * std::pow(x, static_cast<double>(j)) * std::pow(y, static_cast<double>(k - j));
        B += to_double(d(k, k)) * std::pow(x, static_cast<double>(k));
    }
    const std::complex<double> A = eval_series(boundary_of(d), y);
    const std::complex<double> kernel = y * y - 2.0 * (1.0 + rho) * x * y + (1.0 + 2.0 * rho * x) * x;
    const std::complex<double> rhs = y * (y - x) * A - (rho * y * y + (1.0 + rho) * y - 1.0 - 2.0 * rho * x) * x * B +
                                     rho * std::pow(x, static_cast<double>(K + 1)) * y * (y - 1.0) * to_double(d(K, K));
    return kernel * F - rhs;
}

} // namespace jsq
