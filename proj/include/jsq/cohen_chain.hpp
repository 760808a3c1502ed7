#pragma once

// Chains of coupled roots (y, z) with y + z = 2(1+rho)x and yz = (1+2rho x)x,
// the two distinguished chains u and v through the zeros of phi, and the
// infinite-product form of A(y) = sum_k pi(0,k) y^k for the infinite model.

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "jsq/error.hpp"

namespace jsq {

using cplx = std::complex<double>;

/// phi(y,z) = rho y - z - (1+rho)/rho.
inline cplx phi(double rho, cplx y, cplx z) { return rho * y - z - (1.0 + rho) / rho; }

struct EllipseConstants {
    double a = 0.0;
    double b = 0.0;

    /// (a+b)/(a-b): growth factor of every chain in the forward direction.
    double growth() const { return (a + b) / (a - b); }
};

inline EllipseConstants ellipse_constants(double rho)
{
    require(rho > 0.0, errc::invalid_argument, "rho must be positive");
    return {(1.0 + rho) / (2.0 * (1.0 + rho * rho)), 1.0 / (2.0 * std::sqrt(1.0 + rho * rho))};
}

/// 2(1+rho)^2 yz - (y+z)(1+rho+rho(y+z)); zero exactly on the curve.
inline cplx curve_defect(double rho, cplx y, cplx z)
{
    return 2.0 * (1.0 + rho) * (1.0 + rho) * y * z - (y + z) * (1.0 + rho + rho * (y + z));
}

/// The two partners z of y on the curve: roots of
/// rho z^2 + (1 + rho + 2 rho y - 2(1+rho)^2 y) z + (1+rho) y + rho y^2.
inline std::pair<cplx, cplx> curve_partners(double rho, cplx y)
{
    const cplx b = 1.0 + rho + 2.0 * rho * y - 2.0 * (1.0 + rho) * (1.0 + rho) * y;
    const cplx c = (1.0 + rho) * y + rho * y * y;
    const cplx root = std::sqrt(b * b - 4.0 * rho * c);
    const cplx q = -0.5 * (b + (std::real(std::conj(b) * root) >= 0 ? root : -root));
    if (q == cplx(0.0))
        return {0.0, 0.0};
    return {q / rho, c / q};
}

/// Chain y^(n), n in [-N, N], seeded with y^(0) = y0 and y^(1) = y1.
struct ChainWindow {
    double rho = 0.0;
    std::size_t N = 0;
    std::vector<cplx> values; // values[n + N] = y^(n)
    cplx alpha = 0.0;
    cplx beta = 0.0;

    cplx operator[](long n) const { return values.at(static_cast<std::size_t>(n + static_cast<long>(N))); }

    /// a + alpha r^n + beta r^-n.
    cplx closed_form(long n) const
    {
        const auto e = ellipse_constants(rho);
        const double r = e.growth();
        return e.a + alpha * std::pow(r, static_cast<double>(n)) + beta * std::pow(r, -static_cast<double>(n));
    }
};

/// Coefficients of the closed form of the chain through (y, z).
inline std::pair<cplx, cplx> chain_coefficients(double rho, cplx y, cplx z)
{
    const auto [a, b] = ellipse_constants(rho);
    const cplx alpha = (a - b) / (4.0 * a * b) * (a * (z - y) + b * (z + y) - 2.0 * a * b);
    const cplx beta = (a + b) / (4.0 * a * b) * (a * (y - z) + b * (z + y) - 2.0 * a * b);
    return {alpha, beta};
}

inline ChainWindow chain(double rho, cplx y0, cplx y1, std::size_t N, double tol = 1e-9)
{
    require(rho > 0.0, errc::invalid_argument, "rho must be positive");
    const double scale = std::max({1.0, std::norm(y0), std::norm(y1)});
    require(std::abs(curve_defect(rho, y0, y1)) <= tol * scale * (1.0 + rho) * (1.0 + rho), errc::domain_violation,
            "seed pair is not on the curve");
    ChainWindow w;
    w.rho = rho;
    w.N = N;
    w.values.assign(2 * N + 1, 0.0);
    const double step = 2.0 * (1.0 + rho + rho * rho) / rho;
    const double shift = (1.0 + rho) / rho;
    const auto idx = [N](long n) { return static_cast<std::size_t>(n + static_cast<long>(N)); };
    w.values[idx(0)] = y0;
    if (N >= 1) {
        w.values[idx(1)] = y1;
        w.values[idx(-1)] = step * y0 - y1 - shift;
    }
    for (long n = 1; n < static_cast<long>(N); ++n) {
        w.values[idx(n + 1)] = step * w.values[idx(n)] - w.values[idx(n - 1)] - shift;
        w.values[idx(-n - 1)] = step * w.values[idx(-n)] - w.values[idx(-n + 1)] - shift;
    }
    std::tie(w.alpha, w.beta) = chain_coefficients(rho, y0, y1);
    return w;
}

/// Chain starting at y with y^(1) the first of its two partners.
inline ChainWindow chain_from(double rho, cplx y, std::size_t N)
{
    return chain(rho, y, curve_partners(rho, y).first, N);
}

/// u_n for n = 0..N (u_0 = 0, u_1 = -(1+rho)/rho; u_{-n-1} = u_n).
inline std::vector<double> u_sequence(double rho, std::size_t N)
{
    require(rho > 0.0, errc::invalid_argument, "rho must be positive");
    std::vector<double> u(N + 1, 0.0);
    const double step = 2.0 * (1.0 + rho + rho * rho) / rho;
    const double shift = (1.0 + rho) / rho;
    if (N >= 1)
        u[1] = -shift;
    for (std::size_t n = 2; n <= N; ++n)
        u[n] = step * u[n - 1] - u[n - 2] - shift;
    return u;
}

/// v_{-n} for n = 0..N, starting from v_0 = (2+rho)/rho^2, v_1 = 1/rho.
inline std::vector<double> v_sequence_backward(double rho, std::size_t N)
{
    require(rho > 0.0, errc::invalid_argument, "rho must be positive");
    const double step = 2.0 * (1.0 + rho + rho * rho) / rho;
    const double shift = (1.0 + rho) / rho;
    std::vector<double> v(N + 1, 0.0);
    v[0] = (2.0 + rho) / (rho * rho);
    double ahead = 1.0 / rho;
    for (std::size_t n = 1; n <= N; ++n) {
        v[n] = step * v[n - 1] - ahead - shift;
        ahead = v[n - 1];
    }
    return v;
}

/// v_n for n = 0..N in the forward direction (v_2 = 1, v_3 = 1+2rho).
inline std::vector<double> v_sequence_forward(double rho, std::size_t N)
{
    require(rho > 0.0, errc::invalid_argument, "rho must be positive");
    const double step = 2.0 * (1.0 + rho + rho * rho) / rho;
    const double shift = (1.0 + rho) / rho;
    std::vector<double> v(N + 1, 0.0);
    v[0] = (2.0 + rho) / (rho * rho);
    if (N >= 1)
        v[1] = 1.0 / rho;
    for (std::size_t n = 2; n <= N; ++n)
        v[n] = step * v[n - 1] - v[n - 2] - shift;
    return v;
}

struct CohenValue {
    cplx value = 0.0;
    double error = 0.0;
};

/// Truncated product A(y) = C prod_{n>=1}(1 - y/u_n) / prod_{n>=0}(1 - y/v_{-n}),
/// with C fixed by A(1) = 1 - rho. Valid for |y| below the pole v_0.
class CohenProduct {
public:
    static constexpr std::size_t max_factors = 400;

    /// Keeps enough factors that the neglected log-factors at |y| <= radius
    /// sum to less than tol.
    explicit CohenProduct(double rho, double radius = 1.0, double tol = 1e-12) : rho_(rho)
    {
        require(rho > 0.0 && rho < 1.0, errc::invalid_argument, "the product form needs 0 < rho < 1");
        require(tol > 0.0, errc::invalid_argument, "tolerance must be positive");
        radius = std::max(radius, 1.0);
        const double ratio = 1.0 / ellipse_constants(rho).growth();
        std::size_t N = 1;
        for (;; ++N) {
            require(N <= max_factors, errc::truncation_insufficient, "product did not reach the tolerance");
            u_ = u_sequence(rho, N);
            v_ = v_sequence_backward(rho, N);
            if (radius / std::abs(u_[N]) + radius / v_[N] < tol * (1.0 - ratio))
                break;
        }
        N_ = N;
        C_ = (1.0 - rho) / std::real(product(1.0));
    }

    double rho() const { return rho_; }
    std::size_t factors() const { return N_; }
    double constant() const { return C_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& v() const { return v_; }

    /// A(y) with an estimate of the truncation error.
    CohenValue evaluate(cplx y) const
    {
        require(std::abs(y) < v_[0], errc::domain_violation, "|y| must stay below the pole (2+rho)/rho^2");
        const cplx value = C_ * product(y);
        const double ratio = 1.0 / ellipse_constants(rho_).growth();
        const double tail = (std::abs(y) / std::abs(u_[N_]) + std::abs(y) / v_[N_]) * ratio / (1.0 - ratio);
        return {value, std::abs(value) * tail};
    }

    /// pi(0,k), k = 0..kmax: Taylor coefficients of the truncated product.
    std::vector<double> coefficients(std::size_t kmax) const
    {
        std::vector<double> c(kmax + 1, 0.0);
        c[0] = 1.0;
        for (std::size_t n = 1; n <= N_; ++n)
            for (std::size_t k = kmax; k >= 1; --k)
                c[k] -= c[k - 1] / u_[n];
        for (std::size_t n = 0; n <= N_; ++n)
            for (std::size_t k = 1; k <= kmax; ++k)
                c[k] += c[k - 1] / v_[n];
        for (auto& x : c)
            x *= C_;
        return c;
    }

private:
    cplx product(cplx y) const
    {
        cplx num = 1.0;
        for (std::size_t n = 1; n <= N_; ++n)
            num *= 1.0 - y / u_[n];
        cplx den = 1.0;
        for (std::size_t n = 0; n <= N_; ++n)
            den *= 1.0 - y / v_[n];
        return num / den;
    }

    double rho_;
    std::size_t N_ = 0;
    double C_ = 0.0;
    std::vector<double> u_;
    std::vector<double> v_;
};

inline CohenValue cohen_A(double rho, cplx y, double tol = 1e-12)
{
    return CohenProduct(rho, std::abs(y), tol).evaluate(y);
}

inline std::vector<double> boundary_coeffs_infinite(double rho, std::size_t kmax, double tol = 1e-12)
{
    return CohenProduct(rho, 1.0, tol).coefficients(kmax);
}

} // namespace jsq
