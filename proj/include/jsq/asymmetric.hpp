#pragma once

// Two servers with different rates mu1, mu2 and tie-breaking probability p1.
// The distribution is rebuilt from its two boundary lines pi(k,0) and pi(0,k)
// through the kernels g1, g2; the boundary lines themselves come from the
// oracle and are checked against the generating-function relations.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "jsq/cohen_chain.hpp"
#include "jsq/convkernel.hpp"
#include "jsq/error.hpp"
#include "jsq/model.hpp"
#include "jsq/oracle.hpp"

namespace jsq {

inline constexpr std::size_t asym_oracle_cap = 60;

struct AsymKernel {
    Kernel<double> g1;
    Kernel<double> g2;
    std::pair<double, double> xi1; // roots of mu2 X^2 - (2 lambda + mu1 + mu2) X + 2 lambda
    std::pair<double, double> xi2; // roots of mu1 X^2 - (2 lambda + mu1 + mu2) X + 2 lambda
};

inline AsymKernel asym_kernel(const AsymmetricParams& p)
{
    AsymKernel k{asymmetric_kernel(p, 1), asymmetric_kernel(p, 2), {}, {}};
    auto roots = [](const Kernel<double>& ker) {
        const double r = std::sqrt(ker.discriminant());
        return std::pair<double, double>{(ker.s + r) / 2.0, (ker.s - r) / 2.0};
    };
    k.xi1 = roots(k.g1);
    k.xi2 = roots(k.g2);
    return k;
}

/// pi(k,0) (row, queue 2 empty) and pi(0,k) (col, queue 1 empty).
struct AsymBoundaries {
    std::vector<double> row;
    std::vector<double> col;
};

inline AsymBoundaries boundaries_of(const JointDist& d, std::size_t len)
{
    AsymBoundaries b;
    for (std::size_t k = 0; k < len; ++k) {
        b.row.push_back(d(k, 0));
        b.col.push_back(d(0, k));
    }
    return b;
}

inline AsymBoundaries asym_boundaries_oracle(const AsymmetricParams& p, std::size_t cap = asym_oracle_cap)
{
    const std::size_t K = p.capacity.value();
    require(K <= cap, errc::dimension_cap, "capacity above the oracle cap for asymmetric boundaries");
    return boundaries_of(oracle::stationary(p), K + 1);
}

namespace detail {

// Rebuilds all states (j,k) <= window. `top` is K for the finite model and
// unbounded otherwise; boundaries must cover every index the sums touch.
inline JointDist asym_fill(const AsymmetricParams& p, const AsymBoundaries& b, std::size_t window, std::size_t top)
{
    const auto ker = asym_kernel(p);
    const ConvTable<double> t1(ker.g1, window + 1, window + 1);
    const ConvTable<double> t2(ker.g2, window + 1, window + 1);
    const double r21 = p.mu2 / p.mu1;
    const double r12 = p.mu1 / p.mu2;
    JointDist d(window, false);
    for (std::size_t k = 1; k <= window; ++k)
        for (std::size_t j = 0; j < k; ++j) {
            double below = 0.0;
            double above = 0.0;
            for (std::size_t l = k; l <= std::min(top, k + j); ++l) {
                const std::size_t m = l - k + 1;
                below += b.row.at(l) * (t1(m, j) - t1(m, j + 1));
                above += b.col.at(l) * (t2(m, j) - t2(m, j + 1));
            }
            d.set(k, j, r21 * below);
            d.set(j, k, r12 * above);
        }
    for (std::size_t k = 0; k <= window && k < top; ++k) {
        double acc = 0.0;
        for (std::size_t l = k + 1; l <= std::min(top, 2 * k + 1); ++l)
            acc += p.mu2 * b.row.at(l) * t1(l - k, k + 1) + p.mu1 * b.col.at(l) * t2(l - k, k + 1);
        d.set(k, k, -acc / (2.0 * p.lambda));
    }
    return d;
}

} // namespace detail

/// Full distribution of the finite model from its boundary lines.
inline JointDist asym_reconstruct(const AsymmetricParams& p, const AsymBoundaries& b)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    require(b.row.size() == K + 1 && b.col.size() == K + 1, errc::invalid_argument, "boundaries must have length K+1");
    if (K == 0) {
        JointDist d(0, false);
        d.set(0, 0, b.row[0]);
        return d;
    }
    JointDist d = detail::asym_fill(p, b, K, K);
    const auto ker = asym_kernel(p);
    const auto g1 = kernel_values(ker.g1, K);
    const auto g2 = kernel_values(ker.g2, K);
    const double corner = 2.0 * p.lambda / (p.mu1 + p.mu2) *
                          (p.mu2 / p.mu1 * b.row[K] * (g1[K - 1] - g1[K]) + p.mu1 / p.mu2 * b.col[K] * (g2[K - 1] - g2[K]));
    d.set(K, K, corner);
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j <= K; ++j)
            if (d(j, k) < -negative_mass_tolerance)
                fail(errc::negative_mass, "asymmetric reconstruction produced a negative mass");
    return d;
}

/// Infinite model over a window, boundaries from a truncated oracle at
/// K_trunc >= 2*window + 1.
inline JointDist asym_reconstruct_infinite(const AsymmetricParams& p, std::size_t window, std::size_t K_trunc)
{
    check_ergodic(p);
    require(K_trunc >= 2 * window + 1, errc::window_too_small, "truncation must reach 2*window + 1");
    const auto truncated = oracle::truncated_infinite(p, K_trunc);
    return detail::asym_fill(p, boundaries_of(truncated, 2 * window + 2), window, 2 * window + 2);
}

namespace detail {

inline cplx eval_poly(const std::vector<double>& c, cplx y)
{
    cplx acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;)
        acc = acc * y + c[i];
    return acc;
}

// Roots of a Y^2 + b Y + c.
inline std::pair<cplx, cplx> quadratic_roots(cplx a, cplx b, cplx c)
{
    const cplx root = std::sqrt(b * b - 4.0 * a * c);
    const cplx q = -0.5 * (b + (std::real(std::conj(b) * root) >= 0 ? root : -root));
    if (q == cplx(0.0))
        return {0.0, 0.0};
    return {q / a, c / q};
}

} // namespace detail

/// Largest |x| at which the two boundary relations are checked.
inline double asym_small_x_radius(const AsymmetricParams& p)
{
    return 0.2 * std::min({1.0, p.mu1 / (2.0 * p.lambda), p.mu2 / (2.0 * p.lambda)});
}

/// Residuals (left minus right) of the two relations tying A1(y) = sum pi(k,0) y^k
/// and A2(y) = sum pi(0,k) y^k at the roots of p_{x,1} and p_{x,2}.
inline std::pair<cplx, cplx> asym_functional_residual(const AsymmetricParams& p, const JointDist& d, cplx x)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    require(d.capacity() == K, errc::invalid_argument, "distribution capacity mismatch");
    require(std::abs(x) <= asym_small_x_radius(p) * (1.0 + 1e-12), errc::domain_violation,
            "|x| outside the small disk");
    const double lam = p.lambda;
    const double total = 2.0 * lam + p.mu1 + p.mu2;
    const auto [y1, z1] = detail::quadratic_roots(p.mu2, -total * x, (p.mu1 + 2.0 * lam * x) * x);
    const auto [y2, z2] = detail::quadratic_roots(p.mu1, -total * x, (p.mu2 + 2.0 * lam * x) * x);
    const double scale = std::max(1.0, std::abs(x));
    if (std::abs(y1 - z1) <= 1e-14 * scale || std::abs(y2 - z2) <= 1e-14 * scale)
        fail(errc::degenerate_discriminant, "coincident roots; perturb x");
    const auto b = boundaries_of(d, K + 1);
    const cplx A1y = detail::eval_poly(b.row, y1), A1z = detail::eval_poly(b.row, z1);
    const cplx A2y = detail::eval_poly(b.col, y2), A2z = detail::eval_poly(b.col, z2);
    const cplx mixed = p.mu1 * (A1y - A1z) / (y1 - z1) + p.mu2 * (A2y - A2z) / (y2 - z2);
    const cplx xK = std::pow(x, static_cast<double>(K)) * d(K, K);
    const cplx lhs1 = p.mu2 / (y1 - z1) * ((y1 - x) * A1y - (z1 - x) * A1z);
    const cplx rhs1 = p.mu2 * xK + (p.mu2 + 2.0 * p.p1 * lam * x) / (2.0 * lam) * mixed;
    const cplx lhs2 = p.mu1 / (y2 - z2) * ((y2 - x) * A2y - (z2 - x) * A2z);
    const cplx rhs2 = p.mu1 * xK + (p.mu1 + 2.0 * p.p2() * lam * x) / (2.0 * lam) * mixed;
    return {lhs1 - rhs1, lhs2 - rhs2};
}

/// |mu2 A1(1) + mu1 A2(1) - (mu1 + mu2) + 2 lambda (1 - pi(K,K))|.
inline double asym_normalization_check(const AsymmetricParams& p, const JointDist& d)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    double a1 = 0.0;
    double a2 = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
        a1 += d(k, 0);
        a2 += d(0, k);
    }
    return std::abs(p.mu2 * a1 + p.mu1 * a2 - (p.mu1 + p.mu2) + 2.0 * p.lambda * (1.0 - d(K, K)));
}

} // namespace jsq
