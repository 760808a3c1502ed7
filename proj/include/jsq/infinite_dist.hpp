#pragma once

// Symmetric model without capacity limit (rho < 1): the distribution over a
// finite window, rebuilt from the boundary coefficients of the product form,
// together with the diagonal sums T_k and decay-rate diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "jsq/cohen_chain.hpp"
#include "jsq/convkernel.hpp"
#include "jsq/error.hpp"
#include "jsq/finite_dist.hpp"
#include "jsq/model.hpp"

namespace jsq {

inline std::size_t default_window(double rho)
{
    require(rho > 0.0 && rho < 1.0, errc::invalid_argument, "infinite capacity needs 0 < rho < 1");
    return std::max<std::size_t>(40, 4 * static_cast<std::size_t>(std::ceil(1.0 / (1.0 - rho))));
}

/// Upper bound on P(N > n): sum_{m > n} (2-rho)(1-rho) rho^m.
inline double infinite_tail_bound(double rho, std::size_t n)
{
    return (2.0 - rho) * std::pow(rho, static_cast<double>(n + 1));
}

/// Fills pi(j,k) for j, k <= window from pi(0,l), l <= 2*window + 1.
inline JointDist reconstruct_infinite(double rho, const std::vector<double>& boundary, std::size_t window)
{
    require(boundary.size() >= 2 * window + 2, errc::invalid_argument, "boundary shorter than 2*window + 2");
    const auto table = ConvTable<double>::symmetric(rho, window + 1, window + 1);
    JointDist d(window, true);
    for (std::size_t k = 1; k <= window; ++k)
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t l = k; l <= std::min(2 * k - 1, k + j); ++l) {
                const std::size_t m = l - k + 1;
                acc += boundary[l] * (table(m, j) - table(m, j + 1));
            }
            d.set(j, k, acc);
        }
    for (std::size_t k = 0; k <= window; ++k) {
        double acc = 0.0;
        for (std::size_t l = k + 1; l <= 2 * k + 1; ++l)
            acc += boundary[l] * table(l - k, k + 1);
        d.set(k, k, -acc / rho);
    }
    return d;
}

inline JointDist stationary_infinite(double rho, std::size_t window, double tol = 1e-12)
{
    require(rho > 0.0 && rho < 1.0, errc::invalid_argument, "infinite capacity needs 0 < rho < 1");
    return reconstruct_infinite(rho, boundary_coeffs_infinite(rho, 2 * window + 1, tol), window);
}

struct TSeq {
    std::vector<double> T;
    double tail_bound = 0.0;
};

/// T_k = sum_j pi(j, j+k) over the window, k = 0..kmax, plus a bound on the
/// mass the window misses.
inline TSeq t_seq(double rho, const JointDist& d, std::size_t kmax, double tol = 1e-7)
{
    const std::size_t W = d.capacity();
    require(kmax <= W, errc::window_too_small, "kmax exceeds the window");
    TSeq out;
    out.T.assign(kmax + 1, 0.0);
    for (std::size_t k = 0; k <= kmax; ++k)
        for (std::size_t j = 0; j + k <= W; ++j)
            out.T[k] += d(j, j + k);
    // Every state (j, j+k) dropped from the window has total above W.
    out.tail_bound = infinite_tail_bound(rho, W);
    if (out.tail_bound > tol)
        fail(errc::window_too_small, "window tail exceeds the tolerance");
    return out;
}

/// Residuals of (1+2rho)T_1 = (1+rho)T_0 - pi(0,0) (entry 0) and
/// (1+2rho)T_{k+1} = T_k - pi(0,k) (entry k >= 1).
inline std::vector<double> t_recurrence_residuals(double rho, const JointDist& d, const TSeq& t)
{
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < t.T.size(); ++k) {
        const double lhs = (1.0 + 2.0 * rho) * t.T[k + 1];
        const double rhs = (k == 0 ? (1.0 + rho) * t.T[0] : t.T[k]) - d(0, k);
        out.push_back(lhs - rhs);
    }
    return out;
}

struct DecayRatio {
    std::size_t k = 0;
    double ratio = 0.0;
};

/// pi(k - offset, k) / ((2+rho)^-offset rho^(2k)) for k in [kmin, kmax];
/// offset 0 gives pi(k,k)/rho^(2k).
inline std::vector<DecayRatio> kingman_decay_ratio(double rho, const JointDist& d, std::size_t offset,
                                                   std::size_t kmin, std::size_t kmax)
{
    require(rho > 0.0 && rho < 1.0, errc::invalid_argument, "needs 0 < rho < 1");
    require(kmax <= d.capacity(), errc::window_too_small, "kmax exceeds the window");
    require(kmin >= offset, errc::invalid_argument, "offset larger than kmin");
    std::vector<DecayRatio> out;
    for (std::size_t k = kmin; k <= kmax; ++k) {
        const double scale = std::pow(2.0 + rho, -static_cast<double>(offset)) * std::pow(rho, 2.0 * k);
        out.push_back({k, d(k - offset, k) / scale});
    }
    return out;
}

/// max over the window of |pi_K(j,k) - pi(j,k)|, one entry per K.
inline std::vector<double> convergence_finite_to_infinite(double rho, const std::vector<std::size_t>& K_list,
                                                          std::size_t window)
{
    require(rho > 0.0 && rho < 1.0, errc::invalid_argument, "needs 0 < rho < 1");
    const JointDist limit = stationary_infinite(rho, window);
    std::vector<double> gaps;
    for (std::size_t K : K_list) {
        require(K >= window, errc::window_too_small, "capacity smaller than the comparison window");
        const JointDist finite = stationary_finite(SymmetricParams{rho, K});
        double gap = 0.0;
        for (std::size_t k = 0; k <= window; ++k)
            for (std::size_t j = 0; j <= window; ++j)
                gap = std::max(gap, std::abs(finite(j, k) - limit(j, k)));
        gaps.push_back(gap);
    }
    return gaps;
}

/// P(N = n) = (sum_{k<=n} pi(0,k) rho^-k) rho^n for the infinite model.
inline std::vector<double> total_dist_infinite(double rho, const std::vector<double>& boundary, std::size_t nmax)
{
    require(boundary.size() > nmax, errc::invalid_argument, "boundary too short");
    std::vector<double> out(nmax + 1);
    double acc = 0.0;
    for (std::size_t n = 0; n <= nmax; ++n) {
        acc = acc * rho + boundary[n];
        out[n] = acc;
    }
    return out;
}

} // namespace jsq
