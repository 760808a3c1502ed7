#pragma once

// Total number of customers, its mean and bounds, and the single-queue
// comparison systems M/M/1/K and M/M/2/2K.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "jsq/blocking.hpp"
#include "jsq/cohen_chain.hpp"
#include "jsq/error.hpp"
#include "jsq/finite_dist.hpp"
#include "jsq/model.hpp"
#include "jsq/scalar.hpp"

namespace jsq {

/// P(N_K = n), n = 0..2K, where N_K = L1 + L2.
template <typename T>
std::vector<T> total_dist(const BasicSymmetricParams<T>& p)
{
    const std::size_t K = p.capacity.value();
    const auto b = boundary_from_blocking(p);
    std::vector<T> out(2 * K + 1, T(0));
    T acc(0);
    for (std::size_t n = 0; n <= 2 * K; ++n) {
        acc = acc * p.rho + (n <= K ? b[n] : T(0));
        out[n] = acc;
    }
    return out;
}

/// (pi_K(K,K) / rho^(2K)) rho^n: exact for n >= K, an upper bound below.
template <typename T>
T total_envelope(const BasicSymmetricParams<T>& p, std::size_t n)
{
    const std::size_t K = p.capacity.value();
    const T pi = blocking_probability(p);
    if (n >= 2 * K)
        return pi * int_pow(p.rho, n - 2 * K);
    return pi / int_pow(p.rho, 2 * K - n);
}

template <typename T>
T mean_total(const BasicSymmetricParams<T>& p)
{
    const auto dist = total_dist(p);
    T mean(0);
    for (std::size_t n = 1; n < dist.size(); ++n)
        mean += T(n) * dist[n];
    return mean;
}

struct Bounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Lower bound: mean of the M/M/2/2K queue. Upper bound: the mean under the
/// envelope pi * rho^(n - 2K) of the total distribution. Both are summed from
/// positive terms, so there is no cancellation near rho = 1.
inline Bounds mean_total_bounds(const SymmetricParams& p)
{
    check_params(p);
    using ld = long double;
    const std::size_t m = 2 * p.capacity.value();
    const ld rho = p.rho;

    // M/M/2/2K weights 1, 2 rho, 2 rho^2, ..., rescaled by rho^-m when rho > 1.
    const bool high = rho > 1.0L;
    const ld step = high ? 1.0L / rho : rho;
    ld w = 1.0L;
    ld num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t n = high ? m - i : i + 1;
        if (!high)
            w *= step;
        num += 2.0L * static_cast<ld>(n) * w;
        den += 2.0L * w;
        if (high)
            w *= step;
    }
    den += high ? w : 1.0L;

    // Envelope terms from n = 2K downwards: each step divides by rho.
    const ld pi = detail::blocking_ratio<ld>(rho, m, p.capacity.value());
    ld e = pi, upper = 0.0L;
    for (std::size_t n = m; n >= 1; --n) {
        upper += static_cast<ld>(n) * e;
        e /= rho;
    }
    return {static_cast<double>(num / den), static_cast<double>(upper)};
}

/// (M/M/2 mean, envelope bound) for the infinite model.
inline Bounds mean_total_bounds_infinite(double rho)
{
    require(rho > 0.0 && rho < 1.0, errc::invalid_argument, "infinite capacity needs 0 < rho < 1");
    return {2.0 * rho / (1.0 - rho * rho), rho * (2.0 - rho) / (1.0 - rho)};
}

/// E(N) for the infinite model from the product-form boundary.
inline double mean_total_infinite(double rho, double tol = 1e-13)
{
    require(rho > 0.0 && rho < 1.0, errc::invalid_argument, "infinite capacity needs 0 < rho < 1");
    // P(N = n) <= (2-rho)(1-rho) rho^n, so stop once n rho^n is negligible.
    std::size_t nmax = 16;
    while (static_cast<double>(nmax) * std::pow(rho, static_cast<double>(nmax)) * (2.0 - rho) / (1.0 - rho) > tol)
        nmax *= 2;
    const auto b = boundary_coeffs_infinite(rho, nmax);
    double acc = 0.0;
    double mean = 0.0;
    for (std::size_t n = 0; n <= nmax; ++n) {
        acc = acc * rho + b[n];
        mean += static_cast<double>(n) * acc;
    }
    return mean;
}

/// nu_K(K) = rho^K / sum_{k<=K} rho^k: blocking of M/M/1/K.
template <typename T>
T mm1k_blocking(const T& rho, std::size_t K)
{
    require(rho > T(0), errc::invalid_argument, "rho must be positive");
    if (rho > T(1))
        return T(1) / geometric_sum(T(T(1) / rho), K + 1);
    return int_pow(rho, K) / geometric_sum(rho, K + 1);
}

/// nu'(2K) = 2 rho^(2K) / (2 sum_{k<=2K} rho^k - 1): blocking of M/M/2/2K.
template <typename T>
T mm2_2k_blocking(const T& rho, std::size_t K)
{
    require(rho > T(0), errc::invalid_argument, "rho must be positive");
    if (rho > T(1)) {
        const T inv = T(1) / rho;
        return T(2) / (T(2) * geometric_sum(inv, 2 * K + 1) - int_pow(inv, 2 * K));
    }
    return T(2) * int_pow(rho, 2 * K) / (T(2) * geometric_sum(rho, 2 * K + 1) - T(1));
}

/// Idleness probability of the serve-the-longest-queue dual; by the
/// occupied/vacant exchange it is the JSQ blocking probability.
template <typename T>
T slq_idle_probability(const BasicSymmetricParams<T>& p)
{
    return blocking_probability(p);
}

/// Proven range for sup_rho (nu_K(K) - pi_K(K,K)).
inline Bounds mm1k_gap_bracket(std::size_t K)
{
    require(K >= 1, errc::invalid_argument, "K must be >= 1");
    const double Kd = static_cast<double>(K);
    const double t = std::pow(2.0, -Kd);
    return {(Kd + t - 1.0) / ((Kd + 1.0) * (2.0 * Kd + t)), 1.0 / (Kd + 1.0)};
}

/// Proven range for sup_rho (pi_K(K,K) - nu'(2K)).
inline Bounds mm2_gap_bracket(std::size_t K)
{
    require(K >= 1, errc::invalid_argument, "K must be >= 1");
    const double Kd = static_cast<double>(K);
    const double t = std::pow(2.0, -Kd);
    return {(0.5 - t) / ((2.0 * Kd + 0.5) * (2.0 * Kd + t)), 2.0 / (Kd * Kd)};
}

struct GridSpec {
    double lo = 0.01;
    double hi = 6.0;
    std::size_t n = 600;

    std::vector<double> points() const
    {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        return out;
    }
};

/// Parses "lo:hi:n".
inline GridSpec parse_grid(const std::string& text)
{
    const auto first = text.find(':');
    const auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
    if (second == std::string::npos)
        fail(errc::invalid_argument, "grid must look like lo:hi:n");
    GridSpec g;
    try {
        g.lo = std::stod(text.substr(0, first));
        g.hi = std::stod(text.substr(first + 1, second - first - 1));
        g.n = static_cast<std::size_t>(std::stoul(text.substr(second + 1)));
    } catch (const std::exception&) {
        fail(errc::invalid_argument, "grid must look like lo:hi:n");
    }
    require(g.lo > 0.0 && g.hi > g.lo && g.n >= 1, errc::invalid_argument, "grid needs 0 < lo < hi and n >= 1");
    return g;
}

struct RatioRow {
    double rho = 0.0;
    double nu_ratio = 0.0;      // nu_K(K) / pi_K(K,K)
    double nuprime_ratio = 0.0; // nu'(2K) / pi_K(K,K)
};

struct SupEstimate {
    double value = 0.0;
    double argmax = 0.0;
};

struct GapReport {
    std::size_t K = 0;
    SupEstimate mm1k_gap;
    SupEstimate mm2_gap;
    std::vector<RatioRow> rows;
};

namespace detail {

// Golden-section maximisation of f on [a, b].
template <typename F>
SupEstimate golden_max(F f, double a, double b, double tol = 1e-10)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol * std::max(1.0, std::abs(a))) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {f(x), x};
}

template <typename F>
SupEstimate grid_sup(F f, std::vector<double> grid)
{
    grid.push_back(1.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::size_t best = 0;
    double best_value = f(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = f(grid[i]);
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    SupEstimate out{best_value, grid[best]};
    const double a = grid[best == 0 ? 0 : best - 1];
    const double b = grid[std::min(best + 1, grid.size() - 1)];
    if (b > a) {
        const auto refined = golden_max(f, a, b);
        if (refined.value > out.value)
            out = refined;
    }
    return out;
}

} // namespace detail

/// Grid-and-refine estimates of the two uniform gaps, plus the ratio columns
/// nu_K(K)/pi_K(K,K) and nu'(2K)/pi_K(K,K) on the grid.
inline GapReport uniform_gap_report(std::size_t K, const GridSpec& grid)
{
    require(K >= 1, errc::invalid_argument, "K must be >= 1");
    GapReport report;
    report.K = K;
    auto pi = [K](double rho) { return blocking_probability(SymmetricParams{rho, K}); };
    auto mm1k_gap = [&](double rho) { return mm1k_blocking(rho, K) - pi(rho); };
    auto mm2_gap = [&](double rho) { return pi(rho) - mm2_2k_blocking(rho, K); };
    const auto points = grid.points();
    report.mm1k_gap = detail::grid_sup(mm1k_gap, points);
    report.mm2_gap = detail::grid_sup(mm2_gap, points);
    for (double rho : points) {
        const double blocking = pi(rho);
        report.rows.push_back({rho, mm1k_blocking(rho, K) / blocking, mm2_2k_blocking(rho, K) / blocking});
    }
    return report;
}

struct MeanRatioRow {
    double rho = 0.0;
    double lower_ratio = 0.0;
    double upper_ratio = 0.0;
};

/// Bounds divided by E(N_K) over a grid.
inline std::vector<MeanRatioRow> mean_bound_ratios(std::size_t K, const GridSpec& grid)
{
    std::vector<MeanRatioRow> rows;
    for (double rho : grid.points()) {
        const SymmetricParams p{rho, K};
        const double mean = mean_total(p);
        const auto b = mean_total_bounds(p);
        rows.push_back({rho, b.lower / mean, b.upper / mean});
    }
    return rows;
}

/// Bounds divided by E(N) for the infinite model; grid must lie in (0,1).
inline std::vector<MeanRatioRow> mean_bound_ratios_infinite(const GridSpec& grid)
{
    require(grid.hi < 1.0, errc::invalid_argument, "infinite capacity grid must stay below 1");
    std::vector<MeanRatioRow> rows;
    for (double rho : grid.points()) {
        const double mean = mean_total_infinite(rho);
        const auto b = mean_total_bounds_infinite(rho);
        rows.push_back({rho, b.lower / mean, b.upper / mean});
    }
    return rows;
}

} // namespace jsq
