#pragma once

// The kernel g and its convolution powers g^{*k}.
//
// A kernel is described by the two-step recurrence it satisfies,
//     g(j+2) = s g(j+1) - p g(j),  g(0) = 0,  g(1) = lead,
// so that g(j) = lead (xi+^j - xi-^j) / (xi+ - xi-) with xi+- the roots of
// X^2 - s X + p. The symmetric model uses s = 2(1+rho), p = 2 rho, lead = -1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "jsq/error.hpp"
#include "jsq/model.hpp"
#include "jsq/scalar.hpp"

namespace jsq {

template <typename T = double>
struct Kernel {
    T s{4};
    T p{2};
    T lead{-1};

    /// Discriminant s^2 - 4p of X^2 - s X + p; positive for every model kernel.
    T discriminant() const { return s * s - T(4) * p; }
};

template <typename T>
Kernel<T> symmetric_kernel(const T& rho)
{
    require(rho > T(0), errc::invalid_argument, "rho must be positive");
    return {T(2) * (T(1) + rho), T(2) * rho, T(-1)};
}

/// Kernel g_i of the asymmetric model (i = 1 or 2).
template <typename T>
Kernel<T> asymmetric_kernel(const BasicAsymmetricParams<T>& p, int i)
{
    check_params(p);
    require(i == 1 || i == 2, errc::invalid_argument, "kernel id must be 1 or 2");
    const T& own = i == 1 ? p.mu2 : p.mu1;
    const T& other = i == 1 ? p.mu1 : p.mu2;
    const T total = T(2) * p.lambda + p.mu1 + p.mu2;
    return {total / own, T(2) * p.lambda / own, T(-other / own)};
}

/// g(0..jmax) by the recurrence; exact for rational input.
template <typename T>
std::vector<T> kernel_values(const Kernel<T>& ker, std::size_t jmax)
{
    std::vector<T> g(jmax + 1, T(0));
    if (jmax >= 1)
        g[1] = ker.lead;
    for (std::size_t j = 2; j <= jmax; ++j)
        g[j] = ker.s * g[j - 1] - ker.p * g[j - 2];
    return g;
}

/// g(j) of the symmetric model.
template <typename T>
T g(const T& rho, std::size_t j)
{
    return kernel_values(symmetric_kernel(rho), j)[j];
}

/// -(xi+^j - xi-^j)/(xi+ - xi-) evaluated directly from the roots.
inline double g_closed(double rho, std::size_t j)
{
    require(rho > 0, errc::invalid_argument, "rho must be positive");
    const double root = std::sqrt(1.0 + rho * rho);
    const double xp = 1.0 + rho + root;
    const double xm = 1.0 + rho - root;
    return -(std::pow(xp, static_cast<double>(j)) - std::pow(xm, static_cast<double>(j))) / (xp - xm);
}

/// (f*h)(n) = sum_{m<=n} f(m) h(n-m) for n < min(|f|, |h|).
template <typename T>
std::vector<T> conv(const std::vector<T>& f, const std::vector<T>& h)
{
    const std::size_t n = std::min(f.size(), h.size());
    std::vector<T> out(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
        if (f[i] == T(0))
            continue;
        for (std::size_t m = 0; i + m < n; ++m)
            out[i + m] += f[i] * h[m];
    }
    return out;
}

/// Shift operator: (tau f)(n) = f(n+1).
template <typename T>
std::vector<T> shift(const std::vector<T>& f)
{
    if (f.empty())
        return {};
    return std::vector<T>(f.begin() + 1, f.end());
}

enum class GPowMethod { iterated, binomial, sigma_shift };

namespace detail {

template <typename T>
T binomial(std::size_t n, std::size_t k)
{
    if (k > n)
        return T(0);
    k = std::min(k, n - k);
    T out(1);
    for (std::size_t i = 1; i <= k; ++i)
        out = out * T(n - k + i) / T(i);
    return out;
}

template <typename T>
std::vector<T> g_pow_iterated(const Kernel<T>& ker, std::size_t k, std::size_t jmax)
{
    const std::vector<T> base = kernel_values(ker, jmax);
    std::vector<T> out = base;
    for (std::size_t i = 1; i < k; ++i)
        out = conv(out, base);
    return out;
}

// Symmetric coefficients c_i = C(i+k-1,k-1) C(m-i+k-1,k-1) over
// xi+^i xi-^(m-i) collapse onto power sums xi+^n + xi-^n and (xi+ xi-)^i = p^i,
// all polynomial in (s, p): no square root is ever formed.
template <typename T>
std::vector<T> g_pow_sigma(const Kernel<T>& ker, std::size_t k, std::size_t jmax)
{
    std::vector<T> power_sum(jmax + 1, T(0));
    power_sum[0] = T(2);
    if (jmax >= 1)
        power_sum[1] = ker.s;
    for (std::size_t n = 2; n <= jmax; ++n)
        power_sum[n] = ker.s * power_sum[n - 1] - ker.p * power_sum[n - 2];
    std::vector<T> p_pow(jmax + 1, T(1));
    for (std::size_t n = 1; n <= jmax; ++n)
        p_pow[n] = p_pow[n - 1] * ker.p;
    const T scale = int_pow(ker.lead, k);
    std::vector<T> out(jmax + 1, T(0));
    for (std::size_t j = k; j <= jmax; ++j) {
        const std::size_t m = j - k;
        T acc(0);
        for (std::size_t i = 0; 2 * i <= m; ++i) {
            const T c = binomial<T>(i + k - 1, k - 1) * binomial<T>(m - i + k - 1, k - 1);
            if (2 * i == m)
                acc += c * p_pow[i];
            else
                acc += c * p_pow[i] * power_sum[m - 2 * i];
        }
        out[j] = scale * acc;
    }
    return out;
}

// h^{*n}(j) = C(j+n-1, n-1) xi^j; n = 0 gives delta_0.
template <typename F, typename T>
std::vector<F> geometric_power(const F& xi, std::size_t n, std::size_t jmax)
{
    std::vector<F> out(jmax + 1, F(T(0)));
    if (n == 0) {
        out[0] = F(T(1));
        return out;
    }
    F power(T(1));
    for (std::size_t j = 0; j <= jmax; ++j) {
        out[j] = F(binomial<T>(j + n - 1, n - 1)) * power;
        power = power * xi;
    }
    return out;
}

// g^{*k} = (lead/(xi+ - xi-))^k sum_l (-1)^l C(k,l) h+^{*(k-l)} * h-^{*l}, over
// a field F holding xi+- (double, or the exact quadratic extension).
template <typename F, typename T>
std::vector<F> binomial_sum(const F& xp, const F& xm, const F& factor, std::size_t k, std::size_t jmax)
{
    std::vector<F> acc(jmax + 1, F(T(0)));
    for (std::size_t l = 0; l <= k; ++l) {
        const auto term = conv(geometric_power<F, T>(xp, k - l, jmax), geometric_power<F, T>(xm, l, jmax));
        F coeff(binomial<T>(k, l));
        if (l % 2 == 1)
            coeff = F(T(0)) - coeff;
        for (std::size_t j = 0; j <= jmax; ++j)
            acc[j] = acc[j] + coeff * term[j];
    }
    F scale(T(1));
    for (std::size_t i = 0; i < k; ++i)
        scale = scale * factor;
    for (auto& v : acc)
        v = v * scale;
    return acc;
}

template <typename T>
std::vector<T> g_pow_binomial(const Kernel<T>& ker, std::size_t k, std::size_t jmax)
{
    const T disc = ker.discriminant();
    require(disc > T(0), errc::degenerate_discriminant, "kernel roots coincide");
    if constexpr (is_rational_v<T>) {
        using surd = quadratic_surd<T>;
        const T half_s = ker.s / T(2);
        const T d = disc / T(4);
        const surd xp(half_s, T(1), d);
        const surd xm(half_s, T(-1), d);
        const surd factor = surd(ker.lead, T(0), d) / (xp - xm);
        auto values = binomial_sum<surd, T>(xp, xm, factor, k, jmax);
        std::vector<T> out(jmax + 1);
        for (std::size_t j = 0; j <= jmax; ++j) {
            require(values[j].b == T(0), errc::domain_violation, "irrational part did not cancel");
            out[j] = values[j].a;
        }
        return out;
    } else {
        const T root = std::sqrt(disc);
        const T xp = (ker.s + root) / T(2);
        const T xm = (ker.s - root) / T(2);
        return binomial_sum<T, T>(xp, xm, ker.lead / (xp - xm), k, jmax);
    }
}

} // namespace detail

/// g^{*k}(0..jmax) for a general kernel.
template <typename T>
std::vector<T> g_pow(const Kernel<T>& ker, std::size_t k, std::size_t jmax, GPowMethod method = GPowMethod::iterated)
{
    require(k >= 1, errc::invalid_argument, "convolution power must be >= 1");
    switch (method) {
    case GPowMethod::iterated:
        return detail::g_pow_iterated(ker, k, jmax);
    case GPowMethod::binomial:
        return detail::g_pow_binomial(ker, k, jmax);
    case GPowMethod::sigma_shift:
        return detail::g_pow_sigma(ker, k, jmax);
    }
    fail(errc::invalid_argument, "unknown method");
}

template <typename T>
std::vector<T> g_pow(const T& rho, std::size_t k, std::size_t jmax, GPowMethod method = GPowMethod::iterated)
{
    return g_pow(symmetric_kernel(rho), k, jmax, method);
}

/// Table of g^{*k}(j), 1 <= k <= kmax, 0 <= j <= jmax. Row 0 is delta_0.
template <typename T = double>
class ConvTable {
public:
    ConvTable() = default;

    ConvTable(const Kernel<T>& ker, std::size_t kmax, std::size_t jmax)
        : kernel_(ker), kmax_(kmax), jmax_(jmax), rows_(kmax + 1)
    {
        rows_[0].assign(jmax + 1, T(0));
        rows_[0][0] = T(1);
        if (kmax == 0)
            return;
        rows_[1] = kernel_values(ker, jmax);
        for (std::size_t k = 2; k <= kmax; ++k) {
            std::vector<T> row(jmax + 1, T(0));
            const auto& prev = rows_[k - 1];
            const auto& base = rows_[1];
            for (std::size_t i = k - 1; i <= jmax; ++i) {
                if (prev[i] == T(0))
                    continue;
                for (std::size_t m = 1; i + m <= jmax; ++m)
                    row[i + m] += prev[i] * base[m];
            }
            rows_[k] = std::move(row);
        }
    }

    static ConvTable symmetric(const T& rho, std::size_t kmax, std::size_t jmax)
    {
        return ConvTable(symmetric_kernel(rho), kmax, jmax);
    }

    std::size_t kmax() const { return kmax_; }
    std::size_t jmax() const { return jmax_; }
    const Kernel<T>& kernel() const { return kernel_; }

    /// g^{*k}(j); zero outside the tabulated range in j only if j < k.
    const T& operator()(std::size_t k, std::size_t j) const
    {
        require(k <= kmax_ && j <= jmax_, errc::invalid_argument, "convolution table index out of range");
        return rows_[k][j];
    }

    const std::vector<T>& row(std::size_t k) const { return rows_.at(k); }

private:
    Kernel<T> kernel_{};
    std::size_t kmax_ = 0;
    std::size_t jmax_ = 0;
    std::vector<std::vector<T>> rows_;
};

/// Roots (y, z) of Y^2 - s x Y + (p x - lead) x, the characteristic quadratic
/// tied to a kernel. For the symmetric kernel this is
/// Y^2 - 2(1+rho) x Y + (1 + 2 rho x) x.
inline std::pair<std::complex<double>, std::complex<double>> kernel_roots(const Kernel<double>& ker,
                                                                          std::complex<double> x)
{
    const std::complex<double> b = -ker.s * x;
    const std::complex<double> c = (ker.p * x - ker.lead) * x;
    const std::complex<double> disc = b * b - 4.0 * c;
    const std::complex<double> root = std::sqrt(disc);
    // Pick the sign that avoids cancellation, then use Vieta for the other root.
    const std::complex<double> q = -0.5 * (b + (std::real(std::conj(b) * root) >= 0 ? root : -root));
    if (q == std::complex<double>(0.0))
        return {0.0, 0.0};
    return {q, c / q};
}

/// lead * x * (y^n - z^n)/(y - z): closed form of sum_{k<=n} x^k g^{*(n-k+1)}(k).
inline std::complex<double> s_n_closed(const Kernel<double>& ker, std::complex<double> x, std::size_t n)
{
    const auto [y, z] = kernel_roots(ker, x);
    const double scale = std::max({1.0, std::abs(y), std::abs(z)});
    if (std::abs(y - z) <= 1e-13 * scale)
        fail(errc::degenerate_discriminant, "roots coincide; perturb x");
    const double nn = static_cast<double>(n);
    const std::complex<double> acc = (std::pow(y, nn) - std::pow(z, nn)) / (y - z);
    return ker.lead * x * acc;
}

/// The defining sum sum_{k=0}^{n} x^k g^{*(n-k+1)}(k).
inline std::complex<double> s_n_sum(const Kernel<double>& ker, std::complex<double> x, std::size_t n)
{
    const ConvTable<double> table(ker, n + 1, n);
    std::complex<double> acc = 0.0;
    std::complex<double> xp = 1.0;
    for (std::size_t k = 0; k <= n; ++k) {
        acc += xp * table(n - k + 1, k);
        xp *= x;
    }
    return acc;
}

} // namespace jsq
