#pragma once

// Test-side reference solver, written from the transition rules alone:
// dense generator, one balance equation replaced by sum(pi) = 1, Gaussian
// elimination with partial pivoting (first nonzero pivot for rationals).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ref {

template <typename T>
using Matrix = std::vector<std::vector<T>>;

inline std::size_t idx(std::size_t j, std::size_t k, std::size_t K) { return j + (K + 1) * k; }

// Rates of the symmetric model: arrivals 2r to the shorter queue, r/r on a
// tie, unit services. Drops arrivals into (K,K) when `variant` is set.
template <typename T>
Matrix<T> symmetric_generator(const T& r, std::size_t K, bool variant = false)
{
    const std::size_t n = (K + 1) * (K + 1);
    Matrix<T> q(n, std::vector<T>(n, T(0)));
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j <= K; ++j) {
            const std::size_t s = idx(j, k, K);
            auto add = [&](std::size_t jj, std::size_t kk, const T& rate) {
                if (variant && jj == K && kk == K)
                    return;
                q[s][idx(jj, kk, K)] += rate;
                q[s][s] -= rate;
            };
            if (j < k)
                add(j + 1, k, T(2) * r);
            else if (k < j)
                add(j, k + 1, T(2) * r);
            else if (j < K) {
                add(j + 1, k, r);
                add(j, k + 1, r);
            }
            if (j > 0)
                add(j - 1, k, T(1));
            if (k > 0)
                add(j, k - 1, T(1));
        }
    return q;
}

template <typename T>
Matrix<T> asymmetric_generator(const T& lambda, const T& mu1, const T& mu2, const T& p1, std::size_t K)
{
    const std::size_t n = (K + 1) * (K + 1);
    Matrix<T> q(n, std::vector<T>(n, T(0)));
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j <= K; ++j) {
            const std::size_t s = idx(j, k, K);
            auto add = [&](std::size_t jj, std::size_t kk, const T& rate) {
                if (rate == T(0))
                    return;
                q[s][idx(jj, kk, K)] += rate;
                q[s][s] -= rate;
            };
            if (j < k)
                add(j + 1, k, T(2) * lambda);
            else if (k < j)
                add(j, k + 1, T(2) * lambda);
            else if (j < K) {
                add(j + 1, k, T(2) * lambda * p1);
                add(j, k + 1, T(2) * lambda * (T(1) - p1));
            }
            if (j > 0)
                add(j - 1, k, mu1);
            if (k > 0)
                add(j, k - 1, mu2);
        }
    return q;
}

template <typename T>
T magnitude(const T& x)
{
    return x < T(0) ? T(-x) : x;
}

// pi Q = 0 with the last balance equation swapped for the normalisation.
template <typename T>
std::vector<T> solve(const Matrix<T>& q)
{
    const std::size_t n = q.size();
    Matrix<T> a(n, std::vector<T>(n + 1, T(0)));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            a[r][c] = q[c][r];
    for (std::size_t c = 0; c < n; ++c)
        a[n - 1][c] = T(1);
    a[n - 1][n] = T(1);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (magnitude(a[r][col]) > magnitude(a[piv][col]))
                piv = r;
        if (a[piv][col] == T(0))
            throw std::runtime_error("singular reference system");
        std::swap(a[piv], a[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            if (a[r][col] == T(0))
                continue;
            const T f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= n; ++c)
                a[r][c] -= f * a[col][c];
        }
    }
    std::vector<T> x(n, T(0));
    for (std::size_t r = n; r-- > 0;) {
        T acc = a[r][n];
        for (std::size_t c = r + 1; c < n; ++c)
            acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

/// Full row-major stationary vector of the symmetric model.
template <typename T>
std::vector<T> symmetric(const T& r, std::size_t K)
{
    return solve(symmetric_generator(r, K));
}

template <typename T>
std::vector<T> variant(const T& r, std::size_t K)
{
    return solve(symmetric_generator(r, K, true));
}

template <typename T>
std::vector<T> asymmetric(const T& lambda, const T& mu1, const T& mu2, const T& p1, std::size_t K)
{
    return solve(asymmetric_generator(lambda, mu1, mu2, p1, K));
}

/// max_i |sum_s pi_s Q(s,i)|.
inline double balance_residual(const Matrix<double>& q, const std::vector<double>& pi)
{
    double worst = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < q.size(); ++r)
            acc += pi[r] * q[r][c];
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

} // namespace ref
