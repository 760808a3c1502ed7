#pragma once

// Parameter types, the state lattice {0..K}^2, stationary-distribution
// storage and the CTMC generators of the symmetric and asymmetric models.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jsq/error.hpp"
#include "jsq/scalar.hpp"

namespace jsq {

/// Per-queue capacity K, or unbounded.
class Capacity {
public:
    constexpr Capacity() = default;
    constexpr Capacity(std::size_t k) : value_(k) {} // NOLINT: implicit by design of call sites

    static constexpr Capacity infinite() { return Capacity(std::nullopt); }

    constexpr bool is_infinite() const { return !value_.has_value(); }
    constexpr bool is_finite() const { return value_.has_value(); }

    std::size_t value() const
    {
        require(value_.has_value(), errc::infinite_capacity, "operation needs a finite capacity");
        return *value_;
    }

    friend constexpr bool operator==(const Capacity&, const Capacity&) = default;

private:
    constexpr explicit Capacity(std::nullopt_t) : value_(std::nullopt) {}
    std::optional<std::size_t> value_{0};
};

/// Two unit-rate servers, global Poisson arrivals at rate 2*rho.
template <typename T = double>
struct BasicSymmetricParams {
    T rho{1};
    Capacity capacity{};
};
using SymmetricParams = BasicSymmetricParams<double>;

/// Global arrival rate 2*lambda, service rates mu1/mu2, ties sent to queue 1
/// with probability p1.
template <typename T = double>
struct BasicAsymmetricParams {
    T lambda{1};
    T mu1{1};
    T mu2{1};
    T p1{T(1) / T(2)};
    Capacity capacity{};

    T p2() const { return T(1) - p1; }
};
using AsymmetricParams = BasicAsymmetricParams<double>;

template <typename T>
void check_params(const BasicSymmetricParams<T>& p)
{
    require(p.rho > T(0), errc::invalid_argument, "rho must be positive");
}

template <typename T>
void check_params(const BasicAsymmetricParams<T>& p)
{
    require(p.lambda > T(0) && p.mu1 > T(0) && p.mu2 > T(0), errc::invalid_argument,
            "rates must be positive");
    require(p.p1 >= T(0) && p.p1 <= T(1), errc::invalid_argument, "p1 must lie in [0,1]");
}

template <typename T>
void check_ergodic(const BasicSymmetricParams<T>& p)
{
    check_params(p);
    require(p.rho < T(1), errc::invalid_argument, "infinite capacity needs rho < 1");
}

template <typename T>
void check_ergodic(const BasicAsymmetricParams<T>& p)
{
    check_params(p);
    require(T(2) * p.lambda < p.mu1 + p.mu2, errc::invalid_argument,
            "infinite capacity needs 2*lambda < mu1 + mu2");
}

/// Row-major index of state (j,k) = (L1,L2) on {0..K}^2.
constexpr std::size_t state_index(std::size_t j, std::size_t k, std::size_t K) { return j + (K + 1) * k; }

/// Stationary masses pi(j,k) on a (K+1)x(K+1) window. Symmetric instances keep
/// only j <= k and mirror reads.
template <typename T = double>
class BasicJointDist {
public:
    BasicJointDist() = default;

    BasicJointDist(std::size_t K, bool symmetric)
        : K_(K), symmetric_(symmetric), data_(symmetric ? (K + 1) * (K + 2) / 2 : (K + 1) * (K + 1), T(0))
    {
    }

    /// Wraps a full row-major vector (as produced by the oracle).
    static BasicJointDist from_full(std::size_t K, const std::vector<T>& full, bool symmetric)
    {
        require(full.size() == (K + 1) * (K + 1), errc::invalid_argument, "full vector has wrong size");
        BasicJointDist d(K, symmetric);
        for (std::size_t k = 0; k <= K; ++k)
            for (std::size_t j = 0; j <= (symmetric ? k : K); ++j)
                d.set(j, k, full[state_index(j, k, K)]);
        return d;
    }

    std::size_t capacity() const { return K_; }
    bool symmetric() const { return symmetric_; }

    const T& operator()(std::size_t j, std::size_t k) const { return data_[slot(j, k)]; }

    void set(std::size_t j, std::size_t k, T value) { data_[slot(j, k)] = std::move(value); }

    T total_mass() const
    {
        T sum(0);
        for (std::size_t k = 0; k <= K_; ++k)
            for (std::size_t j = 0; j <= K_; ++j)
                sum += (*this)(j, k);
        return sum;
    }

    std::vector<T> to_full() const
    {
        std::vector<T> full((K_ + 1) * (K_ + 1));
        for (std::size_t k = 0; k <= K_; ++k)
            for (std::size_t j = 0; j <= K_; ++j)
                full[state_index(j, k, K_)] = (*this)(j, k);
        return full;
    }

private:
    std::size_t slot(std::size_t j, std::size_t k) const
    {
        require(j <= K_ && k <= K_, errc::invalid_argument, "state outside the lattice");
        if (symmetric_) {
            if (j > k)
                std::swap(j, k);
            return k * (k + 1) / 2 + j;
        }
        return state_index(j, k, K_);
    }

    std::size_t K_ = 0;
    bool symmetric_ = false;
    std::vector<T> data_{T(1)};
};
using JointDist = BasicJointDist<double>;

/// Masses above -tolerance are accepted as rounding noise.
inline constexpr double negative_mass_tolerance = 1e-9;

template <typename T>
bool validate_dist(const BasicJointDist<T>& d, double tol)
{
    const std::size_t K = d.capacity();
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j <= K; ++j) {
            if (to_double(d(j, k)) < -tol)
                return false;
            if (d.symmetric() && d(j, k) != d(k, j))
                return false;
        }
    return std::abs(to_double(d.total_mass()) - 1.0) <= tol;
}

/// Sparse CTMC generator on {0..K}^2 with nearest-neighbour jumps.
template <typename T = double>
class BasicRateMatrix {
public:
    struct Jump {
        std::size_t to;
        T rate;
    };

    explicit BasicRateMatrix(std::size_t K) : K_(K), rows_((K + 1) * (K + 1)) {}

    std::size_t capacity() const { return K_; }
    std::size_t dimension() const { return rows_.size(); }

    void add(std::size_t from, std::size_t to, T rate)
    {
        require(rate >= T(0), errc::invalid_argument, "negative rate");
        if (rate == T(0))
            return;
        rows_[from].push_back(Jump{to, std::move(rate)});
    }

    const std::vector<Jump>& jumps(std::size_t from) const { return rows_[from]; }

    T exit_rate(std::size_t from) const
    {
        T sum(0);
        for (const auto& jump : rows_[from])
            sum += jump.rate;
        return sum;
    }

    /// Q(v, v'); the diagonal is the negative row sum.
    T operator()(std::size_t from, std::size_t to) const
    {
        if (from == to)
            return -exit_rate(from);
        T sum(0);
        for (const auto& jump : rows_[from])
            if (jump.to == to)
                sum += jump.rate;
        return sum;
    }

    std::vector<std::vector<T>> dense() const
    {
        std::vector<std::vector<T>> q(dimension(), std::vector<T>(dimension(), T(0)));
        for (std::size_t v = 0; v < dimension(); ++v) {
            for (const auto& jump : rows_[v])
                q[v][jump.to] += jump.rate;
            q[v][v] -= exit_rate(v);
        }
        return q;
    }

    /// Largest |i - j| over nonzero entries; row-major indexing gives K+1.
    std::size_t bandwidth() const
    {
        std::size_t band = 0;
        for (std::size_t v = 0; v < dimension(); ++v)
            for (const auto& jump : rows_[v])
                band = std::max(band, jump.to > v ? jump.to - v : v - jump.to);
        return band;
    }

private:
    std::size_t K_;
    std::vector<std::vector<Jump>> rows_;
};
using RateMatrix = BasicRateMatrix<double>;

/// Symmetric JSQ generator (unit service rates, arrival rate 2*rho).
template <typename T>
BasicRateMatrix<T> build_generator(const BasicSymmetricParams<T>& p)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    BasicRateMatrix<T> q(K);
    const T two_rho = T(2) * p.rho;
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j <= K; ++j) {
            const std::size_t v = state_index(j, k, K);
            if (j < k)
                q.add(v, state_index(j + 1, k, K), two_rho);
            else if (k < j)
                q.add(v, state_index(j, k + 1, K), two_rho);
            else if (k < K) {
                q.add(v, state_index(j + 1, k, K), p.rho);
                q.add(v, state_index(j, k + 1, K), p.rho);
            }
            if (j > 0)
                q.add(v, state_index(j - 1, k, K), T(1));
            if (k > 0)
                q.add(v, state_index(j, k - 1, K), T(1));
        }
    return q;
}

/// Symmetric model holding at most 2K-1 customers: the jumps into (K,K) are
/// removed. (K,K) keeps its departures so it is transient and gets mass 0.
template <typename T>
BasicRateMatrix<T> build_variant_generator(const BasicSymmetricParams<T>& p)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    require(K >= 1, errc::invalid_argument, "the 2K-1 variant needs K >= 1");
    BasicRateMatrix<T> full = build_generator(p);
    BasicRateMatrix<T> q(K);
    const std::size_t corner = state_index(K, K, K);
    for (std::size_t v = 0; v < full.dimension(); ++v)
        for (const auto& jump : full.jumps(v))
            if (jump.to != corner)
                q.add(v, jump.to, jump.rate);
    return q;
}

/// Asymmetric generator; tie states (k,k), k<K, send 2*lambda*p1 east and
/// 2*lambda*p2 north.
template <typename T>
BasicRateMatrix<T> build_generator(const BasicAsymmetricParams<T>& p)
{
    check_params(p);
    const std::size_t K = p.capacity.value();
    BasicRateMatrix<T> q(K);
    const T two_lambda = T(2) * p.lambda;
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j <= K; ++j) {
            const std::size_t v = state_index(j, k, K);
            if (j < k)
                q.add(v, state_index(j + 1, k, K), two_lambda);
            else if (k < j)
                q.add(v, state_index(j, k + 1, K), two_lambda);
            else if (k < K) {
                q.add(v, state_index(j + 1, k, K), two_lambda * p.p1);
                q.add(v, state_index(j, k + 1, K), two_lambda * p.p2());
            }
            if (j > 0)
                q.add(v, state_index(j - 1, k, K), p.mu1);
            if (k > 0)
                q.add(v, state_index(j, k - 1, K), p.mu2);
        }
    return q;
}

template <typename T>
BasicSymmetricParams<T> with_capacity(BasicSymmetricParams<T> p, Capacity c)
{
    p.capacity = c;
    return p;
}

template <typename T>
BasicAsymmetricParams<T> with_capacity(BasicAsymmetricParams<T> p, Capacity c)
{
    p.capacity = c;
    return p;
}

} // namespace jsq
