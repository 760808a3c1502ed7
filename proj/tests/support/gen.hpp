#pragma once

// Seeded generators for property tests. Every property runs over a fixed
// number of draws so failures replay exactly.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "jsq/model.hpp"

namespace gen {

inline constexpr std::size_t draws = 40;

class Source {
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

    /// rho on a log scale in [0.05, 4], avoiding the removable points 1 and 2.
    double rho()
    {
        for (;;) {
            const double r = std::exp(uniform(std::log(0.05), std::log(4.0)));
            if (std::abs(r - 1.0) > 1e-3 && std::abs(r - 2.0) > 1e-3)
                return r;
        }
    }

    double rho_stable() { return uniform(0.05, 0.95); }

    jsq::SymmetricParams symmetric(std::size_t kmax) { return {rho(), index(0, kmax)}; }

    jsq::AsymmetricParams asymmetric(std::size_t kmax)
    {
        return {uniform(0.1, 2.0), uniform(0.3, 3.0), uniform(0.3, 3.0), uniform(0.0, 1.0), index(1, kmax)};
    }

    std::vector<double> sequence(std::size_t n)
    {
        std::vector<double> out(n);
        for (auto& x : out)
            x = uniform(-1.0, 1.0);
        return out;
    }

private:
    std::mt19937_64 rng_;
};

} // namespace gen
