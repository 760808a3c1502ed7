#pragma once

// Event-driven simulation of four systems driven by the same four Poisson
// streams: JSQ (L1, L2), M/M/1/K with rates (2rho, 2), M/M/2/2K and
// M/M/1/2K with rates (2rho, 2). Under this coupling
//     N_mm1_2k <= N_mm2 <= L1 + L2 <= K + N_mm1k
// holds along every path; the simulator counts violations.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

#include "jsq/error.hpp"
#include "jsq/model.hpp"

namespace jsq::sim {

enum Stream : std::size_t { arrival1 = 0, arrival2 = 1, departure1 = 2, departure2 = 3 };

inline constexpr std::size_t stream_count = 4;
inline constexpr std::size_t batch_count = 20;

/// splitmix64 finaliser.
constexpr std::uint64_t mix(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform in (0,1) determined by (seed, stream, counter) alone.
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
{
    const std::uint64_t h = mix(mix(mix(seed) ^ (stream + 1) * 0xd1b54a32d192ed03ULL) ^ counter);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

struct CoupledState {
    std::size_t L1 = 0;
    std::size_t L2 = 0;
    std::size_t mm1k = 0;   // M/M/1/K, arrival rate 2rho, service rate 2
    std::size_t mm2 = 0;    // M/M/2/2K, arrival rate 2rho, two unit servers
    std::size_t mm1_2k = 0; // M/M/1/2K, arrival rate 2rho, service rate 2
    double clock = 0.0;
    std::array<std::uint64_t, stream_count> counters{};

    bool ordered(std::size_t K) const
    {
        const std::size_t n = L1 + L2;
        return mm1_2k <= mm2 && mm2 <= n && n <= K + mm1k;
    }
};

/// The four systems and their shared streams. One instance is one
/// deterministic single-threaded replica.
class CoupledSystem {
public:
    struct Outcome {
        Stream stream;
        double dt;
        bool jsq_blocked;
        std::array<bool, 3> other_blocked; // mm1k, mm2, mm1_2k
    };

    CoupledSystem(const SymmetricParams& p, std::uint64_t seed) : K_(p.capacity.value()), seed_(seed)
    {
        require(p.rho > 0.0, errc::invalid_argument, "rho must be positive");
        rates_ = {p.rho, p.rho, 1.0, 1.0};
        for (std::size_t s = 0; s < stream_count; ++s)
            next_[s] = draw(s);
    }

    const CoupledState& state() const { return state_; }
    std::size_t capacity() const { return K_; }

    Outcome step()
    {
        std::size_t s = 0;
        for (std::size_t i = 1; i < stream_count; ++i)
            if (next_[i] < next_[s])
                s = i;
        const double dt = next_[s] - state_.clock;
        state_.clock = next_[s];
        next_[s] = state_.clock + draw(s);
        Outcome out{static_cast<Stream>(s), dt, false, {false, false, false}};
        if (s == arrival1 || s == arrival2)
            arrive(s == arrival1, out);
        else
            depart(s == departure1);
        return out;
    }

private:
    double draw(std::size_t s)
    {
        const double u = uniform(seed_, s, state_.counters[s]++);
        return -std::log(u) / rates_[s];
    }

    // Arrival on stream 1 or 2: to the shorter queue; on a tie below K,
    // stream 1 feeds queue 1 and stream 2 feeds queue 2.
    void arrive(bool first_stream, Outcome& out)
    {
        auto& st = state_;
        if (st.L1 < st.L2)
            ++st.L1;
        else if (st.L2 < st.L1)
            ++st.L2;
        else if (st.L1 < K_)
            ++(first_stream ? st.L1 : st.L2);
        else
            out.jsq_blocked = true;
        out.other_blocked[0] = st.mm1k >= K_;
        out.other_blocked[1] = st.mm2 >= 2 * K_;
        out.other_blocked[2] = st.mm1_2k >= 2 * K_;
        if (!out.other_blocked[0])
            ++st.mm1k;
        if (!out.other_blocked[1])
            ++st.mm2;
        if (!out.other_blocked[2])
            ++st.mm1_2k;
    }

    // Server dedication is what makes the ordering hold: departure stream 1
    // serves the longer queue (queue 1 on a tie), stream 2 the shorter queue
    // (queue 2 on a tie). In M/M/2/2K stream 2 only works with >= 2 present.
    void depart(bool first_stream)
    {
        auto& st = state_;
        if (first_stream) {
            if (st.L1 >= st.L2 && st.L1 >= 1)
                --st.L1;
            else if (st.L1 < st.L2)
                --st.L2;
            if (st.mm2 >= 1)
                --st.mm2;
        } else {
            if (st.L1 >= 1 && st.L1 < st.L2)
                --st.L1;
            else if (st.L2 >= 1 && st.L2 <= st.L1)
                --st.L2;
            if (st.mm2 >= 2)
                --st.mm2;
        }
        if (st.mm1k >= 1)
            --st.mm1k;
        if (st.mm1_2k >= 1)
            --st.mm1_2k;
    }

    std::size_t K_;
    std::uint64_t seed_;
    std::array<double, stream_count> rates_{};
    std::array<double, stream_count> next_{};
    CoupledState state_;
};

struct CoupledReport {
    std::uint64_t events = 0;
    std::uint64_t ordering_violations = 0;
    double total_time = 0.0;
    double measured_time = 0.0; // after warm-up
    std::array<std::uint64_t, stream_count> stream_events{};
    std::uint64_t arrivals = 0; // after warm-up
    std::array<std::uint64_t, 4> blocked{}; // jsq, mm1k, mm2, mm1_2k; after warm-up
    std::array<double, 4> occupancy_area{}; // time integrals of L1+L2, mm1k, mm2, mm1_2k
    std::array<std::uint64_t, batch_count> batch_arrivals{};
    std::array<std::uint64_t, batch_count> batch_blocked{};

    double mean_occupancy(std::size_t system) const { return occupancy_area.at(system) / measured_time; }
    double blocking(std::size_t system = 0) const
    {
        return arrivals == 0 ? 0.0 : static_cast<double>(blocked.at(system)) / static_cast<double>(arrivals);
    }
    double stream_rate(std::size_t s) const { return static_cast<double>(stream_events.at(s)) / total_time; }
};

/// Runs n_events events; the first 10% are excluded from the stationary
/// estimates but not from the ordering check.
inline CoupledReport simulate_coupled(const SymmetricParams& p, std::uint64_t n_events, std::uint64_t seed)
{
    require(p.capacity.is_finite(), errc::infinite_capacity, "simulation needs a finite capacity");
    require(n_events >= 1, errc::invalid_argument, "need at least one event");
    CoupledSystem system(p, seed);
    const std::size_t K = system.capacity();
    const std::uint64_t warmup = n_events / 10;
    const std::uint64_t measured = n_events - warmup;
    CoupledReport r;
    for (std::uint64_t e = 0; e < n_events; ++e) {
        const CoupledState before = system.state();
        const auto out = system.step();
        ++r.events;
        ++r.stream_events[out.stream];
        if (!system.state().ordered(K))
            ++r.ordering_violations;
        if (e < warmup)
            continue;
        r.measured_time += out.dt;
        r.occupancy_area[0] += out.dt * static_cast<double>(before.L1 + before.L2);
        r.occupancy_area[1] += out.dt * static_cast<double>(before.mm1k);
        r.occupancy_area[2] += out.dt * static_cast<double>(before.mm2);
        r.occupancy_area[3] += out.dt * static_cast<double>(before.mm1_2k);
        if (out.stream == arrival1 || out.stream == arrival2) {
            const std::size_t batch = static_cast<std::size_t>((e - warmup) * batch_count / measured);
            ++r.arrivals;
            ++r.batch_arrivals[batch];
            if (out.jsq_blocked) {
                ++r.blocked[0];
                ++r.batch_blocked[batch];
            }
            for (std::size_t i = 0; i < 3; ++i)
                r.blocked[i + 1] += out.other_blocked[i] ? 1 : 0;
        }
    }
    r.total_time = system.state().clock;
    return r;
}

struct BlockingEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_halfwidth = 0.0; // 3 standard errors
    std::uint64_t arrivals = 0;
};

inline constexpr double ci_z = 3.0;

inline BlockingEstimate batch_means(const std::array<std::uint64_t, batch_count>& arrivals,
                                    const std::array<std::uint64_t, batch_count>& blocked)
{
    BlockingEstimate out;
    std::uint64_t total_arrivals = 0;
    std::uint64_t total_blocked = 0;
    std::array<double, batch_count> frac{};
    for (std::size_t b = 0; b < batch_count; ++b) {
        total_arrivals += arrivals[b];
        total_blocked += blocked[b];
        frac[b] = arrivals[b] == 0 ? 0.0 : static_cast<double>(blocked[b]) / static_cast<double>(arrivals[b]);
    }
    out.arrivals = total_arrivals;
    out.estimate = total_arrivals == 0 ? 0.0 : static_cast<double>(total_blocked) / static_cast<double>(total_arrivals);
    double mean = 0.0;
    for (double f : frac)
        mean += f;
    mean /= static_cast<double>(batch_count);
    double var = 0.0;
    for (double f : frac)
        var += (f - mean) * (f - mean);
    var /= static_cast<double>(batch_count - 1);
    out.std_error = std::sqrt(var / static_cast<double>(batch_count));
    out.ci_halfwidth = ci_z * out.std_error;
    return out;
}

/// Fraction of JSQ arrivals lost over n_arrivals measured arrivals (after
/// n_arrivals/10 warm-up arrivals), with a batch-means interval over 20
/// batches of equal arrival count.
inline BlockingEstimate estimate_blocking(const SymmetricParams& p, std::uint64_t n_arrivals, std::uint64_t seed)
{
    require(p.capacity.is_finite(), errc::infinite_capacity, "simulation needs a finite capacity");
    require(n_arrivals >= batch_count, errc::invalid_argument, "need at least one arrival per batch");
    CoupledSystem system(p, seed);
    const std::uint64_t warmup = n_arrivals / 10;
    std::array<std::uint64_t, batch_count> arrivals{};
    std::array<std::uint64_t, batch_count> blocked{};
    std::uint64_t seen = 0;
    while (seen < warmup + n_arrivals) {
        const auto out = system.step();
        if (out.stream != arrival1 && out.stream != arrival2)
            continue;
        if (seen >= warmup) {
            const std::size_t batch = static_cast<std::size_t>((seen - warmup) * batch_count / n_arrivals);
            ++arrivals[batch];
            blocked[batch] += out.jsq_blocked ? 1 : 0;
        }
        ++seen;
    }
    return batch_means(arrivals, blocked);
}

/// Sums replica reports; the result does not depend on completion order.
inline CoupledReport merge(const std::vector<CoupledReport>& reports)
{
    CoupledReport total;
    for (const auto& r : reports) {
        total.events += r.events;
        total.ordering_violations += r.ordering_violations;
        total.total_time += r.total_time;
        total.measured_time += r.measured_time;
        total.arrivals += r.arrivals;
        for (std::size_t i = 0; i < stream_count; ++i)
            total.stream_events[i] += r.stream_events[i];
        for (std::size_t i = 0; i < 4; ++i) {
            total.blocked[i] += r.blocked[i];
            total.occupancy_area[i] += r.occupancy_area[i];
        }
        for (std::size_t b = 0; b < batch_count; ++b) {
            total.batch_arrivals[b] += r.batch_arrivals[b];
            total.batch_blocked[b] += r.batch_blocked[b];
        }
    }
    return total;
}

/// Replica i uses seed + i; replicas run on separate threads.
inline std::vector<CoupledReport> simulate_replicas(const SymmetricParams& p, std::uint64_t n_events,
                                                    std::uint64_t seed, std::size_t replicas)
{
    require(replicas >= 1, errc::invalid_argument, "need at least one replica");
    require(p.capacity.is_finite(), errc::infinite_capacity, "simulation needs a finite capacity");
    std::vector<CoupledReport> reports(replicas);
    std::vector<std::thread> workers;
    workers.reserve(replicas);
    for (std::size_t i = 0; i < replicas; ++i)
        workers.emplace_back([&, i] { reports[i] = simulate_coupled(p, n_events, seed + i); });
    for (auto& w : workers)
        w.join();
    return reports;
}

} // namespace jsq::sim
