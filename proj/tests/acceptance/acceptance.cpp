// Acceptance run: one PASS/FAIL line per criterion with the measured worst
// error and wall time. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "jsq/jsq.hpp"
#include "support/dense_oracle.hpp"

using namespace jsq;
using cd = std::complex<double>;

namespace {

const std::vector<double> rho_grid{0.1, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0};

// Collects failures and the worst value of each tracked quantity.
class Tally {
public:
    void check(bool ok, const std::string& what)
    {
        if (!ok && failures_++ < 5)
            first_ += (first_.empty() ? "" : "; ") + what;
    }

    // Records `value` under `name` and fails when it exceeds `tol`.
    void bound(const std::string& name, double value, double tol, const std::string& where = "")
    {
        auto it = std::find_if(worst_.begin(), worst_.end(), [&](const auto& w) { return w.first == name; });
        if (it == worst_.end())
            worst_.push_back({name, value});
        else
            it->second = std::max(it->second, value);
        std::ostringstream os;
        os << name << "=" << value << " > " << tol << (where.empty() ? "" : " at " + where);
        check(std::isfinite(value) && value <= tol, os.str());
    }

    bool ok() const { return failures_ == 0; }

    std::string summary() const
    {
        std::ostringstream os;
        for (std::size_t i = 0; i < worst_.size(); ++i)
            os << (i ? ", " : "") << worst_[i].first << " " << worst_[i].second;
        if (failures_ > 0)
            os << (worst_.empty() ? "" : "; ") << failures_ << " failure(s): " << first_;
        return os.str();
    }

private:
    std::size_t failures_ = 0;
    std::string first_;
    std::vector<std::pair<std::string, double>> worst_;
};

std::string where(double rho, std::size_t K)
{
    std::ostringstream os;
    os << "rho=" << rho << " K=" << K;
    return os.str();
}

void blocking_vs_oracle(Tally& t)
{
    for (double rho : rho_grid)
        for (std::size_t K = 0; K <= 8; ++K) {
            const auto pi = ref::symmetric(rho, K);
            t.bound("max_err", std::abs(blocking_probability(SymmetricParams{rho, K}) - pi[ref::idx(K, K, K)]), 1e-10,
                    where(rho, K));
        }
}

void odd_variant(Tally& t)
{
    for (double rho : rho_grid)
        for (std::size_t K = 1; K <= 8; ++K) {
            const auto v = ref::variant(rho, K);
            const double want = v[ref::idx(K - 1, K, K)] + v[ref::idx(K, K - 1, K)];
            t.bound("max_err", std::abs(blocking_probability_odd(SymmetricParams{rho, K}) - want), 1e-10,
                    where(rho, K));
        }
    const auto exact = blocking_probability_odd(BasicSymmetricParams<rational>{rational(1), 1});
    t.check(exact == rational(2, 3), "rational K=1 rho=1 is not 2/3");
    const auto v = ref::variant(rational(1), 1);
    t.check(v[ref::idx(0, 1, 1)] + v[ref::idx(1, 0, 1)] == rational(2, 3), "reference variant K=1 is not 2/3");
}

void reconstruction(Tally& t)
{
    for (double rho : rho_grid)
        for (std::size_t K = 0; K <= 8; ++K) {
            const auto d = stationary_finite(SymmetricParams{rho, K});
            const auto pi = ref::symmetric(rho, K);
            double gap = 0.0;
            for (std::size_t k = 0; k <= K; ++k)
                for (std::size_t j = 0; j <= K; ++j)
                    gap = std::max(gap, std::abs(d(j, k) - pi[ref::idx(j, k, K)]));
            t.bound("max_err", gap, 1e-9, where(rho, K));
            t.bound("mass_err", std::abs(d.total_mass() - 1.0), 1e-9, where(rho, K));
        }
}

template <typename T>
void convolution_identities_for(Tally& t, const T& rho, bool exact)
{
    auto gap = [&](const T& a, const T& b) {
        if (exact)
            return a == b ? 0.0 : 1.0;
        return std::abs(to_double(a) - to_double(b)) / std::max(1.0, std::abs(to_double(b)));
    };
    const double tol = exact ? 0.0 : 1e-9;
    const std::string tag = exact ? "exact_" : "float_";
    const std::size_t kmax = 9;
    const std::size_t jmax = 26;
    const auto table = ConvTable<T>::symmetric(rho, kmax, jmax);
    const auto g = kernel_values(symmetric_kernel(rho), jmax);
    for (std::size_t j = 0; j + 2 <= jmax; ++j)
        t.bound(tag + "recurrence", gap(g[j + 2], T(2) * (T(1) + rho) * g[j + 1] - T(2) * rho * g[j]), tol);
    for (std::size_t l = 0; l + 1 <= kmax; ++l)
        for (std::size_t k = 0; k + 2 <= jmax; ++k) {
            const T lhs = table(l + 1, k + 2) - T(2) * (T(1) + rho) * table(l + 1, k + 1) + T(2) * rho * table(l + 1, k);
            const T rhs = l > 0 ? T(-table(l, k + 1)) : T(0);
            const double scale = std::max(1.0, std::abs(to_double(table(l + 1, k + 2))));
            t.bound(tag + "shifted_recurrence", exact ? gap(lhs, rhs) : std::abs(to_double(lhs - rhs)) / scale, tol);
        }
    for (std::size_t k = 0; k <= kmax; ++k) {
        for (std::size_t j = 0; j < k; ++j)
            t.check(table(k, j) == T(0), "support: nonzero below order");
        t.check(table(k, k) != T(0), "support: zero at order");
    }
    for (std::size_t k = 1; k <= 8; ++k) {
        const auto a = g_pow(rho, k, 24, GPowMethod::iterated);
        const auto b = g_pow(rho, k, 24, GPowMethod::binomial);
        const auto c = g_pow(rho, k, 24, GPowMethod::sigma_shift);
        double row = 0.0;
        for (const auto& x : a)
            row = std::max(row, std::abs(to_double(x)));
        for (std::size_t j = 0; j <= 24; ++j) {
            // Entries below the order are exact zeros; measure those against the row.
            const double scale = j < k ? row : std::abs(to_double(a[j]));
            t.bound(tag + "g_pow", exact ? std::max(gap(a[j], b[j]), gap(a[j], c[j]))
                                         : std::max(std::abs(to_double(b[j] - a[j])), std::abs(to_double(c[j] - a[j]))) /
                                               scale,
                    tol);
        }
    }
    // Translation identity on two rows of the table.
    const auto f = table.row(2);
    const auto h = table.row(3);
    const auto lhs = shift(conv(f, h));
    const auto left = conv(shift(f), h);
    const auto right = shift(h);
    for (std::size_t j = 0; j + 1 < f.size(); ++j)
        t.bound(tag + "translation", gap(lhs[j], left[j] + f[0] * right[j]), tol);
}

void convolution(Tally& t)
{
    for (const rational& rho : {rational(1, 2), rational(1), rational(3, 2), rational(2), rational(7, 3)})
        convolution_identities_for(t, rho, true);
    for (double rho : rho_grid)
        convolution_identities_for(t, rho, false);
}

void cohen(Tally& t)
{
    for (double rho : {0.3, 0.5, 0.7, 0.9}) {
        const double top = 1.0 + 2.0 * rho;
        const CohenProduct prod(rho, top);
        t.bound("A1_err", std::abs(prod.evaluate(1.0).value - (1.0 - rho)), 1e-12);
        t.bound("A_inv_rho_err", std::abs(prod.evaluate(1.0 / rho).value - (2.0 - rho) * (1.0 - rho)), 1e-8);
        const auto ker = symmetric_kernel(rho);
        for (int i = 1; i <= 20; ++i) {
            const double x = 0.4 * i / 21.0;
            const auto [y, z] = kernel_roots(ker, x);
            t.check(std::abs(y) < top && std::abs(z) < top, "sample outside the product's disk");
            const cd r = phi(rho, y, z) * prod.evaluate(y).value - phi(rho, z, y) * prod.evaluate(z).value;
            t.bound("functional_residual", std::abs(r), 1e-8);
        }
    }
    const auto coeffs = boundary_coeffs_infinite(0.5, 15);
    const auto truncated = oracle::truncated_infinite(0.5, 80);
    for (std::size_t k = 0; k <= 15; ++k)
        t.bound("coeff_err", std::abs(coeffs[k] - truncated.dist(0, k)), 1e-6);
}

void infinite(Tally& t)
{
    const double rho = 0.5;
    const auto d = stationary_infinite(rho, 12);
    const auto truncated = oracle::truncated_infinite(rho, 80);
    for (std::size_t k = 0; k <= 12; ++k)
        for (std::size_t j = 0; j <= 12; ++j)
            t.bound("window_err", std::abs(d(j, k) - truncated.dist(j, k)), 1e-7);
    const auto wide = stationary_infinite(rho, default_window(rho));
    const auto ts = t_seq(rho, wide, 10);
    t.bound("T0_err", std::abs(ts.T[0] - 1.0 / (1.0 + 2.0 * rho)), 1e-7);
    for (double r : t_recurrence_residuals(rho, wide, ts))
        t.bound("T_recurrence", std::abs(r), 1e-7);
    const auto kd = stationary_infinite(rho, 14);
    for (std::size_t offset : {0u, 1u, 3u}) {
        const auto rows = kingman_decay_ratio(rho, kd, offset, 8, 12);
        double lo = rows[0].ratio, hi = rows[0].ratio;
        for (const auto& r : rows) {
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
        }
        t.bound("kingman_spread", (hi - lo) / lo, 0.05);
    }
}

void convergence(Tally& t)
{
    for (double rho : {0.5, 0.9}) {
        const auto gaps = convergence_finite_to_infinite(rho, {5, 10, 20, 40}, 5);
        for (std::size_t i = 1; i < gaps.size(); ++i)
            t.check(gaps[i] < gaps[i - 1], "gap not decreasing at " + where(rho, 5u << i));
        if (rho == 0.5)
            t.bound("gap_K40_rho05", gaps.back(), 1e-6);
    }
}

void bounds(Tally& t)
{
    const GridSpec grid{0.01, 6.0, 600};
    for (std::size_t K : {1u, 2u, 5u, 10u, 30u}) {
        for (double rho : grid.points()) {
            const SymmetricParams p{rho, K};
            const double pi = blocking_probability(p);
            t.bound("order_violation", std::max({0.0, mm2_2k_blocking(rho, K) - pi, pi - mm1k_blocking(rho, K)}),
                    1e-15 * std::max(1.0, pi), where(rho, K));
            const double mean = mean_total(p);
            const auto b = mean_total_bounds(p);
            t.bound("sandwich_violation", std::max({0.0, b.lower - mean, mean - b.upper}) / mean, 1e-9, where(rho, K));
        }
        const auto report = uniform_gap_report(K, grid);
        const auto b1 = mm1k_gap_bracket(K);
        const auto b2 = mm2_gap_bracket(K);
        // The K=1 lower bracket for the second gap is 0; allow rounding there.
        t.check(report.mm1k_gap.value >= b1.lower - 1e-12 && report.mm1k_gap.value <= b1.upper,
                "M/M/1/K gap outside bracket at K=" + std::to_string(K));
        t.check(report.mm2_gap.value >= b2.lower - 1e-12 && report.mm2_gap.value <= b2.upper,
                "M/M/2/2K gap outside bracket at K=" + std::to_string(K));
    }
    for (std::size_t K : {5u, 30u}) {
        std::stringstream csv;
        io::write_ratio_csv(csv, uniform_gap_report(K, grid).rows);
        const auto rows = io::read_ratio_csv(csv);
        t.check(rows.size() == grid.n, "ratio CSV lost rows");
        // Shape: the nu' column rises towards 1 on [1, 2).
        double prev = 0.0;
        double last = 0.0;
        for (const auto& r : rows) {
            if (r.rho < 1.0 || r.rho >= 2.0)
                continue;
            t.check(r.nuprime_ratio >= prev - 1e-12, "nu' ratio not rising at " + where(r.rho, K));
            prev = r.nuprime_ratio;
            last = r.nuprime_ratio;
        }
        t.bound("nuprime_gap_below_2", 1.0 - last, 1e-2, "K=" + std::to_string(K));
    }
}

void asymmetric(Tally& t)
{
    const std::vector<AsymmetricParams> cases{
        {0.5, 1.0, 1.0, 0.5, 0}, {0.5, 1.0, 2.0, 0.3, 0}, {1.2, 0.7, 1.9, 0.8, 0},
        {2.0, 1.5, 0.4, 0.5, 0}, {0.3, 2.5, 0.6, 1.0, 0},
    };
    for (auto p : cases)
        for (std::size_t K = 0; K <= 6; ++K) {
            p.capacity = K;
            const auto pi = ref::asymmetric(p.lambda, p.mu1, p.mu2, p.p1, K);
            AsymBoundaries b;
            for (std::size_t k = 0; k <= K; ++k) {
                b.row.push_back(pi[ref::idx(k, 0, K)]);
                b.col.push_back(pi[ref::idx(0, k, K)]);
            }
            const auto d = asym_reconstruct(p, b);
            double gap = 0.0;
            for (std::size_t k = 0; k <= K; ++k)
                for (std::size_t j = 0; j <= K; ++j)
                    gap = std::max(gap, std::abs(d(j, k) - pi[ref::idx(j, k, K)]));
            t.bound("reconstruction_err", gap, 1e-9);
            t.bound("normalization", asym_normalization_check(p, d), 1e-10);
            if (K == 0)
                continue;
            const double r = asym_small_x_radius(p);
            for (int i = 0; i < 10; ++i) {
                const cd x = std::polar(r * (0.1 + 0.09 * i), 0.37 + 0.61 * i);
                const auto [e1, e2] = asym_functional_residual(p, d, x);
                t.bound("relation_residual", std::max(std::abs(e1), std::abs(e2)), 1e-9);
            }
        }
    for (const auto& p : cases)
        for (int i : {1, 2}) {
            const auto ker = asymmetric_kernel(p, i);
            for (cd x : {cd(0.05, 0.0), cd(0.02, 0.03), cd(-0.04, 0.01)})
                for (std::size_t n = 0; n <= 8; ++n)
                    t.bound("s_n_err", std::abs(s_n_closed(ker, x, n) - s_n_sum(ker, x, n)), 1e-12);
        }
}

void simulator(Tally& t)
{
    for (const SymmetricParams& p : {SymmetricParams{0.5, 3}, SymmetricParams{1.0, 2}, SymmetricParams{2.0, 4}})
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto r = sim::simulate_coupled(p, 1000000, seed);
            t.bound("ordering_violations", static_cast<double>(r.ordering_violations), 0.0, where(p.rho, p.capacity.value()));
        }
    const auto est = sim::estimate_blocking(SymmetricParams{1.0, 2}, 10000000, 42);
    const double exact = 4.0 / 17.0;
    t.bound("ci_miss", std::max(0.0, std::abs(est.estimate - exact) - est.ci_halfwidth), 0.0);
    t.bound("estimate", est.estimate, 1.0);
    t.bound("ci_halfwidth", est.ci_halfwidth, 0.01);
}

struct Criterion {
    int id;
    const char* title;
    double budget_s; // 0: none
    std::function<void(Tally&)> body;
};

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "blocking closed form vs dense oracle", 5.0, blocking_vs_oracle},
        {2, "odd-capacity variant vs dense oracle", 0.0, odd_variant},
        {3, "full reconstruction vs dense oracle", 10.0, reconstruction},
        {4, "convolution identities", 0.0, convolution},
        {5, "product form of the infinite boundary", 10.0, cohen},
        {6, "infinite-capacity reconstruction", 0.0, infinite},
        {7, "finite to infinite convergence", 0.0, convergence},
        {8, "bounds and comparison systems", 0.0, bounds},
        {9, "asymmetric servers", 0.0, asymmetric},
        {10, "coupled simulator", 60.0, simulator},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Tally t;
        const auto start = std::chrono::steady_clock::now();
        std::string crash;
        try {
            c.body(t);
        } catch (const std::exception& e) {
            crash = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!crash.empty())
            t.check(false, "threw: " + crash);
        if (c.budget_s > 0.0)
            t.check(secs < c.budget_s, "over time budget");
        const bool ok = t.ok();
        failed += ok ? 0 : 1;
        std::printf("%s %2d %s [%s] %.2fs%s\n", ok ? "PASS" : "FAIL", c.id, c.title, t.summary().c_str(), secs,
                    c.budget_s > 0.0 ? (" (budget " + std::to_string(static_cast<int>(c.budget_s)) + "s)").c_str() : "");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
