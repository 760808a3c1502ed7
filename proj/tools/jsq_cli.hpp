#pragma once

// The `jsq` command line. Exit codes: 0 success, 1 usage error (bad flag or
// out-of-domain input), 2 failed validation or a numerical breakdown.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jsq/jsq.hpp"

namespace jsq::cli {

enum exit_code : int { success = 0, usage = 1, validation = 2 };

class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Backend { float64, rational };

/// Largest capacity the rational backend is used for.
inline constexpr std::size_t rational_cap = 8;

inline Backend backend_from_env()
{
    const char* v = std::getenv("JSQ_BACKEND");
    if (v == nullptr || *v == '\0' || std::string(v) == "float64")
        return Backend::float64;
    if (std::string(v) == "rational")
        return Backend::rational;
    throw usage_error("JSQ_BACKEND must be float64 or rational, got '" + std::string(v) + "'");
}

inline const char* backend_name(bool exact) { return exact ? "rational" : "float64"; }

namespace detail {

inline std::string to_text(const rational& r)
{
    std::ostringstream os;
    os << r;
    return os.str();
}

inline Capacity parse_capacity(const std::string& text, bool allow_infinite)
{
    if (text == "inf") {
        if (!allow_infinite)
            throw usage_error("--cap: infinite capacity is not supported here");
        return Capacity::infinite();
    }
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != text.size() || text.front() == '-')
        throw usage_error("--cap: expected a non-negative integer" + std::string(allow_infinite ? " or inf" : "") +
                          ", got '" + text + "'");
    return Capacity(static_cast<std::size_t>(v));
}

inline rational parse_positive(const std::string& flag, const std::string& text)
{
    rational r;
    try {
        r = parse_rational(text);
    } catch (const error&) {
        throw usage_error(flag + ": cannot parse '" + text + "'");
    }
    if (r <= 0)
        throw usage_error(flag + ": must be positive, got '" + text + "'");
    return r;
}

/// Flat key/value result; printed as `key value` lines or one JSON object.
class Report {
public:
    Report() { j_["schema_version"] = io::schema_version; }

    template <typename V>
    void set(const std::string& key, const V& value)
    {
        j_[key] = value;
    }

    void print(std::ostream& out, bool json) const
    {
        if (json) {
            io::write_json(out, j_);
            return;
        }
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (it.key() == "schema_version")
                continue;
            out << it.key() << ' ' << text(it.value()) << '\n';
        }
    }

private:
    static std::string text(const nlohmann::ordered_json& v)
    {
        if (v.is_number_float())
            return io::format_number(v.get<double>());
        if (v.is_string())
            return v.get<std::string>();
        return v.dump();
    }

    nlohmann::ordered_json j_;
};

/// Sends output to a file when a path is given, else to `fallback`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path)
    {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
            return;
        }
        file_.open(path);
        if (!file_)
            throw usage_error("--out: cannot open '" + path + "' for writing");
        stream_ = &file_;
    }

    std::ostream& stream() { return *stream_; }
    bool to_file() const { return stream_ == &file_; }
    const std::string& path() const { return path_; }

    void close()
    {
        if (!to_file())
            return;
        file_.close();
        if (!file_)
            throw std::runtime_error("failed writing '" + path_ + "'");
    }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

inline int exit_for(errc code)
{
    switch (code) {
    case errc::invalid_argument:
    case errc::infinite_capacity:
    case errc::dimension_cap:
    case errc::domain_violation:
    case errc::window_too_small: return usage;
    default: return validation;
    }
}

template <typename T>
double max_gap(const BasicJointDist<T>& a, const BasicJointDist<T>& b)
{
    double gap = 0.0;
    for (std::size_t k = 0; k <= a.capacity(); ++k)
        for (std::size_t j = 0; j <= a.capacity(); ++j)
            gap = std::max(gap, std::abs(to_double(a(j, k)) - to_double(b(j, k))));
    return gap;
}

template <typename T>
std::size_t write_dist(Sink& sink, const BasicJointDist<T>& d, bool json)
{
    if (json)
        io::write_json(sink.stream(), io::dist_to_json(d));
    else
        io::write_dist_csv(sink.stream(), d);
    sink.close();
    return (d.capacity() + 1) * (d.capacity() + 1);
}

/// One line of `verify` or `asym --verify`.
struct Check {
    std::string name;
    double value = 0.0;
    double tol = 0.0;
    bool skipped = false;

    bool passed() const { return skipped || (std::isfinite(value) && value <= tol); }
};

inline int report_checks(const std::vector<Check>& checks, Report& report, std::ostream& out, bool json)
{
    std::size_t failed = 0;
    std::string failed_names;
    for (const auto& c : checks) {
        if (!c.passed()) {
            ++failed;
            failed_names += (failed_names.empty() ? "" : ",") + c.name;
        }
        if (!c.skipped)
            report.set(c.name, c.value);
    }
    report.set("checks", checks.size());
    report.set("failed", failed_names);
    report.set("passed", failed == 0);
    if (json) {
        report.print(out, true);
    } else {
        for (const auto& c : checks) {
            out << c.name << ' ';
            if (c.skipped)
                out << "skipped\n";
            else
                out << io::format_number(c.value) << " tol " << io::format_number(c.tol) << ' '
                    << (c.passed() ? "PASS" : "FAIL") << '\n';
        }
        out << (failed == 0 ? "PASS" : "FAIL") << ' ' << checks.size() - failed << '/' << checks.size() << '\n';
    }
    return failed == 0 ? success : validation;
}

} // namespace detail

struct Options {
    std::string rho;
    std::string cap;
    std::string out;
    bool json = false;

    bool odd = false;
    std::optional<std::size_t> total_cap;
    std::optional<std::size_t> window;
    std::size_t kmax = 0;
    std::size_t jmax = 0;
    std::string format = "csv";
    std::string grid = "0.01:6:600";
    std::string figure = "ratios";
    std::optional<double> eval;
    std::optional<std::size_t> coeffs;
    double tol = 1e-12;
    std::string lambda;
    std::string mu1;
    std::string mu2;
    std::string p1;
    bool verify = false;
    bool asym = false;
    std::uint64_t events = 1000000;
    std::uint64_t seed = 1;
    std::size_t replicas = 1;
};

namespace detail {

inline AsymmetricParams asym_params(const Options& o, Capacity cap)
{
    if (o.lambda.empty() || o.mu1.empty() || o.mu2.empty() || o.p1.empty())
        throw usage_error("--lambda, --mu1, --mu2 and --p1 are all required");
    AsymmetricParams p;
    p.lambda = to_double(parse_positive("--lambda", o.lambda));
    p.mu1 = to_double(parse_positive("--mu1", o.mu1));
    p.mu2 = to_double(parse_positive("--mu2", o.mu2));
    rational p1;
    try {
        p1 = parse_rational(o.p1);
    } catch (const error&) {
        throw usage_error("--p1: cannot parse '" + o.p1 + "'");
    }
    if (p1 < 0 || p1 > 1)
        throw usage_error("--p1: must lie in [0,1], got '" + o.p1 + "'");
    p.p1 = to_double(p1);
    p.capacity = cap;
    return p;
}

inline int cmd_blocking(const Options& o, Backend backend, std::ostream& out)
{
    const rational rho = parse_positive("--rho", o.rho);
    const double rho_d = to_double(rho);
    Report r;
    r.set("rho", rho_d);
    bool exact = false;
    rational exact_value;
    double value = 0.0;
    if (o.total_cap) {
        const std::size_t M = *o.total_cap;
        exact = backend == Backend::rational && M <= 2 * rational_cap;
        r.set("total_cap", M);
        r.set("variant", "total");
        if (exact)
            exact_value = blocking_total_constraint(rho, M);
        else
            value = blocking_total_constraint(rho_d, M);
    } else {
        if (o.cap.empty())
            throw usage_error("--cap is required unless --total-cap is given");
        const std::size_t K = parse_capacity(o.cap, false).value();
        if (o.odd && K == 0)
            throw usage_error("--odd needs --cap >= 1");
        exact = backend == Backend::rational && K <= rational_cap;
        r.set("cap", K);
        r.set("variant", o.odd ? "odd" : "even");
        if (exact) {
            const BasicSymmetricParams<rational> p{rho, K};
            exact_value = o.odd ? blocking_probability_odd(p) : blocking_probability(p);
        } else {
            const SymmetricParams p{rho_d, K};
            value = o.odd ? blocking_probability_odd(p) : blocking_probability(p);
        }
    }
    if (exact)
        value = to_double(exact_value);
    r.set("backend", backend_name(exact));
    r.set("blocking", value);
    if (exact)
        r.set("exact", to_text(exact_value));
    if (o.json)
        r.print(out, true);
    else
        out << io::format_number(value) << '\n';
    return success;
}

inline int cmd_dist(const Options& o, Backend backend, std::ostream& out)
{
    const rational rho = parse_positive("--rho", o.rho);
    const double rho_d = to_double(rho);
    const Capacity cap = parse_capacity(o.cap, true);
    Sink sink(o.out, out);
    Report r;
    r.set("rho", rho_d);
    std::size_t states = 0;
    double mass = 0.0;
    bool exact = false;
    if (cap.is_infinite()) {
        if (o.window && *o.window == 0)
            throw usage_error("--window must be positive");
        const std::size_t W = o.window ? *o.window : default_window(rho_d);
        const auto d = stationary_infinite(rho_d, W);
        mass = d.total_mass();
        states = write_dist(sink, d, o.json);
        r.set("cap", "inf");
        r.set("window", W);
    } else {
        if (o.window)
            throw usage_error("--window only applies with --cap inf");
        const std::size_t K = cap.value();
        exact = backend == Backend::rational && K <= rational_cap;
        if (exact) {
            const auto d = stationary_finite(BasicSymmetricParams<rational>{rho, K});
            mass = to_double(d.total_mass());
            states = write_dist(sink, d, o.json);
        } else {
            const auto d = stationary_finite(SymmetricParams{rho_d, K});
            mass = d.total_mass();
            states = write_dist(sink, d, o.json);
        }
        r.set("cap", K);
    }
    if (sink.to_file()) {
        r.set("backend", backend_name(exact));
        r.set("states", states);
        r.set("mass", mass);
        r.set("out", sink.path());
        r.print(out, false);
    }
    return success;
}

inline int cmd_kernel(const Options& o, Backend backend, std::ostream& out)
{
    const rational rho = parse_positive("--rho", o.rho);
    Sink sink(o.out, out);
    if (backend == Backend::rational && o.kmax <= rational_cap)
        io::write_kernel_csv(sink.stream(), ConvTable<rational>::symmetric(rho, o.kmax, o.jmax));
    else
        io::write_kernel_csv(sink.stream(), ConvTable<double>::symmetric(to_double(rho), o.kmax, o.jmax));
    sink.close();
    if (sink.to_file()) {
        Report r;
        r.set("rows", (o.kmax + 1) * (o.jmax + 1));
        r.set("out", sink.path());
        r.print(out, false);
    }
    return success;
}

inline int cmd_bounds(const Options& o, std::ostream& out)
{
    const double rho = to_double(parse_positive("--rho", o.rho));
    const Capacity cap = parse_capacity(o.cap, true);
    Report r;
    r.set("rho", rho);
    if (cap.is_infinite()) {
        const auto b = mean_total_bounds_infinite(rho);
        r.set("cap", "inf");
        r.set("mean_total", mean_total_infinite(rho));
        r.set("lower", b.lower);
        r.set("upper", b.upper);
    } else {
        const SymmetricParams p{rho, cap.value()};
        const auto b = mean_total_bounds(p);
        r.set("cap", cap.value());
        r.set("mean_total", mean_total(p));
        r.set("lower", b.lower);
        r.set("upper", b.upper);
        r.set("blocking", blocking_probability(p));
        r.set("mm1k_blocking", mm1k_blocking(rho, cap.value()));
        r.set("mm2_2k_blocking", mm2_2k_blocking(rho, cap.value()));
    }
    r.print(out, o.json);
    return success;
}

// Evaluates f on every grid point over a few threads; rows keep grid order.
template <typename Row, typename F>
std::vector<Row> sweep(const std::vector<double>& grid, F f)
{
    std::vector<Row> rows(grid.size());
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < grid.size(); i += workers)
                    rows[i] = f(grid[i]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return rows;
}

inline int cmd_compare(const Options& o, std::ostream& out)
{
    const Capacity cap = parse_capacity(o.cap, true);
    GridSpec grid;
    try {
        grid = parse_grid(o.grid);
    } catch (const error& e) {
        throw usage_error(std::string("--grid: ") + e.what());
    }
    const auto points = grid.points();
    Sink sink(o.out, out);
    Report r;
    if (o.figure == "means") {
        std::vector<MeanRatioRow> rows;
        if (cap.is_infinite()) {
            if (grid.hi >= 1.0)
                throw usage_error("--grid: infinite capacity needs hi < 1");
            rows = sweep<MeanRatioRow>(points, [](double rho) {
                const auto b = mean_total_bounds_infinite(rho);
                const double mean = mean_total_infinite(rho);
                return MeanRatioRow{rho, b.lower / mean, b.upper / mean};
            });
            r.set("cap", "inf");
        } else {
            const std::size_t K = cap.value();
            rows = sweep<MeanRatioRow>(points, [K](double rho) {
                const SymmetricParams p{rho, K};
                const auto b = mean_total_bounds(p);
                const double mean = mean_total(p);
                return MeanRatioRow{rho, b.lower / mean, b.upper / mean};
            });
            r.set("cap", K);
        }
        io::write_mean_ratio_csv(sink.stream(), rows);
        sink.close();
        r.set("rows", rows.size());
    } else {
        if (cap.is_infinite())
            throw usage_error("--cap: the ratio figure needs a finite capacity");
        const std::size_t K = cap.value();
        if (K == 0)
            throw usage_error("--cap: the ratio figure needs K >= 1");
        const auto rows = sweep<RatioRow>(points, [K](double rho) {
            const double pi = blocking_probability(SymmetricParams{rho, K});
            return RatioRow{rho, mm1k_blocking(rho, K) / pi, mm2_2k_blocking(rho, K) / pi};
        });
        io::write_ratio_csv(sink.stream(), rows);
        sink.close();
        const auto gaps = uniform_gap_report(K, grid);
        const auto b1 = mm1k_gap_bracket(K);
        const auto b2 = mm2_gap_bracket(K);
        r.set("cap", K);
        r.set("rows", rows.size());
        r.set("mm1k_gap_sup", gaps.mm1k_gap.value);
        r.set("mm1k_gap_argmax", gaps.mm1k_gap.argmax);
        r.set("mm1k_gap_bracket_lower", b1.lower);
        r.set("mm1k_gap_bracket_upper", b1.upper);
        r.set("mm2_gap_sup", gaps.mm2_gap.value);
        r.set("mm2_gap_argmax", gaps.mm2_gap.argmax);
        r.set("mm2_gap_bracket_lower", b2.lower);
        r.set("mm2_gap_bracket_upper", b2.upper);
    }
    if (sink.to_file()) {
        r.set("out", sink.path());
        r.print(out, o.json);
    }
    return success;
}

inline int cmd_cohen(const Options& o, std::ostream& out)
{
    const double rho = to_double(parse_positive("--rho", o.rho));
    if (o.eval.has_value() == o.coeffs.has_value())
        throw usage_error("give exactly one of --eval and --coeffs");
    if (!(o.tol > 0.0))
        throw usage_error("--tol must be positive");
    if (o.eval) {
        const auto a = cohen_A(rho, *o.eval, o.tol);
        Report r;
        r.set("rho", rho);
        r.set("y", *o.eval);
        r.set("A", a.value.real());
        r.set("truncation_error", a.error);
        r.print(out, o.json);
        return success;
    }
    Sink sink(o.out, out);
    io::write_series_csv(sink.stream(), boundary_coeffs_infinite(rho, *o.coeffs, o.tol));
    sink.close();
    if (sink.to_file()) {
        Report r;
        r.set("rows", *o.coeffs + 1);
        r.set("out", sink.path());
        r.print(out, o.json);
    }
    return success;
}

inline std::vector<Check> asym_checks(const AsymmetricParams& p, const JointDist& d, const JointDist& reference)
{
    std::vector<Check> checks;
    checks.push_back({"reconstruction_gap", max_gap(d, reference), 1e-9});
    checks.push_back({"total_mass", std::abs(d.total_mass() - 1.0), 1e-9});
    double e1 = 0.0;
    double e2 = 0.0;
    const double radius = asym_small_x_radius(p);
    for (int i = 0; i < 10; ++i) {
        const cplx x = std::polar(radius * (0.1 + 0.09 * i), 0.37 + 0.61 * i);
        const auto [a, b] = asym_functional_residual(p, reference, x);
        e1 = std::max(e1, std::abs(a));
        e2 = std::max(e2, std::abs(b));
    }
    checks.push_back({"relation_1", e1, 1e-9});
    checks.push_back({"relation_2", e2, 1e-9});
    checks.push_back({"normalization", asym_normalization_check(p, reference), 1e-10});
    return checks;
}

inline int cmd_asym(const Options& o, std::ostream& out)
{
    const auto p = asym_params(o, parse_capacity(o.cap, false));
    const auto reference = oracle::stationary(p);
    const auto d = asym_reconstruct(p, boundaries_of(reference, p.capacity.value() + 1));
    Sink sink(o.out, out);
    const bool show = sink.to_file() || o.verify;
    if (sink.to_file() || !o.verify)
        write_dist(sink, d, o.json && !show);
    Report r;
    r.set("lambda", p.lambda);
    r.set("mu1", p.mu1);
    r.set("mu2", p.mu2);
    r.set("p1", p.p1);
    r.set("cap", p.capacity.value());
    r.set("blocking", d(p.capacity.value(), p.capacity.value()));
    if (sink.to_file())
        r.set("out", sink.path());
    if (o.verify)
        return report_checks(asym_checks(p, d, reference), r, out, o.json);
    if (show)
        r.print(out, o.json);
    return success;
}

inline int cmd_oracle(const Options& o, Backend backend, std::ostream& out)
{
    const Capacity cap = parse_capacity(o.cap, false);
    Sink sink(o.out, out);
    Report r;
    bool exact = false;
    std::size_t states = 0;
    if (o.asym) {
        const auto p = asym_params(o, cap);
        const auto d = oracle::stationary(p);
        states = write_dist(sink, d, o.json && !sink.to_file());
        r.set("residual", oracle::balance_residual(build_generator(p), d.to_full()));
    } else {
        const rational rho = parse_positive("--rho", o.rho);
        exact = backend == Backend::rational && cap.value() <= rational_cap;
        if (exact) {
            const BasicSymmetricParams<rational> p{rho, cap};
            states = write_dist(sink, oracle::stationary(p), o.json && !sink.to_file());
        } else {
            const SymmetricParams p{to_double(rho), cap};
            const auto d = oracle::stationary(p);
            states = write_dist(sink, d, o.json && !sink.to_file());
            r.set("residual", oracle::balance_residual(build_generator(p), d.to_full()));
        }
    }
    if (sink.to_file()) {
        r.set("backend", backend_name(exact));
        r.set("states", states);
        r.set("out", sink.path());
        r.print(out, o.json);
    }
    return success;
}

inline int cmd_simulate(const Options& o, std::ostream& out)
{
    const double rho = to_double(parse_positive("--rho", o.rho));
    const SymmetricParams p{rho, parse_capacity(o.cap, false)};
    if (o.events == 0)
        throw usage_error("--events must be positive");
    if (o.replicas == 0)
        throw usage_error("--replicas must be positive");
    const auto total = sim::merge(sim::simulate_replicas(p, o.events, o.seed, o.replicas));
    const auto ci = sim::batch_means(total.batch_arrivals, total.batch_blocked);
    Report r;
    r.set("rho", rho);
    r.set("cap", p.capacity.value());
    r.set("events", total.events);
    r.set("seed", o.seed);
    r.set("replicas", o.replicas);
    r.set("ordering_violations", total.ordering_violations);
    r.set("blocking_jsq", total.blocking(0));
    r.set("blocking_ci_halfwidth", ci.ci_halfwidth);
    r.set("blocking_exact", blocking_probability(p));
    r.set("blocking_mm1k", total.blocking(1));
    r.set("blocking_mm2_2k", total.blocking(2));
    r.set("blocking_mm1_2k", total.blocking(3));
    r.set("mean_total", total.mean_occupancy(0));
    r.set("mean_total_exact", mean_total(p));
    r.print(out, o.json);
    return total.ordering_violations == 0 ? success : validation;
}

inline std::vector<Check> verify_checks(const rational& rho_exact, std::size_t K, Backend backend)
{
    const double rho = to_double(rho_exact);
    const SymmetricParams p{rho, K};
    std::vector<Check> c;
    const bool dense = (K + 1) * (K + 1) <= oracle::max_states;
    auto skip = [&](const std::string& name) { c.push_back({name, 0.0, 0.0, true}); };

    const double pi = blocking_probability(p);
    const auto d = stationary_finite(p);
    if (dense) {
        const auto o = oracle::stationary(p);
        c.push_back({"blocking_vs_oracle", std::abs(pi - o(K, K)), 1e-10});
        c.push_back({"reconstruction_vs_oracle", max_gap(d, o), 1e-9});
    } else {
        skip("blocking_vs_oracle");
        skip("reconstruction_vs_oracle");
    }
    if (K >= 1 && dense) {
        const auto v = oracle::stationary_variant(p);
        c.push_back({"odd_vs_variant", std::abs(blocking_probability_odd(p) - v(K - 1, K) - v(K, K - 1)), 1e-10});
    } else {
        skip("odd_vs_variant");
    }
    if (backend == Backend::rational && K <= rational_cap) {
        const BasicSymmetricParams<rational> pr{rho_exact, K};
        const auto exact = stationary_finite(pr);
        const auto o = oracle::stationary(pr);
        bool same = true;
        for (std::size_t k = 0; k <= K; ++k)
            for (std::size_t j = 0; j <= K; ++j)
                same = same && exact(j, k) == o(j, k);
        c.push_back({"exact_reconstruction", same ? 0.0 : 1.0, 0.0});
    }
    c.push_back({"total_mass", std::abs(d.total_mass() - 1.0), 1e-9});
    if (dense)
        c.push_back({"balance_residual", oracle::balance_residual(build_generator(p), d.to_full()) / (2.0 * rho + 2.0),
                     1e-10});
    else
        skip("balance_residual");

    {
        const std::size_t n = 2 * K + 4;
        const auto g = kernel_values(symmetric_kernel(rho), n);
        double worst = 0.0;
        for (std::size_t j = 0; j + 2 <= n; ++j)
            worst = std::max(worst, std::abs(g[j + 2] - 2.0 * (1.0 + rho) * g[j + 1] + 2.0 * rho * g[j]) /
                                        std::max(1.0, std::abs(g[j + 2])));
        c.push_back({"kernel_recurrence", worst, 1e-12});
        double spread = 0.0;
        for (std::size_t k = 1; k <= std::min<std::size_t>(K + 1, 8); ++k) {
            const auto a = g_pow(rho, k, 24, GPowMethod::iterated);
            const auto b = g_pow(rho, k, 24, GPowMethod::binomial);
            const auto s = g_pow(rho, k, 24, GPowMethod::sigma_shift);
            double row = 0.0;
            for (double x : a)
                row = std::max(row, std::abs(x));
            for (std::size_t j = 0; j <= 24; ++j) {
                const double scale = j < k ? row : std::abs(a[j]);
                spread = std::max({spread, std::abs(b[j] - a[j]) / scale, std::abs(s[j] - a[j]) / scale});
            }
        }
        c.push_back({"g_pow_methods", spread, 1e-9});
    }

    {
        double worst = 0.0;
        for (cplx x : {cplx(1.0), cplx(0.2, 0.1), cplx(-0.3, 0.05)})
            worst = std::max(worst, std::abs(functional_residual_AK(p, d, x)));
        c.push_back({"generating_function", worst, 1e-10});
    }

    {
        const auto t = total_dist(p);
        double worst = 0.0;
        for (std::size_t n = 0; n <= 2 * K; ++n) {
            const double env = total_envelope(p, n);
            worst = std::max(worst, n < K ? std::max(0.0, t[n] - env) / env : std::abs(t[n] - env) / env);
        }
        c.push_back({"total_envelope", worst, 1e-12});
        const double mean = mean_total(p);
        const auto b = mean_total_bounds(p);
        c.push_back({"mean_sandwich", std::max({0.0, (b.lower - mean) / mean, (mean - b.upper) / mean}), 1e-9});
        const double order = std::max({0.0, mm2_2k_blocking(rho, K) - pi, pi - mm1k_blocking(rho, K)});
        c.push_back({"order_chain", order, 1e-15});
    }

    if (K >= 1 && K <= asym_oracle_cap) {
        const AsymmetricParams ap{rho, 1.0, 1.0, 0.5, K};
        c.push_back({"asym_reduction", max_gap(asym_reconstruct(ap, asym_boundaries_oracle(ap)), d), 1e-9});
    } else {
        skip("asym_reduction");
    }

    {
        const auto rep = sim::simulate_coupled(p, 100000, 1);
        c.push_back({"coupling_order", static_cast<double>(rep.ordering_violations), 0.0});
    }

    if (rho < 1.0) {
        const auto a = cohen_A(rho, 1.0 / rho);
        c.push_back({"product_at_inverse_rho", std::abs(a.value.real() - (2.0 - rho) * (1.0 - rho)), 1e-8});
        std::size_t K_trunc = 20;
        while (oracle::truncation_tail_bound(rho, K_trunc) > 1e-10 && K_trunc < 90)
            K_trunc += 10;
        if (oracle::truncation_tail_bound(rho, K_trunc) <= 1e-10) {
            const std::size_t W = 5;
            const auto inf = stationary_infinite(rho, W);
            const auto tr = oracle::truncated_infinite(rho, K_trunc);
            double gap = 0.0;
            for (std::size_t k = 0; k <= W; ++k)
                for (std::size_t j = 0; j <= W; ++j)
                    gap = std::max(gap, std::abs(inf(j, k) - tr.dist(j, k)));
            c.push_back({"infinite_vs_truncated", gap, 1e-7});
        } else {
            skip("infinite_vs_truncated");
        }
    }
    return c;
}

inline int cmd_verify(const Options& o, Backend backend, std::ostream& out)
{
    const rational rho = parse_positive("--rho", o.rho);
    const std::size_t K = parse_capacity(o.cap, false).value();
    Report r;
    r.set("rho", to_double(rho));
    r.set("cap", K);
    return report_checks(verify_checks(rho, K, backend), r, out, o.json);
}

} // namespace detail

/// Parses argv and runs one subcommand, writing results to `out` and
/// diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exact analysis of two queues under join-the-shortest-queue routing", "jsq"};
    app.require_subcommand(1);
    Options o;

    auto rho = [&](CLI::App* s) { return s->add_option("--rho", o.rho, "load per server, decimal or p/q")->required(); };
    auto json = [&](CLI::App* s) { s->add_flag("--json", o.json, "print one JSON object"); };
    auto out_opt = [&](CLI::App* s) { s->add_option("--out", o.out, "output file (default stdout)"); };
    auto asym_rates = [&](CLI::App* s) {
        s->add_option("--lambda", o.lambda, "arrival rate per stream");
        s->add_option("--mu1", o.mu1, "service rate of queue 1");
        s->add_option("--mu2", o.mu2, "service rate of queue 2");
        s->add_option("--p1", o.p1, "probability a tie goes to queue 1");
    };

    auto* blocking = app.add_subcommand("blocking", "blocking probability pi_K(K,K)");
    rho(blocking);
    blocking->add_option("--cap", o.cap, "buffer size K per queue");
    auto* odd = blocking->add_flag("--odd", o.odd, "odd total buffer 2K-1");
    blocking->add_option("--total-cap", o.total_cap, "total buffer M shared by both queues")->excludes(odd);
    json(blocking);

    auto* dist = app.add_subcommand("dist", "joint stationary distribution as CSV");
    rho(dist);
    dist->add_option("--cap", o.cap, "K or inf")->required();
    dist->add_option("--window", o.window, "window for --cap inf");
    out_opt(dist);
    json(dist);

    auto* kernel = app.add_subcommand("kernel", "convolution powers g^{*k}(j) as CSV");
    rho(kernel);
    kernel->add_option("--kmax", o.kmax, "largest power")->required();
    kernel->add_option("--jmax", o.jmax, "largest index")->required();
    kernel->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv"}));
    out_opt(kernel);

    auto* bounds = app.add_subcommand("bounds", "mean occupancy and its bounds");
    rho(bounds);
    bounds->add_option("--cap", o.cap, "K or inf")->required();
    json(bounds);

    auto* compare = app.add_subcommand("compare", "ratio sweeps against M/M/1/K and M/M/2/2K");
    compare->add_option("--cap", o.cap, "K (or inf with --figure means)")->required();
    compare->add_option("--grid", o.grid, "lo:hi:n, linear spacing");
    compare->add_option("--figure", o.figure, "ratios or means")->check(CLI::IsMember({"ratios", "means"}));
    out_opt(compare);
    json(compare);

    auto* cohen = app.add_subcommand("cohen", "product form of the infinite-capacity boundary");
    rho(cohen);
    cohen->add_option("--eval", o.eval, "evaluate A(y)");
    cohen->add_option("--coeffs", o.coeffs, "print coefficients 0..KMAX");
    cohen->add_option("--tol", o.tol, "truncation tolerance");
    out_opt(cohen);
    json(cohen);

    auto* asym = app.add_subcommand("asym", "distribution with unequal servers");
    asym_rates(asym);
    asym->add_option("--cap", o.cap, "buffer size K per queue")->required();
    asym->add_flag("--verify", o.verify, "check against the dense solve");
    out_opt(asym);
    json(asym);

    auto* oracle_cmd = app.add_subcommand("oracle", "dense balance-equation solve");
    oracle_cmd->add_option("--rho", o.rho, "load per server (symmetric model)");
    oracle_cmd->add_option("--cap", o.cap, "buffer size K per queue")->required();
    oracle_cmd->add_flag("--asym", o.asym, "solve the unequal-server model");
    asym_rates(oracle_cmd);
    out_opt(oracle_cmd);
    json(oracle_cmd);

    auto* simulate = app.add_subcommand("simulate", "coupled simulation of JSQ and its comparison queues");
    rho(simulate);
    simulate->add_option("--cap", o.cap, "buffer size K per queue")->required();
    simulate->add_option("--events", o.events, "events per replica");
    simulate->add_option("--seed", o.seed, "seed of replica 0; replica i uses seed + i");
    simulate->add_option("--replicas", o.replicas, "independent replicas run in parallel");
    json(simulate);

    auto* verify = app.add_subcommand("verify", "run every consistency check");
    rho(verify);
    verify->add_option("--cap", o.cap, "buffer size K per queue")->required();
    json(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return success;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return success;
    } catch (const CLI::ParseError& e) {
        err << "jsq: " << e.what() << '\n';
        return usage;
    }

    try {
        const Backend backend = backend_from_env();
        if (*blocking)
            return detail::cmd_blocking(o, backend, out);
        if (*dist)
            return detail::cmd_dist(o, backend, out);
        if (*kernel)
            return detail::cmd_kernel(o, backend, out);
        if (*bounds)
            return detail::cmd_bounds(o, out);
        if (*compare)
            return detail::cmd_compare(o, out);
        if (*cohen)
            return detail::cmd_cohen(o, out);
        if (*asym)
            return detail::cmd_asym(o, out);
        if (*oracle_cmd) {
            if (!o.asym && o.rho.empty())
                throw usage_error("--rho is required unless --asym is given");
            return detail::cmd_oracle(o, backend, out);
        }
        if (*simulate)
            return detail::cmd_simulate(o, out);
        return detail::cmd_verify(o, backend, out);
    } catch (const usage_error& e) {
        err << "jsq: " << e.what() << '\n';
        return usage;
    } catch (const error& e) {
        err << "jsq: " << e.what() << '\n';
        return detail::exit_for(e.code());
    } catch (const std::exception& e) {
        err << "jsq: " << e.what() << '\n';
        return validation;
    }
}

} // namespace jsq::cli
