#pragma once

// Text formats: distributions as CSV `j,k,prob` or JSON, convolution tables
// as CSV `k,j,value`, ratio sweeps as CSV `rho,nu_ratio,nuprime_ratio`,
// power series as CSV `k,coeff`.
// Numbers are written with 15 significant digits.

#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jsq/convkernel.hpp"
#include "jsq/error.hpp"
#include "jsq/model.hpp"
#include "jsq/scalar.hpp"
#include "jsq/totals_bounds.hpp"

namespace jsq::io {

inline constexpr int digits = 15;
inline constexpr int schema_version = 1;

inline std::string format_number(double v)
{
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

inline std::string strip_cr(std::string s)
{
    if (!s.empty() && s.back() == '\r')
        s.pop_back();
    return s;
}

inline std::size_t parse_index(const std::string& s, std::size_t line)
{
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size() || s.front() == '-')
        fail(errc::invalid_argument, "line " + std::to_string(line) + ": bad index '" + s + "'");
    return static_cast<std::size_t>(v);
}

inline double parse_value(const std::string& s, std::size_t line)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size())
        fail(errc::invalid_argument, "line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

// Reads the rows of a CSV after checking the header; every row must have as
// many fields as the header.
inline std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& header)
{
    const std::size_t columns = split_csv_line(header).size();
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != header)
        fail(errc::invalid_argument, "expected header '" + header + "'");
    std::vector<std::vector<std::string>> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        line = strip_cr(line);
        if (line.empty())
            continue;
        auto cells = split_csv_line(line);
        if (cells.size() != columns)
            fail(errc::invalid_argument,
                 "line " + std::to_string(n) + ": expected " + std::to_string(columns) + " fields");
        rows.push_back(std::move(cells));
    }
    return rows;
}

// Builds a full-storage distribution from (j,k,p) triples; every state must
// appear exactly once.
inline JointDist dist_from_entries(const std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>>& entries)
{
    std::size_t K = 0;
    for (const auto& [jk, p] : entries)
        K = std::max({K, jk.first, jk.second});
    require(entries.size() == (K + 1) * (K + 1), errc::invalid_argument, "entries do not cover the square lattice");
    std::vector<double> full((K + 1) * (K + 1), 0.0);
    std::vector<bool> seen(full.size(), false);
    for (const auto& [jk, p] : entries) {
        const std::size_t i = state_index(jk.first, jk.second, K);
        require(!seen[i], errc::invalid_argument, "duplicate state");
        seen[i] = true;
        full[i] = p;
    }
    return JointDist::from_full(K, full, false);
}

} // namespace detail

/// All (K+1)^2 states, k-major then j, as in the state index.
template <typename T>
void write_dist_csv(std::ostream& out, const BasicJointDist<T>& d)
{
    out << "j,k,prob\n";
    const std::size_t K = d.capacity();
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t j = 0; j <= K; ++j)
            out << j << ',' << k << ',' << format_number(to_double(d(j, k))) << '\n';
}

inline JointDist read_dist_csv(std::istream& in)
{
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>> entries;
    std::size_t n = 1;
    for (const auto& row : detail::read_rows(in, "j,k,prob")) {
        ++n;
        entries.push_back({{detail::parse_index(row[0], n), detail::parse_index(row[1], n)},
                           detail::parse_value(row[2], n)});
    }
    require(!entries.empty(), errc::invalid_argument, "no entries");
    return detail::dist_from_entries(entries);
}

template <typename T>
nlohmann::ordered_json dist_to_json(const BasicJointDist<T>& d)
{
    nlohmann::ordered_json j;
    j["schema_version"] = schema_version;
    j["K"] = d.capacity();
    auto entries = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k <= d.capacity(); ++k)
        for (std::size_t i = 0; i <= d.capacity(); ++i)
            entries.push_back({i, k, to_double(d(i, k))});
    j["entries"] = std::move(entries);
    return j;
}

inline JointDist dist_from_json(const nlohmann::json& j)
{
    try {
        std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>> entries;
        for (const auto& e : j.at("entries")) {
            require(e.is_array() && e.size() == 3, errc::invalid_argument, "entry must be [j,k,p]");
            entries.push_back({{e[0].get<std::size_t>(), e[1].get<std::size_t>()}, e[2].get<double>()});
        }
        require(!entries.empty(), errc::invalid_argument, "no entries");
        JointDist d = detail::dist_from_entries(entries);
        require(d.capacity() == j.at("K").get<std::size_t>(), errc::invalid_argument, "K does not match entries");
        return d;
    } catch (const nlohmann::json::exception& e) {
        fail(errc::invalid_argument, std::string("malformed distribution JSON: ") + e.what());
    }
}

/// Writes JSON with 15 significant digits, one entry per line.
inline void write_json(std::ostream& out, const nlohmann::ordered_json& j)
{
    // nlohmann prints doubles with 17 digits; round through the text format.
    auto rounded = [](const auto& self, const nlohmann::ordered_json& v) -> nlohmann::ordered_json {
        if (v.is_number_float())
            return std::stod(format_number(v.get<double>()));
        if (v.is_array()) {
            auto a = nlohmann::ordered_json::array();
            for (const auto& e : v)
                a.push_back(self(self, e));
            return a;
        }
        if (v.is_object()) {
            nlohmann::ordered_json o = nlohmann::ordered_json::object();
            for (auto it = v.begin(); it != v.end(); ++it)
                o[it.key()] = self(self, it.value());
            return o;
        }
        return v;
    };
    out << rounded(rounded, j).dump() << '\n';
}

template <typename T>
void write_kernel_csv(std::ostream& out, const ConvTable<T>& table)
{
    out << "k,j,value\n";
    for (std::size_t k = 0; k <= table.kmax(); ++k)
        for (std::size_t j = 0; j <= table.jmax(); ++j)
            out << k << ',' << j << ',' << format_number(to_double(table(k, j))) << '\n';
}

/// Rows (k, j, g^{*k}(j)) in file order.
struct KernelEntry {
    std::size_t k = 0;
    std::size_t j = 0;
    double value = 0.0;
};

inline std::vector<KernelEntry> read_kernel_csv(std::istream& in)
{
    std::vector<KernelEntry> out;
    std::size_t n = 1;
    for (const auto& row : detail::read_rows(in, "k,j,value")) {
        ++n;
        out.push_back({detail::parse_index(row[0], n), detail::parse_index(row[1], n), detail::parse_value(row[2], n)});
    }
    return out;
}

inline void write_ratio_csv(std::ostream& out, const std::vector<RatioRow>& rows)
{
    out << "rho,nu_ratio,nuprime_ratio\n";
    for (const auto& r : rows)
        out << format_number(r.rho) << ',' << format_number(r.nu_ratio) << ',' << format_number(r.nuprime_ratio)
            << '\n';
}

inline std::vector<RatioRow> read_ratio_csv(std::istream& in)
{
    std::vector<RatioRow> out;
    std::size_t n = 1;
    for (const auto& row : detail::read_rows(in, "rho,nu_ratio,nuprime_ratio")) {
        ++n;
        out.push_back({detail::parse_value(row[0], n), detail::parse_value(row[1], n), detail::parse_value(row[2], n)});
    }
    return out;
}

inline void write_mean_ratio_csv(std::ostream& out, const std::vector<MeanRatioRow>& rows)
{
    out << "rho,lower_ratio,upper_ratio\n";
    for (const auto& r : rows)
        out << format_number(r.rho) << ',' << format_number(r.lower_ratio) << ',' << format_number(r.upper_ratio)
            << '\n';
}

inline std::vector<MeanRatioRow> read_mean_ratio_csv(std::istream& in)
{
    std::vector<MeanRatioRow> out;
    std::size_t n = 1;
    for (const auto& row : detail::read_rows(in, "rho,lower_ratio,upper_ratio")) {
        ++n;
        out.push_back({detail::parse_value(row[0], n), detail::parse_value(row[1], n), detail::parse_value(row[2], n)});
    }
    return out;
}

/// Power-series coefficients as `k,coeff`.
inline void write_series_csv(std::ostream& out, const std::vector<double>& coeffs)
{
    out << "k,coeff\n";
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        out << k << ',' << format_number(coeffs[k]) << '\n';
}

inline std::vector<double> read_series_csv(std::istream& in)
{
    std::vector<double> out;
    std::size_t n = 1;
    for (const auto& row : detail::read_rows(in, "k,coeff")) {
        ++n;
        require(detail::parse_index(row[0], n) == out.size(), errc::invalid_argument,
                "series rows must be numbered 0, 1, 2, ...");
        out.push_back(detail::parse_value(row[1], n));
    }
    return out;
}

} // namespace jsq::io
