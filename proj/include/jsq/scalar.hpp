#pragma once

// Arithmetic backends. Everything numeric in the library is written against
// a Scalar template parameter: `double` for production runs and `rational`
// (arbitrary precision) for exact validation at small capacities.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "jsq/error.hpp"

namespace jsq {

using rational = boost::multiprecision::cpp_rational;
using bigint = boost::multiprecision::cpp_int;

template <typename T>
inline constexpr bool is_rational_v = std::is_same_v<T, rational>;

template <typename T>
double to_double(const T& value)
{
    if constexpr (std::is_arithmetic_v<T>)
        return static_cast<double>(value);
    else if constexpr (boost::multiprecision::is_number_expression<T>::value)
        return to_double(typename T::result_type(value));
    else
        return value.template convert_to<double>();
}

template <typename T>
T abs_value(const T& value)
{
    return value < T(0) ? T(-value) : value;
}

template <typename T>
T int_pow(T base, std::size_t exponent)
{
    T result(1);
    while (exponent > 0) {
        if (exponent & 1U)
            result *= base;
        base *= base;
        exponent >>= 1U;
    }
    return result;
}

/// 1 + x + ... + x^(n-1), Horner accumulation (n = 0 gives 0).
template <typename T>
T geometric_sum(const T& x, std::size_t n)
{
    if (n == 0)
        return T(0);
    T sum(1);
    for (std::size_t i = 1; i < n; ++i)
        sum = T(1) + x * sum;
    return sum;
}

/// Parses "3", "0.25", "-1.5e-2" or "1/3" into an exact rational.
inline rational parse_rational(std::string_view text)
{
    auto bad = [&] { fail(errc::invalid_argument, "cannot parse rational '" + std::string(text) + "'"); };
    if (text.empty())
        bad();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        rational num = parse_rational(text.substr(0, slash));
        rational den = parse_rational(text.substr(slash + 1));
        if (den == 0)
            bad();
        return num / den;
    }
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    bigint mantissa = 0;
    long scale = 0;
    bool seen_digit = false;
    bool seen_point = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c >= '0' && c <= '9') {
            mantissa = mantissa * 10 + (c - '0');
            seen_digit = true;
            if (seen_point)
                --scale;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit)
        bad();
    if (pos < text.size()) {
        if (text[pos] != 'e' && text[pos] != 'E')
            bad();
        std::string exponent(text.substr(pos + 1));
        try {
            std::size_t used = 0;
            scale += std::stol(exponent, &used);
            if (used != exponent.size())
                bad();
        } catch (const std::logic_error&) {
            bad();
        }
    }
    rational value(mantissa);
    bigint ten_pow = 1;
    for (long i = 0; i < std::labs(scale); ++i)
        ten_pow *= 10;
    if (scale >= 0)
        value *= rational(ten_pow);
    else
        value /= rational(ten_pow);
    return negative ? rational(-value) : value;
}

/// Element a + b*sqrt(d) of the quadratic field Q(sqrt(d)), d fixed per value.
/// Lets closed forms written in terms of xi_+- be evaluated exactly.
template <typename T>
struct quadratic_surd {
    T a{0};
    T b{0};
    T d{0};

    quadratic_surd() = default;
    quadratic_surd(T a_) : a(std::move(a_)) {} // NOLINT: embeds the base field
    quadratic_surd(T a_, T b_, T d_) : a(std::move(a_)), b(std::move(b_)), d(std::move(d_)) {}

    friend quadratic_surd operator+(const quadratic_surd& x, const quadratic_surd& y)
    {
        return {x.a + y.a, x.b + y.b, x.d == 0 ? y.d : x.d};
    }
    friend quadratic_surd operator-(const quadratic_surd& x, const quadratic_surd& y)
    {
        return {x.a - y.a, x.b - y.b, x.d == 0 ? y.d : x.d};
    }
    friend quadratic_surd operator*(const quadratic_surd& x, const quadratic_surd& y)
    {
        const T& d = x.d == 0 ? y.d : x.d;
        return {x.a * y.a + x.b * y.b * d, x.a * y.b + x.b * y.a, d};
    }
    quadratic_surd conjugate() const { return {a, -b, d}; }
    T norm() const { return a * a - b * b * d; }
    friend quadratic_surd operator/(const quadratic_surd& x, const quadratic_surd& y)
    {
        quadratic_surd num = x * y.conjugate();
        T den = y.norm();
        require(den != 0, errc::invalid_argument, "division by zero in quadratic field");
        return {num.a / den, num.b / den, num.d};
    }
    friend bool operator==(const quadratic_surd& x, const quadratic_surd& y) { return x.a == y.a && x.b == y.b; }
    friend bool operator!=(const quadratic_surd& x, const quadratic_surd& y) { return !(x == y); }
    quadratic_surd operator-() const { return {-a, -b, d}; }
    quadratic_surd& operator+=(const quadratic_surd& y) { return *this = *this + y; }
    quadratic_surd& operator*=(const quadratic_surd& y) { return *this = *this * y; }
};

} // namespace jsq
