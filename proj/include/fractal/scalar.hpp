#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace fractal {

/// Exact rational scalar. Expression templates are disabled so that the type
/// behaves like a plain value inside Eigen containers.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

template <class Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Rational>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Parses "p/q", "p" or a decimal literal such as "0.25" into an exact rational.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(double x) { return x; }

template <class Scalar>
Scalar scalar_cast(const Rational& q) {
    if constexpr (is_exact_v<Scalar>) {
        return q;
    } else {
        return static_cast<Scalar>(to_double(q));
    }
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

/// Absolute difference that works for both scalar kinds.
template <class Scalar>
Scalar abs_diff(const Scalar& a, const Scalar& b) {
    return a < b ? Scalar(b - a) : Scalar(a - b);
}

/// Equality: exact for rationals, relative tolerance for floats.
template <class Scalar>
bool nearly_equal(const Scalar& a, const Scalar& b, double rel_tol = 1e-9) {
    if constexpr (is_exact_v<Scalar>) {
        (void)rel_tol;
        return a == b;
    } else {
        const double scale = std::max({1e-300, std::abs(a), std::abs(b)});
        return std::abs(a - b) <= rel_tol * scale;
    }
}

/// A value in [0, +inf]. Used for resistances and hitting times, where the
/// reciprocal of a vanishing conductance is an explicit infinity.
template <class Scalar>
struct Extended {
    Scalar value{0};
    bool infinite = false;

    static Extended inf() { return Extended{Scalar(0), true}; }
    static Extended finite(Scalar v) { return Extended{std::move(v), false}; }

    double as_double() const {
        return infinite ? std::numeric_limits<double>::infinity() : to_double(value);
    }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateTrace : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fractal

namespace Eigen {

template <>
struct NumTraits<fractal::Rational> : GenericNumTraits<fractal::Rational> {
    using Real = fractal::Rational;
    using NonInteger = fractal::Rational;
    using Nested = fractal::Rational;
    using Literal = fractal::Rational;

    enum {
        IsInteger = 0,
        IsSigned = 1,
        IsComplex = 0,
        RequireInitialization = 1,
        ReadCost = 4,
        AddCost = 16,
        MulCost = 16
    };

    static inline Real epsilon() { return Real(0); }
    static inline Real dummy_precision() { return Real(0); }
    static inline int digits10() { return 0; }
};

}  // namespace Eigen
