#pragma once

#include "fractal/scalar.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fractal {

/// Dense univariate polynomial with exact rational coefficients, lowest
/// degree first. The zero polynomial has no coefficients.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Rational> coeffs);
    static Polynomial constant(const Rational& c) { return Polynomial({c}); }
    static Polynomial identity() { return Polynomial({Rational(0), Rational(1)}); }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Rational>& coeffs() const { return c_; }
    Rational coeff(int i) const { return i >= 0 && i <= degree() ? c_[static_cast<std::size_t>(i)] : Rational(0); }
    const Rational& leading() const { return c_.back(); }

    Rational operator()(const Rational& x) const;
    double operator()(double x) const;
    Polynomial derivative() const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Rational& s, const Polynomial& p);
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

    /// Quotient and remainder of Euclidean division.
    static std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b);
    /// Monic greatest common divisor (zero if both are zero).
    static Polynomial gcd(Polynomial a, Polynomial b);

    Polynomial monic() const;
    /// p / gcd(p, p'): same roots, all simple.
    Polynomial square_free() const;

    std::string str(const std::string& var = "v") const;

private:
    void trim();
    std::vector<Rational> c_;
};

/// Ratio of two polynomials, normalised so that numerator and denominator
/// have coprime integer coefficients and the denominator's leading
/// coefficient is positive.
struct RationalFunction {
    Polynomial num;
    Polynomial den;

    RationalFunction() = default;
    RationalFunction(Polynomial n, Polynomial d);

    Rational operator()(const Rational& x) const { return num(x) / den(x); }
    double operator()(double x) const { return num(x) / den(x); }

    std::string str(const std::string& var = "v") const;
    friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
        return a.num == b.num && a.den == b.den;
    }
};

/// Cross-multiplication identity a.num * b.den == b.num * a.den.
bool equivalent(const RationalFunction& a, const RationalFunction& b);

class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, std::size_t witness, Rational residual)
        : std::runtime_error(what), witness_index(witness), residual(std::move(residual)) {}
    std::size_t witness_index;
    Rational residual;
};

/// Exact rational interpolation: the lowest d <= max_degree for which some
/// P/Q with deg P, deg Q <= d passes through every sample. Throws FitError
/// with the first failing sample of the degree-max_degree candidate.
RationalFunction fit_rational_function(const std::vector<Rational>& xs, const std::vector<Rational>& ys,
                                       int max_degree);

/// Basis of the right null space of an exact matrix.
std::vector<Vector<Rational>> null_space(Matrix<Rational> m);

struct RealRoot {
    double value = 0.0;
    std::optional<Rational> exact;
};

/// Positive real roots of p in (0, bound], located by sign scanning of the
/// square-free part on a geometric grid followed by bisection to a width of
/// at most 1e-12 relative. Rational roots with small denominators are
/// recognised and reported exactly.
std::vector<RealRoot> positive_roots(const Polynomial& p);

/// Tries to recognise x as a rational with denominator <= max_den that is an
/// exact root of p.
std::optional<Rational> recognise_root(const Polynomial& p, double x, long max_den = 1000000);

}  // namespace fractal
