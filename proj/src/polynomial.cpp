#include "fractal/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fractal {

Polynomial::Polynomial(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rational Polynomial::operator()(const Rational& x) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double Polynomial::operator()(double x) const {
    long double acc = 0.0L;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + static_cast<long double>(to_double(*it));
    return static_cast<double>(acc);
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Rational> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<long>(i);
    return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Rational(-1) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> c(a.c_.size() + b.c_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
}

Polynomial operator*(const Rational& s, const Polynomial& p) {
    std::vector<Rational> c = p.c_;
    for (auto& x : c) x *= s;
    return Polynomial(std::move(c));
}

std::pair<Polynomial, Polynomial> Polynomial::divmod(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) throw DomainError("polynomial division by zero");
    std::vector<Rational> rem = a.c_;
    if (a.degree() < b.degree()) return {Polynomial(), a};
    std::vector<Rational> quot(static_cast<std::size_t>(a.degree() - b.degree() + 1), Rational(0));
    for (int k = a.degree() - b.degree(); k >= 0; --k) {
        const Rational f = rem[static_cast<std::size_t>(k + b.degree())] / b.leading();
        quot[static_cast<std::size_t>(k)] = f;
        for (int j = 0; j <= b.degree(); ++j)
            rem[static_cast<std::size_t>(k + j)] -= f * b.c_[static_cast<std::size_t>(j)];
    }
    return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
}

Polynomial Polynomial::gcd(Polynomial a, Polynomial b) {
    while (!b.is_zero()) {
        Polynomial r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a.is_zero() ? a : a.monic();
}

Polynomial Polynomial::monic() const {
    if (is_zero()) return *this;
    return Rational(1) / leading() * *this;
}

Polynomial Polynomial::square_free() const {
    if (degree() <= 0) return monic();
    const Polynomial g = gcd(*this, derivative());
    return divmod(*this, g).first.monic();
}

std::string Polynomial::str(const std::string& var) const {
    if (is_zero()) return "0";
    std::ostringstream out;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        const Rational& c = c_[static_cast<std::size_t>(i)];
        if (c == 0) continue;
        const bool neg = c < 0;
        const Rational mag = neg ? Rational(-c) : c;
        if (first) out << (neg ? "-" : "");
        else out << (neg ? " - " : " + ");
        const bool unit = mag == 1;
        if (i == 0 || !unit) out << (mag.str().find('/') != std::string::npos && i > 0 ? "(" + mag.str() + ")" : mag.str());
        if (i > 0) {
            if (!unit) out << "*";
            out << var;
            if (i > 1) out << "^" << i;
        }
        first = false;
    }
    return out.str();
}

namespace {

// Scales a pair of polynomials by a common factor so that all coefficients
// are coprime integers.
void normalise_pair(Polynomial& n, Polynomial& d) {
    Integer lcm_den = 1;
    for (const auto* p : {&n, &d})
        for (const auto& c : p->coeffs()) {
            const Integer den = boost::multiprecision::denominator(c);
            lcm_den = lcm_den / boost::multiprecision::gcd(lcm_den, den) * den;
        }
    Integer g = 0;
    for (const auto* p : {&n, &d})
        for (const auto& c : p->coeffs()) {
            const Integer v = boost::multiprecision::numerator(c) * (lcm_den / boost::multiprecision::denominator(c));
            g = boost::multiprecision::gcd(g, v < 0 ? Integer(-v) : v);
        }
    Rational scale = Rational(lcm_den) / Rational(g);
    if (d.leading() < 0) scale = -scale;
    n = scale * n;
    d = scale * d;
}

}  // namespace

RationalFunction::RationalFunction(Polynomial n, Polynomial d) {
    if (d.is_zero()) throw DomainError("rational function with zero denominator");
    if (n.is_zero()) {
        num = Polynomial();
        den = Polynomial::constant(1);
        return;
    }
    const Polynomial g = Polynomial::gcd(n, d);
    if (g.degree() > 0) {
        n = Polynomial::divmod(n, g).first;
        d = Polynomial::divmod(d, g).first;
    }
    normalise_pair(n, d);
    num = std::move(n);
    den = std::move(d);
}

std::string RationalFunction::str(const std::string& var) const {
    if (den.degree() == 0 && den.leading() == 1) return num.str(var);
    return "(" + num.str(var) + ")/(" + den.str(var) + ")";
}

bool equivalent(const RationalFunction& a, const RationalFunction& b) { return a.num * b.den == b.num * a.den; }

std::vector<Vector<Rational>> null_space(Matrix<Rational> m) {
    using Index = Eigen::Index;
    const Index rows = m.rows(), cols = m.cols();
    std::vector<Index> pivot_col;
    Index r = 0;
    for (Index c = 0; c < cols && r < rows; ++c) {
        Index piv = r;
        while (piv < rows && m(piv, c) == 0) ++piv;
        if (piv == rows) continue;
        if (piv != r) m.row(r).swap(m.row(piv));
        const Rational inv = Rational(1) / m(r, c);
        for (Index k = c; k < cols; ++k) m(r, k) *= inv;
        for (Index i = 0; i < rows; ++i) {
            if (i == r || m(i, c) == 0) continue;
            const Rational f = m(i, c);
            for (Index k = c; k < cols; ++k)
                if (m(r, k) != 0) m(i, k) -= f * m(r, k);
        }
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<char> is_pivot(static_cast<std::size_t>(cols), 0);
    for (Index c : pivot_col) is_pivot[static_cast<std::size_t>(c)] = 1;
    std::vector<Vector<Rational>> basis;
    for (Index f = 0; f < cols; ++f) {
        if (is_pivot[static_cast<std::size_t>(f)]) continue;
        Vector<Rational> v = Vector<Rational>::Zero(cols);
        v(f) = 1;
        for (std::size_t i = 0; i < pivot_col.size(); ++i) v(pivot_col[i]) = -m(static_cast<Index>(i), f);
        basis.push_back(std::move(v));
    }
    return basis;
}

namespace {

// Nullspace candidate through the given samples with deg P, Q <= d.
std::vector<RationalFunction> candidates(const std::vector<Rational>& xs, const std::vector<Rational>& ys,
                                         std::size_t count, int d) {
    const auto k = static_cast<Eigen::Index>(d + 1);
    Matrix<Rational> m(static_cast<Eigen::Index>(count), 2 * k);
    for (std::size_t s = 0; s < count; ++s) {
        Rational pw = 1;
        for (Eigen::Index i = 0; i < k; ++i) {
            m(static_cast<Eigen::Index>(s), i) = pw;
            m(static_cast<Eigen::Index>(s), k + i) = -ys[s] * pw;
            pw *= xs[s];
        }
    }
    std::vector<RationalFunction> out;
    for (const auto& v : null_space(std::move(m))) {
        std::vector<Rational> p(v.data(), v.data() + k), q(v.data() + k, v.data() + 2 * k);
        Polynomial qp(q);
        if (qp.is_zero()) continue;
        out.emplace_back(Polynomial(p), qp);
    }
    return out;
}

std::optional<std::size_t> first_mismatch(const RationalFunction& f, const std::vector<Rational>& xs,
                                          const std::vector<Rational>& ys) {
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const Rational q = f.den(xs[s]);
        if (q == 0 || f.num(xs[s]) / q != ys[s]) return s;
    }
    return std::nullopt;
}

}  // namespace

RationalFunction fit_rational_function(const std::vector<Rational>& xs, const std::vector<Rational>& ys,
                                       int max_degree) {
    if (xs.size() != ys.size() || xs.empty()) throw DomainError("fit: sample vectors must be non-empty and equal length");
    if (max_degree < 0) throw DomainError("fit: max degree must be non-negative");
    for (int d = 0; d <= max_degree; ++d) {
        for (const auto& f : candidates(xs, ys, xs.size(), d))
            if (!first_mismatch(f, xs, ys)) return f;
    }
    // Witness: interpolate through as many samples as the unknowns allow and
    // report the first sample the result misses.
    const std::size_t count = std::min(xs.size(), static_cast<std::size_t>(2 * max_degree + 1));
    for (const auto& f : candidates(xs, ys, count, max_degree)) {
        if (const auto miss = first_mismatch(f, xs, ys)) {
            const Rational q = f.den(xs[*miss]);
            const Rational residual = f.num(xs[*miss]) - ys[*miss] * q;
            throw FitError("no rational function of degree <= " + std::to_string(max_degree) +
                               " fits the samples; first failure at sample " + std::to_string(*miss) +
                               " (v = " + to_string(xs[*miss]) + ", residual P - yQ = " + to_string(residual) + ")",
                           *miss, residual);
        }
    }
    throw FitError("no rational function of degree <= " + std::to_string(max_degree) + " fits the samples", 0,
                   Rational(0));
}

std::optional<Rational> recognise_root(const Polynomial& p, double x, long max_den) {
    if (!std::isfinite(x)) return std::nullopt;
    // Continued-fraction convergents of x.
    Integer h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double rem = x;
    for (int step = 0; step < 64; ++step) {
        const double a = std::floor(rem);
        if (std::abs(a) > 1e15) break;
        const Integer ai(static_cast<long long>(a));
        const Integer h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > max_den) break;
        const Rational cand(h2, k2);
        if (p(cand) == 0) return cand;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const double frac = rem - a;
        if (frac < 1e-15) break;
        rem = 1.0 / frac;
    }
    return std::nullopt;
}

namespace {

int sign_at(const Polynomial& p, double x) {
    const Rational v = p(Rational(x));
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

}  // namespace

std::vector<RealRoot> positive_roots(const Polynomial& p) {
    if (p.is_zero()) throw DomainError("positive_roots of the zero polynomial");
    std::vector<RealRoot> out;
    if (p.degree() == 0) return out;
    const Polynomial sf = p.square_free();
    if (sf.degree() == 1) {
        const Rational root = -sf.coeff(0) / sf.coeff(1);
        if (root > 0) out.push_back({to_double(root), root});
        return out;
    }
    // Cauchy bound on the modulus of the roots.
    double bound = 0.0;
    for (int i = 0; i < sf.degree(); ++i) bound = std::max(bound, std::abs(to_double(Rational(sf.coeff(i) / sf.leading()))));
    bound += 1.0;
    const double lo = 1e-12;
    const int steps = 20000;
    const double ratio = std::pow(bound / lo, 1.0 / steps);
    double prev_x = lo;
    int prev_s = sign_at(sf, prev_x);
    auto push = [&](double value) {
        RealRoot root{value, recognise_root(p, value)};
        if (root.exact) root.value = to_double(*root.exact);
        out.push_back(root);
    };
    if (prev_s == 0) push(prev_x);
    for (int k = 1; k <= steps; ++k) {
        const double x = k == steps ? bound : lo * std::pow(ratio, k);
        const int s = sign_at(sf, x);
        if (s == 0) {
            push(x);
        } else if (prev_s != 0 && s != prev_s) {
            double a = prev_x, b = x;
            const int sa = prev_s;
            for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                const double mid = 0.5 * (a + b);
                if (mid <= a || mid >= b) break;
                const int sm = sign_at(sf, mid);
                if (sm == 0) {
                    a = b = mid;
                    break;
                }
                (sm == sa ? a : b) = mid;
            }
            push(0.5 * (a + b));
        }
        prev_x = x;
        prev_s = s;
    }
    return out;
}

}  // namespace fractal
