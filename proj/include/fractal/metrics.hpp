#pragma once

#include "fractal/family.hpp"
#include "fractal/network.hpp"
#include "fractal/shorting.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace fractal {

/// Finite metric space given by its distance matrix. Construction validates
/// the metric axioms (exact for rationals, 1e-9 relative slack for floats).
template <class Scalar>
class FiniteMetricSpace {
public:
    FiniteMetricSpace() = default;
    FiniteMetricSpace(Matrix<Scalar> d, std::string provenance) : d_(std::move(d)), provenance_(std::move(provenance)) {
        validate();
    }

    Eigen::Index size() const { return d_.rows(); }
    const Scalar& operator()(Eigen::Index i, Eigen::Index j) const { return d_(i, j); }
    const Matrix<Scalar>& distances() const { return d_; }
    const std::string& provenance() const { return provenance_; }

    Scalar diameter() const {
        Scalar out(0);
        for (Eigen::Index i = 0; i < size(); ++i)
            for (Eigen::Index j = 0; j < size(); ++j) out = std::max<Scalar>(out, d_(i, j));
        return out;
    }

private:
    void validate() const {
        if (d_.rows() != d_.cols()) throw DomainError("distance matrix must be square");
        const double slack = is_exact_v<Scalar> ? 0.0 : 1e-9 * to_double(diameter());
        for (Eigen::Index i = 0; i < size(); ++i) {
            if (d_(i, i) != Scalar(0)) throw DomainError("metric: d(x,x) must vanish");
            for (Eigen::Index j = 0; j < size(); ++j) {
                if (!nearly_equal<Scalar>(d_(i, j), d_(j, i), 1e-12)) throw DomainError("metric: not symmetric");
                if (i != j && !(d_(i, j) > Scalar(0))) throw DomainError("metric: distinct points at distance 0");
                for (Eigen::Index k = 0; k < size(); ++k)
                    if (to_double(Scalar(d_(i, k) - d_(i, j) - d_(j, k))) > slack)
                        throw DomainError("metric: triangle inequality fails at (" + std::to_string(i) + "," +
                                          std::to_string(j) + "," + std::to_string(k) + ")");
            }
        }
    }

    Matrix<Scalar> d_;
    std::string provenance_;
};

/// Inverse of the Laplacian grounded at vertex 0 (row and column 0 zero).
template <class Scalar>
Matrix<Scalar> grounded_inverse(const ConductanceNetwork<Scalar>& net) {
    const Eigen::Index n = net.size();
    Matrix<Scalar> g = Matrix<Scalar>::Zero(n, n);
    if (n <= 1) return g;
    const Matrix<Scalar> l = net.laplacian().bottomRightCorner(n - 1, n - 1);
    if constexpr (is_exact_v<Scalar>) {
        std::vector<int> interior(static_cast<std::size_t>(n - 1));
        std::iota(interior.begin(), interior.end(), 1);
        for (Eigen::Index c = 0; c < n - 1; ++c) {
            Vector<Scalar> e = Vector<Scalar>::Zero(n - 1);
            e(c) = 1;
            g.col(c + 1).tail(n - 1) = solve_grounded(net, interior, e);
        }
    } else {
        Eigen::LDLT<Matrix<double>> ldlt(l);
        if (ldlt.info() != Eigen::Success) throw DomainError("grounded Laplacian factorisation failed");
        g.bottomRightCorner(n - 1, n - 1) = ldlt.solve(Matrix<double>::Identity(n - 1, n - 1));
    }
    return g;
}

/// All-pairs resistance metric of a connected network.
template <class Scalar>
FiniteMetricSpace<Scalar> resistance_space(const ConductanceNetwork<Scalar>& net, std::string provenance = "resistance") {
    const auto comp = components(net);
    if (std::any_of(comp.begin(), comp.end(), [](int c) { return c != 0; }))
        throw DomainError("resistance_space needs a connected network");
    const Matrix<Scalar> g = grounded_inverse(net);
    const Eigen::Index n = net.size();
    Matrix<Scalar> d = Matrix<Scalar>::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Scalar r = g(i, i) + g(j, j) - g(i, j) - g(j, i);
            if constexpr (!is_exact_v<Scalar>) r = std::max(r, 0.0);
            d(i, j) = r;
            d(j, i) = r;
        }
    return FiniteMetricSpace<Scalar>(std::move(d), std::move(provenance));
}

/// sup |d1(x,y) - d2(f x, f y)| for a surjection f.
template <class Scalar>
Scalar distortion(const FiniteMetricSpace<Scalar>& m1, const FiniteMetricSpace<Scalar>& m2, const std::vector<int>& f) {
    if (static_cast<Eigen::Index>(f.size()) != m1.size()) throw DomainError("distortion: map must be defined on every point");
    std::vector<char> hit(static_cast<std::size_t>(m2.size()), 0);
    for (int y : f) {
        if (y < 0 || y >= m2.size()) throw DomainError("distortion: map leaves the target space");
        hit[static_cast<std::size_t>(y)] = 1;
    }
    if (std::find(hit.begin(), hit.end(), 0) != hit.end()) throw DomainError("distortion: map is not surjective");
    Scalar out(0);
    for (Eigen::Index i = 0; i < m1.size(); ++i)
        for (Eigen::Index j = i + 1; j < m1.size(); ++j)
            out = std::max<Scalar>(out, abs_diff<Scalar>(m1(i, j), m2(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(j)])));
    return out;
}

template <class Scalar>
Scalar gh_upper_bound(const FiniteMetricSpace<Scalar>& m1, const FiniteMetricSpace<Scalar>& m2, const std::vector<int>& f) {
    return distortion(m1, m2, f) / Scalar(2);
}

/// Exact Gromov-Hausdorff distance of spaces with at most 7 points, as half
/// the least distortion over all correspondences.
template <class Scalar>
Scalar gh_exact_small(const FiniteMetricSpace<Scalar>& m1, const FiniteMetricSpace<Scalar>& m2);

struct ConvergenceRow {
    double v = 0.0;
    double distortion = 0.0;
    double gh_bound = 0.0;
};

/// dis p_{v,n} between G^{v,n} and H^n, and the GH bound, for each v. The
/// last row (v = inf) is the quotient compared with itself.
template <class Scalar>
std::vector<ConvergenceRow> convergence_table(const FamilyModel& model, int n, const std::vector<Scalar>& vs);

/// Exact dis p_{v,n} in the scalar of choice.
template <class Scalar>
Scalar projection_distortion(const FamilyModel& model, const LevelGraph& g, const QuotientNetwork& q, const Scalar& v);

struct DiameterRow {
    std::size_t word = 0;
    double diameter = 0.0;
};

struct DiameterReport {
    std::vector<DiameterRow> cells;
    double sup_diameter = 0.0;
    double bound = 0.0;
    std::size_t violations = 0;
};

/// Resistance diameters of the n-cells of G^v (vertices of each cell at level
/// n + extra) against r_max^n rho_n(v)^{-1} sup_v' diam(G^{v'}).
DiameterReport diameter_report(const FamilyModel& model, double v, int n, int extra = 2);

struct AmbientCheck {
    std::size_t points = 0;
    std::vector<int> stage;  ///< stage k of each v (-1 when before the first stage)
    bool metric = false;
    std::string failure;
};

/// Finite-stage disjoint-union metric on G^{v_1,N}, ..., G^{v_s,N} and H^N
/// with n_k = min(k, N) and mesh c/(2(k+1)).
AmbientCheck ambient_metric_check(const FamilyModel& model, const std::vector<double>& vs, int level);

}  // namespace fractal
