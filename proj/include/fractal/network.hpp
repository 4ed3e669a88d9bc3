#pragma once

#include "fractal/scalar.hpp"
#include "fractal/structure.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace fractal {

/// Label of an edge with respect to a one-parameter family template. `mixed`
/// marks a vertex pair that receives contributions from both classes.
enum class EdgeClass : std::uint8_t { none = 0, one = 1, vee = 2, mixed = 3 };

std::string to_string(EdgeClass c);
inline EdgeClass merge(EdgeClass a, EdgeClass b) {
    if (a == EdgeClass::none) return b;
    if (b == EdgeClass::none || a == b) return a;
    return EdgeClass::mixed;
}
inline bool carries_vee(EdgeClass c) { return c == EdgeClass::vee || c == EdgeClass::mixed; }

/// Symmetric conductance network. Only off-diagonal conductances are stored;
/// the generator diagonal a(x,x) = -sum_y a(x,y) is implied.
template <class Scalar>
class ConductanceNetwork {
public:
    using Index = Eigen::Index;

    ConductanceNetwork() = default;
    explicit ConductanceNetwork(Index n)
        : c_(Matrix<Scalar>::Zero(n, n)), cls_(Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n)) {}

    /// Builds a network from a conductance matrix. The diagonal is ignored;
    /// throws DomainError on asymmetric or negative off-diagonal entries.
    static ConductanceNetwork from_matrix(const Matrix<Scalar>& c) {
        if (c.rows() != c.cols()) throw DomainError("conductance matrix must be square");
        ConductanceNetwork net(c.rows());
        for (Index i = 0; i < c.rows(); ++i) {
            for (Index j = i + 1; j < c.cols(); ++j) {
                if (!nearly_equal<Scalar>(c(i, j), c(j, i), 1e-12))
                    throw DomainError("conductance matrix is not symmetric");
                if (c(i, j) < 0) throw DomainError("conductances must be non-negative");
                net.set(i, j, c(i, j));
            }
        }
        return net;
    }

    Index size() const { return c_.rows(); }
    const Scalar& conductance(Index i, Index j) const { return c_(i, j); }
    EdgeClass edge_class(Index i, Index j) const { return static_cast<EdgeClass>(cls_(i, j)); }
    const Matrix<Scalar>& conductances() const { return c_; }

    void set(Index i, Index j, const Scalar& value, EdgeClass cls = EdgeClass::none) {
        c_(i, j) = value;
        c_(j, i) = value;
        const auto label = static_cast<std::uint8_t>(value == Scalar(0) ? EdgeClass::none : cls);
        cls_(i, j) = label;
        cls_(j, i) = label;
    }
    void add(Index i, Index j, const Scalar& value, EdgeClass cls = EdgeClass::none) {
        if (i == j || value == Scalar(0)) return;
        const Scalar sum = c_(i, j) + value;
        const EdgeClass label = merge(edge_class(i, j), cls);
        set(i, j, sum, label);
    }

    Scalar degree(Index i) const {
        Scalar d(0);
        for (Index j = 0; j < size(); ++j) d += c_(i, j);
        return d;
    }

    /// Generator matrix A: off-diagonal conductances, diagonal minus row sums.
    Matrix<Scalar> generator() const {
        Matrix<Scalar> a = c_;
        for (Index i = 0; i < size(); ++i) a(i, i) = -degree(i);
        return a;
    }
    Matrix<Scalar> laplacian() const { return -generator(); }

    ConductanceNetwork scaled(const Scalar& factor) const {
        ConductanceNetwork out = *this;
        out.c_ *= factor;
        if (factor == Scalar(0)) out.cls_.setZero();
        return out;
    }

    template <class Other>
    ConductanceNetwork<Other> cast() const {
        ConductanceNetwork<Other> out(size());
        for (Index i = 0; i < size(); ++i)
            for (Index j = i + 1; j < size(); ++j) {
                if constexpr (std::is_same_v<Other, double>) out.set(i, j, to_double(c_(i, j)), edge_class(i, j));
                else out.set(i, j, Other(c_(i, j)), edge_class(i, j));
            }
        return out;
    }

    /// Vertex pairs with positive conductance, i < j.
    std::vector<std::pair<Index, Index>> edges() const {
        std::vector<std::pair<Index, Index>> out;
        for (Index i = 0; i < size(); ++i)
            for (Index j = i + 1; j < size(); ++j)
                if (c_(i, j) != Scalar(0)) out.emplace_back(i, j);
        return out;
    }

    /// Largest relative deviation between two networks on the same vertex set.
    double max_relative_deviation(const ConductanceNetwork& other) const {
        if (other.size() != size()) return std::numeric_limits<double>::infinity();
        double scale = 0.0;
        for (Index i = 0; i < size(); ++i)
            for (Index j = 0; j < size(); ++j) scale = std::max(scale, std::abs(to_double(c_(i, j))));
        if (scale == 0.0) scale = 1.0;
        double dev = 0.0;
        for (Index i = 0; i < size(); ++i)
            for (Index j = 0; j < size(); ++j)
                dev = std::max(dev, std::abs(to_double(Scalar(c_(i, j) - other.c_(i, j)))) / scale);
        return dev;
    }

    friend bool operator==(const ConductanceNetwork& a, const ConductanceNetwork& b) {
        return a.size() == b.size() && a.c_ == b.c_;
    }

private:
    Matrix<Scalar> c_;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> cls_;
};

/// Exact equality for rationals, relative tolerance for floats.
template <class Scalar>
bool same_network(const ConductanceNetwork<Scalar>& a, const ConductanceNetwork<Scalar>& b, double rel_tol = 1e-9) {
    if constexpr (is_exact_v<Scalar>) {
        (void)rel_tol;
        return a == b;
    } else {
        return a.max_relative_deviation(b) <= rel_tol;
    }
}

/// E(f,f) = 1/2 sum a(x,y) (f(x) - f(y))^2.
template <class Scalar>
Scalar energy(const ConductanceNetwork<Scalar>& net, const Vector<Scalar>& f) {
    if (f.size() != net.size()) throw DomainError("energy: function size does not match network");
    Scalar e(0);
    for (Eigen::Index i = 0; i < net.size(); ++i)
        for (Eigen::Index j = i + 1; j < net.size(); ++j) {
            const Scalar& c = net.conductance(i, j);
            if (c == Scalar(0)) continue;
            const Scalar d = f(i) - f(j);
            e += c * d * d;
        }
    return e;
}

/// Connected-component label per vertex (components numbered by least member).
template <class Scalar>
std::vector<int> components(const ConductanceNetwork<Scalar>& net) {
    const auto n = static_cast<std::size_t>(net.size());
    std::vector<int> comp(n, -1);
    int next = 0;
    std::vector<Eigen::Index> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = next;
        stack.assign(1, static_cast<Eigen::Index>(s));
        while (!stack.empty()) {
            const Eigen::Index x = stack.back();
            stack.pop_back();
            for (Eigen::Index y = 0; y < net.size(); ++y)
                if (net.conductance(x, y) != Scalar(0) && comp[static_cast<std::size_t>(y)] < 0) {
                    comp[static_cast<std::size_t>(y)] = next;
                    stack.push_back(y);
                }
        }
        ++next;
    }
    return comp;
}

/// Induced subnetwork on the given vertices (in the given order).
template <class Scalar>
ConductanceNetwork<Scalar> restrict_to(const ConductanceNetwork<Scalar>& net, std::span<const int> vertices) {
    const auto k = static_cast<Eigen::Index>(vertices.size());
    ConductanceNetwork<Scalar> out(k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = a + 1; b < k; ++b)
            out.set(a, b, net.conductance(vertices[a], vertices[b]), net.edge_class(vertices[a], vertices[b]));
    return out;
}

inline constexpr double kDefaultSnap = 1e-13;

/// Trace onto `keep` (output vertex i is keep[i]): the Schur complement
/// A_HH - A_HI A_II^{-1} A_IH, computed by eliminating interior vertices one at
/// a time in increasing id order. Throws DegenerateTrace when an interior
/// component has no conductance path to `keep`. Float results are snapped to
/// zero below `snap` times the largest conductance.
template <class Scalar>
ConductanceNetwork<Scalar> trace(const ConductanceNetwork<Scalar>& net, std::span<const int> keep,
                                 double snap = kDefaultSnap) {
    using Index = Eigen::Index;
    const Index n = net.size();
    std::vector<char> kept(static_cast<std::size_t>(n), 0);
    for (int v : keep) {
        if (v < 0 || v >= n) throw DomainError("trace: vertex out of range");
        if (kept[static_cast<std::size_t>(v)]) throw DomainError("trace: duplicate vertex in kept set");
        kept[static_cast<std::size_t>(v)] = 1;
    }
    Matrix<Scalar> c = net.conductances();
    std::vector<char> alive(static_cast<std::size_t>(n), 1);
    std::vector<Index> nb;
    for (Index k = 0; k < n; ++k) {
        if (kept[static_cast<std::size_t>(k)]) continue;
        alive[static_cast<std::size_t>(k)] = 0;
        nb.clear();
        Scalar d(0);
        for (Index j = 0; j < n; ++j)
            if (alive[static_cast<std::size_t>(j)] && c(k, j) != Scalar(0)) {
                nb.push_back(j);
                d += c(k, j);
            }
        if (d == Scalar(0)) throw DegenerateTrace("degenerate trace: interior vertex " + std::to_string(k) +
                                                  " has no conductance path to the kept set");
        for (std::size_t a = 0; a < nb.size(); ++a)
            for (std::size_t b = a + 1; b < nb.size(); ++b) {
                const Index i = nb[a], j = nb[b];
                const Scalar add = c(i, k) * c(k, j) / d;
                c(i, j) += add;
                c(j, i) = c(i, j);
            }
    }
    const auto h = static_cast<Index>(keep.size());
    ConductanceNetwork<Scalar> out(h);
    double cmax = 0.0;
    if constexpr (!is_exact_v<Scalar>) {
        for (Index a = 0; a < h; ++a)
            for (Index b = a + 1; b < h; ++b) cmax = std::max(cmax, std::abs(to_double(c(keep[a], keep[b]))));
    }
    for (Index a = 0; a < h; ++a)
        for (Index b = a + 1; b < h; ++b) {
            Scalar value = c(keep[a], keep[b]);
            if constexpr (!is_exact_v<Scalar>) {
                if (std::abs(value) < snap * cmax) value = 0;
            }
            out.set(a, b, value);
        }
    return out;
}

/// Effective resistance between disjoint vertex sets; +inf when no
/// conductance path joins them.
template <class Scalar>
Extended<Scalar> effective_resistance_sets(const ConductanceNetwork<Scalar>& net, std::span<const int> h1,
                                           std::span<const int> h2) {
    if (h1.empty() || h2.empty()) throw DomainError("effective resistance needs non-empty sets");
    for (int a : h1)
        if (std::find(h2.begin(), h2.end(), a) != h2.end()) throw DomainError("effective resistance needs disjoint sets");
    // Components that touch neither set do not affect the minimisation.
    const auto comp = components(net);
    std::vector<char> relevant(comp.size(), 0);
    for (int a : h1) relevant[static_cast<std::size_t>(comp[static_cast<std::size_t>(a)])] = 1;
    for (int a : h2) relevant[static_cast<std::size_t>(comp[static_cast<std::size_t>(a)])] = 1;
    std::vector<int> live;
    for (std::size_t v = 0; v < comp.size(); ++v)
        if (relevant[static_cast<std::size_t>(comp[v])]) live.push_back(static_cast<int>(v));
    auto position = [&](int v) {
        return static_cast<int>(std::lower_bound(live.begin(), live.end(), v) - live.begin());
    };
    const ConductanceNetwork<Scalar> sub = restrict_to(net, live);
    std::vector<int> keep;
    for (int a : h1) keep.push_back(position(a));
    for (int a : h2) keep.push_back(position(a));
    const ConductanceNetwork<Scalar> t = trace(sub, keep, 0.0);
    Scalar cross(0);
    for (std::size_t a = 0; a < h1.size(); ++a)
        for (std::size_t b = h1.size(); b < keep.size(); ++b)
            cross += t.conductance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    if (cross == Scalar(0)) return Extended<Scalar>::inf();
    return Extended<Scalar>::finite(Scalar(1) / cross);
}

template <class Scalar>
Extended<Scalar> effective_resistance(const ConductanceNetwork<Scalar>& net, int x, int y) {
    if (x == y) throw DomainError("effective resistance needs distinct vertices");
    const int a[1] = {x};
    const int b[1] = {y};
    return effective_resistance_sets<Scalar>(net, a, b);
}

/// R^n: places a copy of `base` (on the boundary labels, in order) on every
/// n-cell with weight r_w^{-1}; edge classes propagate from the base edge.
template <class Scalar>
ConductanceNetwork<Scalar> replicate(const SelfSimilarStructure& s, const LevelGraph& g,
                                     const ConductanceNetwork<Scalar>& base) {
    if (base.size() != s.b()) throw DomainError("replicate: base network must live on the boundary labels");
    ConductanceNetwork<Scalar> out(static_cast<Eigen::Index>(g.size()));
    const auto base_edges = base.edges();
    for (std::size_t w = 0; w < g.num_cells(); ++w) {
        const Scalar weight = scalar_cast<Scalar>(Rational(1) / word_resistance(s, w, g.level()));
        const auto cell = g.cell(w);
        for (const auto& [u, x] : base_edges)
            out.add(cell[static_cast<std::size_t>(u)], cell[static_cast<std::size_t>(x)],
                    Scalar(weight * base.conductance(u, x)), base.edge_class(u, x));
    }
    return out;
}

template <class Scalar>
ConductanceNetwork<Scalar> replicate(const SelfSimilarStructure& s, const ConductanceNetwork<Scalar>& base, int n) {
    return replicate(s, build_level(s, n), base);
}

/// Lambda = trace(R(net), F^0). Interior components cut off from F^0 carry no
/// energy at the infimum and are dropped first.
template <class Scalar>
ConductanceNetwork<Scalar> renormalize(const SelfSimilarStructure& s, const ConductanceNetwork<Scalar>& base) {
    const LevelGraph g = build_level(s, 1);
    const auto net = replicate(s, g, base);
    const auto comp = components(net);
    std::vector<char> anchored(static_cast<std::size_t>(net.size()), 0);
    for (int v : g.boundary_vertices()) anchored[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] = 1;
    std::vector<int> live(g.boundary_vertices().begin(), g.boundary_vertices().end());
    for (Eigen::Index v = 0; v < net.size(); ++v)
        if (anchored[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] &&
            std::find(live.begin(), live.end(), static_cast<int>(v)) == live.end())
            live.push_back(static_cast<int>(v));
    std::vector<int> keep(g.boundary_vertices().size());
    std::iota(keep.begin(), keep.end(), 0);
    return trace(restrict_to(net, live), keep);
}

/// Solves L_II x = rhs, where L is the graph Laplacian and I the listed
/// vertices (all other vertices are grounded). Exact Gaussian elimination for
/// rationals; sparse Cholesky for floats.
template <class Scalar>
Vector<Scalar> solve_grounded(const ConductanceNetwork<Scalar>& net, std::span<const int> interior,
                              const Vector<Scalar>& rhs) {
    using Index = Eigen::Index;
    const auto k = static_cast<Index>(interior.size());
    if (rhs.size() != k) throw DomainError("solve_grounded: rhs size mismatch");
    if (k == 0) return Vector<Scalar>(0);
    std::vector<Index> pos(static_cast<std::size_t>(net.size()), -1);
    for (Index a = 0; a < k; ++a) pos[static_cast<std::size_t>(interior[a])] = a;
    if constexpr (is_exact_v<Scalar>) {
        Matrix<Scalar> m = Matrix<Scalar>::Zero(k, k);
        for (Index a = 0; a < k; ++a) {
            const int x = interior[a];
            m(a, a) = net.degree(x);
            for (Index y = 0; y < net.size(); ++y) {
                const Index b = pos[static_cast<std::size_t>(y)];
                if (b >= 0 && y != x) m(a, b) = -net.conductance(x, y);
            }
        }
        Vector<Scalar> x = rhs;
        for (Index p = 0; p < k; ++p) {
            Index piv = p;
            while (piv < k && m(piv, p) == Scalar(0)) ++piv;
            if (piv == k) throw DegenerateTrace("singular grounded Laplacian");
            if (piv != p) {
                m.row(p).swap(m.row(piv));
                std::swap(x(p), x(piv));
            }
            for (Index r = p + 1; r < k; ++r) {
                if (m(r, p) == Scalar(0)) continue;
                const Scalar f = m(r, p) / m(p, p);
                for (Index c = p; c < k; ++c)
                    if (m(p, c) != Scalar(0)) m(r, c) -= f * m(p, c);
                x(r) -= f * x(p);
            }
        }
        for (Index p = k - 1; p >= 0; --p) {
            Scalar acc = x(p);
            for (Index c = p + 1; c < k; ++c)
                if (m(p, c) != Scalar(0)) acc -= m(p, c) * x(c);
            x(p) = acc / m(p, p);
        }
        return x;
    } else {
        std::vector<Eigen::Triplet<double>> triplets;
        for (Index a = 0; a < k; ++a) {
            const int x = interior[a];
            double d = 0.0;
            for (Index y = 0; y < net.size(); ++y) {
                const double c = net.conductance(x, y);
                if (c == 0.0) continue;
                d += c;
                const Index b = pos[static_cast<std::size_t>(y)];
                if (b >= 0) triplets.emplace_back(a, b, -c);
            }
            triplets.emplace_back(a, a, d);
        }
        Eigen::SparseMatrix<double> m(k, k);
        m.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(m);
        if (solver.info() != Eigen::Success) throw DegenerateTrace("singular grounded Laplacian");
        Vector<double> x = solver.solve(rhs);
        if (solver.info() != Eigen::Success) throw DegenerateTrace("grounded Laplacian solve failed");
        return x;
    }
}

/// Harmonic extension from V_m (embedded by `embedding`) to the vertices of
/// the fine network. Requires trace(fine, embedding) to equal `coarse`.
template <class Scalar>
Vector<Scalar> harmonic_extend(const ConductanceNetwork<Scalar>& coarse, const ConductanceNetwork<Scalar>& fine,
                               std::span<const int> embedding, const Vector<Scalar>& f) {
    if (f.size() != coarse.size() || static_cast<Eigen::Index>(embedding.size()) != coarse.size())
        throw DomainError("harmonic_extend: size mismatch");
    if (!same_network(trace(fine, embedding), coarse))
        throw DomainError("harmonic_extend: fine network does not trace to the coarse network");
    const Eigen::Index n = fine.size();
    Vector<Scalar> out = Vector<Scalar>::Zero(n);
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    for (std::size_t a = 0; a < embedding.size(); ++a) {
        out(embedding[a]) = f(static_cast<Eigen::Index>(a));
        fixed[static_cast<std::size_t>(embedding[a])] = 1;
    }
    std::vector<int> interior;
    for (Eigen::Index v = 0; v < n; ++v)
        if (!fixed[static_cast<std::size_t>(v)]) interior.push_back(static_cast<int>(v));
    Vector<Scalar> rhs = Vector<Scalar>::Zero(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t a = 0; a < interior.size(); ++a)
        for (int b : embedding) rhs(static_cast<Eigen::Index>(a)) += fine.conductance(interior[a], b) * out(b);
    const Vector<Scalar> x = solve_grounded(fine, interior, rhs);
    for (std::size_t a = 0; a < interior.size(); ++a) out(interior[a]) = x(static_cast<Eigen::Index>(a));
    return out;
}

/// Ascending eigenvalues of -L, L f(x) = mu(x)^{-1} sum_y a(x,y)(f(y) - f(x)).
Vector<double> spectrum(const ConductanceNetwork<double>& net, const Vector<double>& measure);

}  // namespace fractal
