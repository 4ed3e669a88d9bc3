#include "fractal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace fractal {

namespace {

// Backtracking search for a correspondence of distortion <= delta: every x
// gets a partner f(x), every y a partner g(y), and all chosen pairs must be
// mutually compatible.
class CorrespondenceSearch {
public:
    CorrespondenceSearch(std::vector<std::vector<char>> compatible, int n1, int n2)
        : ok_(std::move(compatible)), n1_(n1), n2_(n2) {}

    bool feasible() {
        chosen_.clear();
        return assign(0);
    }

private:
    int pair_id(int x, int y) const { return x * n2_ + y; }

    bool fits(int id) const {
        for (int c : chosen_)
            if (!ok_[static_cast<std::size_t>(id)][static_cast<std::size_t>(c)]) return false;
        return true;
    }

    bool assign(int slot) {
        if (slot == n1_ + n2_) return true;
        for (int partner = 0; partner < (slot < n1_ ? n2_ : n1_); ++partner) {
            const int id = slot < n1_ ? pair_id(slot, partner) : pair_id(partner, slot - n1_);
            if (!fits(id)) continue;
            chosen_.push_back(id);
            if (assign(slot + 1)) return true;
            chosen_.pop_back();
        }
        return false;
    }

    std::vector<std::vector<char>> ok_;
    int n1_, n2_;
    std::vector<int> chosen_;
};

}  // namespace

template <class Scalar>
Scalar gh_exact_small(const FiniteMetricSpace<Scalar>& m1, const FiniteMetricSpace<Scalar>& m2) {
    const auto n1 = static_cast<int>(m1.size()), n2 = static_cast<int>(m2.size());
    if (n1 > 7 || n2 > 7) throw DomainError("gh_exact_small supports at most 7 points per space");
    if (n1 == 0 || n2 == 0) throw DomainError("gh_exact_small needs non-empty spaces");
    const int pairs = n1 * n2;
    std::vector<std::vector<Scalar>> gap(static_cast<std::size_t>(pairs), std::vector<Scalar>(static_cast<std::size_t>(pairs)));
    std::vector<Scalar> candidates{Scalar(0)};
    for (int a = 0; a < pairs; ++a)
        for (int b = 0; b < pairs; ++b) {
            const Scalar g = abs_diff<Scalar>(m1(a / n2, b / n2), m2(a % n2, b % n2));
            gap[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = g;
            candidates.push_back(g);
        }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    auto feasible = [&](const Scalar& delta) {
        std::vector<std::vector<char>> ok(static_cast<std::size_t>(pairs), std::vector<char>(static_cast<std::size_t>(pairs)));
        for (int a = 0; a < pairs; ++a)
            for (int b = 0; b < pairs; ++b)
                ok[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                    gap[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] <= delta;
        return CorrespondenceSearch(std::move(ok), n1, n2).feasible();
    };
    std::size_t lo = 0, hi = candidates.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (feasible(candidates[mid])) hi = mid;
        else lo = mid + 1;
    }
    return candidates[lo] / Scalar(2);
}

template double gh_exact_small<double>(const FiniteMetricSpace<double>&, const FiniteMetricSpace<double>&);
template Rational gh_exact_small<Rational>(const FiniteMetricSpace<Rational>&, const FiniteMetricSpace<Rational>&);

template <class Scalar>
Scalar projection_distortion(const FamilyModel& model, const LevelGraph& g, const QuotientNetwork& q, const Scalar& v) {
    const auto gv = resistance_space(level_form<Scalar>(model, g, v), "G^{v,n}");
    const auto hn = resistance_space(q.network.template cast<Scalar>(), "H^n");
    return distortion(gv, hn, q.partition.class_of);
}

template double projection_distortion<double>(const FamilyModel&, const LevelGraph&, const QuotientNetwork&, const double&);
template Rational projection_distortion<Rational>(const FamilyModel&, const LevelGraph&, const QuotientNetwork&,
                                                  const Rational&);

template <class Scalar>
std::vector<ConvergenceRow> convergence_table(const FamilyModel& model, int n, const std::vector<Scalar>& vs) {
    const LevelGraph g = build_level(model.structure(), n);
    const QuotientNetwork q = quotient(model, g);
    std::vector<ConvergenceRow> rows;
    for (const auto& v : vs) {
        const double d = to_double(projection_distortion<Scalar>(model, g, q, v));
        rows.push_back({to_double(v), d, d / 2.0});
    }
    const auto hn = resistance_space(q.network, "H^n");
    std::vector<int> identity(static_cast<std::size_t>(hn.size()));
    std::iota(identity.begin(), identity.end(), 0);
    const double self = to_double(distortion(hn, hn, identity));
    rows.push_back({std::numeric_limits<double>::infinity(), self, self / 2.0});
    return rows;
}

template std::vector<ConvergenceRow> convergence_table<double>(const FamilyModel&, int, const std::vector<double>&);
template std::vector<ConvergenceRow> convergence_table<Rational>(const FamilyModel&, int, const std::vector<Rational>&);

namespace {

double resistance_diameter(const ConductanceNetwork<double>& net) {
    return resistance_space(net).diameter();
}

}  // namespace

DiameterReport diameter_report(const FamilyModel& model, double v, int n, int extra) {
    if (n < 0 || extra < 0) throw DomainError("diameter_report needs n, extra >= 0");
    const auto& s = model.structure();
    DiameterReport rep;
    std::vector<double> params = probe_grid(model);
    for (int j = 0; j <= n; ++j) params.push_back(model.alpha_inverse(v, j));
    const LevelGraph ge = build_level(s, extra);
    for (double p : params) rep.sup_diameter = std::max(rep.sup_diameter, resistance_diameter(level_form<double>(model, ge, p)));
    rep.bound = std::pow(to_double(s.r_max()), n) / model.rho_n(v, n) * rep.sup_diameter;

    const LevelGraph g = build_level(s, n + extra);
    const auto metric = resistance_space(level_form<double>(model, g, v));
    const std::size_t sub = word_count(s.n_cells, extra);
    for (std::size_t w = 0; w < word_count(s.n_cells, n); ++w) {
        std::set<int> verts;
        for (std::size_t t = 0; t < sub; ++t)
            for (int x : g.cell(w * sub + t)) verts.insert(x);
        double diam = 0.0;
        for (int a : verts)
            for (int b : verts) diam = std::max(diam, metric(a, b));
        rep.cells.push_back({w, diam});
        if (diam > rep.bound * (1.0 + 1e-9)) ++rep.violations;
    }
    return rep;
}

AmbientCheck ambient_metric_check(const FamilyModel& model, const std::vector<double>& vs_in, int level) {
    if (vs_in.empty()) throw DomainError("ambient_metric_check needs at least one v");
    std::vector<double> vs = vs_in;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    const auto& s = model.structure();
    const int top = level;
    std::vector<LevelGraph> graphs;
    std::vector<QuotientNetwork> quotients;
    for (int k = 0; k <= top; ++k) {
        graphs.push_back(build_level(s, k));
        quotients.push_back(quotient(model, graphs.back()));
    }
    auto dis = [&](double v, int k) { return projection_distortion<double>(model, graphs[static_cast<std::size_t>(k)],
                                                                           quotients[static_cast<std::size_t>(k)], v); };
    double c = 0.0;
    for (double v : vs) c = std::max(c, dis(v, 0));
    if (c <= 0.0) throw DomainError("ambient_metric_check: p_{v,0} is an isometry, mesh constant vanishes");

    // Stage thresholds: v_0 is the smallest v; v_k the smallest listed v with
    // dis p_{v',n_k} <= c/(k+1) for every listed v' >= v, and v_k >= v_{k-1} + 1.
    std::vector<double> thresholds{vs.front()};
    for (int k = 1; k <= top; ++k) {
        std::optional<double> found;
        for (std::size_t i = 0; i < vs.size() && !found; ++i) {
            if (vs[i] < thresholds.back() + 1.0) continue;
            bool all = true;
            for (std::size_t j = i; j < vs.size() && all; ++j) all = dis(vs[j], k) <= c / (k + 1);
            if (all) found = vs[i];
        }
        if (!found) break;
        thresholds.push_back(*found);
    }

    AmbientCheck out;
    const auto& hq = quotients.back();
    const auto h = resistance_space(hq.network.cast<double>(), "H^N");
    std::vector<FiniteMetricSpace<double>> gs;
    std::vector<std::vector<int>> vertex_of;  // level-n_k vertex -> level-N vertex
    std::vector<std::vector<int>> class_at;   // level-n_k vertex -> class of H^N
    for (double v : vs) {
        int k = 0;
        while (k + 1 < static_cast<int>(thresholds.size()) && v >= thresholds[static_cast<std::size_t>(k + 1)]) ++k;
        out.stage.push_back(k);
        gs.push_back(resistance_space(level_form<double>(model, graphs.back(), v), "G^{v,N}"));
        const auto& gk = graphs[static_cast<std::size_t>(k)];
        const auto emb = embed_level(s, gk, graphs.back());
        const auto cls = class_embedding(s, gk, quotients[static_cast<std::size_t>(k)].partition, graphs.back(),
                                         hq.partition);
        std::vector<int> to_class(gk.size());
        for (std::size_t x = 0; x < gk.size(); ++x)
            to_class[x] = cls[static_cast<std::size_t>(quotients[static_cast<std::size_t>(k)].partition.class_of[x])];
        vertex_of.push_back(emb);
        class_at.push_back(std::move(to_class));
    }

    const auto nh = static_cast<Eigen::Index>(h.size());
    const auto ng = static_cast<Eigen::Index>(graphs.back().size());
    const auto ns = static_cast<Eigen::Index>(vs.size());
    const Eigen::Index total = ns * ng + nh;
    out.points = static_cast<std::size_t>(total);
    Matrix<double> d = Matrix<double>::Zero(total, total);
    const Eigen::Index hbase = ns * ng;
    for (Eigen::Index a = 0; a < nh; ++a)
        for (Eigen::Index b = 0; b < nh; ++b) d(hbase + a, hbase + b) = h(a, b);
    // G^v to H.
    Matrix<double> gh(ns * ng, nh);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const auto k = static_cast<std::size_t>(out.stage[static_cast<std::size_t>(i)]);
        const double mesh = c / (2.0 * static_cast<double>(k + 1));
        const auto& gm = gs[static_cast<std::size_t>(i)];
        for (Eigen::Index x = 0; x < ng; ++x) {
            for (Eigen::Index y = 0; y < nh; ++y) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t xp = 0; xp < vertex_of[static_cast<std::size_t>(i)].size(); ++xp) {
                    const int fine = vertex_of[static_cast<std::size_t>(i)][xp];
                    best = std::min(best, gm(x, fine) + mesh + h(class_at[static_cast<std::size_t>(i)][xp], y));
                }
                gh(i * ng + x, y) = best;
            }
            for (Eigen::Index x2 = 0; x2 < ng; ++x2) d(i * ng + x, i * ng + x2) = gm(x, x2);
        }
    }
    for (Eigen::Index p = 0; p < ns * ng; ++p)
        for (Eigen::Index y = 0; y < nh; ++y) {
            d(p, hbase + y) = gh(p, y);
            d(hbase + y, p) = gh(p, y);
        }
    // Between distinct copies, through H.
    for (Eigen::Index i = 0; i < ns; ++i)
        for (Eigen::Index j = 0; j < ns; ++j) {
            if (i == j) continue;
            for (Eigen::Index x = 0; x < ng; ++x)
                for (Eigen::Index x2 = 0; x2 < ng; ++x2) {
                    double best = std::numeric_limits<double>::infinity();
                    for (Eigen::Index y = 0; y < nh; ++y) best = std::min(best, gh(i * ng + x, y) + gh(j * ng + x2, y));
                    d(i * ng + x, j * ng + x2) = best;
                }
        }
    try {
        FiniteMetricSpace<double> m(std::move(d), "ambient");
        out.metric = true;
    } catch (const DomainError& e) {
        out.metric = false;
        out.failure = e.what();
    }
    return out;
}

}  // namespace fractal
