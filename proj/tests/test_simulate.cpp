#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"
#include "fractal/simulate.hpp"

#include <Eigen/LU>

using namespace fractal;

namespace {

Rational R(long p, long q = 1) { return Rational(p, q); }

const FamilyModel& gasket() {
    static const FamilyModel m(*testing::load("sierpinski.json").family);
    return m;
}

constexpr int kTop = 1, kBottom = 0;  // p2 and p1 of the gasket

WalkSpec pair_walk(double c, double m1, double m2, std::uint64_t seed) {
    WalkSpec w;
    w.network = ConductanceNetwork<double>(2);
    w.network.set(0, 1, c);
    w.measure = Vector<double>(2);
    w.measure << m1, m2;
    w.start = 0;
    w.target = {1};
    w.seed = seed;
    return w;
}

WalkSpec path_walk(std::uint64_t seed) {
    WalkSpec w;
    w.network = ConductanceNetwork<double>(3);
    w.network.set(0, 1, 1.0);
    w.network.set(1, 2, 1.0);
    w.measure = Vector<double>::Constant(3, 1.0 / 3);
    w.start = 0;
    w.target = {2};
    w.seed = seed;
    return w;
}

// E[T] from the generator Q = diag(1/mu) (A - D): -Q_II u = 1
double dense_hitting(const ConductanceNetwork<double>& net, const Vector<double>& mu, int start,
                     const std::vector<int>& target) {
    std::vector<int> rest;
    for (int x = 0; x < net.size(); ++x)
        if (std::find(target.begin(), target.end(), x) == target.end()) rest.push_back(x);
    const auto k = static_cast<Eigen::Index>(rest.size());
    Matrix<double> q(k, k);
    const Matrix<double> gen = net.generator();
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) q(a, b) = -gen(rest[a], rest[b]) / mu(rest[a]);
    const Vector<double> u = q.fullPivLu().solve(Vector<double>::Ones(k));
    return u(std::find(rest.begin(), rest.end(), start) - rest.begin());
}

}  // namespace

TEST_CASE("mean hitting closed forms") {
    ConductanceNetwork<Rational> pair(2);
    pair.set(0, 1, R(3, 2));
    Vector<Rational> mu(2);
    mu << R(1, 4), R(3, 4);
    CHECK(mean_hitting(pair, mu, 0, {1}).value == R(1, 6));

    ConductanceNetwork<Rational> tri(3);
    tri.set(0, 1, 1);
    tri.set(0, 2, 1);
    tri.set(1, 2, 1);
    const Vector<Rational> third = Vector<Rational>::Constant(3, R(1, 3));
    CHECK(mean_hitting(tri, third, 1, {0, 2}).value == R(1, 6));
    CHECK(mean_hitting(tri, third, 0, {0}).value == 0);

    ConductanceNetwork<Rational> split(3);
    split.set(0, 1, 1);
    CHECK(mean_hitting(split, third, 0, {2}).infinite);
    CHECK_THROWS_AS(mean_hitting(split, third, 0, {}), DomainError);
}

TEST_CASE("mean hitting on shorted levels matches a dense generator solve") {
    const auto limit = limit_structure(gasket());
    for (int m = 1; m <= 3; ++m) {
        const auto h = shorted_level(limit, gasket().rho_g(), m);
        const auto& b = h.graph.boundary_vertices();
        const int top = b[static_cast<std::size_t>(limit_label(limit, kTop))];
        const int bottom = b[static_cast<std::size_t>(limit_label(limit, kBottom))];
        const double fast = mean_hitting(h.network, h.measure, top, {bottom}).value;
        CHECK(fast == doctest::Approx(dense_hitting(h.network, h.measure, top, {bottom})).epsilon(1e-10));
    }
}

TEST_CASE("monte carlo agrees with exact means") {
    const WalkSpec w = pair_walk(2.0, 0.5, 0.5, 9);
    const auto s = summarize(sample_hitting(w, 20000), mean_hitting(w).value);
    CHECK(s.exact == doctest::Approx(0.25));
    CHECK(std::abs(s.z) < 3.0);
    CHECK_FALSE(s.flagged);
    CHECK(s.censored == 0);

    const auto& m = gasket();
    const LevelGraph g = build_level(m.structure(), 2);
    const WalkSpec sg = crossing_walk(m, g, 10.0, kTop, kBottom, 4);
    const auto t = summarize(sample_hitting(sg, 20000), mean_hitting(sg).value);
    CHECK(std::abs(t.z) < 3.0);
}

TEST_CASE("sampling is reproducible per path") {
    const WalkSpec w = path_walk(123);
    const auto a = sample_hitting(w, 50), b = sample_hitting(w, 50);
    const auto tail = sample_hitting(w, 20, 30);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].time == b[i].time);
        CHECK(a[i].exit_vertex == 2);
    }
    for (std::size_t i = 0; i < tail.size(); ++i) CHECK(tail[i].time == a[30 + i].time);
    WalkSpec other = w;
    other.seed = 124;
    CHECK(sample_hitting(other, 1)[0].time != a[0].time);
    CHECK(path_seed(1, 0) != path_seed(1, 1));
}

TEST_CASE("censoring") {
    WalkSpec w = path_walk(1);
    w.max_jumps = 1;
    const auto s = sample_hitting(w, 10);
    for (const auto& x : s) {
        CHECK(x.censored);
        CHECK(x.exit_vertex == -1);
    }
    CHECK(summarize(s, 1.0).censored == 10);
}

TEST_CASE("kolmogorov-smirnov") {
    CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_statistic({1, 2}, {3, 4}) == 1.0);
    CHECK(ks_statistic({1, 3}, {2, 4}) == doctest::Approx(0.5));
    CHECK(ks_band(10000) == doctest::Approx(1.36 * std::sqrt(2e-4)));

    const auto same = law_comparison(path_walk(1), path_walk(2), 5000);
    CHECK(same.ks < same.band);
    CHECK(same.mean_a == doctest::Approx(same.mean_b));
    // an exponential law against a two-step phase-type law, both of mean one after rescaling
    const auto apart = law_comparison(pair_walk(1.0, 1.0, 1.0, 1), path_walk(2), 5000);
    CHECK(apart.ks > 2 * apart.band);
}

TEST_CASE("exact hitting laws") {
    const WalkSpec w = path_walk(0);
    const auto law = hitting_law(w);
    CHECK(law.mean() == doctest::Approx(mean_hitting(w).value));
    CHECK(law.survival(0.0) == doctest::Approx(1.0));
    CHECK(law.survival(50.0) < 1e-10);
    const auto e = hitting_law(pair_walk(2.0, 0.5, 0.5, 0));
    CHECK(e.survival(0.3) == doctest::Approx(std::exp(-4.0 * 0.3)));
    CHECK(rescaled_law_distance(law, law) == 0.0);
    CHECK(rescaled_law_distance(e, hitting_law(pair_walk(7.0, 0.2, 3.0, 0))) < 1e-12);
    CHECK(rescaled_law_distance(law, e) > 0.05);
}

TEST_CASE("crossing sets") {
    const auto& m = gasket();
    const LevelGraph g = build_level(m.structure(), 2);
    const auto sets = crossing_sets(m.family(), g, kTop, kBottom);
    CHECK(sets.start == g.boundary_vertices()[kTop]);
    CHECK(std::find(sets.target.begin(), sets.target.end(), g.boundary_vertices()[0]) != sets.target.end());
    CHECK(std::find(sets.target.begin(), sets.target.end(), g.boundary_vertices()[2]) != sets.target.end());
    CHECK_THROWS_AS(crossing_sets(m.family(), g, 0, 2), DomainError);
}

TEST_CASE("unit gasket crossing times grow by 5 per level") {
    const auto& s = gasket().structure();
    ConductanceNetwork<Rational> unit(3);
    unit.set(0, 1, 1);
    unit.set(0, 2, 1);
    unit.set(1, 2, 1);
    Rational expect = R(1, 6), mass = 1;
    for (int m = 0; m <= 3; ++m) {
        const LevelGraph g = build_level(s, m);
        const auto& b = g.boundary_vertices();
        const Vector<Rational> mu = measure_level(s, g).as<Rational>() * mass;
        CHECK(mean_hitting(replicate(s, g, unit), mu, b[1], {b[0], b[2]}).value == expect);
        expect *= 5;
        mass *= 3;
    }
}

TEST_CASE("time change between levels") {
    for (int m = 0; m <= 2; ++m)
        for (int n = 0; n <= 2; ++n) {
            const auto c = time_change_check(gasket(), R(2), m, n, kTop, kBottom);
            CHECK(c.ok);
            CHECK(c.factor * c.top_cell_time == c.level_time);
        }
}

TEST_CASE("ultraviolet scaling") {
    const auto t = uv_scaling_experiment(gasket(), 2.0, 6, 3, kTop, kBottom);
    CHECK(t.lambda == doctest::Approx(4.5));
    REQUIRE(t.rows.size() == 7);
    for (std::size_t i = 2; i < t.rows.size(); ++i) {
        CHECK(t.rows[i].ratio < t.rows[i - 1].ratio);
        CHECK(t.rows[i].ratio > 4.5);
    }
    CHECK(t.t_star > 0.0);

    const auto q = quotient_crossing_scaling(gasket(), 4, kTop, kBottom);
    REQUIRE(q.size() == 5);
    for (std::size_t i = 2; i < q.size(); ++i) {
        CHECK(q[i].ratio > q[i - 1].ratio);
        CHECK(q[i].ratio < 4.5);
        CHECK(q[i].t_star < q[i - 1].t_star);
    }
}

TEST_CASE("spectral dimension") {
    const auto [circle, mu] = circle_network(500);
    const auto est = spectral_dimension_estimate(circle, mu);
    CHECK(est.d_s == doctest::Approx(1.0).epsilon(0.05));
    CHECK(est.n_used >= 2);

    const auto [small, small_mu] = circle_network(30);
    CHECK_THROWS_AS(spectral_dimension_estimate(small, small_mu), DomainError);
    CHECK_THROWS_AS(circle_network(2), DomainError);
}
