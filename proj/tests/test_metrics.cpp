#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"
#include "fractal/metrics.hpp"

#include <random>

using namespace fractal;
using Space = FiniteMetricSpace<Rational>;

namespace {

Rational R(long p, long q = 1) { return Rational(p, q); }

const FamilyModel& gasket() {
    static const FamilyModel m(*testing::load("sierpinski.json").family);
    return m;
}

Space two_point(const Rational& d) {
    Matrix<Rational> m = Matrix<Rational>::Zero(2, 2);
    m(0, 1) = m(1, 0) = d;
    return Space(m, "pair");
}

// every subset of X x Y that projects onto both factors
Rational gh_brute_force(const Space& a, const Space& b) {
    const int n1 = static_cast<int>(a.size()), n2 = static_cast<int>(b.size()), pairs = n1 * n2;
    std::optional<Rational> best;
    for (unsigned mask = 1; mask < (1u << pairs); ++mask) {
        std::vector<char> hit1(static_cast<std::size_t>(n1)), hit2(static_cast<std::size_t>(n2));
        for (int p = 0; p < pairs; ++p)
            if (mask >> p & 1u) hit1[static_cast<std::size_t>(p / n2)] = hit2[static_cast<std::size_t>(p % n2)] = 1;
        if (std::count(hit1.begin(), hit1.end(), 0) || std::count(hit2.begin(), hit2.end(), 0)) continue;
        Rational dis = 0;
        for (int p = 0; p < pairs; ++p)
            for (int q = 0; q < pairs; ++q)
                if ((mask >> p & 1u) && (mask >> q & 1u))
                    dis = std::max(dis, abs(Rational(a(p / n2, q / n2) - b(p % n2, q % n2))));
        if (!best || dis < *best) best = dis;
    }
    return *best / 2;
}

// resistance metric of a random connected network
Space random_space(std::mt19937& rng, int n) {
    std::uniform_int_distribution<int> num(1, 5);
    ConductanceNetwork<Rational> net(n);
    for (int i = 1; i < n; ++i) net.set(i - 1, i, Rational(num(rng), num(rng)));
    std::bernoulli_distribution extra(0.5);
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j)
            if (extra(rng)) net.set(i, j, Rational(num(rng), num(rng)));
    return resistance_space(net);
}

}  // namespace

TEST_CASE("resistance spaces") {
    ConductanceNetwork<Rational> edge(2);
    edge.set(0, 1, 1);
    CHECK(resistance_space(edge)(0, 1) == 1);
    ConductanceNetwork<Rational> tri(3);
    tri.set(0, 1, 1);
    tri.set(0, 2, 1);
    tri.set(1, 2, 1);
    const auto t = resistance_space(tri);
    CHECK(t(0, 1) == R(2, 3));
    CHECK(t(1, 2) == R(2, 3));
    for (const Rational v : {R(1, 2), R(3), R(10)}) {
        const auto s = resistance_space(gasket().family().eval(v));
        CHECK(s(0, 2) == 2 / (2 * v + 1));
        CHECK(s(0, 1) == (v + 1) / (2 * v + 1));
        CHECK(s(1, 2) == (v + 1) / (2 * v + 1));
    }
    ConductanceNetwork<Rational> split(3);
    split.set(0, 1, 1);
    CHECK_THROWS_AS(resistance_space(split), DomainError);
}

TEST_CASE("metric axioms are enforced") {
    Matrix<Rational> m = Matrix<Rational>::Zero(3, 3);
    m(0, 1) = m(1, 0) = 1;
    m(1, 2) = m(2, 1) = 1;
    m(0, 2) = m(2, 0) = 3;
    CHECK_THROWS_AS(Space(m, "bad"), DomainError);
    m(0, 2) = m(2, 0) = 0;
    CHECK_THROWS_AS(Space(m, "bad"), DomainError);
    m(0, 2) = 2;
    m(2, 0) = 1;
    CHECK_THROWS_AS(Space(m, "bad"), DomainError);
}

TEST_CASE("trace leaves the resistance metric unchanged") {
    const auto& s = gasket().structure();
    const LevelGraph g = build_level(s, 2);
    const auto net = level_form<double>(gasket(), g, 3.5);
    const auto full = resistance_space(net);
    const std::vector<int> keep{0, 4, 7, 9, 12};
    const auto sub = resistance_space(trace(net, keep));
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j)
            CHECK(sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                  doctest::Approx(full(keep[i], keep[j])).epsilon(1e-10));
}

TEST_CASE("distortion") {
    const auto sg = resistance_space(gasket().family().eval(R(10)));
    const std::vector<int> id{0, 1, 2};
    CHECK(distortion(sg, sg, id) == 0);
    const auto q0 = quotient(gasket(), 0);
    const auto h0 = resistance_space(q0.network);
    CHECK(h0(0, 1) == R(1, 2));
    CHECK(distortion(sg, h0, q0.partition.class_of) == R(2, 21));
    CHECK(gh_upper_bound(sg, h0, q0.partition.class_of) == R(1, 21));

    const Space pair = two_point(R(7, 3));
    Matrix<Rational> z = Matrix<Rational>::Zero(1, 1);
    const Space point(z, "point");
    CHECK(distortion(pair, point, std::vector<int>{0, 0}) == R(7, 3));
    CHECK_THROWS_AS(distortion(point, pair, std::vector<int>{0}), DomainError);
    CHECK_THROWS_AS(distortion(pair, pair, std::vector<int>{0, 2}), DomainError);
}

TEST_CASE("exact Gromov-Hausdorff on small spaces") {
    CHECK(gh_exact_small(two_point(R(3)), two_point(R(1, 2))) == R(5, 4));
    const auto sg = resistance_space(gasket().family().eval(R(100)));
    CHECK(gh_exact_small(sg, sg) == 0);
    const auto q0 = quotient(gasket(), 0);
    const auto h0 = resistance_space(q0.network);
    const Rational gh = gh_exact_small(sg, h0);
    CHECK(gh <= gh_upper_bound(sg, h0, q0.partition.class_of));
    CHECK(gh_upper_bound(sg, h0, q0.partition.class_of) == R(1, 201));
    CHECK(gh == gh_brute_force(sg, h0));

    std::mt19937 rng(19);
    std::uniform_int_distribution<int> size_a(2, 3), size_b(1, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const Space a = random_space(rng, size_a(rng));
        const Space b = random_space(rng, size_b(rng));
        const Rational exact = gh_exact_small(a, b);
        CHECK(exact == gh_brute_force(a, b));
        std::vector<int> f(static_cast<std::size_t>(a.size()));
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<int>(i % static_cast<std::size_t>(b.size()));
        if (a.size() >= b.size()) CHECK(exact <= gh_upper_bound(a, b, f));
    }
    const auto big = resistance_space(replicate(gasket().structure(), gasket().family().eval(R(2)), 2));
    CHECK_THROWS_AS(gh_exact_small(big, h0), DomainError);
}

TEST_CASE("convergence tables") {
    const auto rows = convergence_table<Rational>(gasket(), 0, {R(10), R(100), R(1000)});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].distortion == doctest::Approx(2.0 / 21));
    CHECK(rows[1].distortion == doctest::Approx(2.0 / 201));
    CHECK(rows[2].distortion == doctest::Approx(2.0 / 2001));
    CHECK(rows[0].gh_bound == doctest::Approx(1.0 / 21));
    CHECK(std::isinf(rows[3].v));
    CHECK(rows[3].distortion == 0.0);
    const auto q0 = quotient(gasket(), 0);
    const LevelGraph g0 = build_level(gasket().structure(), 0);
    for (const Rational v : {R(3), R(17, 4), R(55)})
        CHECK(projection_distortion<Rational>(gasket(), g0, q0, v) == 2 / (2 * v + 1));

    for (int n = 1; n <= 2; ++n) {
        const auto t = convergence_table<double>(gasket(), n, {10.0, 100.0, 1000.0, 1e4});
        for (std::size_t i = 0; i + 2 < t.size(); ++i) {
            CHECK(t[i].distortion > 0.0);
            CHECK(t[i + 1].distortion < t[i].distortion);
        }
    }
}

TEST_CASE("cell diameters") {
    const auto& m = gasket();
    const auto r0 = diameter_report(m, 2.0, 0);
    CHECK(r0.cells.size() == 1);
    CHECK(r0.bound == doctest::Approx(r0.sup_diameter));
    CHECK(r0.violations == 0);

    const auto r2 = diameter_report(m, 2.0, 2);
    CHECK(r2.cells.size() == 9);
    CHECK(r2.violations == 0);
    CHECK(r2.bound == doctest::Approx(r2.sup_diameter / m.rho_n(2.0, 2)));

    // at the fixed point the bound contracts by exactly 3/5 per level
    const auto f1 = diameter_report(m, 1.0, 1), f2 = diameter_report(m, 1.0, 2);
    CHECK(f2.bound / f1.bound == doctest::Approx(0.6));
    CHECK(f1.violations == 0);
    CHECK(f2.violations == 0);
}

TEST_CASE("finite-stage ambient metric") {
    const auto check = ambient_metric_check(gasket(), {2.0, 10.0, 100.0, 1000.0, 1e4}, 2);
    CHECK(check.metric);
    CHECK(check.failure.empty());
    CHECK(check.stage.size() == 5);
    CHECK(std::is_sorted(check.stage.begin(), check.stage.end()));
}
