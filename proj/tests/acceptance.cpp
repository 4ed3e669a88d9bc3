#include "common.hpp"
#include "fractal/metrics.hpp"
#include "fractal/simulate.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace fractal;

namespace {

Rational R(long p, long q = 1) { return Rational(p, q); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

const FamilyModel& model(const std::string& name) {
    static std::map<std::string, FamilyModel> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, FamilyModel(*testing::load(name).family)).first;
    return it->second;
}

const FamilyModel& gasket() { return model("sierpinski.json"); }

constexpr int kTop = 1, kBottom = 0;

ConductanceNetwork<Rational> triangle(const Rational& a12, const Rational& a13, const Rational& a23) {
    ConductanceNetwork<Rational> n(3);
    n.set(0, 1, a12);
    n.set(0, 2, a13);
    n.set(1, 2, a23);
    return n;
}

void fixed_point(Outcome& o) {
    const auto& s = gasket().structure();
    const auto unit = triangle(1, 1, 1);
    const auto lam = renormalize(s, unit);
    const auto c = proportionality(lam, unit);
    o.require(c && *c == R(3, 5), "Lambda(unit) = 3/5 unit");
    const auto single = triangle(1, 0, 0);
    const auto d = proportionality(renormalize(s, single), single);
    o.require(d && *d == R(1, 2), "degenerate factor 1/2");
    o.detail << "Lambda(unit)=" << (c ? to_string(*c) : "none") << "*unit degenerate=" << (d ? to_string(*d) : "none");
}

void closed_forms(Outcome& o) {
    const RationalFunction alpha(Polynomial({1, 6, 3}), Polynomial({6, 4}));
    const RationalFunction rho(Polynomial({2, 3}), Polynomial({1, 2}));
    const auto sg = fit_rational(gasket().family());
    o.require(sg.samples.size() >= 10, "at least 10 samples");
    o.require(equivalent(sg.alpha, alpha) && equivalent(sg.rho, rho), "gasket alpha, rho");
    o.detail << "SG alpha=" << sg.alpha.str() << " rho=" << sg.rho.str() << " samples=" << sg.samples.size();
    for (const auto& [name, s] : {std::pair{"vicsek_quarter.json", R(1, 4)}, std::pair{"vicsek.json", R(1, 2)}}) {
        const auto fit = fit_rational(model(name).family());
        const RationalFunction a(Polynomial({2 * s, 1}), Polynomial({1 + 2 * s}));
        const RationalFunction r(Polynomial({1 + 4 * s, 1}), Polynomial({s, s}));
        o.require(fit.samples.size() >= 10 && equivalent(fit.alpha, a) && equivalent(fit.rho, r),
                  "vicsek s=" + to_string(s));
        o.detail << "; s=" << to_string(s) << " alpha=" << fit.alpha.str() << " rho=" << fit.rho.str();
    }
}

void constants(Outcome& o) {
    const auto& sg = gasket();
    o.require(sg.limits().rho_g && *sg.limits().rho_g == R(3, 2), "SG rho_G");
    o.require(sg.limits().beta && *sg.limits().beta == R(4, 3), "SG beta");
    o.require(std::abs(sg.vmin().value - 1.0) <= 1e-10, "SG v_min");
    o.detail << "SG rho_G=" << to_string(sg.rho_g()) << " beta=" << to_string(*sg.limits().beta)
             << " v_min=" << sg.vmin().value;
    for (const auto& [name, s] : {std::pair{"vicsek_quarter.json", R(1, 4)}, std::pair{"vicsek.json", R(1, 2)}}) {
        const auto& l = model(name).limits();
        o.require(l.rho_g && *l.rho_g == 1 / s && l.beta && *l.beta == 1 + 2 * s, "vicsek s=" + to_string(s));
        o.detail << "; s=" << to_string(s) << " rho_G=" << (l.rho_g ? to_string(*l.rho_g) : "none")
                 << " beta=" << (l.beta ? to_string(*l.beta) : "none");
    }
}

void nestedness(Outcome& o) {
    int exact = 0, floating = 0;
    double worst = 0.0;
    for (const char* name : {"sierpinski.json", "vicsek.json"}) {
        const auto& m = model(name);
        const auto& s = m.structure();
        std::vector<LevelGraph> g;
        for (int n = 0; n <= 3; ++n) g.push_back(build_level(s, n));
        for (const Rational v : {R(2), R(10)}) {
            const auto orbit = exact_inverse_orbit(m, v, 3);
            for (int a = 0; a <= 3; ++a)
                for (int b = a + 1; b <= 3; ++b) {
                    const auto emb = embed_level(s, g[a], g[b]);
                    if (orbit) {
                        const bool ok = trace(level_form_exact(m, g[b], *orbit), emb) == level_form_exact(m, g[a], *orbit);
                        o.require(ok, std::string(name) + " exact (" + std::to_string(a) + "," + std::to_string(b) + ")");
                        ++exact;
                    } else {
                        const double vd = to_double(v);
                        const auto fine = level_form<double>(m, g[b], vd), coarse = level_form<double>(m, g[a], vd);
                        const double dev = trace(fine, emb).max_relative_deviation(coarse);
                        worst = std::max(worst, dev);
                        o.require(dev <= 1e-9, std::string(name) + " float (" + std::to_string(a) + "," +
                                                   std::to_string(b) + ")");
                        ++floating;
                    }
                }
        }
    }
    // the gasket in exact arithmetic along a rational inverse orbit
    const auto& s = gasket().structure();
    const auto orbit = orbit_from_base(gasket(), R(2), 3);
    for (int a = 0; a <= 3; ++a)
        for (int b = a + 1; b <= 3; ++b) {
            const LevelGraph ga = build_level(s, a), gb = build_level(s, b);
            o.require(trace(level_form_exact(gasket(), gb, orbit), embed_level(s, ga, gb)) ==
                          level_form_exact(gasket(), ga, orbit),
                      "SG exact orbit");
            ++exact;
        }
    o.detail << "exact pairs=" << exact << " float pairs=" << floating << " worst float deviation=" << std::scientific
             << std::setprecision(2) << worst;
}

void quotient_correctness(Outcome& o) {
    const auto q0 = quotient(gasket(), 0);
    o.require(q0.network.size() == 2 && q0.network.conductance(0, 1) == 2, "H^0 = edge 2");
    for (const auto& [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
        const auto tc = quotient_trace_check(gasket(), a, b);
        o.require(tc.ok, "trace (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
    const auto fp = fixed_point_check(gasket());
    o.require(fp.fixed && fp.eigenvalue == R(2, 3) && fp.matches_rho_g, "Lambda_*(H^0) = 2/3 H^0");
    o.detail << "H^0 edge=" << to_string(q0.network.conductance(0, 1)) << " traces (0,1),(0,2),(1,2) exact"
             << " eigenvalue=" << to_string(fp.eigenvalue);
}

void metric_convergence(Outcome& o) {
    const auto q0 = quotient(gasket(), 0);
    const auto h0 = resistance_space(q0.network);
    for (const Rational v : {R(10), R(100), R(1000)}) {
        const auto gv = resistance_space(gasket().family().eval(v));
        const Rational d = distortion(gv, h0, q0.partition.class_of);
        o.require(d == 2 / (2 * v + 1), "distortion at v=" + to_string(v));
        o.require(gh_upper_bound(gv, h0, q0.partition.class_of) == 1 / (2 * v + 1), "GH bound");
        o.detail << "dis(" << to_string(v) << ")=" << to_string(d) << " ";
    }
    for (int n = 1; n <= 2; ++n) {
        const auto t = convergence_table<double>(gasket(), n, {10.0, 100.0, 1000.0, 1e4});
        bool decreasing = true;
        for (std::size_t i = 0; i + 2 < t.size(); ++i) decreasing = decreasing && t[i + 1].distortion < t[i].distortion;
        o.require(decreasing, "table n=" + std::to_string(n) + " decreasing");
    }
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> size(2, 6), num(1, 5);
    int held = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto space = [&](int n) {
            auto net = testing::random_network(rng, n, 0.4);
            for (int i = 1; i < n; ++i)
                if (net.conductance(i - 1, i) == 0) net.set(i - 1, i, Rational(num(rng), num(rng)));
            return resistance_space(net);
        };
        const int na = size(rng);
        const auto a = space(na);
        const auto b = space(std::uniform_int_distribution<int>(1, na)(rng));
        std::vector<int> f(static_cast<std::size_t>(a.size()));
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<int>(i % static_cast<std::size_t>(b.size()));
        if (gh_exact_small(a, b) <= gh_upper_bound(a, b, f)) ++held;
    }
    o.require(held == 20, "gh_exact_small <= gh_upper_bound");
    o.detail << "tables n=1,2 decreasing; GH exact <= bound on " << held << "/20";
}

void uv_scaling(Outcome& o) {
    const auto t = uv_scaling_experiment(gasket(), 2.0, 8, 5, kTop, kBottom);
    bool monotone = true;
    for (std::size_t i = 2; i < t.rows.size(); ++i) monotone = monotone && t.rows[i].ratio < t.rows[i - 1].ratio;
    const double last = t.rows.back().ratio;
    o.require(monotone, "ratios monotone");
    o.require(std::abs(last / 4.5 - 1.0) <= 0.02, "t_7/t_8 within 2% of 9/2");
    const auto q = quotient_crossing_scaling(gasket(), 7, kTop, kBottom);
    const double shorted = q.back().ratio;
    o.require(std::abs(shorted / 4.5 - 1.0) <= 0.01, "shorted ratio within 1% of 9/2 at level 7");
    o.detail << std::setprecision(6) << "t_7/t_8=" << last << " shorted(7)=" << shorted << " lambda=" << t.lambda
             << " sigma~" << t.sigma;
}

void time_change(Outcome& o) {
    int ok = 0, total = 0;
    for (int m = 0; m <= 3; ++m)
        for (int n = 0; n <= 3; ++n) {
            const auto c = time_change_check(gasket(), R(2), m, n, kTop, kBottom);
            ++total;
            if (c.ok) ++ok;
            else o.require(false, "m=" + std::to_string(m) + " n=" + std::to_string(n));
        }
    o.detail << ok << "/" << total << " exact identities (u=2, v=alpha^{m+n}(u))";
}

void distributional(Outcome& o) {
    const auto& m = gasket();
    const auto limit = limit_structure(m);
    const auto h = shorted_level(limit, m.rho_g(), 4);
    const auto& hb = h.graph.boundary_vertices();
    WalkSpec hs{h.network, h.measure, hb[static_cast<std::size_t>(limit_label(limit, kTop))],
                {hb[static_cast<std::size_t>(limit_label(limit, kBottom))]}, 2};
    const LevelGraph g4 = build_level(m.structure(), 4);
    constexpr std::size_t kPaths = 10000;
    const auto h_law = hitting_law(hs);
    std::vector<double> ks;
    o.detail << std::setprecision(4);
    for (const int n : {1, 3, 5}) {
        const WalkSpec gs = crossing_walk(m, g4, m.alpha_inverse(2.0, n), kTop, kBottom, 1);
        const auto cmp = law_comparison(gs, hs, kPaths);
        ks.push_back(cmp.ks);
        o.detail << "KS(n=" << n << ")=" << cmp.ks << " exact=" << rescaled_law_distance(hitting_law(gs), h_law) << " ";
    }
    WalkSpec twin = hs;
    twin.seed = 3;
    const auto control = law_comparison(hs, twin, kPaths);
    o.detail << "control=" << control.ks << " band=" << control.band;
    o.require(ks[0] > ks[1] && ks[1] > ks[2], "KS decreasing over n=1,3,5");
    o.require(control.ks < control.band, "same-law control below band");
}

void spectral(Outcome& o) {
    const auto limit = limit_structure(gasket());
    const auto h = shorted_level(limit, gasket().rho_g(), 7);
    const auto est = spectral_dimension_estimate(h.network, h.measure);
    const double want = 2 * std::log(3.0) / std::log(4.5);
    o.require(std::abs(est.d_s - want) <= 0.05, "H^7 within 0.05");
    const auto [circle, mu] = circle_network(500);
    const auto c = spectral_dimension_estimate(circle, mu);
    o.require(std::abs(c.d_s - 1.0) <= 0.05, "circle within 0.05");
    o.detail << std::setprecision(5) << "H^7 d_s=" << est.d_s << " (target " << want << ", " << est.n_used
             << " distinct eigenvalues in window) circle d_s=" << c.d_s;
}

void invariants(Outcome& o) {
    std::mt19937 rng(77);
    int idem = 0, res = 0;
    for (int trial = 0; trial < 30; ++trial) {
        auto net = testing::random_network(rng, 7, 0.5);
        for (int i = 1; i < 7; ++i)
            if (net.conductance(i - 1, i) == 0) net.set(i - 1, i, 1);
        const std::vector<int> a{0, 2, 3, 5, 6}, b{3, 0, 6}, b_in_a{2, 0, 4};
        const auto ta = trace(net, a);
        if (trace(ta, b_in_a) == trace(net, b)) ++idem;
        bool same = true;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j)
                same = same && effective_resistance(ta, static_cast<int>(i), static_cast<int>(j)).value ==
                                   effective_resistance(net, a[i], a[j]).value;
        if (same) ++res;
    }
    o.require(idem == 30, "trace idempotence");
    o.require(res == 30, "resistance preserved under trace");

    int sp = 0, tried = 0;
    while (tried < 100) {
        const auto t = testing::random_series_parallel(rng, 3);
        if (t.n_vertices > 8) continue;
        ++tried;
        if (effective_resistance(testing::to_network(t), 0, 1).value == t.resistance) ++sp;
    }
    o.require(sp == 100, "series-parallel oracle");

    int mono = 0;
    std::uniform_int_distribution<int> vertex(0, 5), num(1, 5);
    for (int trial = 0; trial < 40; ++trial) {
        const auto net = testing::random_network(rng, 6, 0.6);
        auto more = net;
        const int i = vertex(rng);
        const int j = (i + 1 + vertex(rng) % 5) % 6;
        more.add(i, j, Rational(num(rng), num(rng)));
        bool ok = true;
        for (int x = 0; x < 6; ++x)
            for (int y = x + 1; y < 6; ++y) {
                const auto before = effective_resistance(net, x, y), after = effective_resistance(more, x, y);
                if (!before.infinite) ok = ok && !after.infinite && after.value <= before.value;
            }
        if (ok) ++mono;
    }
    o.require(mono == 40, "monotonicity");

    const LevelGraph g = build_level(gasket().structure(), 3);
    const WalkSpec w = crossing_walk(gasket(), g, 5.0, kTop, kBottom, 99);
    const auto s1 = sample_hitting(w, 2000), s2 = sample_hitting(w, 2000);
    bool bytes = true;
    for (std::size_t i = 0; i < s1.size(); ++i)
        bytes = bytes && std::memcmp(&s1[i].time, &s2[i].time, sizeof(double)) == 0 &&
                s1[i].exit_vertex == s2[i].exit_vertex;
    o.require(bytes, "seeded reproducibility");
    o.detail << "idempotence " << idem << "/30, resistance " << res << "/30, series-parallel " << sp
             << "/100, monotonicity " << mono << "/40, reproducible=" << (bytes ? "yes" : "no");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"gasket fixed point", fixed_point},
        {"alpha/rho closed forms", closed_forms},
        {"limit constants", constants},
        {"nestedness", nestedness},
        {"quotient correctness", quotient_correctness},
        {"metric convergence", metric_convergence},
        {"ultraviolet scaling", uv_scaling},
        {"time change", time_change},
        {"distributional convergence", distributional},
        {"spectral dimension", spectral},
        {"invariant suites", invariants},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [error: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << i + 1 << " " << criteria[i].first << ": "
                  << o.detail.str() << " (" << std::fixed << std::setprecision(2) << secs << " s)" << std::endl;
        std::cout.unsetf(std::ios::fixed);
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
