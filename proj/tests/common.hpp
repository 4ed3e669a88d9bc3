#pragma once

#include "fractal/config.hpp"
#include "fractal/network.hpp"
#include "fractal/structure.hpp"

#include <map>
#include <random>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

namespace testing {

using fractal::Rational;
using Point = std::pair<Rational, Rational>;

inline fractal::StructureConfig load(const std::string& name) {
    return fractal::load_config(std::string(FRACTAL_CONFIG_DIR) + "/" + name);
}

/// Planar similitudes x -> x / k + shift for a concrete embedding of a structure.
struct Ifs {
    Rational scale;
    std::vector<Point> shift;   // per cell
    std::vector<Point> corner;  // per boundary label
};

// p1 = (0,0), p2 = (1/2,1) on top, p3 = (1,0); psi_i(x) = (x + p_i) / 2
inline Ifs gasket_ifs() {
    Ifs f;
    f.scale = Rational(1, 2);
    f.corner = {{0, 0}, {Rational(1, 2), 1}, {1, 0}};
    for (const auto& p : f.corner) f.shift.push_back({p.first / 2, p.second / 2});
    return f;
}

// corners TL, TR, BR, BL; cells 1-4 fix those corners, cell 5 is the centre
inline Ifs vicsek_ifs() {
    Ifs f;
    f.scale = Rational(1, 3);
    f.corner = {{0, 1}, {1, 1}, {1, 0}, {0, 0}};
    for (const auto& p : f.corner) f.shift.push_back({p.first * 2 / 3, p.second * 2 / 3});
    f.shift.push_back({Rational(1, 3), Rational(1, 3)});
    return f;
}

/// psi_w(p_u) for the word with the given letters (outermost first).
inline Point address_point(const Ifs& f, const std::vector<int>& letters, int label) {
    Point x = f.corner[static_cast<std::size_t>(label)];
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
        const auto& t = f.shift[static_cast<std::size_t>(*it)];
        x = {x.first * f.scale + t.first, x.second * f.scale + t.second};
    }
    return x;
}

// two-terminal network between vertices 0 and 1 with its resistance
struct TwoTerminal {
    int n_vertices = 2;
    std::vector<std::tuple<int, int, Rational>> resistors;
    Rational resistance;
};

inline TwoTerminal single(const Rational& r) { return {2, {{0, 1, r}}, r}; }

// relabel b so that its terminals become (s, t) and its interior follows `offset`
inline void splice(TwoTerminal& out, const TwoTerminal& b, int s, int t) {
    const int offset = out.n_vertices - 2;
    auto map = [&](int v) { return v == 0 ? s : v == 1 ? t : v + offset; };
    for (const auto& [x, y, r] : b.resistors) out.resistors.emplace_back(map(x), map(y), r);
    out.n_vertices += b.n_vertices - 2;
}

inline TwoTerminal series(const TwoTerminal& a, const TwoTerminal& b) {
    TwoTerminal out;
    out.n_vertices = 3;  // 0, 1 and the junction 2
    splice(out, a, 0, 2);
    splice(out, b, 2, 1);
    out.resistance = a.resistance + b.resistance;
    return out;
}

inline TwoTerminal parallel(const TwoTerminal& a, const TwoTerminal& b) {
    TwoTerminal out;
    out.n_vertices = 2;
    splice(out, a, 0, 1);
    splice(out, b, 0, 1);
    out.resistance = a.resistance * b.resistance / (a.resistance + b.resistance);
    return out;
}

inline TwoTerminal random_series_parallel(std::mt19937& rng, int budget) {
    std::uniform_int_distribution<int> num(1, 9), kind(0, 2);
    if (budget <= 0 || kind(rng) == 0) return single(Rational(num(rng), num(rng)));
    const TwoTerminal a = random_series_parallel(rng, budget - 1), b = random_series_parallel(rng, budget - 1);
    return kind(rng) == 1 ? series(a, b) : parallel(a, b);
}

inline fractal::ConductanceNetwork<Rational> to_network(const TwoTerminal& t) {
    fractal::ConductanceNetwork<Rational> n(t.n_vertices);
    for (const auto& [x, y, r] : t.resistors) n.add(x, y, Rational(1) / r);
    return n;
}

inline fractal::ConductanceNetwork<Rational> random_network(std::mt19937& rng, int n, double density) {
    std::uniform_int_distribution<int> num(1, 6);
    std::bernoulli_distribution edge(density);
    fractal::ConductanceNetwork<Rational> net(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (edge(rng)) net.set(i, j, Rational(num(rng), num(rng)));
    return net;
}

}  // namespace testing
