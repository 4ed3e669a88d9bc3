#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"

#include <set>

using namespace fractal;
using testing::Point;

namespace {

// vertex count and identification from the planar embedding alone
void check_against_geometry(const SelfSimilarStructure& s, const testing::Ifs& ifs, int n) {
    const LevelGraph g = build_level(s, n);
    std::map<Point, int> vertex_of_point;
    std::set<Point> points;
    for (std::size_t w = 0; w < word_count(s.n_cells, n); ++w) {
        const auto letters = word_letters(w, s.n_cells, n);
        for (int u = 0; u < s.b(); ++u) {
            const Point p = testing::address_point(ifs, letters, u);
            points.insert(p);
            const int v = g.vertex(w, u);
            auto [it, fresh] = vertex_of_point.emplace(p, v);
            CHECK(it->second == v);  // one point, one vertex
            (void)fresh;
        }
    }
    CHECK(g.size() == points.size());
    std::set<int> ids;
    for (const auto& [p, v] : vertex_of_point) ids.insert(v);
    CHECK(ids.size() == points.size());  // distinct points, distinct vertices
}

}  // namespace

TEST_CASE("gasket level 1 has 6 vertices and 3 cells") {
    const auto cfg = testing::load("sierpinski.json");
    const LevelGraph g = build_level(cfg.structure, 1);
    CHECK(g.size() == 6);
    CHECK(g.num_cells() == 3);
}

TEST_CASE("level 0 is the boundary with identity addressing") {
    for (const char* name : {"sierpinski.json", "vicsek.json"}) {
        const auto cfg = testing::load(name);
        const LevelGraph g = build_level(cfg.structure, 0);
        CHECK(g.num_cells() == 1);
        CHECK(static_cast<int>(g.size()) == cfg.structure.b());
        for (int u = 0; u < cfg.structure.b(); ++u) {
            CHECK(g.vertex(0, u) == u);
            CHECK(g.boundary_vertices()[static_cast<std::size_t>(u)] == u);
        }
    }
}

TEST_CASE("identifications match the planar embedding") {
    const auto sg = testing::load("sierpinski.json");
    for (int n = 0; n <= 4; ++n) check_against_geometry(sg.structure, testing::gasket_ifs(), n);
    const auto vk = testing::load("vicsek.json");
    for (int n = 0; n <= 3; ++n) check_against_geometry(vk.structure, testing::vicsek_ifs(), n);
    CHECK(build_level(vk.structure, 1).size() == 16);
}

TEST_CASE("cell counts and vertex bound") {
    const auto cfg = testing::load("vicsek.json");
    const auto& s = cfg.structure;
    for (int n = 0; n <= 3; ++n) {
        const LevelGraph g = build_level(s, n);
        CHECK(g.num_cells() == word_count(s.n_cells, n));
        CHECK(g.size() < static_cast<std::size_t>(s.b()) * g.num_cells() + (n == 0 ? 1 : 0));
        std::vector<char> covered(g.size(), 0);
        for (std::size_t w = 0; w < g.num_cells(); ++w)
            for (int v : g.cell(w)) covered[static_cast<std::size_t>(v)] = 1;
        CHECK(std::count(covered.begin(), covered.end(), 0) == 0);
    }
}

TEST_CASE("interval structure has 2^n + 1 vertices") {
    SelfSimilarStructure s;
    s.n_cells = 2;
    s.boundary = {"a", "b"};
    s.gluing = {{{0, 1}, {1, 0}}};
    s.resistance = {1, 1};
    s.theta = {Rational(1, 2), Rational(1, 2)};
    s.validate();
    for (int n = 0; n <= 5; ++n) CHECK(build_level(s, n).size() == (std::size_t{1} << n) + 1);
}

TEST_CASE("rebuilding gives identical ids") {
    const auto cfg = testing::load("sierpinski.json");
    const LevelGraph a = build_level(cfg.structure, 3), b = build_level(cfg.structure, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t w = 0; w < a.num_cells(); ++w)
        for (int u = 0; u < 3; ++u) CHECK(a.vertex(w, u) == b.vertex(w, u));
}

TEST_CASE("gasket measures") {
    const auto cfg = testing::load("sierpinski.json");
    const auto m0 = measure_level(cfg.structure, 0);
    for (const auto& m : m0.mass) CHECK(m == Rational(1, 3));
    const LevelGraph g1 = build_level(cfg.structure, 1);
    const auto m1 = measure_level(cfg.structure, g1);
    for (int x = 0; x < 6; ++x) {
        const bool corner = std::find(g1.boundary_vertices().begin(), g1.boundary_vertices().end(), x) !=
                            g1.boundary_vertices().end();
        CHECK(m1.mass[static_cast<std::size_t>(x)] == (corner ? Rational(1, 9) : Rational(2, 9)));
    }
}

TEST_CASE("vicsek measure: glued vertices carry 2/20") {
    const auto cfg = testing::load("vicsek.json");
    const auto& s = cfg.structure;
    const LevelGraph g = build_level(s, 1);
    const auto mu = measure_level(s, g);
    std::vector<int> incidence(g.size(), 0);
    for (std::size_t w = 0; w < g.num_cells(); ++w)
        for (int v : g.cell(w)) ++incidence[static_cast<std::size_t>(v)];
    for (std::size_t x = 0; x < g.size(); ++x)
        CHECK(mu.mass[x] == (incidence[x] == 2 ? Rational(2, 20) : Rational(1, 20)));
    CHECK(std::count(incidence.begin(), incidence.end(), 2) == 4);
}

TEST_CASE("measures have total mass one and are positive") {
    for (const char* name : {"sierpinski.json", "vicsek.json"}) {
        const auto cfg = testing::load(name);
        for (int n = 0; n <= 3; ++n) {
            const auto mu = measure_level(cfg.structure, n);
            Rational total = 0;
            for (const auto& m : mu.mass) {
                CHECK(m > 0);
                total += m;
            }
            CHECK(total == 1);
        }
    }
}

TEST_CASE("embedding of levels") {
    const auto cfg = testing::load("sierpinski.json");
    const auto& s = cfg.structure;
    const auto e00 = embed_level(s, 0, 0);
    CHECK(e00 == std::vector<int>{0, 1, 2});
    const LevelGraph g1 = build_level(s, 1);
    CHECK(embed_level(s, 0, 1) == g1.boundary_vertices());

    // extreme vertices of level 1 are where the corners sit in the plane
    const auto ifs = testing::gasket_ifs();
    const auto e01 = embed_level(s, 0, 1);
    for (int u = 0; u < 3; ++u) {
        const std::size_t rep = g1.representative(e01[static_cast<std::size_t>(u)]);
        CHECK(testing::address_point(ifs, word_letters(rep / 3, 3, 1), static_cast<int>(rep % 3)) ==
              ifs.corner[static_cast<std::size_t>(u)]);
    }

    const auto e12 = embed_level(s, 1, 2), e02 = embed_level(s, 0, 2);
    for (int u = 0; u < 3; ++u)
        CHECK(e02[static_cast<std::size_t>(u)] == e12[static_cast<std::size_t>(e01[static_cast<std::size_t>(u)])]);
    std::set<int> image(e12.begin(), e12.end());
    CHECK(image.size() == e12.size());
}

TEST_CASE("config errors") {
    using nlohmann::json;
    auto base = [] {
        return json::parse(R"({"n_cells": 3, "boundary": ["p1","p2","p3"],
            "gluing": [[[1,"p2"],[2,"p1"]], [[2,"p3"],[3,"p2"]], [[1,"p3"],[3,"p1"]]],
            "resistance": ["1","1","1"], "theta": ["1/3","1/3","1/3"]})");
    };
    CHECK_NOTHROW(parse_config(base()));
    auto bad_theta = base();
    bad_theta["theta"] = {"1/3", "1/3", "1/2"};
    CHECK_THROWS_AS(parse_config(bad_theta), ConfigError);
    auto one_cell = base();
    one_cell["n_cells"] = 1;
    one_cell["resistance"] = {"1"};
    one_cell["theta"] = {"1"};
    one_cell["gluing"] = json::array();
    CHECK_THROWS_AS(parse_config(one_cell), ConfigError);
    auto bad_label = base();
    bad_label["gluing"][0][0][1] = "p9";
    CHECK_THROWS_AS(parse_config(bad_label), ConfigError);
    auto bad_cell = base();
    bad_cell["gluing"][0][0][0] = 4;
    CHECK_THROWS_AS(parse_config(bad_cell), ConfigError);
    auto bad_r = base();
    bad_r["resistance"] = {"1", "0", "1"};
    CHECK_THROWS_AS(parse_config(bad_r), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
