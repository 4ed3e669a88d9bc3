#include "fractal/structure.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace fractal {

namespace {

// Union-find over addresses where the smaller index always becomes the root,
// so every class is rooted at its least address.
class MinUnionFind {
public:
    explicit MinUnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        std::size_t root = x;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[x] != root) {
            const std::size_t next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[b] = a;
        else parent_[a] = b;
    }

private:
    std::vector<std::size_t> parent_;
};

std::size_t ipow(std::size_t base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

}  // namespace

std::size_t word_count(int n_cells, int level) { return ipow(static_cast<std::size_t>(n_cells), level); }

std::vector<int> word_letters(std::size_t word, int n_cells, int level) {
    std::vector<int> letters(static_cast<std::size_t>(level));
    for (int k = level - 1; k >= 0; --k) {
        letters[static_cast<std::size_t>(k)] = static_cast<int>(word % static_cast<std::size_t>(n_cells));
        word /= static_cast<std::size_t>(n_cells);
    }
    return letters;
}

Rational word_resistance(const SelfSimilarStructure& s, std::size_t word, int level) {
    Rational r = 1;
    for (int letter : word_letters(word, s.n_cells, level)) r *= s.resistance[static_cast<std::size_t>(letter)];
    return r;
}

Rational word_theta(const SelfSimilarStructure& s, std::size_t word, int level) {
    Rational t = 1;
    for (int letter : word_letters(word, s.n_cells, level)) t *= s.theta[static_cast<std::size_t>(letter)];
    return t;
}

int SelfSimilarStructure::label_index(const std::string& name) const {
    const auto it = std::find(boundary.begin(), boundary.end(), name);
    if (it == boundary.end()) throw ConfigError("unknown boundary label '" + name + "'");
    return static_cast<int>(it - boundary.begin());
}

Rational SelfSimilarStructure::r_max() const { return *std::max_element(resistance.begin(), resistance.end()); }

void SelfSimilarStructure::validate() {
    if (n_cells < 2) throw ConfigError("n_cells must be at least 2 (N=1 has no renormalization content)");
    if (boundary.empty()) throw ConfigError("boundary must be non-empty");
    if (std::set<std::string>(boundary.begin(), boundary.end()).size() != boundary.size())
        throw ConfigError("boundary labels must be distinct");
    const auto N = static_cast<std::size_t>(n_cells);
    if (resistance.size() != N) throw ConfigError("resistance must have n_cells entries");
    if (theta.size() != N) throw ConfigError("theta must have n_cells entries");
    for (const auto& r : resistance)
        if (r <= 0) throw ConfigError("resistance weights must be positive");
    Rational total = 0;
    for (const auto& t : theta) {
        if (t <= 0) throw ConfigError("theta weights must be positive");
        total += t;
    }
    if (total != 1) throw ConfigError("theta must sum to 1 exactly (sum is " + to_string(total) + ")");

    if (fixed_cell.empty()) {
        if (boundary.size() > N) throw ConfigError("fixed cells must be given when #boundary > n_cells");
        fixed_cell.resize(boundary.size());
        std::iota(fixed_cell.begin(), fixed_cell.end(), 0);
    }
    if (fixed_cell.size() != boundary.size()) throw ConfigError("fixed must have one entry per boundary label");
    for (int c : fixed_cell)
        if (c < 0 || c >= n_cells) throw ConfigError("fixed cell index out of range");

    if (boundary_mass.empty()) boundary_mass.assign(boundary.size(), Rational(1, static_cast<long>(boundary.size())));
    if (boundary_mass.size() != boundary.size()) throw ConfigError("boundary_mass must have one entry per boundary label");
    Rational mass_total = 0;
    for (const auto& m : boundary_mass) {
        if (m <= 0) throw ConfigError("boundary_mass entries must be positive");
        mass_total += m;
    }
    if (mass_total != 1) throw ConfigError("boundary_mass must sum to 1");

    for (const auto& g : gluing) {
        for (const auto& a : {g.first, g.second}) {
            if (a.cell < 0 || a.cell >= n_cells) throw ConfigError("gluing references an invalid cell index");
            if (a.label < 0 || a.label >= b()) throw ConfigError("gluing references an invalid boundary label");
        }
        if (g.first.cell == g.second.cell) throw ConfigError("gluing must join two distinct cells");
    }

    // Level-1 checks: no cell collapses two of its own boundary points, the
    // embedded boundary stays injective, and the cell graph is connected.
    const LevelGraph level1 = build_level(*this, 1);
    for (std::size_t c = 0; c < N; ++c) {
        const auto cell = level1.cell(c);
        if (std::set<int>(cell.begin(), cell.end()).size() != cell.size())
            throw ConfigError("gluing identifies two boundary points of cell " + std::to_string(c + 1));
    }
    const auto& bv = level1.boundary_vertices();
    if (std::set<int>(bv.begin(), bv.end()).size() != bv.size())
        throw ConfigError("boundary points are not distinct at level 1 (check fixed cells and gluing)");

    MinUnionFind cells(N);
    for (const auto& g : gluing) cells.unite(static_cast<std::size_t>(g.first.cell), static_cast<std::size_t>(g.second.cell));
    for (std::size_t c = 1; c < N; ++c)
        if (cells.find(c) != cells.find(0)) throw ConfigError("level-1 cell graph is not connected");
}

LevelGraph::LevelGraph(int level, int n_cells, int b, std::vector<int> address_vertex,
                       std::vector<std::size_t> representative, std::vector<int> boundary_vertices)
    : level_(level),
      n_cells_(n_cells),
      b_(b),
      address_vertex_(std::move(address_vertex)),
      representative_(std::move(representative)),
      boundary_(std::move(boundary_vertices)) {}

LevelGraph build_level(const SelfSimilarStructure& s, int n) {
    if (n < 0) throw DomainError("level must be non-negative");
    const auto N = static_cast<std::size_t>(s.n_cells);
    const auto b = static_cast<std::size_t>(s.b());
    const std::size_t words = word_count(s.n_cells, n);
    MinUnionFind uf(words * b);

    // Lifting a first-level gluing through a prefix tau of length k gives the
    // level-n addresses (tau i c(u)^{n-k-1}, u) ~ (tau j c(w)^{n-k-1}, w).
    auto refine = [&](std::size_t word, int label, int steps) {
        const auto c = static_cast<std::size_t>(s.fixed_cell[static_cast<std::size_t>(label)]);
        for (int t = 0; t < steps; ++t) word = word * N + c;
        return word * b + static_cast<std::size_t>(label);
    };
    for (int k = 0; k < n; ++k) {
        const std::size_t prefixes = word_count(s.n_cells, k);
        const int tail = n - k - 1;
        for (std::size_t tau = 0; tau < prefixes; ++tau) {
            for (const auto& g : s.gluing) {
                const std::size_t a = refine(tau * N + static_cast<std::size_t>(g.first.cell), g.first.label, tail);
                const std::size_t c = refine(tau * N + static_cast<std::size_t>(g.second.cell), g.second.label, tail);
                uf.unite(a, c);
            }
        }
    }

    std::vector<int> address_vertex(words * b, -1);
    std::vector<std::size_t> representative;
    for (std::size_t addr = 0; addr < words * b; ++addr) {
        const std::size_t root = uf.find(addr);
        if (root == addr) {
            address_vertex[addr] = static_cast<int>(representative.size());
            representative.push_back(addr);
        } else {
            address_vertex[addr] = address_vertex[root];
        }
    }

    std::vector<int> boundary;
    boundary.reserve(b);
    for (std::size_t u = 0; u < b; ++u) {
        // Boundary point u sits at address (c(u)^n, u); for n == 0 that is the empty word.
        boundary.push_back(address_vertex[refine(0, static_cast<int>(u), n)]);
    }
    return LevelGraph(n, s.n_cells, static_cast<int>(b), std::move(address_vertex), std::move(representative),
                      std::move(boundary));
}

LevelMeasure measure_level(const SelfSimilarStructure& s, const LevelGraph& g) {
    LevelMeasure out{g.level(), std::vector<Rational>(g.size(), Rational(0))};
    for (std::size_t w = 0; w < g.num_cells(); ++w) {
        const Rational tw = word_theta(s, w, g.level());
        const auto cell = g.cell(w);
        for (std::size_t u = 0; u < cell.size(); ++u)
            out.mass[static_cast<std::size_t>(cell[u])] += tw * s.boundary_mass[u];
    }
    return out;
}

LevelMeasure measure_level(const SelfSimilarStructure& s, int n) { return measure_level(s, build_level(s, n)); }

std::vector<int> embed_level(const SelfSimilarStructure& s, const LevelGraph& coarse, const LevelGraph& fine) {
    if (coarse.level() > fine.level()) throw DomainError("embed_level requires m <= n");
    const auto N = static_cast<std::size_t>(s.n_cells);
    const auto b = static_cast<std::size_t>(s.b());
    const int steps = fine.level() - coarse.level();
    std::vector<int> out(coarse.size());
    for (std::size_t v = 0; v < coarse.size(); ++v) {
        const std::size_t rep = coarse.representative(static_cast<int>(v));
        std::size_t word = rep / b;
        const auto label = static_cast<int>(rep % b);
        const auto c = static_cast<std::size_t>(s.fixed_cell[static_cast<std::size_t>(label)]);
        for (int t = 0; t < steps; ++t) word = word * N + c;
        out[v] = fine.vertex(word, label);
    }
    return out;
}

std::vector<int> embed_level(const SelfSimilarStructure& s, int m, int n) {
    return embed_level(s, build_level(s, m), build_level(s, n));
}

}  // namespace fractal
