#pragma once

#include "fractal/scalar.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fractal {

/// A point psi_cell(label) of the first-level decomposition.
struct CellAddress {
    int cell = 0;
    int label = 0;
    friend bool operator==(const CellAddress&, const CellAddress&) = default;
};

/// psi_first.cell(first.label) and psi_second.cell(second.label) are the same point.
struct Gluing {
    CellAddress first;
    CellAddress second;
};

/// Combinatorial description of a generalized p.c.f. self-similar structure:
/// N cells, b boundary labels, the gluing rules between first-level cells, the
/// resistance vector r and the Bernoulli weights theta.
struct SelfSimilarStructure {
    int n_cells = 0;
    std::vector<std::string> boundary;
    std::vector<Gluing> gluing;
    std::vector<Rational> resistance;
    std::vector<Rational> theta;
    /// fixed_cell[u] is the cell whose contraction fixes boundary point u.
    std::vector<int> fixed_cell;
    /// Share of a cell's mass placed on each of its boundary points (sums to 1).
    std::vector<Rational> boundary_mass;

    int b() const { return static_cast<int>(boundary.size()); }
    int label_index(const std::string& name) const;
    Rational r_max() const;

    /// Fills defaults (identity fixed cells, uniform boundary mass) and checks
    /// every invariant. Throws ConfigError with a description on failure.
    void validate();
};

/// Product r_w of the resistance weights along a word.
Rational word_resistance(const SelfSimilarStructure& s, std::size_t word, int level);
Rational word_theta(const SelfSimilarStructure& s, std::size_t word, int level);
/// Letters of a word, most significant (outermost contraction) first.
std::vector<int> word_letters(std::size_t word, int n_cells, int level);
std::size_t word_count(int n_cells, int level);

/// Vertex set V_n with its address algebra. A vertex is named by the
/// lexicographically least (word, label) address in its identification class,
/// and vertex ids are ordered by that representative.
class LevelGraph {
public:
    LevelGraph() = default;
    LevelGraph(int level, int n_cells, int b, std::vector<int> address_vertex,
               std::vector<std::size_t> representative, std::vector<int> boundary_vertices);

    int level() const { return level_; }
    int n_cells() const { return n_cells_; }
    int b() const { return b_; }
    std::size_t size() const { return representative_.size(); }
    std::size_t num_cells() const { return address_vertex_.size() / static_cast<std::size_t>(b_); }

    int vertex(std::size_t word, int label) const {
        return address_vertex_[word * static_cast<std::size_t>(b_) + static_cast<std::size_t>(label)];
    }
    std::span<const int> cell(std::size_t word) const {
        return {address_vertex_.data() + word * static_cast<std::size_t>(b_), static_cast<std::size_t>(b_)};
    }
    /// Least address (word * b + label) of a vertex.
    std::size_t representative(int v) const { return representative_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& boundary_vertices() const { return boundary_; }

private:
    int level_ = 0;
    int n_cells_ = 0;
    int b_ = 0;
    std::vector<int> address_vertex_;
    std::vector<std::size_t> representative_;
    std::vector<int> boundary_;
};

struct LevelMeasure {
    int level = 0;
    std::vector<Rational> mass;

    template <class Scalar>
    Vector<Scalar> as() const {
        Vector<Scalar> out(static_cast<Eigen::Index>(mass.size()));
        for (std::size_t i = 0; i < mass.size(); ++i) out(static_cast<Eigen::Index>(i)) = scalar_cast<Scalar>(mass[i]);
        return out;
    }
};

LevelGraph build_level(const SelfSimilarStructure& s, int n);
LevelMeasure measure_level(const SelfSimilarStructure& s, int n);
LevelMeasure measure_level(const SelfSimilarStructure& s, const LevelGraph& g);

/// Injection V_m -> V_n obtained by refining every address (w, u) to
/// (w c(u)^{n-m}, u), where c(u) fixes u.
std::vector<int> embed_level(const SelfSimilarStructure& s, const LevelGraph& coarse, const LevelGraph& fine);
std::vector<int> embed_level(const SelfSimilarStructure& s, int m, int n);

}  // namespace fractal
