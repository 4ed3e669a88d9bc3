#pragma once

#include "fractal/family.hpp"
#include "fractal/network.hpp"
#include "fractal/structure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fractal {

/// Classes of V_n under shorting of `vee` edges. Class ids are ordered by
/// least member.
struct VertexPartition {
    int level = 0;
    std::vector<int> class_of;
    std::vector<std::vector<int>> members;

    std::size_t num_classes() const { return members.size(); }
};

/// Connected components of the `vee`-carrying edges of a labelled network.
VertexPartition vee_components(const ConductanceNetwork<Rational>& labelled, int level);

VertexPartition partition(const OneParamFamily& fam, const LevelGraph& g);
VertexPartition partition(const OneParamFamily& fam, int n);

struct InjectivityWitness {
    int level = 0;
    int cell = 0;
    int x = 0;  ///< vertex of V_level
    int y = 0;
};

struct InjectivityResult {
    bool ok = true;
    std::optional<InjectivityWitness> witness;
};

/// x ~ y iff psi_i(x) ~ psi_i(y), for every cell i and x, y in V_k, k <= depth.
InjectivityResult check_D_injectivity(const OneParamFamily& fam, int depth = 0);

/// H^n: classes of V_n with conductances sum r_w^{-1} rho_G^n over `one`
/// edges joining distinct classes, and the pushforward measure nu_n.
struct QuotientNetwork {
    VertexPartition partition;
    ConductanceNetwork<Rational> network;
    std::vector<Rational> measure;
};

/// Throws DomainError when D-injectivity fails or H^n is disconnected.
QuotientNetwork quotient(const FamilyModel& model, const LevelGraph& g);
QuotientNetwork quotient(const FamilyModel& model, int n);

/// Class of level m containing x mapped to the level-n class containing the
/// refined address of x.
std::vector<int> class_embedding(const SelfSimilarStructure& s, const LevelGraph& gm, const VertexPartition& pm,
                                 const LevelGraph& gn, const VertexPartition& pn);

struct TraceCheck {
    bool ok = false;
    double max_deviation = 0.0;
};

/// trace(fine, embedding) against coarse; exact for rationals.
TraceCheck quotient_trace_check(const ConductanceNetwork<Rational>& coarse, const ConductanceNetwork<Rational>& fine,
                                const std::vector<int>& embedding);
TraceCheck quotient_trace_check(const FamilyModel& model, int m, int n);

/// S_* with boundary F_*^0 and the form H^0.
struct LimitStructure {
    SelfSimilarStructure structure;
    ConductanceNetwork<Rational> form;
    /// Level-0 class of each label of S_*: members are labels of S.
    std::vector<std::vector<int>> boundary_classes;
};

class StructuralError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Builds S_* and checks that build_level(S_*, n) matches the level-n classes
/// bijectively for n <= check_depth.
LimitStructure limit_structure(const FamilyModel& model, int check_depth = 3);

struct FixedPointReport {
    bool fixed = false;           ///< Lambda_*(H^0) is a multiple of H^0
    Rational eigenvalue;          ///< that multiple
    bool matches_rho_g = false;   ///< eigenvalue == rho_G^{-1}
    bool regular = false;         ///< r_i rho_G^{-1} < 1 for every i
    bool irreducible = false;     ///< H^0 connected
    bool ok() const { return fixed && matches_rho_g && regular && irreducible; }
};

FixedPointReport fixed_point_check(const SelfSimilarStructure& s, const ConductanceNetwork<Rational>& form,
                                   const Rational& rho_g);
FixedPointReport fixed_point_check(const FamilyModel& model);

/// Exact ratio c with a = c b when it exists.
std::optional<Rational> proportionality(const ConductanceNetwork<Rational>& a, const ConductanceNetwork<Rational>& b);

}  // namespace fractal
