#pragma once

#include "fractal/network.hpp"
#include "fractal/polynomial.hpp"
#include "fractal/structure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fractal {

/// Edge of the family template on F^0, conductance 1 (`one`) or v (`vee`).
struct TemplateEdge {
    int u = 0;
    int w = 0;
    EdgeClass cls = EdgeClass::one;
};

/// One-parameter template E^(0)_v over the boundary of a structure.
class OneParamFamily {
public:
    OneParamFamily() = default;
    /// Throws ConfigError unless every edge joins distinct labels once, at
    /// least one edge is `vee` and at least one is `one`.
    OneParamFamily(SelfSimilarStructure s, std::vector<TemplateEdge> edges);

    const SelfSimilarStructure& structure() const { return s_; }
    const std::vector<TemplateEdge>& edges() const { return edges_; }

    template <class Scalar>
    ConductanceNetwork<Scalar> eval(const Scalar& v) const {
        if (!(v > Scalar(0))) throw DomainError("family parameter v must be positive");
        ConductanceNetwork<Scalar> net(s_.b());
        for (const auto& e : edges_) net.set(e.u, e.w, e.cls == EdgeClass::vee ? v : Scalar(1), e.cls);
        return net;
    }

    /// Template with unit conductances and class labels only (for partitions).
    ConductanceNetwork<Rational> labelled_template() const { return eval<Rational>(Rational(1)); }

private:
    SelfSimilarStructure s_;
    std::vector<TemplateEdge> edges_;
};

/// Lambda(E_v) = rho(v)^{-1} E_{alpha(v)}.
template <class Scalar>
struct AlphaRho {
    Scalar v;
    Scalar alpha;
    Scalar rho;
};

class NotInvariant : public DomainError {
public:
    using DomainError::DomainError;
};

/// Renormalizes eval(v) and reads alpha, rho off the template pattern. Throws
/// NotInvariant when the traced network does not have the template's shape.
template <class Scalar>
AlphaRho<Scalar> extract_alpha_rho(const OneParamFamily& fam, const Scalar& v, double rel_tol = 1e-9) {
    const ConductanceNetwork<Scalar> t = renormalize(fam.structure(), fam.eval(v));
    std::optional<Scalar> one, vee;
    auto fail = [&](const std::string& why) {
        throw NotInvariant("not a one-parameter invariant family at v = " + std::to_string(to_double(v)) + ": " + why);
    };
    auto match = [&](std::optional<Scalar>& slot, const Scalar& value) {
        if (!slot) slot = value;
        else if (!nearly_equal<Scalar>(*slot, value, rel_tol)) fail("conductances within a class differ");
    };
    std::vector<char> in_template(static_cast<std::size_t>(t.size() * t.size()), 0);
    for (const auto& e : fam.edges()) {
        match(e.cls == EdgeClass::vee ? vee : one, t.conductance(e.u, e.w));
        in_template[static_cast<std::size_t>(e.u * t.size() + e.w)] = 1;
        in_template[static_cast<std::size_t>(e.w * t.size() + e.u)] = 1;
    }
    Scalar scale(0);
    for (Eigen::Index i = 0; i < t.size(); ++i)
        for (Eigen::Index j = 0; j < t.size(); ++j) scale = std::max<Scalar>(scale, t.conductance(i, j));
    for (Eigen::Index i = 0; i < t.size(); ++i)
        for (Eigen::Index j = i + 1; j < t.size(); ++j) {
            if (in_template[static_cast<std::size_t>(i * t.size() + j)]) continue;
            const Scalar& c = t.conductance(i, j);
            if constexpr (is_exact_v<Scalar>) {
                if (c != 0) fail("conductance outside the template pattern");
            } else {
                if (std::abs(c) > rel_tol * scale) fail("conductance outside the template pattern");
            }
        }
    if (!(*one > Scalar(0))) fail("template `one` edges vanish after renormalization");
    return AlphaRho<Scalar>{v, Scalar(*vee / *one), Scalar(Scalar(1) / *one)};
}

struct FamilyFit {
    RationalFunction alpha;
    RationalFunction rho;
    std::vector<Rational> samples;
};

/// Default sample points 5/2, 4, 11/2, ... (count of them).
std::vector<Rational> default_samples(std::size_t count);

/// Exact interpolation of alpha and rho from renormalized samples (at least
/// 2D+2 points; the defaults use 2D+4).
FamilyFit fit_rational(const OneParamFamily& fam, int max_degree = 4, std::vector<Rational> samples = {});

struct VMin {
    double value = 0.0;
    std::optional<Rational> exact;
};

/// Largest root of alpha' = 0, alpha(v) = v, rho(v) = r_max, and 0.
VMin compute_vmin(const FamilyFit& fit, const Rational& r_max);

struct LimitConstants {
    /// rho_G = lim rho(v); empty when the fit has an infinite or zero limit.
    std::optional<Rational> rho_g;
    /// beta = 1 / lim alpha(v)/v.
    std::optional<Rational> beta;
    double rho_g_probe = 0.0;  ///< rho(1e6)
    double beta_probe = 0.0;   ///< 1e6 / alpha(1e6)
    bool cross_checked = false;
    std::string violation;
};

LimitConstants limit_constants(const FamilyFit& fit);

/// Fitted family with its derived constants. Built once; read-only after.
class FamilyModel {
public:
    explicit FamilyModel(OneParamFamily fam, int max_degree = 4);

    const OneParamFamily& family() const { return fam_; }
    const SelfSimilarStructure& structure() const { return fam_.structure(); }
    const FamilyFit& fit() const { return fit_; }
    const VMin& vmin() const { return vmin_; }
    const LimitConstants& limits() const { return limits_; }
    /// rho_G, throwing DomainError when the limit is not finite and positive.
    const Rational& rho_g() const;

    double alpha(double v) const { return fit_.alpha(v); }
    Rational alpha(const Rational& v) const { return fit_.alpha(v); }
    double rho(double v) const { return fit_.rho(v); }
    Rational rho(const Rational& v) const { return fit_.rho(v); }

    /// alpha^{-n}(v) by bisection; DomainError below v_min.
    double alpha_inverse(double v, int n = 1) const;
    /// Exact alpha^{-n}(v) when every iterate is rational and recognisable.
    std::optional<Rational> alpha_inverse_exact(const Rational& v, int n = 1) const;
    /// alpha^n(u) by forward iteration.
    Rational alpha_power(const Rational& u, int n) const;

    double rho_n(double v, int n) const;
    std::optional<Rational> rho_n_exact(const Rational& v, int n) const;

private:
    void check_domain(double v) const;

    OneParamFamily fam_;
    FamilyFit fit_;
    VMin vmin_;
    LimitConstants limits_;
};

/// E^(n)_v = rho_n(v) R^n(E^(0)_{alpha^{-n}(v)}) on V_n.
template <class Scalar>
ConductanceNetwork<Scalar> level_form(const FamilyModel& model, const LevelGraph& g, const Scalar& v);

template <>
ConductanceNetwork<double> level_form<double>(const FamilyModel& model, const LevelGraph& g, const double& v);
/// Exact mode; throws DomainError when some alpha^{-k}(v) is not rational.
template <>
ConductanceNetwork<Rational> level_form<Rational>(const FamilyModel& model, const LevelGraph& g, const Rational& v);

template <class Scalar>
ConductanceNetwork<Scalar> level_form(const FamilyModel& model, const Scalar& v, int n) {
    return level_form<Scalar>(model, build_level(model.structure(), n), v);
}

/// Inverse orbit (alpha^{-k}(v))_{k=0..n} of v = alpha^n(u), computed exactly
/// by forward iteration from u.
std::vector<Rational> orbit_from_base(const FamilyModel& model, const Rational& u, int n);
/// Exact inverse orbit of v, when every iterate is recognisably rational.
std::optional<std::vector<Rational>> exact_inverse_orbit(const FamilyModel& model, const Rational& v, int n);

/// Exact level form from a precomputed inverse orbit (orbit[k] = alpha^{-k}(v),
/// at least level + 1 entries).
ConductanceNetwork<Rational> level_form_exact(const FamilyModel& model, const LevelGraph& g,
                                              const std::vector<Rational>& orbit);

struct AssumptionReport {
    bool invariant_on_grid = false;
    double invariant_from = 0.0;  ///< smallest probe point where invariance held
    bool regular_on_grid = false;
    bool regular_at_limit = false;
    bool non_vanishing = false;
    bool path_condition = false;
    bool beta_gt_one = false;
    std::string notes;

    bool asymptotically_regular() const { return regular_on_grid && regular_at_limit; }
    bool all() const {
        return invariant_on_grid && asymptotically_regular() && non_vanishing && path_condition && beta_gt_one;
    }
};

/// Log-spaced probe points in (max(v_min, 1e-3) + eps, 1e6).
std::vector<double> probe_grid(const FamilyModel& model, std::size_t count = 24);

AssumptionReport verify_assumptions(const FamilyModel& model, const std::vector<double>& grid);
inline AssumptionReport verify_assumptions(const FamilyModel& model) {
    return verify_assumptions(model, probe_grid(model));
}

/// Removing all `one` edges from the template disconnects F^0.
bool non_vanishing(const OneParamFamily& fam);
/// Some `vee` edge of the template has its endpoints joined by a path of
/// `vee` edges in the replicated level-1 network.
bool path_condition(const OneParamFamily& fam);

}  // namespace fractal
