#include "fractal/family.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fractal {

OneParamFamily::OneParamFamily(SelfSimilarStructure s, std::vector<TemplateEdge> edges)
    : s_(std::move(s)), edges_(std::move(edges)) {
    std::set<std::pair<int, int>> seen;
    bool has_vee = false, has_one = false;
    for (const auto& e : edges_) {
        if (e.u < 0 || e.w < 0 || e.u >= s_.b() || e.w >= s_.b()) throw ConfigError("family edge references an unknown label");
        if (e.u == e.w) throw ConfigError("family edge must join distinct labels");
        if (e.cls != EdgeClass::one && e.cls != EdgeClass::vee) throw ConfigError("family edges must be `one` or `vee`");
        if (!seen.insert(std::minmax(e.u, e.w)).second) throw ConfigError("family edge listed twice");
        (e.cls == EdgeClass::vee ? has_vee : has_one) = true;
    }
    if (!has_vee) throw ConfigError("family needs at least one `vee` edge");
    if (!has_one) throw ConfigError("family needs at least one `one` edge");
}

std::vector<Rational> default_samples(std::size_t count) {
    std::vector<Rational> out;
    for (std::size_t k = 0; k < count; ++k) out.emplace_back(static_cast<long>(3 * k + 5), 2);
    return out;
}

FamilyFit fit_rational(const OneParamFamily& fam, int max_degree, std::vector<Rational> samples) {
    if (samples.empty()) samples = default_samples(static_cast<std::size_t>(2 * max_degree + 4));
    if (samples.size() < static_cast<std::size_t>(2 * max_degree + 2))
        throw DomainError("fit_rational needs at least 2D+2 samples");
    std::vector<Rational> alphas, rhos;
    for (const auto& v : samples) {
        const auto ar = extract_alpha_rho<Rational>(fam, v);
        alphas.push_back(ar.alpha);
        rhos.push_back(ar.rho);
    }
    return FamilyFit{fit_rational_function(samples, alphas, max_degree),
                     fit_rational_function(samples, rhos, max_degree), std::move(samples)};
}

VMin compute_vmin(const FamilyFit& fit, const Rational& r_max) {
    const Polynomial& p = fit.alpha.num;
    const Polynomial& q = fit.alpha.den;
    const Polynomial fixed_line = p - Polynomial::identity() * q;
    if (fixed_line.is_zero()) throw DomainError("family is a fixed line (alpha(v) = v identically)");
    const Polynomial slope = p.derivative() * q - p * q.derivative();
    const Polynomial at_rmax = fit.rho.num - r_max * fit.rho.den;

    VMin best;
    for (const Polynomial* poly : {&slope, &fixed_line, &at_rmax}) {
        if (poly->is_zero()) continue;
        for (const auto& root : positive_roots(*poly))
            if (root.value > best.value) {
                best.value = root.value;
                best.exact = root.exact;
            }
    }
    if (best.value == 0.0) best.exact = Rational(0);
    return best;
}

LimitConstants limit_constants(const FamilyFit& fit) {
    LimitConstants out;
    const auto& rho = fit.rho;
    if (rho.num.degree() == rho.den.degree()) {
        const Rational lim = rho.num.leading() / rho.den.leading();
        if (lim > 0) out.rho_g = lim;
        else out.violation = "rho has a non-positive limit";
    } else {
        out.violation = rho.num.degree() > rho.den.degree() ? "rho -> infinity as v -> infinity"
                                                             : "rho -> 0 as v -> infinity";
    }
    const auto& alpha = fit.alpha;
    if (alpha.num.degree() == alpha.den.degree() + 1) {
        const Rational b = alpha.den.leading() / alpha.num.leading();
        if (b > 0) out.beta = b;
        else if (out.violation.empty()) out.violation = "alpha(v)/v has a non-positive limit";
    } else if (out.violation.empty()) {
        out.violation = "alpha(v)/v has no finite positive limit";
    }
    const double probe = 1e6;
    out.rho_g_probe = rho(probe);
    out.beta_probe = probe / alpha(probe);
    out.cross_checked = out.rho_g && out.beta && nearly_equal(out.rho_g_probe, to_double(*out.rho_g), 1e-4) &&
                        nearly_equal(out.beta_probe, to_double(*out.beta), 1e-4);
    return out;
}

FamilyModel::FamilyModel(OneParamFamily fam, int max_degree) : fam_(std::move(fam)) {
    fit_ = fit_rational(fam_, max_degree);
    vmin_ = compute_vmin(fit_, fam_.structure().r_max());
    limits_ = limit_constants(fit_);
}

const Rational& FamilyModel::rho_g() const {
    if (!limits_.rho_g) throw DomainError("family has no finite positive rho_G: " + limits_.violation);
    return *limits_.rho_g;
}

void FamilyModel::check_domain(double v) const {
    if (!(v > vmin_.value)) {
        std::ostringstream msg;
        msg << "alpha^{-1} is defined only for v > v_min = " << vmin_.value << " (got " << v << ")";
        throw DomainError(msg.str());
    }
}

double FamilyModel::alpha_inverse(double v, int n) const {
    if (n < 0) throw DomainError("alpha_inverse needs n >= 0");
    const double vm = vmin_.value;
    // v_min itself is admissible when it is a fixed point of alpha.
    if (vm > 0 && std::abs(v - vm) <= 1e-12 * vm && nearly_equal(alpha(vm), vm, 1e-12)) return v;
    for (int k = 0; k < n; ++k) {
        check_domain(v);
        double lo = v, hi = 2.0 * v;
        while (alpha(hi) < v) {
            lo = hi;
            hi *= 2.0;
            if (!std::isfinite(hi)) throw DomainError("alpha_inverse: alpha does not reach v");
        }
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (alpha(mid) < v ? lo : hi) = mid;
        }
        v = alpha(hi) - v < v - alpha(lo) ? hi : lo;
    }
    return v;
}

std::optional<Rational> FamilyModel::alpha_inverse_exact(const Rational& v0, int n) const {
    Rational v = v0;
    for (int k = 0; k < n; ++k) {
        if (vmin_.exact && v == *vmin_.exact && alpha(v) == v) return v;
        check_domain(to_double(v));
        const Polynomial eq = fit_.alpha.num - v * fit_.alpha.den;
        std::optional<Rational> root;
        if (eq.degree() == 1) {
            root = -eq.coeff(0) / eq.coeff(1);
        } else {
            root = recognise_root(eq, alpha_inverse(to_double(v), 1));
        }
        if (!root || !(*root >= v)) return std::nullopt;
        v = *root;
    }
    return v;
}

Rational FamilyModel::alpha_power(const Rational& u, int n) const {
    Rational v = u;
    for (int k = 0; k < n; ++k) v = alpha(v);
    return v;
}

double FamilyModel::rho_n(double v, int n) const {
    double out = 1.0;
    for (int i = 0; i < n; ++i) {
        v = alpha_inverse(v, 1);
        out *= rho(v);
    }
    return out;
}

std::optional<Rational> FamilyModel::rho_n_exact(const Rational& v, int n) const {
    const auto orbit = exact_inverse_orbit(*this, v, n);
    if (!orbit) return std::nullopt;
    Rational out = 1;
    for (int i = 1; i <= n; ++i) out *= rho((*orbit)[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<Rational> orbit_from_base(const FamilyModel& model, const Rational& u, int n) {
    if (!(to_double(u) > model.vmin().value) && !(model.vmin().exact && u == *model.vmin().exact))
        throw DomainError("orbit base must lie above v_min");
    std::vector<Rational> orbit(static_cast<std::size_t>(n + 1));
    orbit[static_cast<std::size_t>(n)] = u;
    for (int k = n - 1; k >= 0; --k) orbit[static_cast<std::size_t>(k)] = model.alpha(orbit[static_cast<std::size_t>(k + 1)]);
    return orbit;
}

std::optional<std::vector<Rational>> exact_inverse_orbit(const FamilyModel& model, const Rational& v, int n) {
    std::vector<Rational> orbit{v};
    for (int k = 0; k < n; ++k) {
        const auto next = model.alpha_inverse_exact(orbit.back(), 1);
        if (!next) return std::nullopt;
        orbit.push_back(*next);
    }
    return orbit;
}

ConductanceNetwork<Rational> level_form_exact(const FamilyModel& model, const LevelGraph& g,
                                              const std::vector<Rational>& orbit) {
    const int n = g.level();
    if (orbit.size() < static_cast<std::size_t>(n + 1)) throw DomainError("level_form_exact: orbit too short");
    Rational rho_n = 1;
    for (int i = 1; i <= n; ++i) rho_n *= model.rho(orbit[static_cast<std::size_t>(i)]);
    const auto base = model.family().eval<Rational>(orbit[static_cast<std::size_t>(n)]);
    return replicate(model.structure(), g, base).scaled(rho_n);
}

template <>
ConductanceNetwork<double> level_form<double>(const FamilyModel& model, const LevelGraph& g, const double& v) {
    const int n = g.level();
    const double u = model.alpha_inverse(v, n);
    const double scale = model.rho_n(v, n);
    return replicate(model.structure(), g, model.family().eval<double>(u)).scaled(scale);
}

template <>
ConductanceNetwork<Rational> level_form<Rational>(const FamilyModel& model, const LevelGraph& g, const Rational& v) {
    const auto orbit = exact_inverse_orbit(model, v, g.level());
    if (!orbit) throw DomainError("alpha^{-n}(" + to_string(v) + ") is not rational; use float mode");
    return level_form_exact(model, g, *orbit);
}

std::vector<double> probe_grid(const FamilyModel& model, std::size_t count) {
    const double base = std::max(model.vmin().value, 1e-3);
    const double lo = base + 1e-6 * std::max(1.0, base);
    const double hi = 1e6;
    std::vector<double> grid;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        grid.push_back(lo * std::pow(hi / lo, t));
    }
    return grid;
}

namespace {

bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> comp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) comp[static_cast<std::size_t>(i)] = i;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [a, b] : edges) {
            const int m = std::min(comp[static_cast<std::size_t>(a)], comp[static_cast<std::size_t>(b)]);
            for (int x : {a, b})
                if (comp[static_cast<std::size_t>(x)] != m) {
                    comp[static_cast<std::size_t>(x)] = m;
                    changed = true;
                }
        }
    }
    for (int c : comp)
        if (c != 0) return false;
    return true;
}

}  // namespace

bool non_vanishing(const OneParamFamily& fam) {
    std::vector<std::pair<int, int>> vee;
    for (const auto& e : fam.edges())
        if (e.cls == EdgeClass::vee) vee.emplace_back(e.u, e.w);
    return !connected(fam.structure().b(), vee);
}

bool path_condition(const OneParamFamily& fam) {
    const LevelGraph g = build_level(fam.structure(), 1);
    const auto net = replicate(fam.structure(), g, fam.labelled_template());
    const auto& bv = g.boundary_vertices();
    for (const auto& e : fam.edges()) {
        if (e.cls != EdgeClass::vee) continue;
        std::vector<char> seen(g.size(), 0);
        std::vector<int> stack{bv[static_cast<std::size_t>(e.u)]};
        seen[static_cast<std::size_t>(stack.back())] = 1;
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            for (Eigen::Index y = 0; y < net.size(); ++y)
                if (carries_vee(net.edge_class(x, y)) && !seen[static_cast<std::size_t>(y)]) {
                    seen[static_cast<std::size_t>(y)] = 1;
                    stack.push_back(static_cast<int>(y));
                }
        }
        if (seen[static_cast<std::size_t>(bv[static_cast<std::size_t>(e.w)])]) return true;
    }
    return false;
}

AssumptionReport verify_assumptions(const FamilyModel& model, const std::vector<double>& grid) {
    AssumptionReport rep;
    std::ostringstream notes;
    const double r_max = to_double(model.structure().r_max());

    rep.regular_on_grid = true;
    std::vector<char> invariant(grid.size(), 0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double v = grid[k];
        try {
            const auto ar = extract_alpha_rho<double>(model.family(), v);
            invariant[k] = nearly_equal(ar.alpha, model.alpha(v), 1e-8) && nearly_equal(ar.rho, model.rho(v), 1e-8);
        } catch (const NotInvariant&) {
            invariant[k] = 0;
        }
        if (!invariant[k]) notes << "invariance fails at v=" << v << "; ";
        if (!(r_max / model.rho(v) < 1.0)) {
            rep.regular_on_grid = false;
            notes << "r_max/rho(v) >= 1 at v=" << v << "; ";
        }
    }
    rep.invariant_on_grid = std::all_of(invariant.begin(), invariant.end(), [](char c) { return c != 0; });
    rep.invariant_from = std::numeric_limits<double>::infinity();
    for (std::size_t k = grid.size(); k-- > 0 && invariant[k];) rep.invariant_from = grid[k];
    const auto& lim = model.limits();
    if (lim.rho_g) {
        rep.regular_at_limit = model.structure().r_max() < *lim.rho_g;
        if (!rep.regular_at_limit)
            notes << "r_max = " << to_string(model.structure().r_max()) << " is not below rho_G = " << to_string(*lim.rho_g)
                  << "; ";
    } else {
        notes << lim.violation << "; ";
    }
    rep.non_vanishing = non_vanishing(model.family());
    if (!rep.non_vanishing) notes << "`vee` edges alone connect F^0; ";
    rep.path_condition = path_condition(model.family());
    if (!rep.path_condition) notes << "no `vee` edge is bridged by a `vee` path at level 1; ";
    rep.beta_gt_one = lim.beta && *lim.beta > 1;
    if (!rep.beta_gt_one) notes << "beta is not greater than 1; ";
    rep.notes = notes.str();
    if (rep.notes.size() >= 2) rep.notes.resize(rep.notes.size() - 2);
    return rep;
}

}  // namespace fractal
