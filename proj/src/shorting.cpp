#include "fractal/shorting.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace fractal {

VertexPartition vee_components(const ConductanceNetwork<Rational>& labelled, int level) {
    const auto n = static_cast<std::size_t>(labelled.size());
    VertexPartition p;
    p.level = level;
    p.class_of.assign(n, -1);
    std::vector<int> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (p.class_of[s] >= 0) continue;
        const int id = static_cast<int>(p.members.size());
        p.members.emplace_back();
        p.class_of[s] = id;
        stack.assign(1, static_cast<int>(s));
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            p.members.back().push_back(x);
            for (Eigen::Index y = 0; y < labelled.size(); ++y)
                if (carries_vee(labelled.edge_class(x, y)) && p.class_of[static_cast<std::size_t>(y)] < 0) {
                    p.class_of[static_cast<std::size_t>(y)] = id;
                    stack.push_back(static_cast<int>(y));
                }
        }
        std::sort(p.members.back().begin(), p.members.back().end());
    }
    return p;
}

VertexPartition partition(const OneParamFamily& fam, const LevelGraph& g) {
    return vee_components(replicate(fam.structure(), g, fam.labelled_template()), g.level());
}

VertexPartition partition(const OneParamFamily& fam, int n) { return partition(fam, build_level(fam.structure(), n)); }

InjectivityResult check_D_injectivity(const OneParamFamily& fam, int depth) {
    const auto& s = fam.structure();
    const auto b = static_cast<std::size_t>(s.b());
    for (int k = 0; k <= depth; ++k) {
        const LevelGraph gk = build_level(s, k), gk1 = build_level(s, k + 1);
        const VertexPartition pk = partition(fam, gk), pk1 = partition(fam, gk1);
        const std::size_t shift = word_count(s.n_cells, k);
        for (int i = 0; i < s.n_cells; ++i) {
            std::vector<int> image(gk.size());
            for (std::size_t x = 0; x < gk.size(); ++x) {
                const std::size_t rep = gk.representative(static_cast<int>(x));
                image[x] = gk1.vertex(static_cast<std::size_t>(i) * shift + rep / b, static_cast<int>(rep % b));
            }
            for (std::size_t x = 0; x < gk.size(); ++x)
                for (std::size_t y = x + 1; y < gk.size(); ++y) {
                    const bool before = pk.class_of[x] == pk.class_of[y];
                    const bool after = pk1.class_of[static_cast<std::size_t>(image[x])] ==
                                       pk1.class_of[static_cast<std::size_t>(image[y])];
                    if (before != after)
                        return {false, InjectivityWitness{k, i, static_cast<int>(x), static_cast<int>(y)}};
                }
        }
    }
    return {true, std::nullopt};
}

QuotientNetwork quotient(const FamilyModel& model, const LevelGraph& g) {
    const auto& fam = model.family();
    const auto& s = fam.structure();
    const auto inj = check_D_injectivity(fam);
    if (!inj.ok)
        throw DomainError("D-injectivity fails (cell " + std::to_string(inj.witness->cell + 1) + ", vertices " +
                          std::to_string(inj.witness->x) + ", " + std::to_string(inj.witness->y) +
                          "); refusing to build the quotient");
    QuotientNetwork q;
    q.partition = partition(fam, g);
    const auto k = static_cast<Eigen::Index>(q.partition.num_classes());
    q.network = ConductanceNetwork<Rational>(k);
    Rational scale = 1;
    for (int i = 0; i < g.level(); ++i) scale *= model.rho_g();
    for (std::size_t w = 0; w < g.num_cells(); ++w) {
        const Rational weight = scale / word_resistance(s, w, g.level());
        const auto cell = g.cell(w);
        for (const auto& e : fam.edges()) {
            if (e.cls != EdgeClass::one) continue;
            const int a = q.partition.class_of[static_cast<std::size_t>(cell[static_cast<std::size_t>(e.u)])];
            const int c = q.partition.class_of[static_cast<std::size_t>(cell[static_cast<std::size_t>(e.w)])];
            if (a != c) q.network.add(a, c, weight, EdgeClass::one);
        }
    }
    const LevelMeasure mu = measure_level(s, g);
    q.measure.assign(static_cast<std::size_t>(k), Rational(0));
    for (std::size_t x = 0; x < g.size(); ++x)
        q.measure[static_cast<std::size_t>(q.partition.class_of[x])] += mu.mass[x];
    const auto comp = components(q.network);
    if (std::any_of(comp.begin(), comp.end(), [](int c) { return c != 0; }))
        throw DomainError("quotient network H^" + std::to_string(g.level()) + " is disconnected");
    return q;
}

QuotientNetwork quotient(const FamilyModel& model, int n) { return quotient(model, build_level(model.structure(), n)); }

std::vector<int> class_embedding(const SelfSimilarStructure& s, const LevelGraph& gm, const VertexPartition& pm,
                                 const LevelGraph& gn, const VertexPartition& pn) {
    const auto emb = embed_level(s, gm, gn);
    std::vector<int> out(pm.num_classes());
    for (std::size_t c = 0; c < pm.num_classes(); ++c) {
        const auto& mem = pm.members[c];
        out[c] = pn.class_of[static_cast<std::size_t>(emb[static_cast<std::size_t>(mem.front())])];
        for (int x : mem)
            if (pn.class_of[static_cast<std::size_t>(emb[static_cast<std::size_t>(x)])] != out[c])
                throw StructuralError("class " + std::to_string(c) + " of level " + std::to_string(pm.level) +
                                      " splits at level " + std::to_string(pn.level));
    }
    for (std::size_t a = 0; a < out.size(); ++a)
        for (std::size_t b = a + 1; b < out.size(); ++b)
            if (out[a] == out[b])
                throw StructuralError("classes " + std::to_string(a) + " and " + std::to_string(b) + " of level " +
                                      std::to_string(pm.level) + " merge at level " + std::to_string(pn.level));
    return out;
}

TraceCheck quotient_trace_check(const ConductanceNetwork<Rational>& coarse, const ConductanceNetwork<Rational>& fine,
                                const std::vector<int>& embedding) {
    const auto t = trace(fine, embedding);
    return TraceCheck{t == coarse, t.max_relative_deviation(coarse)};
}

TraceCheck quotient_trace_check(const FamilyModel& model, int m, int n) {
    if (!(m < n)) throw DomainError("quotient_trace_check needs m < n");
    const auto& s = model.structure();
    const LevelGraph gm = build_level(s, m), gn = build_level(s, n);
    const auto qm = quotient(model, gm), qn = quotient(model, gn);
    return quotient_trace_check(qm.network, qn.network, class_embedding(s, gm, qm.partition, gn, qn.partition));
}

LimitStructure limit_structure(const FamilyModel& model, int check_depth) {
    const auto& fam = model.family();
    const auto& s = fam.structure();
    const auto inj = check_D_injectivity(fam);
    if (!inj.ok) throw DomainError("D-injectivity fails; the limit structure is not self-similar");

    const LevelGraph g0 = build_level(s, 0), g1 = build_level(s, 1);
    const VertexPartition p0 = partition(fam, g0), p1 = partition(fam, g1);
    const auto nb = static_cast<int>(p0.num_classes());

    LimitStructure out;
    SelfSimilarStructure& t = out.structure;
    t.n_cells = s.n_cells;
    t.resistance = s.resistance;
    t.theta = s.theta;
    for (int a = 0; a < nb; ++a) {
        std::vector<int> labels;
        for (int v : p0.members[static_cast<std::size_t>(a)]) labels.push_back(static_cast<int>(g0.representative(v)));
        std::sort(labels.begin(), labels.end());
        std::string name;
        Rational mass = 0;
        for (int x : labels) {
            if (!name.empty()) name += "~";
            name += s.boundary[static_cast<std::size_t>(x)];
            mass += s.boundary_mass[static_cast<std::size_t>(x)];
        }
        t.boundary.push_back(name);
        t.boundary_mass.push_back(mass);
        t.fixed_cell.push_back(s.fixed_cell[static_cast<std::size_t>(labels.front())]);
        out.boundary_classes.push_back(std::move(labels));
    }

    // phi_i(K) is the level-1 class of psi_i(x) for any x in K.
    auto phi = [&](int cell, int a) {
        const auto& labels = out.boundary_classes[static_cast<std::size_t>(a)];
        const int cls = p1.class_of[static_cast<std::size_t>(g1.vertex(static_cast<std::size_t>(cell), labels.front()))];
        for (int x : labels)
            if (p1.class_of[static_cast<std::size_t>(g1.vertex(static_cast<std::size_t>(cell), x))] != cls)
                throw StructuralError("phi_" + std::to_string(cell + 1) + " is not well defined on class " + t.boundary[static_cast<std::size_t>(a)]);
        return cls;
    };
    std::map<int, CellAddress> first;
    for (int i = 0; i < s.n_cells; ++i)
        for (int a = 0; a < nb; ++a) {
            const int cls = phi(i, a);
            const auto [it, inserted] = first.emplace(cls, CellAddress{i, a});
            if (!inserted) {
                if (it->second.cell == i)
                    throw StructuralError("phi_" + std::to_string(i + 1) + " identifies two boundary classes");
                t.gluing.push_back(Gluing{it->second, CellAddress{i, a}});
            }
        }
    try {
        t.validate();
    } catch (const ConfigError& e) {
        throw StructuralError(std::string("limit structure is invalid: ") + e.what());
    }

    for (int n = 0; n <= check_depth; ++n) {
        const LevelGraph gs = build_level(t, n), gn = build_level(s, n);
        const VertexPartition pn = partition(fam, gn);
        std::vector<int> image(gs.size(), -1);
        for (std::size_t w = 0; w < gs.num_cells(); ++w)
            for (int a = 0; a < nb; ++a) {
                const int v = gs.vertex(w, a);
                const int x = out.boundary_classes[static_cast<std::size_t>(a)].front();
                const int cls = pn.class_of[static_cast<std::size_t>(gn.vertex(w, x))];
                if (image[static_cast<std::size_t>(v)] < 0) image[static_cast<std::size_t>(v)] = cls;
                else if (image[static_cast<std::size_t>(v)] != cls)
                    throw StructuralError("limit vertex " + std::to_string(v) + " at level " + std::to_string(n) +
                                          " maps to two classes");
            }
        std::vector<int> hit(pn.num_classes(), 0);
        for (int cls : image) {
            if (cls < 0 || ++hit[static_cast<std::size_t>(cls)] > 1)
                throw StructuralError("limit structure is not bijective with the level-" + std::to_string(n) +
                                      " classes (class " + std::to_string(cls) + ")");
        }
        if (std::find(hit.begin(), hit.end(), 0) != hit.end())
            throw StructuralError("level-" + std::to_string(n) + " class missed by the limit structure");
    }
    out.form = quotient(model, g0).network;
    return out;
}

std::optional<Rational> proportionality(const ConductanceNetwork<Rational>& a, const ConductanceNetwork<Rational>& b) {
    if (a.size() != b.size()) return std::nullopt;
    std::optional<Rational> c;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = i + 1; j < a.size(); ++j) {
            const Rational &x = a.conductance(i, j), &y = b.conductance(i, j);
            if (y == 0) {
                if (x != 0) return std::nullopt;
                continue;
            }
            const Rational r = x / y;
            if (c && *c != r) return std::nullopt;
            c = r;
        }
    return c;
}

FixedPointReport fixed_point_check(const SelfSimilarStructure& s, const ConductanceNetwork<Rational>& form,
                                   const Rational& rho_g) {
    FixedPointReport rep;
    const auto comp = components(form);
    rep.irreducible = std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
    if (rep.irreducible) {
        const auto c = proportionality(renormalize(s, form), form);
        rep.fixed = c.has_value();
        if (c) rep.eigenvalue = *c;
        rep.matches_rho_g = rep.fixed && rep.eigenvalue * rho_g == 1;
    }
    rep.regular = std::all_of(s.resistance.begin(), s.resistance.end(), [&](const Rational& r) { return r < rho_g; });
    return rep;
}

FixedPointReport fixed_point_check(const FamilyModel& model) {
    const auto lim = limit_structure(model);
    return fixed_point_check(lim.structure, lim.form, model.rho_g());
}

}  // namespace fractal
