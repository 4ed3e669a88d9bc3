// fractal: command line front end.
//
// Exit codes: 0 pass, 1 check failure, 2 usage or config error.

#include "fractal/config.hpp"
#include "fractal/family.hpp"
#include "fractal/metrics.hpp"
#include "fractal/shorting.hpp"
#include "fractal/simulate.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace fractal;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string mode = "auto";
    int depth = 2;
    std::uint64_t seed = 1;
    std::string out;
    std::string v_grid;
    // per-command
    int n = 1;
    int level = 2;
    std::string v = "2";
    int nmax = 8;
    std::string from;
    std::string to;
    bool points = false;
    std::size_t n_paths = 10000;
    std::string paper;
    std::string emit;
};

class CheckFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void kv(const std::string& key, const std::string& value) { std::cout << key << "=" << value << "\n"; }
void kv(const std::string& key, bool value) { kv(key, std::string(value ? "true" : "false")); }
void kv(const std::string& key, const char* value) { kv(key, std::string(value)); }
void kv(const std::string& key, double value) {
    std::ostringstream s;
    s << std::setprecision(12) << value;
    kv(key, s.str());
}
void kv(const std::string& key, const Rational& value) { kv(key, to_string(value)); }
template <class Int>
    requires std::is_integral_v<Int>
void kv(const std::string& key, Int value) {
    kv(key, std::to_string(value));
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(to_double(parse_rational(item)));
    return out;
}

std::vector<Rational> parse_rationals(const std::string& s) {
    std::vector<Rational> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(parse_rational(item));
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

double v_of(const Options& o) { return to_double(parse_rational(o.v)); }

StructureConfig config_of(const Options& o) { return load_config(o.config); }

FamilyModel model_of(const StructureConfig& cfg) {
    if (!cfg.family) throw ConfigError("config has no 'family' block");
    return FamilyModel(*cfg.family);
}

bool exact_mode(const Options& o) {
    if (o.mode != "auto" && o.mode != "exact" && o.mode != "float")
        throw ConfigError("--mode must be exact, float or auto");
    return o.mode != "float";
}

std::unique_ptr<std::ostream> open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto f = std::make_unique<std::ofstream>(path);
    if (!*f) throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

/// Writes through `body` to the file in --out, or to stdout.
template <class F>
void emit(const Options& o, const std::string& name, F&& body) {
    if (o.out.empty()) {
        body(std::cout);
        return;
    }
    const fs::path p = fs::path(o.out) / name;
    auto f = open_out(p);
    body(*f);
    kv("wrote", p.string());
}

// ---- validate

int cmd_validate(const Options& o) {
    const auto cfg = config_of(o);
    const auto& s = cfg.structure;
    kv("structure", "ok");
    kv("n_cells", s.n_cells);
    kv("boundary_points", s.b());
    bool ok = true;
    if (cfg.form) {
        const auto eigen = proportionality(renormalize(s, *cfg.form), *cfg.form);
        kv("form.fixed", eigen.has_value());
        if (eigen && *eigen > 0) {
            const auto rep = fixed_point_check(s, *cfg.form, Rational(1) / *eigen);
            kv("form.eigenvalue", rep.eigenvalue);
            kv("form.regular", rep.regular);
            kv("form.irreducible", rep.irreducible);
            ok = ok && rep.ok();
        } else {
            ok = false;
        }
    }
    if (cfg.family) {
        const FamilyModel model(*cfg.family);
        const auto rep = verify_assumptions(model);
        kv("alpha", model.fit().alpha.str());
        kv("rho", model.fit().rho.str());
        kv("v_min", model.vmin().value);
        kv("invariant_on_grid", rep.invariant_on_grid);
        kv("regular_on_grid", rep.regular_on_grid);
        kv("regular_at_limit", rep.regular_at_limit);
        kv("non_vanishing", rep.non_vanishing);
        kv("path_condition", rep.path_condition);
        kv("beta_gt_one", rep.beta_gt_one);
        if (!rep.notes.empty()) kv("notes", rep.notes);
        const auto inj = check_D_injectivity(*cfg.family, o.depth);
        kv("d_injective", inj.ok);
        ok = ok && rep.all() && inj.ok;
    }
    kv("result", ok ? "pass" : "fail");
    return ok ? 0 : 1;
}

// ---- family

int cmd_family_fit(const Options& o) {
    const auto model = model_of(config_of(o));
    kv("alpha", model.fit().alpha.str());
    kv("rho", model.fit().rho.str());
    kv("samples", model.fit().samples.size());
    emit(o, "fit.csv", [&](std::ostream& out) {
        out << kCsvHeader << "\nfunction,part,power,coefficient\n";
        auto rows = [&](const char* f, const RationalFunction& r) {
            for (int k = 0; k <= r.num.degree(); ++k) out << f << ",num," << k << "," << to_string(r.num.coeff(k)) << "\n";
            for (int k = 0; k <= r.den.degree(); ++k) out << f << ",den," << k << "," << to_string(r.den.coeff(k)) << "\n";
        };
        rows("alpha", model.fit().alpha);
        rows("rho", model.fit().rho);
    });
    return 0;
}

int cmd_family_verify(const Options& o) {
    const auto model = model_of(config_of(o));
    const auto rep = verify_assumptions(model);
    kv("invariant_on_grid", rep.invariant_on_grid);
    kv("invariant_from", rep.invariant_from);
    kv("regular_on_grid", rep.regular_on_grid);
    kv("regular_at_limit", rep.regular_at_limit);
    kv("non_vanishing", rep.non_vanishing);
    kv("path_condition", rep.path_condition);
    kv("beta_gt_one", rep.beta_gt_one);
    if (!rep.notes.empty()) kv("notes", rep.notes);
    kv("result", rep.all() ? "pass" : "fail");
    return rep.all() ? 0 : 1;
}

int cmd_family_constants(const Options& o) {
    const auto model = model_of(config_of(o));
    const auto& lim = model.limits();
    kv("rho_g", lim.rho_g ? to_string(*lim.rho_g) : std::string("none"));
    kv("beta", lim.beta ? to_string(*lim.beta) : std::string("none"));
    kv("rho_g_probe", lim.rho_g_probe);
    kv("beta_probe", lim.beta_probe);
    kv("cross_checked", lim.cross_checked);
    kv("v_min", model.vmin().value);
    if (model.vmin().exact) kv("v_min_exact", *model.vmin().exact);
    if (!lim.violation.empty()) kv("violation", lim.violation);
    return lim.rho_g && lim.beta && lim.cross_checked ? 0 : 1;
}

int cmd_family_table(const Options& o) {
    const auto model = model_of(config_of(o));
    emit(o, "family_table.csv", [&](std::ostream& out) {
        out << kCsvHeader << "\nn,alpha_inv_n,rho_n\n" << std::setprecision(17);
        for (int k = 0; k <= o.n; ++k)
            out << k << "," << (k == 0 ? v_of(o) : model.alpha_inverse(v_of(o), k)) << "," << model.rho_n(v_of(o), k) << "\n";
    });
    return 0;
}

// ---- short

int cmd_short_partition(const Options& o) {
    const auto cfg = config_of(o);
    if (!cfg.family) throw ConfigError("config has no 'family' block");
    const LevelGraph g = build_level(cfg.structure, o.n);
    const auto p = partition(*cfg.family, g);
    kv("level", o.n);
    kv("vertices", g.size());
    kv("classes", p.num_classes());
    emit(o, "partition_" + std::to_string(o.n) + ".csv", [&](std::ostream& out) {
        out << kCsvHeader << "\nvertex,class\n";
        for (std::size_t x = 0; x < g.size(); ++x) out << x << "," << p.class_of[x] << "\n";
    });
    return 0;
}

int cmd_short_quotient(const Options& o) {
    const auto model = model_of(config_of(o));
    const auto q = quotient(model, o.n);
    kv("level", o.n);
    kv("classes", q.partition.num_classes());
    emit(o, "quotient_" + std::to_string(o.n) + ".csv", [&](std::ostream& out) { write_network_csv(out, q.network); });
    emit(o, "quotient_measure_" + std::to_string(o.n) + ".csv", [&](std::ostream& out) {
        out << kCsvHeader << "\nclass,mass\n";
        for (std::size_t c = 0; c < q.measure.size(); ++c) out << c << "," << to_string(q.measure[c]) << "\n";
    });
    return 0;
}

int cmd_short_check(const Options& o) {
    const auto model = model_of(config_of(o));
    bool ok = true;
    const auto inj = check_D_injectivity(model.family(), o.depth);
    kv("d_injective", inj.ok);
    if (!inj.ok) {
        const auto& w = *inj.witness;
        kv("witness", "level " + std::to_string(w.level) + " cell " + std::to_string(w.cell + 1) + " vertices " +
                          std::to_string(w.x) + "," + std::to_string(w.y));
        kv("result", "fail");
        return 1;
    }
    for (int n = 1; n <= o.depth; ++n)
        for (int m = 0; m < n; ++m) {
            const auto t = quotient_trace_check(model, m, n);
            kv("trace_" + std::to_string(m) + "_" + std::to_string(n), t.ok);
            ok = ok && t.ok;
        }
    const auto fp = fixed_point_check(model);
    kv("fixed_point", fp.fixed);
    kv("eigenvalue", fp.eigenvalue);
    kv("matches_rho_g", fp.matches_rho_g);
    kv("regular", fp.regular);
    kv("irreducible", fp.irreducible);
    ok = ok && fp.ok();
    kv("result", ok ? "pass" : "fail");
    return ok ? 0 : 1;
}

void write_limit(const Options& o, const FamilyModel& model, const std::string& path) {
    const auto lim = limit_structure(model, std::max(o.depth, 1));
    const auto doc = structure_to_json(lim.structure, lim.form);
    if (path.empty() || path == "-") {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    auto f = open_out(path);
    *f << doc.dump(2) << "\n";
    kv("wrote", path);
}

int cmd_short_limit(const Options& o) {
    const auto model = model_of(config_of(o));
    write_limit(o, model, o.emit);
    return 0;
}

int cmd_short_spectrum(const Options& o) {
    const auto model = model_of(config_of(o));
    const auto lim = limit_structure(model);
    const auto h = shorted_level(lim, model.rho_g(), o.n);
    const Vector<double> ev = spectrum(h.network, h.measure);
    const auto est = spectral_dimension_estimate(ev);
    kv("level", o.n);
    kv("d_s", est.d_s);
    kv("slope", est.slope);
    kv("residual", est.residual);
    kv("points", est.n_used);
    emit(o, "spectrum_" + std::to_string(o.n) + ".csv", [&](std::ostream& out) { write_spectrum_csv(out, ev); });
    return 0;
}

// ---- metrics

int cmd_metrics_gh(const Options& o) {
    const auto model = model_of(config_of(o));
    const std::string grid = o.v_grid.empty() ? "10,100,1000" : o.v_grid;
    std::vector<ConvergenceRow> rows;
    std::string used = "float";
    if (exact_mode(o)) {
        try {
            rows = convergence_table<Rational>(model, o.n, parse_rationals(grid));
            used = "exact";
        } catch (const DomainError&) {
            if (o.mode == "exact") throw;
        }
    }
    if (used == "float") rows = convergence_table<double>(model, o.n, parse_doubles(grid));
    kv("mode", used);
    kv("level", o.n);
    bool decreasing = true;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) decreasing = decreasing && rows[i].distortion < rows[i - 1].distortion;
    kv("decreasing", decreasing);
    emit(o, "gh_" + std::to_string(o.n) + ".csv", [&](std::ostream& out) {
        out << kCsvHeader << "\nv,distortion,gh_bound\n" << std::setprecision(17);
        for (const auto& r : rows) out << r.v << "," << r.distortion << "," << r.gh_bound << "\n";
    });
    return decreasing ? 0 : 1;
}

// ---- sim

CrossingSets sets_of(const StructureConfig& cfg, const LevelGraph& g, const Options& o) {
    const auto& s = cfg.structure;
    if (o.from.empty() || o.to.empty()) throw ConfigError("--from and --to are required");
    CrossingSets out;
    out.start = g.boundary_vertices()[static_cast<std::size_t>(s.label_index(o.from))];
    std::vector<int> target;
    const auto p = cfg.family ? std::optional(partition(*cfg.family, g)) : std::nullopt;
    for (const auto& name : split(o.to)) {
        const int x = g.boundary_vertices()[static_cast<std::size_t>(s.label_index(name))];
        if (o.points || !p) target.push_back(x);
        else {
            const auto& cls = p->members[static_cast<std::size_t>(p->class_of[static_cast<std::size_t>(x)])];
            target.insert(target.end(), cls.begin(), cls.end());
        }
    }
    std::sort(target.begin(), target.end());
    target.erase(std::unique(target.begin(), target.end()), target.end());
    out.target = target;
    return out;
}

int cmd_sim_mean(const Options& o) {
    const auto cfg = config_of(o);
    const auto model = model_of(cfg);
    const LevelGraph g = build_level(cfg.structure, o.level);
    const auto sets = sets_of(cfg, g, o);
    kv("level", o.level);
    kv("start", sets.start);
    kv("target_size", sets.target.size());
    std::string used = "float";
    if (exact_mode(o)) {
        try {
            const Rational v = parse_rational(o.v);
            const auto net = level_form<Rational>(model, g, v);
            const auto t = mean_hitting(net, measure_level(cfg.structure, g).as<Rational>(), sets.start, sets.target);
            used = "exact";
            kv("mode", used);
            if (t.infinite) kv("mean", "inf");
            else {
                kv("mean", t.value);
                kv("mean_float", to_double(t.value));
            }
            return 0;
        } catch (const DomainError&) {
            if (o.mode == "exact") throw;
        }
    }
    const auto net = level_form<double>(model, g, v_of(o));
    const auto t = mean_hitting(net, measure_level(cfg.structure, g).as<double>(), sets.start, sets.target);
    kv("mode", used);
    if (t.infinite) kv("mean", "inf");
    else kv("mean", t.value);
    return 0;
}

int cmd_sim_paths(const Options& o) {
    const auto cfg = config_of(o);
    const auto model = model_of(cfg);
    const LevelGraph g = build_level(cfg.structure, o.level);
    const auto sets = sets_of(cfg, g, o);
    WalkSpec spec;
    spec.network = level_form<double>(model, g, v_of(o));
    spec.measure = measure_level(cfg.structure, g).as<double>();
    spec.start = sets.start;
    spec.target = sets.target;
    spec.seed = o.seed;
    const auto samples = sample_hitting(spec, o.n_paths);
    const auto exact = mean_hitting(spec);
    const auto sum = summarize(samples, exact.as_double());
    kv("n_paths", o.n_paths);
    kv("seed", o.seed);
    kv("mean", sum.mean);
    kv("std_error", sum.std_error);
    kv("exact_mean", sum.exact);
    kv("z", sum.z);
    kv("censored", sum.censored);
    kv("flagged", sum.flagged);
    emit(o, "paths.csv", [&](std::ostream& out) {
        out << kCsvHeader << "\npath,T,exit_vertex,censored\n" << std::setprecision(17);
        for (const auto& s : samples) out << s.path << "," << s.time << "," << s.exit_vertex << "," << s.censored << "\n";
    });
    return 0;
}

void write_uv(std::ostream& out, const UvTable& t) {
    out << kCsvHeader << "\nn,u,rho_n,t_prime,t,ratio\n" << std::setprecision(17);
    for (const auto& r : t.rows) out << r.n << "," << r.u << "," << r.rho_n << "," << r.t_prime << "," << r.t << "," << r.ratio << "\n";
}

void write_quotient_crossing(std::ostream& out, const std::vector<QuotientCrossingRow>& rows) {
    out << kCsvHeader << "\nm,t_star,t_scaled,ratio\n" << std::setprecision(17);
    for (const auto& r : rows) out << r.m << "," << r.t_star << "," << r.t_scaled << "," << r.ratio << "\n";
}

int cmd_sim_uv(const Options& o) {
    const auto cfg = config_of(o);
    const auto model = model_of(cfg);
    const auto& s = cfg.structure;
    if (o.from.empty() || o.to.empty()) throw ConfigError("--from and --to are required");
    const int a = s.label_index(o.from), z = s.label_index(o.to);
    const auto t = uv_scaling_experiment(model, v_of(o), o.nmax, o.depth, a, z);
    kv("lambda", t.lambda);
    kv("sigma", t.sigma);
    kv("t_star", t.t_star);
    if (!t.rows.empty()) kv("last_ratio", t.rows.back().ratio);
    emit(o, "uv.csv", [&](std::ostream& out) { write_uv(out, t); });
    const auto q = quotient_crossing_scaling(model, o.depth, a, z);
    emit(o, "quotient_crossing.csv", [&](std::ostream& out) { write_quotient_crossing(out, q); });
    return 0;
}

// ---- reproduce

int deepest_level(int n_cells, std::size_t max_cells, int cap) {
    int m = 0;
    while (m < cap && word_count(n_cells, m + 1) <= max_cells) ++m;
    return m;
}

struct Verdicts {
    bool all = true;
    std::ostringstream text;

    void add(const std::string& name, const std::string& got, const std::string& want, bool ok) {
        all = all && ok;
        text << name << "=" << got << " reference=" << want << " " << (ok ? "pass" : "fail") << "\n";
    }
};

int cmd_reproduce(const Options& o) {
    if (o.paper != "sg" && o.paper != "vicsek") throw ConfigError("--paper must be sg or vicsek");
    if (o.out.empty()) throw ConfigError("reproduce needs --out DIR");
    const auto cfg = config_of(o);
    const auto model = model_of(cfg);
    const auto& s = cfg.structure;
    const fs::path dir(o.out);
    fs::create_directories(dir);
    Verdicts vd;

    {
        auto f = open_out(dir / "fit.csv");
        *f << kCsvHeader << "\nfunction,part,power,coefficient\n";
        auto rows = [&](const char* name, const RationalFunction& r) {
            for (int k = 0; k <= r.num.degree(); ++k) *f << name << ",num," << k << "," << to_string(r.num.coeff(k)) << "\n";
            for (int k = 0; k <= r.den.degree(); ++k) *f << name << ",den," << k << "," << to_string(r.den.coeff(k)) << "\n";
        };
        rows("alpha", model.fit().alpha);
        rows("rho", model.fit().rho);
    }

    RationalFunction alpha_ref, rho_ref;
    Rational rho_g_ref, beta_ref;
    if (o.paper == "sg") {
        alpha_ref = RationalFunction(Polynomial({1, 6, 3}), Polynomial({6, 4}));
        rho_ref = RationalFunction(Polynomial({2, 3}), Polynomial({1, 2}));
        rho_g_ref = Rational(3, 2);
        beta_ref = Rational(4, 3);
    } else {
        const Rational sv = Rational(1) / s.r_max();
        alpha_ref = RationalFunction(Polynomial({2 * sv, 1}), Polynomial({1 + 2 * sv}));
        rho_ref = RationalFunction(Polynomial({1 + 4 * sv, 1}), Polynomial({sv, sv}));
        rho_g_ref = Rational(1) / sv;
        beta_ref = 1 + 2 * sv;
    }
    vd.add("alpha", model.fit().alpha.str(), alpha_ref.str(), equivalent(model.fit().alpha, alpha_ref));
    vd.add("rho", model.fit().rho.str(), rho_ref.str(), equivalent(model.fit().rho, rho_ref));
    const auto& lim = model.limits();
    vd.add("rho_g", lim.rho_g ? to_string(*lim.rho_g) : "none", to_string(rho_g_ref), lim.rho_g && *lim.rho_g == rho_g_ref);
    vd.add("beta", lim.beta ? to_string(*lim.beta) : "none", to_string(beta_ref), lim.beta && *lim.beta == beta_ref);
    {
        std::ostringstream got;
        got << std::setprecision(12) << model.vmin().value;
        vd.add("v_min", got.str(), "1", std::abs(model.vmin().value - 1.0) < 1e-10);
    }

    for (int n = 0; n <= o.depth; ++n) {
        const auto q = quotient(model, n);
        auto f = open_out(dir / ("quotient_" + std::to_string(n) + ".csv"));
        write_network_csv(*f, q.network);
    }
    {
        auto f = open_out(dir / "distortion.csv");
        *f << kCsvHeader << "\nlevel,v,distortion,gh_bound\n" << std::setprecision(17);
        const std::vector<double> vs = o.v_grid.empty() ? std::vector<double>{10, 100, 1000} : parse_doubles(o.v_grid);
        for (int n = 0; n <= std::min(o.depth, 2); ++n)
            for (const auto& r : convergence_table<double>(model, n, vs))
                *f << n << "," << r.v << "," << r.distortion << "," << r.gh_bound << "\n";
    }

    // crossing experiments: start at a label alone in its class if there is one
    const auto lim_s = limit_structure(model);
    int start = 0, target = -1;
    for (std::size_t a = lim_s.boundary_classes.size(); a-- > 0;)
        if (lim_s.boundary_classes[a].size() == 1) start = lim_s.boundary_classes[a].front();
    for (int l = 0; l < s.b() && target < 0; ++l)
        if (limit_label(lim_s, l) != limit_label(lim_s, start)) target = l;
    if (target >= 0) {
        const auto uv = uv_scaling_experiment(model, 2.0, o.nmax, deepest_level(s.n_cells, 243, 5), start, target);
        auto f = open_out(dir / "uv.csv");
        write_uv(*f, uv);
        const auto q = quotient_crossing_scaling(model, deepest_level(s.n_cells, 2187, 7), start, target);
        auto g = open_out(dir / "quotient_crossing.csv");
        write_quotient_crossing(*g, q);
        std::ostringstream got;
        got << std::setprecision(6) << uv.rows.back().ratio;
        if (o.paper == "sg")
            vd.add("uv_ratio", got.str(), "9/2", std::abs(uv.rows.back().ratio / 4.5 - 1.0) < 0.02);
        else
            vd.text << "uv_ratio=" << got.str() << " lambda=" << uv.lambda << " reference=none\n";
    }

    {
        const int m = deepest_level(s.n_cells, 2187, 7);
        const auto h = shorted_level(lim_s, model.rho_g(), m);
        const Vector<double> ev = spectrum(h.network, h.measure);
        auto f = open_out(dir / "spectrum.csv");
        write_spectrum_csv(*f, ev);
        try {
            const auto est = spectral_dimension_estimate(ev);
            std::ostringstream got;
            got << std::setprecision(6) << est.d_s;
            if (o.paper == "sg") {
                const double want = 2.0 * std::log(3.0) / std::log(4.5);
                vd.add("spectral_dimension", got.str(), "2log3/log(9/2)", std::abs(est.d_s - want) < 0.05);
            } else {
                vd.text << "spectral_dimension=" << got.str() << " reference=none\n";
            }
        } catch (const DomainError& e) {
            vd.text << "spectral_dimension=unavailable (" << e.what() << ")\n";
        }
    }
    {
        auto f = open_out(dir / "summary.txt");
        *f << vd.text.str() << "result=" << (vd.all ? "pass" : "fail") << "\n";
    }
    std::cout << vd.text.str();
    kv("result", vd.all ? "pass" : "fail");
    return vd.all ? 0 : 1;
}

int cmd_export_limit(const Options& o) {
    const auto cfg = config_of(o);
    if (!cfg.family) throw ConfigError("config has no 'family' block; nothing to short");
    const FamilyModel model(*cfg.family);
    std::string path = o.emit;
    if (path.empty() && !o.out.empty()) path = (fs::path(o.out) / "limit.json").string();
    write_limit(o, model, path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resistance forms on self-similar graphs and their shorted limits"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("config", o.config, "structure config (JSON)")->required()->check(CLI::ExistingFile);
        c->add_option("--mode", o.mode, "exact, float or auto")->check(CLI::IsMember({"exact", "float", "auto"}));
        c->add_option("--depth", o.depth, "depth limit");
        c->add_option("--seed", o.seed, "RNG seed");
        c->add_option("--out", o.out, "output directory");
        c->add_option("--v-grid", o.v_grid, "comma separated parameter values");
    };
    std::function<int()> run;
    auto bind = [&](CLI::App* c, int (*f)(const Options&)) { c->callback([&run, f, &o] { run = [f, &o] { return f(o); }; }); };

    auto* validate = app.add_subcommand("validate", "structure, family and injectivity checks");
    common(validate);
    bind(validate, cmd_validate);

    auto* family = app.add_subcommand("family", "one-parameter family")->require_subcommand(1);
    auto* ffit = family->add_subcommand("fit", "fit alpha and rho");
    common(ffit);
    bind(ffit, cmd_family_fit);
    auto* fverify = family->add_subcommand("verify", "check the family assumptions");
    common(fverify);
    bind(fverify, cmd_family_verify);
    auto* fconst = family->add_subcommand("constants", "rho_G, beta, v_min");
    common(fconst);
    bind(fconst, cmd_family_constants);
    auto* ftable = family->add_subcommand("table", "alpha^{-n}(v) and rho_n(v)");
    common(ftable);
    ftable->add_option("--v", o.v, "parameter")->required();
    ftable->add_option("--n", o.n, "largest n")->required();
    bind(ftable, cmd_family_table);

    auto* sh = app.add_subcommand("short", "shorted networks")->require_subcommand(1);
    auto* spart = sh->add_subcommand("partition", "vertex classes of V_n");
    common(spart);
    spart->add_option("--n", o.n, "level");
    bind(spart, cmd_short_partition);
    auto* squot = sh->add_subcommand("quotient", "quotient network H^n");
    common(squot);
    squot->add_option("--n", o.n, "level");
    bind(squot, cmd_short_quotient);
    auto* scheck = sh->add_subcommand("check", "injectivity, trace compatibility and fixed point");
    common(scheck);
    bind(scheck, cmd_short_check);
    auto* slimit = sh->add_subcommand("limit", "limit structure config");
    common(slimit);
    slimit->add_option("--emit", o.emit, "config path to write ('-' for stdout)");
    bind(slimit, cmd_short_limit);
    auto* sspec = sh->add_subcommand("spectrum", "spectrum of H^n and the counting slope");
    common(sspec);
    sspec->add_option("--n", o.n, "level");
    bind(sspec, cmd_short_spectrum);

    auto* metrics = app.add_subcommand("metrics", "resistance metrics")->require_subcommand(1);
    auto* mgh = metrics->add_subcommand("gh", "distortion of the projection and the GH bound");
    common(mgh);
    mgh->add_option("--n", o.n, "level");
    mgh->add_option("--vs", o.v_grid, "parameter values");
    bind(mgh, cmd_metrics_gh);

    auto* sim = app.add_subcommand("sim", "random walks")->require_subcommand(1);
    auto walk_opts = [&](CLI::App* c) {
        common(c);
        c->add_option("--level", o.level, "level");
        c->add_option("--v", o.v, "parameter");
        c->add_option("--from", o.from, "start label")->required();
        c->add_option("--to", o.to, "target labels (comma separated)")->required();
        c->add_flag("--points", o.points, "target the listed points only, not their classes");
    };
    auto* smean = sim->add_subcommand("mean", "exact mean hitting time");
    walk_opts(smean);
    bind(smean, cmd_sim_mean);
    auto* spaths = sim->add_subcommand("paths", "Monte Carlo hitting times");
    walk_opts(spaths);
    spaths->add_option("--n-paths", o.n_paths, "number of paths");
    bind(spaths, cmd_sim_paths);
    auto* suv = sim->add_subcommand("uv", "crossing-time scaling");
    common(suv);
    suv->add_option("--v", o.v, "parameter");
    suv->add_option("--nmax", o.nmax, "largest n");
    suv->add_option("--from", o.from, "start label")->required();
    suv->add_option("--to", o.to, "target label")->required();
    bind(suv, cmd_sim_uv);

    auto* repro = app.add_subcommand("reproduce", "end-to-end run against reference values");
    common(repro);
    repro->add_option("--paper", o.paper, "sg or vicsek")->required();
    repro->add_option("--nmax", o.nmax, "largest n in the crossing table");
    bind(repro, cmd_reproduce);

    auto* exp = app.add_subcommand("export-limit", "write the S_* config");
    common(exp);
    exp->add_option("--emit", o.emit, "config path to write");
    bind(exp, cmd_export_limit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return run ? run() : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
