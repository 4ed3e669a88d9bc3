#include "fractal/simulate.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace fractal {

void WalkSpec::validate() const {
    if (measure.size() != network.size()) throw DomainError("walk: measure size mismatch");
    if (target.empty()) throw DomainError("walk: empty target");
    if (start < 0 || start >= network.size()) throw DomainError("walk: start vertex out of range");
    for (int t : target)
        if (t < 0 || t >= network.size()) throw DomainError("walk: target vertex out of range");
    for (Eigen::Index x = 0; x < measure.size(); ++x)
        if (!(measure(x) > 0.0)) throw DomainError("walk: measure must be positive");
}

bool WalkSpec::start_in_target() const { return std::find(target.begin(), target.end(), start) != target.end(); }

std::vector<int> reachable_avoiding(const std::vector<std::vector<int>>& adjacency, int start,
                                    const std::vector<int>& target) {
    std::vector<char> seen(adjacency.size(), 0);
    for (int t : target) seen[static_cast<std::size_t>(t)] = 1;
    std::vector<int> out;
    if (seen[static_cast<std::size_t>(start)]) return out;
    seen[static_cast<std::size_t>(start)] = 1;
    out.push_back(start);
    for (std::size_t head = 0; head < out.size(); ++head)
        for (int y : adjacency[static_cast<std::size_t>(out[head])])
            if (!seen[static_cast<std::size_t>(y)]) {
                seen[static_cast<std::size_t>(y)] = 1;
                out.push_back(y);
            }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// uniform on [0, 1) from the top 53 bits
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct JumpTable {
    std::vector<std::vector<int>> next;
    std::vector<std::vector<double>> cumulative;
    std::vector<double> rate;
};

JumpTable jump_table(const WalkSpec& spec) {
    const auto n = static_cast<std::size_t>(spec.network.size());
    JumpTable t{std::vector<std::vector<int>>(n), std::vector<std::vector<double>>(n), std::vector<double>(n, 0.0)};
    for (std::size_t x = 0; x < n; ++x) {
        double acc = 0.0;
        for (Eigen::Index y = 0; y < spec.network.size(); ++y) {
            const double c = spec.network.conductance(static_cast<Eigen::Index>(x), y);
            if (c <= 0.0 || y == static_cast<Eigen::Index>(x)) continue;
            acc += c;
            t.next[x].push_back(static_cast<int>(y));
            t.cumulative[x].push_back(acc);
        }
        t.rate[x] = acc / spec.measure(static_cast<Eigen::Index>(x));
    }
    return t;
}

}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) { return splitmix64(splitmix64(seed) ^ path); }

std::vector<HittingSample> sample_hitting(const WalkSpec& spec, std::size_t n_paths, std::size_t first_path) {
    spec.validate();
    if (n_paths == 0) throw DomainError("sample_hitting: n_paths must be positive");
    const JumpTable table = jump_table(spec);
    std::vector<char> in_target(static_cast<std::size_t>(spec.network.size()), 0);
    for (int t : spec.target) in_target[static_cast<std::size_t>(t)] = 1;

    std::vector<HittingSample> out(n_paths);
    for (std::size_t k = 0; k < n_paths; ++k) {
        HittingSample& s = out[k];
        s.path = first_path + k;
        std::mt19937_64 rng(path_seed(spec.seed, s.path));
        auto x = static_cast<std::size_t>(spec.start);
        std::size_t jumps = 0;
        while (!in_target[x]) {
            if (jumps == spec.max_jumps || table.next[x].empty()) {
                s.censored = true;
                break;
            }
            s.time += -std::log1p(-unit(rng)) / table.rate[x];
            const auto& cum = table.cumulative[x];
            const double pick = unit(rng) * cum.back();
            auto it = std::upper_bound(cum.begin(), cum.end(), pick);
            if (it == cum.end()) --it;
            x = static_cast<std::size_t>(table.next[x][static_cast<std::size_t>(it - cum.begin())]);
            ++jumps;
        }
        if (!s.censored) s.exit_vertex = static_cast<int>(x);
    }
    return out;
}

MonteCarloSummary summarize(const std::vector<HittingSample>& samples, double exact, double sigmas) {
    MonteCarloSummary out;
    out.exact = exact;
    std::vector<double> t;
    for (const auto& s : samples) {
        if (s.censored) ++out.censored;
        else t.push_back(s.time);
    }
    out.n_paths = t.size();
    if (t.empty()) {
        out.flagged = true;
        return out;
    }
    const double n = static_cast<double>(t.size());
    out.mean = std::accumulate(t.begin(), t.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : t) ss += (x - out.mean) * (x - out.mean);
    out.std_error = t.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    out.z = out.std_error > 0.0 ? (out.mean - exact) / out.std_error : 0.0;
    out.flagged = std::abs(out.z) > sigmas || out.censored > 0;
    return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

LawComparison law_comparison(const WalkSpec& a, const WalkSpec& b, std::size_t n_paths) {
    LawComparison out;
    out.n_paths = n_paths;
    out.band = ks_band(n_paths);
    const auto ma = mean_hitting(a), mb = mean_hitting(b);
    if (ma.infinite || mb.infinite) throw DomainError("law_comparison: target unreachable");
    out.mean_a = ma.value;
    out.mean_b = mb.value;
    auto rescaled = [n_paths](const WalkSpec& spec, double mean) {
        std::vector<double> t;
        for (const auto& s : sample_hitting(spec, n_paths))
            if (!s.censored) t.push_back(s.time / mean);
        return t;
    };
    out.ks = ks_statistic(rescaled(a, out.mean_a), rescaled(b, out.mean_b));
    return out;
}

double HittingLaw::mean() const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < rate.size(); ++i) m += weight(i) / rate(i);
    return m;
}

double HittingLaw::survival(double t) const {
    double p = 0.0;
    for (Eigen::Index i = 0; i < rate.size(); ++i) p += weight(i) * std::exp(-rate(i) * t);
    return p;
}

HittingLaw hitting_law(const WalkSpec& spec) {
    spec.validate();
    HittingLaw law;
    if (spec.start_in_target()) return law;
    const auto interior = reachable_avoiding(adjacency(spec.network), spec.start, spec.target);
    const auto k = static_cast<Eigen::Index>(interior.size());
    const Matrix<double> lap = spec.network.laplacian();
    Vector<double> root(k);
    for (Eigen::Index a = 0; a < k; ++a) root(a) = std::sqrt(spec.measure(interior[static_cast<std::size_t>(a)]));
    Matrix<double> sym(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            sym(a, b) = lap(interior[static_cast<std::size_t>(a)], interior[static_cast<std::size_t>(b)]) / (root(a) * root(b));
    Eigen::SelfAdjointEigenSolver<Matrix<double>> es(sym);
    if (es.info() != Eigen::Success) throw DomainError("hitting_law: eigensolver failed");
    const auto s = std::find(interior.begin(), interior.end(), spec.start) - interior.begin();
    const Vector<double> proj = es.eigenvectors().transpose() * root;
    law.rate = es.eigenvalues();
    law.weight.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) law.weight(i) = es.eigenvectors()(s, i) / root(s) * proj(i);
    if (law.rate.minCoeff() <= 0.0) throw DomainError("hitting_law: target unreachable");
    return law;
}

double rescaled_law_distance(const HittingLaw& a, const HittingLaw& b, double s_max, int points) {
    const double ma = a.mean(), mb = b.mean();
    double d = 0.0;
    for (int j = 1; j <= points; ++j) {
        const double s = s_max * j / points;
        d = std::max(d, std::abs(a.survival(s * ma) - b.survival(s * mb)));
    }
    return d;
}

CrossingSets crossing_sets(const OneParamFamily& fam, const LevelGraph& g, int start_label, int target_label) {
    const auto& bv = g.boundary_vertices();
    if (start_label < 0 || target_label < 0 || start_label >= static_cast<int>(bv.size()) ||
        target_label >= static_cast<int>(bv.size()))
        throw DomainError("crossing_sets: boundary label out of range");
    const VertexPartition p = partition(fam, g);
    CrossingSets out;
    out.start = bv[static_cast<std::size_t>(start_label)];
    out.target = p.members[static_cast<std::size_t>(p.class_of[static_cast<std::size_t>(bv[static_cast<std::size_t>(target_label)])])];
    if (std::find(out.target.begin(), out.target.end(), out.start) != out.target.end())
        throw DomainError("crossing_sets: start lies in the target class");
    return out;
}

CrossingSets lift_to_top_cell(const SelfSimilarStructure& s, const LevelGraph& coarse, const CrossingSets& sets,
                              const LevelGraph& fine, int cell, int n) {
    if (fine.level() != coarse.level() + n) throw DomainError("lift_to_top_cell: level mismatch");
    const auto b = static_cast<std::size_t>(s.b());
    std::size_t prefix = 0;
    for (int k = 0; k < n; ++k) prefix = prefix * static_cast<std::size_t>(s.n_cells) + static_cast<std::size_t>(cell);
    const std::size_t shift = word_count(s.n_cells, coarse.level());
    auto lift = [&](int x) {
        const std::size_t rep = coarse.representative(x);
        return fine.vertex(prefix * shift + rep / b, static_cast<int>(rep % b));
    };
    CrossingSets out;
    out.start = lift(sets.start);
    for (int t : sets.target) out.target.push_back(lift(t));
    std::sort(out.target.begin(), out.target.end());
    return out;
}

WalkSpec crossing_walk(const FamilyModel& model, const LevelGraph& g, double v, int start_label, int target_label,
                       std::uint64_t seed) {
    const auto sets = crossing_sets(model.family(), g, start_label, target_label);
    WalkSpec spec;
    spec.network = level_form<double>(model, g, v);
    spec.measure = measure_level(model.structure(), g).as<double>();
    spec.start = sets.start;
    spec.target = sets.target;
    spec.seed = seed;
    return spec;
}

int limit_label(const LimitStructure& limit, int label) {
    for (std::size_t a = 0; a < limit.boundary_classes.size(); ++a) {
        const auto& cls = limit.boundary_classes[a];
        if (std::find(cls.begin(), cls.end(), label) != cls.end()) return static_cast<int>(a);
    }
    throw DomainError("label " + std::to_string(label) + " is in no boundary class");
}

namespace {

Rational top_cell_scale(const SelfSimilarStructure& s, int start_label) {
    const auto c = static_cast<std::size_t>(s.fixed_cell[static_cast<std::size_t>(start_label)]);
    return s.theta[c] * s.resistance[c];
}

}  // namespace

UvTable uv_scaling_experiment(const FamilyModel& model, double v, int n_max, int m, int start_label,
                              int target_label) {
    const auto& s = model.structure();
    if (n_max < 0 || m < 0) throw DomainError("uv_scaling_experiment: negative depth");
    const double cell_scale = to_double(top_cell_scale(s, start_label));
    const LevelGraph g = build_level(s, m);
    const auto sets = crossing_sets(model.family(), g, start_label, target_label);
    const Vector<double> mu = measure_level(s, g).as<double>();

    UvTable table;
    table.lambda = to_double(model.rho_g()) / cell_scale;
    for (int n = 0; n <= n_max; ++n) {
        UvRow row;
        row.n = n;
        row.u = n == 0 ? v : model.alpha_inverse(v, n);
        row.rho_n = model.rho_n(v, n);
        const auto t = mean_hitting(level_form<double>(model, g, row.u), mu, sets.start, sets.target);
        if (t.infinite) throw DomainError("uv_scaling_experiment: base unreachable");
        row.t_prime = t.value;
        row.t = row.t_prime * std::pow(cell_scale, n) / row.rho_n;
        if (n > 0) row.ratio = table.rows.back().t / row.t;
        table.sigma = row.rho_n / std::pow(to_double(model.rho_g()), n);
        table.rows.push_back(row);
    }

    const auto limit = limit_structure(model);
    const ShortedLevel h = shorted_level(limit, model.rho_g(), m);
    const auto& hb = h.graph.boundary_vertices();
    const auto ts = mean_hitting(h.network, h.measure, hb[static_cast<std::size_t>(limit_label(limit, start_label))],
                                 {hb[static_cast<std::size_t>(limit_label(limit, target_label))]});
    table.t_star = ts.as_double();
    return table;
}

ShortedLevel shorted_level(const LimitStructure& limit, const Rational& rho_g, int m) {
    ShortedLevel out;
    out.graph = build_level(limit.structure, m);
    Rational scale = 1;
    for (int i = 0; i < m; ++i) scale *= rho_g;
    out.network = replicate(limit.structure, out.graph, limit.form.cast<double>()).scaled(to_double(scale));
    out.measure = measure_level(limit.structure, out.graph).as<double>();
    return out;
}

std::vector<QuotientCrossingRow> quotient_crossing_scaling(const FamilyModel& model, int m_max, int start_label,
                                                           int target_label) {
    const auto limit = limit_structure(model);
    const int a = limit_label(limit, start_label), z = limit_label(limit, target_label);
    if (a == z) throw DomainError("quotient_crossing_scaling: start and target share a class");
    const double lambda = to_double(model.rho_g()) / to_double(top_cell_scale(limit.structure, a));
    std::vector<QuotientCrossingRow> rows;
    for (int m = 0; m <= m_max; ++m) {
        const ShortedLevel h = shorted_level(limit, model.rho_g(), m);
        const auto& hb = h.graph.boundary_vertices();
        const auto t = mean_hitting(h.network, h.measure, hb[static_cast<std::size_t>(a)],
                                    {hb[static_cast<std::size_t>(z)]});
        if (t.infinite) throw DomainError("quotient_crossing_scaling: base unreachable");
        QuotientCrossingRow row{m, t.value, t.value * std::pow(lambda, m), 0.0};
        if (m > 0) row.ratio = row.t_scaled / rows.back().t_scaled;
        rows.push_back(row);
    }
    return rows;
}

TimeChangeCheck time_change_check(const FamilyModel& model, const Rational& u, int m, int n, int start_label,
                                  int target_label) {
    const auto& s = model.structure();
    TimeChangeCheck out;
    const auto orbit = orbit_from_base(model, u, m + n);
    out.v = orbit.front();

    const LevelGraph gm = build_level(s, m), gf = build_level(s, m + n);
    const auto sets = crossing_sets(model.family(), gm, start_label, target_label);
    const int c = s.fixed_cell[static_cast<std::size_t>(start_label)];
    const auto lifted = lift_to_top_cell(s, gm, sets, gf, c, n);

    const auto fine = level_form_exact(model, gf, orbit);
    const auto top = mean_hitting(fine, measure_level(s, gf).as<Rational>(), lifted.start, lifted.target);
    const std::vector<Rational> tail(orbit.begin() + n, orbit.end());
    const auto coarse = level_form_exact(model, gm, tail);
    const auto level = mean_hitting(coarse, measure_level(s, gm).as<Rational>(), sets.start, sets.target);
    if (top.infinite || level.infinite) throw DomainError("time_change_check: base unreachable");
    out.top_cell_time = top.value;
    out.level_time = level.value;

    Rational rho_n = 1, cell = 1;
    for (int i = 1; i <= n; ++i) {
        rho_n *= model.rho(orbit[static_cast<std::size_t>(i)]);
        cell *= top_cell_scale(s, start_label);
    }
    out.factor = rho_n / cell;
    out.ok = out.factor * out.top_cell_time == out.level_time;
    return out;
}

SpectralEstimate spectral_dimension_estimate(const Vector<double>& eigenvalues) {
    std::vector<double> ev(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    std::sort(ev.begin(), ev.end());
    const double top = ev.empty() ? 0.0 : ev.back();
    std::vector<double> pos;
    for (double x : ev)
        if (x > 1e-9 * top) pos.push_back(x);
    SpectralEstimate out;
    out.n_positive = pos.size();
    if (pos.size() < 50) throw DomainError("spectral_dimension_estimate: fewer than 50 positive eigenvalues");
    const double centre = std::sqrt(pos.front() * pos.back());
    out.lo = centre / std::sqrt(10.0);
    out.hi = centre * std::sqrt(10.0);
    std::vector<double> xs, ys;
    // N(lambda) = #{eigenvalues <= lambda}, sampled once per distinct eigenvalue
    for (std::size_t k = 0; k < pos.size(); ++k) {
        if (k + 1 < pos.size() && pos[k + 1] <= pos[k] * (1.0 + 1e-8)) continue;
        if (pos[k] >= out.lo && pos[k] <= out.hi) {
            xs.push_back(std::log(pos[k]));
            ys.push_back(std::log(static_cast<double>(k + 1)));
        }
    }
    out.n_used = xs.size();
    if (xs.size() < 2) throw DomainError("spectral_dimension_estimate: middle decade holds fewer than 2 eigenvalues");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("spectral_dimension_estimate: degenerate window");
    out.slope = sxy / sxx;
    out.d_s = 2.0 * out.slope;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - my - out.slope * (xs[i] - mx);
        rss += r * r;
    }
    out.residual = std::sqrt(rss / n);
    return out;
}

SpectralEstimate spectral_dimension_estimate(const ConductanceNetwork<double>& net, const Vector<double>& measure) {
    return spectral_dimension_estimate(spectrum(net, measure));
}

std::pair<ConductanceNetwork<double>, Vector<double>> circle_network(int n) {
    if (n < 3) throw DomainError("circle_network needs at least 3 vertices");
    ConductanceNetwork<double> net(n);
    for (int i = 0; i < n; ++i) net.set(i, (i + 1) % n, 1.0);
    return {net, Vector<double>::Constant(n, 1.0 / n)};
}

}  // namespace fractal
