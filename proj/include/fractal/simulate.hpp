#pragma once

#include "fractal/family.hpp"
#include "fractal/network.hpp"
#include "fractal/shorting.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fractal {

/// Continuous-time walk with jump rates a(x,y)/mu(x), run until it enters
/// `target`.
struct WalkSpec {
    ConductanceNetwork<double> network;
    Vector<double> measure;
    int start = 0;
    std::vector<int> target;
    std::uint64_t seed = 0;
    std::size_t max_jumps = 50'000'000;

    void validate() const;
    bool start_in_target() const;
};

struct HittingSample {
    std::size_t path = 0;
    double time = 0.0;
    int exit_vertex = -1;  ///< first target vertex visited, -1 when censored
    bool censored = false;
};

/// Vertices reachable from `start` without passing through `target`.
std::vector<int> reachable_avoiding(const std::vector<std::vector<int>>& adjacency, int start,
                                    const std::vector<int>& target);

template <class Scalar>
std::vector<std::vector<int>> adjacency(const ConductanceNetwork<Scalar>& net) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(net.size()));
    for (const auto& [x, y] : net.edges()) {
        adj[static_cast<std::size_t>(x)].push_back(static_cast<int>(y));
        adj[static_cast<std::size_t>(y)].push_back(static_cast<int>(x));
    }
    return adj;
}

/// E_start[T_target]: solves sum_y a(x,y)(u(y) - u(x)) = -mu(x) off the
/// target, u = 0 on it. Infinite when the target is unreachable.
template <class Scalar>
Extended<Scalar> mean_hitting(const ConductanceNetwork<Scalar>& net, const Vector<Scalar>& measure, int start,
                              const std::vector<int>& target) {
    if (target.empty()) throw DomainError("mean_hitting: empty target");
    if (measure.size() != net.size()) throw DomainError("mean_hitting: measure size mismatch");
    if (std::find(target.begin(), target.end(), start) != target.end()) return Extended<Scalar>::finite(Scalar(0));
    const auto adj = adjacency(net);
    const auto interior = reachable_avoiding(adj, start, target);
    bool touches = false;
    std::vector<char> in_target(static_cast<std::size_t>(net.size()), 0);
    for (int t : target) in_target[static_cast<std::size_t>(t)] = 1;
    for (int x : interior)
        for (int y : adj[static_cast<std::size_t>(x)]) touches = touches || in_target[static_cast<std::size_t>(y)];
    if (!touches) return Extended<Scalar>::inf();
    Vector<Scalar> rhs(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t a = 0; a < interior.size(); ++a) rhs(static_cast<Eigen::Index>(a)) = measure(interior[a]);
    const Vector<Scalar> u = solve_grounded(net, interior, rhs);
    const auto pos = std::find(interior.begin(), interior.end(), start) - interior.begin();
    return Extended<Scalar>::finite(u(pos));
}

inline Extended<double> mean_hitting(const WalkSpec& spec) {
    return mean_hitting(spec.network, spec.measure, spec.start, spec.target);
}

/// Per-path substream seed.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path);

/// n_paths independent samples, paths first_path, first_path + 1, ...
std::vector<HittingSample> sample_hitting(const WalkSpec& spec, std::size_t n_paths, std::size_t first_path = 0);

struct MonteCarloSummary {
    std::size_t n_paths = 0;
    std::size_t censored = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double exact = 0.0;
    double z = 0.0;        ///< (mean - exact) / std_error
    bool flagged = false;  ///< |z| above the gate
};

MonteCarloSummary summarize(const std::vector<HittingSample>& samples, double exact, double sigmas = 4.0);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// 95% two-sample band for equal sample sizes.
inline double ks_band(std::size_t n_paths) { return 1.36 * std::sqrt(2.0 / static_cast<double>(n_paths)); }

struct LawComparison {
    double ks = 0.0;
    std::size_t n_paths = 0;
    double band = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
};

/// KS statistic between the laws of T / E[T] under the two walks.
LawComparison law_comparison(const WalkSpec& a, const WalkSpec& b, std::size_t n_paths);

/// Exact law of T_target: P(T > t) = sum_i weight_i exp(-rate_i t).
struct HittingLaw {
    Vector<double> rate;
    Vector<double> weight;

    double mean() const;
    double survival(double t) const;
};

HittingLaw hitting_law(const WalkSpec& spec);

/// sup over a grid of s in (0, s_max] of |P(T_a > s E T_a) - P(T_b > s E T_b)|.
double rescaled_law_distance(const HittingLaw& a, const HittingLaw& b, double s_max = 10.0, int points = 20000);

/// Start vertex and the target class (vee-shorting class of a boundary point)
/// on level graph g.
struct CrossingSets {
    int start = 0;
    std::vector<int> target;
};

CrossingSets crossing_sets(const OneParamFamily& fam, const LevelGraph& g, int start_label, int target_label);

/// The same sets lifted into the top (fixed) n-cell of a deeper level.
CrossingSets lift_to_top_cell(const SelfSimilarStructure& s, const LevelGraph& coarse, const CrossingSets& sets,
                              const LevelGraph& fine, int cell, int n);

/// Level-m walk at parameter v from `start_label` to the class of `target_label`.
WalkSpec crossing_walk(const FamilyModel& model, const LevelGraph& g, double v, int start_label, int target_label,
                       std::uint64_t seed = 0);

/// S_* label whose class contains the label of S.
int limit_label(const LimitStructure& limit, int label);

struct UvRow {
    int n = 0;
    double u = 0.0;       ///< alpha^{-n}(v)
    double rho_n = 0.0;   ///< rho_n(v)
    double t_prime = 0.0; ///< mean crossing of G^{u, m}
    double t = 0.0;       ///< same crossing seen in the top n-cell of G^v
    double ratio = 0.0;   ///< t_{n-1} / t_n (0 for n = 0)
};

struct UvTable {
    std::vector<UvRow> rows;
    double lambda = 0.0;  ///< rho_G / (theta_c r_c)
    double sigma = 0.0;   ///< last value of (theta_c r_c)^{-n} rho_n(v) / lambda^n
    double t_star = 0.0;  ///< crossing of H^m between the matching classes
};

UvTable uv_scaling_experiment(const FamilyModel& model, double v, int n_max, int m, int start_label,
                              int target_label);

/// H^m in floats through S_*: rho_G^m replicate(S_*, H^0, m), with nu_m.
struct ShortedLevel {
    ConductanceNetwork<double> network;
    Vector<double> measure;
    LevelGraph graph;
};

ShortedLevel shorted_level(const LimitStructure& limit, const Rational& rho_g, int m);

struct QuotientCrossingRow {
    int m = 0;
    double t_star = 0.0;    ///< crossing of H^m
    double t_scaled = 0.0;  ///< lambda^m t_star
    double ratio = 0.0;     ///< t_scaled(m) / t_scaled(m - 1)
};

/// Crossing of H^m from the class of start_label to that of target_label.
std::vector<QuotientCrossingRow> quotient_crossing_scaling(const FamilyModel& model, int m_max, int start_label,
                                                           int target_label);

struct TimeChangeCheck {
    Rational v;
    Rational top_cell_time;  ///< level m + n at v, crossing of the top n-cell
    Rational level_time;     ///< level m at alpha^{-n}(v)
    Rational factor;         ///< rho_n(v) (theta_c r_c)^{-n}
    bool ok = false;
};

/// Exact check at v = alpha^{m+n}(u).
TimeChangeCheck time_change_check(const FamilyModel& model, const Rational& u, int m, int n, int start_label,
                                  int target_label);

struct SpectralEstimate {
    double slope = 0.0;
    double d_s = 0.0;
    double residual = 0.0;  ///< rms residual of the log-log fit
    std::size_t n_used = 0;  ///< distinct eigenvalues in the window
    std::size_t n_positive = 0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Least-squares slope of log N(lambda) against log lambda over the decade
/// centred at the geometric mean of the least positive and the largest
/// eigenvalue. Clustered eigenvalues count as one sample point.
SpectralEstimate spectral_dimension_estimate(const Vector<double>& eigenvalues);
SpectralEstimate spectral_dimension_estimate(const ConductanceNetwork<double>& net, const Vector<double>& measure);

/// Cycle on n vertices, unit conductances, uniform probability measure.
std::pair<ConductanceNetwork<double>, Vector<double>> circle_network(int n);

}  // namespace fractal
