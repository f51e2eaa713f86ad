#include "byzsgd/resilience.hpp"

#include <cmath>

#include "byzsgd/rng.hpp"

namespace byzsgd {

namespace {

int median_q_max(int n) { return (n + 1) / 2 - 1; }  // ceil(n/2) - 1

void require_median_domain(int n, int q, const char* rule) {
    require_param(n >= 1 && q >= 0, std::string(rule) + ": need n >= 1 and q >= 0");
    require_param(q <= median_q_max(n),
                  std::string(rule) + ": requires q <= ceil(n/2) - 1");
}

}  // namespace

double eta_krum(int n, int q) {
    require_param(n >= 1 && q >= 0, "eta_krum: need n >= 1 and q >= 0");
    require_param(2 * q + 2 < n, "eta_krum: requires 2q + 2 < n");
    const double nn = n, qq = q;
    const double eta2 =
        2.0 * (nn - qq + (qq * (nn - qq - 2.0) + qq * qq * (nn - qq - 1.0)) / (nn - 2.0 * qq - 2.0));
    return std::sqrt(eta2);
}

double eta_geomed(int n, int q) {
    require_median_domain(n, q, "eta_geomed");
    const double nn = n, qq = q;
    return (2.0 * nn - 2.0 * qq) / (nn - 2.0 * qq) * std::sqrt(nn - qq);
}

double eta_marmed(int n, int q) {
    require_median_domain(n, q, "eta_marmed");
    return std::sqrt(static_cast<double>(n - q));
}

double eta_meamed(int n, int q) {
    require_median_domain(n, q, "eta_meamed");
    return std::sqrt(10.0 * static_cast<double>(n - q));
}

ResilienceBound resilience_bound(double eta, int d, double sigma, double grad_norm) {
    require_param(eta > 0.0 && d >= 1 && sigma >= 0.0 && grad_norm > 0.0,
                  "resilience_bound: need eta > 0, d >= 1, sigma >= 0, ||g|| > 0");
    ResilienceBound b;
    b.eta = eta;
    b.sin_alpha = eta * std::sqrt(static_cast<double>(d)) * sigma / grad_norm;
    b.satisfiable = b.sin_alpha < 1.0;
    return b;
}

namespace {

constexpr std::uint64_t kTagSample = 0x5A3;

GradMatrix sample_correct(const GradVector& g, double sigma, int n_workers, std::uint64_t seed,
                          std::uint64_t trial) {
    GradMatrix m(static_cast<std::size_t>(n_workers), g.size());
    for (std::size_t i = 0; i < m.n(); ++i) {
        Rng rng = Rng::stream(seed, trial, i, kTagSample);
        for (std::size_t j = 0; j < m.d(); ++j) m(i, j) = g[j] + sigma * rng.normal();
    }
    return m;
}

}  // namespace

ConditionEstimate check_condition_i(const AggregatorSpec& agg, const MatrixTransform& corrupt,
                                    const GradVector& g, double sigma, int n_workers,
                                    int trials, std::uint64_t seed) {
    require_param(trials >= 100, "check_condition_i: need trials >= 100");
    require_param(n_workers >= 1, "check_condition_i: need at least one worker");

    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial = static_cast<std::uint64_t>(t);
        GradMatrix m = sample_correct(g, sigma, n_workers, seed, trial);
        if (corrupt) m = corrupt(m, trial);
        const GradVector out = aggregate(agg, m);
        const double ip = dot(out, g);
        sum += ip;
        sum_sq += ip * ip;
    }
    ConditionEstimate e;
    e.trials = trials;
    e.mean = sum / trials;
    const double var = std::max(0.0, (sum_sq - sum * sum / trials) / (trials - 1));
    e.stddev = std::sqrt(var);
    const double half = 1.959963984540054 * e.stddev / std::sqrt(static_cast<double>(trials));
    e.ci_low = e.mean - half;
    e.ci_high = e.mean + half;
    return e;
}

ConditionEstimate check_condition_i(const AggregatorSpec& agg, const AttackSpec& attack,
                                    const GradVector& g, double sigma, int n_workers,
                                    int trials, std::uint64_t seed) {
    MatrixTransform corrupt = [&](const GradMatrix& m, std::uint64_t trial) {
        return apply_attack(attack, AttackContext{seed, trial}, m);
    };
    return check_condition_i(agg, corrupt, g, sigma, n_workers, trials, seed);
}

std::pair<double, double> condition_ii_sanity(const AggregatorSpec& agg, const GradVector& g,
                                              double sigma, int n_workers, int trials,
                                              std::uint64_t seed) {
    require_param(trials >= 100, "condition_ii_sanity: need trials >= 100");
    double sum_aggr = 0.0;
    for (int t = 0; t < trials; ++t) {
        const GradMatrix m =
            sample_correct(g, sigma, n_workers, seed, static_cast<std::uint64_t>(t));
        const GradVector out = aggregate(agg, m);
        sum_aggr += dot(out, out);
    }
    const double e_g2 = dot(g, g) + static_cast<double>(g.size()) * sigma * sigma;
    const double bound = static_cast<double>(n_workers - agg.q) * e_g2;
    return {sum_aggr / trials, bound};
}

GradMatrix build_mean_counterexample(const GradVector& g, int n) {
    require_param(n >= 2, "build_mean_counterexample: need n >= 2");
    require(!g.empty(), "build_mean_counterexample: g must be nonempty");
    GradMatrix m(static_cast<std::size_t>(n), g.size());
    for (std::size_t i = 0; i + 1 < m.n(); ++i)
        for (std::size_t j = 0; j < m.d(); ++j) m(i, j) = g[j];
    // row n: -g - sum of the others = -n * g, so the mean is exactly -g/n
    for (std::size_t j = 0; j < m.d(); ++j) m(m.n() - 1, j) = -static_cast<double>(n) * g[j];
    return m;
}

GradMatrix build_selection_counterexample(const GradVector& g, int n, int d) {
    require_param(n >= 1 && d >= 1 && n <= d,
                  "build_selection_counterexample: requires 1 <= n <= d");
    require(g.size() == static_cast<std::size_t>(d),
            "build_selection_counterexample: g must have length d");
    GradMatrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.d(); ++j) m(i, j) = g[j];
    return dimensional_worst_case(m, g);
}

}  // namespace byzsgd
