#pragma once

#include <cstdint>
#include <functional>

#include "byzsgd/aggregators.hpp"
#include "byzsgd/attacks.hpp"
#include "byzsgd/grad.hpp"

namespace byzsgd {

// Variance-amplification factors eta(n, q) from the four resilience bounds.
// The resilience condition is eta * sqrt(d) * sigma < ||g||.

/// eta_0, Krum: eta^2 = 2(n-q + (q(n-q-2) + q^2(n-q-1)) / (n-2q-2)). Requires 2q+2 < n.
double eta_krum(int n, int q);

/// eta_1, GeoMed: ((2n-2q)/(n-2q)) * sqrt(n-q). Requires q <= ceil(n/2)-1.
double eta_geomed(int n, int q);

/// eta_2, MarMed: sqrt(n-q). Requires q <= ceil(n/2)-1.
double eta_marmed(int n, int q);

/// eta_3, MeaMed: sqrt(10(n-q)). Requires q <= ceil(n/2)-1.
double eta_meamed(int n, int q);

struct ResilienceBound {
    double eta = 0.0;
    double sin_alpha = 0.0;  // eta * sqrt(d) * sigma / ||g||
    bool satisfiable = false;  // sin_alpha < 1
};

ResilienceBound resilience_bound(double eta, int d, double sigma, double grad_norm);

struct ConditionEstimate {
    double mean = 0.0;    // Monte-Carlo estimate of <E[Aggr], g>
    double stddev = 0.0;  // sample standard deviation of the per-trial inner products
    double ci_low = 0.0;  // 95% normal-approximation interval
    double ci_high = 0.0;
    int trials = 0;
};

/// Monte-Carlo check of resilience condition (i): sample correct rows as
/// g + N(0, sigma^2 I), corrupt, aggregate, and average <Aggr, g>.
ConditionEstimate check_condition_i(const AggregatorSpec& agg, const AttackSpec& attack,
                                    const GradVector& g, double sigma, int n_workers,
                                    int trials, std::uint64_t seed);

/// Same Monte-Carlo loop with an arbitrary corruption of the sampled matrix
/// (used for the theorem counterexamples and custom dimensional adversaries).
using MatrixTransform = std::function<GradMatrix(const GradMatrix&, std::uint64_t trial)>;
ConditionEstimate check_condition_i(const AggregatorSpec& agg, const MatrixTransform& corrupt,
                                    const GradVector& g, double sigma, int n_workers,
                                    int trials, std::uint64_t seed);

/// Finite-sample sanity check of condition (ii): estimates E||Aggr||^2 under
/// no attack and the bound (n-q) * E||G||^2; returns (estimate, bound).
std::pair<double, double> condition_ii_sanity(const AggregatorSpec& agg, const GradVector& g,
                                              double sigma, int n_workers, int trials,
                                              std::uint64_t seed);

/// Rows 1..n-1 fixed at g, row n = -g - sum of the others, so the mean is
/// exactly -g/n (the averaging counterexample).
GradMatrix build_mean_counterexample(const GradVector& g, int n);

/// n copies of g with the diagonal corruption applied (defeats every rule
/// that returns an input row). Requires n <= d.
GradMatrix build_selection_counterexample(const GradVector& g, int n, int d);

}  // namespace byzsgd
