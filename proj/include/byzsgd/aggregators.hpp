#pragma once

#include <string>
#include <vector>

#include "byzsgd/grad.hpp"

namespace byzsgd {

enum class AggregatorKind { Mean, Medoid, Krum, MultiKrum, GeoMed, MarMed, MeaMed };

const char* to_string(AggregatorKind kind);
AggregatorKind aggregator_kind_from_string(const std::string& name);
std::vector<AggregatorKind> all_aggregator_kinds();

/// Which rule to run plus its hyperparameters. q is the estimated Byzantine
/// count (used by Krum, Multi-Krum and MeaMed). multikrum_m == 0 means
/// "n - q at call time".
struct AggregatorSpec {
    AggregatorKind kind = AggregatorKind::Mean;
    int q = 0;
    double geomed_tolerance = 1e-8;
    int geomed_max_iters = 200;
    int multikrum_m = 0;
};

GradVector agg_mean(const GradMatrix& m);

/// Input row minimizing the sum of Euclidean distances to all rows.
/// Ties broken by lowest worker index.
GradVector agg_medoid(const GradMatrix& m);

/// score_i = sum of squared distances from row i to its n-q-2 nearest other
/// rows. Requires 2q + 2 < n.
std::vector<double> krum_scores(const GradMatrix& m, int q);
GradVector agg_krum(const GradMatrix& m, int q);

/// Average of the mk lowest-scoring rows; scores computed once on the full
/// matrix, ties by worker index.
GradVector agg_multikrum(const GradMatrix& m, int q, int mk);

/// (1+eps)-approximate geometric median by Weiszfeld iteration, initialized
/// at the coordinate-wise mean. Stops when the relative objective improvement
/// drops below `tol` or after `max_iters` iterations.
GradVector agg_geomed(const GradMatrix& m, double tol = 1e-8, int max_iters = 200);

/// Sum of Euclidean distances from `point` to all rows (the GeoMed objective).
double geomed_objective(const GradMatrix& m, std::span<const double> point);

/// Coordinate-wise one-dimensional (lower) median.
GradVector agg_marmed(const GradMatrix& m);

/// Per column: average of the n-q values nearest to the column median
/// (ties by worker index; the median itself is always included).
GradVector agg_meamed(const GradMatrix& m, int q);

GradVector aggregate(const AggregatorSpec& spec, const GradMatrix& m);

}  // namespace byzsgd
