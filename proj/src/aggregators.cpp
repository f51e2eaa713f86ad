#include "byzsgd/aggregators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <utility>

namespace byzsgd {

const char* to_string(AggregatorKind kind) {
    switch (kind) {
        case AggregatorKind::Mean: return "mean";
        case AggregatorKind::Medoid: return "medoid";
        case AggregatorKind::Krum: return "krum";
        case AggregatorKind::MultiKrum: return "multikrum";
        case AggregatorKind::GeoMed: return "geomed";
        case AggregatorKind::MarMed: return "marmed";
        case AggregatorKind::MeaMed: return "meamed";
    }
    return "?";
}

std::vector<AggregatorKind> all_aggregator_kinds() {
    return {AggregatorKind::Mean,   AggregatorKind::Medoid, AggregatorKind::Krum,
            AggregatorKind::MultiKrum, AggregatorKind::GeoMed, AggregatorKind::MarMed,
            AggregatorKind::MeaMed};
}

AggregatorKind aggregator_kind_from_string(const std::string& name) {
    for (AggregatorKind k : all_aggregator_kinds())
        if (name == to_string(k)) return k;
    std::string valid;
    for (AggregatorKind k : all_aggregator_kinds()) {
        if (!valid.empty()) valid += ", ";
        valid += to_string(k);
    }
    throw ParameterError("aggregator: unknown kind \"" + name + "\" (valid kinds: " + valid + ")");
}

GradVector agg_mean(const GradMatrix& m) {
    GradVector out(m.d(), 0.0);
    for (std::size_t i = 0; i < m.n(); ++i) {
        const auto row = m.row(i);
        for (std::size_t j = 0; j < m.d(); ++j) out[j] += row[j];
    }
    for (double& v : out) v /= static_cast<double>(m.n());
    return out;
}

GradVector agg_medoid(const GradMatrix& m) {
    std::size_t best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.n(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m.n(); ++j)
            sum += std::sqrt(squared_distance(m.row(i), m.row(j)));
        if (sum < best_sum) {
            best_sum = sum;
            best = i;
        }
    }
    return m.row_copy(best);
}

std::vector<double> krum_scores(const GradMatrix& m, int q) {
    const std::size_t n = m.n();
    require_param(q >= 0, "krum: q must be nonnegative");
    require_param(2 * static_cast<std::size_t>(q) + 2 < n, "krum: requires 2q + 2 < n");
    const std::size_t neighbors = n - static_cast<std::size_t>(q) - 2;

    // full pairwise squared distances; O(n^2 d)
    std::vector<double> dist2(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = squared_distance(m.row(i), m.row(j));
            dist2[i * n + j] = d2;
            dist2[j * n + i] = d2;
        }
    }

    std::vector<double> scores(n, 0.0);
    std::vector<double> others(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) others[k++] = dist2[i * n + j];
        std::nth_element(others.begin(),
                         others.begin() + static_cast<std::ptrdiff_t>(neighbors - 1),
                         others.end());
        double s = 0.0;
        for (std::size_t t = 0; t < neighbors; ++t) s += others[t];
        scores[i] = s;
    }
    return scores;
}

GradVector agg_krum(const GradMatrix& m, int q) {
    const std::vector<double> scores = krum_scores(m, q);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] < scores[best]) best = i;
    return m.row_copy(best);
}

GradVector agg_multikrum(const GradMatrix& m, int q, int mk) {
    const std::size_t n = m.n();
    require_param(mk >= 1 && static_cast<std::size_t>(mk) <= n - static_cast<std::size_t>(q),
                  "multikrum: need 1 <= m <= n - q");
    const std::vector<double> scores = krum_scores(m, q);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // sum the selected rows in worker-index order so the result does not
    // depend on the score ordering of equal selections
    std::vector<std::size_t> selected(order.begin(), order.begin() + mk);
    std::sort(selected.begin(), selected.end());

    GradVector out(m.d(), 0.0);
    for (std::size_t i : selected) {
        const auto row = m.row(i);
        for (std::size_t j = 0; j < m.d(); ++j) out[j] += row[j];
    }
    for (double& v : out) v /= static_cast<double>(mk);
    return out;
}

double geomed_objective(const GradMatrix& m, std::span<const double> point) {
    double obj = 0.0;
    for (std::size_t i = 0; i < m.n(); ++i)
        obj += std::sqrt(squared_distance(point, m.row(i)));
    return obj;
}

GradVector agg_geomed(const GradMatrix& m, double tol, int max_iters) {
    require_param(tol >= 0.0, "geomed: tolerance must be nonnegative");
    require_param(max_iters >= 1, "geomed: max_iters must be positive");
    const std::size_t n = m.n();
    const std::size_t d = m.d();
    if (n == 1) return m.row_copy(0);

    // data scale for the coincidence test
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(m(i, j)));
    const double singular = 1e-12 * std::max(scale, 1.0);

    GradVector x = agg_mean(m);
    double obj = geomed_objective(m, x);
    GradVector next(d);

    for (int iter = 0; iter < max_iters; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        double weight_sum = 0.0;
        std::ptrdiff_t hit = -1;
        for (std::size_t i = 0; i < n; ++i) {
            const double dist = std::sqrt(squared_distance(x, m.row(i)));
            if (dist < singular) {
                hit = static_cast<std::ptrdiff_t>(i);
                break;
            }
            const double w = 1.0 / dist;
            const auto row = m.row(i);
            for (std::size_t j = 0; j < d; ++j) next[j] += w * row[j];
            weight_sum += w;
        }
        if (hit >= 0) {
            // iterate landed on a data point: restart at the mean of the
            // remaining rows nudged along that row's direction
            const auto pinned = m.row(static_cast<std::size_t>(hit));
            std::fill(next.begin(), next.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (static_cast<std::ptrdiff_t>(i) == hit) continue;
                const auto row = m.row(i);
                for (std::size_t j = 0; j < d; ++j) next[j] += row[j];
            }
            for (std::size_t j = 0; j < d; ++j) {
                next[j] /= static_cast<double>(n - 1);
                next[j] += 2.0 * singular * (pinned[j] >= next[j] ? 1.0 : -1.0);
            }
            const double next_obj = geomed_objective(m, next);
            if (next_obj >= obj) break;  // the data point itself is (near) optimal
            x = next;
            obj = next_obj;
            continue;
        }
        for (std::size_t j = 0; j < d; ++j) next[j] /= weight_sum;
        const double next_obj = geomed_objective(m, next);
        const double improvement = obj - next_obj;
        if (next_obj < obj) {
            x = next;
            obj = next_obj;
        }
        if (improvement < tol * std::max(obj, std::numeric_limits<double>::min())) break;
    }

    // the objective of the result never exceeds that of any input row or
    // the coordinate-wise mean
    GradVector best = x;
    double best_obj = obj;
    for (std::size_t i = 0; i < n; ++i) {
        const double row_obj = geomed_objective(m, m.row(i));
        if (row_obj < best_obj) {
            best_obj = row_obj;
            best = m.row_copy(i);
        }
    }
    return best;
}

GradVector agg_marmed(const GradMatrix& m) {
    GradVector out(m.d());
    GradVector col(m.n());
    for (std::size_t j = 0; j < m.d(); ++j) {
        for (std::size_t i = 0; i < m.n(); ++i) col[i] = m(i, j);
        out[j] = median_1d_inplace(col);
    }
    return out;
}

namespace {

void warn_median_q(std::size_t n, int q) {
    const int q_max = static_cast<int>((n + 1) / 2) - 1;  // ceil(n/2) - 1
    static std::atomic<bool> warned{false};
    if (q > q_max && !warned.exchange(true)) {
        std::cerr << "byzsgd: warning: q=" << q << " exceeds ceil(n/2)-1=" << q_max
                  << "; the dimensional resilience bound does not apply\n";
    }
}

}  // namespace

GradVector agg_meamed(const GradMatrix& m, int q) {
    const std::size_t n = m.n();
    require_param(q >= 0 && static_cast<std::size_t>(q) <= n - 1,
                  "meamed: need 0 <= q <= n - 1");
    warn_median_q(n, q);
    const std::size_t keep = n - static_cast<std::size_t>(q);

    GradVector out(m.d());
    GradVector col(n);
    std::vector<std::pair<double, std::size_t>> by_dist(n);
    std::vector<std::size_t> kept(keep);
    for (std::size_t j = 0; j < m.d(); ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = m(i, j);
        const double mu = median_1d(col);
        for (std::size_t i = 0; i < n; ++i) by_dist[i] = {std::abs(col[i] - mu), i};
        std::nth_element(by_dist.begin(),
                         by_dist.begin() + static_cast<std::ptrdiff_t>(keep - 1),
                         by_dist.end());
        // sum in worker-index order so q = 0 reduces to the mean exactly
        for (std::size_t t = 0; t < keep; ++t) kept[t] = by_dist[t].second;
        std::sort(kept.begin(), kept.end());
        double s = 0.0;
        for (std::size_t i : kept) s += col[i];
        out[j] = s / static_cast<double>(keep);
    }
    return out;
}

GradVector aggregate(const AggregatorSpec& spec, const GradMatrix& m) {
    switch (spec.kind) {
        case AggregatorKind::Mean: return agg_mean(m);
        case AggregatorKind::Medoid: return agg_medoid(m);
        case AggregatorKind::Krum: return agg_krum(m, spec.q);
        case AggregatorKind::MultiKrum: {
            const int mk = spec.multikrum_m > 0 ? spec.multikrum_m
                                                : static_cast<int>(m.n()) - spec.q;
            return agg_multikrum(m, spec.q, mk);
        }
        case AggregatorKind::GeoMed:
            return agg_geomed(m, spec.geomed_tolerance, spec.geomed_max_iters);
        case AggregatorKind::MarMed: {
            warn_median_q(m.n(), spec.q);
            return agg_marmed(m);
        }
        case AggregatorKind::MeaMed: return agg_meamed(m, spec.q);
    }
    throw ParameterError("aggregate: unknown aggregator kind");
}

}  // namespace byzsgd
