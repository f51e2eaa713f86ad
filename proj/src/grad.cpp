#include "byzsgd/grad.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <utility>

#include "byzsgd/rng.hpp"

namespace byzsgd {

double select_kth_inplace(std::span<double> values, std::size_t k, std::uint64_t seed) {
    require(!values.empty(), "select_kth: empty input");
    require(k < values.size(), "select_kth: rank out of range");

    Rng rng = Rng::stream(seed, values.size(), k);
    std::size_t lo = 0;
    std::size_t hi = values.size();  // half-open [lo, hi)
    while (hi - lo > 1) {
        const std::size_t pi = lo + rng.uniform_index(hi - lo);
        const double pivot = values[pi];
        // three-way partition: [lo, lt) < pivot, [lt, gt) == pivot, [gt, hi) > pivot
        std::size_t lt = lo, i = lo, gt = hi;
        while (i < gt) {
            if (values[i] < pivot) {
                std::swap(values[i++], values[lt++]);
            } else if (values[i] > pivot) {
                std::swap(values[i], values[--gt]);
            } else {
                ++i;
            }
        }
        if (k < lt) {
            hi = lt;
        } else if (k < gt) {
            return pivot;
        } else {
            lo = gt;
        }
    }
    return values[lo];
}

double select_kth(std::span<const double> values, std::size_t k, std::uint64_t seed) {
    std::vector<double> scratch(values.begin(), values.end());
    return select_kth_inplace(scratch, k, seed);
}

double median_1d_inplace(std::span<double> values) {
    require(!values.empty(), "median_1d: empty input");
    return select_kth_inplace(values, (values.size() - 1) / 2);
}

double median_1d(std::span<const double> values) {
    require(!values.empty(), "median_1d: empty input");
    return select_kth(values, (values.size() - 1) / 2);
}

WireValue to_wire(double x) {
    return WireValue{std::bit_cast<std::uint32_t>(static_cast<float>(x))};
}

double from_wire(WireValue w) {
    return static_cast<double>(std::bit_cast<float>(w.bits));
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "squared_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

}  // namespace byzsgd
