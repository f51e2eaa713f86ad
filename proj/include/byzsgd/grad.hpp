#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace byzsgd {

/// One worker's d-dimensional gradient. All aggregation arithmetic is done
/// in 64-bit; 32-bit floats appear only at the wire boundary (WireValue).
using GradVector = std::vector<double>;

/// Raised on contract violations (empty input, out-of-range rank, ...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised on invalid rule/attack parameters (e.g. 2q+2 >= n for Krum).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

inline void require_param(bool cond, const std::string& msg) {
    if (!cond) throw ParameterError(msg);
}

/// One round's n x d snapshot of worker gradients, row-major.
class GradMatrix {
public:
    GradMatrix() = default;
    GradMatrix(std::size_t n, std::size_t d, double fill = 0.0)
        : n_(n), d_(d), data_(n * d, fill) {
        require(n >= 1, "GradMatrix: need at least one worker row");
        require(d >= 1, "GradMatrix: dimension must be positive");
    }

    static GradMatrix from_rows(const std::vector<GradVector>& rows) {
        require(!rows.empty(), "GradMatrix: need at least one worker row");
        GradMatrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            require(rows[i].size() == m.d_, "GradMatrix: all rows must share length d");
            for (std::size_t j = 0; j < m.d_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t n() const { return n_; }
    std::size_t d() const { return d_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * d_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * d_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * d_, d_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }

    GradVector row_copy(std::size_t i) const {
        return GradVector(data_.begin() + static_cast<std::ptrdiff_t>(i * d_),
                          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * d_));
    }

    GradVector column(std::size_t j) const {
        GradVector col(n_);
        for (std::size_t i = 0; i < n_; ++i) col[i] = data_[i * d_ + j];
        return col;
    }

    bool operator==(const GradMatrix& other) const = default;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> data_;
};

// ---- order statistics ----

/// Returns the element that would occupy 0-based index k in ascending order.
/// Randomized quickselect on a scratch copy; O(n) on average. The pivot
/// stream is deterministic so identical calls give identical timing.
double select_kth(std::span<const double> values, std::size_t k,
                  std::uint64_t seed = 0x51CDE57ULL);

/// In-place variant used on hot paths; permutes `values`.
double select_kth_inplace(std::span<double> values, std::size_t k,
                          std::uint64_t seed = 0x51CDE57ULL);

/// Lower-median policy: for even n the lower middle order statistic, so the
/// result is always an element of the input.
double median_1d(std::span<const double> values);
double median_1d_inplace(std::span<double> values);

// ---- wire representation (IEEE-754 single precision) ----

struct WireValue {
    std::uint32_t bits = 0;
    bool operator==(const WireValue&) const = default;
};

WireValue to_wire(double x);
double from_wire(WireValue w);

// ---- small vector helpers ----

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace byzsgd
