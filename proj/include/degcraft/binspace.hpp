#ifndef DEGCRAFT_BINSPACE_HPP
#define DEGCRAFT_BINSPACE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "degcraft/degrade.hpp"
#include "degcraft/errors.hpp"
#include "degcraft/rng.hpp"

namespace degcraft {

struct BinAxis {
    std::string name;  // sigma | noise | quality
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;

    double width() const { return (hi - lo) / count; }

    void validate() const {
        if (!(lo < hi)) throw validation_error("axis " + name + ": lo must be < hi");
        if (count < 1) throw validation_error("axis " + name + ": count must be >= 1");
    }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct BinIndex {
    int flat = 0;
    bool operator==(const BinIndex&) const = default;
};

// Discretized degradation space. Flat index layout is sigma-fastest:
// flat = (q_idx * noise.count + l_idx) * sigma.count + sigma_idx.
struct BinGrid {
    BinAxis sigma;
    BinAxis noise;
    BinAxis quality;
    int scale = 4;

    int n_bins() const { return sigma.count * noise.count * quality.count; }

    std::array<int, 3> decompose(BinIndex b) const {
        if (b.flat < 0 || b.flat >= n_bins())
            throw validation_error("bin index out of range");
        const int s = b.flat % sigma.count;
        const int l = (b.flat / sigma.count) % noise.count;
        const int q = b.flat / (sigma.count * noise.count);
        return {s, l, q};
    }

    BinIndex compose(int s_idx, int l_idx, int q_idx) const {
        return BinIndex{(q_idx * noise.count + l_idx) * sigma.count + s_idx};
    }
};

inline BinGrid make_grid(const BinAxis& sigma_axis, const BinAxis& noise_axis,
                         const BinAxis& quality_axis, int scale) {
    sigma_axis.validate();
    noise_axis.validate();
    quality_axis.validate();
    if (scale < 1) throw validation_error("scale must be >= 1");
    return BinGrid{sigma_axis, noise_axis, quality_axis, scale};
}

// sigma [0,5]x5, noise [0,50]x5, quality [30,90]x3, scale 4 -> 75 bins
inline BinGrid default_grid(int scale = 4) {
    return make_grid({"sigma", 0.0, 5.0, 5}, {"noise", 0.0, 50.0, 5},
                     {"quality", 30.0, 90.0, 3}, scale);
}

namespace detail {

inline Interval axis_interval(const BinAxis& axis, int idx) {
    const double w = axis.width();
    return {axis.lo + idx * w, idx + 1 == axis.count ? axis.hi : axis.lo + (idx + 1) * w};
}

// half-open bins, except the last bin which is closed at hi
inline int axis_index_of(const BinAxis& axis, double v) {
    if (v < axis.lo || v > axis.hi)
        throw validation_error("parameter outside grid range on axis " + axis.name);
    const int idx = static_cast<int>(std::floor((v - axis.lo) / axis.width()));
    return std::min(idx, axis.count - 1);
}

} // namespace detail

inline std::array<Interval, 3> bounds(const BinGrid& grid, BinIndex b) {
    const auto [s, l, q] = grid.decompose(b);
    return {detail::axis_interval(grid.sigma, s), detail::axis_interval(grid.noise, l),
            detail::axis_interval(grid.quality, q)};
}

inline BinIndex bin_of(const BinGrid& grid, const DegradationParams& p) {
    return grid.compose(detail::axis_index_of(grid.sigma, p.sigma),
                        detail::axis_index_of(grid.noise, p.noise_level),
                        detail::axis_index_of(grid.quality, static_cast<double>(p.jpeg_quality)));
}

// Uniform draw inside one bin. JPEG quality is drawn as a real and rounded
// to the nearest integer, then clamped so the result stays inside the bin.
inline DegradationParams sample_in_bin(const BinGrid& grid, BinIndex b, Rng& rng) {
    const auto box = bounds(grid, b);
    const auto [s_idx, l_idx, q_idx] = grid.decompose(b);
    DegradationParams p;
    p.sigma = rng.uniform(box[0].lo, box[0].hi);
    p.noise_level = rng.uniform(box[1].lo, box[1].hi);
    const double q_real = rng.uniform(box[2].lo, box[2].hi);
    int q = static_cast<int>(std::lround(q_real));
    const int q_min = static_cast<int>(std::ceil(box[2].lo));
    const int q_max = q_idx + 1 == grid.quality.count
                          ? static_cast<int>(std::floor(box[2].hi))
                          : static_cast<int>(std::ceil(box[2].hi)) - 1;
    p.jpeg_quality = std::clamp(q, q_min, q_max);
    p.scale = grid.scale;
    return p;
}

struct WeightVector {
    std::vector<double> weights;

    void validate() const {
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw validation_error("weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw validation_error("weights must sum to 1");
    }
};

inline WeightVector uniform_weights(int n_bins) {
    return WeightVector{std::vector<double>(n_bins, 1.0 / n_bins)};
}

// Categorical draw via inverse CDF on the cumulative sum in index order.
inline BinIndex sample_bin(const WeightVector& w, Rng& rng) {
    double total = 0.0;
    for (double v : w.weights) total += v;
    if (total <= 0.0)
        throw validation_error("sample_bin: all weights are zero");
    const double u = rng.uniform() * total;
    double cum = 0.0;
    int last_nonzero = -1;
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
        if (w.weights[i] > 0.0) last_nonzero = static_cast<int>(i);
        cum += w.weights[i];
        if (u < cum) return BinIndex{static_cast<int>(i)};
    }
    return BinIndex{last_nonzero};
}

} // namespace degcraft

#endif
