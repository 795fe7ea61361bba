#ifndef DEGCRAFT_CRAFTING_HPP
#define DEGCRAFT_CRAFTING_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "degcraft/binspace.hpp"
#include "degcraft/degrade.hpp"
#include "degcraft/errors.hpp"
#include "degcraft/featext.hpp"
#include "degcraft/gaussdist.hpp"
#include "degcraft/image.hpp"
#include "degcraft/image_io.hpp"
#include "degcraft/rng.hpp"
#include "degcraft/weights_file.hpp"

namespace degcraft {

struct CraftConfig {
    double alpha = 25.0;
    int n_per_bin = 100;
    int patch_size = 72;
    std::uint64_t master_seed = 0;
    double ridge = 1e-6;
    int threads = 1;  // worker threads for per-bin synthesis; results are
                      // bit-identical to the sequential run for any value
};

struct DistanceVector {
    std::vector<double> raw;
    std::vector<double> normalized;
};

// min-max normalization into [0, 1]; all-equal distances normalize to all
// zeros, which makes Eq.-style weighting fall back to uniform
inline std::vector<double> normalize_distances(const std::vector<double>& raw) {
    if (raw.empty()) throw validation_error("normalize_distances: empty input");
    double lo = raw[0], hi = raw[0];
    for (double v : raw) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out(raw.size(), 0.0);
    if (hi > lo)
        for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
    return out;
}

// w_i = [exp((1 - Dn_i)^alpha) - 1] / sum_j [exp((1 - Dn_j)^alpha) - 1].
// alpha = 0 uses the convention (1 - Dn)^0 = 1 for every Dn, so the result
// is exactly uniform.
inline WeightVector weights_from_distances(const DistanceVector& d, double alpha) {
    if (alpha < 0.0) throw validation_error("alpha must be >= 0");
    const std::size_t n = d.normalized.size();
    if (n == 0) throw validation_error("weights_from_distances: empty distances");
    WeightVector w;
    if (alpha == 0.0) {
        w.weights.assign(n, 1.0 / static_cast<double>(n));
        return w;
    }
    w.weights.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dn = d.normalized[i];
        if (dn < 0.0 || dn > 1.0)
            throw validation_error("normalized distances must lie in [0, 1]");
        w.weights[i] = std::expm1(std::pow(1.0 - dn, alpha));
        sum += w.weights[i];
    }
    if (sum <= 0.0)
        throw validation_error("weights_from_distances: degenerate distances "
                               "(every normalized distance is 1)");
    for (double& v : w.weights) v /= sum;
    return w;
}

namespace detail {

// Synthesize one bin's LR patch set. Stream layout within the bin rng, per
// patch: degradation params, HQ image index, crop x, crop y, then the noise
// draws inside apply().
inline ImageSet synthesize_bin_set(const ImageSet& hq, const BinGrid& grid,
                                   BinIndex b, const CraftConfig& cfg) {
    const int hr_size = cfg.patch_size * grid.scale;
    Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(b.flat)));
    ImageSet lr;
    lr.label = "bin-" + std::to_string(b.flat);
    lr.items.reserve(cfg.n_per_bin);
    for (int i = 0; i < cfg.n_per_bin; ++i) {
        const DegradationParams params = sample_in_bin(grid, b, rng);
        const std::size_t idx = rng.uniform_int(hq.items.size());
        const Image& src = hq.items[idx];
        if (src.width < hr_size || src.height < hr_size)
            throw validation_error("HQ image " + std::to_string(idx) +
                                   " is smaller than the HR crop size " +
                                   std::to_string(hr_size));
        const int x0 = static_cast<int>(rng.uniform_int(src.width - hr_size + 1));
        const int y0 = static_cast<int>(rng.uniform_int(src.height - hr_size + 1));
        Image hr = crop(to_three_channels(src), x0, y0, hr_size, hr_size);
        lr.items.push_back(apply(hr, params, rng));
    }
    return lr;
}

} // namespace detail

// Fitted Gaussian of each bin's synthesized feature distribution. Bin b uses
// the derived stream (master_seed, b), so bins are independent work units.
inline std::vector<GaussianStats> bin_gaussians(const ImageSet& hq,
                                                const BinGrid& grid,
                                                const Extractor& extractor,
                                                const CraftConfig& cfg) {
    if (hq.items.empty()) throw validation_error("empty HQ image set");
    const int n_bins = grid.n_bins();
    std::vector<GaussianStats> stats(n_bins);
    const int threads = cfg.threads > 1 ? std::min(cfg.threads, n_bins) : 1;
    auto work = [&](int b) {
        const ImageSet lr = detail::synthesize_bin_set(hq, grid, BinIndex{b}, cfg);
        stats[b] = fit_gaussian(extractor.extract(lr), cfg.ridge);
    };
    if (threads == 1) {
        for (int b = 0; b < n_bins; ++b) work(b);
        return stats;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int b = next.fetch_add(1); b < n_bins; b = next.fetch_add(1)) {
                if (failed.load()) return;
                try {
                    work(b);
                } catch (...) {
                    failed.store(true);
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failed.load())
        throw validation_error("bin synthesis failed; rerun with threads=1 "
                               "for the detailed error");
    return stats;
}

inline GaussianStats reference_gaussian(const ImageSet& ref, const BinGrid& grid,
                                        const Extractor& extractor,
                                        const CraftConfig& cfg) {
    if (ref.items.empty()) throw validation_error("empty reference image set");
    // aim for about n_per_bin reference samples
    const int per_image = std::max<int>(
        1, (cfg.n_per_bin + static_cast<int>(ref.items.size()) - 1) /
               static_cast<int>(ref.items.size()));
    Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(grid.n_bins())));
    ImageSet three;
    three.label = ref.label;
    for (const Image& im : ref.items) three.items.push_back(to_three_channels(im));
    const ImageSet patches = extract_patches(three, cfg.patch_size, per_image, rng);
    if (patches.items.size() < 2)
        throw validation_error("need at least 2 reference patches");
    return fit_gaussian(extractor.extract(patches), cfg.ridge);
}

inline DistanceVector distances_from_stats(const GaussianStats& ref_stats,
                                           const std::vector<GaussianStats>& bins) {
    DistanceVector d;
    d.raw.reserve(bins.size());
    for (const GaussianStats& s : bins) d.raw.push_back(frechet_distance(s, ref_stats));
    d.normalized = normalize_distances(d.raw);
    return d;
}

// Per-bin squared Frechet distances to the reference feature distribution.
// Reference features are extracted once and reused across all bins.
inline DistanceVector distances(const ImageSet& ref, const ImageSet& hq,
                                const BinGrid& grid, const Extractor& extractor,
                                const CraftConfig& cfg) {
    const GaussianStats ref_stats = reference_gaussian(ref, grid, extractor, cfg);
    return distances_from_stats(ref_stats, bin_gaussians(hq, grid, extractor, cfg));
}

struct EstimateResult {
    WeightVector weights;
    DistanceVector distances;
    WeightsFile provenance;  // grid, alpha, extractor tag, seed, weights
};

inline EstimateResult estimate_from_sets(const ImageSet& ref, const ImageSet& hq,
                                         const BinGrid& grid,
                                         const Extractor& extractor,
                                         const CraftConfig& cfg) {
    EstimateResult r;
    r.distances = distances(ref, hq, grid, extractor, cfg);
    r.weights = weights_from_distances(r.distances, cfg.alpha);
    r.provenance = WeightsFile{grid, cfg.alpha, extractor.tag(), cfg.master_seed,
                               r.weights};
    return r;
}

inline EstimateResult estimate(const std::string& ref_dir, const std::string& hq_dir,
                               const BinGrid& grid, const ExtractorSpec& spec,
                               const CraftConfig& cfg) {
    const ImageSet ref = load_directory(ref_dir);
    const ImageSet hq = load_directory(hq_dir);
    const auto extractor = make_extractor(spec);
    return estimate_from_sets(ref, hq, grid, *extractor, cfg);
}

} // namespace degcraft

#endif
