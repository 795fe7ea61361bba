#ifndef DEGCRAFT_HARNESS_HPP
#define DEGCRAFT_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "degcraft/binspace.hpp"
#include "degcraft/crafting.hpp"
#include "degcraft/errors.hpp"
#include "degcraft/image.hpp"
#include "degcraft/rng.hpp"

namespace degcraft {

// Built-in testing degradation distributions (four presets).
struct SettingPreset {
    int id = 0;
    Interval sigma_range;
    Interval noise_range;
    Interval quality_range;
};

inline SettingPreset setting_preset(int id) {
    switch (id) {
        case 1: return {1, {0.0, 1.0}, {0.0, 10.0}, {80.0, 90.0}};
        case 2: return {2, {0.5, 1.5}, {15.0, 25.0}, {75.0, 85.0}};
        case 3: return {3, {1.5, 2.5}, {5.0, 15.0}, {75.0, 85.0}};
        case 4: return {4, {2.5, 3.5}, {25.0, 35.0}, {65.0, 75.0}};
        default: throw validation_error("setting id must be in 1..4");
    }
}

// Bins whose box intersects the setting's parameter box with positive
// measure on every axis.
inline std::vector<BinIndex> truth_bins(const SettingPreset& setting,
                                        const BinGrid& grid) {
    auto overlaps = [](const Interval& a, const Interval& b) {
        return std::min(a.hi, b.hi) - std::max(a.lo, b.lo) > 0.0;
    };
    std::vector<BinIndex> out;
    for (int b = 0; b < grid.n_bins(); ++b) {
        const auto box = bounds(grid, BinIndex{b});
        if (overlaps(box[0], setting.sigma_range) &&
            overlaps(box[1], setting.noise_range) &&
            overlaps(box[2], setting.quality_range))
            out.push_back(BinIndex{b});
    }
    return out;
}

// Degraded reference set drawn from a setting's true distribution: per patch,
// (sigma, l, q) uniform over the setting box, random HQ crop, full pipeline.
inline ImageSet synthesize_reference_set(const SettingPreset& setting,
                                         const ImageSet& hq, const BinGrid& grid,
                                         int n, int patch_size,
                                         std::uint64_t seed) {
    if (hq.items.empty()) throw validation_error("empty HQ image set");
    const int hr_size = patch_size * grid.scale;
    Rng rng(seed);
    ImageSet out;
    out.label = "setting-" + std::to_string(setting.id);
    out.items.reserve(n);
    for (int i = 0; i < n; ++i) {
        DegradationParams p;
        p.sigma = rng.uniform(setting.sigma_range.lo, setting.sigma_range.hi);
        p.noise_level = rng.uniform(setting.noise_range.lo, setting.noise_range.hi);
        p.jpeg_quality = static_cast<int>(std::lround(
            rng.uniform(setting.quality_range.lo, setting.quality_range.hi)));
        p.scale = grid.scale;
        const std::size_t idx = rng.uniform_int(hq.items.size());
        const Image& src = hq.items[idx];
        if (src.width < hr_size || src.height < hr_size)
            throw validation_error("HQ image " + std::to_string(idx) +
                                   " is smaller than the HR crop size");
        const int x0 = static_cast<int>(rng.uniform_int(src.width - hr_size + 1));
        const int y0 = static_cast<int>(rng.uniform_int(src.height - hr_size + 1));
        out.items.push_back(
            apply(crop(to_three_channels(src), x0, y0, hr_size, hr_size), p, rng));
    }
    return out;
}

struct RecoveryReport {
    int setting_id = 0;
    int trials = 0;
    std::vector<BinIndex> truth;
    std::vector<WeightVector> trial_weights;
    std::vector<std::vector<double>> trial_raw_distances;
    std::vector<double> mass_on_truth;  // per trial, in [0, 1]
    std::vector<bool> argmin_hit;       // per trial
};

// Recovery study: fixed bin-side synthesis, a fresh seeded reference
// set per trial, weights via the estimation pipeline.
inline RecoveryReport recovery_eval(const SettingPreset& setting, const BinGrid& grid,
                                    const Extractor& extractor, const CraftConfig& cfg,
                                    int trials, const ImageSet& hq) {
    if (trials < 1) throw validation_error("trials must be >= 1");
    RecoveryReport report;
    report.setting_id = setting.id;
    report.trials = trials;
    report.truth = truth_bins(setting, grid);

    const std::vector<GaussianStats> bins = bin_gaussians(hq, grid, extractor, cfg);
    const std::uint64_t trial_root = derive_seed(cfg.master_seed, 0x74726961ULL);
    for (int t = 0; t < trials; ++t) {
        const ImageSet ref = synthesize_reference_set(
            setting, hq, grid, cfg.n_per_bin, cfg.patch_size,
            derive_seed(trial_root, static_cast<std::uint64_t>(t)));
        const GaussianStats ref_stats =
            fit_gaussian(extractor.extract(ref), cfg.ridge);
        const DistanceVector d = distances_from_stats(ref_stats, bins);
        const WeightVector w = weights_from_distances(d, cfg.alpha);

        double mass = 0.0;
        for (BinIndex b : report.truth) mass += w.weights[b.flat];
        const int argmin = static_cast<int>(
            std::min_element(d.raw.begin(), d.raw.end()) - d.raw.begin());
        const bool hit = std::any_of(report.truth.begin(), report.truth.end(),
                                     [&](BinIndex b) { return b.flat == argmin; });
        report.trial_weights.push_back(w);
        report.trial_raw_distances.push_back(d.raw);
        report.mass_on_truth.push_back(mass);
        report.argmin_hit.push_back(hit);
    }
    return report;
}

struct StabilityRow {
    int n = 0;
    double mean_distance = 0.0;
    double std_distance = 0.0;
};

// Stability study: distance to one fixed target bin, estimated from
// reference sets of increasing size, `trials` repetitions each.
inline std::vector<StabilityRow> stability_study(BinIndex target,
                                                 const std::vector<int>& n_values,
                                                 int trials, const ImageSet& hq,
                                                 const BinGrid& grid,
                                                 const Extractor& extractor,
                                                 const CraftConfig& cfg) {
    if (trials < 1) throw validation_error("trials must be >= 1");
    for (std::size_t i = 1; i < n_values.size(); ++i)
        if (n_values[i] <= n_values[i - 1])
            throw validation_error("n values must be ascending");

    const ImageSet bin_set = detail::synthesize_bin_set(hq, grid, target, cfg);
    const GaussianStats bin_stats = fit_gaussian(extractor.extract(bin_set), cfg.ridge);
    const auto box = bounds(grid, target);
    SettingPreset as_setting{0, box[0], box[1], box[2]};

    const std::uint64_t root = derive_seed(cfg.master_seed, 0x73746162ULL);
    std::vector<StabilityRow> table;
    for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
        const int n = n_values[ni];
        if (n < 2) throw validation_error("reference set size must be >= 2");
        std::vector<double> values(trials);
        for (int t = 0; t < trials; ++t) {
            const ImageSet ref = synthesize_reference_set(
                as_setting, hq, grid, n, cfg.patch_size,
                derive_seed(root, (static_cast<std::uint64_t>(ni) << 32) |
                                      static_cast<std::uint64_t>(t)));
            const GaussianStats ref_stats =
                fit_gaussian(extractor.extract(ref), cfg.ridge);
            values[t] = frechet_distance(bin_stats, ref_stats);
        }
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / trials;
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double stddev = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
        table.push_back({n, mean, stddev});
    }
    return table;
}

// Binary PGM heatmap of a 75-bin weight vector: 5 rows (noise bins, low at
// top) x 15 columns (quality-major, then sigma), 20x20 blocks, gray scaled
// by max weight.
inline void heatmap(const WeightVector& w, const BinGrid& grid,
                    const std::string& path) {
    if (grid.sigma.count != 5 || grid.noise.count != 5 || grid.quality.count != 3)
        throw validation_error("heatmap supports only the default 5x5x3 grid layout");
    if (static_cast<int>(w.weights.size()) != grid.n_bins())
        throw validation_error("weight vector length does not match the grid");
    constexpr int kCell = 20;
    const int width = 15 * kCell;
    const int height = 5 * kCell;
    double wmax = 0.0;
    for (double v : w.weights) wmax = std::max(wmax, v);
    std::vector<unsigned char> pixels(static_cast<std::size_t>(width) * height, 0);
    for (int b = 0; b < grid.n_bins(); ++b) {
        const auto [s_idx, l_idx, q_idx] = grid.decompose(BinIndex{b});
        const int col = q_idx * grid.sigma.count + s_idx;
        const int row = l_idx;
        const unsigned char gray = wmax > 0.0
            ? static_cast<unsigned char>(std::lround(255.0 * w.weights[b] / wmax))
            : 0;
        for (int y = row * kCell; y < (row + 1) * kCell; ++y)
            for (int x = col * kCell; x < (col + 1) * kCell; ++x)
                pixels[static_cast<std::size_t>(y) * width + x] = gray;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open file for writing: " + path);
    f << "P5\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
    if (!f) throw io_error("write failed: " + path);
}

// Procedural HQ test image: smooth multi-octave value noise, sharp-edged
// rectangles, and a few sinusoidal textures. Deterministic in the seed.
inline Image make_synthetic_image(int width, int height, std::uint64_t seed) {
    Rng rng(seed);
    Image img(width, height, 3);

    auto add_value_noise = [&](int grid_n, double amplitude, bool absolute) {
        std::vector<double> knots(static_cast<std::size_t>(grid_n) * grid_n * 3);
        for (double& v : knots)
            v = absolute ? rng.uniform(0.0, 255.0) : rng.uniform(-amplitude, amplitude);
        for (int c = 0; c < 3; ++c) {
            const double* plane =
                knots.data() + static_cast<std::size_t>(c) * grid_n * grid_n;
            for (int y = 0; y < height; ++y) {
                const double gy = static_cast<double>(y) / height * (grid_n - 1);
                const int iy = std::min(static_cast<int>(gy), grid_n - 2);
                const double fy = gy - iy;
                for (int x = 0; x < width; ++x) {
                    const double gx = static_cast<double>(x) / width * (grid_n - 1);
                    const int ix = std::min(static_cast<int>(gx), grid_n - 2);
                    const double fx = gx - ix;
                    const double v00 = plane[iy * grid_n + ix];
                    const double v01 = plane[iy * grid_n + ix + 1];
                    const double v10 = plane[(iy + 1) * grid_n + ix];
                    const double v11 = plane[(iy + 1) * grid_n + ix + 1];
                    const double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                     fy * ((1 - fx) * v10 + fx * v11);
                    img.at(c, y, x) += v;
                }
            }
        }
    };

    add_value_noise(6, 0.0, true);    // smooth background
    add_value_noise(20, 22.0, false); // mid-frequency variation

    // sharp-edged rectangles, fixed count to keep edge density uniform
    const int n_rects = 24;
    for (int r = 0; r < n_rects; ++r) {
        const int rw = 8 + static_cast<int>(rng.uniform_int(width / 2));
        const int rh = 8 + static_cast<int>(rng.uniform_int(height / 2));
        const int x0 = static_cast<int>(rng.uniform_int(std::max(1, width - rw)));
        const int y0 = static_cast<int>(rng.uniform_int(std::max(1, height - rh)));
        double color[3];
        for (double& c : color) c = rng.uniform(0.0, 255.0);
        const double blend = rng.uniform(0.35, 0.9);
        for (int c = 0; c < 3; ++c)
            for (int y = y0; y < std::min(height, y0 + rh); ++y)
                for (int x = x0; x < std::min(width, x0 + rw); ++x)
                    img.at(c, y, x) = (1 - blend) * img.at(c, y, x) + blend * color[c];
    }

    // Global triangle-wave shading: steep linear ramps in a random
    // direction. Ramps carry strong gradient energy but almost no Laplacian
    // (folds aside), so they raise the gradient floor - diluting the extra
    // gradient contributed by additive noise - without contaminating the
    // median-based noise estimate.
    {
        const double period = 40.0;
        const double theta = rng.uniform(0.0, 6.283185307179586);
        const double dx = std::cos(theta) / period;
        const double dy = std::sin(theta) / period;
        const double phase = rng.uniform(0.0, 1.0);
        const double amp = 14.0;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                double t = x * dx + y * dy + phase;
                t -= std::floor(t);
                const double v = amp * (4.0 * std::abs(t - 0.5) - 1.0);
                for (int c = 0; c < 3; ++c) img.at(c, y, x) += v;
            }
        }
    }

    // Sinusoidal gratings at fixed log-spaced wavelengths and fixed
    // amplitude; only orientation and phase vary per image. The multi-scale
    // detail keeps blur width observable after the pipeline's downsampling,
    // and holding the amplitudes fixed keeps texture statistics homogeneous
    // across the corpus (content variance would otherwise drown the
    // degradation signal in the feature covariances).
    constexpr double kTwoPi = 6.283185307179586;
    // shortest wavelength stays above 2 px after a 4x downsample so the
    // texture does not alias into fake noise
    // amplitude roughly tracks wavelength so each grating contributes
    // comparable gradient energy (amp * f near constant); blur then
    // attenuates the bands one by one, keeping the response spread over the
    // sigma range. The shortest band is kept weaker: its response is
    // steepest right in the middle of the sigma range and would otherwise
    // dominate the distance there.
    constexpr double kGratings[][2] = {
        {19.6, 5.0}, {31.4, 30.0}, {48.0, 45.0}};
    for (const auto& g : kGratings) {
        const double wavelength = g[0];
        const double f = kTwoPi / wavelength;
        const double theta = rng.uniform(0.0, kTwoPi);
        const double fx = f * std::cos(theta);
        const double fy = f * std::sin(theta);
        const double phase = rng.uniform(0.0, kTwoPi);
        const double amp = g[1];
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x)
                    img.at(c, y, x) += amp * std::sin(fx * x + fy * y + phase);
    }

    // Sparse broadband texture patches. Unlike a pure tone, broadband fine
    // detail is suppressed by JPEG in proportion to the quantization step,
    // so the gradient and DCT-band features pick up a graded quality
    // response. The texture also dies under mild blur, sharpening the low
    // end of the blur axis. Keeping the patches a minority of the area
    // leaves the median-based noise estimate driven by smooth pixels.
    auto add_texture_patches = [&](int count, int size, int cell, double amp) {
        for (int p = 0; p < count; ++p) {
            const int x0 = static_cast<int>(rng.uniform_int(std::max(1, width - size)));
            const int y0 = static_cast<int>(rng.uniform_int(std::max(1, height - size)));
            const int cells = size / cell + 2;
            std::vector<double> lattice(static_cast<size_t>(cells) * cells);
            for (double& v : lattice) v = rng.uniform(-amp, amp);
            for (int y = y0; y < std::min(height, y0 + size); ++y) {
                for (int x = x0; x < std::min(width, x0 + size); ++x) {
                    const double gx = static_cast<double>(x - x0) / cell;
                    const double gy = static_cast<double>(y - y0) / cell;
                    const int ix = static_cast<int>(gx);
                    const int iy = static_cast<int>(gy);
                    const double fx = gx - ix;
                    const double fy = gy - iy;
                    const double v00 = lattice[iy * cells + ix];
                    const double v01 = lattice[iy * cells + ix + 1];
                    const double v10 = lattice[(iy + 1) * cells + ix];
                    const double v11 = lattice[(iy + 1) * cells + ix + 1];
                    const double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                     fy * ((1 - fx) * v10 + fx * v11);
                    for (int c = 0; c < 3; ++c) img.at(c, y, x) += v;
                }
            }
        }
    };
    // fine scale: survives only low blur, lives in the high DCT band
    add_texture_patches(16, 48, 5, 26.0);
    // medium scale: dies around the middle of the blur range, mid DCT band
    add_texture_patches(16, 48, 12, 32.0);
    // coarse scale: survives until the top of the blur range, low-mid band
    add_texture_patches(10, 56, 14, 22.0);

    clamp_inplace(img);
    return img;
}

inline ImageSet make_synthetic_corpus(int count, int width, int height,
                                      std::uint64_t seed) {
    ImageSet set;
    set.label = "synthetic-corpus";
    set.items.reserve(count);
    for (int i = 0; i < count; ++i)
        set.items.push_back(make_synthetic_image(
            width, height, derive_seed(seed, static_cast<std::uint64_t>(i))));
    return set;
}

// report emission, both human-readable text and CSV

inline void write_recovery_report_text(const std::string& path,
                                       const RecoveryReport& r) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open file for writing: " + path);
    f << "recovery report, setting " << r.setting_id << ", " << r.trials
      << " trials\n";
    f << "truth bins:";
    for (BinIndex b : r.truth) f << " " << b.flat;
    f << "\n";
    int hits = 0;
    double mass = 0.0;
    for (int t = 0; t < r.trials; ++t) {
        hits += r.argmin_hit[t] ? 1 : 0;
        mass += r.mass_on_truth[t];
        f << "trial " << t << ": mass_on_truth=" << r.mass_on_truth[t]
          << " argmin_hit=" << (r.argmin_hit[t] ? "yes" : "no") << "\n";
    }
    f << "argmin hits: " << hits << "/" << r.trials << "\n";
    f << "mean mass on truth: " << mass / r.trials << "\n";
}

inline void write_recovery_report_csv(const std::string& path,
                                      const RecoveryReport& r) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open file for writing: " + path);
    f << "trial,mass_on_truth,argmin_hit\n";
    for (int t = 0; t < r.trials; ++t)
        f << t << "," << r.mass_on_truth[t] << "," << (r.argmin_hit[t] ? 1 : 0)
          << "\n";
}

inline void write_stability_text(const std::string& path,
                                 const std::vector<StabilityRow>& table) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open file for writing: " + path);
    f << "stability study (distance mean/std vs reference set size)\n";
    for (const StabilityRow& row : table)
        f << "n=" << row.n << " mean=" << row.mean_distance
          << " std=" << row.std_distance << "\n";
}

inline void write_stability_csv(const std::string& path,
                                const std::vector<StabilityRow>& table) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open file for writing: " + path);
    f << "n,mean_distance,std_distance\n";
    for (const StabilityRow& row : table)
        f << row.n << "," << row.mean_distance << "," << row.std_distance << "\n";
}

} // namespace degcraft

#endif
