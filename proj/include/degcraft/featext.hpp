#ifndef DEGCRAFT_FEATEXT_HPP
#define DEGCRAFT_FEATEXT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "degcraft/errors.hpp"
#include "degcraft/image.hpp"
#include "degcraft/rng.hpp"

namespace degcraft {

// n x c row-major feature matrix, one row per patch
struct FeatureMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
    std::string extractor_tag;

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

enum class ExtractorKind { RandConv, Stats, Import };

struct ExtractorSpec {
    ExtractorKind kind = ExtractorKind::Stats;
    std::uint64_t seed = 0;        // randconv only
    std::string import_path;       // import only
};

class Extractor {
public:
    virtual ~Extractor() = default;
    virtual int dim() const = 0;
    virtual std::string tag() const = 0;
    virtual FeatureMatrix extract(const ImageSet& patches) const = 0;

protected:
    static void check_uniform_shape(const ImageSet& patches) {
        if (patches.items.empty())
            throw validation_error("extract: empty patch set");
        const Image& first = patches.items.front();
        for (std::size_t i = 1; i < patches.items.size(); ++i) {
            const Image& im = patches.items[i];
            if (im.width != first.width || im.height != first.height ||
                im.channels != first.channels)
                throw validation_error("extract: patch " + std::to_string(i) +
                                       " has mismatched dimensions");
        }
    }
};

namespace detail {

// ITU-R 601 luma; single-channel input passes through
inline std::vector<double> luminance(const Image& img) {
    std::vector<double> y(img.pixel_count());
    if (img.channels == 1) {
        std::copy(img.plane(0), img.plane(0) + img.pixel_count(), y.begin());
    } else {
        const double* r = img.plane(0);
        const double* g = img.plane(1);
        const double* b = img.plane(2);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    }
    return y;
}

inline double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

inline double variance_of(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return v.empty() ? 0.0 : acc / v.size();
}

struct Dct8 {
    // orthonormal 8x8 DCT-II basis, basis[u][i] = s(u) cos((2i+1)u pi / 16)
    std::array<std::array<double, 8>, 8> basis{};
    Dct8() {
        for (int u = 0; u < 8; ++u) {
            const double s = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int i = 0; i < 8; ++i)
                basis[u][i] = s * std::cos((2 * i + 1) * u * 3.14159265358979323846 / 16.0);
        }
    }
};

inline const Dct8& dct8() {
    static const Dct8 table;
    return table;
}

} // namespace detail

// Handcrafted 15-dimensional descriptor over luminance. Each entry targets
// one degradation axis: gradients for blur, a median-Laplacian estimate for
// noise, 8-grid blockiness and DCT band energies for JPEG.
//
//  0 mean                      8 log mid DCT energy (3 <= u+v <= 7)
//  1 std                       9 log high DCT energy (u+v >= 8)
//  2 Sobel gradient mean      10 var(3x3 box smoothed) / var
//  3 Sobel gradient std       11 autocorr lag 1, horizontal
//  4 noise estimate           12 autocorr lag 1, vertical
//  5 horizontal blockiness    13 autocorr lag 2, horizontal
//  6 vertical blockiness      14 autocorr lag 2, vertical
//  7 log low DCT energy (u+v <= 2, no DC)
class StatsExtractor final : public Extractor {
public:
    static constexpr int kDim = 15;

    int dim() const override { return kDim; }
    std::string tag() const override { return "stats"; }

    FeatureMatrix extract(const ImageSet& patches) const override {
        check_uniform_shape(patches);
        FeatureMatrix fm;
        fm.rows = static_cast<int>(patches.items.size());
        fm.cols = kDim;
        fm.extractor_tag = tag();
        fm.values.resize(static_cast<std::size_t>(fm.rows) * kDim);
        for (int r = 0; r < fm.rows; ++r) {
            const auto f = describe(patches.items[r]);
            std::copy(f.begin(), f.end(), fm.values.begin() + static_cast<std::size_t>(r) * kDim);
        }
        return fm;
    }

    static std::array<double, kDim> describe(const Image& img) {
        const int w = img.width;
        const int h = img.height;
        const std::vector<double> y = detail::luminance(img);
        auto at = [&](int yy, int xx) {
            return y[static_cast<std::size_t>(std::clamp(yy, 0, h - 1)) * w +
                     std::clamp(xx, 0, w - 1)];
        };

        std::array<double, kDim> f{};
        const double mean = detail::mean_of(y);
        const double var = detail::variance_of(y, mean);
        f[0] = mean;
        f[1] = std::sqrt(var);

        // Sobel gradient magnitude (interior pixels)
        std::vector<double> grad;
        grad.reserve(static_cast<std::size_t>(w) * h);
        for (int yy = 1; yy + 1 < h; ++yy)
            for (int xx = 1; xx + 1 < w; ++xx) {
                const double gx = (at(yy - 1, xx + 1) + 2 * at(yy, xx + 1) + at(yy + 1, xx + 1)) -
                                  (at(yy - 1, xx - 1) + 2 * at(yy, xx - 1) + at(yy + 1, xx - 1));
                const double gy = (at(yy + 1, xx - 1) + 2 * at(yy + 1, xx) + at(yy + 1, xx + 1)) -
                                  (at(yy - 1, xx - 1) + 2 * at(yy - 1, xx) + at(yy - 1, xx + 1));
                grad.push_back(std::sqrt(gx * gx + gy * gy));
            }
        const double gmean = detail::mean_of(grad);
        f[2] = gmean;
        f[3] = std::sqrt(detail::variance_of(grad, gmean));

        // Immerkaer-style noise estimate: 1.4826 * median|L| / ||L||_2,
        // L = [1 -2 1; -2 4 -2; 1 -2 1], ||L||_2 = 6
        std::vector<double> lap;
        lap.reserve(grad.size());
        for (int yy = 1; yy + 1 < h; ++yy)
            for (int xx = 1; xx + 1 < w; ++xx) {
                const double v = at(yy - 1, xx - 1) - 2 * at(yy - 1, xx) + at(yy - 1, xx + 1) -
                                 2 * at(yy, xx - 1) + 4 * at(yy, xx) - 2 * at(yy, xx + 1) +
                                 at(yy + 1, xx - 1) - 2 * at(yy + 1, xx) + at(yy + 1, xx + 1);
                lap.push_back(std::abs(v));
            }
        if (!lap.empty()) {
            std::nth_element(lap.begin(), lap.begin() + lap.size() / 2, lap.end());
            f[4] = 1.4826 * lap[lap.size() / 2] / 6.0;
        }

        // blockiness: |difference across 8-grid boundaries| vs elsewhere
        f[5] = blockiness(y, w, h, /*horizontal=*/true);
        f[6] = blockiness(y, w, h, /*horizontal=*/false);

        // 8x8 block DCT band energies
        double e_low = 0.0, e_mid = 0.0, e_high = 0.0;
        int n_low = 0, n_mid = 0, n_high = 0;
        const auto& dct = detail::dct8();
        for (int by = 0; by + 8 <= h; by += 8)
            for (int bx = 0; bx + 8 <= w; bx += 8) {
                double block[8][8];
                double tmp[8][8];
                for (int u = 0; u < 8; ++u)
                    for (int j = 0; j < 8; ++j) {
                        double acc = 0.0;
                        for (int i = 0; i < 8; ++i)
                            acc += dct.basis[u][i] * y[static_cast<std::size_t>(by + i) * w + bx + j];
                        tmp[u][j] = acc;
                    }
                for (int u = 0; u < 8; ++u)
                    for (int v = 0; v < 8; ++v) {
                        double acc = 0.0;
                        for (int j = 0; j < 8; ++j) acc += tmp[u][j] * dct.basis[v][j];
                        block[u][v] = acc;
                    }
                for (int u = 0; u < 8; ++u)
                    for (int v = 0; v < 8; ++v) {
                        if (u == 0 && v == 0) continue;
                        const double e = block[u][v] * block[u][v];
                        if (u + v <= 2) { e_low += e; ++n_low; }
                        else if (u + v <= 7) { e_mid += e; ++n_mid; }
                        else { e_high += e; ++n_high; }
                    }
            }
        f[7] = std::log(1e-12 + (n_low ? e_low / n_low : 0.0));
        f[8] = std::log(1e-12 + (n_mid ? e_mid / n_mid : 0.0));
        f[9] = std::log(1e-12 + (n_high ? e_high / n_high : 0.0));

        // variance ratio after 3x3 box smoothing; flat patch maps to 1
        if (var > 0.0) {
            std::vector<double> smooth(y.size());
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    double acc = 0.0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) acc += at(yy + dy, xx + dx);
                    smooth[static_cast<std::size_t>(yy) * w + xx] = acc / 9.0;
                }
            const double smean = detail::mean_of(smooth);
            f[10] = detail::variance_of(smooth, smean) / var;
        } else {
            f[10] = 1.0;
        }

        f[11] = autocorr(y, w, h, mean, var, 1, true);
        f[12] = autocorr(y, w, h, mean, var, 1, false);
        f[13] = autocorr(y, w, h, mean, var, 2, true);
        f[14] = autocorr(y, w, h, mean, var, 2, false);
        return f;
    }

private:
    static double blockiness(const std::vector<double>& y, int w, int h,
                             bool horizontal) {
        double at_boundary = 0.0, elsewhere = 0.0;
        long n_boundary = 0, n_elsewhere = 0;
        if (horizontal) {
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx + 1 < w; ++xx) {
                    const double d = std::abs(y[static_cast<std::size_t>(yy) * w + xx + 1] -
                                              y[static_cast<std::size_t>(yy) * w + xx]);
                    if (xx % 8 == 7) { at_boundary += d; ++n_boundary; }
                    else { elsewhere += d; ++n_elsewhere; }
                }
        } else {
            for (int yy = 0; yy + 1 < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    const double d = std::abs(y[static_cast<std::size_t>(yy + 1) * w + xx] -
                                              y[static_cast<std::size_t>(yy) * w + xx]);
                    if (yy % 8 == 7) { at_boundary += d; ++n_boundary; }
                    else { elsewhere += d; ++n_elsewhere; }
                }
        }
        if (!n_boundary || !n_elsewhere) return 0.0;
        return at_boundary / n_boundary - elsewhere / n_elsewhere;
    }

    static double autocorr(const std::vector<double>& y, int w, int h, double mean,
                           double var, int lag, bool horizontal) {
        if (var <= 0.0) return 1.0;
        double acc = 0.0;
        long n = 0;
        if (horizontal) {
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx + lag < w; ++xx) {
                    acc += (y[static_cast<std::size_t>(yy) * w + xx] - mean) *
                           (y[static_cast<std::size_t>(yy) * w + xx + lag] - mean);
                    ++n;
                }
        } else {
            for (int yy = 0; yy + lag < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    acc += (y[static_cast<std::size_t>(yy) * w + xx] - mean) *
                           (y[static_cast<std::size_t>(yy + lag) * w + xx] - mean);
                    ++n;
                }
        }
        return n ? acc / (n * var) : 0.0;
    }
};

// Fixed randomly initialized 3-layer convolutional extractor, c = 64:
//   conv 3->32 5x5 /2, ReLU; conv 32->64 5x5 /2, ReLU; conv 64->64 3x3 /2,
//   ReLU; global average pool. He-style weights N(0, 2/fan_in), zero biases,
//   fully determined by the seed. Input is scaled to [0, 1].
class RandConvExtractor final : public Extractor {
public:
    static constexpr int kDim = 64;

    explicit RandConvExtractor(std::uint64_t seed) : seed_(seed) {
        Rng rng(derive_seed(seed, 0x7261636fULL));
        layers_[0] = make_layer(3, 32, 5, 2, rng);
        layers_[1] = make_layer(32, 64, 5, 2, rng);
        layers_[2] = make_layer(64, 64, 3, 2, rng);
    }

    int dim() const override { return kDim; }
    std::string tag() const override { return "randconv:" + std::to_string(seed_); }

    FeatureMatrix extract(const ImageSet& patches) const override {
        check_uniform_shape(patches);
        FeatureMatrix fm;
        fm.rows = static_cast<int>(patches.items.size());
        fm.cols = kDim;
        fm.extractor_tag = tag();
        fm.values.resize(static_cast<std::size_t>(fm.rows) * kDim);
        for (int r = 0; r < fm.rows; ++r) {
            const auto f = forward(patches.items[r]);
            std::copy(f.begin(), f.end(), fm.values.begin() + static_cast<std::size_t>(r) * kDim);
        }
        return fm;
    }

    std::array<double, kDim> forward(const Image& patch) const {
        const Image rgb = to_three_channels(patch);
        int w = rgb.width, h = rgb.height;
        std::vector<double> act(rgb.data.size());
        for (std::size_t i = 0; i < act.size(); ++i) act[i] = rgb.data[i] / 255.0;
        int ch = 3;
        for (const Layer& layer : layers_) {
            act = layer.forward(act, ch, w, h);
            ch = layer.out_ch;
            w = (w - layer.k) / layer.stride + 1;
            h = (h - layer.k) / layer.stride + 1;
            if (w < 1 || h < 1)
                throw validation_error("randconv: patch too small for the network");
        }
        std::array<double, kDim> pooled{};
        const std::size_t plane = static_cast<std::size_t>(w) * h;
        for (int c = 0; c < kDim; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < plane; ++i) acc += act[c * plane + i];
            pooled[c] = acc / static_cast<double>(plane);
        }
        return pooled;
    }

private:
    struct Layer {
        int in_ch, out_ch, k, stride;
        std::vector<double> w;  // [out][in][ky][kx]

        std::vector<double> forward(const std::vector<double>& src, int ch,
                                    int width, int height) const {
            const int ow = (width - k) / stride + 1;
            const int oh = (height - k) / stride + 1;
            std::vector<double> dst(static_cast<std::size_t>(out_ch) * ow * oh, 0.0);
            const std::size_t in_plane = static_cast<std::size_t>(width) * height;
            const std::size_t out_plane = static_cast<std::size_t>(ow) * oh;
            for (int oc = 0; oc < out_ch; ++oc) {
                const double* wbase = w.data() +
                    static_cast<std::size_t>(oc) * ch * k * k;
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox) {
                        double acc = 0.0;
                        for (int ic = 0; ic < ch; ++ic) {
                            const double* in = src.data() + ic * in_plane +
                                static_cast<std::size_t>(oy * stride) * width + ox * stride;
                            const double* wk = wbase + static_cast<std::size_t>(ic) * k * k;
                            for (int ky = 0; ky < k; ++ky)
                                for (int kx = 0; kx < k; ++kx)
                                    acc += wk[ky * k + kx] * in[static_cast<std::size_t>(ky) * width + kx];
                        }
                        dst[oc * out_plane + static_cast<std::size_t>(oy) * ow + ox] =
                            acc > 0.0 ? acc : 0.0;  // ReLU, biases are zero
                    }
            }
            return dst;
        }
    };

    static Layer make_layer(int in_ch, int out_ch, int k, int stride, Rng& rng) {
        Layer layer{in_ch, out_ch, k, stride, {}};
        const double stddev = std::sqrt(2.0 / (in_ch * k * k));
        layer.w.resize(static_cast<std::size_t>(out_ch) * in_ch * k * k);
        for (double& v : layer.w) v = rng.normal(0.0, stddev);
        return layer;
    }

    std::uint64_t seed_;
    std::array<Layer, 3> layers_;
};

// feature CSV: "# extractor=<tag> rows=<n> cols=<c>" then n comma-separated rows
inline void write_features(const std::string& path, const FeatureMatrix& fm) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open file for writing: " + path);
    f << "# extractor=" << fm.extractor_tag << " rows=" << fm.rows
      << " cols=" << fm.cols << "\n";
    char buf[64];
    for (int r = 0; r < fm.rows; ++r) {
        for (int c = 0; c < fm.cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.15g", fm.at(r, c));
            f << (c ? "," : "") << buf;
        }
        f << "\n";
    }
    if (!f) throw io_error("write failed: " + path);
}

inline FeatureMatrix read_features(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open file: " + path);
    std::string header;
    if (!std::getline(f, header))
        throw validation_error("empty feature file: " + path);
    FeatureMatrix fm;
    {
        char tag[256] = {0};
        int rows = -1, cols = -1;
        if (std::sscanf(header.c_str(), "# extractor=%255s rows=%d cols=%d",
                        tag, &rows, &cols) != 3 || rows < 0 || cols < 1)
            throw validation_error("malformed feature header in " + path);
        fm.extractor_tag = tag;
        fm.rows = rows;
        fm.cols = cols;
    }
    fm.values.reserve(static_cast<std::size_t>(fm.rows) * fm.cols);
    std::string line;
    int count = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        int c = 0;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw validation_error("bad value at row " + std::to_string(count) +
                                       " in " + path);
            }
            fm.values.push_back(v);
            ++c;
        }
        if (c != fm.cols)
            throw validation_error("row " + std::to_string(count) + " has " +
                                   std::to_string(c) + " columns, expected " +
                                   std::to_string(fm.cols) + " in " + path);
        ++count;
    }
    if (count != fm.rows)
        throw validation_error("feature file " + path + " declares " +
                               std::to_string(fm.rows) + " rows but has " +
                               std::to_string(count));
    return fm;
}

// Passthrough handle for externally computed features (e.g. pretrained
// network activations). extract() returns the file contents regardless of
// the patch set.
class ImportExtractor final : public Extractor {
public:
    explicit ImportExtractor(const std::string& path)
        : path_(path), matrix_(read_features(path)) {}

    int dim() const override { return matrix_.cols; }
    std::string tag() const override { return "import:" + path_; }
    FeatureMatrix extract(const ImageSet&) const override { return matrix_; }
    const FeatureMatrix& matrix() const { return matrix_; }

private:
    std::string path_;
    FeatureMatrix matrix_;
};

inline std::unique_ptr<Extractor> make_extractor(const ExtractorSpec& spec) {
    switch (spec.kind) {
        case ExtractorKind::RandConv:
            return std::make_unique<RandConvExtractor>(spec.seed);
        case ExtractorKind::Stats:
            return std::make_unique<StatsExtractor>();
        case ExtractorKind::Import:
            return std::make_unique<ImportExtractor>(spec.import_path);
    }
    throw validation_error("unknown extractor kind");
}

// parse "randconv" | "stats" | "import:PATH" (randconv takes the run seed)
inline ExtractorSpec parse_extractor_spec(const std::string& text,
                                          std::uint64_t seed) {
    if (text == "randconv") return ExtractorSpec{ExtractorKind::RandConv, seed, ""};
    if (text == "stats") return ExtractorSpec{ExtractorKind::Stats, 0, ""};
    if (text.rfind("import:", 0) == 0)
        return ExtractorSpec{ExtractorKind::Import, 0, text.substr(7)};
    throw validation_error("unknown extractor: " + text);
}

} // namespace degcraft

#endif
