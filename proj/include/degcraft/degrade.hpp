#ifndef DEGCRAFT_DEGRADE_HPP
#define DEGCRAFT_DEGRADE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "degcraft/errors.hpp"
#include "degcraft/image.hpp"
#include "degcraft/image_io.hpp"
#include "degcraft/rng.hpp"

namespace degcraft {

// One sampled degradation d = (sigma, l, q) plus the downsampling factor.
struct DegradationParams {
    double sigma = 0.0;        // Gaussian blur kernel width
    double noise_level = 0.0;  // AWGN standard deviation, 8-bit units
    int jpeg_quality = 100;    // quality factor 1..100
    int scale = 4;

    void validate() const {
        if (sigma < 0.0) throw validation_error("sigma must be >= 0");
        if (noise_level < 0.0) throw validation_error("noise level must be >= 0");
        if (jpeg_quality < 1 || jpeg_quality > 100)
            throw validation_error("jpeg quality must be in 1..100");
        if (scale < 1) throw validation_error("scale must be >= 1");
    }
};

inline constexpr int kBlurRadius = 10;  // fixed 21x21 support for all sigma

struct BlurKernel {
    int radius = 0;
    std::vector<double> taps;       // (2r+1)^2 row-major, sums to 1
    std::vector<double> separable;  // 1-D factor when the kernel is an outer product

    int size() const { return 2 * radius + 1; }
};

inline BlurKernel gaussian_kernel(double sigma) {
    if (sigma < 0.0) throw validation_error("gaussian_kernel: sigma must be >= 0");
    BlurKernel k;
    k.radius = kBlurRadius;
    const int n = k.size();
    k.taps.assign(static_cast<std::size_t>(n) * n, 0.0);
    if (sigma == 0.0) {
        k.taps[static_cast<std::size_t>(k.radius) * n + k.radius] = 1.0;
        k.separable.assign(n, 0.0);
        k.separable[k.radius] = 1.0;
        return k;
    }
    std::vector<double> g(n);
    double sum = 0.0;
    for (int i = -k.radius; i <= k.radius; ++i) {
        g[i + k.radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += g[i + k.radius];
    }
    for (double& v : g) v /= sum;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            k.taps[static_cast<std::size_t>(i) * n + j] = g[i] * g[j];
    k.separable = std::move(g);
    return k;
}

// reflect-101 index: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

namespace detail {

inline void correlate1d_rows(const double* src, double* dst, int w, int h,
                             const std::vector<double>& taps, int radius) {
    for (int y = 0; y < h; ++y) {
        const double* row = src + static_cast<std::size_t>(y) * w;
        double* out = dst + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            if (x >= radius && x + radius < w) {
                const double* p = row + x - radius;
                for (int t = 0; t < 2 * radius + 1; ++t) acc += taps[t] * p[t];
            } else {
                for (int t = -radius; t <= radius; ++t)
                    acc += taps[t + radius] * row[reflect101(x + t, w)];
            }
            out[x] = acc;
        }
    }
}

inline void correlate1d_cols(const double* src, double* dst, int w, int h,
                             const std::vector<double>& taps, int radius) {
    for (int y = 0; y < h; ++y) {
        double* out = dst + static_cast<std::size_t>(y) * w;
        std::fill(out, out + w, 0.0);
        for (int t = -radius; t <= radius; ++t) {
            const double* row = src + static_cast<std::size_t>(reflect101(y + t, h)) * w;
            const double tap = taps[t + radius];
            for (int x = 0; x < w; ++x) out[x] += tap * row[x];
        }
    }
}

} // namespace detail

// Per-channel 2-D correlation with reflect-101 padding. Output size equals
// input size. Separable kernels take the two-pass path.
inline Image convolve(const Image& img, const BlurKernel& k) {
    Image out(img.width, img.height, img.channels);
    const int n = k.size();
    if (!k.separable.empty()) {
        std::vector<double> tmp(img.pixel_count());
        for (int c = 0; c < img.channels; ++c) {
            detail::correlate1d_rows(img.plane(c), tmp.data(), img.width,
                                     img.height, k.separable, k.radius);
            detail::correlate1d_cols(tmp.data(), out.plane(c), img.width,
                                     img.height, k.separable, k.radius);
        }
        return out;
    }
    for (int c = 0; c < img.channels; ++c) {
        const double* src = img.plane(c);
        double* dst = out.plane(c);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double acc = 0.0;
                for (int dy = -k.radius; dy <= k.radius; ++dy)
                    for (int dx = -k.radius; dx <= k.radius; ++dx)
                        acc += k.taps[static_cast<std::size_t>(dy + k.radius) * n +
                                      (dx + k.radius)] *
                               src[static_cast<std::size_t>(reflect101(y + dy, img.height)) *
                                       img.width +
                                   reflect101(x + dx, img.width)];
                dst[static_cast<std::size_t>(y) * img.width + x] = acc;
            }
    }
    return out;
}

// Catmull-Rom cubic (a = -0.5)
inline double catmull_rom(double x) {
    x = std::abs(x);
    if (x < 1.0) return ((1.5 * x - 2.5) * x) * x + 1.0;
    if (x < 2.0) return (((-0.5 * x) + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

// Bicubic downsampling to (w/scale, h/scale), values clamped to [0, 255].
// Source coordinate of output pixel i is (i + 0.5) * scale - 0.5; borders
// are clamped.
inline Image downsample(const Image& img, int scale) {
    if (scale < 1) throw validation_error("downsample: scale must be >= 1");
    if (img.width < scale || img.height < scale)
        throw validation_error("downsample: image smaller than scale factor");
    if (scale == 1) return img;
    const int ow = img.width / scale;
    const int oh = img.height / scale;
    Image out(ow, oh, img.channels);
    for (int c = 0; c < img.channels; ++c) {
        const double* src = img.plane(c);
        double* dst = out.plane(c);
        for (int oy = 0; oy < oh; ++oy) {
            const double sy = (oy + 0.5) * scale - 0.5;
            const int iy = static_cast<int>(std::floor(sy));
            const double fy = sy - iy;
            double wy[4];
            for (int t = 0; t < 4; ++t) wy[t] = catmull_rom(fy - (t - 1));
            for (int ox = 0; ox < ow; ++ox) {
                const double sx = (ox + 0.5) * scale - 0.5;
                const int ix = static_cast<int>(std::floor(sx));
                const double fx = sx - ix;
                double acc = 0.0;
                for (int ty = 0; ty < 4; ++ty) {
                    const int y = std::clamp(iy + ty - 1, 0, img.height - 1);
                    const double* row = src + static_cast<std::size_t>(y) * img.width;
                    double rowacc = 0.0;
                    for (int tx = 0; tx < 4; ++tx) {
                        const int x = std::clamp(ix + tx - 1, 0, img.width - 1);
                        rowacc += catmull_rom(fx - (tx - 1)) * row[x];
                    }
                    acc += wy[ty] * rowacc;
                }
                dst[static_cast<std::size_t>(oy) * ow + ox] = std::clamp(acc, 0.0, 255.0);
            }
        }
    }
    return out;
}

// i.i.d. zero-mean Gaussian noise per pixel and per channel, then clamp.
// Draw order is the plane-major data order.
inline Image add_noise(const Image& img, double level, Rng& rng) {
    if (level < 0.0) throw validation_error("add_noise: level must be >= 0");
    if (level == 0.0) return img;
    Image out = img;
    for (double& v : out.data) v = std::clamp(v + level * rng.normal(), 0.0, 255.0);
    return out;
}

// One encode/decode round trip through the baseline JFIF codec.
inline Image jpeg_roundtrip(const Image& img, int quality) {
    Image clamped = img;
    clamp_inplace(clamped);
    const std::vector<unsigned char> bytes = detail::encode_jpeg_mem(clamped, quality);
    return detail::decode_jpeg_mem(bytes.data(), bytes.size(), "roundtrip");
}

// x = C_q . E_l . B_sigma(y): blur, downsample, noise, JPEG, in that order.
inline Image apply(const Image& img, const DegradationParams& params, Rng& rng) {
    params.validate();
    Image out = convolve(img, gaussian_kernel(params.sigma));
    out = downsample(out, params.scale);
    out = add_noise(out, params.noise_level, rng);
    return jpeg_roundtrip(out, params.jpeg_quality);
}

} // namespace degcraft

#endif
