#ifndef DEGCRAFT_IMAGE_HPP
#define DEGCRAFT_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "degcraft/errors.hpp"
#include "degcraft/rng.hpp"

namespace degcraft {

// Planar raster, real-valued working domain [0, 255]. Quantization to 8 bits
// happens only at JPEG encode and file save.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;                 // 1 or 3
    std::vector<double> data;         // plane-major: [c][y][x]

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    double* plane(int c) {
        return data.data() + static_cast<std::size_t>(c) * height * width;
    }
    const double* plane(int c) const {
        return data.data() + static_cast<std::size_t>(c) * height * width;
    }

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }
};

struct ImageSet {
    std::vector<Image> items;
    std::string label;
    std::vector<std::string> item_labels;   // optional per-item provenance
};

inline void clamp_inplace(Image& img, double lo = 0.0, double hi = 255.0) {
    for (double& v : img.data) v = std::clamp(v, lo, hi);
}

// Grayscale promoted to 3 channels by plane replication.
inline Image to_three_channels(const Image& img) {
    if (img.channels == 3) return img;
    Image out(img.width, img.height, 3);
    for (int c = 0; c < 3; ++c)
        std::copy(img.plane(0), img.plane(0) + img.pixel_count(), out.plane(c));
    return out;
}

inline Image crop(const Image& img, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || x0 + w > img.width || y0 + h > img.height)
        throw validation_error("crop window outside image bounds");
    Image out(w, h, img.channels);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
    return out;
}

// Random square patches, count_per_image per source image. Order is
// deterministic: image order, then draw order. Origins land in item_labels
// as "src=<i> x=<x0> y=<y0>".
inline ImageSet extract_patches(const ImageSet& set, int size,
                                int count_per_image, Rng& rng) {
    if (size < 1 || count_per_image < 1)
        throw validation_error("extract_patches: size and count must be >= 1");
    ImageSet out;
    out.label = set.label + "/patches";
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        const Image& src = set.items[i];
        if (src.width < size || src.height < size)
            throw validation_error("extract_patches: image " + std::to_string(i) +
                                   " is smaller than the patch size");
        for (int k = 0; k < count_per_image; ++k) {
            const int x0 = static_cast<int>(rng.uniform_int(src.width - size + 1));
            const int y0 = static_cast<int>(rng.uniform_int(src.height - size + 1));
            out.items.push_back(crop(src, x0, y0, size, size));
            out.item_labels.push_back("src=" + std::to_string(i) +
                                      " x=" + std::to_string(x0) +
                                      " y=" + std::to_string(y0));
        }
    }
    return out;
}

} // namespace degcraft

#endif
