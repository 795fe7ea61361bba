#ifndef DEGCRAFT_SYNTHKIT_HPP
#define DEGCRAFT_SYNTHKIT_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "degcraft/binspace.hpp"
#include "degcraft/crafting.hpp"
#include "degcraft/degrade.hpp"
#include "degcraft/errors.hpp"
#include "degcraft/image_io.hpp"

namespace degcraft {

struct ManifestEntry {
    std::string hr_path;
    std::string lr_path;
    int bin_flat = 0;
    double sigma = 0.0;
    double noise_level = 0.0;
    int jpeg_quality = 0;
    int scale = 0;
    std::uint64_t seed = 0;

    bool operator==(const ManifestEntry&) const = default;
};

inline void validate_entry(const ManifestEntry& e, const BinGrid& grid) {
    const auto box = bounds(grid, BinIndex{e.bin_flat});
    auto inside = [](double v, const Interval& iv, bool last) {
        return v >= iv.lo && (last ? v <= iv.hi : v < iv.hi);
    };
    const auto [s_idx, l_idx, q_idx] = grid.decompose(BinIndex{e.bin_flat});
    if (!inside(e.sigma, box[0], s_idx + 1 == grid.sigma.count))
        throw validation_error("manifest entry: sigma outside bin bounds");
    if (!inside(e.noise_level, box[1], l_idx + 1 == grid.noise.count))
        throw validation_error("manifest entry: noise level outside bin bounds");
    if (!inside(e.jpeg_quality, box[2], q_idx + 1 == grid.quality.count))
        throw validation_error("manifest entry: jpeg quality outside bin bounds");
    if (e.scale != grid.scale)
        throw validation_error("manifest entry: scale does not match the grid");
}

// Weighted LR/HR pair synthesis. Per pair i: bin via sample_bin(w), params
// via sample_in_bin, HQ image round-robin, random HR crop, degraded LR.
// Pair i draws from the derived stream (master_seed, i), so the run is
// reproducible and pairs could be produced in any order.
inline std::vector<ManifestEntry> synthesize(const ImageSet& hq, const BinGrid& grid,
                                             const WeightVector& w, int count,
                                             const std::string& out_dir,
                                             std::uint64_t master_seed,
                                             int patch_size = 72) {
    namespace fs = std::filesystem;
    w.validate();
    if (static_cast<int>(w.weights.size()) != grid.n_bins())
        throw validation_error("weight vector length does not match the grid");
    if (hq.items.empty()) throw validation_error("empty HQ image set");
    if (count < 1) throw validation_error("pair count must be >= 1");
    const int hr_size = patch_size * grid.scale;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "hr", ec);
    fs::create_directories(fs::path(out_dir) / "lr", ec);
    if (!fs::is_directory(fs::path(out_dir) / "hr") ||
        !fs::is_directory(fs::path(out_dir) / "lr"))
        throw io_error("cannot create output directories under " + out_dir);

    std::vector<ManifestEntry> manifest;
    manifest.reserve(count);
    char name[32];
    for (int i = 0; i < count; ++i) {
        const std::uint64_t pair_seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
        Rng rng(pair_seed);
        const BinIndex b = sample_bin(w, rng);
        const DegradationParams params = sample_in_bin(grid, b, rng);
        const Image& src = hq.items[i % hq.items.size()];
        if (src.width < hr_size || src.height < hr_size)
            throw validation_error("HQ image " + std::to_string(i % hq.items.size()) +
                                   " is smaller than the HR crop size " +
                                   std::to_string(hr_size));
        const int x0 = static_cast<int>(rng.uniform_int(src.width - hr_size + 1));
        const int y0 = static_cast<int>(rng.uniform_int(src.height - hr_size + 1));
        const Image hr = crop(to_three_channels(src), x0, y0, hr_size, hr_size);
        const Image lr = apply(hr, params, rng);
        std::snprintf(name, sizeof(name), "%06d.png", i);
        const std::string hr_rel = std::string("hr/") + name;
        const std::string lr_rel = std::string("lr/") + name;
        save_image(hr, (fs::path(out_dir) / hr_rel).string(), ImageFormat::PNG);
        save_image(lr, (fs::path(out_dir) / lr_rel).string(), ImageFormat::PNG);
        ManifestEntry entry{hr_rel, lr_rel, b.flat, params.sigma, params.noise_level,
                            params.jpeg_quality, params.scale, pair_seed};
        validate_entry(entry, grid);
        manifest.push_back(entry);
    }
    return manifest;
}

// JSON Lines, one entry per line, fields in declaration order
inline void write_manifest(const std::string& path,
                           const std::vector<ManifestEntry>& entries) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open file for writing: " + path);
    char buf[128];
    for (const ManifestEntry& e : entries) {
        f << "{\"hr_path\":\"" << e.hr_path << "\",\"lr_path\":\"" << e.lr_path
          << "\",\"bin_flat\":" << e.bin_flat;
        std::snprintf(buf, sizeof(buf), ",\"sigma\":%.17g,\"noise_level\":%.17g",
                      e.sigma, e.noise_level);
        f << buf << ",\"jpeg_quality\":" << e.jpeg_quality
          << ",\"scale\":" << e.scale << ",\"seed\":" << e.seed << "}\n";
    }
    if (!f) throw io_error("write failed: " + path);
}

inline std::vector<ManifestEntry> read_manifest(const std::string& path,
                                                const BinGrid& grid) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open file: " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            ManifestEntry e;
            e.hr_path = j.at("hr_path").get<std::string>();
            e.lr_path = j.at("lr_path").get<std::string>();
            e.bin_flat = j.at("bin_flat").get<int>();
            e.sigma = j.at("sigma").get<double>();
            e.noise_level = j.at("noise_level").get<double>();
            e.jpeg_quality = j.at("jpeg_quality").get<int>();
            e.scale = j.at("scale").get<int>();
            e.seed = j.at("seed").get<std::uint64_t>();
            validate_entry(e, grid);
            entries.push_back(e);
        } catch (const nlohmann::json::exception& ex) {
            throw validation_error("malformed manifest line " +
                                   std::to_string(line_no) + " in " + path + ": " +
                                   ex.what());
        }
    }
    return entries;
}

} // namespace degcraft

#endif
