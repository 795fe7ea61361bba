#ifndef DEGCRAFT_WEIGHTS_FILE_HPP
#define DEGCRAFT_WEIGHTS_FILE_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "degcraft/binspace.hpp"
#include "degcraft/errors.hpp"

namespace degcraft {

// On-disk weights file:
//   { axes: [{name, lo, hi, count} x3], scale, alpha, extractor, seed,
//     weights: [N_bin reals] }
// Field order is canonical and weights carry 17 significant digits, so the
// file round-trips exactly and reruns can be compared byte for byte.
struct WeightsFile {
    BinGrid grid;
    double alpha = 0.0;
    std::string extractor;
    std::uint64_t seed = 0;
    WeightVector weights;
};

namespace detail {

inline std::string json_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s(buf);
    // bare integers are still valid JSON numbers, keep them as-is
    return s;
}

inline std::string axis_json(const BinAxis& a) {
    return "{\"name\":\"" + a.name + "\",\"lo\":" + json_double(a.lo) +
           ",\"hi\":" + json_double(a.hi) +
           ",\"count\":" + std::to_string(a.count) + "}";
}

} // namespace detail

inline void write_weights(const std::string& path, const WeightsFile& wf) {
    wf.weights.validate();
    if (static_cast<int>(wf.weights.weights.size()) != wf.grid.n_bins())
        throw validation_error("weight vector length does not match the grid");
    std::ostringstream out;
    out << "{\n  \"axes\": [\n    " << detail::axis_json(wf.grid.sigma)
        << ",\n    " << detail::axis_json(wf.grid.noise) << ",\n    "
        << detail::axis_json(wf.grid.quality) << "\n  ],\n";
    out << "  \"scale\": " << wf.grid.scale << ",\n";
    out << "  \"alpha\": " << detail::json_double(wf.alpha) << ",\n";
    out << "  \"extractor\": \"" << wf.extractor << "\",\n";
    out << "  \"seed\": " << wf.seed << ",\n";
    out << "  \"weights\": [";
    for (std::size_t i = 0; i < wf.weights.weights.size(); ++i) {
        if (i) out << ", ";
        out << detail::json_double(wf.weights.weights[i]);
    }
    out << "]\n}\n";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open file for writing: " + path);
    f << out.str();
    if (!f) throw io_error("write failed: " + path);
}

inline WeightsFile read_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("malformed weights file " + path + ": " + e.what());
    }
    try {
        WeightsFile wf;
        const auto& axes = j.at("axes");
        if (!axes.is_array() || axes.size() != 3)
            throw validation_error("weights file must carry exactly 3 axes");
        BinAxis parsed[3];
        for (int i = 0; i < 3; ++i) {
            parsed[i].name = axes[i].at("name").get<std::string>();
            parsed[i].lo = axes[i].at("lo").get<double>();
            parsed[i].hi = axes[i].at("hi").get<double>();
            parsed[i].count = axes[i].at("count").get<int>();
        }
        wf.grid = make_grid(parsed[0], parsed[1], parsed[2], j.at("scale").get<int>());
        wf.alpha = j.at("alpha").get<double>();
        wf.extractor = j.at("extractor").get<std::string>();
        wf.seed = j.at("seed").get<std::uint64_t>();
        wf.weights.weights = j.at("weights").get<std::vector<double>>();
        if (static_cast<int>(wf.weights.weights.size()) != wf.grid.n_bins())
            throw validation_error("weight vector length does not match the grid");
        wf.weights.validate();
        return wf;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("invalid weights file " + path + ": " + e.what());
    }
}

} // namespace degcraft

#endif
