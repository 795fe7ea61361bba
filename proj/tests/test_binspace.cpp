#include <catch2/catch_amalgamated.hpp>

#include "degcraft/binspace.hpp"
#include "testutil.hpp"

using namespace degcraft;

TEST_CASE("default grid has 75 bins with the stated quality bins") {
    const BinGrid grid = default_grid();
    REQUIRE(grid.n_bins() == 75);
    REQUIRE(grid.scale == 4);

    const auto q0 = detail::axis_interval(grid.quality, 0);
    const auto q1 = detail::axis_interval(grid.quality, 1);
    const auto q2 = detail::axis_interval(grid.quality, 2);
    REQUIRE(q0.lo == 30.0);
    REQUIRE(q0.hi == 50.0);
    REQUIRE(q1.lo == 50.0);
    REQUIRE(q1.hi == 70.0);
    REQUIRE(q2.lo == 70.0);
    REQUIRE(q2.hi == 90.0);
}

TEST_CASE("single-bin axes give one bin") {
    const BinGrid g = make_grid({"sigma", 0, 5, 1}, {"noise", 0, 50, 1},
                                {"quality", 30, 90, 1}, 4);
    REQUIRE(g.n_bins() == 1);
}

TEST_CASE("make_grid rejects inverted ranges and zero counts") {
    REQUIRE_THROWS_AS(make_grid({"sigma", 5, 0, 5}, {"noise", 0, 50, 5},
                                {"quality", 30, 90, 3}, 4),
                      validation_error);
    REQUIRE_THROWS_AS(make_grid({"sigma", 0, 5, 0}, {"noise", 0, 50, 5},
                                {"quality", 30, 90, 3}, 4),
                      validation_error);
}

TEST_CASE("bounds of first and last bin") {
    const BinGrid grid = default_grid();
    const auto b0 = bounds(grid, BinIndex{0});
    REQUIRE(b0[0].lo == 0.0);
    REQUIRE(b0[0].hi == 1.0);
    REQUIRE(b0[1].lo == 0.0);
    REQUIRE(b0[1].hi == 10.0);
    REQUIRE(b0[2].lo == 30.0);
    REQUIRE(b0[2].hi == 50.0);

    const auto b74 = bounds(grid, BinIndex{74});
    REQUIRE(b74[0].lo == 4.0);
    REQUIRE(b74[0].hi == 5.0);
    REQUIRE(b74[1].lo == 40.0);
    REQUIRE(b74[1].hi == 50.0);
    REQUIRE(b74[2].lo == 70.0);
    REQUIRE(b74[2].hi == 90.0);

    REQUIRE_THROWS_AS(bounds(grid, BinIndex{75}), validation_error);
}

TEST_CASE("bin_of index arithmetic and boundary convention") {
    const BinGrid grid = default_grid();
    REQUIRE(bin_of(grid, {2.2, 7.0, 82, 4}).flat == 52);
    REQUIRE(bin_of(grid, {5.0, 50.0, 90, 4}).flat == 74);
    REQUIRE(bin_of(grid, {0.0, 0.0, 30, 4}).flat == 0);
    REQUIRE_THROWS_AS(bin_of(grid, {5.1, 0.0, 30, 4}), validation_error);
    REQUIRE_THROWS_AS(bin_of(grid, {0.0, 0.0, 95, 4}), validation_error);
}

TEST_CASE("bin_of of bounds midpoint round-trips for all bins") {
    const BinGrid grid = default_grid();
    for (int b = 0; b < grid.n_bins(); ++b) {
        const auto box = bounds(grid, BinIndex{b});
        DegradationParams mid;
        mid.sigma = 0.5 * (box[0].lo + box[0].hi);
        mid.noise_level = 0.5 * (box[1].lo + box[1].hi);
        mid.jpeg_quality = static_cast<int>(0.5 * (box[2].lo + box[2].hi));
        REQUIRE(bin_of(grid, mid).flat == b);
    }
}

TEST_CASE("the 75 bins tile the parameter box without gap or overlap") {
    const BinGrid grid = default_grid();
    Rng rng(2024);
    for (int i = 0; i < 20000; ++i) {
        DegradationParams p;
        p.sigma = rng.uniform(0.0, 5.0);
        p.noise_level = rng.uniform(0.0, 50.0);
        p.jpeg_quality = 30 + static_cast<int>(rng.uniform_int(61));
        const int flat = bin_of(grid, p).flat;
        // exactly one bin's bounds box contains the point
        int containing = 0;
        for (int b = 0; b < grid.n_bins(); ++b) {
            const auto box = bounds(grid, BinIndex{b});
            const auto [s_idx, l_idx, q_idx] = grid.decompose(BinIndex{b});
            auto in = [&](double v, const Interval& iv, bool last) {
                return v >= iv.lo && (last ? v <= iv.hi : v < iv.hi);
            };
            if (in(p.sigma, box[0], s_idx == 4) &&
                in(p.noise_level, box[1], l_idx == 4) &&
                in(p.jpeg_quality, box[2], q_idx == 2)) {
                ++containing;
                REQUIRE(b == flat);
            }
        }
        REQUIRE(containing == 1);
    }
}

TEST_CASE("sample_in_bin stays in its bin and matches the uniform mean") {
    const BinGrid grid = default_grid();
    Rng rng(7);
    double sigma_sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const DegradationParams p = sample_in_bin(grid, BinIndex{0}, rng);
        REQUIRE(bin_of(grid, p).flat == 0);
        sigma_sum += p.sigma;
    }
    REQUIRE(sigma_sum / n > 0.47);
    REQUIRE(sigma_sum / n < 0.53);
}

TEST_CASE("sample_in_bin containment holds for every bin") {
    const BinGrid grid = default_grid();
    Rng rng(11);
    for (int b = 0; b < grid.n_bins(); ++b)
        for (int i = 0; i < 50; ++i)
            REQUIRE(bin_of(grid, sample_in_bin(grid, BinIndex{b}, rng)).flat == b);
}

TEST_CASE("sample_in_bin is deterministic in the seed") {
    const BinGrid grid = default_grid();
    Rng a(55), b(55);
    for (int i = 0; i < 100; ++i) {
        const auto pa = sample_in_bin(grid, BinIndex{i % 75}, a);
        const auto pb = sample_in_bin(grid, BinIndex{i % 75}, b);
        REQUIRE(pa.sigma == pb.sigma);
        REQUIRE(pa.noise_level == pb.noise_level);
        REQUIRE(pa.jpeg_quality == pb.jpeg_quality);
    }
}

TEST_CASE("sample_bin: one-hot always returns its index") {
    WeightVector w{std::vector<double>(75, 0.0)};
    w.weights[7] = 1.0;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) REQUIRE(sample_bin(w, rng).flat == 7);
}

TEST_CASE("sample_bin rejects all-zero weights") {
    WeightVector w{std::vector<double>(75, 0.0)};
    Rng rng(3);
    REQUIRE_THROWS_AS(sample_bin(w, rng), validation_error);
}

TEST_CASE("sample_bin frequencies follow the weights") {
    WeightVector w{{0.9, 0.1, 0.0}};
    Rng rng(17);
    int zero = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const int b = sample_bin(w, rng).flat;
        REQUIRE(b != 2);
        zero += b == 0 ? 1 : 0;
    }
    const double freq = static_cast<double>(zero) / n;
    REQUIRE(freq > 0.89);
    REQUIRE(freq < 0.91);
}

TEST_CASE("uniform weights pass chi-square over 75 bins") {
    const WeightVector w = uniform_weights(75);
    Rng rng(2023);
    std::vector<double> counts(75, 0.0);
    const int n = 75000;
    for (int i = 0; i < n; ++i) counts[sample_bin(w, rng).flat] += 1.0;
    const std::vector<double> expected(75, n / 75.0);
    REQUIRE(testutil::chi_square_pvalue(counts, expected) > 0.01);
}

TEST_CASE("uniform weights reproduce uniform marginals over full ranges") {
    const BinGrid grid = default_grid();
    const WeightVector w = uniform_weights(grid.n_bins());
    Rng rng(31415);
    const int n = 100000;
    const int hist_bins = 20;
    std::vector<double> sig_hist(hist_bins, 0.0), noise_hist(hist_bins, 0.0);
    for (int i = 0; i < n; ++i) {
        const BinIndex b = sample_bin(w, rng);
        const DegradationParams p = sample_in_bin(grid, b, rng);
        sig_hist[std::min(hist_bins - 1, static_cast<int>(p.sigma / 5.0 * hist_bins))] += 1.0;
        noise_hist[std::min(hist_bins - 1,
                            static_cast<int>(p.noise_level / 50.0 * hist_bins))] += 1.0;
    }
    const std::vector<double> expected(hist_bins, static_cast<double>(n) / hist_bins);
    REQUIRE(testutil::chi_square_pvalue(sig_hist, expected) > 0.01);
    REQUIRE(testutil::chi_square_pvalue(noise_hist, expected) > 0.01);
}
