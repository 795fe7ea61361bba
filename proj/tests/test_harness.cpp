#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>

#include "degcraft/harness.hpp"
#include "testutil.hpp"

using namespace degcraft;

TEST_CASE("setting presets match the published boxes") {
    const SettingPreset s1 = setting_preset(1);
    REQUIRE(s1.sigma_range.lo == 0.0);
    REQUIRE(s1.sigma_range.hi == 1.0);
    REQUIRE(s1.noise_range.lo == 0.0);
    REQUIRE(s1.noise_range.hi == 10.0);
    REQUIRE(s1.quality_range.lo == 80.0);
    REQUIRE(s1.quality_range.hi == 90.0);

    const SettingPreset s4 = setting_preset(4);
    REQUIRE(s4.sigma_range.lo == 2.5);
    REQUIRE(s4.sigma_range.hi == 3.5);
    REQUIRE(s4.noise_range.lo == 25.0);
    REQUIRE(s4.noise_range.hi == 35.0);
    REQUIRE(s4.quality_range.lo == 65.0);
    REQUIRE(s4.quality_range.hi == 75.0);

    REQUIRE_THROWS_AS(setting_preset(0), validation_error);
    REQUIRE_THROWS_AS(setting_preset(5), validation_error);
}

TEST_CASE("truth bins: setting 1 is exactly one bin, setting 3 is four") {
    const BinGrid grid = default_grid(4);
    const auto t1 = truth_bins(setting_preset(1), grid);
    REQUIRE(t1.size() == 1);
    REQUIRE(t1[0].flat == 50);  // sigma bin 0, noise bin 0, quality bin 2

    const auto t3 = truth_bins(setting_preset(3), grid);
    REQUIRE(t3.size() == 4);
    std::set<int> got;
    for (BinIndex b : t3) got.insert(b.flat);
    // sigma [1.5,2.5] straddles bins 1,2; noise [5,15] straddles 0,1; q bin 2
    const std::set<int> expect = {grid.compose(1, 0, 2).flat, grid.compose(2, 0, 2).flat,
                                  grid.compose(1, 1, 2).flat, grid.compose(2, 1, 2).flat};
    REQUIRE(got == expect);
}

TEST_CASE("truth bins exclude boundary contact without overlap") {
    const BinGrid grid = default_grid(4);
    // a box covering exactly one bin: sigma [1,2), touches bins 0 and 2 only
    // at the boundary, which has zero measure
    const SettingPreset tight{0, {1.0, 2.0}, {10.0, 20.0}, {50.0, 70.0}};
    const auto t = truth_bins(tight, grid);
    REQUIRE(t.size() == 1);
    REQUIRE(t[0].flat == grid.compose(1, 1, 1).flat);
}

TEST_CASE("truth bins agree with brute-force membership of sampled points") {
    const BinGrid grid = default_grid(4);
    for (int id = 1; id <= 4; ++id) {
        const SettingPreset s = setting_preset(id);
        const auto truth = truth_bins(s, grid);
        std::set<int> truth_set;
        for (BinIndex b : truth) truth_set.insert(b.flat);

        Rng rng(1000 + id);
        std::set<int> seen;
        for (int i = 0; i < 20000; ++i) {
            DegradationParams p;
            p.sigma = rng.uniform(s.sigma_range.lo, s.sigma_range.hi);
            p.noise_level = rng.uniform(s.noise_range.lo, s.noise_range.hi);
            p.jpeg_quality = static_cast<int>(std::lround(
                rng.uniform(s.quality_range.lo, s.quality_range.hi)));
            p.scale = 4;
            seen.insert(bin_of(grid, p).flat);
        }
        // every sampled point lands in a truth bin; with 20k draws every
        // truth bin should also be hit
        for (int b : seen) REQUIRE(truth_set.count(b) == 1);
        REQUIRE(seen == truth_set);
    }
}

TEST_CASE("reference synthesis is deterministic and respects the box") {
    const ImageSet hq = make_synthetic_corpus(3, 160, 160, 71);
    const BinGrid grid = default_grid(4);
    const SettingPreset s = setting_preset(2);
    const ImageSet a = synthesize_reference_set(s, hq, grid, 5, 24, 909);
    const ImageSet b = synthesize_reference_set(s, hq, grid, 5, 24, 909);
    REQUIRE(a.items.size() == 5);
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        REQUIRE(a.items[i].width == 24);
        REQUIRE(a.items[i].height == 24);
        REQUIRE(a.items[i].data == b.items[i].data);
    }
    const ImageSet c = synthesize_reference_set(s, hq, grid, 5, 24, 910);
    REQUIRE(a.items[0].data != c.items[0].data);
}

TEST_CASE("heatmap pgm layout") {
    testutil::TempDir tmp("harness");
    const BinGrid grid = default_grid(4);

    SECTION("one-hot weight lights exactly one 20x20 cell at white") {
        WeightVector w;
        w.weights.assign(75, 0.0);
        const BinIndex b = grid.compose(3, 2, 1);  // col 1*5+3=8, row 2
        w.weights[b.flat] = 1.0;
        const std::string path = tmp.path("hot.pgm");
        heatmap(w, grid, path);

        std::ifstream f(path, std::ios::binary);
        std::string magic;
        int width = 0, height = 0, maxval = 0;
        f >> magic >> width >> height >> maxval;
        f.get();  // single whitespace after the header
        REQUIRE(magic == "P5");
        REQUIRE(width == 300);
        REQUIRE(height == 100);
        REQUIRE(maxval == 255);
        std::vector<unsigned char> px(300 * 100);
        f.read(reinterpret_cast<char*>(px.data()), px.size());
        REQUIRE(f.gcount() == 300 * 100);

        int white = 0;
        for (int y = 0; y < 100; ++y)
            for (int x = 0; x < 300; ++x) {
                const unsigned char v = px[y * 300 + x];
                const bool in_cell =
                    y >= 2 * 20 && y < 3 * 20 && x >= 8 * 20 && x < 9 * 20;
                REQUIRE(v == (in_cell ? 255 : 0));
                white += v == 255;
            }
        REQUIRE(white == 400);
    }

    SECTION("uniform weights render a flat white image") {
        const std::string path = tmp.path("uniform.pgm");
        heatmap(uniform_weights(75), grid, path);
        std::ifstream f(path, std::ios::binary);
        std::string header;
        for (int i = 0; i < 3; ++i) std::getline(f, header);
        std::vector<unsigned char> px(300 * 100);
        f.read(reinterpret_cast<char*>(px.data()), px.size());
        for (unsigned char v : px) REQUIRE(v == 255);
    }

    SECTION("non-default layouts are rejected") {
        const BinGrid odd = make_grid({"sigma", 0.0, 5.0, 2}, {"noise", 0.0, 50.0, 2},
                                      {"quality", 30.0, 90.0, 2}, 4);
        REQUIRE_THROWS_AS(heatmap(uniform_weights(8), odd, tmp.path("x.pgm")),
                          validation_error);
        REQUIRE_THROWS_AS(heatmap(uniform_weights(10), grid, tmp.path("x.pgm")),
                          validation_error);
    }
}

TEST_CASE("synthetic corpus is deterministic, in range, and textured") {
    const Image a = make_synthetic_image(96, 80, 17);
    const Image b = make_synthetic_image(96, 80, 17);
    REQUIRE(a.data == b.data);
    REQUIRE(a.width == 96);
    REQUIRE(a.height == 80);
    REQUIRE(a.channels == 3);
    for (double v : a.data) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 255.0);
    }
    const Image c = make_synthetic_image(96, 80, 18);
    REQUIRE(a.data != c.data);

    // non-trivial variance so degradation leaves a measurable footprint
    double mean = 0.0;
    for (double v : a.data) mean += v;
    mean /= a.data.size();
    double var = 0.0;
    for (double v : a.data) var += (v - mean) * (v - mean);
    var /= a.data.size();
    REQUIRE(var > 100.0);

    const ImageSet set = make_synthetic_corpus(4, 64, 64, 9);
    REQUIRE(set.items.size() == 4);
    REQUIRE(set.items[0].data != set.items[1].data);
}

TEST_CASE("stability study shrinks the spread as n grows") {
    const ImageSet hq = make_synthetic_corpus(4, 160, 160, 404);
    const BinGrid grid = make_grid({"sigma", 0.0, 5.0, 2}, {"noise", 0.0, 50.0, 2},
                                   {"quality", 30.0, 90.0, 2}, 4);
    const StatsExtractor stats;
    CraftConfig cfg;
    cfg.n_per_bin = 40;
    cfg.patch_size = 24;
    cfg.master_seed = 5;

    const auto table =
        stability_study(BinIndex{0}, {5, 40}, 8, hq, grid, stats, cfg);
    REQUIRE(table.size() == 2);
    REQUIRE(table[0].n == 5);
    REQUIRE(table[1].n == 40);
    for (const StabilityRow& row : table) {
        REQUIRE(std::isfinite(row.mean_distance));
        REQUIRE(row.std_distance >= 0.0);
    }
    REQUIRE(table[1].std_distance < table[0].std_distance);

    REQUIRE_THROWS_AS(
        stability_study(BinIndex{0}, {40, 5}, 8, hq, grid, stats, cfg),
        validation_error);
    REQUIRE_THROWS_AS(
        stability_study(BinIndex{0}, {1, 5}, 8, hq, grid, stats, cfg),
        validation_error);
}

TEST_CASE("report writers emit the advertised columns") {
    testutil::TempDir tmp("harness");
    RecoveryReport r;
    r.setting_id = 1;
    r.trials = 2;
    r.truth = {BinIndex{50}};
    r.mass_on_truth = {0.75, 0.5};
    r.argmin_hit = {true, false};
    r.trial_weights.resize(2);
    r.trial_raw_distances.resize(2);

    write_recovery_report_csv(tmp.path("r.csv"), r);
    std::ifstream f(tmp.path("r.csv"));
    std::string line;
    std::getline(f, line);
    REQUIRE(line == "trial,mass_on_truth,argmin_hit");
    std::getline(f, line);
    REQUIRE(line == "0,0.75,1");
    std::getline(f, line);
    REQUIRE(line == "1,0.5,0");

    write_recovery_report_text(tmp.path("r.txt"), r);
    std::ifstream t(tmp.path("r.txt"));
    std::string all((std::istreambuf_iterator<char>(t)), {});
    REQUIRE(all.find("argmin hits: 1/2") != std::string::npos);
    REQUIRE(all.find("truth bins: 50") != std::string::npos);

    write_stability_csv(tmp.path("s.csv"), {{10, 2.5, 0.5}, {100, 2.25, 0.125}});
    std::ifstream s(tmp.path("s.csv"));
    std::getline(s, line);
    REQUIRE(line == "n,mean_distance,std_distance");
    std::getline(s, line);
    REQUIRE(line == "10,2.5,0.5");
}
