#include <catch2/catch_amalgamated.hpp>

#include "degcraft/degrade.hpp"
#include "degcraft/featext.hpp"
#include "degcraft/harness.hpp"
#include "testutil.hpp"

using namespace degcraft;

namespace {

ImageSet probe_patches(int count, double sigma, double noise, int quality,
                       std::uint64_t seed) {
    const ImageSet hq = make_synthetic_corpus(count, 320, 320, seed);
    Rng rng(derive_seed(seed, 999));
    ImageSet out;
    for (const Image& src : hq.items) {
        const int x0 = static_cast<int>(rng.uniform_int(src.width - 288 + 1));
        const int y0 = static_cast<int>(rng.uniform_int(src.height - 288 + 1));
        out.items.push_back(
            apply(crop(src, x0, y0, 288, 288), {sigma, noise, quality, 4}, rng));
    }
    return out;
}

double feature_set_mean(const FeatureMatrix& fm, int col) {
    double acc = 0.0;
    for (int r = 0; r < fm.rows; ++r) acc += fm.at(r, col);
    return acc / fm.rows;
}

} // namespace

TEST_CASE("declared dimensions: randconv 64, stats 15") {
    REQUIRE(make_extractor({ExtractorKind::RandConv, 1, ""})->dim() == 64);
    REQUIRE(make_extractor({ExtractorKind::Stats, 0, ""})->dim() == 15);
}

TEST_CASE("randconv: same seed and patch give the identical vector") {
    const Image patch = make_synthetic_image(72, 72, 12);
    ImageSet set;
    set.items.push_back(patch);
    const RandConvExtractor a(42), b(42);
    const FeatureMatrix fa = a.extract(set);
    const FeatureMatrix fb = b.extract(set);
    REQUIRE(fa.rows == 1);
    REQUIRE(fa.cols == 64);
    REQUIRE(fa.values == fb.values);

    const RandConvExtractor c(43);
    REQUIRE(c.extract(set).values != fa.values);
}

TEST_CASE("stats on a constant patch zeroes the degradation features") {
    ImageSet set;
    set.items.push_back(Image(72, 72, 3, 84.0));
    const StatsExtractor stats;
    const FeatureMatrix fm = stats.extract(set);
    REQUIRE_THAT(fm.at(0, 0), Catch::Matchers::WithinAbs(84.0, 1e-9));
    REQUIRE(fm.at(0, 1) == 0.0);  // std
    REQUIRE(fm.at(0, 2) == 0.0);  // gradient mean
    REQUIRE(fm.at(0, 3) == 0.0);  // gradient std
    REQUIRE(fm.at(0, 4) == 0.0);  // noise estimate
    REQUIRE(fm.at(0, 5) == 0.0);  // horizontal blockiness
    REQUIRE(fm.at(0, 6) == 0.0);  // vertical blockiness
}

TEST_CASE("extract: row order matches set order, duplicates duplicate") {
    ImageSet set;
    set.items.push_back(make_synthetic_image(72, 72, 5));
    set.items.push_back(make_synthetic_image(72, 72, 6));
    set.items.push_back(set.items[0]);
    const StatsExtractor stats;
    const FeatureMatrix fm = stats.extract(set);
    REQUIRE(fm.rows == 3);
    for (int c = 0; c < fm.cols; ++c) {
        REQUIRE(fm.at(0, c) == fm.at(2, c));
    }
}

TEST_CASE("extract rejects mixed patch sizes") {
    ImageSet set;
    set.items.push_back(Image(72, 72, 3, 1.0));
    set.items.push_back(Image(64, 64, 3, 1.0));
    const StatsExtractor stats;
    REQUIRE_THROWS_AS(stats.extract(set), validation_error);
}

TEST_CASE("100 patches with randconv give a 100x64 matrix") {
    ImageSet set;
    for (int i = 0; i < 100; ++i)
        set.items.push_back(make_synthetic_image(72, 72, 100 + i));
    const RandConvExtractor rc(7);
    const FeatureMatrix fm = rc.extract(set);
    REQUIRE(fm.rows == 100);
    REQUIRE(fm.cols == 64);
}

TEST_CASE("stats separates the degradation axes monotonically") {
    const StatsExtractor stats;
    // noise axis: increasing l raises the noise-estimate feature (col 4)
    const double n_low = feature_set_mean(
        stats.extract(probe_patches(40, 1.0, 5.0, 80, 1)), 4);
    const double n_mid = feature_set_mean(
        stats.extract(probe_patches(40, 1.0, 20.0, 80, 1)), 4);
    const double n_high = feature_set_mean(
        stats.extract(probe_patches(40, 1.0, 40.0, 80, 1)), 4);
    REQUIRE(n_low < n_mid);
    REQUIRE(n_mid < n_high);

    // blur axis: increasing sigma lowers the gradient-energy feature (col 2)
    const double g_sharp = feature_set_mean(
        stats.extract(probe_patches(40, 0.3, 5.0, 80, 2)), 2);
    const double g_mid = feature_set_mean(
        stats.extract(probe_patches(40, 2.0, 5.0, 80, 2)), 2);
    const double g_blur = feature_set_mean(
        stats.extract(probe_patches(40, 4.5, 5.0, 80, 2)), 2);
    REQUIRE(g_sharp > g_mid);
    REQUIRE(g_mid > g_blur);

    // compression axis: decreasing q raises the blockiness feature (col 5)
    const double b_high_q = feature_set_mean(
        stats.extract(probe_patches(40, 1.0, 2.0, 88, 3)), 5);
    const double b_low_q = feature_set_mean(
        stats.extract(probe_patches(40, 1.0, 2.0, 32, 3)), 5);
    REQUIRE(b_low_q > b_high_q);

    // constructed contrast: pure noise vs blur on the noise estimate
    const double noisy = feature_set_mean(
        stats.extract(probe_patches(30, 0.0, 30.0, 90, 4)), 4);
    const double blurred = feature_set_mean(
        stats.extract(probe_patches(30, 3.0, 0.0, 90, 4)), 4);
    REQUIRE(noisy > blurred);
}

TEST_CASE("randconv pooled features are insensitive to a 1-pixel shift") {
    const RandConvExtractor rc(11);
    double rel_sum = 0.0;
    int count = 0;
    for (int i = 0; i < 10; ++i) {
        const Image img = make_synthetic_image(73, 73, 400 + i);
        ImageSet pair;
        pair.items.push_back(crop(img, 0, 0, 72, 72));
        pair.items.push_back(crop(img, 1, 0, 72, 72));
        const FeatureMatrix fm = rc.extract(pair);
        double diff = 0.0, norm = 0.0;
        for (int c = 0; c < fm.cols; ++c) {
            diff += (fm.at(0, c) - fm.at(1, c)) * (fm.at(0, c) - fm.at(1, c));
            norm += fm.at(0, c) * fm.at(0, c);
        }
        rel_sum += std::sqrt(diff / norm);
        ++count;
    }
    REQUIRE(rel_sum / count < 0.05);
}

TEST_CASE("feature csv round trip within 1e-9") {
    testutil::TempDir tmp("featext");
    FeatureMatrix fm;
    fm.rows = 3;
    fm.cols = 2;
    fm.extractor_tag = "stats";
    fm.values = {1.25, -3.5e-4, 2.0 / 3.0, 1e9, 0.0, -7.125};
    const std::string path = tmp.path("feats.csv");
    write_features(path, fm);
    const FeatureMatrix back = read_features(path);
    REQUIRE(back.rows == 3);
    REQUIRE(back.cols == 2);
    REQUIRE(back.extractor_tag == "stats");
    for (std::size_t i = 0; i < fm.values.size(); ++i)
        REQUIRE_THAT(back.values[i], Catch::Matchers::WithinAbs(fm.values[i], 1e-9));
}

TEST_CASE("feature csv rejects header/row mismatches") {
    testutil::TempDir tmp("featext");
    const std::string path = tmp.path("bad.csv");
    {
        std::ofstream f(path);
        f << "# extractor=x rows=100 cols=2\n";
        for (int i = 0; i < 99; ++i) f << "1,2\n";
    }
    REQUIRE_THROWS_AS(read_features(path), validation_error);

    const std::string path2 = tmp.path("badcols.csv");
    {
        std::ofstream f(path2);
        f << "# extractor=x rows=1 cols=3\n1,2\n";
    }
    REQUIRE_THROWS_AS(read_features(path2), validation_error);

    const std::string path3 = tmp.path("noheader.csv");
    {
        std::ofstream f(path3);
        f << "1,2\n";
    }
    REQUIRE_THROWS_AS(read_features(path3), validation_error);
}

TEST_CASE("externally produced file works as an import extractor") {
    testutil::TempDir tmp("featext");
    const std::string path = tmp.path("external.csv");
    {
        std::ofstream f(path);
        f << "# extractor=alexnet-imagenet rows=2 cols=3\n";
        f << "0.5,1.5,2.5\n-1,0,1\n";
    }
    const auto imp = make_extractor({ExtractorKind::Import, 0, path});
    REQUIRE(imp->dim() == 3);
    ImageSet ignored;
    ignored.items.push_back(Image(8, 8, 3, 0.0));
    const FeatureMatrix fm = imp->extract(ignored);
    REQUIRE(fm.rows == 2);
    REQUIRE(fm.at(1, 2) == 1.0);
    REQUIRE_THROWS_AS(make_extractor({ExtractorKind::Import, 0, tmp.path("nope.csv")}),
                      io_error);
}

TEST_CASE("parse_extractor_spec") {
    REQUIRE(parse_extractor_spec("stats", 9).kind == ExtractorKind::Stats);
    const ExtractorSpec rc = parse_extractor_spec("randconv", 9);
    REQUIRE(rc.kind == ExtractorKind::RandConv);
    REQUIRE(rc.seed == 9);
    const ExtractorSpec imp = parse_extractor_spec("import:/tmp/x.csv", 9);
    REQUIRE(imp.kind == ExtractorKind::Import);
    REQUIRE(imp.import_path == "/tmp/x.csv");
    REQUIRE_THROWS_AS(parse_extractor_spec("vgg", 9), validation_error);
}
