// degcraft command line tool: estimate sampling weights over the binned
// degradation space from reference images, synthesize weighted LR/HR
// training pairs, and run the recovery/stability studies.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "degcraft/degcraft.hpp"

namespace {

using namespace degcraft;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::istringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (!cell.empty()) out.push_back(std::stoi(cell));
    if (out.empty()) throw validation_error("empty integer list");
    return out;
}

struct CommonOpts {
    std::string hq_dir;
    std::string extractor = "stats";
    double alpha = 25.0;
    int n_per_bin = 100;
    int patch_size = 72;
    int scale = 4;
    std::uint64_t seed = 0;
    double ridge = 1e-6;
    int threads = 1;

    CraftConfig config() const {
        return CraftConfig{alpha, n_per_bin, patch_size, seed, ridge, threads};
    }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_alpha = true) {
    cmd->add_option("--hq-dir", o.hq_dir, "directory of high-quality images")
        ->required();
    cmd->add_option("--extractor", o.extractor,
                    "feature extractor: randconv|stats|import:PATH");
    if (with_alpha) cmd->add_option("--alpha", o.alpha, "kurtosis exponent");
    cmd->add_option("--n", o.n_per_bin, "patches per bin / reference samples");
    cmd->add_option("--patch", o.patch_size, "LR patch size in pixels");
    cmd->add_option("--scale", o.scale, "downsampling factor");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--ridge", o.ridge, "relative covariance regularizer");
    cmd->add_option("--threads", o.threads, "worker threads for bin synthesis");
}

int run(int argc, char** argv) {
    CLI::App app{"degradation distribution crafting toolkit"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate",
                                   "estimate per-bin sampling weights from reference images");
    CommonOpts est_opts;
    std::string ref_dir, weights_out;
    est->add_option("--ref-dir", ref_dir, "directory of degraded reference images")
        ->required();
    add_common(est, est_opts);
    est->add_option("--out", weights_out, "output weights JSON path")->required();

    // synth
    auto* syn = app.add_subcommand("synth", "synthesize weighted LR/HR training pairs");
    std::string syn_hq, syn_weights, syn_out;
    int syn_count = 0;
    std::uint64_t syn_seed = 0;
    int syn_patch = 72;
    syn->add_option("--hq-dir", syn_hq, "directory of high-quality images")->required();
    syn->add_option("--weights", syn_weights, "weights JSON from `estimate`")->required();
    syn->add_option("--count", syn_count, "number of LR/HR pairs")->required();
    syn->add_option("--out-dir", syn_out, "output directory")->required();
    syn->add_option("--seed", syn_seed, "master seed");
    syn->add_option("--patch", syn_patch, "LR patch size in pixels");

    // eval recover / eval stability
    auto* eval = app.add_subcommand("eval", "reproduce the recovery and stability studies");
    eval->require_subcommand(1);
    auto* rec = eval->add_subcommand("recover", "bin recovery study for a built-in setting");
    CommonOpts rec_opts;
    int rec_setting = 3, rec_trials = 25;
    std::string rec_out = "recovery";
    rec->add_option("--setting", rec_setting, "built-in setting id 1..4")->required();
    rec->add_option("--trials", rec_trials, "number of seeded trials");
    add_common(rec, rec_opts);
    rec->add_option("--out", rec_out, "report path prefix (writes .txt and .csv)");

    auto* stab = eval->add_subcommand("stability", "distance stability vs reference set size");
    CommonOpts stab_opts;
    std::string stab_nlist = "10,25,50,100,150";
    int stab_trials = 25, stab_bin = -1;
    std::string stab_out = "stability";
    stab->add_option("--n-list", stab_nlist, "comma-separated reference set sizes");
    stab->add_option("--trials", stab_trials, "trials per size");
    stab->add_option("--bin", stab_bin, "target flat bin index (default: center bin)");
    add_common(stab, stab_opts, /*with_alpha=*/false);
    stab->add_option("--out", stab_out, "report path prefix (writes .txt and .csv)");

    // heatmap
    auto* heat = app.add_subcommand("heatmap", "render a weights file as a PGM heatmap");
    std::string heat_weights, heat_out;
    heat->add_option("--weights", heat_weights, "weights JSON")->required();
    heat->add_option("--out", heat_out, "output PGM path")->required();

    // frechet
    auto* fre = app.add_subcommand("frechet",
                                   "squared Frechet distance between two feature CSV files");
    std::string fre_a, fre_b;
    double fre_ridge = 1e-6;
    fre->add_option("--a", fre_a, "feature CSV A")->required();
    fre->add_option("--b", fre_b, "feature CSV B")->required();
    fre->add_option("--ridge", fre_ridge, "relative covariance regularizer");

    // gen-corpus (utility for demos and smoke tests)
    auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic HQ image corpus");
    std::string gen_out;
    int gen_count = 200, gen_size = 320;
    std::uint64_t gen_seed = 0;
    gen->add_option("--out-dir", gen_out, "output directory")->required();
    gen->add_option("--count", gen_count, "number of images");
    gen->add_option("--size", gen_size, "image side length in pixels");
    gen->add_option("--seed", gen_seed, "seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (est->parsed()) {
        const BinGrid grid = default_grid(est_opts.scale);
        const ExtractorSpec spec = parse_extractor_spec(est_opts.extractor, est_opts.seed);
        const EstimateResult result =
            estimate(ref_dir, est_opts.hq_dir, grid, spec, est_opts.config());
        write_weights(weights_out, result.provenance);
        std::printf("wrote %s (argmin bin %d)\n", weights_out.c_str(),
                    static_cast<int>(std::min_element(result.distances.raw.begin(),
                                                      result.distances.raw.end()) -
                                     result.distances.raw.begin()));
    } else if (syn->parsed()) {
        const WeightsFile wf = read_weights(syn_weights);
        const ImageSet hq = load_directory(syn_hq);
        const auto manifest = synthesize(hq, wf.grid, wf.weights, syn_count, syn_out,
                                         syn_seed, syn_patch);
        write_manifest((std::filesystem::path(syn_out) / "manifest.jsonl").string(),
                       manifest);
        std::printf("wrote %d pairs under %s\n", syn_count, syn_out.c_str());
    } else if (rec->parsed()) {
        const BinGrid grid = default_grid(rec_opts.scale);
        const auto extractor =
            make_extractor(parse_extractor_spec(rec_opts.extractor, rec_opts.seed));
        const RecoveryReport report =
            recovery_eval(setting_preset(rec_setting), grid, *extractor,
                          rec_opts.config(), rec_trials, load_directory(rec_opts.hq_dir));
        write_recovery_report_text(rec_out + ".txt", report);
        write_recovery_report_csv(rec_out + ".csv", report);
        int hits = 0;
        double mass = 0.0;
        for (int t = 0; t < report.trials; ++t) {
            hits += report.argmin_hit[t] ? 1 : 0;
            mass += report.mass_on_truth[t];
        }
        std::printf("setting %d: argmin hits %d/%d, mean mass on truth %.4f\n",
                    rec_setting, hits, report.trials, mass / report.trials);
    } else if (stab->parsed()) {
        const BinGrid grid = default_grid(stab_opts.scale);
        const auto extractor =
            make_extractor(parse_extractor_spec(stab_opts.extractor, stab_opts.seed));
        const BinIndex target{stab_bin >= 0 ? stab_bin : grid.n_bins() / 2};
        const auto table =
            stability_study(target, parse_int_list(stab_nlist), stab_trials,
                            load_directory(stab_opts.hq_dir), grid, *extractor,
                            stab_opts.config());
        write_stability_text(stab_out + ".txt", table);
        write_stability_csv(stab_out + ".csv", table);
        for (const StabilityRow& row : table)
            std::printf("n=%d mean=%.6f std=%.6f\n", row.n, row.mean_distance,
                        row.std_distance);
    } else if (heat->parsed()) {
        const WeightsFile wf = read_weights(heat_weights);
        heatmap(wf.weights, wf.grid, heat_out);
        std::printf("wrote %s\n", heat_out.c_str());
    } else if (fre->parsed()) {
        const GaussianStats a = fit_gaussian(read_features(fre_a), fre_ridge);
        const GaussianStats b = fit_gaussian(read_features(fre_b), fre_ridge);
        std::printf("%.12g\n", frechet_distance(a, b));
    } else if (gen->parsed()) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(gen_out, ec);
        if (!fs::is_directory(gen_out))
            throw io_error("cannot create directory: " + gen_out);
        char name[32];
        for (int i = 0; i < gen_count; ++i) {
            const Image img = make_synthetic_image(
                gen_size, gen_size, derive_seed(gen_seed, static_cast<std::uint64_t>(i)));
            std::snprintf(name, sizeof(name), "%05d.png", i);
            save_image(img, (fs::path(gen_out) / name).string(), ImageFormat::PNG);
        }
        std::printf("wrote %d images under %s\n", gen_count, gen_out.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const degcraft::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const degcraft::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
