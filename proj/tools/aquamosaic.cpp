#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "aqua/pipeline.hpp"
#include "aqua/raster_io.hpp"
#include "aqua/unet_io.hpp"

namespace {

// Exit codes: 0 ok, 2 config error, 3 data error, 4 stage failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitStage = 4;

struct GlobalOpts {
    std::string config;
    std::string out_dir;
    int workers = 0;       // 0 = keep config value
    long long seed = -1;   // <0 = keep config value
};

aqua::PipelineConfig load_config(const GlobalOpts& opts) {
    if (opts.config.empty()) throw aqua::ConfigError("--config is required for this command");
    aqua::PipelineConfig cfg = aqua::PipelineConfig::load(opts.config);
    if (opts.workers > 0) cfg.workers = opts.workers;
    if (opts.seed >= 0) cfg.seed = static_cast<uint64_t>(opts.seed);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    cfg.check();
    return cfg;
}

using StageFn = void (*)(const aqua::PipelineConfig&, const aqua::StageLog&);

void add_stage_command(CLI::App& app, GlobalOpts& opts, const char* name, const char* help,
                       StageFn fn) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->callback([&opts, fn]() {
        const aqua::PipelineConfig cfg = load_config(opts);
        fn(cfg, aqua::StageLog());
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aquamosaic: SAR water-extent mapping pipeline"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("-c,--config", opts.config, "pipeline configuration file")->expected(1);
    app.add_option("-w,--workers", opts.workers, "worker thread count override");
    app.add_option("-s,--seed", opts.seed, "seed override");
    app.add_option("-o,--out", opts.out_dir, "output directory override");

    add_stage_command(app, opts, "shade", "build the terrain shade mask from the DEM",
                      aqua::run_shade_stage);
    add_stage_command(app, opts, "train", "train the segmentation network", aqua::run_train_stage);
    add_stage_command(app, opts, "predict", "predict per-date masks and composite mosaics",
                      aqua::run_predict_stage);
    add_stage_command(app, opts, "qa", "scan mosaics for artifact dates", aqua::run_qa_stage);
    add_stage_command(app, opts, "stats", "area series, summary stats and gauge correlation",
                      aqua::run_stats_stage);
    add_stage_command(app, opts, "run", "run every configured stage in order", aqua::run_all);

    CLI::App* compare = app.add_subcommand("compare", "score mosaics against a reference mask");
    std::string cmp_ref, cmp_classes, cmp_labels, cmp_pred;
    compare->add_option("--ref", cmp_ref, "reference mask raster override");
    compare->add_option("--classes", cmp_classes, "class raster override");
    compare->add_option("--labels", cmp_labels, "class label csv override");
    compare->add_option("--pred", cmp_pred, "directory holding predicted artifacts");
    compare->callback([&]() {
        if (!cmp_pred.empty()) opts.out_dir = cmp_pred;
        aqua::PipelineConfig cfg = load_config(opts);
        if (!cmp_ref.empty()) cfg.ref_mask = cmp_ref;
        if (!cmp_classes.empty()) cfg.class_raster = cmp_classes;
        if (!cmp_labels.empty()) cfg.class_labels = cmp_labels;
        aqua::run_compare_stage(cfg, aqua::StageLog());
    });

    CLI::App* demo = app.add_subcommand("demo", "generate the synthetic demo basin");
    std::string demo_dir = "demo";
    demo->add_option("dir", demo_dir, "directory to generate into");
    demo->callback([&]() {
        const uint64_t seed = opts.seed >= 0 ? static_cast<uint64_t>(opts.seed) : 7;
        aqua::write_demo(demo_dir, seed, aqua::StageLog());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const aqua::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const aqua::RasterIoError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const aqua::WeightsIoError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::logic_error& e) {
        std::fprintf(stderr, "stage failure: %s\n", e.what());
        return kExitStage;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stage failure: %s\n", e.what());
        return kExitStage;
    }
    return kExitOk;
}
