#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "aqua/date.hpp"
#include "aqua/mosaic.hpp"
#include "aqua/synth.hpp"

namespace aqua {

// Configuration problems exit with a distinct code, so they get their own
// exception type; everything else maps from the standard hierarchy.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat key = value configuration. Defaults describe the full-scale setup;
// the demo writes a desk-scale file. Relative paths are resolved against the
// config file's directory when loaded from disk.
struct PipelineConfig {
    std::string manifest;
    std::string pairs;
    std::string dem;
    std::string shade_override;
    std::string gauge;
    std::string ref_mask;
    std::string class_raster;
    std::string class_labels;
    std::string out_dir = "out";

    uint64_t seed = 7;
    int workers = 1;

    int cadence_days = 12;
    std::optional<Date> epoch_start;
    uint32_t predict_tile_px = 4224;
    uint32_t predict_border_px = 128;
    double threshold = 0.5;

    uint32_t qa_tile_px = 4096;
    double qa_min_water_frac = 500000.0 / (4096.0 * 4096.0);
    int qa_top_k = 5;
    int qa_min_dry_dates = 2;
    double qa_dry_frac = 0.01;
    std::string qa_mode = "report";  // report | auto

    uint32_t dem_aggregate_factor = 3;
    double slope_threshold_deg = 20.0;

    int net_depth = 4;
    int net_base_filters = 64;
    uint32_t net_input_px = 256;

    int train_epochs = 2000;
    int train_batch_size = 32;
    double train_lr = 1e-4;
    uint32_t train_crop_px = 1792;
    double train_val_fraction = 0.2;
    bool train_augment = true;

    std::string compare_resample = "majority";  // majority | any

    static PipelineConfig load(const std::string& path);
    void apply(const std::string& key, const std::string& value);  // throws ConfigError
    void check() const;                                            // throws ConfigError
};

// One "stage key=value ..." line per event on the given stream.
class StageLog {
public:
    explicit StageLog(std::FILE* stream = stdout) : stream_(stream) {}
    void line(const std::string& stage, const std::string& rest) const;

private:
    std::FILE* stream_;
};

void run_shade_stage(const PipelineConfig& cfg, const StageLog& log);
void run_train_stage(const PipelineConfig& cfg, const StageLog& log);
void run_predict_stage(const PipelineConfig& cfg, const StageLog& log);
void run_qa_stage(const PipelineConfig& cfg, const StageLog& log);
void run_stats_stage(const PipelineConfig& cfg, const StageLog& log);
void run_compare_stage(const PipelineConfig& cfg, const StageLog& log);

// All stages in order, skipping any whose primary artifact already exists.
void run_all(const PipelineConfig& cfg, const StageLog& log);

// Generate the demo basin under dir and write dir/demo.cfg pointing at it.
std::string write_demo(const std::string& dir, uint64_t seed, const StageLog& log);

// Series persistence used between the predict, qa and stats stages.
void save_series(const MosaicSeries& series, const std::string& out_dir);
MosaicSeries load_series(const std::string& out_dir, int cadence_days);

}  // namespace aqua
