#include "aqua/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aqua/analytics.hpp"
#include "aqua/qa.hpp"
#include "aqua/raster_io.hpp"
#include "aqua/shade.hpp"
#include "aqua/trainer.hpp"
#include "aqua/unet_io.hpp"

namespace fs = std::filesystem;

namespace aqua {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string dirname_of(const std::string& path) {
    const size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

std::string resolve(const std::string& base, const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    return base + "/" + path;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("bad value for " + key + ": '" + value + "'");
}

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path);
}

GridRef union_grid_of_manifest(const std::vector<SceneEntry>& scenes) {
    GridRef target = read_raster_info(scenes[0].path).grid;
    for (size_t i = 1; i < scenes.size(); ++i) {
        const GridRef g = read_raster_info(scenes[i].path).grid;
        if (!composable(target, g))
            throw std::runtime_error("scene " + scenes[i].scene_id +
                                     " is not composable with the mosaic grid");
        target = grid_union(target, g);
    }
    return target;
}

std::string mosaic_dir(const PipelineConfig& cfg) { return cfg.out_dir + "/mosaics"; }

struct TrainLogCtx {
    const StageLog* log;
};

void train_epoch_logger(const EpochStats& e, void* arg) {
    const auto* ctx = static_cast<TrainLogCtx*>(arg);
    ctx->log->line("train", "epoch=" + std::to_string(e.epoch) +
                                " train_loss=" + fmt(e.train_loss) +
                                " val_loss=" + fmt(e.val_loss) +
                                " val_accuracy=" + fmt(e.val_accuracy) +
                                " val_f1=" + fmt(e.val_f1));
}

void predict_logger(const std::string& msg, void* arg) {
    const auto* log = static_cast<const StageLog*>(arg);
    log->line("predict", msg.substr(msg.find(' ') + 1));
}

}  // namespace

void StageLog::line(const std::string& stage, const std::string& rest) const {
    if (!stream_) return;
    std::fprintf(stream_, "%s %s\n", stage.c_str(), rest.c_str());
    std::fflush(stream_);
}

void PipelineConfig::apply(const std::string& key, const std::string& value) {
    if (key == "manifest") manifest = value;
    else if (key == "pairs") pairs = value;
    else if (key == "dem") dem = value;
    else if (key == "shade_override") shade_override = value;
    else if (key == "gauge") gauge = value;
    else if (key == "ref_mask") ref_mask = value;
    else if (key == "class_raster") class_raster = value;
    else if (key == "class_labels") class_labels = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "seed") seed = parse_u64(key, value);
    else if (key == "workers") workers = parse_int(key, value);
    else if (key == "cadence_days") cadence_days = parse_int(key, value);
    else if (key == "epoch_start") {
        try {
            epoch_start = Date::parse(value);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad epoch_start: ") + e.what());
        }
    }
    else if (key == "predict_tile_px") predict_tile_px = uint32_t(parse_int(key, value));
    else if (key == "predict_border_px") predict_border_px = uint32_t(parse_int(key, value));
    else if (key == "threshold") threshold = parse_double(key, value);
    else if (key == "qa_tile_px") qa_tile_px = uint32_t(parse_int(key, value));
    else if (key == "qa_min_water_frac") qa_min_water_frac = parse_double(key, value);
    else if (key == "qa_top_k") qa_top_k = parse_int(key, value);
    else if (key == "qa_min_dry_dates") qa_min_dry_dates = parse_int(key, value);
    else if (key == "qa_dry_frac") qa_dry_frac = parse_double(key, value);
    else if (key == "qa_mode") qa_mode = value;
    else if (key == "dem_aggregate_factor") dem_aggregate_factor = uint32_t(parse_int(key, value));
    else if (key == "slope_threshold_deg") slope_threshold_deg = parse_double(key, value);
    else if (key == "net_depth") net_depth = parse_int(key, value);
    else if (key == "net_base_filters") net_base_filters = parse_int(key, value);
    else if (key == "net_input_px") net_input_px = uint32_t(parse_int(key, value));
    else if (key == "train_epochs") train_epochs = parse_int(key, value);
    else if (key == "train_batch_size") train_batch_size = parse_int(key, value);
    else if (key == "train_lr") train_lr = parse_double(key, value);
    else if (key == "train_crop_px") train_crop_px = uint32_t(parse_int(key, value));
    else if (key == "train_val_fraction") train_val_fraction = parse_double(key, value);
    else if (key == "train_augment") train_augment = parse_bool(key, value);
    else if (key == "compare_resample") compare_resample = value;
    else throw ConfigError("unknown configuration key '" + key + "'");
}

void PipelineConfig::check() const {
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (cadence_days < 1) throw ConfigError("cadence_days must be at least 1");
    if (threshold <= 0.0 || threshold >= 1.0)
        throw ConfigError("threshold must lie strictly between 0 and 1");
    if (qa_mode != "report" && qa_mode != "auto")
        throw ConfigError("qa_mode must be 'report' or 'auto'");
    if (compare_resample != "majority" && compare_resample != "any")
        throw ConfigError("compare_resample must be 'majority' or 'any'");
    if (net_depth < 1 || net_base_filters < 1)
        throw ConfigError("network depth and base filters must be positive");
    if (net_input_px % (1u << net_depth) != 0)
        throw ConfigError("net_input_px must be divisible by 2^net_depth");
    if (predict_tile_px % (1u << net_depth) != 0)
        throw ConfigError("predict_tile_px must be divisible by 2^net_depth");
    if (predict_tile_px <= 2 * predict_border_px)
        throw ConfigError("predict_tile_px must exceed twice predict_border_px");
    if (train_crop_px % net_input_px != 0)
        throw ConfigError("train_crop_px must be a multiple of net_input_px");
    if (train_val_fraction <= 0.0 || train_val_fraction >= 1.0)
        throw ConfigError("train_val_fraction must lie strictly between 0 and 1");
    if (qa_min_water_frac < 0.0 || qa_min_water_frac > 1.0)
        throw ConfigError("qa_min_water_frac must lie in [0, 1]");
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    const std::string base = dirname_of(path);
    PipelineConfig cfg;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        cfg.apply(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    // Input paths travel with the config file; out_dir does too.
    for (std::string* p : {&cfg.manifest, &cfg.pairs, &cfg.dem, &cfg.shade_override, &cfg.gauge,
                           &cfg.ref_mask, &cfg.class_raster, &cfg.class_labels, &cfg.out_dir})
        if (!p->empty()) *p = resolve(base, *p);
    cfg.check();
    return cfg;
}

void run_shade_stage(const PipelineConfig& cfg, const StageLog& log) {
    if (cfg.dem.empty()) throw ConfigError("shade stage requires 'dem'");
    if (cfg.manifest.empty()) throw ConfigError("shade stage requires 'manifest'");
    fs::create_directories(cfg.out_dir);
    const std::vector<SceneEntry> scenes = read_manifest(cfg.manifest);
    const GridRef target = union_grid_of_manifest(scenes);
    const DemRaster dem = read_raster_f32(cfg.dem);
    ShadeParams params;
    params.aggregate_factor = cfg.dem_aggregate_factor;
    params.slope_threshold_deg = cfg.slope_threshold_deg;
    ShadeMask override_keep;
    const ShadeMask* override_ptr = nullptr;
    if (!cfg.shade_override.empty()) {
        override_keep = read_raster_u8(cfg.shade_override);
        override_ptr = &override_keep;
    }
    const ShadeMask mask = build_shade_mask(dem, params, target, override_ptr);
    int64_t masked = 0;
    for (uint8_t v : mask.values())
        if (v == 1) ++masked;
    write_raster(mask, cfg.out_dir + "/shade.aqmr");
    log.line("shade", "masked_pixels=" + std::to_string(masked) +
                          " total_pixels=" + std::to_string(mask.pixels()) + " out=" +
                          cfg.out_dir + "/shade.aqmr");
}

void run_train_stage(const PipelineConfig& cfg, const StageLog& log) {
    if (cfg.pairs.empty()) throw ConfigError("train stage requires 'pairs'");
    fs::create_directories(cfg.out_dir);

    std::ifstream in(cfg.pairs);
    if (!in) throw std::runtime_error("cannot open pair table " + cfg.pairs);
    const std::string base = dirname_of(cfg.pairs);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "source_id,date,image,mask")
        throw std::runtime_error("pair table " + cfg.pairs +
                                 " must start with 'source_id,date,image,mask'");

    struct PairSource {
        std::string id;
        std::vector<SamplePair> tiles;
    };
    std::vector<PairSource> sources;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(stripped);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 4)
            throw std::runtime_error(cfg.pairs + ":" + std::to_string(line_no) +
                                     ": expected 4 fields");
        const ByteRaster image = read_raster_u8(resolve(base, fields[2]));
        const MaskRaster mask = read_raster_u8(resolve(base, fields[3]));
        PairSource src;
        src.id = fields[0];
        src.tiles = prepare_pairs(image, mask, cfg.train_crop_px, cfg.net_input_px, fields[0],
                                  Date::parse(fields[1]));
        sources.push_back(std::move(src));
    }
    if (sources.size() < 2)
        throw std::runtime_error("need at least two pair sources to split train/validation");

    // Validation split at source granularity so tiles from one scene-date
    // never straddle the split.
    std::vector<size_t> order(sources.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed ^ 0x51e77a6e5eedull);
    rng.shuffle(order);
    const size_t val_count = std::max<size_t>(
        1, size_t(std::llround(cfg.train_val_fraction * double(sources.size()))));
    std::vector<SamplePair> train_pairs, val_pairs;
    for (size_t i = 0; i < order.size(); ++i) {
        auto& dst = i < val_count ? val_pairs : train_pairs;
        for (SamplePair& p : sources[order[i]].tiles) dst.push_back(std::move(p));
    }
    log.line("train", "train_tiles=" + std::to_string(train_pairs.size()) +
                          " val_tiles=" + std::to_string(val_pairs.size()));

    UNetConfig net;
    net.depth = cfg.net_depth;
    net.base_filters = cfg.net_base_filters;
    net.input_size = int(cfg.net_input_px);
    TrainConfig tc;
    tc.epochs = cfg.train_epochs;
    tc.batch_size = cfg.train_batch_size;
    tc.learning_rate = cfg.train_lr;
    tc.seed = cfg.seed;
    tc.augment_flips = cfg.train_augment;

    TrainLogCtx ctx{&log};
    TrainResult result = train(train_pairs, val_pairs, net, tc, train_epoch_logger, &ctx);
    save_weights(result.best_model, cfg.out_dir + "/weights.aqmw");
    write_history_csv(result.history, cfg.out_dir + "/history.csv");
    log.line("train", "best_epoch=" + std::to_string(result.best_epoch) + " out=" + cfg.out_dir +
                          "/weights.aqmw");
}

void save_series(const MosaicSeries& series, const std::string& out_dir) {
    fs::create_directories(out_dir + "/mosaics");
    for (size_t i = 0; i < series.mosaics.size(); ++i) {
        const std::string iso = series.mosaics[i].date.to_string();
        write_raster(series.mosaics[i].raster, out_dir + "/mosaics/mosaic_" + iso + ".aqmr");
        write_raster(series.provenance[i], out_dir + "/mosaics/provenance_" + iso + ".aqmr");
    }
    write_raster(occurrence(series), out_dir + "/occurrence.aqmr");
    write_raster(recurrence(series), out_dir + "/recurrence.aqmr");
}

MosaicSeries load_series(const std::string& out_dir, int cadence_days) {
    std::vector<std::string> names;
    const std::string dir = out_dir + "/mosaics";
    if (!fs::is_directory(dir)) throw std::runtime_error("no mosaic directory at " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with("mosaic_") && name.ends_with(".aqmr")) names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) throw std::runtime_error("no mosaics under " + dir);
    MosaicSeries series;
    series.cadence_days = cadence_days;
    for (const std::string& name : names) {
        const std::string iso = name.substr(7, name.size() - 7 - 5);
        WaterMask wm;
        wm.date = Date::parse(iso);
        wm.raster = read_raster_u8(dir + "/" + name);
        series.provenance.push_back(read_raster_f32(dir + "/provenance_" + iso + ".aqmr"));
        series.mosaics.push_back(std::move(wm));
    }
    series.grid = series.mosaics.front().raster.grid();
    series.epoch_start = series.mosaics.front().date;
    return series;
}

void run_predict_stage(const PipelineConfig& cfg, const StageLog& log) {
    if (cfg.manifest.empty()) throw ConfigError("predict stage requires 'manifest'");
    fs::create_directories(cfg.out_dir);
    const std::vector<SceneEntry> scenes = read_manifest(cfg.manifest);
    UNet<float> model = load_weights(cfg.out_dir + "/weights.aqmw");

    ShadeMask shade;
    const ShadeMask* shade_ptr = nullptr;
    if (fs::exists(cfg.out_dir + "/shade.aqmr")) {
        shade = read_raster_u8(cfg.out_dir + "/shade.aqmr");
        shade_ptr = &shade;
    }
    log.line("predict", "scenes=" + std::to_string(scenes.size()) +
                            " shade=" + (shade_ptr ? "1" : "0") +
                            " tile=" + std::to_string(cfg.predict_tile_px) +
                            " border=" + std::to_string(cfg.predict_border_px));

    BuildParams params;
    params.predict.tile = cfg.predict_tile_px;
    params.predict.border = cfg.predict_border_px;
    params.cadence_days = cfg.cadence_days;
    params.epoch_start = cfg.epoch_start;
    params.threshold = cfg.threshold;
    params.workers = cfg.workers;
    const MosaicSeries series =
        build_series(scenes, model, shade_ptr, params, predict_logger,
                     const_cast<StageLog*>(&log));
    save_series(series, cfg.out_dir);
    log.line("predict", "windows=" + std::to_string(series.mosaics.size()) + " out=" +
                            mosaic_dir(cfg));
}

void run_qa_stage(const PipelineConfig& cfg, const StageLog& log) {
    MosaicSeries series = load_series(cfg.out_dir, cfg.cadence_days);
    const FloatRaster occ = read_raster_f32(cfg.out_dir + "/occurrence.aqmr");
    QaParams params;
    params.tile_size = cfg.qa_tile_px;
    params.min_water_frac = cfg.qa_min_water_frac;
    params.top_k = cfg.qa_top_k;
    params.min_dry_dates = cfg.qa_min_dry_dates;
    params.dry_frac = cfg.qa_dry_frac;
    const QaMode mode = cfg.qa_mode == "auto" ? QaMode::auto_correct : QaMode::report_only;
    const std::vector<AnomalyFlag> flags = run_qa(series, occ, params, mode);
    write_audit_csv(flags, cfg.out_dir + "/qa_audit.csv");
    int corrected = 0, dismissed = 0;
    for (const AnomalyFlag& f : flags) {
        if (f.action == QaAction::corrected) ++corrected;
        if (f.action == QaAction::dismissed) ++dismissed;
    }
    if (mode == QaMode::auto_correct) save_series(series, cfg.out_dir);
    log.line("qa", "flags=" + std::to_string(flags.size()) +
                       " corrected=" + std::to_string(corrected) +
                       " dismissed=" + std::to_string(dismissed) + " mode=" + cfg.qa_mode);
}

void run_stats_stage(const PipelineConfig& cfg, const StageLog& log) {
    const MosaicSeries series = load_series(cfg.out_dir, cfg.cadence_days);
    const AreaSeries areas = area_series(series.mosaics);

    std::string csv = "date,area_km2\n";
    for (size_t i = 0; i < areas.dates.size(); ++i)
        csv += areas.dates[i].to_string() + "," + fmt(areas.area_km2[i], "%.6f") + "\n";
    write_text(cfg.out_dir + "/area_series.csv", csv);

    const AreaStats st = area_stats(areas);
    std::string stats = "metric,value\n";
    stats += "min_km2," + fmt(st.min_km2, "%.6f") + "\n";
    stats += "max_km2," + fmt(st.max_km2, "%.6f") + "\n";
    stats += "median_km2," + fmt(st.median_km2, "%.6f") + "\n";
    stats += "min_over_max_pct," + fmt(st.min_over_max_pct, "%.4f") + "\n";
    stats += "min_date," + st.min_date.to_string() + "\n";
    stats += "max_date," + st.max_date.to_string() + "\n";
    write_text(cfg.out_dir + "/area_stats.csv", stats);
    log.line("stats", "dates=" + std::to_string(areas.dates.size()) +
                          " median_km2=" + fmt(st.median_km2, "%.4f") +
                          " min_over_max_pct=" + fmt(st.min_over_max_pct, "%.3f"));

    if (!cfg.gauge.empty()) {
        const GaugeSeries gauge = read_gauge_csv(cfg.gauge);
        const Correlation corr = correlate(areas, gauge);
        write_text(cfg.out_dir + "/correlation.csv",
                   "pairs,r\n" + std::to_string(corr.pairs) + "," + fmt(corr.r, "%.6f") + "\n");
        log.line("stats", "gauge_pairs=" + std::to_string(corr.pairs) + " r=" + fmt(corr.r));
    }
}

void run_compare_stage(const PipelineConfig& cfg, const StageLog& log) {
    if (cfg.ref_mask.empty()) throw ConfigError("compare stage requires 'ref_mask'");
    const FloatRaster occ = read_raster_f32(cfg.out_dir + "/occurrence.aqmr");
    MaskRaster pred(occ.grid(), 1, kMaskNoData);
    for (size_t i = 0; i < occ.values().size(); ++i) {
        const float v = occ.values()[i];
        if (v == occ.nodata()) continue;
        pred.values()[i] = v > 0.0f ? 1 : 0;
    }

    const MaskRaster ref = read_raster_u8(cfg.ref_mask);
    MaskRaster pred_at_ref = pred;
    if (!(pred.grid() == ref.grid())) {
        const double ratio = ref.grid().pixel_size_x / pred.grid().pixel_size_x;
        const uint32_t factor = uint32_t(std::llround(ratio));
        if (factor < 1 || std::fabs(ratio - double(factor)) > 1e-6)
            throw std::runtime_error("reference resolution is not an integer multiple of the "
                                     "prediction resolution");
        pred_at_ref = resample_mask(pred, factor,
                                    cfg.compare_resample == "any" ? ResampleRule::any_water
                                                                  : ResampleRule::majority);
        if (!(pred_at_ref.grid() == ref.grid()))
            throw std::runtime_error("prediction and reference grids do not align");
    }

    const ConfusionCounts counts = confusion(pred_at_ref, ref);
    const Prf metrics = prf(counts);
    std::string csv = "metric,value\n";
    csv += "precision," + fmt(metrics.precision) + "\n";
    csv += "recall," + fmt(metrics.recall) + "\n";
    csv += "f1," + fmt(metrics.f1) + "\n";
    csv += "tp," + std::to_string(counts.tp) + "\n";
    csv += "fp," + std::to_string(counts.fp) + "\n";
    csv += "fn," + std::to_string(counts.fn) + "\n";
    csv += "tn," + std::to_string(counts.tn) + "\n";
    write_text(cfg.out_dir + "/metrics.csv", csv);
    log.line("compare", "precision=" + fmt(metrics.precision) + " recall=" + fmt(metrics.recall) +
                            " f1=" + fmt(metrics.f1));

    if (!cfg.class_raster.empty()) {
        const ByteRaster classes = read_raster_u8(cfg.class_raster);
        std::vector<ClassLabel> labels;
        if (!cfg.class_labels.empty()) labels = read_class_labels(cfg.class_labels);
        auto label_for = [&labels](int code) -> std::string {
            for (const ClassLabel& l : labels)
                if (l.code == code) return l.low_label + "," + l.high_label;
            return ",";
        };
        auto write_tab = [&](const MaskRaster& selection, const std::string& path) {
            const std::vector<CrossTabRow> rows = crosstab(selection, classes);
            std::string tab = "code,low_label,high_label,count,percent\n";
            for (const CrossTabRow& r : rows)
                tab += std::to_string(r.code) + "," + label_for(r.code) + "," +
                       std::to_string(r.count) + "," + fmt(r.percent, "%.4f") + "\n";
            write_text(path, tab);
        };

        MaskRaster fp_sel(ref.grid(), 1, kMaskNoData);
        MaskRaster fn_sel(ref.grid(), 1, kMaskNoData);
        for (size_t i = 0; i < ref.values().size(); ++i) {
            const uint8_t p = pred_at_ref.values()[i], r = ref.values()[i];
            if (p == kMaskNoData || r == kMaskNoData) continue;
            fp_sel.values()[i] = (p == 1 && r == 0) ? 1 : 0;
            fn_sel.values()[i] = (p == 0 && r == 1) ? 1 : 0;
        }
        write_tab(pred_at_ref, cfg.out_dir + "/crosstab_water.csv");
        write_tab(fp_sel, cfg.out_dir + "/crosstab_commission.csv");
        write_tab(fn_sel, cfg.out_dir + "/crosstab_omission.csv");
        log.line("compare", "crosstabs=3 classes=" + cfg.class_raster);
    }
}

void run_all(const PipelineConfig& cfg, const StageLog& log) {
    struct Stage {
        const char* name;
        std::string artifact;
        void (*fn)(const PipelineConfig&, const StageLog&);
        bool enabled;
    };
    const Stage stages[] = {
        {"shade", cfg.out_dir + "/shade.aqmr", run_shade_stage, !cfg.dem.empty()},
        {"train", cfg.out_dir + "/weights.aqmw", run_train_stage, !cfg.pairs.empty()},
        {"predict", cfg.out_dir + "/occurrence.aqmr", run_predict_stage, true},
        {"qa", cfg.out_dir + "/qa_audit.csv", run_qa_stage, true},
        {"stats", cfg.out_dir + "/area_series.csv", run_stats_stage, true},
        {"compare", cfg.out_dir + "/metrics.csv", run_compare_stage, !cfg.ref_mask.empty()},
    };
    for (const Stage& s : stages) {
        if (!s.enabled) {
            log.line(s.name, "skipped=1 reason=not_configured");
            continue;
        }
        if (fs::exists(s.artifact)) {
            log.line(s.name, "skipped=1 reason=artifact_exists artifact=" + s.artifact);
            continue;
        }
        log.line(s.name, "start=1");
        const auto t0 = std::chrono::steady_clock::now();
        try {
            s.fn(cfg, log);
        } catch (const std::exception& e) {
            log.line(s.name, std::string("failed=1 error=\"") + e.what() + "\"");
            throw;
        }
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                .count();
        log.line(s.name, "done=1 elapsed_ms=" + std::to_string(ms));
    }
    log.line("run", "done=1 out_dir=" + cfg.out_dir);
}

std::string write_demo(const std::string& dir, uint64_t seed, const StageLog& log) {
    SynthConfig synth;
    synth.seed = seed;
    fs::create_directories(dir);
    const SynthOutputs outputs = generate_basin(synth, dir);
    log.line("demo", "dates=" + std::to_string(outputs.dates.size()) +
                         " scenes=" + std::to_string(2 * outputs.dates.size() -
                                                     outputs.missing_b_dates.size()) +
                         " artifacts=" + std::to_string(outputs.artifact_dates.size()) + " dir=" +
                         dir);

    std::string cfg;
    cfg += "# Desk-scale demo configuration over the synthetic basin.\n";
    cfg += "manifest = manifest.csv\n";
    cfg += "pairs = pairs.csv\n";
    cfg += "dem = dem.aqmr\n";
    cfg += "gauge = gauge.csv\n";
    cfg += "ref_mask = ref_any2022_30m.aqmr\n";
    cfg += "class_raster = classes30.aqmr\n";
    cfg += "class_labels = class_labels.csv\n";
    cfg += "out_dir = out\n";
    cfg += "seed = " + std::to_string(seed) + "\n";
    cfg += "workers = 2\n";
    cfg += "cadence_days = 12\n";
    cfg += "predict_tile_px = 64\n";
    cfg += "predict_border_px = 8\n";
    cfg += "threshold = 0.5\n";
    cfg += "qa_tile_px = 64\n";
    cfg += "qa_min_water_frac = 0.12\n";
    cfg += "qa_top_k = 5\n";
    cfg += "qa_mode = auto\n";
    cfg += "dem_aggregate_factor = 3\n";
    cfg += "slope_threshold_deg = 20\n";
    cfg += "net_depth = 2\n";
    cfg += "net_base_filters = 8\n";
    cfg += "net_input_px = 32\n";
    cfg += "train_epochs = 20\n";
    cfg += "train_batch_size = 8\n";
    cfg += "train_lr = 0.001\n";
    cfg += "train_crop_px = 128\n";
    cfg += "train_val_fraction = 0.25\n";
    const std::string cfg_path = dir + "/demo.cfg";
    write_text(cfg_path, cfg);
    log.line("demo", "config=" + cfg_path);
    return cfg_path;
}

}  // namespace aqua
