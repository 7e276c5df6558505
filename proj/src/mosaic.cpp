#include "aqua/mosaic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "aqua/raster_io.hpp"

namespace aqua {

namespace {

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

std::string dirname_of(const std::string& path) {
    const size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

}  // namespace

std::vector<SceneEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path);
    const std::string dir = dirname_of(path);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "scene_id,orbit_id,date,path")
        throw std::runtime_error("manifest " + path +
                                 " must start with 'scene_id,orbit_id,date,path'");
    std::vector<SceneEntry> out;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::stringstream ss(line);
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 4)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 4 fields");
        SceneEntry e;
        e.scene_id = fields[0];
        e.orbit_id = fields[1];
        e.date = Date::parse(fields[2]);
        e.path = fields[3].starts_with('/') ? fields[3] : dir + "/" + fields[3];
        out.push_back(std::move(e));
    }
    if (out.empty()) throw std::runtime_error("manifest " + path + " lists no scenes");
    return out;
}

ProbabilityRaster predict_scene(const BackscatterRaster& scene, const UNet<float>& model,
                                const PredictParams& params) {
    if (scene.bands() != 2)
        throw std::invalid_argument("scene must carry two polarization bands");
    const int divisor = 1 << model.config().depth;
    if (params.tile % uint32_t(divisor) != 0)
        throw std::invalid_argument("tile size must be divisible by 2^depth of the model");
    if (params.tile <= 2 * params.border)
        throw std::invalid_argument("tile size must exceed twice the border");

    const uint32_t core = params.tile - 2 * params.border;
    // Pad the scene up to whole cores so the crop-and-stitch pass covers it
    // exactly; the surrounding border sees nodata bytes like a scene edge.
    const uint32_t padded_w = (scene.width() + core - 1) / core * core;
    const uint32_t padded_h = (scene.height() + core - 1) / core * core;
    const ByteRaster padded =
        pad_to(scene, padded_w, padded_h, params.border, kBackscatterNoData);

    ProbabilityRaster canvas(padded.grid(), 1, kProbabilityNoData);
    const std::vector<TilePlacement> places =
        tile_placements(padded.width(), padded.height(), params.tile, params.border);

    for (const TilePlacement& place : places) {
        const ByteRaster tile = extract_tile(padded, place, params.tile);
        TensorF x(1, 2, int(params.tile), int(params.tile));
        for (int b = 0; b < 2; ++b)
            for (uint32_t y = 0; y < params.tile; ++y)
                for (uint32_t xx = 0; xx < params.tile; ++xx)
                    x(0, b, int(y), int(xx)) = float(tile.at(xx, y, b)) / 255.0f;
        const TensorF prob = model.forward(x);
        // Keep only the core of the prediction; crops of neighbouring tiles
        // can still overlap after clamping, where the larger value wins.
        for (uint32_t y = params.border; y < params.tile - params.border; ++y)
            for (uint32_t xx = params.border; xx < params.tile - params.border; ++xx) {
                const float v = prob(0, 0, int(y), int(xx));
                float& dst = canvas.at(place.col + xx, place.row + y);
                if (dst == kProbabilityNoData || v > dst) dst = v;
            }
    }

    // Cut the padded frame back to the scene extent and restore nodata.
    ProbabilityRaster out(scene.grid(), 1, kProbabilityNoData);
    for (uint32_t y = 0; y < scene.height(); ++y)
        for (uint32_t x = 0; x < scene.width(); ++x) {
            if (scene.at(x, y, 0) == kBackscatterNoData ||
                scene.at(x, y, 1) == kBackscatterNoData)
                continue;
            out.at(x, y) = canvas.at(params.border + x, params.border + y);
        }
    return out;
}

MaskRaster composite(const std::vector<Contribution>& contributions, const GridRef& target,
                     FloatRaster* provenance) {
    validate(target);
    MaskRaster out(target, 1, kMaskNoData);
    if (provenance) *provenance = FloatRaster(target, 1, kProvenanceNoData);
    for (const Contribution& c : contributions) {
        if (!c.mask) throw std::invalid_argument("null contribution");
        if (!composable(target, c.mask->grid()))
            throw std::invalid_argument("contribution grid is not composable with the target");
        const PixelOffset off = offset_between(target, c.mask->grid());
        for (uint32_t y = 0; y < c.mask->height(); ++y) {
            const int64_t ty = off.row + y;
            if (ty < 0 || ty >= target.height) continue;
            for (uint32_t x = 0; x < c.mask->width(); ++x) {
                const int64_t tx = off.col + x;
                if (tx < 0 || tx >= target.width) continue;
                const uint8_t v = c.mask->at(x, y);
                uint8_t& dst = out.at(uint32_t(tx), uint32_t(ty));
                // Ranking water > land > nodata; first winner keeps provenance.
                const int rank_new = v == 1 ? 2 : (v == 0 ? 1 : 0);
                const int rank_old = dst == 1 ? 2 : (dst == 0 ? 1 : 0);
                if (rank_new > rank_old) {
                    dst = v;
                    if (provenance)
                        provenance->at(uint32_t(tx), uint32_t(ty)) = c.source_index;
                }
            }
        }
    }
    return out;
}

int window_index(Date epoch_start, int cadence_days, Date d) {
    if (cadence_days < 1) throw std::invalid_argument("cadence must be at least one day");
    const int32_t delta = d - epoch_start;
    // Floor division so dates before the epoch land in negative windows.
    return int(delta >= 0 ? delta / cadence_days
                          : (delta - cadence_days + 1) / cadence_days);
}

void gap_fill(MosaicSeries& series) {
    for (size_t t = 1; t < series.mosaics.size(); ++t) {
        MaskRaster& cur = series.mosaics[t].raster;
        const MaskRaster& prev = series.mosaics[t - 1].raster;
        for (uint32_t y = 0; y < cur.height(); ++y)
            for (uint32_t x = 0; x < cur.width(); ++x) {
                if (cur.at(x, y) != kMaskNoData || prev.at(x, y) == kMaskNoData) continue;
                cur.at(x, y) = prev.at(x, y);
                series.provenance[t].at(x, y) = kProvenanceGapFill;
            }
    }
}

FloatRaster occurrence(const MosaicSeries& series) {
    if (series.mosaics.empty()) throw std::invalid_argument("occurrence over an empty series");
    FloatRaster out(series.grid, 1, kPercentNoData);
    const uint32_t w = series.grid.width, h = series.grid.height;
    for (uint32_t y = 0; y < h; ++y)
        for (uint32_t x = 0; x < w; ++x) {
            int64_t water = 0, valid = 0;
            for (const WaterMask& wm : series.mosaics) {
                const uint8_t v = wm.raster.at(x, y);
                if (v == kMaskNoData) continue;
                ++valid;
                if (v == 1) ++water;
            }
            if (valid > 0) out.at(x, y) = float(100.0 * double(water) / double(valid));
        }
    return out;
}

FloatRaster recurrence(const MosaicSeries& series) {
    if (series.mosaics.empty()) throw std::invalid_argument("recurrence over an empty series");
    std::set<int> years;
    for (const WaterMask& wm : series.mosaics) years.insert(wm.date.year());
    FloatRaster out(series.grid, 1, kPercentNoData);
    const uint32_t w = series.grid.width, h = series.grid.height;
    for (uint32_t y = 0; y < h; ++y)
        for (uint32_t x = 0; x < w; ++x) {
            int years_valid = 0, years_water = 0;
            for (int yr : years) {
                bool valid = false, water = false;
                for (const WaterMask& wm : series.mosaics) {
                    if (wm.date.year() != yr) continue;
                    const uint8_t v = wm.raster.at(x, y);
                    if (v == kMaskNoData) continue;
                    valid = true;
                    if (v == 1) water = true;
                }
                if (valid) ++years_valid;
                if (water) ++years_water;
            }
            if (years_valid > 0)
                out.at(x, y) = float(100.0 * double(years_water) / double(years_valid));
        }
    return out;
}

void apply_shade(MaskRaster& mask, const ShadeMask& shade) {
    if (shade.grid() != mask.grid())
        throw std::invalid_argument("shade mask grid does not match the mosaic grid");
    for (uint32_t y = 0; y < mask.height(); ++y)
        for (uint32_t x = 0; x < mask.width(); ++x)
            if (shade.at(x, y) == 1 && mask.at(x, y) == 1) mask.at(x, y) = 0;
}

MosaicSeries build_series(const std::vector<SceneEntry>& scenes, const UNet<float>& model,
                          const ShadeMask* shade, const BuildParams& params,
                          PredictLog log, void* log_arg) {
    if (scenes.empty()) throw std::invalid_argument("no scenes to composite");

    // Load every scene header first to settle the union grid.
    std::vector<BackscatterRaster> rasters(scenes.size());
    for (size_t i = 0; i < scenes.size(); ++i) rasters[i] = read_raster_u8(scenes[i].path);
    GridRef target = rasters[0].grid();
    for (size_t i = 1; i < scenes.size(); ++i) {
        if (!composable(target, rasters[i].grid()))
            throw std::invalid_argument("scene " + scenes[i].scene_id +
                                        " is not composable with the mosaic grid");
        target = grid_union(target, rasters[i].grid());
    }

    // Per-scene prediction is independent; compositing below follows
    // manifest order regardless of which worker finished first.
    std::vector<MaskRaster> masks(scenes.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mu;
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= scenes.size() || failed.load()) return;
            try {
                const ProbabilityRaster prob = predict_scene(rasters[i], model, params.predict);
                masks[i] = threshold_probability(prob, params.threshold);
                if (log) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    log("predict scene=" + scenes[i].scene_id + " date=" +
                            scenes[i].date.to_string(),
                        log_arg);
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mu);
                failed.store(true);
                if (failure.empty())
                    failure = "prediction failed on scene " + scenes[i].scene_id + ": " + e.what();
                return;
            }
        }
    };
    const int n_workers = std::max(1, std::min<int>(params.workers, int(scenes.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (failed.load()) throw std::runtime_error(failure);

    Date epoch = params.epoch_start.value_or(Date());
    if (!params.epoch_start) {
        Date first = scenes[0].date;
        for (const SceneEntry& s : scenes) first = std::min(first, s.date);
        epoch = first;
    }

    int max_window = 0;
    for (const SceneEntry& s : scenes) {
        const int w = window_index(epoch, params.cadence_days, s.date);
        if (w < 0)
            throw std::invalid_argument("scene " + s.scene_id + " predates the epoch start");
        max_window = std::max(max_window, w);
    }

    MosaicSeries series;
    series.grid = target;
    series.epoch_start = epoch;
    series.cadence_days = params.cadence_days;
    for (int w = 0; w <= max_window; ++w) {
        std::vector<Contribution> contributions;
        for (size_t i = 0; i < scenes.size(); ++i)
            if (window_index(epoch, params.cadence_days, scenes[i].date) == w)
                contributions.push_back({&masks[i], float(i)});
        FloatRaster prov;
        MaskRaster mosaic = composite(contributions, target, &prov);
        if (shade) apply_shade(mosaic, *shade);
        series.mosaics.push_back({std::move(mosaic), epoch + w * params.cadence_days});
        series.provenance.push_back(std::move(prov));
    }
    gap_fill(series);
    return series;
}

}  // namespace aqua
