#include "aqua/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "aqua/raster_io.hpp"
#include "aqua/rng.hpp"
#include "aqua/shade.hpp"

namespace aqua {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr const char* kCrs = "UTM33N";

// Fixed basin layout. The river meanders through the middle band; two steep
// hills sit in the north-east, outside the central training crop, with their
// radar-dark east flanks clear of the river.
constexpr double kHill1X = 160.0, kHill1Y = 8.0, kHill1Sigma = 11.0, kHill1H = 330.0;
constexpr double kHill2X = 172.0, kHill2Y = 28.0, kHill2Sigma = 9.0, kHill2H = 260.0;
constexpr double kBaseElevation = 80.0;

// Backscatter statistics in dB.
constexpr double kLandVh = -11.0, kLandVv = -6.5, kLandSd = 1.2;
constexpr double kWaterVh = -22.5, kWaterVv = -17.0, kWaterSd = 1.0;
constexpr double kArtifactBoost = 10.5;

double centerline_y(const SynthConfig& cfg, double x) {
    const double mid = double(cfg.size) / 2.0;
    return mid + 22.0 * std::sin(2.0 * kPi * x / 160.0 + 0.7) +
           7.0 * std::sin(2.0 * kPi * x / 53.0 + 2.1);
}

double base_halfwidth(double x) {
    return 0.5 * 13.0 * (1.0 + 0.22 * std::sin(2.0 * kPi * x / 101.0 + 1.3));
}

double hill_elevation(double x, double y) {
    const double d1 = ((x - kHill1X) * (x - kHill1X) + (y - kHill1Y) * (y - kHill1Y)) /
                      (2.0 * kHill1Sigma * kHill1Sigma);
    const double d2 = ((x - kHill2X) * (x - kHill2X) + (y - kHill2Y) * (y - kHill2Y)) /
                      (2.0 * kHill2Sigma * kHill2Sigma);
    return kHill1H * std::exp(-d1) + kHill2H * std::exp(-d2);
}

// East-facing flank steep enough to fall into radar shadow. Units are meters
// of drop per 10 m pixel; -5 is roughly a 27 degree slope.
bool in_shadow(double x, double y) {
    const double d1 = ((x - kHill1X) * (x - kHill1X) + (y - kHill1Y) * (y - kHill1Y)) /
                      (2.0 * kHill1Sigma * kHill1Sigma);
    const double d2 = ((x - kHill2X) * (x - kHill2X) + (y - kHill2Y) * (y - kHill2Y)) /
                      (2.0 * kHill2Sigma * kHill2Sigma);
    const double dzdx = -kHill1H * (x - kHill1X) / (kHill1Sigma * kHill1Sigma) * std::exp(-d1) -
                        kHill2H * (x - kHill2X) / (kHill2Sigma * kHill2Sigma) * std::exp(-d2);
    return dzdx < -5.0;
}

bool is_water(const SynthConfig& cfg, uint32_t col, uint32_t row, double season) {
    const double x = double(col) + 0.5, y = double(row) + 0.5;
    return std::fabs(y - centerline_y(cfg, x)) <= base_halfwidth(x) * season;
}

GridRef basin_grid(const SynthConfig& cfg) {
    GridRef g;
    g.origin_x = 500000.0;
    g.origin_y = 4200000.0;
    g.pixel_size_x = cfg.pixel_size;
    g.pixel_size_y = cfg.pixel_size;
    g.width = cfg.size;
    g.height = cfg.size;
    g.crs_tag = kCrs;
    return g;
}

// Fill a backscatter raster over [col0, col0+width) of the basin.
ByteRaster render_scene(const SynthConfig& cfg, Date d, bool artifact, uint32_t col0,
                        uint32_t width, uint64_t stream) {
    GridRef g = basin_grid(cfg);
    g.origin_x += double(col0) * g.pixel_size_x;
    g.width = width;
    ByteRaster scene(g, 2, kBackscatterNoData);
    Rng rng(stream);
    const double season = seasonal_factor(cfg, d);
    for (uint32_t y = 0; y < g.height; ++y) {
        for (uint32_t x = 0; x < width; ++x) {
            const uint32_t bx = col0 + x;
            const double px = double(bx) + 0.5, py = double(y) + 0.5;
            double vh, vv;
            if (is_water(cfg, bx, y, season)) {
                vh = rng.normal(kWaterVh, kWaterSd);
                vv = rng.normal(kWaterVv, kWaterSd);
                if (artifact) {
                    vh += kArtifactBoost;
                    vv += kArtifactBoost;
                }
            } else if (in_shadow(px, py)) {
                vh = rng.normal(kWaterVh - 0.5, kWaterSd);
                vv = rng.normal(kWaterVv - 0.5, kWaterSd);
            } else {
                vh = rng.normal(kLandVh, kLandSd);
                vv = rng.normal(kLandVv, kLandSd);
            }
            scene.at(x, y, 0) = quantize_db(vh);
            scene.at(x, y, 1) = quantize_db(vv);
        }
    }
    return scene;
}

void write_csv(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace

double seasonal_factor(const SynthConfig& cfg, Date d) {
    const Date peak = cfg.start + 180;
    const Date trough = cfg.start + 684;
    const double t = double(d - cfg.start);
    const double seasonal = 1.0 + 0.16 * std::cos(2.0 * kPi * double(d - peak) / 365.25);
    const double trend = -1e-4 * t;
    const double u = double(d - trough) / 45.0;
    const double dip = 0.32 * std::exp(-u * u);
    return seasonal + trend - dip;
}

MaskRaster truth_mask(const SynthConfig& cfg, Date d) {
    MaskRaster mask(basin_grid(cfg), 1, kMaskNoData);
    const double season = seasonal_factor(cfg, d);
    for (uint32_t y = 0; y < cfg.size; ++y)
        for (uint32_t x = 0; x < cfg.size; ++x)
            mask.at(x, y) = is_water(cfg, x, y, season) ? 1 : 0;
    return mask;
}

double gauge_level(const SynthConfig& cfg, Date d) {
    return 0.8 + 2.0 * (seasonal_factor(cfg, d) - 0.6);
}

SynthOutputs generate_basin(const SynthConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir + "/scenes");
    fs::create_directories(out_dir + "/truth");
    fs::create_directories(out_dir + "/pairs");

    SynthOutputs out;
    out.truth_dir = out_dir + "/truth";
    for (int i = 0; i < cfg.n_dates; ++i) out.dates.push_back(cfg.start + i * cfg.cadence_days);

    auto contains = [](const std::vector<int>& v, int i) {
        return std::find(v.begin(), v.end(), i) != v.end();
    };

    // Scenes and manifest. Footprint A covers the west, B the east, with an
    // overlap band in the middle; a few dates lose footprint B entirely.
    std::string manifest = "scene_id,orbit_id,date,path\n";
    for (int i = 0; i < cfg.n_dates; ++i) {
        const Date d = out.dates[size_t(i)];
        const bool artifact = contains(cfg.artifact_indices, i);
        if (artifact) out.artifact_dates.push_back(d);
        const std::string iso = d.to_string();

        const ByteRaster a =
            render_scene(cfg, d, artifact, 0, cfg.scene_width, cfg.seed + 2654435761u * (2u * uint64_t(i) + 0));
        const std::string a_rel = "scenes/s" + iso + "_A.aqmr";
        write_raster(a, out_dir + "/" + a_rel);
        manifest += "s" + iso + "_A,117," + iso + "," + a_rel + "\n";

        if (!contains(cfg.missing_b_indices, i)) {
            const ByteRaster b = render_scene(cfg, d, artifact, cfg.scene_b_offset,
                                              cfg.scene_width,
                                              cfg.seed + 2654435761u * (2u * uint64_t(i) + 1));
            const std::string b_rel = "scenes/s" + iso + "_B.aqmr";
            write_raster(b, out_dir + "/" + b_rel);
            manifest += "s" + iso + "_B,95," + iso + "," + b_rel + "\n";
        } else {
            out.missing_b_dates.push_back(d);
        }

        write_raster(truth_mask(cfg, d), out_dir + "/truth/t" + iso + ".aqmr");
    }
    out.manifest_csv = out_dir + "/manifest.csv";
    write_csv(out.manifest_csv, manifest);

    // Training pairs: whole-basin clean renders of a subset of dates.
    std::string pairs = "source_id,date,image,mask\n";
    for (int i : cfg.pair_indices) {
        if (i < 0 || i >= cfg.n_dates)
            throw std::invalid_argument("pair index outside the date range");
        if (contains(cfg.artifact_indices, i))
            throw std::invalid_argument("artifact dates cannot serve as training pairs");
        const Date d = out.dates[size_t(i)];
        out.pair_dates.push_back(d);
        const std::string iso = d.to_string();
        const ByteRaster img = render_scene(cfg, d, false, 0, cfg.size,
                                            cfg.seed + 2654435761u * (1000u + uint64_t(i)));
        write_raster(img, out_dir + "/pairs/p" + iso + "_img.aqmr");
        write_raster(truth_mask(cfg, d), out_dir + "/pairs/p" + iso + "_mask.aqmr");
        pairs += "p" + iso + "," + iso + ",pairs/p" + iso + "_img.aqmr,pairs/p" + iso +
                 "_mask.aqmr\n";
    }
    out.pairs_csv = out_dir + "/pairs.csv";
    write_csv(out.pairs_csv, pairs);

    // DEM at 30 m: a gentle southward tilt plus the two hills, light noise.
    {
        GridRef g = basin_grid(cfg);
        g.pixel_size_x *= 3;
        g.pixel_size_y *= 3;
        g.width = (cfg.size + 2) / 3;
        g.height = (cfg.size + 2) / 3;
        DemRaster dem(g, 1, kElevationNoData);
        Rng rng(cfg.seed + 424243);
        for (uint32_t r = 0; r < g.height; ++r)
            for (uint32_t c = 0; c < g.width; ++c) {
                const double x = 3.0 * c + 1.5, y = 3.0 * r + 1.5;
                dem.at(c, r) = float(kBaseElevation + 0.3 * double(g.height - 1 - r) +
                                     hill_elevation(x, y) + rng.normal(0.0, 0.4));
            }
        out.dem_path = out_dir + "/dem.aqmr";
        write_raster(dem, out.dem_path);
    }

    // Daily gauge readings spanning the series with margin on both ends.
    {
        std::string gauge = "date,level_m\n";
        const Date first = out.dates.front() - 6;
        const Date last = out.dates.back() + 6;
        for (Date d = first; d <= last; d = d + 1) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%.4f", gauge_level(cfg, d));
            gauge += d.to_string() + "," + buf + "\n";
        }
        out.gauge_csv = out_dir + "/gauge.csv";
        write_csv(out.gauge_csv, gauge);
    }

    // Land-cover classes at 30 m from the truth occurrence, and a 30 m
    // any-water reference mask over the first calendar year.
    {
        std::vector<int> occurrence_pct(size_t(cfg.size) * cfg.size, 0);
        MaskRaster any2022(basin_grid(cfg), 1, kMaskNoData);
        for (uint32_t i = 0; i < any2022.pixels(); ++i) any2022.values()[i] = 0;
        for (int i = 0; i < cfg.n_dates; ++i) {
            const MaskRaster t = truth_mask(cfg, out.dates[size_t(i)]);
            for (size_t p = 0; p < t.values().size(); ++p) {
                if (t.values()[p] == 1) {
                    ++occurrence_pct[p];
                    if (out.dates[size_t(i)].year() == cfg.start.year())
                        any2022.values()[p] = 1;
                }
            }
        }

        ByteRaster classes10(basin_grid(cfg), 1, kMaskNoData);
        for (size_t p = 0; p < classes10.values().size(); ++p) {
            const double occ = 100.0 * double(occurrence_pct[p]) / double(cfg.n_dates);
            classes10.values()[p] = occ >= 90.0 ? 1 : (occ > 0.0 ? 2 : 0);
        }
        GridRef g30 = basin_grid(cfg);
        g30.pixel_size_x *= 3;
        g30.pixel_size_y *= 3;
        g30.width = (cfg.size + 2) / 3;
        g30.height = (cfg.size + 2) / 3;
        ByteRaster classes30(g30, 1, kMaskNoData);
        for (uint32_t r = 0; r < g30.height; ++r)
            for (uint32_t c = 0; c < g30.width; ++c) {
                int counts[3] = {0, 0, 0};
                for (uint32_t dy = 0; dy < 3; ++dy)
                    for (uint32_t dx = 0; dx < 3; ++dx) {
                        const uint32_t x = 3 * c + dx, y = 3 * r + dy;
                        if (x < cfg.size && y < cfg.size)
                            ++counts[classes10.at(x, y)];
                    }
                // Majority code, ties to the smaller code.
                int best = 0;
                for (int k = 1; k < 3; ++k)
                    if (counts[k] > counts[best]) best = k;
                classes30.at(c, r) = uint8_t(best);
            }
        out.classes_path = out_dir + "/classes30.aqmr";
        write_raster(classes30, out.classes_path);

        out.class_labels_csv = out_dir + "/class_labels.csv";
        write_csv(out.class_labels_csv,
                  "code,low_label,high_label\n"
                  "0,upland,upland\n"
                  "1,river channel,open water\n"
                  "2,sandbank,flooded bank\n");

        out.reference_mask_path = out_dir + "/ref_any2022_30m.aqmr";
        write_raster(resample_mask(any2022, 3, ResampleRule::any_water),
                     out.reference_mask_path);
    }

    return out;
}

}  // namespace aqua
