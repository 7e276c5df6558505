#pragma once

#include <string>
#include <vector>

#include "aqua/date.hpp"
#include "aqua/grid.hpp"
#include "aqua/raster.hpp"

namespace aqua {

// Parameters of the synthetic basin used by the demo pipeline and the test
// suite: a meandering river with a seasonal cycle and a late drought, two
// overlapping scene footprints per date, a DEM with steep hills casting
// radar-dark shadows, a few artifact dates with anomalously bright water,
// and a stage gauge that tracks the seasonal signal.
struct SynthConfig {
    uint64_t seed = 7;
    uint32_t size = 192;          // basin edge, pixels
    double pixel_size = 10.0;     // meters
    int n_dates = 60;
    int cadence_days = 12;
    Date start = Date::from_ymd(2022, 1, 10);
    uint32_t scene_width = 120;   // each footprint's width; together they cover the basin
    uint32_t scene_b_offset = 72;
    std::vector<int> artifact_indices = {9, 18, 27, 36, 45};
    std::vector<int> missing_b_indices = {23, 49};
    std::vector<int> pair_indices = {1, 6, 12, 15, 21, 26, 30, 34, 39, 44, 51, 57};
};

struct SynthOutputs {
    std::vector<Date> dates;
    std::vector<Date> artifact_dates;
    std::vector<Date> missing_b_dates;
    std::vector<Date> pair_dates;
    std::string manifest_csv;
    std::string pairs_csv;
    std::string dem_path;
    std::string gauge_csv;
    std::string classes_path;
    std::string class_labels_csv;
    std::string reference_mask_path;
    std::string truth_dir;
};

// Deterministic in the seed; writes scenes, truth masks, training pairs, the
// DEM, the gauge table, a class raster with labels and a 30 m reference
// water mask under out_dir.
SynthOutputs generate_basin(const SynthConfig& cfg, const std::string& out_dir);

// Pieces exposed for tests and analytics against ground truth.
double seasonal_factor(const SynthConfig& cfg, Date d);
MaskRaster truth_mask(const SynthConfig& cfg, Date d);
double gauge_level(const SynthConfig& cfg, Date d);

}  // namespace aqua
