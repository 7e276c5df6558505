#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aqua/date.hpp"
#include "aqua/raster.hpp"

namespace aqua {

struct ConfusionCounts {
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    int64_t total() const { return tp + fp + fn + tn; }
};

// Pixel-wise confusion between a predicted and a reference mask on the same
// grid. A pixel that is nodata in either raster is excluded.
ConfusionCounts confusion(const MaskRaster& pred, const MaskRaster& ref);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Throws std::invalid_argument naming the metric whose denominator is zero.
Prf prf(const ConfusionCounts& c);

struct ClassLabel {
    int code = 0;
    std::string low_label;   // class name in the low-water season product
    std::string high_label;  // class name in the high-water season product
};

// CSV with header "code,low_label,high_label".
std::vector<ClassLabel> read_class_labels(const std::string& path);

struct CrossTabRow {
    int code = 0;
    int64_t count = 0;
    double percent = 0.0;
};

// Distribution of class codes under the selected (value 1) pixels of a mask,
// in ascending code order. Nodata in either raster is excluded; an empty
// selection yields zero percentages.
std::vector<CrossTabRow> crosstab(const MaskRaster& selection, const ByteRaster& classes);

struct AreaSeries {
    std::vector<Date> dates;
    std::vector<double> area_km2;
    double pixel_area_m2 = 0.0;
};

struct AreaStats {
    double min_km2 = 0.0, max_km2 = 0.0, median_km2 = 0.0;
    double min_over_max_pct = 0.0;
    Date min_date, max_date;
};

// Water pixel count times pixel area, converted to km^2, one entry per mask.
AreaSeries area_series(const std::vector<WaterMask>& masks);

// Extremes break ties towards the earlier date; an even-length series takes
// the mean of the two middle values as median.
AreaStats area_stats(const AreaSeries& s);

struct GaugeSeries {
    std::vector<Date> dates;
    std::vector<double> level_m;
};

// CSV with header "date,level_m", dates ISO-8601.
GaugeSeries read_gauge_csv(const std::string& path);

struct Correlation {
    double r = 0.0;
    int pairs = 0;
};

// Pearson correlation between mosaic areas and the gauge level nearest in
// time, within +-max_day_gap days (ties towards the earlier reading). Fewer
// than three pairs or a zero-variance side is an error.
Correlation correlate(const AreaSeries& areas, const GaugeSeries& gauge, int max_day_gap = 6);

}  // namespace aqua
