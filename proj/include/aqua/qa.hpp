#pragma once

#include <string>
#include <vector>

#include "aqua/mosaic.hpp"
#include "aqua/raster.hpp"

namespace aqua {

// A square analysis window inside the mosaic grid; edge tiles may be smaller.
struct TileRef {
    uint32_t tile_col = 0, tile_row = 0;
    uint32_t col0 = 0, row0 = 0;
    uint32_t width = 0, height = 0;

    std::string id() const {
        return "t" + std::to_string(tile_col) + "_" + std::to_string(tile_row);
    }
};

std::vector<TileRef> tile_grid(const GridRef& grid, uint32_t tile_size);

// Tiles whose long-term water support (occurrence > 0 pixels) exceeds
// min_water_frac of the tile area, strictly.
std::vector<TileRef> select_river_tiles(const FloatRaster& occurrence, uint32_t tile_size,
                                        double min_water_frac);

// Per-date water pixel counts over one tile, plus the tile's support size.
struct TileWaterSeries {
    TileRef tile;
    int64_t support_size = 0;
    std::vector<Date> dates;
    std::vector<int64_t> counts;
};

TileWaterSeries water_series(const MosaicSeries& series, const FloatRaster& occurrence,
                             const TileRef& tile);

enum class QaAction { flagged, corrected, dismissed };

const char* to_string(QaAction a);

struct AnomalyFlag {
    std::string tile_id;
    Date date;
    double score = 0.0;
    QaAction action = QaAction::flagged;
    bool has_replacement = false;
    Date replaced_from;
};

struct QaParams {
    uint32_t tile_size = 4096;
    double min_water_frac = 500000.0 / (4096.0 * 4096.0);
    int top_k = 5;
    int min_dry_dates = 2;    // this many low-water dates suggest a real drying river
    double dry_frac = 0.01;   // "low water" means below this fraction of support
};

// Dates whose water count drops anomalously below the tile's median, scored
// by the shortfall relative to support. Rivers that genuinely run low keep
// their record: when at least min_dry_dates dates sit below dry_frac of the
// support, nothing is flagged.
std::vector<AnomalyFlag> detect_anomalies(const TileWaterSeries& s, const QaParams& params);

enum class QaMode { report_only, auto_correct };

// Run detection over every river tile; in auto_correct mode each flagged
// tile-date is replaced by the most recent earlier clean date of the same
// tile (mask and provenance), or dismissed when none exists.
std::vector<AnomalyFlag> run_qa(MosaicSeries& series, const FloatRaster& occurrence,
                                const QaParams& params, QaMode mode);

// Audit CSV: "tile_id,date,score,action,replaced_from_date".
void write_audit_csv(const std::vector<AnomalyFlag>& flags, const std::string& path);

}  // namespace aqua
