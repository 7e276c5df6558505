#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aqua/date.hpp"
#include "aqua/raster.hpp"
#include "aqua/shade.hpp"
#include "aqua/unet.hpp"

namespace aqua {

struct SceneEntry {
    std::string scene_id;
    std::string orbit_id;
    Date date;
    std::string path;  // resolved against the manifest's directory
};

// CSV with header "scene_id,orbit_id,date,path".
std::vector<SceneEntry> read_manifest(const std::string& path);

struct PredictParams {
    uint32_t tile = 4224;
    uint32_t border = 128;
};

// Run the network over a full scene: pad, tile with overlapping borders,
// infer, crop each tile's border away and stitch the cores, keeping the
// maximum probability where coverage still overlaps. Input nodata comes back
// as nodata probability.
ProbabilityRaster predict_scene(const BackscatterRaster& scene, const UNet<float>& model,
                                const PredictParams& params);

// One mosaic contribution: a scene mask and its index for provenance.
struct Contribution {
    const MaskRaster* mask = nullptr;
    float source_index = 0.0f;
};

inline constexpr float kProvenanceGapFill = -1.0f;
inline constexpr float kProvenanceNoData = -9999.0f;

// Pixel-wise maximum with water(1) > land(0) > nodata; provenance records
// the first contributor (in input order) that supplied the winning value.
MaskRaster composite(const std::vector<Contribution>& contributions, const GridRef& target,
                     FloatRaster* provenance = nullptr);

// A fixed-cadence stack of mosaics on one grid with per-pixel provenance.
struct MosaicSeries {
    GridRef grid;
    Date epoch_start;
    int cadence_days = 12;
    std::vector<WaterMask> mosaics;        // one per window, dates strictly increasing
    std::vector<FloatRaster> provenance;   // parallel to mosaics
};

// Index of the cadence window containing the date.
int window_index(Date epoch_start, int cadence_days, Date d);

// Forward fill along time: a nodata pixel takes its value from the previous
// mosaic; provenance marks the copy. Leading nodata stays untouched.
void gap_fill(MosaicSeries& series);

// Percentage of valid observations that saw water; all-nodata history stays
// nodata (kPercentNoData).
FloatRaster occurrence(const MosaicSeries& series);

// Percentage of calendar years with at least one valid observation that saw
// water in at least one of them.
FloatRaster recurrence(const MosaicSeries& series);

// Force masked (shade = 1) pixels to land. Grids must match.
void apply_shade(MaskRaster& mask, const ShadeMask& shade);

using PredictLog = void (*)(const std::string&, void*);

struct BuildParams {
    PredictParams predict;
    int cadence_days = 12;
    std::optional<Date> epoch_start;  // defaults to the first scene's window
    double threshold = 0.5;
    int workers = 1;
};

// Full chain from manifest to gap-filled series: predict every scene,
// threshold, composite per cadence window on the union grid, apply the shade
// mask if given, then gap-fill. Windows without any scene stay nodata until
// the fill pass.
MosaicSeries build_series(const std::vector<SceneEntry>& scenes, const UNet<float>& model,
                          const ShadeMask* shade, const BuildParams& params,
                          PredictLog log = nullptr, void* log_arg = nullptr);

}  // namespace aqua
