#pragma once

#include "aqua/raster.hpp"

namespace aqua {

// Elevation in meters, nodata kElevationNoData.
using DemRaster = FloatRaster;
// 1 marks pixels excluded as potential terrain shade, 0 keeps them.
using ShadeMask = ByteRaster;

// Block-minimum aggregation by an integer factor; pixel size scales by the
// factor and edge blocks may be partial. Nodata cells are ignored inside a
// block; an all-nodata block stays nodata.
DemRaster aggregate_min(const DemRaster& dem, uint32_t factor);

// Slope in degrees from Horn's 8-neighbour estimator with edge replication.
// Requires square pixels and at least 3x3 cells; nodata propagates.
FloatRaster slope_degrees(const DemRaster& dem);

// 1 where slope is strictly above the threshold. Nodata slope maps to 0.
ShadeMask threshold_slope(const FloatRaster& slope, double threshold_deg);

// Fill enclosed holes: background regions (4-connected) with no path to the
// raster border become part of the mask.
ShadeMask fill_holes(const ShadeMask& m);

// Replace each 8-connected component by its filled convex hull, repeated
// until no pixel changes so the result is a fixed point.
ShadeMask convex_hull_components(const ShadeMask& m);

// Nearest-neighbour reprojection onto a target grid in the same crs; target
// pixels whose center falls outside the source get 0.
ShadeMask project_mask(const ShadeMask& m, const GridRef& target);

// Clear mask pixels wherever `keep` is 1, for manual overrides of known-water
// areas misclassified as shade.
ShadeMask apply_override(const ShadeMask& m, const ShadeMask& keep);

struct ShadeParams {
    uint32_t aggregate_factor = 3;
    double slope_threshold_deg = 20.0;
};

// Full chain: aggregate, slope, threshold, fill, hulls, then projection onto
// `target` (pass the DEM grid scaled back up to work at mask resolution).
ShadeMask build_shade_mask(const DemRaster& dem, const ShadeParams& params,
                           const GridRef& target, const ShadeMask* override_keep = nullptr);

}  // namespace aqua
