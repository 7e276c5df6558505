#include "aqua/qa.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace aqua {

std::vector<TileRef> tile_grid(const GridRef& grid, uint32_t tile_size) {
    if (tile_size == 0) throw std::invalid_argument("tile size must be positive");
    std::vector<TileRef> out;
    for (uint32_t row0 = 0, tr = 0; row0 < grid.height; row0 += tile_size, ++tr)
        for (uint32_t col0 = 0, tc = 0; col0 < grid.width; col0 += tile_size, ++tc) {
            TileRef t;
            t.tile_col = tc;
            t.tile_row = tr;
            t.col0 = col0;
            t.row0 = row0;
            t.width = std::min(tile_size, grid.width - col0);
            t.height = std::min(tile_size, grid.height - row0);
            out.push_back(t);
        }
    return out;
}

namespace {

int64_t support_of(const FloatRaster& occurrence, const TileRef& t) {
    int64_t support = 0;
    for (uint32_t y = 0; y < t.height; ++y)
        for (uint32_t x = 0; x < t.width; ++x) {
            const float v = occurrence.at(t.col0 + x, t.row0 + y);
            if (v != occurrence.nodata() && v > 0.0f) ++support;
        }
    return support;
}

}  // namespace

std::vector<TileRef> select_river_tiles(const FloatRaster& occurrence, uint32_t tile_size,
                                        double min_water_frac) {
    std::vector<TileRef> out;
    for (const TileRef& t : tile_grid(occurrence.grid(), tile_size)) {
        const double area = double(t.width) * double(t.height);
        if (double(support_of(occurrence, t)) > min_water_frac * area) out.push_back(t);
    }
    return out;
}

TileWaterSeries water_series(const MosaicSeries& series, const FloatRaster& occurrence,
                             const TileRef& tile) {
    TileWaterSeries s;
    s.tile = tile;
    s.support_size = support_of(occurrence, tile);
    for (const WaterMask& wm : series.mosaics) {
        int64_t count = 0;
        for (uint32_t y = 0; y < tile.height; ++y)
            for (uint32_t x = 0; x < tile.width; ++x)
                if (wm.raster.at(tile.col0 + x, tile.row0 + y) == 1) ++count;
        s.dates.push_back(wm.date);
        s.counts.push_back(count);
    }
    return s;
}

std::vector<AnomalyFlag> detect_anomalies(const TileWaterSeries& s, const QaParams& params) {
    if (s.dates.size() < 3)
        throw std::invalid_argument("anomaly detection needs at least three dates");
    if (s.support_size <= 0) return {};

    // A river that genuinely dries up produces several legitimately low
    // dates; flagging those would erase the drought signal.
    int dry_dates = 0;
    for (int64_t c : s.counts)
        if (double(c) < params.dry_frac * double(s.support_size)) ++dry_dates;
    if (dry_dates >= params.min_dry_dates) return {};

    std::vector<int64_t> sorted = s.counts;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    const double median =
        n % 2 == 1 ? double(sorted[n / 2]) : 0.5 * double(sorted[n / 2 - 1] + sorted[n / 2]);

    struct Candidate {
        size_t index;
        double score;
    };
    std::vector<Candidate> candidates;
    for (size_t i = 0; i < s.counts.size(); ++i) {
        const double score = std::max(0.0, (median - double(s.counts[i])) / double(s.support_size));
        if (score > 0.0) candidates.push_back({i, score});
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return s.dates[a.index] < s.dates[b.index];
    });
    if (int(candidates.size()) > params.top_k) candidates.resize(size_t(params.top_k));

    std::vector<AnomalyFlag> out;
    for (const Candidate& c : candidates) {
        AnomalyFlag f;
        f.tile_id = s.tile.id();
        f.date = s.dates[c.index];
        f.score = c.score;
        f.action = QaAction::flagged;
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<AnomalyFlag> run_qa(MosaicSeries& series, const FloatRaster& occurrence,
                                const QaParams& params, QaMode mode) {
    if (occurrence.grid() != series.grid)
        throw std::invalid_argument("occurrence grid does not match the series grid");
    std::vector<AnomalyFlag> all;
    for (const TileRef& tile : select_river_tiles(occurrence, params.tile_size,
                                                  params.min_water_frac)) {
        const TileWaterSeries ws = water_series(series, occurrence, tile);
        std::vector<AnomalyFlag> flags = detect_anomalies(ws, params);
        if (mode == QaMode::auto_correct && !flags.empty()) {
            std::vector<bool> is_flagged(series.mosaics.size(), false);
            std::map<int32_t, size_t> date_to_index;
            for (size_t i = 0; i < series.mosaics.size(); ++i)
                date_to_index[series.mosaics[i].date.days()] = i;
            for (const AnomalyFlag& f : flags)
                is_flagged[date_to_index.at(f.date.days())] = true;

            // Chronological order so the audit trail reads naturally; each
            // flagged date copies from an unflagged earlier one, so sources
            // are never themselves rewritten.
            std::sort(flags.begin(), flags.end(),
                      [](const AnomalyFlag& a, const AnomalyFlag& b) { return a.date < b.date; });
            for (AnomalyFlag& f : flags) {
                const size_t idx = date_to_index.at(f.date.days());
                size_t src = idx;
                bool found = false;
                for (size_t j = idx; j-- > 0;) {
                    if (!is_flagged[j]) {
                        src = j;
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    f.action = QaAction::dismissed;
                    continue;
                }
                MaskRaster& dst = series.mosaics[idx].raster;
                const MaskRaster& from = series.mosaics[src].raster;
                FloatRaster& dprov = series.provenance[idx];
                const FloatRaster& fprov = series.provenance[src];
                for (uint32_t y = 0; y < tile.height; ++y)
                    for (uint32_t x = 0; x < tile.width; ++x) {
                        dst.at(tile.col0 + x, tile.row0 + y) =
                            from.at(tile.col0 + x, tile.row0 + y);
                        dprov.at(tile.col0 + x, tile.row0 + y) =
                            fprov.at(tile.col0 + x, tile.row0 + y);
                    }
                f.action = QaAction::corrected;
                f.has_replacement = true;
                f.replaced_from = series.mosaics[src].date;
            }
        }
        all.insert(all.end(), flags.begin(), flags.end());
    }
    return all;
}

const char* to_string(QaAction a) {
    switch (a) {
        case QaAction::flagged: return "flagged";
        case QaAction::corrected: return "corrected";
        case QaAction::dismissed: return "dismissed";
    }
    return "unknown";
}

void write_audit_csv(const std::vector<AnomalyFlag>& flags, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "tile_id,date,score,action,replaced_from_date\n";
    char buf[64];
    for (const AnomalyFlag& f : flags) {
        std::snprintf(buf, sizeof buf, "%.6f", f.score);
        out << f.tile_id << ',' << f.date.to_string() << ',' << buf << ','
            << to_string(f.action) << ',' << (f.has_replacement ? f.replaced_from.to_string() : "")
            << '\n';
    }
    if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace aqua
