#include "aqua/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace aqua {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

ConfusionCounts confusion(const MaskRaster& pred, const MaskRaster& ref) {
    if (pred.grid() != ref.grid())
        throw std::invalid_argument("confusion requires matching grids");
    ConfusionCounts c;
    for (uint32_t y = 0; y < pred.height(); ++y)
        for (uint32_t x = 0; x < pred.width(); ++x) {
            const uint8_t p = pred.at(x, y), r = ref.at(x, y);
            if (p == kMaskNoData || r == kMaskNoData) continue;
            if (p == 1 && r == 1)
                ++c.tp;
            else if (p == 1 && r == 0)
                ++c.fp;
            else if (p == 0 && r == 1)
                ++c.fn;
            else
                ++c.tn;
        }
    return c;
}

Prf prf(const ConfusionCounts& c) {
    if (c.tp + c.fp == 0)
        throw std::invalid_argument("precision undefined: no positive predictions");
    if (c.tp + c.fn == 0)
        throw std::invalid_argument("recall undefined: no positive reference pixels");
    Prf out;
    out.precision = double(c.tp) / double(c.tp + c.fp);
    out.recall = double(c.tp) / double(c.tp + c.fn);
    if (out.precision + out.recall == 0.0)
        throw std::invalid_argument("f1 undefined: precision and recall are both zero");
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

std::vector<ClassLabel> read_class_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open class label table " + path);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "code,low_label,high_label")
        throw std::runtime_error("class label table " + path +
                                 " must start with 'code,low_label,high_label'");
    std::vector<ClassLabel> out;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 3 fields");
        ClassLabel cl;
        try {
            cl.code = std::stoi(fields[0]);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad class code '" +
                                     fields[0] + "'");
        }
        cl.low_label = fields[1];
        cl.high_label = fields[2];
        out.push_back(std::move(cl));
    }
    return out;
}

std::vector<CrossTabRow> crosstab(const MaskRaster& selection, const ByteRaster& classes) {
    if (selection.grid() != classes.grid())
        throw std::invalid_argument("crosstab requires matching grids");
    std::map<int, int64_t> counts;
    int64_t total = 0;
    for (uint32_t y = 0; y < selection.height(); ++y)
        for (uint32_t x = 0; x < selection.width(); ++x) {
            if (selection.at(x, y) != 1) continue;
            const uint8_t cls = classes.at(x, y);
            if (cls == classes.nodata()) continue;
            ++counts[cls];
            ++total;
        }
    std::vector<CrossTabRow> out;
    for (const auto& [code, count] : counts)
        out.push_back({code, count, total > 0 ? 100.0 * double(count) / double(total) : 0.0});
    return out;
}

AreaSeries area_series(const std::vector<WaterMask>& masks) {
    if (masks.empty()) throw std::invalid_argument("area series needs at least one mask");
    AreaSeries s;
    const GridRef& g = masks.front().raster.grid();
    s.pixel_area_m2 = g.pixel_size_x * g.pixel_size_y;
    for (const WaterMask& wm : masks) {
        if (wm.raster.grid().pixel_size_x != g.pixel_size_x ||
            wm.raster.grid().pixel_size_y != g.pixel_size_y)
            throw std::invalid_argument("area series masks must share a resolution");
        int64_t water = 0;
        for (uint8_t v : wm.raster.values())
            if (v == 1) ++water;
        s.dates.push_back(wm.date);
        s.area_km2.push_back(double(water) * s.pixel_area_m2 / 1e6);
    }
    return s;
}

AreaStats area_stats(const AreaSeries& s) {
    if (s.dates.empty()) throw std::invalid_argument("area stats over an empty series");
    AreaStats st;
    size_t imin = 0, imax = 0;
    for (size_t i = 1; i < s.area_km2.size(); ++i) {
        if (s.area_km2[i] < s.area_km2[imin]) imin = i;
        if (s.area_km2[i] > s.area_km2[imax]) imax = i;
    }
    st.min_km2 = s.area_km2[imin];
    st.max_km2 = s.area_km2[imax];
    st.min_date = s.dates[imin];
    st.max_date = s.dates[imax];
    std::vector<double> sorted = s.area_km2;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    st.median_km2 = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    if (st.max_km2 == 0.0)
        throw std::invalid_argument("min/max ratio undefined: maximum area is zero");
    st.min_over_max_pct = 100.0 * st.min_km2 / st.max_km2;
    return st;
}

GaugeSeries read_gauge_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gauge table " + path);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "date,level_m")
        throw std::runtime_error("gauge table " + path + " must start with 'date,level_m'");
    GaugeSeries out;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 2 fields");
        out.dates.push_back(Date::parse(fields[0]));
        try {
            out.level_m.push_back(std::stod(fields[1]));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad level '" +
                                     fields[1] + "'");
        }
    }
    return out;
}

Correlation correlate(const AreaSeries& areas, const GaugeSeries& gauge, int max_day_gap) {
    std::vector<double> xs, ys;
    for (size_t i = 0; i < areas.dates.size(); ++i) {
        int best_gap = max_day_gap + 1;
        size_t best = 0;
        bool found = false;
        for (size_t j = 0; j < gauge.dates.size(); ++j) {
            const int gap = std::abs(gauge.dates[j] - areas.dates[i]);
            // Strict < keeps the earlier reading when two are equally close.
            if (gap <= max_day_gap && gap < best_gap) {
                best_gap = gap;
                best = j;
                found = true;
            }
        }
        if (!found) continue;
        xs.push_back(areas.area_km2[i]);
        ys.push_back(gauge.level_m[best]);
    }
    if (xs.size() < 3)
        throw std::invalid_argument("correlation needs at least three matched pairs, found " +
                                    std::to_string(xs.size()));
    const size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("correlation undefined: a series has zero variance");
    return {sxy / std::sqrt(sxx * syy), int(n)};
}

}  // namespace aqua
