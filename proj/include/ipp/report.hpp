#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "ipp/calibrate.hpp"
#include "ipp/errors.hpp"
#include "ipp/text.hpp"

namespace ipp {

namespace detail {
inline std::string csvCell(double v) {
    return std::isnan(v) ? std::string{} : formatDouble(v);
}
} // namespace detail

// Per-point report. Optional columns are written empty when the series was
// not produced by the invoking command.
struct PointReport {
    std::vector<std::int64_t> ids;
    std::vector<double> rawScore;
    std::vector<double> normalizedScore;
    std::vector<double> plattEstimate;   // may be empty
    std::vector<double> impliedEstimate; // may be empty
    std::vector<double> isoFit;
    std::vector<int> labels; // +1/-1
};

inline void writePointReportCsv(const std::string& path, const PointReport& r) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "id,rawScore,normalizedScore,plattEstimate,impliedEstimate,isoFit,label\n";
    const std::size_t n = r.ids.size();
    auto cell = [&](const std::vector<double>& col, std::size_t i) {
        return col.empty() ? std::string{} : detail::csvCell(col[i]);
    };
    for (std::size_t i = 0; i < n; ++i) {
        out << r.ids[i] << ',' << cell(r.rawScore, i) << ',' << cell(r.normalizedScore, i)
            << ',' << cell(r.plattEstimate, i) << ',' << cell(r.impliedEstimate, i) << ','
            << cell(r.isoFit, i) << ',' << r.labels[i] << '\n';
    }
}

inline void writeRocCsv(const std::string& path, const RocCurve& roc) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "falsePositiveRate,truePositiveRate\n";
    for (const auto& [fpr, tpr] : roc.points)
        out << formatDouble(fpr) << ',' << formatDouble(tpr) << '\n';
}

inline void writeBinsCsv(const std::string& path, std::span<const BinPoint> bins) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "binCenter,meanScore,empiricalPositiveRate,binCount\n";
    for (const auto& b : bins)
        out << formatDouble(b.binCenter) << ',' << detail::csvCell(b.meanScore) << ','
            << detail::csvCell(b.empiricalPositiveRate) << ',' << b.binCount << '\n';
}

inline void writeIsotonicCsv(const std::string& path, const StepFunction& iso) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "intervalStart,value\n";
    out << "-inf," << formatDouble(iso.values.front()) << '\n';
    for (std::size_t k = 0; k < iso.breakpoints.size(); ++k)
        out << formatDouble(iso.breakpoints[k]) << ','
            << formatDouble(iso.values[k + 1]) << '\n';
}

// --- cosmetic SVG plots (the CSV files above carry the same data) -------

namespace svg {

constexpr double kSize = 440.0;
constexpr double kMargin = 50.0;

inline double px(double v) { return kMargin + v * (kSize - 2.0 * kMargin); }
inline double py(double v) { return kSize - kMargin - v * (kSize - 2.0 * kMargin); }

inline void header(std::ofstream& out, const std::string& title) {
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kSize << "' height='"
        << kSize << "' viewBox='0 0 " << kSize << ' ' << kSize << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kSize / 2 << "' y='24' text-anchor='middle' font-size='15'>"
        << title << "</text>\n";
    out << "<rect x='" << px(0) << "' y='" << py(1) << "' width='" << px(1) - px(0)
        << "' height='" << py(0) - py(1) << "' fill='none' stroke='black'/>\n";
    for (int tick = 0; tick <= 10; tick += 2) {
        const double v = tick / 10.0;
        out << "<text x='" << px(v) << "' y='" << py(0) + 18
            << "' text-anchor='middle' font-size='10'>" << v << "</text>\n";
        out << "<text x='" << px(0) - 8 << "' y='" << py(v) + 3
            << "' text-anchor='end' font-size='10'>" << v << "</text>\n";
    }
}

inline void polyline(std::ofstream& out,
                     const std::vector<std::pair<double, double>>& pts,
                     const std::string& color, const std::string& dash = {}) {
    out << "<polyline fill='none' stroke='" << color << "'";
    if (!dash.empty()) out << " stroke-dasharray='" << dash << "'";
    out << " points='";
    for (const auto& [x, y] : pts) out << px(x) << ',' << py(y) << ' ';
    out << "'/>\n";
}

} // namespace svg

// Reliability plot: isotonic step function, bin dots, and the diagonal.
inline void writeReliabilitySvg(const std::string& path, const std::string& title,
                                const StepFunction& iso, std::span<const BinPoint> bins) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    svg::header(out, title);
    svg::polyline(out, {{0.0, 0.0}, {1.0, 1.0}}, "#999999", "4,4");

    std::vector<std::pair<double, double>> steps;
    double x = 0.0;
    for (std::size_t k = 0; k < iso.values.size(); ++k) {
        const double xEnd = k < iso.breakpoints.size()
                                ? std::clamp(iso.breakpoints[k], 0.0, 1.0)
                                : 1.0;
        steps.emplace_back(x, iso.values[k]);
        steps.emplace_back(xEnd, iso.values[k]);
        x = xEnd;
    }
    svg::polyline(out, steps, "#1f4e9c");

    for (const auto& b : bins) {
        if (b.binCount == 0) continue;
        out << "<circle cx='" << svg::px(b.binCenter) << "' cy='"
            << svg::py(b.empiricalPositiveRate) << "' r='4' fill='#c23b22'/>\n";
    }
    out << "</svg>\n";
}

struct RocSeries {
    std::string name;
    const RocCurve* curve;
    std::string color;
    std::string dash;
};

inline void writeRocSvg(const std::string& path, const std::string& title,
                        std::span<const RocSeries> series) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    svg::header(out, title);
    svg::polyline(out, {{0.0, 0.0}, {1.0, 1.0}}, "#999999", "4,4");
    double legendY = 40.0;
    for (const auto& s : series) {
        svg::polyline(out, s.curve->points, s.color, s.dash);
        out << "<text x='" << svg::px(0.62) << "' y='" << legendY + svg::py(1.0)
            << "' font-size='11' fill='" << s.color << "'>" << s.name << " (AUC "
            << formatDouble(std::round(s.curve->auc * 1000.0) / 1000.0) << ")</text>\n";
        legendY += 14.0;
    }
    out << "</svg>\n";
}

} // namespace ipp
