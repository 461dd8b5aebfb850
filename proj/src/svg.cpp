#include "pgd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "pgd/errors.hpp"

namespace pgd {
namespace svg {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 160.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct AxisRange {
    double lo = 0.0;
    double hi = 1.0;
};

double transform(double v, bool log_scale) { return log_scale ? std::log10(v) : v; }

bool usable(double v, bool log_scale) {
    return std::isfinite(v) && (!log_scale || v > 0.0);
}

std::vector<double> ticks(const AxisRange& r, int count) {
    std::vector<double> out;
    if (!(r.hi > r.lo)) {
        out.push_back(r.lo);
        return out;
    }
    for (int i = 0; i <= count; ++i)
        out.push_back(r.lo + (r.hi - r.lo) * static_cast<double>(i) / count);
    return out;
}

} // namespace

std::string render(const csv::Data& data, const ChartSpec& spec) {
    const auto xs_raw = data.numeric_column(spec.x_column);
    std::vector<std::vector<std::optional<double>>> series;
    series.reserve(spec.y_columns.size());
    for (const auto& name : spec.y_columns) series.push_back(data.numeric_column(name));

    AxisRange xr{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
    AxisRange yr = xr;
    for (std::size_t i = 0; i < xs_raw.size(); ++i) {
        if (!xs_raw[i] || !usable(*xs_raw[i], spec.log_x)) continue;
        for (const auto& col : series) {
            if (!col[i] || !usable(*col[i], spec.log_y)) continue;
            const double tx = transform(*xs_raw[i], spec.log_x);
            const double ty = transform(*col[i], spec.log_y);
            xr.lo = std::min(xr.lo, tx);
            xr.hi = std::max(xr.hi, tx);
            yr.lo = std::min(yr.lo, ty);
            yr.hi = std::max(yr.hi, ty);
        }
    }
    if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) {
        xr = {0.0, 1.0};
        yr = {0.0, 1.0};
    }
    if (xr.hi <= xr.lo) xr.hi = xr.lo + 1.0;
    if (yr.hi <= yr.lo) yr.hi = yr.lo + 1.0;
    const double pad_y = 0.05 * (yr.hi - yr.lo);
    yr.lo -= pad_y;
    yr.hi += pad_y;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double tx) { return kMarginLeft + (tx - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double ty) {
        return kHeight - kMarginBottom - (ty - yr.lo) / (yr.hi - yr.lo) * plot_h;
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << spec.title << "</text>\n";

    // axes
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
        << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";

    for (const double t : ticks(xr, 5)) {
        const double x = px(t);
        out << "<line x1=\"" << x << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\"" << x
            << "\" y2=\"" << kHeight - kMarginBottom + 5 << "\" stroke=\"black\"/>\n";
        const double label = spec.log_x ? std::pow(10.0, t) : t;
        out << "<text x=\"" << x << "\" y=\"" << kHeight - kMarginBottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(label) << "</text>\n";
    }
    for (const double t : ticks(yr, 5)) {
        const double y = py(t);
        out << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kMarginLeft
            << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
        const double label = spec.log_y ? std::pow(10.0, t) : t;
        out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(label) << "</text>\n";
    }
    out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << spec.x_column << (spec.log_x ? " (log)" : "") << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < xs_raw.size(); ++i) {
            if (!xs_raw[i] || !series[s][i]) continue;
            if (!usable(*xs_raw[i], spec.log_x) || !usable(*series[s][i], spec.log_y)) continue;
            pts << fmt(px(transform(*xs_raw[i], spec.log_x))) << ","
                << fmt(py(transform(*series[s][i], spec.log_y))) << " ";
        }
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        out << "<text x=\"" << kWidth - kMarginRight + 10 << "\" y=\""
            << kMarginTop + 16.0 * static_cast<double>(s)
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
            << spec.y_columns[s] << (spec.log_y ? " (log)" : "") << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void render_file(const std::string& csv_path, const ChartSpec& spec,
                 const std::string& svg_path) {
    const csv::Data data = csv::read_file(csv_path);
    std::ofstream out(svg_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Config, "cannot write file: " + svg_path);
    out << render(data, spec);
}

} // namespace svg
} // namespace pgd
