#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "conetrack/text.hpp"

namespace conetrack::plot {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 55;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    }
};

class Canvas {
public:
    Canvas(const std::string& title) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
             << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
             << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
             << escape(title) << "</text>\n";
    }

    void axes(const Range& x, const Range& y, const std::string& x_label, const std::string& y_label,
              bool x_ticks = true) {
        x_ = x;
        y_ = y;
        out_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w() << "\" height=\""
             << plot_h() << "\" fill=\"none\" stroke=\"#333\"/>\n";
        for (int i = 0; i <= 5; ++i) {
            const double v = y.lo + (y.hi - y.lo) * i / 5.0;
            const double py = sy(v);
            out_ << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w() << "\" y1=\"" << num(py)
                 << "\" y2=\"" << num(py) << "\" stroke=\"#ddd\"/>\n"
                 << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">"
                 << tick_label(v) << "</text>\n";
            if (!x_ticks) continue;
            const double u = x.lo + (x.hi - x.lo) * i / 5.0;
            out_ << "<text x=\"" << num(sx(u)) << "\" y=\"" << kTop + plot_h() + 16
                 << "\" text-anchor=\"middle\">" << tick_label(u) << "</text>\n";
        }
        out_ << "<text x=\"" << kLeft + plot_w() / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
             << escape(x_label) << "</text>\n"
             << "<text transform=\"translate(16," << kTop + plot_h() / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
             << escape(y_label) << "</text>\n";
    }

    double sx(double v) const { return kLeft + (v - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
    double sy(double v) const { return kTop + plot_h() - (v - y_.lo) / (y_.hi - y_.lo) * plot_h(); }
    static double plot_w() { return kWidth - kLeft - kRight; }
    static double plot_h() { return kHeight - kTop - kBottom; }

    std::ostringstream& raw() { return out_; }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
    Range x_;
    Range y_;
};

} // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
    Range xr, yr;
    for (const auto& s : series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    xr.finish();
    yr.finish();
    Canvas c(title);
    c.axes(xr, yr, x_label, y_label);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = kPalette[k % std::size(kPalette)];
        c.raw() << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            c.raw() << num(c.sx(s.x[i])) << ',' << num(c.sy(s.y[i])) << ' ';
        }
        c.raw() << "\"/>\n";
        const double ly = kTop + 16 + 16.0 * static_cast<double>(k);
        c.raw() << "<line x1=\"" << kWidth - 190 << "\" x2=\"" << kWidth - 170 << "\" y1=\"" << ly - 4
                << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
                << "<text x=\"" << kWidth - 164 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    }
    return c.finish();
}

std::string box_chart(const std::string& title, const std::string& y_label, const std::vector<BoxData>& boxes) {
    Range yr;
    yr.add(0.0);
    yr.add(1.0);
    for (const auto& b : boxes) {
        yr.add(b.min);
        yr.add(b.max);
    }
    yr.finish();
    Range xr;
    xr.lo = 0.0;
    xr.hi = static_cast<double>(std::max<std::size_t>(boxes.size(), 1));
    Canvas c(title);
    c.axes(xr, yr, "", y_label, false);
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        const auto& b = boxes[k];
        const double mid = c.sx(static_cast<double>(k) + 0.5);
        const double half = 0.25 * Canvas::plot_w() / xr.hi;
        auto& o = c.raw();
        o << "<line x1=\"" << num(mid) << "\" x2=\"" << num(mid) << "\" y1=\"" << num(c.sy(b.min)) << "\" y2=\""
          << num(c.sy(b.max)) << "\" stroke=\"#333\"/>\n"
          << "<rect x=\"" << num(mid - half) << "\" y=\"" << num(c.sy(b.q3)) << "\" width=\"" << num(2 * half)
          << "\" height=\"" << num(std::max(c.sy(b.q1) - c.sy(b.q3), 1.0)) << "\" fill=\""
          << kPalette[k % std::size(kPalette)] << "\" fill-opacity=\"0.35\" stroke=\"#333\"/>\n"
          << "<line x1=\"" << num(mid - half) << "\" x2=\"" << num(mid + half) << "\" y1=\""
          << num(c.sy(b.median)) << "\" y2=\"" << num(c.sy(b.median)) << "\" stroke=\"#000\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << num(mid) << "\" y=\"" << kTop + Canvas::plot_h() + 16 << "\" text-anchor=\"middle\">"
          << escape(b.label) << "</text>\n";
    }
    return c.finish();
}

std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const std::vector<std::vector<double>>& values,
                    const std::string& row_axis, const std::string& col_axis) {
    Canvas c(title);
    auto& o = c.raw();
    const double rows = static_cast<double>(std::max<std::size_t>(row_labels.size(), 1));
    const double cols = static_cast<double>(std::max<std::size_t>(col_labels.size(), 1));
    const double cw = Canvas::plot_w() / cols;
    const double ch = Canvas::plot_h() / rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = 0; j < values[i].size(); ++j) {
            const double v = std::clamp(values[i][j], 0.0, 1.0);
            const int red = static_cast<int>(std::lround(255 * (1 - v)));
            const int green = static_cast<int>(std::lround(80 + 150 * v));
            const double x = kLeft + cw * static_cast<double>(j);
            // Row 0 sits at the bottom.
            const double y = kTop + ch * (rows - 1 - static_cast<double>(i));
            o << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cw) << "\" height=\""
              << num(ch) << "\" fill=\"rgb(" << red << ',' << green << ",90)\" stroke=\"white\"/>\n"
              << "<text x=\"" << num(x + cw / 2) << "\" y=\"" << num(y + ch / 2 + 4)
              << "\" text-anchor=\"middle\">" << format_double(values[i][j]) << "</text>\n";
        }
    }
    for (std::size_t j = 0; j < col_labels.size(); ++j)
        o << "<text x=\"" << num(kLeft + cw * (static_cast<double>(j) + 0.5)) << "\" y=\""
          << kTop + Canvas::plot_h() + 16 << "\" text-anchor=\"middle\">" << escape(col_labels[j]) << "</text>\n";
    for (std::size_t i = 0; i < row_labels.size(); ++i)
        o << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(kTop + ch * (rows - 0.5 - static_cast<double>(i)) + 4)
          << "\" text-anchor=\"end\">" << escape(row_labels[i]) << "</text>\n";
    o << "<text x=\"" << kLeft + Canvas::plot_w() / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(col_axis) << "</text>\n"
      << "<text transform=\"translate(16," << kTop + Canvas::plot_h() / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(row_axis) << "</text>\n";
    return c.finish();
}

} // namespace conetrack::plot
