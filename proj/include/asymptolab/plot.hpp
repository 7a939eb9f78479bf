#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "experiments.hpp"
#include "io.hpp"

namespace asymptolab {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct GuideLine {
    std::string label;
    double slope = 0.0;
    bool with_log = false;
};

namespace svg {

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 440.0;
inline constexpr double kLeft = 70.0;
inline constexpr double kRight = 20.0;
inline constexpr double kTop = 30.0;
inline constexpr double kBottom = 50.0;
inline const std::vector<std::string> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

inline std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

inline std::string num(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

class Canvas {
public:
    Canvas(double x0, double x1, double y0, double y1, bool logx, bool logy)
        : logx_(logx), logy_(logy), x0_(tx(x0)), x1_(tx(x1)), y0_(ty(y0)), y1_(ty(y1)) {
        if (x1_ == x0_) x1_ = x0_ + 1.0;
        if (y1_ == y0_) y1_ = y0_ + 1.0;
    }

    double px(double x) const { return kLeft + (tx(x) - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (ty(y) - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

    std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color,
                         const std::string& cls, const std::string& dash = "") const {
        std::ostringstream os;
        os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (!dash.empty()) os << " stroke-dasharray=\"" << dash << "\"";
        os << " points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if ((logx_ && xs[i] <= 0.0) || (logy_ && ys[i] <= 0.0)) continue;
            os << num(px(xs[i])) << ',' << num(py(ys[i])) << ' ';
        }
        os << "\"/>\n";
        return os.str();
    }

    std::string frame(const std::string& title, const std::string& xlabel, const std::string& ylabel) const {
        std::ostringstream os;
        const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
        os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w << "\" height=\"" << h
           << "\" fill=\"none\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
           << "</text>\n";
        os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
           << escape(xlabel) << "</text>\n";
        os << "<text x=\"14\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
           << kHeight / 2 << ")\">" << escape(ylabel) << "</text>\n";
        os << ticks(true) << ticks(false);
        return os.str();
    }

private:
    double tx(double x) const { return logx_ ? std::log10(x) : x; }
    double ty(double y) const { return logy_ ? std::log10(y) : y; }

    std::string ticks(bool xaxis) const {
        std::ostringstream os;
        const bool lg = xaxis ? logx_ : logy_;
        const double lo = xaxis ? x0_ : y0_, hi = xaxis ? x1_ : y1_;
        std::vector<double> marks;
        if (lg) {
            for (double e = std::ceil(lo); e <= hi; e += 1.0) marks.push_back(e);
        } else {
            const double step = std::pow(10.0, std::floor(std::log10((hi - lo) / 4.0)));
            for (double v = std::ceil(lo / step) * step; v <= hi; v += step) marks.push_back(v);
        }
        for (double m : marks) {
            const double value = lg ? std::pow(10.0, m) : m;
            std::ostringstream label;
            if (lg) {
                label << "1e" << static_cast<int>(m);
            } else {
                label << std::setprecision(3) << value;
            }
            if (xaxis) {
                const double x = px(value);
                os << "<line x1=\"" << num(x) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << num(x) << "\" y2=\""
                   << kHeight - kBottom + 5 << "\" stroke=\"#333\"/>\n";
                os << "<text x=\"" << num(x) << "\" y=\"" << kHeight - kBottom + 18
                   << "\" text-anchor=\"middle\" font-size=\"10\">" << label.str() << "</text>\n";
            } else {
                const double y = py(value);
                os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
                   << "\" stroke=\"#333\"/>\n";
                os << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 3)
                   << "\" text-anchor=\"end\" font-size=\"10\">" << label.str() << "</text>\n";
            }
        }
        return os.str();
    }

    bool logx_, logy_;
    double x0_, x1_, y0_, y1_;
};

inline std::string document(const std::string& body) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body << "</svg>\n";
    return os.str();
}

inline std::string legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ostringstream os;
    double y = kTop + 16;
    for (const auto& [label, color] : entries) {
        os << "<line x1=\"" << kWidth - 190 << "\" y1=\"" << y - 4 << "\" x2=\"" << kWidth - 170 << "\" y2=\"" << y - 4
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << kWidth - 165 << "\" y=\"" << y << "\" font-size=\"11\">" << escape(label) << "</text>\n";
        y += 15;
    }
    return os.str();
}

}  // namespace svg

/// Log-log plot of normalized remainders with one dashed guide per branch,
/// anchored at the last sample of the first curve.
inline std::string remainder_svg(const std::string& title, const std::vector<Series>& curves,
                                 const std::vector<GuideLine>& guides) {
    double x0 = kInf, x1 = 0.0, y0 = kInf, y1 = 0.0;
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (c.x[i] <= 0.0 || c.y[i] <= 0.0) continue;
            x0 = std::min(x0, c.x[i]);
            x1 = std::max(x1, c.x[i]);
            y0 = std::min(y0, c.y[i]);
            y1 = std::max(y1, c.y[i]);
        }
    }
    if (!(x1 > 0.0)) throw MissingData("remainder_svg: no positive samples");
    y0 /= 2.0;
    y1 *= 2.0;
    const svg::Canvas cv(x0, x1, y0, y1, true, true);
    std::ostringstream body;
    body << cv.frame(title, "t", "normalized remainder");
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& color = svg::kPalette[i % svg::kPalette.size()];
        body << cv.polyline(curves[i].x, curves[i].y, color, "curve");
        entries.emplace_back(curves[i].label, color);
    }
    std::size_t anchor = 0;
    while (anchor < curves.size() && curves[anchor].x.empty()) ++anchor;
    for (std::size_t g = 0; g < guides.size() && anchor < curves.size(); ++g) {
        const auto& ref = curves[anchor];
        const double ta = ref.x.back(), ya = ref.y.back();
        auto shape = [&](double t) {
            double v = std::pow(t / ta, guides[g].slope);
            if (guides[g].with_log) v *= std::log(t) / std::log(ta);
            return ya * v;
        };
        std::vector<double> xs, ys;
        for (double t = x0; t <= x1 * (1 + 1e-12); t *= std::pow(x1 / x0, 1.0 / 32.0)) {
            const double v = shape(t);
            if (v <= y0 || v >= y1) continue;
            xs.push_back(t);
            ys.push_back(v);
        }
        body << cv.polyline(xs, ys, "#555", "guide", "6 4");
        const double lx = cv.px(x0 * std::pow(x1 / x0, 0.55));
        body << "<text class=\"guide-label\" x=\"" << svg::num(lx) << "\" y=\"" << svg::num(svg::kHeight - svg::kBottom - 10 - 14.0 * g)
             << "\" font-size=\"11\" fill=\"#555\">slope " << svg::escape(guides[g].label) << "</text>\n";
    }
    body << svg::legend(entries);
    return svg::document(body.str());
}

/// Cross-section plot (1D fields, or the x-axis line through the origin in 2D).
inline std::string section_svg(const std::string& title, const std::vector<std::pair<std::string, Field>>& fields) {
    std::vector<Series> series;
    double peak = 0.0;
    for (const auto& [label, f] : fields) peak = std::max(peak, f.max_abs());
    double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
    for (const auto& [label, f] : fields) {
        const auto& g = f.grid();
        const std::size_t n = g.points_per_axis();
        const std::size_t row = g.dim() == 2 ? n / 2 : 0;
        Series s;
        s.label = label;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i = g.dim() == 2 ? j * n + row : j;
            const double x = g.coordinate(j);
            s.x.push_back(x);
            s.y.push_back(f[i]);
            if (std::abs(f[i]) > 1e-4 * peak) {
                xlo = std::min(xlo, x);
                xhi = std::max(xhi, x);
            }
            ylo = std::min(ylo, f[i]);
            yhi = std::max(yhi, f[i]);
        }
        series.push_back(std::move(s));
    }
    if (!(xhi > xlo)) {
        xlo = -1.0;
        xhi = 1.0;
    }
    if (!(yhi > ylo)) {
        ylo -= 1.0;
        yhi += 1.0;
    }
    const double pad = 0.05 * (yhi - ylo);
    const svg::Canvas cv(xlo, xhi, ylo - pad, yhi + pad, false, false);
    std::ostringstream body;
    body << cv.frame(title, "x", "value");
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::vector<double> xs, ys;
        for (std::size_t j = 0; j < series[i].x.size(); ++j) {
            if (series[i].x[j] < xlo || series[i].x[j] > xhi) continue;
            xs.push_back(series[i].x[j]);
            ys.push_back(series[i].y[j]);
        }
        const auto& color = svg::kPalette[i % svg::kPalette.size()];
        body << cv.polyline(xs, ys, color, "curve", i % 2 ? "4 3" : "");
        entries.emplace_back(series[i].label, color);
    }
    body << svg::legend(entries);
    return svg::document(body.str());
}

struct PlotResult {
    std::vector<std::string> files;
    std::vector<std::string> notes;
};

/// Renders remainder.svg and section_*.svg for a finished run directory.
inline PlotResult plot_run(const std::filesystem::path& dir) {
    const auto m = load_manifest(dir);
    PlotResult out;
    const auto name = m.at("name").get<std::string>();
    std::vector<GuideLine> guides;
    for (const auto& g : m.at("guides")) {
        guides.push_back({g.at("label").get<std::string>(), g.at("slope").get<double>(), g.at("with_log").get<bool>()});
    }
    const bool has_curves = !m.at("q_list").empty() && std::filesystem::exists(dir / "remainder.csv");
    if (!has_curves) {
        out.notes.push_back("q_list is empty: no remainder plot");
    } else {
        std::map<std::string, Series> by_q;
        std::vector<std::string> order;
        std::istringstream in(read_file(dir / "remainder.csv"));
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::vector<std::string> cols;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) cols.push_back(cell);
            if (cols.size() < 5) throw MissingData("remainder.csv: malformed row");
            if (!by_q.count(cols[1])) {
                order.push_back(cols[1]);
                by_q[cols[1]].label = "q=" + cols[1];
            }
            by_q[cols[1]].x.push_back(std::stod(cols[2]));
            by_q[cols[1]].y.push_back(std::stod(cols[4]));
        }
        std::vector<Series> curves;
        for (const auto& q : order) curves.push_back(by_q[q]);
        write_atomic(dir / "remainder.svg", remainder_svg(name + ": normalized remainder", curves, guides));
        out.files.push_back("remainder.svg");
    }
    std::map<double, std::vector<std::pair<std::string, Field>>> by_t;
    for (const auto& s : m.at("sections")) {
        const double t = s.at("t").get<double>();
        by_t[t].emplace_back(s.at("label").get<std::string>(), import_field(dir, s.at("stem").get<std::string>()));
    }
    for (const auto& [t, fields] : by_t) {
        std::ostringstream file;
        file << "section_t" << t << ".svg";
        std::ostringstream title;
        title << name << ": cross-section at t=" << t;
        write_atomic(dir / file.str(), section_svg(title.str(), fields));
        out.files.push_back(file.str());
    }
    return out;
}

}  // namespace asymptolab
