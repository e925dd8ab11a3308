#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "nhsta/errors.hpp"

namespace nhsta::cli {

namespace {

constexpr double kW = 720, kH = 440, kL = 70, kR = 170, kT = 40, kB = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<')
            o += "&lt;";
        else if (c == '>')
            o += "&gt;";
        else if (c == '&')
            o += "&amp;";
        else
            o += c;
    }
    return o;
}

std::vector<double> ticks(double lo, double hi, int want = 6) {
    if (hi <= lo) return {lo};
    const double raw = (hi - lo) / want;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

struct Series {
    std::string name;
    std::vector<double> x, y;
};

class Canvas {
public:
    Canvas(const std::string& title, double x0, double x1, double y0, double y1, bool logy, const std::string& xl,
           const std::string& yl)
        : x0_(x0), x1_(x1), y0_(y0), y1_(y1), logy_(logy) {
        if (x1_ <= x0_) x1_ = x0_ + 1.0;
        if (y1_ <= y0_) y1_ = y0_ + 1.0;
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
            << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        os_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os_ << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
        os_ << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << esc(xl)
            << "</text>\n";
        os_ << "<text transform=\"translate(16," << (kT + kH - kB) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
            << esc(yl) << "</text>\n";
        os_ << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\"" << kH - kT - kB
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (double t : ticks(x0_, x1_)) {
            const double px = X(t);
            os_ << "<line x1=\"" << num(px) << "\" y1=\"" << kH - kB << "\" x2=\"" << num(px) << "\" y2=\"" << kH - kB + 5
                << "\" stroke=\"black\"/><text x=\"" << num(px) << "\" y=\"" << kH - kB + 18
                << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
        }
        if (logy_) {
            for (double e = std::ceil(y0_); e <= y1_ + 1e-9; e += 1.0) {
                const double py = Yraw(e);
                os_ << "<line x1=\"" << kL - 5 << "\" y1=\"" << num(py) << "\" x2=\"" << kL << "\" y2=\"" << num(py)
                    << "\" stroke=\"black\"/><text x=\"" << kL - 8 << "\" y=\"" << num(py + 4)
                    << "\" text-anchor=\"end\">1e" << int(e) << "</text>\n";
            }
        } else {
            for (double t : ticks(y0_, y1_)) {
                const double py = Yraw(t);
                os_ << "<line x1=\"" << kL - 5 << "\" y1=\"" << num(py) << "\" x2=\"" << kL << "\" y2=\"" << num(py)
                    << "\" stroke=\"black\"/><text x=\"" << kL - 8 << "\" y=\"" << num(py + 4)
                    << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
            }
        }
    }

    double X(double x) const { return kL + (x - x0_) / (x1_ - x0_) * (kW - kL - kR); }
    double Yraw(double y) const { return kH - kB - (y - y0_) / (y1_ - y0_) * (kH - kT - kB); }
    double Y(double y) const { return Yraw(logy_ ? std::log10(y) : y); }

    void line(const Series& s, int idx) {
        const char* col = kPalette[idx % 8];
        os_ << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (logy_ && !(s.y[i] > 0.0)) continue;
            os_ << num(X(s.x[i])) << ',' << num(Y(std::clamp(s.y[i], logy_ ? std::pow(10.0, y0_) : y0_,
                                                             logy_ ? std::pow(10.0, y1_) : y1_)))
                << ' ';
        }
        os_ << "\"/>\n";
        legend(s.name, col, idx);
    }

    void cell(double x, double y, double w, double h, const char* color) {
        os_ << "<rect x=\"" << num(X(x - w / 2)) << "\" y=\"" << num(Yraw(y + h / 2)) << "\" width=\""
            << num(X(x + w / 2) - X(x - w / 2)) << "\" height=\"" << num(Yraw(y - h / 2) - Yraw(y + h / 2))
            << "\" fill=\"" << color << "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }

    void legend(const std::string& name, const char* color, int idx) {
        const double y = kT + 14 + 18 * idx;
        os_ << "<rect x=\"" << kW - kR + 12 << "\" y=\"" << y - 9 << "\" width=\"14\" height=\"10\" fill=\"" << color
            << "\"/><text x=\"" << kW - kR + 32 << "\" y=\"" << y << "\">" << esc(name) << "</text>\n";
    }

    std::string done() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    std::ostringstream os_;
    double x0_, x1_, y0_, y1_;
    bool logy_;
};

int need(const CsvTable& t, const std::string& c, PlotKind k) {
    const int i = t.column(c);
    if (i < 0) throw ConfigError(std::string("emit-plot: ") + to_string(k) + " needs a '" + c + "' column");
    return i;
}

std::string lines_plot(const std::vector<Series>& series, const std::string& title, const std::string& xl,
                       const std::string& yl, bool logy) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            if (logy && !(s.y[i] > 0.0)) continue;
            const double v = logy ? std::log10(s.y[i]) : s.y[i];
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
    if (logy) {
        y0 = std::floor(y0);
        y1 = std::ceil(y1);
        if (y1 <= y0) y1 = y0 + 1;
    } else {
        const double pad = 0.05 * (y1 - y0 > 0 ? y1 - y0 : 1.0);
        y0 -= pad;
        y1 += pad;
    }
    Canvas c(title, x0, x1, y0, y1, logy, xl, yl);
    for (std::size_t i = 0; i < series.size(); ++i) c.line(series[i], int(i));
    return c.done();
}

}  // namespace

PlotKind plot_kind_from_string(const std::string& s) {
    if (s == "probability") return PlotKind::Probability;
    if (s == "error-vs-t0") return PlotKind::ErrorVsT0;
    if (s == "rms-vs-t0") return PlotKind::RmsVsT0;
    if (s == "validity-map") return PlotKind::ValidityMap;
    throw ConfigError("emit-plot: unknown plot kind '" + s + "' (probability, error-vs-t0, rms-vs-t0, validity-map)");
}

const char* to_string(PlotKind k) {
    switch (k) {
        case PlotKind::Probability: return "probability";
        case PlotKind::ErrorVsT0: return "error-vs-t0";
        case PlotKind::RmsVsT0: return "rms-vs-t0";
        case PlotKind::ValidityMap: return "validity-map";
    }
    return "?";
}

std::string render_svg(const CsvTable& t, PlotKind kind, const std::string& title) {
    if (t.rows.empty()) throw ConfigError("emit-plot: table has no rows");
    switch (kind) {
        case PlotKind::Probability: {
            const int xc = need(t, "t", kind);
            std::vector<Series> ss;
            for (std::size_t c = 0; c < t.header.size(); ++c) {
                if (t.header[c].rfind("P_", 0) != 0) continue;
                Series s{t.header[c], {}, {}};
                for (std::size_t r = 0; r < t.rows.size(); ++r) {
                    s.x.push_back(t.number(r, xc));
                    s.y.push_back(t.number(r, int(c)));
                }
                ss.push_back(std::move(s));
            }
            if (ss.empty()) throw ConfigError("emit-plot: probability needs at least one P_* column");
            return lines_plot(ss, title, "t", "probability", false);
        }
        case PlotKind::ErrorVsT0: {
            const int xc = need(t, "t0", kind), pc = need(t, "protocol", kind), ec = need(t, "error", kind);
            std::map<std::string, Series> by;
            std::vector<std::string> order;
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                const std::string& p = t.rows[r][pc];
                if (!by.count(p)) order.push_back(p), by[p].name = p;
                by[p].x.push_back(t.number(r, xc));
                by[p].y.push_back(t.number(r, ec));
            }
            std::vector<Series> ss;
            for (const auto& k : order) ss.push_back(by[k]);
            return lines_plot(ss, title, "Gamma0 t0", "noise-averaged error", true);
        }
        case PlotKind::RmsVsT0: {
            const int xc = need(t, "t0", kind);
            std::vector<Series> ss;
            for (std::size_t c = 0; c < t.header.size(); ++c) {
                if (t.header[c].rfind("rms_", 0) != 0) continue;
                Series s{t.header[c].substr(4), {}, {}};
                for (std::size_t r = 0; r < t.rows.size(); ++r) {
                    const std::string& v = t.rows[r][c];
                    if (v.empty() || v == "nan") continue;
                    s.x.push_back(t.number(r, xc));
                    s.y.push_back(t.number(r, int(c)));
                }
                ss.push_back(std::move(s));
            }
            if (ss.empty()) throw ConfigError("emit-plot: rms-vs-t0 needs at least one rms_* column");
            return lines_plot(ss, title, "Gamma0 t0", "RMS amplitude", false);
        }
        case PlotKind::ValidityMap: {
            const int xc = need(t, "t0", kind), yc = need(t, "delta0", kind), lc = need(t, "label", kind);
            std::vector<double> xs, ys;
            std::vector<std::string> labels;
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                xs.push_back(t.number(r, xc));
                ys.push_back(t.number(r, yc));
                if (std::find(labels.begin(), labels.end(), t.rows[r][lc]) == labels.end()) labels.push_back(t.rows[r][lc]);
            }
            std::sort(labels.begin(), labels.end());
            auto spacing = [](std::vector<double> v) {
                std::sort(v.begin(), v.end());
                v.erase(std::unique(v.begin(), v.end()), v.end());
                double d = INFINITY;
                for (std::size_t i = 1; i < v.size(); ++i) d = std::min(d, v[i] - v[i - 1]);
                return std::isfinite(d) ? d : 1.0;
            };
            const double dx = spacing(xs), dy = spacing(ys);
            const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
            const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
            Canvas c(title, *xlo - dx / 2, *xhi + dx / 2, *ylo - dy / 2, *yhi + dy / 2, false, "Gamma0 t0",
                     "Delta0 / Gamma0");
            for (std::size_t r = 0; r < xs.size(); ++r) {
                const auto li = std::find(labels.begin(), labels.end(), t.rows[r][lc]) - labels.begin();
                c.cell(xs[r], ys[r], dx, dy, kPalette[li % 8]);
            }
            for (std::size_t i = 0; i < labels.size(); ++i) c.legend(labels[i], kPalette[i % 8], int(i));
            return c.done();
        }
    }
    throw ConfigError("emit-plot: unsupported kind");
}

}  // namespace nhsta::cli
