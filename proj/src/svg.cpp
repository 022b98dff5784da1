#include "mirspec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace mirspec {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 56.0;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

struct SvgFile {
    std::ofstream out;

    explicit SvgFile(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw Error("io", "cannot open for writing: " + path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
            << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
            << kHeight << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }
    ~SvgFile() { out << "</svg>\n"; }

    void line(double x1, double y1, double x2, double y2,
              const std::string& stroke, double width = 1.0) {
        out << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\""
            << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke
            << "\" stroke-width=\"" << num(width) << "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill) {
        out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\""
            << num(r) << "\" fill=\"" << fill << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke) {
        out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
            << num(w) << "\" height=\"" << num(h) << "\" fill=\"" << fill
            << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 12,
              const std::string& anchor = "start") {
        out << "<text x=\"" << num(x) << "\" y=\"" << num(y)
            << "\" font-size=\"" << size << "\" font-family=\"sans-serif\""
            << " text-anchor=\"" << anchor << "\">" << s << "</text>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& stroke, double width = 1.5) {
        out << "<polyline fill=\"none\" stroke=\"" << stroke
            << "\" stroke-width=\"" << num(width) << "\" points=\"";
        for (const auto& [x, y] : pts) out << num(x) << "," << num(y) << " ";
        out << "\"/>\n";
    }
};

struct Range {
    double lo = 0.0, hi = 1.0;
    double to_px_x(double v) const {
        return kMargin + (v - lo) / (hi - lo) * (kWidth - 2 * kMargin);
    }
    double to_px_y(double v) const {
        return kHeight - kMargin - (v - lo) / (hi - lo) * (kHeight - 2 * kMargin);
    }
};

Range span_of(std::span<const double> values) {
    Range r;
    if (values.empty()) return r;
    r.lo = *std::min_element(values.begin(), values.end());
    r.hi = *std::max_element(values.begin(), values.end());
    if (r.hi == r.lo) {
        r.lo -= 1.0;
        r.hi += 1.0;
    } else {
        const double pad = 0.05 * (r.hi - r.lo);
        r.lo -= pad;
        r.hi += pad;
    }
    return r;
}

void draw_frame(SvgFile& svg, const std::string& title) {
    svg.line(kMargin, kHeight - kMargin, kWidth - kMargin, kHeight - kMargin,
             "black");
    svg.line(kMargin, kMargin, kMargin, kHeight - kMargin, "black");
    svg.text(kWidth / 2, kMargin / 2, title, 14, "middle");
}

}  // namespace

void write_scatter_svg(const std::string& path, std::span<const double> xs,
                       std::span<const double> ys,
                       std::span<const std::uint8_t> kept,
                       const std::string& title) {
    if (xs.size() != ys.size() || xs.size() != kept.size())
        throw Error("length-mismatch", "scatter arrays differ in length");
    SvgFile svg(path);
    draw_frame(svg, title);
    const Range rx = span_of(xs);
    Range ry = span_of(ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        svg.circle(rx.to_px_x(xs[i]), ry.to_px_y(ys[i]), 1.6,
                   kept[i] ? "red" : "blue");
    }
    svg.text(kWidth - kMargin, kHeight - kMargin / 4, "red = kept, blue = discarded",
             11, "end");
}

void write_roc_svg(const std::string& path,
                   std::span<const std::pair<double, double>> curve,
                   double auc_value, const std::string& title) {
    SvgFile svg(path);
    draw_frame(svg, title);
    Range r;  // [0,1] both axes
    svg.line(r.to_px_x(0.0), r.to_px_y(0.0), r.to_px_x(1.0), r.to_px_y(1.0),
             "#bbbbbb");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(curve.size());
    for (const auto& [fpr, tpr] : curve)
        pts.emplace_back(r.to_px_x(fpr), r.to_px_y(tpr));
    svg.polyline(pts, "crimson", 2.0);
    svg.text(kWidth / 2, kHeight - kMargin / 4, "FPR", 12, "middle");
    svg.text(kMargin / 3, kHeight / 2, "TPR", 12, "middle");
    char buf[48];
    std::snprintf(buf, sizeof buf, "AUC = %.4f", auc_value);
    svg.text(kWidth - kMargin - 8, kMargin + 16, buf, 12, "end");
}

void write_srd_svg(const std::string& path, const SrdResult& srd,
                   const CrrnDistribution& dist) {
    SvgFile svg(path);
    draw_frame(svg, "SRD of methods vs. random rankings");
    Range rx{0.0, 100.0};

    double pmax = 0.0;
    for (double p : dist.probability) pmax = std::max(pmax, p);
    Range ry{0.0, pmax > 0 ? pmax * 1.1 : 1.0};

    const double denom = max_srd(srd.n_rows);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(dist.support.size());
    for (std::size_t i = 0; i < dist.support.size(); ++i) {
        pts.emplace_back(rx.to_px_x(100.0 * dist.support[i] / denom),
                         ry.to_px_y(dist.probability[i]));
    }
    svg.polyline(pts, "black", 1.5);

    for (std::size_t m = 0; m < srd.methods.size(); ++m) {
        const double x = rx.to_px_x(srd.srd_normalized[m]);
        svg.circle(x, kHeight - kMargin, 4.0, "crimson");
        svg.text(x, kHeight - kMargin - 10.0 - 14.0 * static_cast<double>(m % 3),
                 srd.methods[m], 11, "middle");
    }
    svg.text(kWidth / 2, kHeight - kMargin / 4, "SRD %", 12, "middle");
}

void write_boxplot_svg(const std::string& path, const SrdCrossval& cv) {
    SvgFile svg(path);
    draw_frame(svg, "k-fold SRD cross-validation");
    double lo = 1e300, hi = -1e300;
    for (const auto& samples : cv.fold_srd) {
        for (double v : samples) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi <= lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    Range ry{lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo)};

    const auto n = static_cast<double>(cv.methods.size());
    const double slot = (kWidth - 2 * kMargin) / n;
    for (std::size_t m = 0; m < cv.methods.size(); ++m) {
        const auto& box = cv.box[m];
        const double cx = kMargin + slot * (static_cast<double>(m) + 0.5);
        const double half = slot * 0.22;
        // whiskers to min/max, box q1..q3, median in yellow
        svg.line(cx, ry.to_px_y(box.min), cx, ry.to_px_y(box.q1), "black");
        svg.line(cx, ry.to_px_y(box.q3), cx, ry.to_px_y(box.max), "black");
        svg.rect(cx - half, ry.to_px_y(box.q3), 2 * half,
                 ry.to_px_y(box.q1) - ry.to_px_y(box.q3), "#dddddd", "black");
        svg.line(cx - half, ry.to_px_y(box.median), cx + half,
                 ry.to_px_y(box.median), "goldenrod", 2.0);
        for (double v : box.outliers)
            svg.circle(cx, ry.to_px_y(v), 3.0, "green");
        svg.text(cx, kHeight - kMargin / 2, cv.methods[m], 11, "middle");
    }
    svg.text(kMargin / 3, kHeight / 2, "SRD %", 12, "middle");
}

}  // namespace mirspec
