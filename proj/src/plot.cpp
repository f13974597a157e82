#include "timid/plot.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace timid {

namespace {

constexpr double kWidth = 640.0, kHeight = 360.0;
constexpr double kLeft = 56.0, kRight = 16.0, kTop = 32.0, kBottom = 44.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string render_score_svg(const PlotInput& input) {
    const std::size_t T = input.probs.size();
    if (T == 0) throw std::invalid_argument("render_score_svg: empty score record");
    if (input.step_labels.size() != T) {
        throw std::invalid_argument("render_score_svg: record/label length mismatch");
    }
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto x_of = [&](double step) {
        return T == 1 ? kLeft + plot_w / 2.0 : kLeft + plot_w * step / static_cast<double>(T - 1);
    };
    const auto y_of = [&](double p) { return kTop + plot_h * (1.0 - p); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
           "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " +
           fmt(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
           "\" fill=\"white\"/>\n";

    // ground-truth bands: contiguous runs of positive step labels
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t t = 0; t <= T; ++t) {
        const bool lab = t < T && input.step_labels[t];
        if (lab && !in_run) {
            run_start = t;
            in_run = true;
        } else if (!lab && in_run) {
            const double x0 = x_of(static_cast<double>(run_start) - 0.5);
            const double x1 = x_of(static_cast<double>(t - 1) + 0.5);
            svg += "<rect x=\"" + fmt(std::max(x0, kLeft)) + "\" y=\"" + fmt(kTop) +
                   "\" width=\"" + fmt(std::min(x1, kLeft + plot_w) - std::max(x0, kLeft)) +
                   "\" height=\"" + fmt(plot_h) + "\" fill=\"#d62728\" fill-opacity=\"0.25\"/>\n";
            in_run = false;
        }
    }

    // axes
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) +
           "\" y2=\"" + fmt(kTop + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" +
           fmt(kLeft + plot_w) + "\" y2=\"" + fmt(kTop + plot_h) + "\" stroke=\"black\"/>\n";
    for (double tick : {0.0, 0.5, 1.0}) {
        svg += "<text x=\"" + fmt(kLeft - 8.0) + "\" y=\"" + fmt(y_of(tick) + 4.0) +
               "\" font-size=\"12\" text-anchor=\"end\">" + fmt(tick) + "</text>\n";
    }
    svg += "<text x=\"" + fmt(kLeft + plot_w / 2.0) + "\" y=\"" + fmt(kHeight - 10.0) +
           "\" font-size=\"13\" text-anchor=\"middle\">step</text>\n";
    svg += "<text x=\"14\" y=\"" + fmt(kTop + plot_h / 2.0) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           fmt(kTop + plot_h / 2.0) + ")\">mistake probability</text>\n";
    if (!input.title.empty()) {
        svg += "<text x=\"" + fmt(kLeft + plot_w / 2.0) +
               "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" + input.title +
               "</text>\n";
    }

    // prediction curve, one point per step
    svg += "<polyline fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.8\" points=\"";
    for (std::size_t t = 0; t < T; ++t) {
        if (t) svg += ' ';
        svg += fmt(x_of(static_cast<double>(t))) + "," + fmt(y_of(input.probs[t]));
    }
    svg += "\"/>\n</svg>\n";
    return svg;
}

void write_score_svg(const PlotInput& input, const std::string& path) {
    const std::string svg = render_score_svg(input);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write plot: " + path);
    out << svg;
    if (!out) throw std::runtime_error("short write on plot: " + path);
}

}  // namespace timid
