#pragma once

#include <string>
#include <vector>

namespace timid {

struct PlotInput {
    std::string title;
    std::vector<double> probs;        // one point per step
    std::vector<bool> step_labels;    // ground-truth mistake bands
};

// Self-contained SVG: predicted probability curve over shaded ground-truth
// bands, axes labeled, byte-deterministic for fixed input.
std::string render_score_svg(const PlotInput& input);

void write_score_svg(const PlotInput& input, const std::string& path);

}  // namespace timid
