#pragma once

#include <string>
#include <vector>

#include "eeval/csv.hpp"

namespace eeval {

// Self-contained three-panel figure: cost-accuracy curves with per-head
// dots, per-head ECE, and per-head EEFP. One legend entry per curve in
// every panel. Plain SVG markup, no raster dependencies.
std::string render_report_svg(const std::vector<ParsedCurve>& curves,
                              const std::vector<std::string>& labels);

}  // namespace eeval
