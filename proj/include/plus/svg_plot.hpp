#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "plus/simlab.hpp"

namespace plus {

// Renders one metric column of a metrics table as an SVG line chart: one
// polyline per method over the lambda-ratio axis, with a dashed vertical
// marker at sqrt(2) (the universal penalty level). Output bytes are a
// deterministic function of the input.
void write_metrics_svg(std::ostream& os, const std::vector<MetricsRecord>& records,
                       const std::string& metric, const std::string& title = "");

double metric_value(const MetricsRecord& r, const std::string& metric);

}  // namespace plus
