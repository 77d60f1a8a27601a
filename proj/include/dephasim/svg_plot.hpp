#pragma once

#include <string>

#include "dephasim/output.hpp"

namespace dephasim {

/// Sites on the vertical axis, time on the horizontal one, n_j as colour.
std::string population_heatmap_svg(const CsvTable& table, const std::string& title);
/// M against t on logarithmic axes; points with t or M <= 0 are dropped.
std::string moment_loglog_svg(const CsvTable& table, const std::string& title);
std::string distance_svg(const CsvTable& table, const std::string& title);

}  // namespace dephasim
