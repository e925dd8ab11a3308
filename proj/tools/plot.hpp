#pragma once

#include <filesystem>
#include <string>

#include "output.hpp"

namespace nhsta::cli {

enum class PlotKind { Probability, ErrorVsT0, RmsVsT0, ValidityMap };

PlotKind plot_kind_from_string(const std::string& s);
const char* to_string(PlotKind k);

// Presentational only. Throws ConfigError when the table lacks the columns the kind needs.
std::string render_svg(const CsvTable& table, PlotKind kind, const std::string& title);

}  // namespace nhsta::cli
