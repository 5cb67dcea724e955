#pragma once

#include <filesystem>
#include <span>
#include <string>

namespace hnhn::tools {

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Single-curve line chart with error bars, axes and tick labels.
void write_line_svg(const std::filesystem::path& path, const LinePlot& plot,
                    std::span<const double> x, std::span<const double> y,
                    std::span<const double> err);

}  // namespace hnhn::tools
