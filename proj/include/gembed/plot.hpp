#pragma once

/// @file  plot.hpp
/// @brief SVG rendering of 2-D Gaussian embeddings as axis-aligned ellipses.

#include "gembed/gaussian.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gembed {

struct PlotOptions {
    double radius = 2.0;     ///< semi-axes are radius * sqrt(sigma)
    int canvas = 800;        ///< width and height of the longer side, in pixels
    double opacity = 0.3;
};

/// One <ellipse> per item, in data units, coloured by label from a fixed
/// ten-colour palette. Throws std::invalid_argument unless d == 2.
std::string render_svg(const EmbeddingSet& embeddings, const std::optional<std::vector<int>>& labels,
                       const PlotOptions& options = {});

void save_svg(const EmbeddingSet& embeddings, const std::optional<std::vector<int>>& labels,
              const PlotOptions& options, const std::filesystem::path& path);

}  // namespace gembed
