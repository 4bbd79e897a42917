#include "gembed/plot.hpp"

#include "gembed/errors.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace gembed {

namespace {

constexpr const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v == 0.0 ? 0.0 : v);
    return buf;
}

}  // namespace

std::string render_svg(const EmbeddingSet& embeddings, const std::optional<std::vector<int>>& labels,
                       const PlotOptions& options) {
    if (embeddings.dim() != 2) {
        throw std::invalid_argument("plot: embeddings are " + std::to_string(embeddings.dim()) +
                                    "-dimensional; only 2-D embeddings can be plotted (train with d = 2)");
    }
    if (embeddings.size() == 0) {
        throw std::invalid_argument("plot: no embeddings");
    }
    if (labels && labels->size() != embeddings.size()) {
        throw std::invalid_argument("plot: label count does not match embedding count");
    }
    if (!(options.radius > 0.0) || options.canvas < 1) {
        throw std::invalid_argument("plot: radius and canvas size must be positive");
    }
    const auto n = static_cast<Eigen::Index>(embeddings.size());
    const RowMatrix axes = options.radius * embeddings.sigma.cwiseSqrt();
    double min_x = (embeddings.mu.col(0) - axes.col(0)).minCoeff();
    double max_x = (embeddings.mu.col(0) + axes.col(0)).maxCoeff();
    double min_y = (embeddings.mu.col(1) - axes.col(1)).minCoeff();
    double max_y = (embeddings.mu.col(1) + axes.col(1)).maxCoeff();
    const double pad = 0.05 * std::max({max_x - min_x, max_y - min_y, 1e-9});
    min_x -= pad;
    max_x += pad;
    min_y -= pad;
    max_y += pad;
    const double span_x = max_x - min_x;
    const double span_y = max_y - min_y;
    const double px_per_unit = options.canvas / std::max(span_x, span_y);

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << num(std::round(span_x * px_per_unit)) << "\" height=\"" << num(std::round(span_y * px_per_unit))
        << "\" viewBox=\"" << num(min_x) << ' ' << num(-max_y) << ' ' << num(span_x) << ' ' << num(span_y)
        << "\">\n"
        << "<rect x=\"" << num(min_x) << "\" y=\"" << num(-max_y) << "\" width=\"" << num(span_x)
        << "\" height=\"" << num(span_y) << "\" fill=\"white\"/>\n"
        << "<g transform=\"scale(1,-1)\" stroke=\"none\" fill-opacity=\"" << num(options.opacity) << "\">\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        const int label = labels ? (*labels)[static_cast<std::size_t>(i)] : 0;
        svg << "<ellipse cx=\"" << num(embeddings.mu(i, 0)) << "\" cy=\"" << num(embeddings.mu(i, 1))
            << "\" rx=\"" << num(axes(i, 0)) << "\" ry=\"" << num(axes(i, 1)) << "\" fill=\""
            << kPalette[std::abs(label) % 10] << "\"/>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

void save_svg(const EmbeddingSet& embeddings, const std::optional<std::vector<int>>& labels,
              const PlotOptions& options, const std::filesystem::path& path) {
    const auto doc = render_svg(embeddings, labels, options);
    auto out = text::open_output(path);
    out << doc;
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

}  // namespace gembed
