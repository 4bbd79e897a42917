#include "gembed/datasets.hpp"

#include "gembed/errors.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

namespace gembed {

void PointDataset::validate() const {
    if (size() < 3) {
        throw std::invalid_argument("PointDataset: need at least 3 points");
    }
    if (dim() < 1) {
        throw std::invalid_argument("PointDataset: dimension must be at least 1");
    }
    if (!points.allFinite()) {
        throw std::invalid_argument("PointDataset: non-finite coordinate");
    }
    if (labels && labels->size() != size()) {
        throw std::invalid_argument("PointDataset: label count does not match point count");
    }
}

const char* to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::item: return "item";
        case NodeKind::fine_class: return "fine";
        case NodeKind::super_class: return "super";
        case NodeKind::root: return "root";
    }
    return "item";
}

NodeKind node_kind_from_string(const std::string& s) {
    if (s == "item") return NodeKind::item;
    if (s == "fine") return NodeKind::fine_class;
    if (s == "super") return NodeKind::super_class;
    if (s == "root") return NodeKind::root;
    throw std::invalid_argument("unknown node kind '" + s + "'");
}

RelationGraph::RelationGraph(std::size_t node_count, std::vector<Edge> edges,
                             std::vector<NodeKind> kinds)
    : edges_(std::move(edges)), kinds_(std::move(kinds)), adjacency_(node_count) {
    if (kinds_.size() != node_count) {
        throw std::invalid_argument("RelationGraph: kind count does not match node count");
    }
    std::set<Edge> seen;
    for (const auto& [u, v] : edges_) {
        if (u >= node_count || v >= node_count) {
            throw std::invalid_argument("RelationGraph: edge endpoint out of range");
        }
        if (u == v) {
            throw std::invalid_argument("RelationGraph: self-loop on node " + std::to_string(u));
        }
        if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
            throw std::invalid_argument("RelationGraph: duplicate edge " + std::to_string(u) +
                                        "-" + std::to_string(v));
        }
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
    for (auto& adj : adjacency_) {
        std::sort(adj.begin(), adj.end());
    }
}

std::vector<int> RelationGraph::hops_from(std::size_t source) const {
    if (source >= node_count()) {
        throw std::out_of_range("RelationGraph: node " + std::to_string(source) + " out of range");
    }
    std::vector<int> dist(node_count(), -1);
    std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(source)};
    dist[source] = 0;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        for (const auto v : adjacency_[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

bool RelationGraph::connected() const {
    if (node_count() == 0) {
        return true;
    }
    const auto d = hops_from(0);
    return std::none_of(d.begin(), d.end(), [](int h) { return h < 0; });
}

PointDataset gen_blobs(std::size_t n, std::uint64_t seed) {
    if (n < 3) {
        throw std::invalid_argument("gen_blobs: n must be at least 3");
    }
    const double side = 6.0;
    const double centers[3][2] = {{0.0, 0.0}, {side, 0.0}, {side / 2.0, side * std::sqrt(3.0) / 2.0}};
    const double sd = 1.0 / std::numbers::sqrt2;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sd);
    PointDataset out;
    out.name = "blobs";
    out.points.resize(static_cast<Eigen::Index>(n), 2);
    out.labels.emplace();
    out.labels->reserve(n);
    Eigen::Index row = 0;
    for (int c = 0; c < 3; ++c) {
        const std::size_t count = n / 3 + (static_cast<std::size_t>(c) < n % 3 ? 1 : 0);
        for (std::size_t m = 0; m < count; ++m, ++row) {
            out.points(row, 0) = centers[c][0] + noise(rng);
            out.points(row, 1) = centers[c][1] + noise(rng);
            out.labels->push_back(c);
        }
    }
    return out;
}

namespace {

// Evenly spaced angles in [0, stop], endpoints included (numpy.linspace).
double linspace_at(std::size_t m, std::size_t count, double stop) {
    return count <= 1 ? 0.0 : stop * static_cast<double>(m) / static_cast<double>(count - 1);
}

void add_jitter(RowMatrix& points, double noise_sd, std::uint64_t seed) {
    if (noise_sd < 0.0) {
        throw std::invalid_argument("noise_sd must be nonnegative");
    }
    if (noise_sd == 0.0) {
        return;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) {
            points(r, c) += noise(rng);
        }
    }
}

}  // namespace

PointDataset gen_moons(std::size_t n, double noise_sd, std::uint64_t seed) {
    if (n < 3) {
        throw std::invalid_argument("gen_moons: n must be at least 3");
    }
    const std::size_t n_outer = n / 2;
    const std::size_t n_inner = n - n_outer;
    PointDataset out;
    out.name = "moons";
    out.points.resize(static_cast<Eigen::Index>(n), 2);
    out.labels.emplace();
    Eigen::Index row = 0;
    for (std::size_t m = 0; m < n_outer; ++m, ++row) {
        const double t = linspace_at(m, n_outer, std::numbers::pi);
        out.points(row, 0) = std::cos(t);
        out.points(row, 1) = std::sin(t);
        out.labels->push_back(0);
    }
    for (std::size_t m = 0; m < n_inner; ++m, ++row) {
        const double t = linspace_at(m, n_inner, std::numbers::pi);
        out.points(row, 0) = 1.0 - std::cos(t);
        out.points(row, 1) = 1.0 - std::sin(t) - 0.5;
        out.labels->push_back(1);
    }
    add_jitter(out.points, noise_sd, seed);
    return out;
}

PointDataset gen_circles(std::size_t n, double factor, double noise_sd, std::uint64_t seed) {
    if (n < 3) {
        throw std::invalid_argument("gen_circles: n must be at least 3");
    }
    if (!(factor > 0.0 && factor < 1.0)) {
        throw std::invalid_argument("gen_circles: factor must lie in (0, 1)");
    }
    const std::size_t n_outer = n / 2;
    const std::size_t n_inner = n - n_outer;
    PointDataset out;
    out.name = "circles";
    out.points.resize(static_cast<Eigen::Index>(n), 2);
    out.labels.emplace();
    Eigen::Index row = 0;
    auto ring = [&](std::size_t count, double radius, int label) {
        for (std::size_t m = 0; m < count; ++m, ++row) {
            const double t = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(count);
            out.points(row, 0) = radius * std::cos(t);
            out.points(row, 1) = radius * std::sin(t);
            out.labels->push_back(label);
        }
    };
    ring(n_outer, 1.0, 0);
    ring(n_inner, factor, 1);
    add_jitter(out.points, noise_sd, seed);
    return out;
}

RelationGraph gen_linear_order(std::size_t classes, std::size_t items_per_class) {
    if (classes < 3 && items_per_class == 0) {
        throw std::invalid_argument("gen_linear_order: need at least 3 nodes");
    }
    if (classes < 1) {
        throw std::invalid_argument("gen_linear_order: need at least one class");
    }
    const std::size_t total = classes * (1 + items_per_class);
    if (total < 3) {
        throw std::invalid_argument("gen_linear_order: need at least 3 nodes");
    }
    std::vector<RelationGraph::Edge> edges;
    std::vector<NodeKind> kinds(total, NodeKind::item);
    for (std::size_t c = 0; c < classes; ++c) {
        kinds[c] = NodeKind::fine_class;
        if (c + 1 < classes) {
            edges.emplace_back(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c + 1));
        }
    }
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t m = 0; m < items_per_class; ++m) {
            const std::size_t item = classes + c * items_per_class + m;
            edges.emplace_back(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(item));
        }
    }
    return RelationGraph(total, std::move(edges), std::move(kinds));
}

RelationGraph gen_hierarchy(std::size_t items_per_fine, std::size_t fines_per_super, std::size_t supers) {
    if (items_per_fine < 1 || fines_per_super < 1 || supers < 1) {
        throw std::invalid_argument("gen_hierarchy: all counts must be at least 1");
    }
    const std::size_t fines = supers * fines_per_super;
    const std::size_t items = fines * items_per_fine;
    const std::size_t total = 1 + supers + fines + items;
    std::vector<NodeKind> kinds(total, NodeKind::item);
    std::vector<RelationGraph::Edge> edges;
    kinds[0] = NodeKind::root;
    const auto super_id = [&](std::size_t s) { return static_cast<std::uint32_t>(1 + s); };
    const auto fine_id = [&](std::size_t f) { return static_cast<std::uint32_t>(1 + supers + f); };
    for (std::size_t s = 0; s < supers; ++s) {
        kinds[super_id(s)] = NodeKind::super_class;
        edges.emplace_back(0u, super_id(s));
    }
    for (std::size_t f = 0; f < fines; ++f) {
        kinds[fine_id(f)] = NodeKind::fine_class;
        edges.emplace_back(super_id(f / fines_per_super), fine_id(f));
    }
    for (std::size_t m = 0; m < items; ++m) {
        const auto id = static_cast<std::uint32_t>(1 + supers + fines + m);
        edges.emplace_back(fine_id(m / items_per_fine), id);
    }
    return RelationGraph(total, std::move(edges), std::move(kinds));
}

PointDataset load_points(const std::filesystem::path& path) {
    const std::string name = path.string();
    auto in = text::open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    bool has_label = false;
    bool header_checked = false;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) {
            continue;
        }
        const auto fields = text::split(line, ',');
        if (!header_checked) {
            header_checked = true;
            const auto& first = fields.front();
            const bool numeric = !first.empty() &&
                                 (std::isdigit(static_cast<unsigned char>(first.front())) ||
                                  first.front() == '-' || first.front() == '+' || first.front() == '.');
            if (!numeric) {
                has_label = fields.back() == "label";
                width = fields.size();
                continue;
            }
        }
        if (width == 0) {
            width = fields.size();
        }
        if (fields.size() != width) {
            text::fail(name, line_no, "expected " + std::to_string(width) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        const std::size_t coords = has_label ? width - 1 : width;
        std::vector<double> row(coords);
        for (std::size_t c = 0; c < coords; ++c) {
            row[c] = text::parse_double(fields[c], name, line_no);
        }
        if (has_label) {
            labels.push_back(static_cast<int>(text::parse_int(fields.back(), name, line_no)));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw DataError(name + ": no data rows");
    }
    const std::size_t coords = rows.front().size();
    if (coords == 0) {
        throw DataError(name + ": no coordinate columns");
    }
    PointDataset out;
    out.name = path.stem().string();
    out.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(coords));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < coords; ++c) {
            out.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    if (has_label) {
        out.labels = std::move(labels);
    }
    return out;
}

void save_points(const PointDataset& data, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    for (std::size_t c = 0; c < data.dim(); ++c) {
        out << (c ? "," : "") << "x_" << c;
    }
    if (data.labels) {
        out << ",label";
    }
    out << '\n';
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.dim(); ++c) {
            out << (c ? "," : "")
                << text::format_double(data.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
        if (data.labels) {
            out << ',' << (*data.labels)[r];
        }
        out << '\n';
    }
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

RelationGraph load_graph(const std::filesystem::path& path) {
    const std::string name = path.string();
    auto in = text::open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<RelationGraph::Edge> edges;
    std::vector<std::optional<NodeKind>> kinds;
    auto set_kind = [&](std::size_t node, NodeKind kind) {
        if (kinds.size() <= node) {
            kinds.resize(node + 1);
        }
        if (kinds[node] && *kinds[node] != kind) {
            text::fail(name, line_no, "conflicting kinds for node " + std::to_string(node));
        }
        kinds[node] = kind;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) {
            continue;
        }
        std::vector<std::string_view> fields;
        for (auto tok : text::split(text::trim(line), ' ')) {
            if (!tok.empty()) {
                fields.push_back(tok);
            }
        }
        if (fields.size() != 2 && fields.size() != 4) {
            text::fail(name, line_no, "expected 'u v [kind_u kind_v]'");
        }
        const auto u = text::parse_int(fields[0], name, line_no);
        const auto v = text::parse_int(fields[1], name, line_no);
        if (u < 0 || v < 0 || u > UINT32_MAX || v > UINT32_MAX) {
            text::fail(name, line_no, "node id out of range");
        }
        if (u == v) {
            text::fail(name, line_no, "self-loop");
        }
        const auto uu = static_cast<std::size_t>(u);
        const auto vv = static_cast<std::size_t>(v);
        if (kinds.size() <= std::max(uu, vv)) {
            kinds.resize(std::max(uu, vv) + 1);
        }
        if (fields.size() == 4) {
            try {
                set_kind(uu, node_kind_from_string(std::string(fields[2])));
                set_kind(vv, node_kind_from_string(std::string(fields[3])));
            } catch (const std::invalid_argument& e) {
                text::fail(name, line_no, e.what());
            }
        }
        edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
    }
    if (edges.empty()) {
        throw DataError(name + ": no edges");
    }
    std::vector<NodeKind> resolved(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        resolved[i] = kinds[i].value_or(NodeKind::item);
    }
    const std::size_t node_count = resolved.size();
    try {
        return RelationGraph(node_count, std::move(edges), std::move(resolved));
    } catch (const std::invalid_argument& e) {
        throw DataError(name + ": " + e.what());
    }
}

void save_graph(const RelationGraph& graph, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    for (const auto& [u, v] : graph.edges()) {
        out << u << ' ' << v << ' ' << to_string(graph.kinds()[u]) << ' ' << to_string(graph.kinds()[v])
            << '\n';
    }
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

std::vector<int> load_labels(const std::filesystem::path& path) {
    const std::string name = path.string();
    auto in = text::open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) {
            continue;
        }
        labels.push_back(static_cast<int>(text::parse_int(text::trim(line), name, line_no)));
    }
    if (labels.empty()) {
        throw DataError(name + ": no labels");
    }
    return labels;
}

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    for (const int l : labels) {
        out << l << '\n';
    }
}

}  // namespace gembed
