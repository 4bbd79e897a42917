#pragma once

/// @file  datasets.hpp
/// @brief Ground-truth data: synthetic 2-D point sets, relation graphs, and
///        their on-disk formats.

#include "gembed/gaussian.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gembed {

struct PointDataset {
    RowMatrix points;                       ///< n x d
    std::optional<std::vector<int>> labels; ///< n class ids when present
    std::string name;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }

    /// Throws std::invalid_argument on n < 3, non-finite coordinates, or a
    /// label vector of the wrong length.
    void validate() const;
};

enum class NodeKind : std::uint8_t { item, fine_class, super_class, root };

const char* to_string(NodeKind kind);
NodeKind node_kind_from_string(const std::string& s);

/// Undirected simple graph whose nodes are items and label nodes.
class RelationGraph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;

    RelationGraph() = default;

    /// Throws std::invalid_argument on self-loops, duplicate edges, endpoints
    /// out of range, or `kinds.size() != node_count`.
    RelationGraph(std::size_t node_count, std::vector<Edge> edges, std::vector<NodeKind> kinds);

    std::size_t node_count() const { return kinds_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<NodeKind>& kinds() const { return kinds_; }
    const std::vector<std::uint32_t>& neighbors(std::size_t node) const { return adjacency_.at(node); }

    /// Unweighted shortest-path lengths from `source`; -1 for unreachable nodes.
    std::vector<int> hops_from(std::size_t source) const;

    bool connected() const;

private:
    std::vector<Edge> edges_;
    std::vector<NodeKind> kinds_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
};

// Synthetic point sets. All are deterministic functions of their arguments.

/// Three isotropic Gaussians (sd 1/sqrt(2)) centred on an equilateral triangle
/// of side 6; sizes differ by at most one.
PointDataset gen_blobs(std::size_t n, std::uint64_t seed);

/// Two interleaving half circles: the upper unit half circle and a lower half
/// circle centred at (1, 0.5). Class 0 gets n/2 points.
PointDataset gen_moons(std::size_t n, double noise_sd, std::uint64_t seed);

/// Outer unit circle (class 0, n/2 points) and inner circle of radius `factor`.
PointDataset gen_circles(std::size_t n, double factor, double noise_sd, std::uint64_t seed);

inline constexpr double kDefaultMoonsNoise = 0.05;
inline constexpr double kDefaultCirclesNoise = 0.05;
inline constexpr double kDefaultCirclesFactor = 0.5;

/// Path over `classes` class nodes (ids 0..classes-1), with `items_per_class`
/// item nodes attached to each class node. Item ids follow the class nodes,
/// grouped by class.
RelationGraph gen_linear_order(std::size_t classes, std::size_t items_per_class = 0);

/// Tree root -> super-class -> fine-class -> item. Node order: root, supers,
/// fines, items.
RelationGraph gen_hierarchy(std::size_t items_per_fine, std::size_t fines_per_super = 5,
                            std::size_t supers = 20);

// File formats.
//
// Points CSV: optional header `x_0,...,x_{d-1}[,label]`, then one row per point.
// A trailing label column is recognised only through a header naming it `label`.
//
// Edge list: one edge per line, `u v [kind_u kind_v]`, kinds in
// {item, fine, super, root}; nodes not given a kind are items.
//
// Both formats skip blank lines and `#` comment lines.

PointDataset load_points(const std::filesystem::path& path);
void save_points(const PointDataset& data, const std::filesystem::path& path);

RelationGraph load_graph(const std::filesystem::path& path);
void save_graph(const RelationGraph& graph, const std::filesystem::path& path);

/// One integer per line, `#` comments allowed.
std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);

}  // namespace gembed
