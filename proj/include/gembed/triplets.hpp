#pragma once

/// @file  triplets.hpp
/// @brief Triplet comparisons: oracles, sampling strategies, label noise and
///        the triplet file format.
///
/// A triplet <i, j, k> asks whether j is closer to the anchor i than k is.
/// Its label is +1 when delta(i, j) < delta(i, k) and -1 when it is larger.
/// Exact ties are answered +1 ("j wins").

#include "gembed/datasets.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace gembed {

struct Triplet {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    std::uint32_t k = 0;
    int label = 1;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

enum class SamplingStrategy { uniform, graph_hop };

struct SamplingConfig {
    double budget_multiplier = 1.0;  ///< p in |T| = p d^2 n ln n
    double noise_rate = 0.0;         ///< probability of flipping a label
    SamplingStrategy strategy = SamplingStrategy::uniform;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Answers a triplet with +1 / -1.
using Oracle = std::function<int(std::size_t i, std::size_t j, std::size_t k)>;

/// Squared Euclidean comparison on ground-truth points.
int oracle_from_points(const PointDataset& points, std::size_t i, std::size_t j, std::size_t k);

/// Hop-count comparison on a relation graph. Throws DataError if a queried
/// pair is disconnected.
int oracle_from_graph(const RelationGraph& graph, std::size_t i, std::size_t j, std::size_t k);

/// Caches one BFS row per anchor; use this when answering many triplets.
class HopOracle {
public:
    explicit HopOracle(const RelationGraph& graph) : graph_(&graph) {}

    int operator()(std::size_t i, std::size_t j, std::size_t k);

    const std::vector<int>& hops(std::size_t anchor);

private:
    const RelationGraph* graph_;
    std::unordered_map<std::size_t, std::vector<int>> rows_;
};

/// ceil(p * d^2 * n * ln n).
std::size_t budget_from_rule(std::size_t n, std::size_t d, double p);

/// Draws `budget` triplets uniformly with replacement; indices within a
/// triplet are distinct.
std::vector<Triplet> sample_uniform(std::size_t n, std::size_t budget, const Oracle& oracle,
                                    std::uint64_t seed);

/// Anchor-first sampling on a graph: pick an anchor uniformly, pick one node
/// from every hop ring around it, then pick one (nearer, farther) ring pair
/// uniformly. Every emitted triplet is labelled +1. Anchors with a single ring
/// are redrawn; DataError if no anchor has two rings.
std::vector<Triplet> sample_graph_hop(const RelationGraph& graph, std::size_t budget, std::uint64_t seed);

/// Negates each label independently with probability `noise_rate`.
std::vector<Triplet> apply_noise(std::span<const Triplet> triplets, double noise_rate, std::uint64_t seed);

struct TripletSplit {
    std::vector<Triplet> train;
    std::vector<Triplet> test;
};

inline constexpr double kDefaultTrainFraction = 0.9;

/// Leading floor(fraction * size) triplets (at least one) train, the rest test.
TripletSplit split_train_test(std::span<const Triplet> triplets, double train_fraction = kDefaultTrainFraction);

/// Throws std::invalid_argument if any triplet repeats an index, has an index
/// >= n, or carries a label other than +-1.
void validate_triplets(std::span<const Triplet> triplets, std::size_t n);

/// Seed for an independent stream derived from `seed` (SplitMix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Triplet file: one `i,j,k,y` line per triplet, `#` comment lines ignored.
std::vector<Triplet> load_triplets(const std::filesystem::path& path);
void save_triplets(std::span<const Triplet> triplets, const std::filesystem::path& path);

}  // namespace gembed
