#pragma once

/// @file  eval.hpp
/// @brief Embedding quality metrics: triplet error, Procrustes distances,
///        k-means purity and link-prediction AUC / AP.

#include "gembed/gaussian.hpp"
#include "gembed/triplets.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gembed {

using EnergyFn = std::function<double(const GaussianEmbedding&, const GaussianEmbedding&)>;

/// Fraction of triplets with y * sgn(E_ij - E_ik) != -1, with E = W2^2. A tie
/// (sgn 0) counts as an error.
double triplet_error(std::span<const Triplet> triplets, const EmbeddingSet& embeddings);

double triplet_error(std::span<const Triplet> triplets, const EmbeddingSet& embeddings, const EnergyFn& energy);

struct CentroidStats {
    Eigen::VectorXd centroid;
    double size = 0.0;  ///< sqrt(mean squared distance to the centroid)
};

/// Throws std::invalid_argument when all points coincide.
CentroidStats centroid_stats(const RowMatrix& points);

struct AlignmentResult {
    Eigen::MatrixXd rotation;  ///< orthogonal, reflections allowed
    double distance = 0.0;
};

/// Optimal orthogonal alignment of the normalised `source` onto the
/// normalised `target` (both centred and divided by their centroid size).
/// `distance` is the root of the aligned residual sum of squares.
AlignmentResult procrustes_align(const RowMatrix& source, const RowMatrix& target);

double procrustes_classic(const RowMatrix& x, const RowMatrix& y);

/// Procrustes distance between ground-truth points and Gaussian embeddings:
///
///     inf_R ( sum_i |R x_i / S_X - mu_i / S_mu|^2 + tr(Sigma_i) / S_mu^2 )^(1/2)
///
/// with both sets centred and S_mu taken from the locations. The trace term
/// does not depend on R.
double procrustes_distributional(const RowMatrix& x, const EmbeddingSet& embeddings);

struct KMeansResult {
    std::vector<int> assignment;
    RowMatrix centers;
    double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// inertia wins (earliest restart on ties).
KMeansResult kmeans(const RowMatrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts = 10,
                    std::size_t max_iterations = 300);

/// Row i is [mu_i, sigma_i].
RowMatrix concat_features(const EmbeddingSet& embeddings);

/// n^-1 sum over clusters of the size of the cluster's largest class.
double purity(std::span<const int> clusters, std::span<const int> classes);

struct LinkScores {
    double auc = 0.0;
    double ap = 0.0;
};

/// Higher score = more likely a link. AUC is the Mann-Whitney statistic with
/// ties counted 1/2; AP sums precision times recall increments over the
/// distinct score thresholds.
LinkScores link_prediction_scores(std::span<const double> positive, std::span<const double> negative);

using ItemPair = std::pair<std::uint32_t, std::uint32_t>;

/// Scores pairs with -E_ab.
LinkScores link_prediction_scores(std::span<const ItemPair> positive, std::span<const ItemPair> negative,
                                  const EmbeddingSet& embeddings);

/// (anchor, closer item) pairs as positives, (anchor, farther item) pairs as
/// negatives, according to each triplet's label.
std::pair<std::vector<ItemPair>, std::vector<ItemPair>> pairs_from_triplets(std::span<const Triplet> triplets);

struct MetricsReport {
    std::optional<double> err;
    std::optional<double> procrustes;
    std::optional<double> purity;
    std::optional<double> auc;
    std::optional<double> ap;
    std::vector<std::string> notes;
};

/// Plain `key=value` lines in the order err, procrustes, purity, auc, ap;
/// absent metrics are omitted and notes follow as `# ...` lines.
void save_metrics(const MetricsReport& report, const std::filesystem::path& path);
std::string format_metrics(const MetricsReport& report);

}  // namespace gembed
