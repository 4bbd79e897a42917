#include "gembed/eval.hpp"

#include "gembed/errors.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gembed {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool counts_as_error(int label, double e_ij, double e_ik) {
    const int s = sign(e_ij - e_ik);
    return s == 0 || label * s == 1;
}

void check_triplets(std::span<const Triplet> triplets, const EmbeddingSet& embeddings) {
    if (triplets.empty()) {
        throw std::invalid_argument("triplet_error: empty triplet set");
    }
    validate_triplets(triplets, embeddings.size());
}

struct Normalised {
    RowMatrix points;
    double size;
};

Normalised normalise(const RowMatrix& points) {
    const auto stats = centroid_stats(points);
    RowMatrix centred = points.rowwise() - stats.centroid.transpose();
    return {centred / stats.size, stats.size};
}

}  // namespace

double triplet_error(std::span<const Triplet> triplets, const EmbeddingSet& embeddings) {
    check_triplets(triplets, embeddings);
    const std::size_t d = embeddings.dim();
    std::size_t errors = 0;
    for (const auto& t : triplets) {
        const double* mu_i = &embeddings.mu(t.i, 0);
        const double* sg_i = &embeddings.sigma(t.i, 0);
        const double e_ij = detail::w2_sq(mu_i, sg_i, &embeddings.mu(t.j, 0), &embeddings.sigma(t.j, 0), d);
        const double e_ik = detail::w2_sq(mu_i, sg_i, &embeddings.mu(t.k, 0), &embeddings.sigma(t.k, 0), d);
        errors += counts_as_error(t.label, e_ij, e_ik) ? 1 : 0;
    }
    return static_cast<double>(errors) / static_cast<double>(triplets.size());
}

double triplet_error(std::span<const Triplet> triplets, const EmbeddingSet& embeddings, const EnergyFn& energy) {
    check_triplets(triplets, embeddings);
    std::size_t errors = 0;
    for (const auto& t : triplets) {
        const auto zi = embeddings.at(t.i);
        errors += counts_as_error(t.label, energy(zi, embeddings.at(t.j)), energy(zi, embeddings.at(t.k))) ? 1 : 0;
    }
    return static_cast<double>(errors) / static_cast<double>(triplets.size());
}

CentroidStats centroid_stats(const RowMatrix& points) {
    if (points.rows() < 1 || points.cols() < 1) {
        throw std::invalid_argument("centroid_stats: empty point set");
    }
    CentroidStats s;
    s.centroid = points.colwise().mean().transpose();
    const RowMatrix centred = points.rowwise() - s.centroid.transpose();
    s.size = std::sqrt(centred.squaredNorm() / static_cast<double>(points.rows()));
    const double scale = std::max(1.0, points.cwiseAbs().maxCoeff());
    if (!(s.size > 1e-12 * scale)) {
        throw std::invalid_argument("centroid_stats: all points coincide");
    }
    return s;
}

AlignmentResult procrustes_align(const RowMatrix& source, const RowMatrix& target) {
    if (source.rows() != target.rows() || source.cols() != target.cols()) {
        throw std::invalid_argument("procrustes: point sets differ in shape");
    }
    if (source.rows() < 2) {
        throw std::invalid_argument("procrustes: need at least 2 points");
    }
    const auto a = normalise(source).points;
    const auto b = normalise(target).points;
    // Maximise tr(R A^T B): with A^T B = U S V^T the optimum is R = V U^T.
    const Eigen::MatrixXd cross = a.transpose() * b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    AlignmentResult r;
    r.rotation = svd.matrixV() * svd.matrixU().transpose();
    const RowMatrix aligned = a * r.rotation.transpose();
    r.distance = std::sqrt((aligned - b).squaredNorm());
    return r;
}

double procrustes_classic(const RowMatrix& x, const RowMatrix& y) { return procrustes_align(x, y).distance; }

double procrustes_distributional(const RowMatrix& x, const EmbeddingSet& embeddings) {
    if (static_cast<std::size_t>(x.rows()) != embeddings.size()) {
        throw std::invalid_argument("procrustes_distributional: point count differs from embedding count");
    }
    const auto align = procrustes_align(x, embeddings.mu);
    const double size = centroid_stats(embeddings.mu).size;
    const double trace = embeddings.sigma.sum() / (size * size);
    return std::sqrt(align.distance * align.distance + trace);
}

RowMatrix concat_features(const EmbeddingSet& embeddings) {
    RowMatrix f(embeddings.mu.rows(), embeddings.mu.cols() + embeddings.sigma.cols());
    f << embeddings.mu, embeddings.sigma;
    return f;
}

namespace {

struct LloydRun {
    std::vector<int> assignment;
    RowMatrix centers;
    double inertia;
};

LloydRun lloyd_once(const RowMatrix& x, std::size_t k, std::mt19937_64& rng, std::size_t max_iterations) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto K = static_cast<Eigen::Index>(k);
    RowMatrix centers(K, x.cols());

    // k-means++ seeding.
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    centers.row(0) = x.row(static_cast<Eigen::Index>(first(rng)));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = (x.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index c = 1; c < K; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = unit(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = first(rng);
        }
        centers.row(c) = x.row(static_cast<Eigen::Index>(pick));
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) - centers.row(c)).squaredNorm());
        }
    }

    std::vector<int> assignment(n, -1);
    double inertia = 0.0;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = x.row(static_cast<Eigen::Index>(i));
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < K; ++c) {
                const double dist = (row - centers.row(c)).squaredNorm();
                if (dist < best_d) {
                    best_d = dist;
                    best = static_cast<int>(c);
                }
            }
            inertia += best_d;
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        RowMatrix sums = RowMatrix::Zero(K, x.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(assignment[i]) += x.row(static_cast<Eigen::Index>(i));
            ++counts[static_cast<std::size_t>(assignment[i])];
        }
        for (Eigen::Index c = 0; c < K; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
                continue;
            }
            // Empty cluster: move it to the point farthest from its centre.
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dist = (x.row(static_cast<Eigen::Index>(i)) - centers.row(assignment[i])).squaredNorm();
                if (dist > far_d) {
                    far_d = dist;
                    far = i;
                }
            }
            centers.row(c) = x.row(static_cast<Eigen::Index>(far));
        }
    }
    return {std::move(assignment), std::move(centers), inertia};
}

}  // namespace

KMeansResult kmeans(const RowMatrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
                    std::size_t max_iterations) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (k < 1) {
        throw std::invalid_argument("kmeans: k must be at least 1");
    }
    if (k > n) {
        throw std::invalid_argument("kmeans: k exceeds the number of points");
    }
    if (restarts < 1) {
        throw std::invalid_argument("kmeans: need at least one restart");
    }
    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        auto run = lloyd_once(points, k, rng, max_iterations);
        if (run.inertia < best.inertia) {
            best.assignment = std::move(run.assignment);
            best.centers = std::move(run.centers);
            best.inertia = run.inertia;
        }
    }
    return best;
}

double purity(std::span<const int> clusters, std::span<const int> classes) {
    if (clusters.size() != classes.size()) {
        throw std::invalid_argument("purity: cluster and class vectors differ in length");
    }
    if (clusters.empty()) {
        throw std::invalid_argument("purity: empty assignment");
    }
    std::map<int, std::map<int, std::size_t>> table;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        ++table[clusters[i]][classes[i]];
    }
    std::size_t total = 0;
    for (const auto& [cluster, counts] : table) {
        std::size_t best = 0;
        for (const auto& [cls, count] : counts) {
            best = std::max(best, count);
        }
        total += best;
    }
    return static_cast<double>(total) / static_cast<double>(clusters.size());
}

LinkScores link_prediction_scores(std::span<const double> positive, std::span<const double> negative) {
    if (positive.empty() || negative.empty()) {
        throw std::invalid_argument("link_prediction_scores: need at least one positive and one negative");
    }
    struct Scored {
        double score;
        bool positive;
    };
    std::vector<Scored> all;
    all.reserve(positive.size() + negative.size());
    for (const double s : positive) all.push_back({s, true});
    for (const double s : negative) all.push_back({s, false});
    for (const auto& s : all) {
        if (std::isnan(s.score)) {
            throw std::invalid_argument("link_prediction_scores: NaN score");
        }
    }
    std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });

    const double n_pos = static_cast<double>(positive.size());
    const double n_neg = static_cast<double>(negative.size());
    // Walk tied groups from the highest score down.
    double auc_sum = 0.0;  // sum over positives of (#negatives below + 0.5 #negatives tied)
    double ap = 0.0;
    double tp = 0.0;
    double fp = 0.0;
    std::size_t g = 0;
    while (g < all.size()) {
        std::size_t h = g;
        double pos_in_group = 0.0;
        double neg_in_group = 0.0;
        while (h < all.size() && all[h].score == all[g].score) {
            (all[h].positive ? pos_in_group : neg_in_group) += 1.0;
            ++h;
        }
        const double neg_below = n_neg - fp - neg_in_group;
        auc_sum += pos_in_group * (neg_below + 0.5 * neg_in_group);
        tp += pos_in_group;
        fp += neg_in_group;
        if (pos_in_group > 0.0) {
            ap += (pos_in_group / n_pos) * (tp / (tp + fp));
        }
        g = h;
    }
    return {auc_sum / (n_pos * n_neg), ap};
}

LinkScores link_prediction_scores(std::span<const ItemPair> positive, std::span<const ItemPair> negative,
                                  const EmbeddingSet& embeddings) {
    const std::size_t d = embeddings.dim();
    auto score = [&](const ItemPair& p) {
        if (p.first >= embeddings.size() || p.second >= embeddings.size()) {
            throw std::invalid_argument("link_prediction_scores: pair index out of range");
        }
        return -detail::w2_sq(&embeddings.mu(p.first, 0), &embeddings.sigma(p.first, 0),
                              &embeddings.mu(p.second, 0), &embeddings.sigma(p.second, 0), d);
    };
    std::vector<double> pos;
    std::vector<double> neg;
    pos.reserve(positive.size());
    neg.reserve(negative.size());
    for (const auto& p : positive) pos.push_back(score(p));
    for (const auto& p : negative) neg.push_back(score(p));
    return link_prediction_scores(pos, neg);
}

std::pair<std::vector<ItemPair>, std::vector<ItemPair>> pairs_from_triplets(std::span<const Triplet> triplets) {
    std::vector<ItemPair> pos;
    std::vector<ItemPair> neg;
    pos.reserve(triplets.size());
    neg.reserve(triplets.size());
    for (const auto& t : triplets) {
        const auto closer = t.label == 1 ? t.j : t.k;
        const auto farther = t.label == 1 ? t.k : t.j;
        pos.emplace_back(t.i, closer);
        neg.emplace_back(t.i, farther);
    }
    return {std::move(pos), std::move(neg)};
}

std::string format_metrics(const MetricsReport& report) {
    std::ostringstream out;
    auto line = [&](const char* key, const std::optional<double>& v) {
        if (v) out << key << '=' << text::format_double(*v) << '\n';
    };
    line("err", report.err);
    line("procrustes", report.procrustes);
    line("purity", report.purity);
    line("auc", report.auc);
    line("ap", report.ap);
    for (const auto& note : report.notes) {
        out << "# " << note << '\n';
    }
    return out.str();
}

void save_metrics(const MetricsReport& report, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    out << format_metrics(report);
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

}  // namespace gembed
