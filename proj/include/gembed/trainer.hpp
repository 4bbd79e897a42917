#pragma once

/// @file  trainer.hpp
/// @brief Margin-loss training of the encoder from labelled triplets.
///
/// For a triplet <i, j, k> with label y the loss is
///
///     max(0, margin + y * (E_ij - E_ik)),   E_ab = W2^2(z_a, z_b),
///
/// which pushes E_ij below E_ik when y = +1. Variances entering the loss are
/// clipped to [kSigmaFloor, clamp].

#include "gembed/encoder.hpp"
#include "gembed/triplets.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

namespace gembed {

inline constexpr double kSigmaFloor = 1e-6;

struct TrainConfig {
    std::size_t d = 2;
    double clamp = std::log(100.0);
    double learning_rate = 0.01;
    double lr_decay = 1e-5;
    std::size_t batch_size = 65536;
    std::size_t max_epochs = 3000;
    std::size_t patience = 50;
    double margin = 1.0;
    double min_improvement = 1e-4;
    std::size_t code_dim = kDefaultCodeDim;
    std::size_t hidden_dim = kDefaultHiddenDim;
    /// Point-embedding mode: every variance is pinned to kSigmaFloor.
    bool dirac = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_train_error;
    /// NaN when no held-out triplets were given.
    double test_error = std::numeric_limits<double>::quiet_NaN();
    std::size_t epochs_run = 0;
    /// True when training stopped on a loss plateau (or zero loss) rather
    /// than on max_epochs.
    bool converged = false;
    double seconds = 0.0;
};

struct TrainResult {
    EncoderParams params;
    EmbeddingSet embeddings;
    TrainReport report;
};

double energy(const GaussianEmbedding& a, const GaussianEmbedding& b);

double hinge_loss(const Triplet& t, const EmbeddingSet& embeddings, double margin = 1.0);

/// min(max(entry, kSigmaFloor), clamp) for every entry.
Eigen::VectorXd clamp_sigma(const Eigen::VectorXd& sigma, double clamp);

/// Minibatch Adam (beta1 0.9, beta2 0.999, eps 1e-8) on the mean hinge loss,
/// learning rate lr / (1 + lr_decay * step). Deterministic given config.seed.
/// Throws std::invalid_argument on an empty training set and NumericError on
/// a non-finite loss.
TrainResult train(std::span<const Triplet> train_set, std::span<const Triplet> test_set, std::size_t n,
                  const TrainConfig& config);

/// Clipped embeddings of every item under `params`.
EmbeddingSet embed_all(const EncoderParams& params, const TrainConfig& config);

// Embedding CSV: header `id,mu_0,...,mu_{d-1},sigma_0,...,sigma_{d-1}`, then
// one row per item in id order, values printed with 17 significant digits.
void save_embeddings(const EmbeddingSet& embeddings, const std::filesystem::path& path);
EmbeddingSet load_embeddings(const std::filesystem::path& path);

/// key=value summary followed by one `epoch=...` line per epoch. Wall-clock
/// time is not written.
void save_report(const TrainReport& report, const std::filesystem::path& path);

}  // namespace gembed
