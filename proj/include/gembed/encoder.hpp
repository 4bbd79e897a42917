#pragma once

/// @file  encoder.hpp
/// @brief One-hidden-layer network from fixed random item codes to Gaussian
///        parameters.
///
///     h     = relu(code_i W + b)
///     mu    = h W_mu + b_mu
///     sigma = exp(h W_sigma + b_sigma)
///
/// Items carry no features; each is represented by a code drawn once from
/// N(0, I) at initialisation and never updated.

#include "gembed/gaussian.hpp"

#include <cstdint>
#include <filesystem>
#include <span>

namespace gembed {

inline constexpr std::size_t kDefaultCodeDim = 50;
inline constexpr std::size_t kDefaultHiddenDim = 50;

/// Trainable weights. Row vectors for biases.
struct EncoderWeights {
    RowMatrix W;        ///< h_in x h_dim
    RowMatrix b;        ///< 1 x h_dim
    RowMatrix W_mu;     ///< h_dim x d
    RowMatrix b_mu;     ///< 1 x d
    RowMatrix W_sigma;  ///< h_dim x d
    RowMatrix b_sigma;  ///< 1 x d

    /// Same shapes, all zeros.
    static EncoderWeights zeros_like(const EncoderWeights& other);

    /// Applies `fn(block)` to each block in declaration order.
    template <class Fn>
    void for_each_block(Fn&& fn) {
        fn(W); fn(b); fn(W_mu); fn(b_mu); fn(W_sigma); fn(b_sigma);
    }
    template <class Fn>
    void for_each_block(Fn&& fn) const {
        fn(W); fn(b); fn(W_mu); fn(b_mu); fn(W_sigma); fn(b_sigma);
    }
};

using EncoderGrads = EncoderWeights;

struct EncoderParams {
    EncoderWeights weights;
    RowMatrix codes;  ///< n x h_in, fixed

    std::size_t item_count() const { return static_cast<std::size_t>(codes.rows()); }
    std::size_t code_dim() const { return static_cast<std::size_t>(codes.cols()); }
    std::size_t hidden_dim() const { return static_cast<std::size_t>(weights.W.cols()); }
    std::size_t output_dim() const { return static_cast<std::size_t>(weights.W_mu.cols()); }
};

/// Xavier-uniform weights, zero biases, standard normal codes.
EncoderParams init_encoder(std::size_t n, std::size_t d, std::size_t h_in, std::size_t h_dim,
                           std::uint64_t seed);

GaussianEmbedding forward(const EncoderParams& params, std::size_t item);

/// Gradient of a scalar loss with respect to every weight block, given the
/// loss gradients with respect to the item's mu and (post-exp) sigma.
EncoderGrads backward(const EncoderParams& params, std::size_t item, const Eigen::VectorXd& grad_mu,
                      const Eigen::VectorXd& grad_sigma);

/// Forward pass for a batch of items; row r of every matrix belongs to items[r].
struct BatchForward {
    RowMatrix pre_hidden;  ///< m x h_dim, before relu
    RowMatrix hidden;      ///< m x h_dim
    RowMatrix mu;          ///< m x d
    RowMatrix sigma;       ///< m x d, exp output (unclamped)
};

BatchForward forward_batch(const EncoderParams& params, std::span<const std::uint32_t> items);

/// Accumulates into `grads` the weight gradients for a batch. `grad_pre_sigma`
/// is the gradient with respect to the pre-exp activation.
void backward_batch(const EncoderParams& params, std::span<const std::uint32_t> items,
                    const BatchForward& fwd, const RowMatrix& grad_mu, const RowMatrix& grad_pre_sigma,
                    EncoderGrads& grads);

/// Text checkpoint; see README for the layout. Lossless for every double.
void save_encoder(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_encoder(const std::filesystem::path& path);

/// FNV-1a over the raw bytes of the codes.
std::uint64_t codes_checksum(const EncoderParams& params);

}  // namespace gembed
