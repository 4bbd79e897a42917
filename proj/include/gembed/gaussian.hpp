#pragma once

/// @file  gaussian.hpp
/// @brief Gaussian embeddings and the closed-form distances between them.
///
/// A Gaussian embedding N(mu, diag(sigma)) stores the location `mu` and the
/// diagonal of the covariance `sigma` (variances, not standard deviations).
/// The squared 2-Wasserstein distance between two such Gaussians is
///
///     W2^2 = |mu_x - mu_y|^2 + sum_k (sqrt(sigma_x[k]) - sqrt(sigma_y[k]))^2
///
/// and for full covariances the second term is the squared Bures metric.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace gembed {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GaussianEmbedding {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma;

    GaussianEmbedding() = default;
    GaussianEmbedding(Eigen::VectorXd mu_, Eigen::VectorXd sigma_)
        : mu(std::move(mu_)), sigma(std::move(sigma_)) {}

    std::size_t dim() const { return static_cast<std::size_t>(mu.size()); }

    /// Throws std::invalid_argument unless mu and sigma have equal length >= 1,
    /// all entries are finite, and every sigma entry is nonnegative.
    void validate() const;

    /// A point mass at `location`.
    static GaussianEmbedding dirac(const Eigen::VectorXd& location);
};

/// Symmetric positive semi-definite covariance matrix.
class CovMatrix {
public:
    /// Throws std::invalid_argument if `m` is not square or not symmetric to 1e-12.
    explicit CovMatrix(Eigen::MatrixXd m);

    static CovMatrix diagonal(const Eigen::VectorXd& d);

    const Eigen::MatrixXd& matrix() const { return m_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

private:
    Eigen::MatrixXd m_;
};

/// Row-major n x d storage for the embeddings of a whole item set.
struct EmbeddingSet {
    RowMatrix mu;     ///< n x d
    RowMatrix sigma;  ///< n x d

    std::size_t size() const { return static_cast<std::size_t>(mu.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(mu.cols()); }
    GaussianEmbedding at(std::size_t i) const;
};

double wasserstein2_sq(const GaussianEmbedding& x, const GaussianEmbedding& y);

double bures_sq(const CovMatrix& a, const CovMatrix& b);

double hellinger_sq(const Eigen::VectorXd& da, const Eigen::VectorXd& db);

struct W2Gradient {
    Eigen::VectorXd mu_x;
    Eigen::VectorXd sigma_x;
    Eigen::VectorXd mu_y;
    Eigen::VectorXd sigma_y;
};

/// Analytic gradient of wasserstein2_sq with respect to every parameter of
/// both arguments. Every sigma entry must be strictly positive.
W2Gradient wasserstein2_sq_grad(const GaussianEmbedding& x, const GaussianEmbedding& y);

namespace detail {

// Unchecked kernels shared with the trainer so both paths agree bit for bit.
inline double w2_sq(const double* mu_x, const double* sg_x, const double* mu_y,
                    const double* sg_y, std::size_t d) {
    double loc = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double dm = mu_x[k] - mu_y[k];
        loc += dm * dm;
        const double ds = std::sqrt(sg_x[k]) - std::sqrt(sg_y[k]);
        scale += ds * ds;
    }
    return loc + scale;
}

}  // namespace detail

}  // namespace gembed
