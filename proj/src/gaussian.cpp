#include "gembed/gaussian.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gembed {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

// Symmetric square root with eigenvalues clipped at zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("bures_sq: eigendecomposition failed");
    }
    if (eig.eigenvalues().minCoeff() < -kPsdTol) {
        throw std::invalid_argument("bures_sq: matrix is not positive semi-definite");
    }
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

void GaussianEmbedding::validate() const {
    if (mu.size() == 0) {
        throw std::invalid_argument("GaussianEmbedding: dimension must be at least 1");
    }
    require_same_dim(mu.size(), sigma.size(), "GaussianEmbedding");
    if (!mu.allFinite() || !sigma.allFinite()) {
        throw std::invalid_argument("GaussianEmbedding: non-finite entry");
    }
    if (sigma.minCoeff() < 0.0) {
        throw std::invalid_argument("GaussianEmbedding: negative variance");
    }
}

GaussianEmbedding GaussianEmbedding::dirac(const Eigen::VectorXd& location) {
    return {location, Eigen::VectorXd::Zero(location.size())};
}

CovMatrix::CovMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw std::invalid_argument("CovMatrix: matrix must be square and non-empty");
    }
    if (!m_.allFinite()) {
        throw std::invalid_argument("CovMatrix: non-finite entry");
    }
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
        throw std::invalid_argument("CovMatrix: matrix is not symmetric");
    }
}

CovMatrix CovMatrix::diagonal(const Eigen::VectorXd& d) {
    return CovMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

GaussianEmbedding EmbeddingSet::at(std::size_t i) const {
    if (i >= size()) {
        throw std::out_of_range("EmbeddingSet: index " + std::to_string(i) + " out of range");
    }
    return {mu.row(static_cast<Eigen::Index>(i)).transpose(),
            sigma.row(static_cast<Eigen::Index>(i)).transpose()};
}

double wasserstein2_sq(const GaussianEmbedding& x, const GaussianEmbedding& y) {
    x.validate();
    y.validate();
    require_same_dim(x.dim(), y.dim(), "wasserstein2_sq");
    return detail::w2_sq(x.mu.data(), x.sigma.data(), y.mu.data(), y.sigma.data(), x.dim());
}

double bures_sq(const CovMatrix& a, const CovMatrix& b) {
    require_same_dim(a.dim(), b.dim(), "bures_sq");
    const Eigen::MatrixXd root_a = psd_sqrt(a.matrix());
    // Validates B as a side effect.
    (void)psd_sqrt(b.matrix());
    Eigen::MatrixXd cross = root_a * b.matrix() * root_a;
    cross = 0.5 * (cross + cross.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cross, Eigen::EigenvaluesOnly);
    const double cross_trace = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double value = a.matrix().trace() + b.matrix().trace() - 2.0 * cross_trace;
    return std::max(value, 0.0);
}

double hellinger_sq(const Eigen::VectorXd& da, const Eigen::VectorXd& db) {
    require_same_dim(da.size(), db.size(), "hellinger_sq");
    if (!da.allFinite() || !db.allFinite()) {
        throw std::invalid_argument("hellinger_sq: non-finite entry");
    }
    if ((da.size() > 0 && da.minCoeff() < 0.0) || (db.size() > 0 && db.minCoeff() < 0.0)) {
        throw std::invalid_argument("hellinger_sq: negative entry");
    }
    return (da.cwiseSqrt() - db.cwiseSqrt()).squaredNorm();
}

W2Gradient wasserstein2_sq_grad(const GaussianEmbedding& x, const GaussianEmbedding& y) {
    x.validate();
    y.validate();
    require_same_dim(x.dim(), y.dim(), "wasserstein2_sq_grad");
    if (x.sigma.minCoeff() <= 0.0 || y.sigma.minCoeff() <= 0.0) {
        throw std::invalid_argument(
            "wasserstein2_sq_grad: sigma must be strictly positive (sqrt is not differentiable at 0)");
    }
    W2Gradient g;
    g.mu_x = 2.0 * (x.mu - y.mu);
    g.mu_y = -g.mu_x;
    const Eigen::VectorXd rx = x.sigma.cwiseSqrt();
    const Eigen::VectorXd ry = y.sigma.cwiseSqrt();
    g.sigma_x = (rx - ry).cwiseQuotient(rx);
    g.sigma_y = (ry - rx).cwiseQuotient(ry);
    return g;
}

}  // namespace gembed
