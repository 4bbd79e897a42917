#include "gembed/gaussian.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace gembed;
using gembed::testing::random_embedding;
using gembed::testing::rel_err;

namespace {

GaussianEmbedding make(std::initializer_list<double> mu, std::initializer_list<double> sigma) {
    Eigen::VectorXd m(static_cast<Eigen::Index>(mu.size()));
    Eigen::VectorXd s(static_cast<Eigen::Index>(sigma.size()));
    Eigen::Index r = 0;
    for (double v : mu) m[r++] = v;
    r = 0;
    for (double v : sigma) s[r++] = v;
    return {m, s};
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index r = 0;
    for (double x : v) out[r++] = x;
    return out;
}

Eigen::MatrixXd random_rotation(std::mt19937_64& rng, Eigen::Index d) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ();
}

}  // namespace

TEST_CASE("wasserstein2_sq examples") {
    CHECK(wasserstein2_sq(make({1, 2}, {0, 0}), make({4, 6}, {0, 0})) == 25.0);
    const auto z = make({0.3, -1.2}, {0.7, 2.0});
    CHECK(wasserstein2_sq(z, z) == 0.0);
    CHECK(wasserstein2_sq(make({0, 0}, {1, 1}), make({0, 0}, {4, 4})) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("wasserstein2_sq rejects bad input") {
    CHECK_THROWS_AS(wasserstein2_sq(make({0, 0}, {1, 1}), make({0}, {1})), std::invalid_argument);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(wasserstein2_sq(make({nan, 0}, {1, 1}), make({0, 0}, {1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(wasserstein2_sq(make({0, 0}, {1, nan}), make({0, 0}, {1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(wasserstein2_sq(make({0, 0}, {-1, 1}), make({0, 0}, {1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(wasserstein2_sq(make({}, {}), make({}, {})), std::invalid_argument);
}

TEST_CASE("bures_sq examples") {
    std::mt19937_64 rng(3);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 3);
    a = a * a.transpose();
    a = 0.5 * (a + a.transpose());
    CHECK(bures_sq(CovMatrix(a), CovMatrix(a)) == doctest::Approx(0.0).epsilon(1e-10));

    const auto one = CovMatrix::diagonal(vec({1, 1}));
    const auto four = CovMatrix::diagonal(vec({4, 4}));
    CHECK(bures_sq(one, four) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(bures_sq(one, four) == doctest::Approx(hellinger_sq(vec({1, 1}), vec({4, 4}))).epsilon(1e-12));

    const double got = bures_sq(CovMatrix::diagonal(vec({9, 0})), CovMatrix::diagonal(vec({1, 0})));
    // One-dimensional Bures reduces to (sqrt a - sqrt b)^2 per coordinate.
    const double brute = std::pow(std::sqrt(9.0) - std::sqrt(1.0), 2) + std::pow(0.0 - 0.0, 2);
    CHECK(got == doctest::Approx(brute).epsilon(1e-12));
    CHECK(got == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("bures_sq errors") {
    Eigen::MatrixXd not_psd(2, 2);
    not_psd << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(bures_sq(CovMatrix(not_psd), CovMatrix::diagonal(vec({1, 1}))), std::invalid_argument);
    CHECK_THROWS_AS(bures_sq(CovMatrix::diagonal(vec({1, 1})), CovMatrix(not_psd)), std::invalid_argument);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(CovMatrix{asym}, std::invalid_argument);
    CHECK_THROWS_AS(bures_sq(CovMatrix::diagonal(vec({1, 1})), CovMatrix::diagonal(vec({1, 1, 1}))),
                    std::invalid_argument);
}

TEST_CASE("bures_sq is invariant under a shared rotation of commuting matrices") {
    // Q diag(a) Q^T and Q diag(b) Q^T commute, so Bures equals the Hellinger
    // term of the diagonals; this exercises the non-diagonal code path.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index d = 1 + trial % 4;
        Eigen::VectorXd da(d), db(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            da[k] = u(rng);
            db[k] = u(rng);
        }
        const Eigen::MatrixXd q = random_rotation(rng, d);
        Eigen::MatrixXd a = q * da.asDiagonal() * q.transpose();
        Eigen::MatrixXd b = q * db.asDiagonal() * q.transpose();
        a = 0.5 * (a + a.transpose());
        b = 0.5 * (b + b.transpose());
        CHECK(bures_sq(CovMatrix(a), CovMatrix(b)) == doctest::Approx(hellinger_sq(da, db)).epsilon(1e-8));
    }
}

TEST_CASE("hellinger_sq examples and errors") {
    CHECK(hellinger_sq(vec({0, 0}), vec({0, 0})) == 0.0);
    CHECK(hellinger_sq(vec({1, 4}), vec({4, 1})) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(hellinger_sq(vec({1}), vec({9})) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(hellinger_sq(vec({-1}), vec({9})), std::invalid_argument);
    CHECK_THROWS_AS(hellinger_sq(vec({1, 2}), vec({9})), std::invalid_argument);
}

TEST_CASE("wasserstein2_sq_grad examples") {
    const auto z = make({0.5, 1.0}, {2.0, 3.0});
    const auto g = wasserstein2_sq_grad(z, z);
    CHECK(g.mu_x.isZero(0.0));
    CHECK(g.mu_y.isZero(0.0));
    CHECK(g.sigma_x.isZero(0.0));
    CHECK(g.sigma_y.isZero(0.0));

    CHECK(wasserstein2_sq_grad(make({1}, {1}), make({0}, {1})).mu_x[0] == 2.0);

    const auto gs = wasserstein2_sq_grad(make({0}, {1}), make({0}, {4}));
    CHECK(gs.sigma_x[0] == doctest::Approx(-1.0).epsilon(1e-15));
    const double h = 1e-6;
    const double fd = (wasserstein2_sq(make({0}, {1 + h}), make({0}, {4})) -
                       wasserstein2_sq(make({0}, {1 - h}), make({0}, {4}))) /
                      (2 * h);
    CHECK(std::abs(fd - gs.sigma_x[0]) < 1e-5);
}

TEST_CASE("wasserstein2_sq_grad rejects zero variance") {
    CHECK_THROWS_AS(wasserstein2_sq_grad(make({0}, {0}), make({0}, {1})), std::invalid_argument);
    CHECK_THROWS_AS(wasserstein2_sq_grad(make({0}, {1}), make({0}, {0})), std::invalid_argument);
}

TEST_CASE("property: symmetry, identity, positivity") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 5);
        const auto x = random_embedding(rng, d);
        auto y = random_embedding(rng, d);
        CHECK(wasserstein2_sq(x, y) == wasserstein2_sq(y, x));
        CHECK(wasserstein2_sq(x, x) == 0.0);
        CHECK(wasserstein2_sq(x, y) > 0.0);
        y = x;
        y.mu[0] += 2e-9;
        CHECK(wasserstein2_sq(x, y) > 0.0);
        y = x;
        y.sigma[0] += 2e-9;
        CHECK(wasserstein2_sq(x, y) > 0.0);
    }
}

TEST_CASE("property: Dirac reduction to squared Euclidean distance") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 5);
        const auto x = GaussianEmbedding::dirac(random_embedding(rng, d).mu);
        const auto y = GaussianEmbedding::dirac(random_embedding(rng, d).mu);
        CHECK(std::abs(wasserstein2_sq(x, y) - (x.mu - y.mu).squaredNorm()) <= 1e-12);
    }
}

TEST_CASE("property: Bures equals Hellinger on diagonal covariances") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 6);
        const auto x = random_embedding(rng, d);
        const auto y = random_embedding(rng, d);
        const double b = bures_sq(CovMatrix::diagonal(x.sigma), CovMatrix::diagonal(y.sigma));
        CHECK(std::abs(b - hellinger_sq(x.sigma, y.sigma)) <= 1e-8);
    }
}

TEST_CASE("property: triangle inequality of sqrt W2^2") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
        const auto a = random_embedding(rng, d);
        const auto b = random_embedding(rng, d);
        const auto c = random_embedding(rng, d);
        const double ab = std::sqrt(wasserstein2_sq(a, b));
        const double bc = std::sqrt(wasserstein2_sq(b, c));
        const double ac = std::sqrt(wasserstein2_sq(a, c));
        CHECK(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("property: analytic gradient matches central differences") {
    std::mt19937_64 rng(12);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
        const auto x = random_embedding(rng, d, 0.1, 10.0);
        const auto y = random_embedding(rng, d, 0.1, 10.0);
        const auto g = wasserstein2_sq_grad(x, y);
        for (std::size_t k = 0; k < d; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            auto fd = [&](auto&& perturb) {
                auto xp = x, xm = x, yp = y, ym = y;
                perturb(xp, yp, +h);
                perturb(xm, ym, -h);
                return (wasserstein2_sq(xp, yp) - wasserstein2_sq(xm, ym)) / (2 * h);
            };
            CHECK(rel_err(g.mu_x[kk], fd([&](auto& a, auto&, double s) { a.mu[kk] += s; })) < 1e-4);
            CHECK(rel_err(g.mu_y[kk], fd([&](auto&, auto& b, double s) { b.mu[kk] += s; })) < 1e-4);
            CHECK(rel_err(g.sigma_x[kk], fd([&](auto& a, auto&, double s) { a.sigma[kk] += s; })) < 1e-4);
            CHECK(rel_err(g.sigma_y[kk], fd([&](auto&, auto& b, double s) { b.sigma[kk] += s; })) < 1e-4);
        }
    }
}
