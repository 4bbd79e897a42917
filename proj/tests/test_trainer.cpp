#include "gembed/trainer.hpp"

#include "gembed/errors.hpp"
#include "gembed/eval.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gembed;
using gembed::testing::TempDir;

namespace {

EmbeddingSet dirac_line(std::initializer_list<double> xs) {
    EmbeddingSet e;
    e.mu.resize(static_cast<Eigen::Index>(xs.size()), 1);
    e.sigma = RowMatrix::Zero(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index r = 0;
    for (double x : xs) e.mu(r++, 0) = x;
    return e;
}

std::vector<Triplet> blob_triplets(std::size_t n, std::size_t budget, std::uint64_t seed) {
    const auto p = gen_blobs(n, seed);
    return sample_uniform(
        n, budget, [&](std::size_t i, std::size_t j, std::size_t k) { return oracle_from_points(p, i, j, k); }, seed);
}

TrainConfig small_config() {
    TrainConfig c;
    c.max_epochs = 20;
    c.patience = 5;
    c.batch_size = 64;
    c.code_dim = 8;
    c.hidden_dim = 8;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("energy examples") {
    std::mt19937_64 rng(5);
    GaussianEmbedding a{Eigen::VectorXd::Constant(2, 0.3), Eigen::VectorXd::Constant(2, 0.7)};
    CHECK(energy(a, a) == 0.0);
    Eigen::VectorXd m0(2), m1(2);
    m0 << 0, 0;
    m1 << 3, 0;
    CHECK(energy(GaussianEmbedding::dirac(m0), GaussianEmbedding::dirac(m1)) == 9.0);
    for (int t = 0; t < 100; ++t) {
        const auto x = gembed::testing::random_embedding(rng, 3, 0.01, 5.0);
        const auto y = gembed::testing::random_embedding(rng, 3, 0.01, 5.0);
        CHECK(energy(x, y) == wasserstein2_sq(x, y));
    }
}

TEST_CASE("hinge_loss examples") {
    // E_01 = 0, E_02 = 5 via mu: item 1 sits on item 0, item 2 at sqrt(5).
    const auto e = dirac_line({0.0, 0.0, std::sqrt(5.0)});
    CHECK(hinge_loss({0, 1, 2, 1}, e) == doctest::Approx(0.0));
    CHECK(hinge_loss({0, 2, 1, 1}, e) == doctest::Approx(6.0));
    const auto tie = dirac_line({0.0, 1.0, -1.0});
    CHECK(hinge_loss({0, 1, 2, 1}, tie) == 1.0);
    CHECK(hinge_loss({0, 1, 2, -1}, tie, 2.5) == 2.5);
}

TEST_CASE("clamp_sigma examples") {
    const double c = std::log(100.0);
    Eigen::VectorXd s(3);
    s << 10.0, 1.0, 1e-9;
    const auto r = clamp_sigma(s, c);
    CHECK(r[0] == doctest::Approx(4.605170185988091).epsilon(1e-15));
    CHECK(r[1] == 1.0);
    CHECK(r[2] == 1e-6);
}

TEST_CASE("TrainConfig validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.patience = c.max_epochs + 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.lr_decay = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("single triplet reaches zero loss within 200 epochs") {
    TrainConfig c;
    c.max_epochs = 200;
    c.patience = 200;
    const std::vector<Triplet> one{{0, 1, 2, 1}};
    const auto r = train(one, {}, 3, c);
    CHECK(r.report.epoch_loss.back() == 0.0);
    CHECK(r.report.epochs_run <= 200);
    CHECK(r.report.converged);
    CHECK(triplet_error(one, r.embeddings) == 0.0);
    CHECK(std::isnan(r.report.test_error));
}

TEST_CASE("training is deterministic and leaves codes alone") {
    const auto ts = blob_triplets(40, 1500, 2);
    const auto split = split_train_test(ts);
    const auto c = small_config();
    const auto a = train(split.train, split.test, 40, c);
    const auto b = train(split.train, split.test, 40, c);
    CHECK(a.report.epoch_loss == b.report.epoch_loss);
    CHECK(a.report.epoch_train_error == b.report.epoch_train_error);
    CHECK(a.embeddings.mu == b.embeddings.mu);
    CHECK(a.embeddings.sigma == b.embeddings.sigma);
    CHECK(a.params.weights.W == b.params.weights.W);
    CHECK(codes_checksum(a.params) == codes_checksum(init_encoder(40, c.d, c.code_dim, c.hidden_dim, c.seed)));
}

TEST_CASE("report values stay in range and loss zero implies error zero") {
    const auto ts = blob_triplets(30, 1000, 4);
    auto c = small_config();
    c.max_epochs = 40;
    const auto r = train(ts, {}, 30, c);
    REQUIRE(r.report.epoch_loss.size() == r.report.epochs_run);
    for (std::size_t e = 0; e < r.report.epochs_run; ++e) {
        CHECK(r.report.epoch_loss[e] >= 0.0);
        CHECK(r.report.epoch_train_error[e] >= 0.0);
        CHECK(r.report.epoch_train_error[e] <= 1.0);
        if (r.report.epoch_loss[e] == 0.0) CHECK(r.report.epoch_train_error[e] == 0.0);
    }
}

TEST_CASE("property: learned variances respect the clamp") {
    const auto ts = apply_noise(blob_triplets(40, 2000, 6), 0.3, 6);
    for (double clamp : {0.5, std::log(100.0)}) {
        auto c = small_config();
        c.clamp = clamp;
        c.learning_rate = 0.05;
        const auto r = train(ts, {}, 40, c);
        CHECK(r.embeddings.sigma.minCoeff() >= kSigmaFloor);
        CHECK(r.embeddings.sigma.maxCoeff() <= clamp);
    }
}

TEST_CASE("property: one Adam step reduces a violated triplet's loss") {
    int failures = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TrainConfig c;
        c.seed = seed;
        c.max_epochs = 1;
        c.patience = 1;
        const auto init = init_encoder(3, c.d, c.code_dim, c.hidden_dim, seed);
        const auto before = embed_all(init, c);
        // Orient the triplet so it is violated at initialisation.
        Triplet t{0, 1, 2, 1};
        if (energy(before.at(0), before.at(1)) < energy(before.at(0), before.at(2))) t.label = -1;
        const double l0 = hinge_loss(t, before);
        const std::vector<Triplet> one{t};
        const auto r = train(one, {}, 3, c);
        if (!(hinge_loss(t, r.embeddings) < l0)) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("dirac mode pins every variance to the floor") {
    auto c = small_config();
    c.dirac = true;
    const auto r = train(blob_triplets(20, 500, 8), {}, 20, c);
    CHECK((r.embeddings.sigma.array() == kSigmaFloor).all());
}

TEST_CASE("train errors") {
    const auto c = small_config();
    CHECK_THROWS_AS(train({}, {}, 3, c), std::invalid_argument);
    const std::vector<Triplet> bad{{0, 1, 5, 1}};
    CHECK_THROWS_AS(train(bad, {}, 3, c), std::invalid_argument);
    auto huge = c;
    huge.learning_rate = 1e300;
    huge.lr_decay = 0.0;
    CHECK_THROWS_AS(train(blob_triplets(20, 500, 9), {}, 20, huge), NumericError);
}

TEST_CASE("embedding file round trip") {
    TempDir dir("emb");
    const auto r = train(blob_triplets(20, 400, 10), {}, 20, small_config());
    save_embeddings(r.embeddings, dir.file("e.csv"));
    const auto back = load_embeddings(dir.file("e.csv"));
    CHECK(back.mu == r.embeddings.mu);
    CHECK(back.sigma == r.embeddings.sigma);
    const auto text = gembed::testing::read_file(dir.file("e.csv"));
    CHECK(text.rfind("id,mu_0,mu_1,sigma_0,sigma_1\n0,", 0) == 0);

    gembed::testing::write_file(dir.file("gap.csv"), "id,mu_0,sigma_0\n0,1,1\n2,1,1\n");
    CHECK_THROWS_AS(load_embeddings(dir.file("gap.csv")), DataError);
    gembed::testing::write_file(dir.file("neg.csv"), "id,mu_0,sigma_0\n0,1,-1\n");
    CHECK_THROWS_AS(load_embeddings(dir.file("neg.csv")), DataError);

    save_report(r.report, dir.file("r.txt"));
    const auto rep = gembed::testing::read_file(dir.file("r.txt"));
    CHECK(rep.find("epochs=") == 0);
    CHECK(rep.find("seconds") == std::string::npos);
}
