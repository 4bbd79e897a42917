#include "gembed/triplets.hpp"

#include "gembed/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace gembed;
using gembed::testing::TempDir;
using gembed::testing::write_file;

namespace {

PointDataset line_points(std::initializer_list<double> xs) {
    PointDataset p;
    p.points.resize(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index r = 0;
    for (double x : xs) p.points(r++, 0) = x;
    return p;
}

RelationGraph path_graph(std::size_t n) {
    std::vector<RelationGraph::Edge> edges;
    for (std::uint32_t v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
    return RelationGraph(n, edges, std::vector<NodeKind>(n, NodeKind::item));
}

}  // namespace

TEST_CASE("oracle_from_points examples") {
    const auto p = line_points({0.0, 1.0, 3.0});
    CHECK(oracle_from_points(p, 0, 1, 2) == 1);
    const auto q = line_points({0.0, 3.0, 1.0});
    CHECK(oracle_from_points(q, 0, 1, 2) == -1);
    // Tie: j wins.
    const auto t = line_points({0.0, 2.0, -2.0});
    CHECK(oracle_from_points(t, 0, 1, 2) == 1);
    CHECK(oracle_from_points(t, 0, 2, 1) == 1);
    CHECK_THROWS_AS(oracle_from_points(p, 0, 0, 2), std::invalid_argument);
}

TEST_CASE("oracle_from_graph examples") {
    // a-b-c-d
    const auto path = path_graph(4);
    CHECK(oracle_from_graph(path, 0, 1, 3) == 1);
    CHECK(oracle_from_graph(path, 0, 3, 1) == -1);

    // Star centred at node 0 with leaves 1, 2, 3: hop(u, v) == hop(u, w) == 2.
    const RelationGraph star(4, {{0, 1}, {0, 2}, {0, 3}}, std::vector<NodeKind>(4, NodeKind::item));
    CHECK(star.hops_from(1)[2] == 2);
    CHECK(star.hops_from(1)[3] == 2);
    CHECK(oracle_from_graph(star, 1, 2, 3) == 1);

    // Two super-class subtrees under a root; item i, its fine class f, another super s.
    const auto h = gen_hierarchy(1, 1, 2);  // root 0, supers 1-2, fines 3-4, items 5-6
    CHECK(h.hops_from(5)[3] == 1);
    CHECK(h.hops_from(5)[2] >= 2);
    CHECK(oracle_from_graph(h, 5, 3, 2) == 1);

    const RelationGraph split(4, {{0, 1}, {2, 3}}, std::vector<NodeKind>(4, NodeKind::item));
    CHECK_THROWS_AS(oracle_from_graph(split, 0, 1, 2), DataError);
}

TEST_CASE("budget_from_rule arithmetic") {
    // ceil(p d^2 n ln n) computed by hand.
    CHECK(budget_from_rule(1000, 2, 1.0) == 27632);
    CHECK(budget_from_rule(3, 1, 1.0) == 4);
    CHECK(budget_from_rule(100, 2, 0.5) == 922);
    CHECK(budget_from_rule(500, 2, 4.0) == 49717);
    CHECK(budget_from_rule(1000, 2, 4.0) == 110525);
    CHECK_THROWS_AS(budget_from_rule(2, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(budget_from_rule(10, 2, 0.0), std::invalid_argument);
}

TEST_CASE("sample_uniform") {
    const auto p = gen_blobs(30, 1);
    const Oracle oracle = [&](std::size_t i, std::size_t j, std::size_t k) { return oracle_from_points(p, i, j, k); };

    SUBCASE("n = 3 yields role permutations of {0,1,2}") {
        const auto three = line_points({0.0, 1.0, 5.0});
        const auto ts = sample_uniform(
            3, 5, [&](std::size_t i, std::size_t j, std::size_t k) { return oracle_from_points(three, i, j, k); }, 9);
        REQUIRE(ts.size() == 5);
        for (const auto& t : ts) {
            CHECK(std::set<std::uint32_t>{t.i, t.j, t.k} == std::set<std::uint32_t>{0, 1, 2});
        }
    }
    SUBCASE("budget rule drives the count") {
        const auto big = gen_blobs(1000, 2);
        const auto ts = sample_uniform(
            1000, budget_from_rule(1000, 2, 4.0),
            [&](std::size_t i, std::size_t j, std::size_t k) { return oracle_from_points(big, i, j, k); }, 1);
        CHECK(ts.size() == 110525);
    }
    SUBCASE("determinism and validity") {
        const auto a = sample_uniform(30, 2000, oracle, 42);
        const auto b = sample_uniform(30, 2000, oracle, 42);
        CHECK(a == b);
        CHECK_NOTHROW(validate_triplets(a, 30));
        CHECK(sample_uniform(30, 2000, oracle, 43) != a);
    }
    SUBCASE("label consistency with ground truth") {
        for (const auto& t : sample_uniform(30, 3000, oracle, 5)) {
            const auto xi = p.points.row(t.i);
            const double diff = (xi - p.points.row(t.j)).squaredNorm() - (xi - p.points.row(t.k)).squaredNorm();
            const int s = (diff > 0) - (diff < 0);
            if (s != 0) CHECK(t.label * s == -1);
        }
    }
    SUBCASE("every index position covers every item") {
        std::set<std::uint32_t> seen_i, seen_j, seen_k;
        for (const auto& t : sample_uniform(30, 3000, oracle, 6)) {
            seen_i.insert(t.i);
            seen_j.insert(t.j);
            seen_k.insert(t.k);
        }
        CHECK(seen_i.size() == 30);
        CHECK(seen_j.size() == 30);
        CHECK(seen_k.size() == 30);
    }
    CHECK_THROWS_AS(sample_uniform(2, 5, oracle, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_uniform(30, 0, oracle, 1), std::invalid_argument);
}

TEST_CASE("property: oracle antisymmetry away from ties") {
    const auto p = gen_moons(60, 0.05, 3);
    const auto ts = sample_uniform(
        60, 2000, [&](std::size_t i, std::size_t j, std::size_t k) { return oracle_from_points(p, i, j, k); }, 8);
    for (const auto& t : ts) {
        CHECK(oracle_from_points(p, t.i, t.k, t.j) == -t.label);
    }
}

TEST_CASE("sample_graph_hop") {
    SUBCASE("path a-b-c: only <a,b,c> or <c,b,a> are possible") {
        const auto g = path_graph(3);
        for (const auto& t : sample_graph_hop(g, 200, 1)) {
            CHECK(t.label == 1);
            const bool from_a = t.i == 0 && t.j == 1 && t.k == 2;
            const bool from_c = t.i == 2 && t.j == 1 && t.k == 0;
            CHECK((from_a || from_c));
        }
    }
    SUBCASE("construction invariant and determinism") {
        const auto g = gen_hierarchy(3, 2, 3);
        const auto a = sample_graph_hop(g, 3000, 77);
        CHECK(a == sample_graph_hop(g, 3000, 77));
        HopOracle hops(g);
        for (const auto& t : a) {
            const auto& row = hops.hops(t.i);
            CHECK(row[t.j] < row[t.k]);
            CHECK(t.label == 1);
        }
    }
    SUBCASE("anchors with a single ring fail after n redraws") {
        // Triangle: every node sees the other two at one hop.
        const RelationGraph tri(3, {{0, 1}, {1, 2}, {0, 2}}, std::vector<NodeKind>(3, NodeKind::item));
        CHECK_THROWS_AS(sample_graph_hop(tri, 5, 1), DataError);
    }
}

TEST_CASE("apply_noise") {
    const auto p = gen_blobs(50, 4);
    const auto base = sample_uniform(
        50, 10000, [&](std::size_t i, std::size_t j, std::size_t k) { return oracle_from_points(p, i, j, k); }, 3);
    CHECK(apply_noise(base, 0.0, 1) == base);
    const auto all = apply_noise(base, 1.0, 1);
    for (std::size_t t = 0; t < base.size(); ++t) {
        CHECK(all[t].label == -base[t].label);
        CHECK(all[t].i == base[t].i);
    }
    const auto half = apply_noise(base, 0.5, 9);
    std::size_t flipped = 0;
    for (std::size_t t = 0; t < base.size(); ++t) flipped += half[t].label != base[t].label;
    // 3 sigma of Binomial(10000, 0.5) is 150.
    CHECK(flipped >= 4700);
    CHECK(flipped <= 5300);
    CHECK(apply_noise(base, 0.5, 9) == half);
    CHECK_THROWS_AS(apply_noise(base, 1.5, 1), std::invalid_argument);
}

TEST_CASE("split_train_test") {
    std::vector<Triplet> ts(10, Triplet{0, 1, 2, 1});
    for (std::uint32_t t = 0; t < 10; ++t) ts[t].i = t + 3;
    const auto s = split_train_test(ts);
    CHECK(s.train.size() == 9);
    CHECK(s.test.size() == 1);
    CHECK(s.test[0].i == 12);
    CHECK(split_train_test(std::vector<Triplet>(1, Triplet{0, 1, 2, 1})).train.size() == 1);
}

TEST_CASE("triplet file format") {
    TempDir dir("triplets");
    const std::vector<Triplet> ts{{0, 1, 2, 1}, {4, 3, 2, -1}};
    save_triplets(ts, dir.file("t.txt"));
    CHECK(gembed::testing::read_file(dir.file("t.txt")) == "0,1,2,1\n4,3,2,-1\n");
    CHECK(load_triplets(dir.file("t.txt")) == ts);

    write_file(dir.file("c.txt"), "# comment\n0,1,2,1\n\n 4, 3, 2, -1\n");
    CHECK(load_triplets(dir.file("c.txt")) == ts);

    write_file(dir.file("bad_label.txt"), "0,1,2,0\n");
    CHECK_THROWS_AS(load_triplets(dir.file("bad_label.txt")), DataError);
    write_file(dir.file("bad_fields.txt"), "0,1,2,1\n0,1,2\n");
    try {
        load_triplets(dir.file("bad_fields.txt"));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    write_file(dir.file("dup.txt"), "0,0,2,1\n");
    CHECK_THROWS_AS(load_triplets(dir.file("dup.txt")), DataError);
    CHECK_THROWS_AS(load_triplets(dir.file("missing.txt")), DataError);
}

TEST_CASE("SamplingConfig validation") {
    SamplingConfig c;
    CHECK_NOTHROW(c.validate());
    c.noise_rate = 1.2;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.noise_rate = 0.1;
    c.budget_multiplier = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
