#include "gembed/triplets.hpp"

#include "gembed/errors.hpp"
#include "text_io.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace gembed {

namespace {

void require_distinct(std::size_t i, std::size_t j, std::size_t k) {
    if (i == j || i == k || j == k) {
        throw std::invalid_argument("triplet indices must be distinct");
    }
}

int compare(double dij, double dik) { return dij <= dik ? 1 : -1; }

}  // namespace

void SamplingConfig::validate() const {
    if (!(budget_multiplier > 0.0) || !std::isfinite(budget_multiplier)) {
        throw std::invalid_argument("SamplingConfig: budget multiplier must be positive");
    }
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
        throw std::invalid_argument("SamplingConfig: noise rate must lie in [0, 1]");
    }
}

int oracle_from_points(const PointDataset& points, std::size_t i, std::size_t j, std::size_t k) {
    require_distinct(i, j, k);
    const auto n = points.size();
    if (i >= n || j >= n || k >= n) {
        throw std::out_of_range("oracle_from_points: index out of range");
    }
    const auto xi = points.points.row(static_cast<Eigen::Index>(i));
    const double dij = (xi - points.points.row(static_cast<Eigen::Index>(j))).squaredNorm();
    const double dik = (xi - points.points.row(static_cast<Eigen::Index>(k))).squaredNorm();
    return compare(dij, dik);
}

int oracle_from_graph(const RelationGraph& graph, std::size_t i, std::size_t j, std::size_t k) {
    HopOracle oracle(graph);
    return oracle(i, j, k);
}

const std::vector<int>& HopOracle::hops(std::size_t anchor) {
    auto it = rows_.find(anchor);
    if (it == rows_.end()) {
        it = rows_.emplace(anchor, graph_->hops_from(anchor)).first;
    }
    return it->second;
}

int HopOracle::operator()(std::size_t i, std::size_t j, std::size_t k) {
    require_distinct(i, j, k);
    const auto n = graph_->node_count();
    if (i >= n || j >= n || k >= n) {
        throw std::out_of_range("oracle_from_graph: index out of range");
    }
    const auto& row = hops(i);
    if (row[j] < 0 || row[k] < 0) {
        throw DataError("oracle_from_graph: node " + std::to_string(row[j] < 0 ? j : k) +
                        " is unreachable from " + std::to_string(i));
    }
    return compare(row[j], row[k]);
}

std::size_t budget_from_rule(std::size_t n, std::size_t d, double p) {
    if (n < 3 || d < 1 || !(p > 0.0)) {
        throw std::invalid_argument("budget_from_rule: need n >= 3, d >= 1, p > 0");
    }
    const double dd = static_cast<double>(d);
    const double nn = static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(p * dd * dd * nn * std::log(nn)));
}

std::vector<Triplet> sample_uniform(std::size_t n, std::size_t budget, const Oracle& oracle,
                                    std::uint64_t seed) {
    if (n < 3) {
        throw std::invalid_argument("sample_uniform: need at least 3 items");
    }
    if (budget < 1) {
        throw std::invalid_argument("sample_uniform: budget must be at least 1");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_i(0, n - 1);
    std::uniform_int_distribution<std::size_t> pick_j(0, n - 2);
    std::uniform_int_distribution<std::size_t> pick_k(0, n - 3);
    std::vector<Triplet> out;
    out.reserve(budget);
    for (std::size_t t = 0; t < budget; ++t) {
        const std::size_t i = pick_i(rng);
        std::size_t j = pick_j(rng);
        if (j >= i) ++j;
        // Map k onto the n - 2 indices distinct from both i and j.
        std::size_t k = pick_k(rng);
        const std::size_t lo = std::min(i, j);
        const std::size_t hi = std::max(i, j);
        if (k >= lo) ++k;
        if (k >= hi) ++k;
        out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                       static_cast<std::uint32_t>(k), oracle(i, j, k)});
    }
    return out;
}

std::vector<Triplet> sample_graph_hop(const RelationGraph& graph, std::size_t budget, std::uint64_t seed) {
    const std::size_t n = graph.node_count();
    if (n < 3) {
        throw std::invalid_argument("sample_graph_hop: need at least 3 nodes");
    }
    if (budget < 1) {
        throw std::invalid_argument("sample_graph_hop: budget must be at least 1");
    }
    // rings[a][h - 1] lists the nodes at hop distance h from anchor a.
    std::unordered_map<std::size_t, std::vector<std::vector<std::uint32_t>>> ring_cache;
    auto rings_of = [&](std::size_t anchor) -> const std::vector<std::vector<std::uint32_t>>& {
        auto it = ring_cache.find(anchor);
        if (it != ring_cache.end()) {
            return it->second;
        }
        const auto hops = graph.hops_from(anchor);
        std::vector<std::vector<std::uint32_t>> rings;
        for (std::size_t v = 0; v < n; ++v) {
            const int h = hops[v];
            if (h <= 0) continue;
            if (rings.size() < static_cast<std::size_t>(h)) rings.resize(static_cast<std::size_t>(h));
            rings[static_cast<std::size_t>(h) - 1].push_back(static_cast<std::uint32_t>(v));
        }
        return ring_cache.emplace(anchor, std::move(rings)).first->second;
    };

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_anchor(0, n - 1);
    std::vector<Triplet> out;
    out.reserve(budget);
    std::vector<bool> dead(n, false);
    std::size_t dead_count = 0;
    std::vector<std::uint32_t> chosen;
    while (out.size() < budget) {
        const std::size_t anchor = pick_anchor(rng);
        const auto& rings = rings_of(anchor);
        if (rings.size() < 2) {
            if (!dead[anchor]) {
                dead[anchor] = true;
                if (++dead_count == n) {
                    throw DataError("sample_graph_hop: no anchor has nodes at two different hop distances");
                }
            }
            continue;
        }
        chosen.clear();
        for (const auto& ring : rings) {
            std::uniform_int_distribution<std::size_t> pick(0, ring.size() - 1);
            chosen.push_back(ring[pick(rng)]);
        }
        const std::size_t r = chosen.size();
        std::uniform_int_distribution<std::size_t> pick_pair(0, r * (r - 1) / 2 - 1);
        std::size_t pair = pick_pair(rng);
        // Decode the pair index into (near, far) with near < far.
        std::size_t near = 0;
        while (pair >= r - 1 - near) {
            pair -= r - 1 - near;
            ++near;
        }
        const std::size_t far = near + 1 + pair;
        out.push_back({static_cast<std::uint32_t>(anchor), chosen[near], chosen[far], 1});
    }
    return out;
}

std::vector<Triplet> apply_noise(std::span<const Triplet> triplets, double noise_rate, std::uint64_t seed) {
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
        throw std::invalid_argument("apply_noise: noise rate must lie in [0, 1]");
    }
    std::vector<Triplet> out(triplets.begin(), triplets.end());
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution flip(noise_rate);
    for (auto& t : out) {
        if (flip(rng)) {
            t.label = -t.label;
        }
    }
    return out;
}

TripletSplit split_train_test(std::span<const Triplet> triplets, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
        throw std::invalid_argument("split_train_test: fraction must lie in (0, 1]");
    }
    if (triplets.empty()) {
        return {};
    }
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(triplets.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, triplets.size());
    TripletSplit split;
    split.train.assign(triplets.begin(), triplets.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(triplets.begin() + static_cast<std::ptrdiff_t>(n_train), triplets.end());
    return split;
}

void validate_triplets(std::span<const Triplet> triplets, std::size_t n) {
    for (std::size_t t = 0; t < triplets.size(); ++t) {
        const auto& tr = triplets[t];
        if (tr.i == tr.j || tr.i == tr.k || tr.j == tr.k) {
            throw std::invalid_argument("triplet " + std::to_string(t) + " repeats an index");
        }
        if (tr.i >= n || tr.j >= n || tr.k >= n) {
            throw std::invalid_argument("triplet " + std::to_string(t) + " has an index >= " + std::to_string(n));
        }
        if (tr.label != 1 && tr.label != -1) {
            throw std::invalid_argument("triplet " + std::to_string(t) + " has a label other than +-1");
        }
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<Triplet> load_triplets(const std::filesystem::path& path) {
    const std::string name = path.string();
    auto in = text::open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<Triplet> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) {
            continue;
        }
        const auto fields = text::split(line, ',');
        if (fields.size() != 4) {
            text::fail(name, line_no, "expected 'i,j,k,y'");
        }
        std::int64_t v[4];
        for (int f = 0; f < 4; ++f) {
            v[f] = text::parse_int(fields[static_cast<std::size_t>(f)], name, line_no);
        }
        for (int f = 0; f < 3; ++f) {
            if (v[f] < 0 || v[f] > UINT32_MAX) {
                text::fail(name, line_no, "index out of range");
            }
        }
        if (v[3] != 1 && v[3] != -1) {
            text::fail(name, line_no, "label must be 1 or -1");
        }
        if (v[0] == v[1] || v[0] == v[2] || v[1] == v[2]) {
            text::fail(name, line_no, "indices must be distinct");
        }
        out.push_back({static_cast<std::uint32_t>(v[0]), static_cast<std::uint32_t>(v[1]),
                       static_cast<std::uint32_t>(v[2]), static_cast<int>(v[3])});
    }
    return out;
}

void save_triplets(std::span<const Triplet> triplets, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    for (const auto& t : triplets) {
        out << t.i << ',' << t.j << ',' << t.k << ',' << t.label << '\n';
    }
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

}  // namespace gembed
