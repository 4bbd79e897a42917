#include "gembed/encoder.hpp"

#include "gembed/errors.hpp"
#include "text_io.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gembed {

namespace {

constexpr const char* kCheckpointMagic = "gembed-encoder v1";

void xavier_uniform(RowMatrix& m, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = dist(rng);
        }
    }
}

void check_item(const EncoderParams& params, std::size_t item) {
    if (item >= params.item_count()) {
        throw std::out_of_range("encoder: item " + std::to_string(item) + " out of range (n = " +
                                std::to_string(params.item_count()) + ")");
    }
}

}  // namespace

EncoderWeights EncoderWeights::zeros_like(const EncoderWeights& other) {
    EncoderWeights z;
    z.W = RowMatrix::Zero(other.W.rows(), other.W.cols());
    z.b = RowMatrix::Zero(other.b.rows(), other.b.cols());
    z.W_mu = RowMatrix::Zero(other.W_mu.rows(), other.W_mu.cols());
    z.b_mu = RowMatrix::Zero(other.b_mu.rows(), other.b_mu.cols());
    z.W_sigma = RowMatrix::Zero(other.W_sigma.rows(), other.W_sigma.cols());
    z.b_sigma = RowMatrix::Zero(other.b_sigma.rows(), other.b_sigma.cols());
    return z;
}

EncoderParams init_encoder(std::size_t n, std::size_t d, std::size_t h_in, std::size_t h_dim,
                           std::uint64_t seed) {
    if (n < 1 || d < 1 || h_in < 1 || h_dim < 1) {
        throw std::invalid_argument("init_encoder: all dimensions must be at least 1");
    }
    const auto N = static_cast<Eigen::Index>(n);
    const auto D = static_cast<Eigen::Index>(d);
    const auto Hi = static_cast<Eigen::Index>(h_in);
    const auto Hd = static_cast<Eigen::Index>(h_dim);

    std::mt19937_64 rng(seed);
    EncoderParams p;
    p.codes.resize(N, Hi);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index r = 0; r < N; ++r) {
        for (Eigen::Index c = 0; c < Hi; ++c) {
            p.codes(r, c) = normal(rng);
        }
    }
    auto& w = p.weights;
    w.W.resize(Hi, Hd);
    w.W_mu.resize(Hd, D);
    w.W_sigma.resize(Hd, D);
    xavier_uniform(w.W, rng);
    xavier_uniform(w.W_mu, rng);
    xavier_uniform(w.W_sigma, rng);
    w.b = RowMatrix::Zero(1, Hd);
    w.b_mu = RowMatrix::Zero(1, D);
    w.b_sigma = RowMatrix::Zero(1, D);
    return p;
}

BatchForward forward_batch(const EncoderParams& params, std::span<const std::uint32_t> items) {
    const auto& w = params.weights;
    const auto m = static_cast<Eigen::Index>(items.size());
    RowMatrix codes(m, params.codes.cols());
    for (Eigen::Index r = 0; r < m; ++r) {
        check_item(params, items[static_cast<std::size_t>(r)]);
        codes.row(r) = params.codes.row(items[static_cast<std::size_t>(r)]);
    }
    BatchForward f;
    f.pre_hidden = codes * w.W;
    f.pre_hidden.rowwise() += w.b.row(0);
    f.hidden = f.pre_hidden.cwiseMax(0.0);
    f.mu = f.hidden * w.W_mu;
    f.mu.rowwise() += w.b_mu.row(0);
    RowMatrix pre_sigma = f.hidden * w.W_sigma;
    pre_sigma.rowwise() += w.b_sigma.row(0);
    f.sigma = pre_sigma.array().exp().matrix();
    return f;
}

void backward_batch(const EncoderParams& params, std::span<const std::uint32_t> items,
                    const BatchForward& fwd, const RowMatrix& grad_mu, const RowMatrix& grad_pre_sigma,
                    EncoderGrads& grads) {
    const auto& w = params.weights;
    const auto m = static_cast<Eigen::Index>(items.size());
    if (grad_mu.rows() != m || grad_pre_sigma.rows() != m || grad_mu.cols() != w.W_mu.cols() ||
        grad_pre_sigma.cols() != w.W_sigma.cols() || fwd.hidden.rows() != m) {
        throw std::invalid_argument("backward_batch: dimension mismatch");
    }
    grads.W_mu.noalias() += fwd.hidden.transpose() * grad_mu;
    grads.b_mu += grad_mu.colwise().sum();
    grads.W_sigma.noalias() += fwd.hidden.transpose() * grad_pre_sigma;
    grads.b_sigma += grad_pre_sigma.colwise().sum();

    RowMatrix grad_hidden = grad_mu * w.W_mu.transpose();
    grad_hidden.noalias() += grad_pre_sigma * w.W_sigma.transpose();
    // relu'(0) is taken as 0.
    const RowMatrix grad_pre = (fwd.pre_hidden.array() > 0.0).select(grad_hidden, 0.0);

    RowMatrix codes(m, params.codes.cols());
    for (Eigen::Index r = 0; r < m; ++r) {
        codes.row(r) = params.codes.row(items[static_cast<std::size_t>(r)]);
    }
    grads.W.noalias() += codes.transpose() * grad_pre;
    grads.b += grad_pre.colwise().sum();
}

GaussianEmbedding forward(const EncoderParams& params, std::size_t item) {
    check_item(params, item);
    const std::uint32_t idx[1] = {static_cast<std::uint32_t>(item)};
    const auto f = forward_batch(params, idx);
    return {f.mu.row(0).transpose(), f.sigma.row(0).transpose()};
}

EncoderGrads backward(const EncoderParams& params, std::size_t item, const Eigen::VectorXd& grad_mu,
                      const Eigen::VectorXd& grad_sigma) {
    check_item(params, item);
    const auto d = static_cast<Eigen::Index>(params.output_dim());
    if (grad_mu.size() != d || grad_sigma.size() != d) {
        throw std::invalid_argument("backward: upstream gradient has wrong dimension");
    }
    const std::uint32_t idx[1] = {static_cast<std::uint32_t>(item)};
    const auto f = forward_batch(params, idx);
    const RowMatrix g_mu = grad_mu.transpose();
    // d sigma / d pre = sigma.
    const RowMatrix g_pre_sigma = grad_sigma.cwiseProduct(f.sigma.row(0).transpose()).transpose();
    auto grads = EncoderWeights::zeros_like(params.weights);
    backward_batch(params, idx, f, g_mu, g_pre_sigma, grads);
    return grads;
}

void save_encoder(const EncoderParams& params, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    out << kCheckpointMagic << '\n'
        << params.item_count() << ' ' << params.output_dim() << ' ' << params.code_dim() << ' '
        << params.hidden_dim() << '\n';
    auto write_block = [&](const RowMatrix& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                out << (c ? " " : "") << text::format_double(m(r, c));
            }
            out << '\n';
        }
    };
    params.weights.for_each_block(write_block);
    write_block(params.codes);
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

EncoderParams load_encoder(const std::filesystem::path& path) {
    const std::string name = path.string();
    auto in = text::open_input(path);
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || text::trim(line) != kCheckpointMagic) {
        text::fail(name, line_no, "not an encoder checkpoint");
    }
    ++line_no;
    if (!std::getline(in, line)) {
        text::fail(name, line_no, "missing dimensions");
    }
    std::istringstream dims(line);
    std::size_t n = 0, d = 0, h_in = 0, h_dim = 0;
    if (!(dims >> n >> d >> h_in >> h_dim) || n == 0 || d == 0 || h_in == 0 || h_dim == 0) {
        text::fail(name, line_no, "bad dimension header");
    }
    EncoderParams p;
    auto& w = p.weights;
    const auto D = static_cast<Eigen::Index>(d);
    const auto Hi = static_cast<Eigen::Index>(h_in);
    const auto Hd = static_cast<Eigen::Index>(h_dim);
    w.W.resize(Hi, Hd);
    w.b.resize(1, Hd);
    w.W_mu.resize(Hd, D);
    w.b_mu.resize(1, D);
    w.W_sigma.resize(Hd, D);
    w.b_sigma.resize(1, D);
    p.codes.resize(static_cast<Eigen::Index>(n), Hi);
    auto read_block = [&](RowMatrix& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            ++line_no;
            if (!std::getline(in, line)) {
                text::fail(name, line_no, "truncated checkpoint");
            }
            std::vector<std::string_view> fields;
            for (auto tok : text::split(text::trim(line), ' ')) {
                if (!tok.empty()) fields.push_back(tok);
            }
            if (fields.size() != static_cast<std::size_t>(m.cols())) {
                text::fail(name, line_no, "expected " + std::to_string(m.cols()) + " values");
            }
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                m(r, c) = text::parse_double(fields[static_cast<std::size_t>(c)], name, line_no);
            }
        }
    };
    w.for_each_block(read_block);
    read_block(p.codes);
    return p;
}

std::uint64_t codes_checksum(const EncoderParams& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(params.codes.data());
    const std::size_t len = static_cast<std::size_t>(params.codes.size()) * sizeof(double);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace gembed
