#include "gembed/trainer.hpp"

#include "gembed/errors.hpp"
#include "gembed/eval.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace gembed {

void TrainConfig::validate() const {
    if (d < 1) throw std::invalid_argument("TrainConfig: d must be at least 1");
    if (!(clamp > kSigmaFloor)) throw std::invalid_argument("TrainConfig: clamp must exceed the variance floor");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
    if (!(lr_decay >= 0.0)) throw std::invalid_argument("TrainConfig: lr decay must be nonnegative");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be positive");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be positive");
    if (patience < 1 || patience > max_epochs) {
        throw std::invalid_argument("TrainConfig: patience must lie in [1, max_epochs]");
    }
    if (!(margin > 0.0)) throw std::invalid_argument("TrainConfig: margin must be positive");
    if (!(min_improvement >= 0.0)) throw std::invalid_argument("TrainConfig: min_improvement must be nonnegative");
    if (code_dim < 1 || hidden_dim < 1) throw std::invalid_argument("TrainConfig: network sizes must be positive");
}

double energy(const GaussianEmbedding& a, const GaussianEmbedding& b) { return wasserstein2_sq(a, b); }

double hinge_loss(const Triplet& t, const EmbeddingSet& embeddings, double margin) {
    const double e_ij = energy(embeddings.at(t.i), embeddings.at(t.j));
    const double e_ik = energy(embeddings.at(t.i), embeddings.at(t.k));
    return std::max(0.0, margin + t.label * (e_ij - e_ik));
}

Eigen::VectorXd clamp_sigma(const Eigen::VectorXd& sigma, double clamp) {
    return sigma.cwiseMax(kSigmaFloor).cwiseMin(clamp);
}

namespace {

struct AdamState {
    EncoderWeights m;
    EncoderWeights v;
    std::size_t step = 0;
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

void adam_update(EncoderWeights& w, const EncoderGrads& g, AdamState& state, double lr) {
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    auto apply = [&](RowMatrix& param, const RowMatrix& grad, RowMatrix& m, RowMatrix& v) {
        m = kBeta1 * m + (1.0 - kBeta1) * grad;
        v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseAbs2();
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
    };
    apply(w.W, g.W, state.m.W, state.v.W);
    apply(w.b, g.b, state.m.b, state.v.b);
    apply(w.W_mu, g.W_mu, state.m.W_mu, state.v.W_mu);
    apply(w.b_mu, g.b_mu, state.m.b_mu, state.v.b_mu);
    apply(w.W_sigma, g.W_sigma, state.m.W_sigma, state.v.W_sigma);
    apply(w.b_sigma, g.b_sigma, state.m.b_sigma, state.v.b_sigma);
}

// Variances as seen by the loss, plus the mask of entries the clip left alone.
RowMatrix clipped(const RowMatrix& raw, const TrainConfig& config) {
    if (config.dirac) {
        return RowMatrix::Constant(raw.rows(), raw.cols(), kSigmaFloor);
    }
    return raw.cwiseMax(kSigmaFloor).cwiseMin(config.clamp);
}

}  // namespace

EmbeddingSet embed_all(const EncoderParams& params, const TrainConfig& config) {
    std::vector<std::uint32_t> all(params.item_count());
    std::iota(all.begin(), all.end(), 0u);
    auto f = forward_batch(params, all);
    EmbeddingSet out;
    out.mu = std::move(f.mu);
    out.sigma = clipped(f.sigma, config);
    return out;
}

TrainResult train(std::span<const Triplet> train_set, std::span<const Triplet> test_set, std::size_t n,
                  const TrainConfig& config) {
    config.validate();
    if (train_set.empty()) {
        throw std::invalid_argument("train: empty training set");
    }
    if (n < 3) {
        throw std::invalid_argument("train: need at least 3 items");
    }
    validate_triplets(train_set, n);
    validate_triplets(test_set, n);

    const auto start = std::chrono::steady_clock::now();
    TrainResult result;
    result.params = init_encoder(n, config.d, config.code_dim, config.hidden_dim, config.seed);
    auto& params = result.params;
    auto& report = result.report;

    AdamState adam{EncoderWeights::zeros_like(params.weights), EncoderWeights::zeros_like(params.weights), 0};
    auto grads = EncoderWeights::zeros_like(params.weights);

    std::mt19937_64 rng(derive_seed(config.seed, 1));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    // Maps an item id to its row in the current batch, or -1.
    std::vector<std::int64_t> local(n, -1);
    std::vector<std::uint32_t> items;
    const auto d = static_cast<Eigen::Index>(config.d);

    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;

        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const double inv_m = 1.0 / static_cast<double>(end - begin);

            items.clear();
            for (std::size_t b = begin; b < end; ++b) {
                const auto& t = train_set[order[b]];
                items.push_back(t.i);
                items.push_back(t.j);
                items.push_back(t.k);
            }
            std::sort(items.begin(), items.end());
            items.erase(std::unique(items.begin(), items.end()), items.end());
            for (std::size_t r = 0; r < items.size(); ++r) {
                local[items[r]] = static_cast<std::int64_t>(r);
            }

            const auto fwd = forward_batch(params, items);
            const RowMatrix sigma = clipped(fwd.sigma, config);
            const auto m = static_cast<Eigen::Index>(items.size());
            RowMatrix grad_mu = RowMatrix::Zero(m, d);
            RowMatrix grad_sigma = RowMatrix::Zero(m, d);

            // Accumulates dE_ab into the rows of a and b, scaled by `w`.
            auto add_energy_grad = [&](Eigen::Index a, Eigen::Index b, double w) {
                for (Eigen::Index c = 0; c < d; ++c) {
                    const double dm = 2.0 * (fwd.mu(a, c) - fwd.mu(b, c));
                    grad_mu(a, c) += w * dm;
                    grad_mu(b, c) -= w * dm;
                    if (!config.dirac) {
                        const double ra = std::sqrt(sigma(a, c));
                        const double rb = std::sqrt(sigma(b, c));
                        grad_sigma(a, c) += w * (ra - rb) / ra;
                        grad_sigma(b, c) += w * (rb - ra) / rb;
                    }
                }
            };

            double batch_loss = 0.0;
            for (std::size_t b = begin; b < end; ++b) {
                const auto& t = train_set[order[b]];
                const auto ri = static_cast<Eigen::Index>(local[t.i]);
                const auto rj = static_cast<Eigen::Index>(local[t.j]);
                const auto rk = static_cast<Eigen::Index>(local[t.k]);
                const auto dd = static_cast<std::size_t>(d);
                const double e_ij = detail::w2_sq(&fwd.mu(ri, 0), &sigma(ri, 0), &fwd.mu(rj, 0), &sigma(rj, 0), dd);
                const double e_ik = detail::w2_sq(&fwd.mu(ri, 0), &sigma(ri, 0), &fwd.mu(rk, 0), &sigma(rk, 0), dd);
                const double loss = config.margin + t.label * (e_ij - e_ik);
                if (!std::isfinite(loss)) {
                    batch_loss = loss;
                    break;
                }
                if (loss > 0.0) {
                    batch_loss += loss;
                    add_energy_grad(ri, rj, t.label * inv_m);
                    add_energy_grad(ri, rk, -t.label * inv_m);
                }
            }
            batch_loss *= inv_m;
            if (!std::isfinite(batch_loss)) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                   ", step " + std::to_string(adam.step + 1));
            }
            loss_sum += batch_loss * static_cast<double>(end - begin);

            // Chain through the clip and exp (times sigma).
            RowMatrix grad_pre_sigma = RowMatrix::Zero(m, d);
            if (!config.dirac) {
                const auto raw = fwd.sigma.array();
                const auto g = grad_sigma.array();
                // At a bound, only a gradient pointing back inside passes.
                const auto pass = ((raw >= kSigmaFloor) || (g < 0.0)) && ((raw <= config.clamp) || (g > 0.0));
                grad_pre_sigma = pass.select(g * sigma.array(), 0.0).matrix();
            }

            grads.for_each_block([](RowMatrix& g) { g.setZero(); });
            backward_batch(params, items, fwd, grad_mu, grad_pre_sigma, grads);
            const double lr =
                config.learning_rate / (1.0 + config.lr_decay * static_cast<double>(adam.step));
            adam_update(params.weights, grads, adam, lr);

            for (const auto item : items) {
                local[item] = -1;
            }
        }

        const double epoch_loss = loss_sum / static_cast<double>(order.size());
        report.epoch_loss.push_back(epoch_loss);
        const auto current = embed_all(params, config);
        report.epoch_train_error.push_back(triplet_error(train_set, current));
        report.epochs_run = epoch + 1;

        if (epoch_loss == 0.0) {
            report.converged = true;
            break;
        }
        if (epoch_loss < best_loss - config.min_improvement) {
            best_loss = epoch_loss;
            stale = 0;
        } else if (++stale >= config.patience) {
            report.converged = true;
            break;
        }
    }

    result.embeddings = embed_all(params, config);
    if (!test_set.empty()) {
        report.test_error = triplet_error(test_set, result.embeddings);
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void save_embeddings(const EmbeddingSet& embeddings, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    const std::size_t d = embeddings.dim();
    out << "id";
    for (std::size_t c = 0; c < d; ++c) out << ",mu_" << c;
    for (std::size_t c = 0; c < d; ++c) out << ",sigma_" << c;
    out << '\n';
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out << i;
        for (Eigen::Index c = 0; c < embeddings.mu.cols(); ++c) out << ',' << text::format_double(embeddings.mu(r, c));
        for (Eigen::Index c = 0; c < embeddings.sigma.cols(); ++c) out << ',' << text::format_double(embeddings.sigma(r, c));
        out << '\n';
    }
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
    const std::string name = path.string();
    auto in = text::open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::size_t d = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) continue;
        const auto fields = text::split(line, ',');
        if (d == 0) {
            if (fields.size() < 3 || fields.size() % 2 == 0 || fields[0] != "id") {
                text::fail(name, line_no, "expected header 'id,mu_0,...,sigma_0,...'");
            }
            d = (fields.size() - 1) / 2;
            for (std::size_t c = 0; c < d; ++c) {
                if (fields[1 + c] != "mu_" + std::to_string(c) || fields[1 + d + c] != "sigma_" + std::to_string(c)) {
                    text::fail(name, line_no, "unexpected column names in header");
                }
            }
            continue;
        }
        if (fields.size() != 2 * d + 1) {
            text::fail(name, line_no, "expected " + std::to_string(2 * d + 1) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        const auto id = text::parse_int(fields[0], name, line_no);
        if (id != static_cast<std::int64_t>(rows.size())) {
            text::fail(name, line_no, "ids must be 0, 1, 2, ... in order; found " + std::to_string(id));
        }
        std::vector<double> row(2 * d);
        for (std::size_t c = 0; c < 2 * d; ++c) {
            row[c] = text::parse_double(fields[1 + c], name, line_no);
        }
        for (std::size_t c = d; c < 2 * d; ++c) {
            if (row[c] < 0.0) text::fail(name, line_no, "negative variance");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw DataError(name + ": no embedding rows");
    }
    EmbeddingSet e;
    const auto N = static_cast<Eigen::Index>(rows.size());
    const auto D = static_cast<Eigen::Index>(d);
    e.mu.resize(N, D);
    e.sigma.resize(N, D);
    for (Eigen::Index r = 0; r < N; ++r) {
        for (Eigen::Index c = 0; c < D; ++c) {
            e.mu(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            e.sigma(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c + D)];
        }
    }
    return e;
}

void save_report(const TrainReport& report, const std::filesystem::path& path) {
    auto out = text::open_output(path);
    out << "epochs=" << report.epochs_run << '\n'
        << "converged=" << (report.converged ? "true" : "false") << '\n'
        << "final_loss=" << (report.epoch_loss.empty() ? std::string("nan") : text::format_double(report.epoch_loss.back())) << '\n'
        << "final_train_err="
        << (report.epoch_train_error.empty() ? std::string("nan") : text::format_double(report.epoch_train_error.back()))
        << '\n';
    if (std::isnan(report.test_error)) {
        out << "# no held-out triplets\n";
    } else {
        out << "test_err=" << text::format_double(report.test_error) << '\n';
    }
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
        out << "epoch=" << e + 1 << " loss=" << text::format_double(report.epoch_loss[e])
            << " train_err=" << text::format_double(report.epoch_train_error[e]) << '\n';
    }
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'");
    }
}

}  // namespace gembed
