#include "gembed/cli.hpp"

#include "gembed/datasets.hpp"
#include "gembed/errors.hpp"
#include "gembed/eval.hpp"
#include "gembed/plot.hpp"
#include "gembed/trainer.hpp"
#include "gembed/triplets.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>

namespace gembed::cli {

namespace {

struct GenOptions {
    std::string kind;
    std::size_t n = 1000;
    std::optional<double> noise;
    double factor = kDefaultCirclesFactor;
    std::size_t classes = 10;
    std::size_t items_per_class = 0;
    std::size_t items_per_fine = 1;
    std::size_t fines_per_super = 5;
    std::size_t supers = 20;
    std::uint64_t seed = 0;
    std::string out;
};

struct TripletOptions {
    std::string points;
    std::string graph;
    std::size_t dim = 2;
    double p = 1.0;
    std::optional<std::size_t> budget;
    double noise = 0.0;
    std::string strategy = "uniform";
    double train_fraction = kDefaultTrainFraction;
    std::uint64_t seed = 0;
    std::string out;
};

struct EmbedOptions {
    std::string train;
    std::string test;
    std::optional<std::size_t> n;
    TrainConfig config;
    std::string out;
    std::string report;
    std::string checkpoint;
};

struct EvalOptions {
    std::string embedding;
    std::string triplets;
    std::string points;
    std::string labels;
    std::optional<std::size_t> k;
    std::uint64_t seed = 0;
    std::string out;
};

struct PlotCliOptions {
    std::string embedding;
    std::string labels;
    std::string points;
    PlotOptions plot;
    std::string out;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
    if (o.kind == "blobs" || o.kind == "moons" || o.kind == "circles") {
        PointDataset data;
        if (o.kind == "blobs") {
            data = gen_blobs(o.n, o.seed);
        } else if (o.kind == "moons") {
            data = gen_moons(o.n, o.noise.value_or(kDefaultMoonsNoise), o.seed);
        } else {
            data = gen_circles(o.n, o.factor, o.noise.value_or(kDefaultCirclesNoise), o.seed);
        }
        save_points(data, o.out);
        out << "wrote " << data.size() << " points to " << o.out << '\n';
        return kSuccess;
    }
    const auto graph = o.kind == "linear" ? gen_linear_order(o.classes, o.items_per_class)
                                          : gen_hierarchy(o.items_per_fine, o.fines_per_super, o.supers);
    save_graph(graph, o.out);
    out << "wrote " << graph.node_count() << " nodes, " << graph.edges().size() << " edges to " << o.out << '\n';
    return kSuccess;
}

int cmd_triplets(const TripletOptions& o, std::ostream& out) {
    SamplingConfig sampling;
    sampling.budget_multiplier = o.p;
    sampling.noise_rate = o.noise;
    sampling.strategy = o.strategy == "graph_hop" ? SamplingStrategy::graph_hop : SamplingStrategy::uniform;
    sampling.seed = o.seed;
    sampling.validate();

    std::vector<Triplet> sampled;
    std::size_t n = 0;
    if (!o.points.empty()) {
        if (sampling.strategy == SamplingStrategy::graph_hop) {
            throw std::invalid_argument("graph_hop sampling needs --graph");
        }
        auto data = load_points(o.points);
        data.validate();
        n = data.size();
        const std::size_t budget = o.budget.value_or(budget_from_rule(n, o.dim, o.p));
        sampled = sample_uniform(
            n, budget, [&](std::size_t i, std::size_t j, std::size_t k) { return oracle_from_points(data, i, j, k); },
            sampling.seed);
    } else {
        const auto graph = load_graph(o.graph);
        n = graph.node_count();
        const std::size_t budget = o.budget.value_or(budget_from_rule(n, o.dim, o.p));
        if (sampling.strategy == SamplingStrategy::graph_hop) {
            sampled = sample_graph_hop(graph, budget, sampling.seed);
        } else {
            HopOracle oracle(graph);
            sampled = sample_uniform(n, budget, std::ref(oracle), sampling.seed);
        }
    }
    auto split = split_train_test(sampled, o.train_fraction);
    // Held-out triplets keep the oracle's answers.
    split.train = apply_noise(split.train, sampling.noise_rate, derive_seed(sampling.seed, 2));
    save_triplets(split.train, o.out + ".train");
    save_triplets(split.test, o.out + ".test");
    out << "sampled " << sampled.size() << " triplets over " << n << " items: " << split.train.size()
        << " train -> " << o.out << ".train, " << split.test.size() << " test -> " << o.out << ".test\n";
    return kSuccess;
}

std::size_t max_index(std::span<const Triplet> triplets) {
    std::size_t m = 0;
    for (const auto& t : triplets) {
        m = std::max<std::size_t>({m, t.i, t.j, t.k});
    }
    return m;
}

int cmd_embed(const EmbedOptions& o, std::ostream& out) {
    const auto train_set = load_triplets(o.train);
    if (train_set.empty()) {
        throw DataError(o.train + ": no triplets");
    }
    std::vector<Triplet> test_set;
    if (!o.test.empty()) {
        test_set = load_triplets(o.test);
    }
    std::size_t n = std::max(max_index(train_set), test_set.empty() ? 0 : max_index(test_set)) + 1;
    if (o.n) {
        if (*o.n < n) {
            throw DataError("--n " + std::to_string(*o.n) + " is smaller than the largest item id + 1 (" +
                            std::to_string(n) + ")");
        }
        n = *o.n;
    }
    const auto result = train(train_set, test_set, n, o.config);
    save_embeddings(result.embeddings, o.out);
    const std::string report_path = o.report.empty() ? o.out + ".report" : o.report;
    save_report(result.report, report_path);
    if (!o.checkpoint.empty()) {
        save_encoder(result.params, o.checkpoint);
    }
    const auto& r = result.report;
    out << "epochs=" << r.epochs_run << " loss=" << r.epoch_loss.back()
        << " train_err=" << r.epoch_train_error.back();
    if (!test_set.empty()) {
        out << " test_err=" << r.test_error;
    }
    out << " seconds=" << r.seconds << (r.converged ? "" : " (max_epochs reached)") << '\n';
    return r.converged ? kSuccess : kNotConverged;
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
    const auto embeddings = load_embeddings(o.embedding);
    const auto triplets = load_triplets(o.triplets);
    if (triplets.empty()) {
        throw DataError(o.triplets + ": no triplets");
    }
    const std::size_t n = embeddings.size();
    if (max_index(triplets) >= n) {
        throw DataError("triplet item id " + std::to_string(max_index(triplets)) + " has no embedding (n = " +
                        std::to_string(n) + ")");
    }
    MetricsReport report;
    report.err = triplet_error(triplets, embeddings);

    std::optional<std::vector<int>> labels;
    if (!o.points.empty()) {
        const auto truth = load_points(o.points);
        if (truth.size() != n) {
            throw DataError("ground truth has " + std::to_string(truth.size()) + " points but there are " +
                            std::to_string(n) + " embeddings");
        }
        if (truth.dim() != embeddings.dim()) {
            throw DataError("ground truth dimension differs from embedding dimension");
        }
        report.procrustes = procrustes_distributional(truth.points, embeddings);
        labels = truth.labels;
    } else {
        report.notes.push_back("procrustes skipped: no ground-truth points given");
    }
    if (!o.labels.empty()) {
        labels = load_labels(o.labels);
    }
    if (labels) {
        if (labels->size() != n) {
            throw DataError("label count " + std::to_string(labels->size()) + " differs from embedding count " +
                            std::to_string(n));
        }
        const std::size_t k = o.k.value_or(std::set<int>(labels->begin(), labels->end()).size());
        const auto clusters = kmeans(concat_features(embeddings), k, o.seed);
        report.purity = purity(clusters.assignment, *labels);
    } else {
        report.notes.push_back("purity skipped: no labels given");
    }
    const auto [pos, neg] = pairs_from_triplets(triplets);
    const auto link = link_prediction_scores(pos, neg, embeddings);
    report.auc = link.auc;
    report.ap = link.ap;

    if (o.out.empty()) {
        out << format_metrics(report);
    } else {
        save_metrics(report, o.out);
        out << format_metrics(report);
    }
    return kSuccess;
}

int cmd_plot(const PlotCliOptions& o, std::ostream& out) {
    const auto embeddings = load_embeddings(o.embedding);
    std::optional<std::vector<int>> labels;
    if (!o.points.empty()) {
        labels = load_points(o.points).labels;
    }
    if (!o.labels.empty()) {
        labels = load_labels(o.labels);
    }
    if (labels && labels->size() != embeddings.size()) {
        throw DataError("label count differs from embedding count");
    }
    save_svg(embeddings, labels, o.plot, o.out);
    out << "wrote " << embeddings.size() << " ellipses to " << o.out << '\n';
    return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian ordinal embeddings from triplet comparisons", "gembed"};
    app.set_config("--config", "", "INI file; each [section] holds options of the subcommand of that name");
    app.require_subcommand(1);
    app.fallthrough();

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
    gen_cmd->add_option("kind", gen.kind, "blobs | moons | circles | linear | hierarchy")
        ->required()
        ->check(CLI::IsMember({"blobs", "moons", "circles", "linear", "hierarchy"}));
    gen_cmd->add_option("--n", gen.n, "Number of points")->check(CLI::Range(std::size_t{3}, std::size_t{1} << 30));
    gen_cmd->add_option("--noise", gen.noise, "Gaussian jitter (moons, circles)")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--factor", gen.factor, "Inner circle radius (circles)")->check(CLI::Range(0.0, 1.0));
    gen_cmd->add_option("--classes", gen.classes, "Class nodes on the path (linear)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--items-per-class", gen.items_per_class, "Items attached to each class (linear)");
    gen_cmd->add_option("--items-per-fine", gen.items_per_fine, "Items per fine class (hierarchy)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--fines-per-super", gen.fines_per_super, "Fine classes per super class (hierarchy)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--supers", gen.supers, "Super classes (hierarchy)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--out", gen.out, "Output file")->required();

    TripletOptions trip;
    auto* trip_cmd = app.add_subcommand("triplets", "Sample labelled triplets and split them into train/test files");
    auto* points_opt = trip_cmd->add_option("--points", trip.points, "Ground-truth points CSV")->check(CLI::ExistingFile);
    auto* graph_opt = trip_cmd->add_option("--graph", trip.graph, "Relation graph edge list")->check(CLI::ExistingFile);
    points_opt->excludes(graph_opt);
    trip_cmd->add_option("--dim", trip.dim, "Embedding dimension d used by the budget rule")->check(CLI::PositiveNumber);
    trip_cmd->add_option("--p", trip.p, "Budget multiplier p in p d^2 n ln n")->check(CLI::PositiveNumber);
    trip_cmd->add_option("--budget", trip.budget, "Explicit triplet count (overrides the rule)")->check(CLI::PositiveNumber);
    trip_cmd->add_option("--noise", trip.noise, "Label flip probability for the training split")->check(CLI::Range(0.0, 1.0));
    trip_cmd->add_option("--strategy", trip.strategy, "uniform | graph_hop")->check(CLI::IsMember({"uniform", "graph_hop"}));
    trip_cmd->add_option("--train-fraction", trip.train_fraction, "Fraction of triplets used for training")
        ->check(CLI::Range(0.0, 1.0));
    trip_cmd->add_option("--seed", trip.seed, "Random seed");
    trip_cmd->add_option("--out", trip.out, "Output prefix; writes <out>.train and <out>.test")->required();

    EmbedOptions emb;
    auto& cfg = emb.config;
    auto* emb_cmd = app.add_subcommand("embed", "Train Gaussian embeddings from triplets");
    emb_cmd->add_option("--train", emb.train, "Training triplets")->required()->check(CLI::ExistingFile);
    emb_cmd->add_option("--test", emb.test, "Held-out triplets")->check(CLI::ExistingFile);
    emb_cmd->add_option("--n", emb.n, "Item count (default: largest id + 1)");
    emb_cmd->add_option("--dim", cfg.d, "Embedding dimension")->check(CLI::PositiveNumber);
    emb_cmd->add_option("--clamp", cfg.clamp, "Upper bound C on every variance")->check(CLI::PositiveNumber);
    emb_cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
    emb_cmd->add_option("--lr-decay", cfg.lr_decay, "Inverse-time learning-rate decay per step")->check(CLI::NonNegativeNumber);
    emb_cmd->add_option("--batch-size", cfg.batch_size, "Triplets per minibatch")->check(CLI::PositiveNumber);
    emb_cmd->add_option("--max-epochs", cfg.max_epochs, "Epoch limit")->check(CLI::PositiveNumber);
    emb_cmd->add_option("--patience", cfg.patience, "Epochs without improvement before stopping")->check(CLI::PositiveNumber);
    emb_cmd->add_option("--margin", cfg.margin, "Hinge margin")->check(CLI::PositiveNumber);
    emb_cmd->add_option("--hidden", cfg.hidden_dim, "Hidden layer width")->check(CLI::PositiveNumber);
    emb_cmd->add_option("--code-dim", cfg.code_dim, "Random code length")->check(CLI::PositiveNumber);
    emb_cmd->add_flag("--dirac", cfg.dirac, "Point embeddings: pin every variance to the floor");
    emb_cmd->add_option("--seed", cfg.seed, "Random seed");
    emb_cmd->add_option("--out", emb.out, "Embedding CSV")->required();
    emb_cmd->add_option("--report", emb.report, "Training report (default: <out>.report)");
    emb_cmd->add_option("--checkpoint", emb.checkpoint, "Encoder checkpoint file");

    EvalOptions ev;
    auto* eval_cmd = app.add_subcommand("eval", "Compute metrics for an embedding");
    eval_cmd->add_option("--embedding", ev.embedding, "Embedding CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--triplets", ev.triplets, "Held-out triplets")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--points", ev.points, "Ground-truth points CSV (labels are read from it too)")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--labels", ev.labels, "Class labels, one per line")->check(CLI::ExistingFile);
    eval_cmd->add_option("--k", ev.k, "k-means cluster count (default: number of classes)")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--seed", ev.seed, "k-means seed");
    eval_cmd->add_option("--out", ev.out, "Metrics report file");

    PlotCliOptions pl;
    auto* plot_cmd = app.add_subcommand("plot", "Render 2-D embeddings as ellipses");
    plot_cmd->add_option("--embedding", pl.embedding, "Embedding CSV")->required()->check(CLI::ExistingFile);
    plot_cmd->add_option("--labels", pl.labels, "Class labels, one per line")->check(CLI::ExistingFile);
    plot_cmd->add_option("--points", pl.points, "Points CSV carrying labels")->check(CLI::ExistingFile);
    plot_cmd->add_option("--radius", pl.plot.radius, "Semi-axis multiplier k (semi-axis = k sqrt(sigma))")
        ->check(CLI::PositiveNumber);
    plot_cmd->add_option("--size", pl.plot.canvas, "Canvas size in pixels")->check(CLI::PositiveNumber);
    plot_cmd->add_option("--out", pl.out, "SVG file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kUsageError;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen, out);
        if (trip_cmd->parsed()) {
            if (trip.points.empty() == trip.graph.empty()) {
                err << "error: triplets needs exactly one of --points or --graph\n";
                return kUsageError;
            }
            return cmd_triplets(trip, out);
        }
        if (emb_cmd->parsed()) {
            if (cfg.patience > cfg.max_epochs) {
                cfg.patience = cfg.max_epochs;
            }
            return cmd_embed(emb, out);
        }
        if (eval_cmd->parsed()) return cmd_eval(ev, out);
        if (plot_cmd->parsed()) return cmd_plot(pl, out);
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kNumericError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::invalid_argument& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::out_of_range& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

}  // namespace gembed::cli
