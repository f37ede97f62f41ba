#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "xtree/dataset.hpp"
#include "xtree/error.hpp"
#include "xtree/hsm.hpp"
#include "xtree/metrics.hpp"
#include "xtree/model_io.hpp"
#include "xtree/plt.hpp"
#include "xtree/synth.hpp"
#include "xtree/verify.hpp"

namespace {

using namespace xtree;

int log_level() {
    static int level = [] {
        const char* env = std::getenv("XT_LOG");
        return env ? std::atoi(env) : 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

struct TrainArgs {
    std::string input, model_out, tree_file;
    std::string algo = "plt", tree = "kmeans", repr = "dense", weighting = "tfidf";
    std::string schedule = "linear", pickone = "sample", solver = "online";
    std::uint32_t arity = 2, max_leaves = 100, dim = 500, epochs = 20, batch_iters = 200;
    double lr = 0.1, l2 = 0.003, power = 0.5, kmeans_eps = 0.001, batch_lr = 2.0;
    int threads = 1;
    std::uint64_t seed = 42;
    bool no_shuffle = false;
};

std::vector<double> label_frequencies(const Dataset& ds) {
    std::vector<double> freqs(ds.num_labels, 0.0);
    for (const auto& ex : ds.examples)
        for (std::uint32_t label : ex.labels) freqs[label] += 1.0;
    return freqs;
}

LabelTree build_tree_for(const Dataset& ds, const std::string& type, std::uint32_t arity,
                         std::uint32_t max_leaves, double eps, std::uint64_t seed,
                         const std::vector<double>* idf) {
    if (type == "complete") return build_complete(ds.num_labels, arity, label_frequencies(ds));
    if (type == "huffman") return build_huffman(label_frequencies(ds), arity);
    if (type == "kmeans")
        return build_kmeans_tree(label_profiles(ds, idf), arity, max_leaves, eps, seed);
    throw std::invalid_argument("unknown tree type \"" + type + "\"");
}

int cmd_train(const TrainArgs& args) {
    auto start = std::chrono::steady_clock::now();
    Dataset ds = load_xmlc(args.input);
    validate(ds);
    log_info("loaded " + std::to_string(ds.size()) + " examples, d=" +
             std::to_string(ds.num_features) + ", m=" + std::to_string(ds.num_labels));

    std::vector<double> idf;
    bool tfidf = args.weighting == "tfidf";
    if (tfidf) idf = tfidf_fit(ds);

    LabelTree tree;
    if (!args.tree_file.empty()) {
        std::ifstream in(args.tree_file);
        if (!in) throw std::runtime_error("cannot open " + args.tree_file);
        tree = LabelTree::load(in);
    } else {
        tree = build_tree_for(ds, args.tree, args.arity, args.max_leaves, args.kmeans_eps,
                              args.seed, tfidf ? &idf : nullptr);
    }
    log_info("tree: " + std::to_string(tree.node_count()) + " nodes over " +
             std::to_string(tree.num_labels()) + " labels");

    FeatureWeighting weighting = tfidf ? FeatureWeighting::Tfidf : FeatureWeighting::Uniform;
    Representation repr =
        args.repr == "dense"
            ? Representation::dense_embedding(ds.num_features, args.dim, weighting, args.seed,
                                              idf)
            : Representation::sparse_direct(ds.num_features, weighting, idf);

    TrainOptions options;
    options.epochs = args.epochs;
    options.l2 = args.l2;
    options.threads = args.threads;
    options.seed = args.seed;
    options.shuffle = !args.no_shuffle;
    options.solver = args.solver == "batch" ? Solver::Batch : Solver::Online;
    options.batch_iterations = args.batch_iters;
    options.batch_lr = args.batch_lr;
    if (args.schedule == "linear") {
        std::uint64_t total = std::max<std::uint64_t>(1, ds.size() * args.epochs);
        options.schedule = LrSchedule::linear(args.lr, total);
    } else {
        options.schedule = LrSchedule::inverse_power(args.lr, args.power);
    }

    std::map<std::string, std::string> hyper{
        {"algo", args.algo},       {"tree", args.tree_file.empty() ? args.tree : "file"},
        {"arity", std::to_string(args.arity)},
        {"max_leaves", std::to_string(args.max_leaves)},
        {"repr", args.repr},       {"weighting", args.weighting},
        {"dim", std::to_string(args.dim)},
        {"lr", fmt(args.lr)},      {"l2", fmt(args.l2)},
        {"epochs", std::to_string(args.epochs)},
        {"schedule", args.schedule},
        {"power", fmt(args.power)},
        {"pickone", args.pickone}, {"solver", args.solver},
        {"seed", std::to_string(args.seed)},
    };

    TrainStats stats;
    ModelBundle bundle;
    if (args.algo == "hsm") {
        HsmModel model = make_hsm(std::move(tree), std::move(repr));
        stats = train_hsm(model, ds,
                          args.pickone == "expand" ? PickOneMode::Expand : PickOneMode::Sample,
                          options);
        bundle = bundle_hsm(model, std::move(hyper));
    } else if (args.algo == "plt") {
        PltModel model = make_plt(std::move(tree), std::move(repr));
        stats = train_plt(model, ds, options);
        bundle = bundle_plt(model, std::move(hyper));
    } else {
        throw std::invalid_argument("unknown algo \"" + args.algo + "\"");
    }
    save_model(args.model_out, bundle);

    double wall = seconds_since(start);
    std::cout << "trained " << args.algo << " model: " << bundle.nodes.size() << " nodes, "
              << stats.constant_nodes << " constant-positive\n"
              << "node updates: " << stats.node_updates << " ("
              << fmt(static_cast<double>(stats.node_updates) /
                     std::max<std::uint64_t>(1, stats.examples_seen))
              << " per example visit)\n";
    if (stats.skipped_empty)
        std::cout << "skipped empty-label examples: " << stats.skipped_empty << '\n';
    std::cout << "wall time: " << fmt(wall) << " s\n";
    return 0;
}

std::string format_prediction_line(const std::vector<std::pair<std::uint32_t, double>>& topk) {
    std::string line;
    for (std::size_t i = 0; i < topk.size(); ++i) {
        if (i) line += ' ';
        line += std::to_string(topk[i].first);
        line += ':';
        line += fmt(topk[i].second);
    }
    return line;
}

int cmd_predict(const std::string& model_path, const std::string& input,
                const std::string& output, std::uint32_t k, int threads) {
    ModelBundle bundle = load_model(model_path);
    Dataset ds = load_xmlc(input);
    std::uint32_t kk = std::min<std::uint32_t>(k, bundle.tree.num_labels());

    std::vector<std::string> lines(ds.size());
    auto predict_range = [&](std::size_t begin, std::size_t end, const auto& model_ref,
                             auto&& predict_fn) {
        for (std::size_t i = begin; i < end; ++i)
            lines[i] = format_prediction_line(predict_fn(model_ref, ds.examples[i].features, kk));
    };
    auto run = [&](const auto& model, auto&& predict_fn) {
        if (threads <= 1) {
            predict_range(0, ds.size(), model, predict_fn);
            return;
        }
        std::vector<std::thread> workers;
        auto t = static_cast<std::size_t>(threads);
        for (std::size_t s = 0; s < t; ++s) {
            std::size_t begin = s * ds.size() / t, end = (s + 1) * ds.size() / t;
            workers.emplace_back([&, begin, end] { predict_range(begin, end, model, predict_fn); });
        }
        for (auto& w : workers) w.join();
    };

    auto start = std::chrono::steady_clock::now();
    if (bundle.algo == Algo::Plt) {
        PltModel model = to_plt(std::move(bundle));
        run(model, [](const PltModel& m, const SparseVector& x, std::uint32_t kk2) {
            return predict_topk(m, x, kk2);
        });
    } else {
        HsmModel model = to_hsm(std::move(bundle));
        run(model, [](const HsmModel& m, const SparseVector& x, std::uint32_t kk2) {
            return predict_topk_hsm(m, x, kk2);
        });
    }
    double wall = seconds_since(start);

    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot open " + output);
    for (const auto& line : lines) out << line << '\n';
    log_info("predicted " + std::to_string(ds.size()) + " examples in " + fmt(wall) + " s (" +
             fmt(1000.0 * wall / std::max<std::size_t>(1, ds.size())) + " ms/example)");
    return 0;
}

std::vector<std::vector<std::uint32_t>> parse_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<std::uint32_t>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::vector<std::uint32_t> labels;
        std::istringstream ls(line);
        std::string token;
        while (ls >> token) {
            std::size_t colon = token.find(':');
            try {
                labels.push_back(
                    static_cast<std::uint32_t>(std::stoul(token.substr(0, colon))));
            } catch (const std::exception&) {
                throw ParseError(lineno, "bad prediction token \"" + token + "\"");
            }
        }
        out.push_back(std::move(labels));
    }
    return out;
}

std::vector<double> parse_score_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> scores;
    double v;
    while (in >> v) scores.push_back(v);
    return scores;
}

int cmd_eval(const std::string& input, const std::string& predictions,
             const std::vector<std::uint32_t>& ks, const std::string& scores_a,
             const std::string& scores_b) {
    if (!scores_a.empty() || !scores_b.empty()) {
        if (scores_a.empty() || scores_b.empty())
            throw std::invalid_argument("--scores-a and --scores-b must be given together");
        auto a = parse_score_column(scores_a);
        auto b = parse_score_column(scores_b);
        auto r = paired_tests(a, b);
        std::printf("%-12s %12s\n", "test", "p-value");
        std::printf("%-12s %12.6g\n", "t-test", r.t_test_p);
        std::printf("%-12s %12.6g\n", "sign", r.sign_p);
        std::printf("%-12s %12.6g\n", "wilcoxon", r.wilcoxon_p);
        std::printf("t_test_p %.12g\nsign_p %.12g\nwilcoxon_p %.12g\n", r.t_test_p, r.sign_p,
                    r.wilcoxon_p);
        return 0;
    }

    Dataset ds = load_xmlc(input);
    auto preds = parse_predictions(predictions);
    if (preds.size() != ds.size())
        throw std::runtime_error("predictions do not align with the dataset");
    std::printf("%-8s %12s\n", "metric", "value");
    std::vector<std::pair<std::uint32_t, double>> rows;
    for (std::uint32_t k : ks) {
        double p = mean_precision_at_k(ds, preds, k);
        rows.emplace_back(k, p);
        std::printf("p@%-6u %12.6f\n", k, p);
    }
    for (const auto& [k, p] : rows) std::printf("p@%u %.12g\n", k, p);
    return 0;
}

int cmd_tree(const std::string& input, const std::string& output, const std::string& type,
             std::uint32_t arity, std::uint32_t max_leaves, double eps,
             const std::string& weighting, std::uint64_t seed) {
    Dataset ds = load_xmlc(input);
    validate(ds);
    std::vector<double> idf;
    if (weighting == "tfidf") idf = tfidf_fit(ds);
    LabelTree tree =
        build_tree_for(ds, type, arity, max_leaves, eps, seed, idf.empty() ? nullptr : &idf);
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot open " + output);
    tree.save(out);
    log_info("tree: " + std::to_string(tree.node_count()) + " nodes, depth-balanced over " +
             std::to_string(tree.num_labels()) + " labels");
    return 0;
}

int cmd_synth(const std::string& model, const SynthConfig& config, const std::string& output) {
    Dataset ds;
    if (model == "multiclass")
        ds = gen_multiclass(config);
    else if (model == "independent")
        ds = gen_independent(config);
    else if (model == "dependent")
        ds = gen_dependent(config);
    else
        throw std::invalid_argument("unknown synthetic model \"" + model + "\"");

    save_xmlc(ds, output);
    std::uint64_t empty = 0;
    for (const auto& ex : ds.examples)
        if (ex.labels.empty()) ++empty;

    std::ofstream meta(output + ".meta");
    if (!meta) throw std::runtime_error("cannot open " + output + ".meta");
    meta << "model " << model << '\n'
         << "d " << config.d << '\n'
         << "m " << config.m << '\n'
         << "n " << config.n << '\n'
         << "c " << fmt(config.c) << '\n'
         << "noise_sigma2 " << fmt(config.noise_sigma2) << '\n'
         << "seed " << config.seed << '\n'
         << "empty_label_examples " << empty << '\n';
    log_info("wrote " + std::to_string(ds.size()) + " examples (" + std::to_string(empty) +
             " with empty label sets) to " + output);
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    auto results = run_verify_suite(suite, seed);
    bool all_ok = true;
    for (const auto& r : results) {
        std::printf("[%s] %-42s %s\n", r.ok ? " ok " : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all_ok = all_ok && r.ok;
    }
    return all_ok ? 0 : 3;
}

int cmd_bench(const std::string& model_path, const std::string& input, std::uint32_t k,
              std::uint32_t repeat) {
    ModelBundle bundle = load_model(model_path);
    Dataset ds = load_xmlc(input);
    std::uint32_t kk = std::min<std::uint32_t>(k, bundle.tree.num_labels());
    std::vector<double> latencies;
    latencies.reserve(ds.size() * repeat);

    auto measure = [&](auto&& predict_one) {
        for (std::uint32_t r = 0; r < repeat; ++r)
            for (const auto& ex : ds.examples) {
                auto t0 = std::chrono::steady_clock::now();
                predict_one(ex.features);
                latencies.push_back(seconds_since(t0) * 1000.0);
            }
    };
    if (bundle.algo == Algo::Plt) {
        PltModel model = to_plt(std::move(bundle));
        measure([&](const SparseVector& x) { return predict_topk(model, x, kk); });
    } else {
        HsmModel model = to_hsm(std::move(bundle));
        measure([&](const SparseVector& x) { return predict_topk_hsm(model, x, kk); });
    }
    std::sort(latencies.begin(), latencies.end());
    double total = std::accumulate(latencies.begin(), latencies.end(), 0.0);
    auto pct = [&](double q) {
        return latencies[std::min(latencies.size() - 1,
                                  static_cast<std::size_t>(q * latencies.size()))];
    };
    std::printf("predictions   %zu\n", latencies.size());
    std::printf("mean_ms       %.6g\n", total / latencies.size());
    std::printf("p50_ms        %.6g\n", pct(0.50));
    std::printf("p95_ms        %.6g\n", pct(0.95));
    std::printf("p99_ms        %.6g\n", pct(0.99));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic label trees and hierarchical softmax for extreme "
                 "multi-label classification"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a PLT or HSM model");
    train->add_option("--input", train_args.input, "training set, XMLC text format")->required();
    train->add_option("--model-out", train_args.model_out, "output model file")->required();
    train->add_option("--algo", train_args.algo, "plt | hsm");
    train->add_option("--tree", train_args.tree, "complete | huffman | kmeans");
    train->add_option("--tree-file", train_args.tree_file, "load a prebuilt tree file");
    train->add_option("--arity", train_args.arity, "tree arity b");
    train->add_option("--max-leaves", train_args.max_leaves, "k-means stopping cluster size");
    train->add_option("--kmeans-eps", train_args.kmeans_eps, "k-means centroid tolerance");
    train->add_option("--repr", train_args.repr, "sparse | dense");
    train->add_option("--dim", train_args.dim, "embedding width (dense repr)");
    train->add_option("--weighting", train_args.weighting, "uniform | tfidf");
    train->add_option("--lr", train_args.lr, "initial learning rate");
    train->add_option("--l2", train_args.l2, "L2 regularization strength");
    train->add_option("--epochs", train_args.epochs, "training epochs");
    train->add_option("--schedule", train_args.schedule, "linear | invpow");
    train->add_option("--power", train_args.power, "inverse-power exponent p");
    train->add_option("--pickone", train_args.pickone, "sample | expand (hsm)");
    train->add_option("--solver", train_args.solver, "online | batch");
    train->add_option("--batch-iters", train_args.batch_iters, "batch solver iterations");
    train->add_option("--batch-lr", train_args.batch_lr, "batch solver step size");
    train->add_option("--threads", train_args.threads,
                      "worker threads (>1 is nondeterministic)");
    train->add_option("--seed", train_args.seed, "run seed");
    train->add_flag("--no-shuffle", train_args.no_shuffle, "keep the example order fixed");

    std::string predict_model, predict_input, predict_out;
    std::uint32_t predict_k = 5;
    int predict_threads = 1;
    auto* predict = app.add_subcommand("predict", "write top-k predictions");
    predict->add_option("--model", predict_model)->required();
    predict->add_option("--input", predict_input)->required();
    predict->add_option("--out", predict_out)->required();
    predict->add_option("--topk", predict_k);
    predict->add_option("--threads", predict_threads);

    std::string eval_input, eval_predictions, eval_scores_a, eval_scores_b;
    std::vector<std::uint32_t> eval_ks{1, 3, 5};
    auto* eval = app.add_subcommand("eval", "precision@k report or paired significance tests");
    eval->add_option("--input", eval_input, "ground-truth dataset");
    eval->add_option("--predictions", eval_predictions, "predictions file");
    eval->add_option("--at", eval_ks, "k values");
    eval->add_option("--scores-a", eval_scores_a, "per-run scores, first system");
    eval->add_option("--scores-b", eval_scores_b, "per-run scores, second system");

    std::string tree_input, tree_out, tree_type = "kmeans", tree_weighting = "tfidf";
    std::uint32_t tree_arity = 2, tree_max_leaves = 100;
    double tree_eps = 0.001;
    std::uint64_t tree_seed = 42;
    auto* treecmd = app.add_subcommand("tree", "build and save a label tree");
    treecmd->add_option("--input", tree_input)->required();
    treecmd->add_option("--out", tree_out)->required();
    treecmd->add_option("--type", tree_type, "complete | huffman | kmeans");
    treecmd->add_option("--arity", tree_arity);
    treecmd->add_option("--max-leaves", tree_max_leaves);
    treecmd->add_option("--kmeans-eps", tree_eps);
    treecmd->add_option("--weighting", tree_weighting, "uniform | tfidf profiles");
    treecmd->add_option("--seed", tree_seed);

    std::string synth_model = "dependent", synth_out;
    SynthConfig synth_config;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--model", synth_model, "multiclass | independent | dependent");
    synth->add_option("--d", synth_config.d);
    synth->add_option("--m", synth_config.m);
    synth->add_option("--n", synth_config.n);
    synth->add_option("--c", synth_config.c, "softmax scaling (multiclass)");
    synth->add_option("--noise-sigma2", synth_config.noise_sigma2, "noise variance (dependent)");
    synth->add_option("--seed", synth_config.seed);
    synth->add_option("--out", synth_out)->required();

    std::string verify_suite = "all";
    std::uint64_t verify_seed = 1;
    auto* verify = app.add_subcommand("verify", "run the oracle verification suites");
    verify->add_option("--suite", verify_suite,
                       "proposition1 | proposition2 | theorem1 | theorem2 | appendixc | ucs | all");
    verify->add_option("--seed", verify_seed);

    std::string bench_model, bench_input;
    std::uint32_t bench_k = 5, bench_repeat = 1;
    auto* bench = app.add_subcommand("bench", "measure per-example prediction latency");
    bench->add_option("--model", bench_model)->required();
    bench->add_option("--input", bench_input)->required();
    bench->add_option("--topk", bench_k);
    bench->add_option("--repeat", bench_repeat);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(train_args);
        if (app.got_subcommand(predict))
            return cmd_predict(predict_model, predict_input, predict_out, predict_k,
                               predict_threads);
        if (app.got_subcommand(eval))
            return cmd_eval(eval_input, eval_predictions, eval_ks, eval_scores_a, eval_scores_b);
        if (app.got_subcommand(treecmd))
            return cmd_tree(tree_input, tree_out, tree_type, tree_arity, tree_max_leaves,
                            tree_eps, tree_weighting, tree_seed);
        if (app.got_subcommand(synth)) return cmd_synth(synth_model, synth_config, synth_out);
        if (app.got_subcommand(verify)) return cmd_verify(verify_suite, verify_seed);
        if (app.got_subcommand(bench))
            return cmd_bench(bench_model, bench_input, bench_k, bench_repeat);
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const BoundsError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
