// Acceptance suite: one criterion per entry, each printed as a pass/fail
// line with its runtime against the stated budget. Run with no arguments for
// the full gate or with a criterion number to run one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "xtree/hsm.hpp"
#include "xtree/metrics.hpp"
#include "xtree/model_io.hpp"
#include "xtree/plt.hpp"
#include "xtree/rng.hpp"
#include "xtree/synth.hpp"
#include "xtree/verify.hpp"

using namespace xtree;

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

bool run_suite(const std::string& name, std::string& detail) {
    bool ok = true;
    std::string summary;
    for (const auto& r : run_verify_suite(name, 1)) {
        ok = ok && r.ok;
        if (!r.ok) summary += " FAILED:" + r.name;
    }
    detail = ok ? "all checks hold" : summary;
    return ok;
}

// ---- criteria 7 and 8: synthetic training harness ----

struct SyntheticRun {
    double p1_plt = 0.0;
    double p1_hsm = 0.0;
    std::vector<std::uint32_t> top1_plt, top1_hsm;
};

SyntheticRun train_and_score(const Dataset& full, std::uint64_t seed) {
    Dataset train, test;
    train.num_features = test.num_features = full.num_features;
    train.num_labels = test.num_labels = full.num_labels;
    std::size_t half = full.size() / 2;
    train.examples.assign(full.examples.begin(), full.examples.begin() + half);
    test.examples.assign(full.examples.begin() + half, full.examples.end());

    std::vector<double> freqs(train.num_labels, 0.0);
    for (const auto& ex : train.examples)
        for (std::uint32_t label : ex.labels) freqs[label] += 1.0;
    LabelTree tree = build_complete(train.num_labels, 2, freqs);
    Representation repr =
        Representation::sparse_direct(train.num_features, FeatureWeighting::Uniform);

    TrainOptions options;
    options.epochs = 15;
    options.schedule = LrSchedule::inverse_power(0.5, 0.5);
    options.l2 = 0.0;
    options.seed = seed;

    PltModel plt = make_plt(tree, repr);
    train_plt(plt, train, options);
    HsmModel hsm = make_hsm(tree, repr);
    train_hsm(hsm, train, PickOneMode::Expand, options);

    SyntheticRun run;
    std::vector<std::vector<std::uint32_t>> plt_pred, hsm_pred;
    plt_pred.reserve(test.size());
    hsm_pred.reserve(test.size());
    for (const auto& ex : test.examples) {
        auto a = predict_topk(plt, ex.features, 1);
        auto b = predict_topk_hsm(hsm, ex.features, 1);
        run.top1_plt.push_back(a[0].first);
        run.top1_hsm.push_back(b[0].first);
        plt_pred.push_back({a[0].first});
        hsm_pred.push_back({b[0].first});
    }
    run.p1_plt = mean_precision_at_k(test, plt_pred, 1);
    run.p1_hsm = mean_precision_at_k(test, hsm_pred, 1);
    return run;
}

bool criterion7(std::string& detail) {
    SynthConfig config;
    config.d = 3;
    config.m = 32;
    config.n = 20000;
    config.c = 10.0;
    config.seed = 7;
    Dataset full = gen_multiclass(config);
    SyntheticRun run = train_and_score(full, 7);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < run.top1_plt.size(); ++i)
        if (run.top1_plt[i] != run.top1_hsm[i]) ++mismatches;
    detail = "top-1 mismatches " + std::to_string(mismatches) + "/" +
             std::to_string(run.top1_plt.size()) + ", p@1 plt " + fmt(100 * run.p1_plt) +
             " hsm " + fmt(100 * run.p1_hsm);
    return mismatches == 0;
}

bool criterion8(std::string& detail) {
    const int runs = 25;
    std::vector<double> dep_plt, dep_hsm, ind_plt, ind_hsm;
    for (int r = 0; r < runs; ++r) {
        SynthConfig config;
        config.d = 3;
        config.m = 32;
        config.n = 100000;
        config.noise_sigma2 = 0.25;
        config.seed = 100 + static_cast<std::uint64_t>(r);
        Dataset dep = gen_dependent(config);
        SyntheticRun run = train_and_score(dep, config.seed);
        dep_plt.push_back(100.0 * run.p1_plt);
        dep_hsm.push_back(100.0 * run.p1_hsm);
    }
    for (int r = 0; r < runs; ++r) {
        SynthConfig config;
        config.d = 3;
        config.m = 32;
        config.n = 100000;
        config.seed = 500 + static_cast<std::uint64_t>(r);
        Dataset ind = gen_independent(config);
        SyntheticRun run = train_and_score(ind, config.seed);
        ind_plt.push_back(100.0 * run.p1_plt);
        ind_hsm.push_back(100.0 * run.p1_hsm);
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    double dep_diff = mean(dep_plt) - mean(dep_hsm);
    double ind_diff = mean(ind_plt) - mean(ind_hsm);
    double sign_p = paired_tests(dep_plt, dep_hsm).sign_p;
    int wins = 0;
    for (int r = 0; r < runs; ++r) wins += dep_plt[r] > dep_hsm[r];

    detail = "dependent: plt " + fmt(mean(dep_plt)) + " hsm " + fmt(mean(dep_hsm)) + " (diff " +
             fmt(dep_diff) + ", wins " + std::to_string(wins) + "/" + std::to_string(runs) +
             ", sign p " + fmt(sign_p) + "); independent: |diff| " + fmt(std::abs(ind_diff));
    return dep_diff > 0.0 && sign_p < 0.01 && std::abs(ind_diff) < 1.0;
}

bool criterion9(std::string& detail) {
    auto engine = make_engine(9, Stream::Test);
    std::uniform_real_distribution<double> value(-2.0, 2.0);
    std::uniform_int_distribution<std::uint32_t> idx(0, 15);
    std::uniform_int_distribution<int> target(0, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        NodeModel node = NodeModel::make_sparse();
        for (int i = 0; i < 8; ++i) node.w_sparse[idx(engine)] = value(engine);
        node.bias = value(engine);
        std::vector<FeatureEntry> entries;
        for (int i = 0; i < 6; ++i) entries.push_back({idx(engine), value(engine)});
        SparseVector v = SparseVector::from_unsorted(std::move(entries), 16);
        worst = std::max(worst, gradient_check(node, v, target(engine), 1e-5));
    }
    detail = "max relative error " + fmt(worst) + " over 100 draws at h = 1e-5";
    return worst < 1e-4;
}

bool criterion10(std::string& detail) {
    SynthConfig config;
    config.d = 3;
    config.m = 16;
    config.n = 1000;
    config.c = 10.0;
    config.seed = 10;
    Dataset ds = gen_multiclass(config);
    PltModel model = make_plt(build_complete(16, 2),
                              Representation::sparse_direct(3, FeatureWeighting::Uniform));
    TrainOptions options;
    options.epochs = 3;
    options.seed = 11;
    options.l2 = 0.003;
    train_plt(model, ds, options);

    std::ostringstream out1(std::ios::binary);
    save_model(out1, bundle_plt(model, {{"algo", "plt"}}));
    std::istringstream in1(out1.str(), std::ios::binary);
    ModelBundle loaded = load_model(in1);
    std::ostringstream out2(std::ios::binary);
    save_model(out2, loaded);
    bool bytes_equal = out1.str() == out2.str();

    PltModel reloaded = to_plt(std::move(loaded));
    bool predictions_equal = true;
    for (int i = 0; i < 100; ++i) {
        const SparseVector& x = ds.examples[static_cast<std::size_t>(i * 7 % ds.size())].features;
        auto a = predict_topk(model, x, 5);
        auto b = predict_topk(reloaded, x, 5);
        for (std::size_t t = 0; t < a.size(); ++t)
            predictions_equal = predictions_equal && a[t].first == b[t].first &&
                                a[t].second == b[t].second;
    }
    detail = std::string("save/load/save byte-identical: ") + (bytes_equal ? "yes" : "NO") +
             ", predictions bit-equal: " + (predictions_equal ? "yes" : "NO");
    return bytes_equal && predictions_equal;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<bool(std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = argc > 1 ? std::atoi(argv[1]) : 0;

    std::vector<Criterion> criteria{
        {1, "proposition 1 fixture", 1.0,
         [](std::string& d) { return run_suite("proposition1", d); }},
        {2, "proposition 2 order preservation", 10.0,
         [](std::string& d) { return run_suite("proposition2", d); }},
        {3, "theorem 2 regret bound", 10.0,
         [](std::string& d) { return run_suite("theorem2", d); }},
        {4, "theorem 1 path bound", 10.0,
         [](std::string& d) { return run_suite("theorem1", d); }},
        {5, "appendix C Huffman costs", 60.0,
         [](std::string& d) { return run_suite("appendixc", d); }},
        {6, "uniform-cost search exactness", 30.0,
         [](std::string& d) { return run_suite("ucs", d); }},
        {7, "multiclass PLT/HSM reduction", 300.0, criterion7},
        {8, "table 4 directional replication", 1800.0, criterion8},
        {9, "gradient check", 5.0, criterion9},
        {10, "model persistence", 5.0, criterion10},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_budget = elapsed <= c.budget_seconds;
        bool pass = ok && in_budget;
        failures += !pass;
        std::printf("[%s] criterion %2d (%s): %s [%.2fs / budget %.0fs]\n",
                    pass ? "PASS" : "FAIL", c.id, c.name, detail.c_str(), elapsed,
                    c.budget_seconds);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
