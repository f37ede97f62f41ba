#include "xtree/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "xtree/plt.hpp"
#include "xtree/rng.hpp"

namespace xtree {

namespace fixtures {

const char* kPickOneCounterexample =
    "100 0.1\n"
    "110 0.5\n"
    "001 0.4\n";

const char* kHuffmanSuboptimal =
    "000 0.00542506973895235\n"
    "100 0.45052482149798523\n"
    "010 0.007146692774177104\n"
    "110 0.007846105693067965\n"
    "001 0.017377478577857614\n"
    "101 0.036985232036047186\n"
    "011 0.47432152079491147\n"
    "111 0.0003730788870011444\n";

}  // namespace fixtures

namespace {

ExactDistribution parse_fixture(const char* text) {
    std::istringstream in(text);
    return parse_distribution(in);
}

void split_rec(LabelTree& tree, std::int32_t parent, std::vector<std::uint32_t>& labels,
               std::uint32_t max_arity, std::uint32_t depth_budget, std::mt19937_64& engine) {
    if (labels.size() == 1) {
        tree.add_node(parent, static_cast<std::int32_t>(labels[0]));
        return;
    }
    if (depth_budget <= 1) {
        for (std::uint32_t label : labels) tree.add_node(parent, static_cast<std::int32_t>(label));
        return;
    }
    auto n = static_cast<std::uint32_t>(labels.size());
    std::uniform_int_distribution<std::uint32_t> pick_groups(2, std::min(max_arity, n));
    std::uint32_t groups = pick_groups(engine);
    std::shuffle(labels.begin(), labels.end(), engine);
    // cut points give non-empty contiguous groups
    std::vector<std::uint32_t> sizes(groups, 1);
    std::uniform_int_distribution<std::uint32_t> pick_group(0, groups - 1);
    for (std::uint32_t extra = n - groups; extra > 0; --extra) ++sizes[pick_group(engine)];

    std::size_t offset = 0;
    for (std::uint32_t g = 0; g < groups; ++g) {
        std::vector<std::uint32_t> part(labels.begin() + offset, labels.begin() + offset + sizes[g]);
        offset += sizes[g];
        if (part.size() == 1) {
            tree.add_node(parent, static_cast<std::int32_t>(part[0]));
        } else {
            std::int32_t child = tree.add_node(parent);
            split_rec(tree, child, part, max_arity, depth_budget - 1, engine);
        }
    }
}

}  // namespace

LabelTree random_label_tree(std::mt19937_64& engine, std::uint32_t m, std::uint32_t max_arity,
                            std::uint32_t max_depth) {
    if (m < 1) throw std::invalid_argument("random_label_tree: m must be >= 1");
    LabelTree tree;
    if (m == 1) {
        tree.add_node(-1, 0);
        return tree;
    }
    std::int32_t root = tree.add_node(-1);
    std::vector<std::uint32_t> labels(m);
    std::iota(labels.begin(), labels.end(), 0);
    split_rec(tree, root, labels, std::max(2u, max_arity), std::max(1u, max_depth), engine);
    tree.validate();
    return tree;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<CheckResult> suite_proposition1() {
    std::vector<CheckResult> results;
    auto dist = parse_fixture(fixtures::kPickOneCounterexample);
    auto eta = marginals(dist);
    auto mapped = pickone_map(dist);
    const std::vector<double> want_eta{0.6, 0.5, 0.4};
    const std::vector<double> want_mapped{0.35, 0.25, 0.40};
    double eta_err = 0.0, mapped_err = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        eta_err = std::max(eta_err, std::abs(eta[j] - want_eta[j]));
        mapped_err = std::max(mapped_err, std::abs(mapped[j] - want_mapped[j]));
    }
    results.push_back({"proposition1.marginals", eta_err <= 1e-12,
                       "eta = (" + fmt(eta[0]) + ", " + fmt(eta[1]) + ", " + fmt(eta[2]) + ")"});
    results.push_back({"proposition1.pickone", mapped_err <= 1e-12,
                       "eta' = (" + fmt(mapped[0]) + ", " + fmt(mapped[1]) + ", " +
                           fmt(mapped[2]) + ")"});

    // ranking by eta' picks label 3 (id 2); its precision@1 regret is 0.2
    auto top = top_k_indices(mapped, 1);
    double regret = pk_regret(dist, top, 1);
    results.push_back({"proposition1.regret",
                       top[0] == 2 && std::abs(regret - 0.2) <= 1e-12,
                       "top-1 by eta' = label id " + std::to_string(top[0]) +
                           ", regret = " + fmt(regret)});
    results.push_back({"proposition1.order_violated", !is_order_preserved(dist),
                       "eta order 0>1>2 vs eta' order 2>0>1"});
    return results;
}

std::vector<CheckResult> suite_proposition2(std::uint64_t seed) {
    auto engine = make_engine(seed, Stream::Test, 2);
    std::uniform_int_distribution<std::uint32_t> pick_m(1, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::uint32_t m = pick_m(engine);
        std::vector<double> etas(m);
        for (double& e : etas) e = u(engine);
        if (!is_order_preserved(make_independent(etas))) ++violations;
    }
    return {{"proposition2.order_preserved", violations == 0,
             "1000 random independent distributions, violations = " + std::to_string(violations)}};
}

std::vector<CheckResult> suite_theorem2(std::uint64_t seed) {
    auto engine = make_engine(seed, Stream::Test, 3);
    std::uniform_int_distribution<std::uint32_t> pick_m(1, 10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t failures = 0;
    double max_slack = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        std::uint32_t m = pick_m(engine);
        std::vector<double> etas(m), estimates(m);
        for (double& e : etas) e = u(engine);
        for (double& e : estimates) e = u(engine);
        std::uniform_int_distribution<std::uint32_t> pick_k(1, m);
        auto r = theorem2_check(etas, estimates, pick_k(engine));
        if (!r.holds) ++failures;
        max_slack = std::max(max_slack, r.regret - r.bound);
    }
    return {{"theorem2.bound", failures == 0,
             "10000 random (eta, estimate, k) triples, failures = " + std::to_string(failures) +
                 ", max regret-bound = " + fmt(max_slack)}};
}

std::vector<CheckResult> suite_theorem1(std::uint64_t seed) {
    auto engine = make_engine(seed, Stream::Test, 4);
    std::uniform_int_distribution<std::uint32_t> pick_m(1, 8);
    std::uniform_real_distribution<double> value(0.02, 0.98);
    std::size_t failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::uint32_t m = pick_m(engine);
        LabelTree tree = random_label_tree(engine, m, 3, 4);
        std::vector<double> truths(tree.node_count()), estimates(tree.node_count());
        for (double& v : truths) v = value(engine);
        for (double& v : estimates) v = value(engine);
        std::uniform_int_distribution<std::uint32_t> pick_label(0, m - 1);
        auto r = theorem1_check(tree, truths, estimates, pick_label(engine), {4.0});
        if (!r.holds) ++failures;
    }
    return {{"theorem1.bound", failures == 0,
             "1000 random trees (depth <= 4), lambda = 4, failures = " +
                 std::to_string(failures)}};
}

std::vector<CheckResult> suite_appendixc(std::uint64_t seed) {
    std::vector<CheckResult> results;
    auto engine = make_engine(seed, Stream::Test, 5);
    std::uniform_int_distribution<std::uint32_t> pick_m(2, 7);
    std::uniform_real_distribution<double> u(0.01, 1.0);

    double max_gap = 0.0;
    std::size_t failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::uint32_t m = pick_m(engine);
        std::vector<double> freqs(m);
        double total = 0.0;
        for (double& f : freqs) {
            f = u(engine);
            total += f;
        }
        for (double& f : freqs) f /= total;
        LabelTree huffman = build_huffman(freqs, 2);
        double huffman_cost = expected_cost(huffman, multiclass_node_masses(huffman, freqs));
        auto [best_tree, best_cost] = brute_force_min_cost_tree(freqs);
        double gap = std::abs(huffman_cost - best_cost);
        max_gap = std::max(max_gap, gap);
        if (gap > 1e-12 || huffman_cost < best_cost - 1e-12) ++failures;
    }
    results.push_back({"appendixc.huffman_multiclass_optimal", failures == 0,
                       "200 random multiclass draws (m <= 7), max |huffman - optimum| = " +
                           fmt(max_gap)});

    // dependent multi-label fixture: Huffman over the marginals is beaten
    auto dist = parse_fixture(fixtures::kHuffmanSuboptimal);
    auto eta = marginals(dist);
    LabelTree huffman = build_huffman(eta, 2);
    double huffman_cost = expected_cost(huffman, union_node_masses(huffman, dist));
    auto mass = [&dist](const std::vector<std::uint32_t>& subset) {
        return union_probability(dist, subset);
    };
    std::vector<std::uint32_t> all(dist.m);
    std::iota(all.begin(), all.end(), 0);
    auto [best_tree, best_cost] =
        brute_force_min_cost_tree(dist.m, mass, union_probability(dist, all));
    results.push_back({"appendixc.huffman_multilabel_suboptimal",
                       best_cost < huffman_cost - 1e-9,
                       "huffman cost " + fmt(huffman_cost) + " > optimum " + fmt(best_cost)});
    return results;
}

std::vector<CheckResult> suite_ucs(std::uint64_t seed) {
    auto engine = make_engine(seed, Stream::Test, 6);
    std::uniform_int_distribution<std::uint32_t> pick_m(1, 64);
    std::uniform_real_distribution<double> logit(-4.0, 4.0);
    std::size_t failures = 0;
    SparseVector empty({}, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        std::uint32_t m = pick_m(engine);
        PltModel model = make_plt(random_label_tree(engine, m, 4, 8),
                                  Representation::sparse_direct(1, FeatureWeighting::Uniform));
        bool all_ones = trial % 50 == 0;  // forces exact ties through the tie rule
        for (auto& node : model.nodes) {
            if (all_ones)
                node.constant_positive = true;
            else
                node.bias = logit(engine);
        }
        std::uniform_int_distribution<std::uint32_t> pick_k(1, m);
        std::uint32_t k = pick_k(engine);

        auto got = predict_topk(model, empty, k);
        std::vector<double> scores(m);
        for (std::uint32_t j = 0; j < m; ++j) scores[j] = estimate_marginal(model, empty, j);
        auto want = top_k_indices(scores, k);
        bool ok = got.size() == k;
        for (std::uint32_t i = 0; ok && i < k; ++i)
            ok = got[i].first == want[i] && got[i].second == scores[want[i]];
        if (!ok) ++failures;
    }
    return {{"ucs.exact_topk", failures == 0,
             "1000 random (tree, probabilities) instances (m <= 64), mismatches = " +
                 std::to_string(failures)}};
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const std::string& suite, std::uint64_t seed) {
    std::vector<CheckResult> results;
    auto append = [&](std::vector<CheckResult> more) {
        for (auto& r : more) results.push_back(std::move(r));
    };
    bool all = suite == "all";
    bool known = all;
    if (all || suite == "proposition1") known = true, append(suite_proposition1());
    if (all || suite == "proposition2") known = true, append(suite_proposition2(seed));
    if (all || suite == "theorem1") known = true, append(suite_theorem1(seed));
    if (all || suite == "theorem2") known = true, append(suite_theorem2(seed));
    if (all || suite == "appendixc") known = true, append(suite_appendixc(seed));
    if (all || suite == "ucs") known = true, append(suite_ucs(seed));
    if (!known) throw std::invalid_argument("unknown verify suite \"" + suite + "\"");
    return results;
}

}  // namespace xtree
