#include "xtree/plt.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "xtree/rng.hpp"

namespace xtree {

namespace {

std::vector<NodeModel> make_node_models(const LabelTree& tree, const Representation& repr) {
    std::vector<NodeModel> nodes;
    nodes.reserve(tree.node_count());
    for (std::size_t i = 0; i < tree.node_count(); ++i)
        nodes.push_back(repr.kind == ReprKind::DenseEmbedding ? NodeModel::make_dense(repr.dim)
                                                              : NodeModel::make_sparse());
    return nodes;
}

}  // namespace

PltModel make_plt(LabelTree tree, Representation repr) {
    PltModel m;
    m.tree = std::move(tree);
    m.repr = std::move(repr);
    m.nodes = make_node_models(m.tree, m.repr);
    return m;
}

namespace {

// scratch holds one mark byte per node and is cleaned up before returning
void assign_update_sets_into(const LabelTree& tree, std::span<const std::uint32_t> labels,
                             UpdateSets& sets, std::vector<char>& scratch) {
    sets.positive.clear();
    sets.negative.clear();
    if (labels.empty()) {
        sets.negative.push_back(tree.root());
        return;
    }
    scratch.resize(tree.node_count());
    for (std::uint32_t label : labels)
        for (std::int32_t v = tree.leaf_of(label); v >= 0; v = tree.node(v).parent) {
            if (scratch[static_cast<std::size_t>(v)]) break;  // shared prefix already marked
            scratch[static_cast<std::size_t>(v)] = 1;
        }
    for (std::size_t v = 0; v < tree.node_count(); ++v) {
        if (!scratch[v]) continue;
        sets.positive.push_back(static_cast<std::int32_t>(v));
        for (std::int32_t c : tree.node(static_cast<std::int32_t>(v)).children)
            if (!scratch[static_cast<std::size_t>(c)]) sets.negative.push_back(c);
    }
    std::sort(sets.negative.begin(), sets.negative.end());
    for (std::int32_t v : sets.positive) scratch[static_cast<std::size_t>(v)] = 0;
}

}  // namespace

UpdateSets assign_update_sets(const LabelTree& tree, std::span<const std::uint32_t> labels) {
    UpdateSets sets;
    std::vector<char> scratch;
    assign_update_sets_into(tree, labels, sets, scratch);
    return sets;
}

namespace {

void train_plt_block(PltModel& model, const Dataset& dataset,
                     std::span<const std::uint32_t> order, const TrainOptions& options,
                     TrainStats& stats) {
    const bool dense = model.repr.kind == ReprKind::DenseEmbedding;
    std::vector<double> input_grad;
    std::uint64_t node_updates = 0, examples_seen = 0;
    PreparedInput input;
    UpdateSets sets;
    std::vector<char> scratch;
    for (std::uint32_t idx : order) {
        const Example& ex = dataset.examples[idx];
        prepare_input(model.repr, ex.features, input);
        assign_update_sets_into(model.tree, ex.labels, sets, scratch);
        if (dense) input_grad.assign(model.repr.dim, 0.0);
        for (std::int32_t v : sets.positive) {
            auto& node = model.nodes[static_cast<std::size_t>(v)];
            node_update(node, input, 1.0, ex.weight, options.schedule, options.l2,
                        dense ? &input_grad : nullptr);
            node.saw_positive = true;
            ++node_updates;
        }
        for (std::int32_t v : sets.negative) {
            auto& node = model.nodes[static_cast<std::size_t>(v)];
            node_update(node, input, 0.0, ex.weight, options.schedule, options.l2,
                        dense ? &input_grad : nullptr);
            node.saw_negative = true;
            ++node_updates;
        }
        if (dense) model.repr.backprop(ex.features, input_grad, options.schedule);
        ++examples_seen;
    }
    stats.node_updates += node_updates;
    stats.examples_seen += examples_seen;
}

void finalize_constant_nodes(std::vector<NodeModel>& nodes, TrainStats& stats) {
    for (auto& node : nodes)
        if (node.saw_positive && !node.saw_negative) {
            node.constant_positive = true;
            ++stats.constant_nodes;
        }
}

TrainStats train_plt_batch(PltModel& model, const Dataset& dataset,
                           const TrainOptions& options) {
    if (model.repr.kind == ReprKind::DenseEmbedding)
        throw std::invalid_argument("the batch solver supports the sparse representation only");
    TrainStats stats;
    std::vector<SparseVector> transformed;
    transformed.reserve(dataset.size());
    for (const auto& ex : dataset.examples)
        transformed.push_back(model.repr.transform_sparse(ex.features));

    std::vector<std::vector<BatchItem>> per_node(model.nodes.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Example& ex = dataset.examples[i];
        UpdateSets sets = assign_update_sets(model.tree, ex.labels);
        for (std::int32_t v : sets.positive)
            per_node[static_cast<std::size_t>(v)].push_back({&transformed[i], 1.0, ex.weight});
        for (std::int32_t v : sets.negative)
            per_node[static_cast<std::size_t>(v)].push_back({&transformed[i], 0.0, ex.weight});
        ++stats.examples_seen;
    }
    for (std::size_t v = 0; v < model.nodes.size(); ++v) {
        auto& node = model.nodes[v];
        for (const auto& item : per_node[v]) {
            if (item.target > 0.5) node.saw_positive = true;
            else node.saw_negative = true;
        }
        if (node.saw_positive && !node.saw_negative) continue;  // constant, no training
        fit_batch(node, per_node[v], options.batch_iterations, options.batch_lr, options.l2);
        stats.node_updates += per_node[v].size();
    }
    finalize_constant_nodes(model.nodes, stats);
    return stats;
}

}  // namespace

TrainStats train_plt(PltModel& model, const Dataset& dataset, const TrainOptions& options) {
    for (const auto& ex : dataset.examples)
        if (ex.features.dimension() != model.repr.input_dim)
            throw std::invalid_argument("dataset dimension does not match the model");

    if (options.solver == Solver::Batch) return train_plt_batch(model, dataset, options);

    TrainStats stats;
    auto n = static_cast<std::uint32_t>(dataset.size());
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::uint32_t epoch = 0; epoch < options.epochs; ++epoch) {
        if (options.shuffle) {
            auto engine = make_engine(options.seed, Stream::Shuffle, epoch);
            std::shuffle(order.begin(), order.end(), engine);
        }
        if (options.threads <= 1 || n < 2) {
            train_plt_block(model, dataset, order, options, stats);
        } else {
            // shared-update mode: shards race on the node models by contract
            auto t = static_cast<std::uint32_t>(options.threads);
            std::vector<TrainStats> shard_stats(t);
            std::vector<std::thread> workers;
            for (std::uint32_t s = 0; s < t; ++s) {
                std::uint32_t begin = static_cast<std::uint64_t>(s) * n / t;
                std::uint32_t end = static_cast<std::uint64_t>(s + 1) * n / t;
                workers.emplace_back([&, begin, end, s] {
                    train_plt_block(model, dataset,
                                    std::span(order).subspan(begin, end - begin), options,
                                    shard_stats[s]);
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& s : shard_stats) {
                stats.node_updates += s.node_updates;
                stats.examples_seen += s.examples_seen;
            }
        }
    }
    finalize_constant_nodes(model.nodes, stats);
    return stats;
}

double estimate_marginal(const PltModel& model, const SparseVector& x, std::uint32_t label) {
    PreparedInput input;
    prepare_input(model.repr, x, input);
    double product = 1.0;
    for (std::int32_t v : model.tree.label_to_path(label))
        product *= node_probability(model.nodes[static_cast<std::size_t>(v)], input);
    return product;
}

std::vector<std::pair<std::uint32_t, double>> predict_topk(const PltModel& model,
                                                           const SparseVector& x,
                                                           std::uint32_t k,
                                                           SiblingRenorm renorm) {
    if (k < 1 || k > model.tree.num_labels())
        throw std::invalid_argument("k must be in [1, m]");
    PreparedInput input;
    prepare_input(model.repr, x, input);
    auto prob = [&](std::int32_t v) {
        return node_probability(model.nodes[static_cast<std::size_t>(v)], input);
    };
    double root_score = prob(model.tree.root());
    return ucs_topk(model.tree, prob, k, renorm, root_score);
}

}  // namespace xtree
