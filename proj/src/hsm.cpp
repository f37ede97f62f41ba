#include "xtree/hsm.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "xtree/rng.hpp"

namespace xtree {

HsmModel make_hsm(LabelTree tree, Representation repr) {
    HsmModel m;
    m.tree = std::move(tree);
    m.repr = std::move(repr);
    m.nodes.reserve(m.tree.node_count());
    for (std::size_t i = 0; i < m.tree.node_count(); ++i)
        m.nodes.push_back(m.repr.kind == ReprKind::DenseEmbedding
                              ? NodeModel::make_dense(m.repr.dim)
                              : NodeModel::make_sparse());
    return m;
}

std::vector<std::pair<std::uint32_t, double>> pick_one_label(const Example& example,
                                                             PickOneMode mode,
                                                             std::mt19937_64& engine) {
    if (example.labels.empty()) return {};
    if (example.labels.size() == 1) return {{example.labels.front(), 1.0}};
    if (mode == PickOneMode::Sample) {
        std::uniform_int_distribution<std::size_t> pick(0, example.labels.size() - 1);
        return {{example.labels[pick(engine)], 1.0}};
    }
    double w = 1.0 / static_cast<double>(example.labels.size());
    std::vector<std::pair<std::uint32_t, double>> copies;
    copies.reserve(example.labels.size());
    for (std::uint32_t label : example.labels) copies.emplace_back(label, w);
    return copies;
}

namespace {

void train_hsm_block(HsmModel& model, const Dataset& dataset,
                     std::span<const std::uint32_t> order, PickOneMode mode,
                     const TrainOptions& options, std::uint32_t epoch, TrainStats& stats) {
    const bool dense = model.repr.kind == ReprKind::DenseEmbedding;
    std::vector<double> input_grad;
    PreparedInput input;
    std::vector<std::int32_t> path;
    std::vector<std::pair<std::uint32_t, double>> copies;
    for (std::uint32_t idx : order) {
        const Example& ex = dataset.examples[idx];
        ++stats.examples_seen;
        if (ex.labels.empty()) {
            ++stats.skipped_empty;
            continue;
        }
        copies.clear();
        if (mode == PickOneMode::Sample && ex.labels.size() > 1) {
            // sample mode redraws the label each epoch
            auto engine = make_engine(options.seed, Stream::Reduction,
                                      (static_cast<std::uint64_t>(epoch) << 32) | idx);
            copies = pick_one_label(ex, mode, engine);
        } else if (mode == PickOneMode::Sample) {
            copies.emplace_back(ex.labels.front(), 1.0);
        } else {
            double w = 1.0 / static_cast<double>(ex.labels.size());
            for (std::uint32_t label : ex.labels) copies.emplace_back(label, w);
        }
        prepare_input(model.repr, ex.features, input);
        if (dense) input_grad.assign(model.repr.dim, 0.0);
        for (const auto& [label, copy_weight] : copies) {
            double w = copy_weight * ex.weight;
            model.tree.label_to_path_into(label, path);
            for (std::size_t i = 1; i < path.size(); ++i) {
                std::int32_t v = path[i];
                auto& node = model.nodes[static_cast<std::size_t>(v)];
                node_update(node, input, 1.0, w, options.schedule, options.l2,
                            dense ? &input_grad : nullptr);
                node.saw_positive = true;
                ++stats.node_updates;
                for (std::int32_t s : model.tree.node(path[i - 1]).children) {
                    if (s == v) continue;
                    auto& sibling = model.nodes[static_cast<std::size_t>(s)];
                    node_update(sibling, input, 0.0, w, options.schedule, options.l2,
                                dense ? &input_grad : nullptr);
                    sibling.saw_negative = true;
                    ++stats.node_updates;
                }
            }
        }
        if (dense) model.repr.backprop(ex.features, input_grad, options.schedule);
    }
}

}  // namespace

TrainStats train_hsm(HsmModel& model, const Dataset& dataset, PickOneMode mode,
                     const TrainOptions& options) {
    for (const auto& ex : dataset.examples)
        if (ex.features.dimension() != model.repr.input_dim)
            throw std::invalid_argument("dataset dimension does not match the model");
    if (options.solver == Solver::Batch)
        throw std::invalid_argument("the batch solver is implemented for PLT models only");

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
            train_hsm_block(model, dataset, order, mode, options, epoch, stats);
        } else {
            auto t = static_cast<std::uint32_t>(options.threads);
            std::vector<TrainStats> shard_stats(t);
            std::vector<std::thread> workers;
            for (std::uint32_t s = 0; s < t; ++s) {
                std::uint32_t begin = static_cast<std::uint64_t>(s) * n / t;
                std::uint32_t end = static_cast<std::uint64_t>(s + 1) * n / t;
                workers.emplace_back([&, begin, end, s] {
                    train_hsm_block(model, dataset,
                                    std::span(order).subspan(begin, end - begin), mode, options,
                                    epoch, shard_stats[s]);
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& s : shard_stats) {
                stats.node_updates += s.node_updates;
                stats.examples_seen += s.examples_seen;
                stats.skipped_empty += s.skipped_empty;
            }
        }
    }
    for (auto& node : model.nodes)
        if (node.saw_positive && !node.saw_negative) {
            node.constant_positive = true;
            ++stats.constant_nodes;
        }
    return stats;
}

std::vector<std::pair<std::uint32_t, double>> predict_topk_hsm(const HsmModel& model,
                                                               const SparseVector& x,
                                                               std::uint32_t k) {
    if (k < 1 || k > model.tree.num_labels())
        throw std::invalid_argument("k must be in [1, m]");
    PreparedInput input;
    prepare_input(model.repr, x, input);
    auto prob = [&](std::int32_t v) {
        return node_probability(model.nodes[static_cast<std::size_t>(v)], input);
    };
    return ucs_topk(model.tree, prob, k, SiblingRenorm::Always, 1.0);
}

}  // namespace xtree
