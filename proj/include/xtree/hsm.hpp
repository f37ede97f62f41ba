#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "xtree/tree_model.hpp"

namespace xtree {

// Hierarchical softmax: binary classifiers in every non-root node, sibling
// estimates renormalized to sum to 1 at prediction time. Multi-label data is
// reduced to multiclass with the pick-one-label heuristic.
struct HsmModel {
    LabelTree tree;
    Representation repr;
    std::vector<NodeModel> nodes;  // indexed by node id; the root entry is unused
};

HsmModel make_hsm(LabelTree tree, Representation repr);

enum class PickOneMode { Sample, Expand };

// Reduction of one multi-label example to weighted multiclass copies:
// Sample draws one positive label uniformly (weight 1), Expand emits one
// copy per positive label with weight 1/s. Empty label sets yield no copies;
// the caller counts the skip.
std::vector<std::pair<std::uint32_t, double>> pick_one_label(const Example& example,
                                                             PickOneMode mode,
                                                             std::mt19937_64& engine);

TrainStats train_hsm(HsmModel& model, const Dataset& dataset, PickOneMode mode,
                     const TrainOptions& options);

// Uniform-cost search over sibling-renormalized probabilities; the scores
// over all m labels form a distribution summing to 1.
std::vector<std::pair<std::uint32_t, double>> predict_topk_hsm(const HsmModel& model,
                                                               const SparseVector& x,
                                                               std::uint32_t k);

}  // namespace xtree
