#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "xtree/tree_model.hpp"

namespace xtree {

// Probabilistic label tree: one binary classifier per tree node, the root
// included (its model estimates the probability that the example carries at
// least one label).
struct PltModel {
    LabelTree tree;
    Representation repr;
    std::vector<NodeModel> nodes;  // one per tree node
};

PltModel make_plt(LabelTree tree, Representation repr);

struct UpdateSets {
    std::vector<std::int32_t> positive;  // sorted by node id
    std::vector<std::int32_t> negative;
};

// Positive nodes: union of root-to-leaf paths of the example's labels.
// Negative nodes: children of positive nodes that are not positive
// themselves. An empty label set yields positives = {} and
// negatives = {root}.
UpdateSets assign_update_sets(const LabelTree& tree, std::span<const std::uint32_t> labels);

TrainStats train_plt(PltModel& model, const Dataset& dataset, const TrainOptions& options);

// Product of the node probabilities along the label's root-to-leaf path.
double estimate_marginal(const PltModel& model, const SparseVector& x, std::uint32_t label);

// The k labels with the largest path products, scores non-increasing, ties
// by smaller label id; equal to brute-force evaluation of all marginals.
// renorm selects the optional sibling recalibration (off by default).
std::vector<std::pair<std::uint32_t, double>> predict_topk(
    const PltModel& model, const SparseVector& x, std::uint32_t k,
    SiblingRenorm renorm = SiblingRenorm::Off);

}  // namespace xtree
