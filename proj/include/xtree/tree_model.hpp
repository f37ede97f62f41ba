#pragma once

#include <cstdint>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "xtree/label_tree.hpp"
#include "xtree/learner.hpp"

namespace xtree {

enum class Solver { Online, Batch };

struct TrainOptions {
    std::uint32_t epochs = 20;
    LrSchedule schedule = LrSchedule::inverse_power(0.1, 0.5);
    double l2 = 0.0;
    int threads = 1;          // >1 selects the nondeterministic shared-update mode
    std::uint64_t seed = 0;
    bool shuffle = true;      // per-epoch example order, seeded
    Solver solver = Solver::Online;
    std::uint32_t batch_iterations = 200;  // batch solver only
    double batch_lr = 2.0;                 // batch solver only
};

struct TrainStats {
    std::uint64_t node_updates = 0;
    std::uint64_t examples_seen = 0;     // example visits across epochs
    std::uint64_t skipped_empty = 0;     // HSM: empty-label examples skipped
    std::uint32_t constant_nodes = 0;    // finalized constant-positive
};

// Per-example prediction input, computed once and reused across nodes. The
// sparse path borrows the caller's vector when no reweighting applies, so the
// input must outlive the PreparedInput.
struct PreparedInput {
    bool dense = false;
    const SparseVector* borrowed = nullptr;
    SparseVector owned;
    std::vector<double> vec;

    const SparseVector& sparse() const { return borrowed ? *borrowed : owned; }
};

void prepare_input(const Representation& repr, const SparseVector& x, PreparedInput& out);

// Node probability used in path products: the raw classifier estimate
// clamped below at 1e-12 (1 for constant-positive nodes).
double node_probability(const NodeModel& node, const PreparedInput& input);

double node_update(NodeModel& node, const PreparedInput& input, double target, double weight,
                   const LrSchedule& schedule, double l2, std::vector<double>* input_grad);

enum class SiblingRenorm {
    Off,         // raw products (PLT default)
    IfBelowOne,  // divide by the sum only when it is < 1
    Always,      // divide by the sum (HSM)
};

// Renormalization of one node's child estimates under the IfBelowOne rule.
std::vector<double> renormalize_siblings(std::vector<double> estimates);

// Uniform-cost search for the k highest path products. The priority queue is
// ordered by (score desc, smallest label in subtree asc), which makes the
// leaf pop order equal to (final score desc, label id asc) and therefore
// identical to brute-force evaluation of all marginals with that tie rule.
// root_score: the root factor (the root classifier estimate for a PLT, 1 for
// an HSM). Returns up to k (label, score) pairs in output order.
template <typename ProbFn>
std::vector<std::pair<std::uint32_t, double>> ucs_topk(const LabelTree& tree, ProbFn&& prob,
                                                       std::uint32_t k, SiblingRenorm renorm,
                                                       double root_score) {
    struct Entry {
        double score;
        std::int32_t node;
        std::uint32_t min_label;
    };
    struct Worse {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.score != b.score) return a.score < b.score;
            return a.min_label > b.min_label;
        }
    };
    const auto& min_label = tree.min_label_in_subtree();
    std::priority_queue<Entry, std::vector<Entry>, Worse> queue;
    queue.push({root_score, tree.root(), min_label[static_cast<std::size_t>(tree.root())]});

    std::vector<std::pair<std::uint32_t, double>> out;
    out.reserve(k);
    std::vector<double> child_probs;
    while (!queue.empty() && out.size() < k) {
        Entry e = queue.top();
        queue.pop();
        const TreeNode& n = tree.node(e.node);
        if (n.label >= 0) {
            out.emplace_back(static_cast<std::uint32_t>(n.label), e.score);
            continue;
        }
        child_probs.clear();
        for (std::int32_t c : n.children) child_probs.push_back(prob(c));
        if (renorm != SiblingRenorm::Off) {
            double sum = 0.0;
            for (double p : child_probs) sum += p;
            if (sum > 0.0 && (renorm == SiblingRenorm::Always || sum < 1.0))
                for (double& p : child_probs) p /= sum;
        }
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            std::int32_t c = n.children[i];
            queue.push({e.score * child_probs[i], c, min_label[static_cast<std::size_t>(c)]});
        }
    }
    return out;
}

}  // namespace xtree
