#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "xtree/dataset.hpp"

namespace xtree {

struct TreeNode {
    std::int32_t parent = -1;                // -1 for the root
    std::vector<std::int32_t> children;      // ordered
    std::int32_t label = -1;                 // >= 0 iff leaf
};

// Prefix-code tree over labels: exactly one root, leaves <-> labels is a
// bijection over {0..m-1}, internal nodes have >= 2 children. Nodes of
// different arity may coexist in one tree.
class LabelTree {
public:
    std::int32_t add_node(std::int32_t parent, std::int32_t label = -1);

    std::size_t node_count() const { return nodes_.size(); }
    std::uint32_t num_labels() const { return static_cast<std::uint32_t>(leaf_of_label_.size()); }
    std::int32_t root() const { return root_; }
    const TreeNode& node(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)]; }
    std::int32_t leaf_of(std::uint32_t label) const;
    std::uint32_t arity_hint() const { return arity_hint_; }
    void set_arity_hint(std::uint32_t b) { arity_hint_ = b; }

    // Node id sequence root..leaf for the given label.
    std::vector<std::int32_t> label_to_path(std::uint32_t label) const;
    void label_to_path_into(std::uint32_t label, std::vector<std::int32_t>& out) const;
    // Inverse; throws if the node is not a leaf.
    std::uint32_t path_to_label(std::int32_t leaf) const;

    std::uint32_t depth(std::int32_t id) const;  // edges from the root

    // Smallest label id in each node's subtree; used as a deterministic
    // tie-break during best-first search.
    const std::vector<std::uint32_t>& min_label_in_subtree() const;

    // Throws std::invalid_argument if any structural invariant is violated.
    void validate() const;

    // Versioned text block: "tree <version> <nodes> <labels> <arity>" header
    // followed by one "id parent label_or_-1" line per node.
    void save(std::ostream& out) const;
    static LabelTree load(std::istream& in);

private:
    std::vector<TreeNode> nodes_;
    std::vector<std::int32_t> leaf_of_label_;
    std::int32_t root_ = -1;
    std::uint32_t arity_hint_ = 2;
    mutable std::vector<std::uint32_t> min_label_;  // lazily computed cache
};

// Balanced b-ary tree of minimal height with m leaves (array heap layout).
// When frequencies are given, labels are assigned to leaves in order of
// decreasing frequency (ties by label id), so frequent labels sit at the
// shallow leaves; otherwise labels are assigned in id order.
LabelTree build_complete(std::uint32_t m, std::uint32_t b,
                         std::span<const double> frequencies = {});

// b-ary Huffman tree over label frequencies, padded with zero-frequency
// dummy symbols when (m-1) mod (b-1) != 0. Merge order ties are broken by
// (frequency, lowest contained label id). Throws if all frequencies are zero.
LabelTree build_huffman(std::span<const double> frequencies, std::uint32_t b);

struct LabelProfile {
    std::uint32_t label;
    SparseVector profile;
};

// Recursive top-down balanced k-means over label profiles. Every split
// produces b clusters whose sizes differ by at most one; clusters of size
// <= max_leaves become a node whose children are the leaves themselves.
// Profiles are L2-normalized before clustering. Deterministic per seed.
LabelTree build_kmeans_tree(const std::vector<LabelProfile>& profiles, std::uint32_t b,
                            std::uint32_t max_leaves, double epsilon, std::uint64_t seed);

// Per-label mean feature vector over the training examples tagged with the
// label; labels with no positive example get an empty profile.
std::vector<LabelProfile> label_profiles(const Dataset& dataset, const std::vector<double>* idf);

// Expected number of training instances flowing through the tree:
// sum over leaves of the masses of their proper ancestors (root included);
// a leaf that is itself the root contributes node_mass(root). node_mass must
// hold one value per node, with the root's mass set by the caller (1 for the
// conditional form).
double expected_cost(const LabelTree& tree, std::span<const double> node_mass);

// Node masses for a multiclass distribution: leaf mass is the label
// frequency, an internal node's mass is the sum over its subtree.
std::vector<double> multiclass_node_masses(const LabelTree& tree,
                                           std::span<const double> frequencies);

// Mass of a subtree given the set of labels below it.
using SubsetMassFn = std::function<double(const std::vector<std::uint32_t>&)>;

// Exhaustive search over all full binary trees with m labeled leaves,
// minimizing expected_cost; m <= 8. subtree_mass supplies internal node
// masses (union probabilities in the multi-label case), root_mass the
// root term.
std::pair<LabelTree, double> brute_force_min_cost_tree(std::uint32_t m,
                                                       const SubsetMassFn& subtree_mass,
                                                       double root_mass);

// Multiclass convenience: internal mass = sum of the children's frequencies.
std::pair<LabelTree, double> brute_force_min_cost_tree(std::span<const double> frequencies);

}  // namespace xtree
