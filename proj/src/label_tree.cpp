#include "xtree/label_tree.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>

#include "xtree/error.hpp"
#include "xtree/rng.hpp"

namespace xtree {

std::int32_t LabelTree::add_node(std::int32_t parent, std::int32_t label) {
    auto id = static_cast<std::int32_t>(nodes_.size());
    TreeNode n;
    n.parent = parent;
    n.label = label;
    nodes_.push_back(std::move(n));
    if (parent >= 0)
        nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    else
        root_ = id;
    if (label >= 0) {
        if (static_cast<std::size_t>(label) >= leaf_of_label_.size())
            leaf_of_label_.resize(static_cast<std::size_t>(label) + 1, -1);
        leaf_of_label_[static_cast<std::size_t>(label)] = id;
    }
    min_label_.clear();
    return id;
}

std::int32_t LabelTree::leaf_of(std::uint32_t label) const {
    if (label >= leaf_of_label_.size() || leaf_of_label_[label] < 0)
        throw BoundsError("unknown label " + std::to_string(label));
    return leaf_of_label_[label];
}

std::vector<std::int32_t> LabelTree::label_to_path(std::uint32_t label) const {
    std::vector<std::int32_t> path;
    label_to_path_into(label, path);
    return path;
}

void LabelTree::label_to_path_into(std::uint32_t label, std::vector<std::int32_t>& out) const {
    out.clear();
    for (std::int32_t v = leaf_of(label); v >= 0; v = nodes_[static_cast<std::size_t>(v)].parent)
        out.push_back(v);
    std::reverse(out.begin(), out.end());
}

std::uint32_t LabelTree::path_to_label(std::int32_t leaf) const {
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= nodes_.size() ||
        nodes_[static_cast<std::size_t>(leaf)].label < 0)
        throw BoundsError("node " + std::to_string(leaf) + " is not a leaf");
    return static_cast<std::uint32_t>(nodes_[static_cast<std::size_t>(leaf)].label);
}

std::uint32_t LabelTree::depth(std::int32_t id) const {
    std::uint32_t d = 0;
    for (std::int32_t v = id; nodes_[static_cast<std::size_t>(v)].parent >= 0;
         v = nodes_[static_cast<std::size_t>(v)].parent)
        ++d;
    return d;
}

const std::vector<std::uint32_t>& LabelTree::min_label_in_subtree() const {
    if (min_label_.size() == nodes_.size()) return min_label_;
    min_label_.assign(nodes_.size(), std::numeric_limits<std::uint32_t>::max());
    // children always have larger ids than parents in every builder here,
    // but loaded trees may not obey that, so propagate until fixpoint-free
    // via reverse topological order computed from depths.
    std::vector<std::int32_t> order(nodes_.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint32_t> depths(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        depths[i] = depth(static_cast<std::int32_t>(i));
    std::sort(order.begin(), order.end(),
              [&](std::int32_t a, std::int32_t b) { return depths[a] > depths[b]; });
    for (std::int32_t id : order) {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.label >= 0)
            min_label_[id] = static_cast<std::uint32_t>(n.label);
        for (std::int32_t c : n.children)
            min_label_[id] = std::min(min_label_[id], min_label_[c]);
    }
    return min_label_;
}

void LabelTree::validate() const {
    if (nodes_.empty()) throw std::invalid_argument("tree has no nodes");
    std::size_t roots = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.parent < 0) {
            ++roots;
            if (static_cast<std::int32_t>(i) != root_)
                throw std::invalid_argument("parentless node is not the registered root");
        } else if (static_cast<std::size_t>(n.parent) >= nodes_.size()) {
            throw std::invalid_argument("parent id out of range");
        }
        if (n.label < 0 && n.children.size() < 2 && nodes_.size() > 1)
            throw std::invalid_argument("internal node with fewer than 2 children");
        if (n.label >= 0 && !n.children.empty())
            throw std::invalid_argument("leaf with children");
    }
    if (roots != 1) throw std::invalid_argument("tree must have exactly one root");

    std::size_t m = leaf_of_label_.size();
    std::size_t leaves = 0;
    for (const auto& n : nodes_)
        if (n.label >= 0) ++leaves;
    if (leaves != m) throw std::invalid_argument("leaves are not a bijection onto labels");
    for (std::size_t j = 0; j < m; ++j) {
        std::int32_t leaf = leaf_of_label_[j];
        if (leaf < 0 || nodes_[static_cast<std::size_t>(leaf)].label != static_cast<std::int32_t>(j))
            throw std::invalid_argument("label " + std::to_string(j) + " has no leaf");
    }

    // reachability from the root implies no cycles
    std::vector<char> seen(nodes_.size(), 0);
    std::queue<std::int32_t> q;
    q.push(root_);
    seen[static_cast<std::size_t>(root_)] = 1;
    std::size_t visited = 0;
    while (!q.empty()) {
        std::int32_t v = q.front();
        q.pop();
        ++visited;
        for (std::int32_t c : nodes_[static_cast<std::size_t>(v)].children) {
            if (nodes_[static_cast<std::size_t>(c)].parent != v)
                throw std::invalid_argument("child/parent links disagree");
            if (seen[static_cast<std::size_t>(c)]++)
                throw std::invalid_argument("node reached twice; tree has a cycle");
            q.push(c);
        }
    }
    if (visited != nodes_.size()) throw std::invalid_argument("unreachable nodes present");
}

void LabelTree::save(std::ostream& out) const {
    out << "tree 1 " << nodes_.size() << ' ' << leaf_of_label_.size() << ' ' << arity_hint_
        << '\n';
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        out << i << ' ' << nodes_[i].parent << ' ' << nodes_[i].label << '\n';
}

LabelTree LabelTree::load(std::istream& in) {
    std::string tag;
    int version = 0;
    std::size_t n = 0, m = 0;
    std::uint32_t arity = 0;
    in >> tag >> version >> n >> m >> arity;
    if (!in || tag != "tree") throw ParseError(1, "bad tree block header");
    if (version != 1) throw ParseError(1, "unsupported tree block version");
    LabelTree t;
    t.nodes_.resize(n);
    t.leaf_of_label_.assign(m, -1);
    t.arity_hint_ = arity;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t id;
        std::int32_t parent, label;
        in >> id >> parent >> label;
        if (!in || id != i) throw ParseError(i + 2, "bad tree node line");
        t.nodes_[i].parent = parent;
        t.nodes_[i].label = label;
        if (parent < 0)
            t.root_ = static_cast<std::int32_t>(i);
        else
            t.nodes_[static_cast<std::size_t>(parent)].children.push_back(
                static_cast<std::int32_t>(i));
        if (label >= 0) {
            if (static_cast<std::size_t>(label) >= m) throw ParseError(i + 2, "label out of range");
            t.leaf_of_label_[static_cast<std::size_t>(label)] = static_cast<std::int32_t>(i);
        }
    }
    t.validate();
    return t;
}

LabelTree build_complete(std::uint32_t m, std::uint32_t b, std::span<const double> frequencies) {
    if (m < 1) throw std::invalid_argument("build_complete: m must be >= 1");
    if (b < 2) throw std::invalid_argument("build_complete: b must be >= 2");
    if (!frequencies.empty() && frequencies.size() != m)
        throw std::invalid_argument("build_complete: frequencies size mismatch");

    std::vector<std::uint32_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    if (!frequencies.empty())
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t c) {
            if (frequencies[a] != frequencies[c]) return frequencies[a] > frequencies[c];
            return a < c;
        });

    LabelTree t;
    t.set_arity_hint(b);
    if (m == 1) {
        t.add_node(-1, 0);  // degenerate: the root is the single leaf
        return t;
    }
    // heap layout: total nodes ceil((b*m - 1) / (b - 1)), internal first
    auto total = static_cast<std::size_t>(
        (static_cast<std::uint64_t>(b) * m - 1 + (b - 2)) / (b - 1));
    std::size_t internal = total - m;
    t.add_node(-1);
    for (std::size_t i = 1; i < total; ++i) {
        auto parent = static_cast<std::int32_t>((i - 1) / b);
        std::int32_t label = -1;
        if (i >= internal) label = static_cast<std::int32_t>(order[i - internal]);
        t.add_node(parent, label);
    }
    return t;
}

LabelTree build_huffman(std::span<const double> frequencies, std::uint32_t b) {
    auto m = static_cast<std::uint32_t>(frequencies.size());
    if (m < 1) throw std::invalid_argument("build_huffman: need at least one label");
    if (b < 2) throw std::invalid_argument("build_huffman: b must be >= 2");
    bool any_positive = false;
    for (double f : frequencies) {
        if (f < 0.0) throw std::invalid_argument("build_huffman: negative frequency");
        if (f > 0.0) any_positive = true;
    }
    if (!any_positive) throw std::invalid_argument("build_huffman: all frequencies are zero");

    LabelTree t;
    t.set_arity_hint(b);
    if (m == 1) {
        t.add_node(-1, 0);
        return t;
    }

    // (frequency, tie key, local item id); dummies get tie keys below any
    // real label so they merge first and end up deepest
    struct Item {
        double freq;
        std::int64_t min_label;
        std::int32_t id;
    };
    auto cmp = [](const Item& a, const Item& b2) {
        if (a.freq != b2.freq) return a.freq > b2.freq;  // min-heap
        if (a.min_label != b2.min_label) return a.min_label > b2.min_label;
        return a.id > b2.id;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);

    // local forest; item ids >= 0 are labels or merge nodes, dummies count too
    struct Build {
        std::int32_t label = -1;
        std::vector<std::int32_t> children;
        bool dummy = false;
    };
    std::vector<Build> forest;
    for (std::uint32_t j = 0; j < m; ++j) {
        forest.push_back({static_cast<std::int32_t>(j), {}, false});
        heap.push({frequencies[j], static_cast<std::int64_t>(j), static_cast<std::int32_t>(j)});
    }
    std::uint32_t dummies = (b > 2) ? (b - 1 - (m - 1) % (b - 1)) % (b - 1) : 0;
    for (std::uint32_t r = 0; r < dummies; ++r) {
        auto id = static_cast<std::int32_t>(forest.size());
        forest.push_back({-1, {}, true});
        heap.push({0.0, -static_cast<std::int64_t>(r) - 1, id});
    }

    while (heap.size() > 1) {
        std::vector<Item> merged;
        for (std::uint32_t a = 0; a < b && !heap.empty(); ++a) {
            merged.push_back(heap.top());
            heap.pop();
        }
        auto id = static_cast<std::int32_t>(forest.size());
        Build parent;
        double freq = 0.0;
        std::int64_t min_label = std::numeric_limits<std::int64_t>::max();
        for (const auto& item : merged) {
            if (!forest[static_cast<std::size_t>(item.id)].dummy)
                parent.children.push_back(item.id);
            freq += item.freq;
            min_label = std::min(min_label, item.min_label);
        }
        forest.push_back(std::move(parent));
        heap.push({freq, min_label, id});
    }

    // copy the forest into a LabelTree, skipping dummies (already dropped)
    std::int32_t build_root = heap.top().id;
    std::vector<std::int32_t> mapped(forest.size(), -1);
    // depth-first, children in build order
    struct Frame {
        std::int32_t build_id;
        std::int32_t parent;
    };
    std::vector<Frame> stack{{build_root, -1}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        const Build& bn = forest[static_cast<std::size_t>(f.build_id)];
        std::int32_t id = t.add_node(f.parent, bn.label);
        mapped[static_cast<std::size_t>(f.build_id)] = id;
        for (auto it = bn.children.rbegin(); it != bn.children.rend(); ++it)
            stack.push_back({*it, id});
    }
    t.validate();
    return t;
}

std::vector<LabelProfile> label_profiles(const Dataset& dataset, const std::vector<double>* idf) {
    std::vector<std::size_t> counts(dataset.num_labels, 0);
    std::vector<std::vector<FeatureEntry>> per_label(dataset.num_labels);
    for (const auto& ex : dataset.examples) {
        SparseVector x = idf ? tfidf_transform(ex.features, *idf) : ex.features;
        for (std::uint32_t label : ex.labels) {
            auto& dst = per_label[label];
            dst.insert(dst.end(), x.entries().begin(), x.entries().end());
            ++counts[label];
        }
    }
    std::vector<LabelProfile> profiles;
    profiles.reserve(dataset.num_labels);
    for (std::uint32_t j = 0; j < dataset.num_labels; ++j) {
        SparseVector mean = SparseVector::from_unsorted(std::move(per_label[j]),
                                                        dataset.num_features);
        if (counts[j] > 0) {
            std::vector<FeatureEntry> entries = mean.entries();
            for (auto& e : entries) e.value /= static_cast<double>(counts[j]);
            mean = SparseVector(std::move(entries), dataset.num_features);
        }
        profiles.push_back({j, std::move(mean)});
    }
    return profiles;
}

namespace {

double sq_dist(const SparseVector& x, const std::vector<double>& centroid, double centroid_sq) {
    // ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2
    double xx = 0.0, xc = 0.0;
    for (const auto& e : x.entries()) {
        xx += e.value * e.value;
        xc += e.value * centroid[e.index];
    }
    return xx - 2.0 * xc + centroid_sq;
}

struct KMeansSplit {
    std::vector<std::vector<std::uint32_t>> clusters;  // item positions
};

// Balanced k-means over normalized profiles; items are positions into
// `items`. Cluster sizes differ by at most one.
KMeansSplit balanced_kmeans(const std::vector<const SparseVector*>& items, std::uint32_t b,
                            double epsilon, std::mt19937_64& rng, std::uint32_t d) {
    auto n = static_cast<std::uint32_t>(items.size());
    std::uint32_t k = std::min(b, n);
    std::vector<std::vector<double>> centroids(k, std::vector<double>(d, 0.0));

    // seed centroids with k distinct items
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::uint32_t c = 0; c < k; ++c)
        for (const auto& e : items[perm[c]]->entries()) centroids[c][e.index] = e.value;

    std::uint32_t ceil_cap = (n + k - 1) / k;
    std::uint32_t n_ceil = n % k == 0 ? k : n % k;  // clusters allowed to reach ceil_cap

    std::vector<std::uint32_t> assign(n, 0);
    std::vector<double> dist(static_cast<std::size_t>(n) * k);
    for (std::uint32_t iter = 0; iter < 100; ++iter) {
        std::vector<double> centroid_sq(k, 0.0);
        for (std::uint32_t c = 0; c < k; ++c)
            for (double v : centroids[c]) centroid_sq[c] += v * v;
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t c = 0; c < k; ++c)
                dist[static_cast<std::size_t>(i) * k + c] =
                    sq_dist(*items[i], centroids[c], centroid_sq[c]);

        // margin = gap between the best and second-best centroid; items with
        // the clearest preference are placed first, then capacity decides
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> margin(n, 0.0);
        for (std::uint32_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            double second = std::numeric_limits<double>::infinity();
            for (std::uint32_t c = 0; c < k; ++c) {
                double dv = dist[static_cast<std::size_t>(i) * k + c];
                if (dv < best) {
                    second = best;
                    best = dv;
                } else if (dv < second) {
                    second = dv;
                }
            }
            margin[i] = (k > 1) ? second - best : 0.0;
        }
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t c) {
            if (margin[a] != margin[c]) return margin[a] > margin[c];
            return a < c;
        });

        std::vector<std::uint32_t> sizes(k, 0);
        std::uint32_t ceil_used = 0;
        auto has_room = [&](std::uint32_t c) {
            if (sizes[c] + 1 < ceil_cap) return true;
            if (sizes[c] + 1 == ceil_cap) return ceil_used < n_ceil || ceil_cap * k == n;
            return false;
        };
        for (std::uint32_t i : order) {
            std::uint32_t best_c = k;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::uint32_t c = 0; c < k; ++c) {
                if (!has_room(c)) continue;
                double dv = dist[static_cast<std::size_t>(i) * k + c];
                if (dv < best_d) {
                    best_d = dv;
                    best_c = c;
                }
            }
            assign[i] = best_c;
            if (++sizes[best_c] == ceil_cap) ++ceil_used;
        }

        // recompute centroids and measure movement
        double movement = 0.0;
        std::vector<std::vector<double>> next(k, std::vector<double>(d, 0.0));
        for (std::uint32_t i = 0; i < n; ++i)
            for (const auto& e : items[i]->entries()) next[assign[i]][e.index] += e.value;
        for (std::uint32_t c = 0; c < k; ++c) {
            if (sizes[c] > 0)
                for (double& v : next[c]) v /= static_cast<double>(sizes[c]);
            double delta = 0.0;
            for (std::uint32_t j = 0; j < d; ++j) {
                double diff = next[c][j] - centroids[c][j];
                delta += diff * diff;
            }
            movement = std::max(movement, std::sqrt(delta));
            centroids[c] = std::move(next[c]);
        }
        if (movement < epsilon) break;
    }

    KMeansSplit split;
    split.clusters.assign(k, {});
    for (std::uint32_t i = 0; i < n; ++i) split.clusters[assign[i]].push_back(i);
    return split;
}

}  // namespace

LabelTree build_kmeans_tree(const std::vector<LabelProfile>& profiles, std::uint32_t b,
                            std::uint32_t max_leaves, double epsilon, std::uint64_t seed) {
    if (profiles.empty()) throw std::invalid_argument("build_kmeans_tree: empty profiles");
    if (b < 2) throw std::invalid_argument("build_kmeans_tree: b must be >= 2");
    if (max_leaves < 1) throw std::invalid_argument("build_kmeans_tree: max_leaves must be >= 1");
    std::uint32_t d = profiles.front().profile.dimension();

    // L2-normalize profiles once
    std::vector<SparseVector> normalized;
    normalized.reserve(profiles.size());
    for (const auto& p : profiles) {
        if (p.profile.dimension() != d)
            throw std::invalid_argument("build_kmeans_tree: profile dimension mismatch");
        double sq = 0.0;
        for (const auto& e : p.profile.entries()) sq += e.value * e.value;
        if (sq > 0.0) {
            double inv = 1.0 / std::sqrt(sq);
            std::vector<FeatureEntry> entries = p.profile.entries();
            for (auto& e : entries) e.value *= inv;
            normalized.emplace_back(std::move(entries), d);
        } else {
            normalized.push_back(p.profile);
        }
    }

    LabelTree t;
    t.set_arity_hint(b);
    auto m = static_cast<std::uint32_t>(profiles.size());
    if (m == 1) {
        t.add_node(-1, static_cast<std::int32_t>(profiles[0].label));
        return t;
    }
    std::int32_t root = t.add_node(-1);

    struct Task {
        std::int32_t node;
        std::vector<std::uint32_t> members;  // positions into profiles
    };
    std::vector<Task> queue;
    {
        std::vector<std::uint32_t> all(m);
        std::iota(all.begin(), all.end(), 0);
        queue.push_back({root, std::move(all)});
    }
    std::uint64_t task_counter = 0;
    while (!queue.empty()) {
        Task task = std::move(queue.front());
        queue.erase(queue.begin());
        if (task.members.size() <= max_leaves) {
            for (std::uint32_t pos : task.members)
                t.add_node(task.node, static_cast<std::int32_t>(profiles[pos].label));
            continue;
        }
        std::vector<const SparseVector*> items;
        items.reserve(task.members.size());
        for (std::uint32_t pos : task.members) items.push_back(&normalized[pos]);
        auto engine = make_engine(seed, Stream::Tree, task_counter++);
        KMeansSplit split = balanced_kmeans(items, b, epsilon, engine, d);
        for (const auto& cluster : split.clusters) {
            if (cluster.empty()) continue;
            std::vector<std::uint32_t> members;
            members.reserve(cluster.size());
            for (std::uint32_t i : cluster) members.push_back(task.members[i]);
            if (members.size() == 1) {
                t.add_node(task.node, static_cast<std::int32_t>(profiles[members[0]].label));
            } else {
                std::int32_t child = t.add_node(task.node);
                queue.push_back({child, std::move(members)});
            }
        }
    }
    t.validate();
    return t;
}

double expected_cost(const LabelTree& tree, std::span<const double> node_mass) {
    if (node_mass.size() != tree.node_count())
        throw std::invalid_argument("expected_cost: need one mass per node");
    // The root classifier sees every instance (its z_0 term, mass set by the
    // caller); every other node classifier sees the positive instances of
    // its parent. Summed per node, for binary trees with multiclass masses
    // this equals 1 + 2 sum_z p_z |z|, the form the Huffman-optimality
    // argument minimizes. (A per-leaf expansion of the same double sum would
    // count shared prefixes once per leaf and break that identity.)
    double cost = node_mass[static_cast<std::size_t>(tree.root())];
    for (std::size_t v = 0; v < tree.node_count(); ++v) {
        const TreeNode& n = tree.node(static_cast<std::int32_t>(v));
        if (n.label < 0) cost += node_mass[v] * static_cast<double>(n.children.size());
    }
    return cost;
}

std::vector<double> multiclass_node_masses(const LabelTree& tree,
                                           std::span<const double> frequencies) {
    if (frequencies.size() != tree.num_labels())
        throw std::invalid_argument("multiclass_node_masses: frequency count mismatch");
    std::vector<double> mass(tree.node_count(), 0.0);
    for (std::uint32_t j = 0; j < frequencies.size(); ++j)
        for (std::int32_t v = tree.leaf_of(j); v >= 0; v = tree.node(v).parent)
            mass[static_cast<std::size_t>(v)] += frequencies[j];
    return mass;
}

namespace {

// Mutable full binary tree used during exhaustive enumeration. Trees over
// labels {0..j} are produced from trees over {0..j-1} by splicing a fresh
// internal node above an existing node and hanging leaf j next to it; every
// full binary tree with labeled leaves arises exactly once this way.
struct EnumTree {
    struct Node {
        std::int32_t parent = -1;
        std::int32_t child[2] = {-1, -1};
        std::int32_t label = -1;
    };
    std::vector<Node> nodes;
    std::int32_t root = 0;

    double cost(const SubsetMassFn& subtree_mass, double root_mass) const {
        return root_mass + 2.0 * internal_mass_sum(root, root_mass, subtree_mass);
    }

private:
    // sum of masses over internal nodes; every internal node here is binary
    double internal_mass_sum(std::int32_t v, double root_mass,
                             const SubsetMassFn& subtree_mass) const {
        const Node& n = nodes[static_cast<std::size_t>(v)];
        if (n.label >= 0) return 0.0;
        double mass;
        if (v == root) {
            mass = root_mass;
        } else {
            std::vector<std::uint32_t> labels;
            collect_labels(v, labels);
            mass = subtree_mass(labels);
        }
        return mass + internal_mass_sum(n.child[0], root_mass, subtree_mass) +
               internal_mass_sum(n.child[1], root_mass, subtree_mass);
    }

    void collect_labels(std::int32_t v, std::vector<std::uint32_t>& out) const {
        out.clear();
        std::vector<std::int32_t> stack{v};
        while (!stack.empty()) {
            std::int32_t u = stack.back();
            stack.pop_back();
            const Node& n = nodes[static_cast<std::size_t>(u)];
            if (n.label >= 0)
                out.push_back(static_cast<std::uint32_t>(n.label));
            else {
                stack.push_back(n.child[0]);
                stack.push_back(n.child[1]);
            }
        }
        std::sort(out.begin(), out.end());
    }
};

void enum_to_label_tree(const EnumTree& e, std::int32_t v, LabelTree& t, std::int32_t parent) {
    const auto& n = e.nodes[static_cast<std::size_t>(v)];
    std::int32_t id = t.add_node(parent, n.label);
    if (n.label < 0) {
        enum_to_label_tree(e, n.child[0], t, id);
        enum_to_label_tree(e, n.child[1], t, id);
    }
}

void enumerate_trees(EnumTree& t, std::uint32_t next_label, std::uint32_t m,
                     const std::function<void(const EnumTree&)>& visit) {
    if (next_label == m) {
        visit(t);
        return;
    }
    std::size_t existing = t.nodes.size();
    for (std::size_t pos = 0; pos < existing; ++pos) {
        auto v = static_cast<std::int32_t>(pos);
        std::int32_t old_parent = t.nodes[pos].parent;
        auto inner = static_cast<std::int32_t>(t.nodes.size());
        auto leaf = inner + 1;
        t.nodes.push_back({old_parent, {v, leaf}, -1});
        t.nodes.push_back({inner, {-1, -1}, static_cast<std::int32_t>(next_label)});
        t.nodes[pos].parent = inner;
        std::int32_t old_root = t.root;
        if (old_parent < 0) {
            t.root = inner;
        } else {
            auto& pc = t.nodes[static_cast<std::size_t>(old_parent)].child;
            (pc[0] == v ? pc[0] : pc[1]) = inner;
        }

        enumerate_trees(t, next_label + 1, m, visit);

        // undo the splice
        if (old_parent < 0) {
            t.root = old_root;
        } else {
            auto& pc = t.nodes[static_cast<std::size_t>(old_parent)].child;
            (pc[0] == inner ? pc[0] : pc[1]) = v;
        }
        t.nodes[pos].parent = old_parent;
        t.nodes.resize(existing);
    }
}

}  // namespace

std::pair<LabelTree, double> brute_force_min_cost_tree(std::uint32_t m,
                                                       const SubsetMassFn& subtree_mass,
                                                       double root_mass) {
    if (m < 1) throw std::invalid_argument("brute_force_min_cost_tree: m must be >= 1");
    if (m > 8)
        throw std::invalid_argument("brute_force_min_cost_tree: m > 8 is not tractable here");
    LabelTree best_tree;
    if (m == 1) {
        best_tree.add_node(-1, 0);
        return {std::move(best_tree), root_mass};
    }
    EnumTree t;
    t.nodes.push_back({-1, {-1, -1}, 0});
    t.root = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    bool have_best = false;
    enumerate_trees(t, 1, m, [&](const EnumTree& e) {
        double cost = e.cost(subtree_mass, root_mass);
        if (!have_best || cost < best_cost) {
            best_cost = cost;
            best_tree = LabelTree();
            best_tree.set_arity_hint(2);
            enum_to_label_tree(e, e.root, best_tree, -1);
            have_best = true;
        }
    });
    best_tree.validate();
    return {std::move(best_tree), best_cost};
}

std::pair<LabelTree, double> brute_force_min_cost_tree(std::span<const double> frequencies) {
    std::vector<double> freqs(frequencies.begin(), frequencies.end());
    double total = std::accumulate(freqs.begin(), freqs.end(), 0.0);
    auto mass = [freqs](const std::vector<std::uint32_t>& subset) {
        double s = 0.0;
        for (std::uint32_t j : subset) s += freqs[j];
        return s;
    };
    return brute_force_min_cost_tree(static_cast<std::uint32_t>(freqs.size()), mass, total);
}

}  // namespace xtree
