#include "xtree/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "xtree/error.hpp"

namespace xtree {

void ExactDistribution::validate() const {
    if (m < 1 || m > 12) throw std::invalid_argument("distribution needs 1 <= m <= 12");
    double sum = 0.0;
    std::vector<char> seen(1u << m, 0);
    for (const auto& [mask, p] : table) {
        if (mask >= (1u << m)) throw std::invalid_argument("mask out of range");
        if (seen[mask]++) throw std::invalid_argument("duplicate mask");
        if (p < 0.0) throw std::invalid_argument("negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities sum to " + std::to_string(sum));
}

double ExactDistribution::prob_of(std::uint32_t mask) const {
    for (const auto& [mk, p] : table)
        if (mk == mask) return p;
    return 0.0;
}

ExactDistribution parse_distribution(std::istream& in) {
    ExactDistribution dist;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string bits;
        double p;
        if (!(ls >> bits >> p)) throw ParseError(lineno, "expected \"bitmask probability\"");
        if (dist.m == 0) dist.m = static_cast<std::uint32_t>(bits.size());
        if (bits.size() != dist.m) throw ParseError(lineno, "inconsistent bitmask width");
        std::uint32_t mask = 0;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1')
                mask |= 1u << i;
            else if (bits[i] != '0')
                throw ParseError(lineno, "bitmask must contain only 0/1");
        }
        dist.table.emplace_back(mask, p);
    }
    dist.validate();
    return dist;
}

void serialize_distribution(const ExactDistribution& dist, std::ostream& out) {
    for (const auto& [mask, p] : dist.table) {
        std::string bits(dist.m, '0');
        for (std::uint32_t i = 0; i < dist.m; ++i)
            if (mask & (1u << i)) bits[i] = '1';
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", p);
        out << bits << ' ' << buf << '\n';
    }
}

std::vector<double> marginals(const ExactDistribution& dist) {
    std::vector<double> eta(dist.m, 0.0);
    for (const auto& [mask, p] : dist.table)
        for (std::uint32_t j = 0; j < dist.m; ++j)
            if (mask & (1u << j)) eta[j] += p;
    return eta;
}

std::vector<double> pickone_map(const ExactDistribution& dist) {
    std::vector<double> eta(dist.m, 0.0);
    for (const auto& [mask, p] : dist.table) {
        int s = std::popcount(mask);
        if (s == 0) continue;  // the 0/0 term contributes nothing
        double share = p / static_cast<double>(s);
        for (std::uint32_t j = 0; j < dist.m; ++j)
            if (mask & (1u << j)) eta[j] += share;
    }
    return eta;
}

std::vector<std::uint32_t> top_k_indices(std::span<const double> values, std::uint32_t k) {
    if (k > values.size()) throw std::invalid_argument("k exceeds the number of labels");
    std::vector<std::uint32_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });
    order.resize(k);
    return order;
}

std::vector<std::uint32_t> optimal_topk(const ExactDistribution& dist, std::uint32_t k) {
    auto eta = marginals(dist);
    return top_k_indices(eta, k);
}

double pk_regret(const ExactDistribution& dist, std::span<const std::uint32_t> predicted,
                 std::uint32_t k) {
    if (predicted.size() != k) throw std::invalid_argument("prediction size must equal k");
    auto eta = marginals(dist);
    auto optimal = top_k_indices(eta, k);
    double best = 0.0, got = 0.0;
    for (std::uint32_t j : optimal) best += eta[j];
    for (std::uint32_t j : predicted) {
        if (j >= dist.m) throw std::invalid_argument("predicted label out of range");
        got += eta[j];
    }
    return (best - got) / static_cast<double>(k);
}

ExactDistribution make_independent(std::span<const double> etas) {
    auto m = static_cast<std::uint32_t>(etas.size());
    if (m < 1 || m > 12) throw std::invalid_argument("make_independent needs 1 <= m <= 12");
    for (double e : etas)
        if (e < 0.0 || e > 1.0) throw std::invalid_argument("marginals must lie in [0,1]");
    ExactDistribution dist;
    dist.m = m;
    dist.table.reserve(1u << m);
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        double p = 1.0;
        for (std::uint32_t j = 0; j < m; ++j)
            p *= (mask & (1u << j)) ? etas[j] : 1.0 - etas[j];
        dist.table.emplace_back(mask, p);
    }
    return dist;
}

bool is_order_preserved(const ExactDistribution& dist, double tol) {
    auto eta = marginals(dist);
    auto mapped = pickone_map(dist);
    for (std::uint32_t i = 0; i < dist.m; ++i)
        for (std::uint32_t j = 0; j < dist.m; ++j) {
            if (eta[i] > eta[j] + tol && mapped[i] < mapped[j] - tol) return false;
            if (mapped[i] > mapped[j] + tol && eta[i] < eta[j] - tol) return false;
        }
    return true;
}

double logistic_regret(double p, double q) {
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    q = std::clamp(q, 1e-12, 1.0 - 1e-12);
    return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

Theorem2Result theorem2_check(std::span<const double> etas, std::span<const double> estimates,
                              std::uint32_t k) {
    if (etas.size() != estimates.size())
        throw std::invalid_argument("etas and estimates must have equal length");
    Theorem2Result r;
    auto truth_top = top_k_indices(etas, k);
    auto est_top = top_k_indices(estimates, k);
    double best = 0.0, got = 0.0;
    for (std::uint32_t j : truth_top) best += etas[j];
    for (std::uint32_t j : est_top) got += etas[j];
    r.regret = (best - got) / static_cast<double>(k);
    double max_diff = 0.0;
    for (std::size_t j = 0; j < etas.size(); ++j)
        max_diff = std::max(max_diff, std::abs(etas[j] - estimates[j]));
    r.bound = 2.0 * max_diff;
    r.holds = r.regret <= r.bound + 1e-9;
    return r;
}

Theorem1Result theorem1_check(const LabelTree& tree, std::span<const double> node_truths,
                              std::span<const double> node_estimates, std::uint32_t label,
                              const BoundConfig& config) {
    if (node_truths.size() != tree.node_count() || node_estimates.size() != tree.node_count())
        throw std::invalid_argument("need one truth and one estimate per node");
    if (config.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");

    Theorem1Result r;
    auto clamp_flagged = [&r](double v) {
        if (v < 1e-12 || v > 1.0 - 1e-12) {
            r.clamped = true;
            return std::clamp(v, 1e-12, 1.0 - 1e-12);
        }
        return v;
    };

    auto path = tree.label_to_path(label);
    double truth_product = 1.0, est_product = 1.0;
    double prefix_truth = 1.0;  // P(z^{i-1} | x)
    double rhs = 0.0;
    const double scale = std::sqrt(2.0 / config.lambda);
    for (std::int32_t v : path) {
        double p = clamp_flagged(node_truths[static_cast<std::size_t>(v)]);
        double q = clamp_flagged(node_estimates[static_cast<std::size_t>(v)]);
        rhs += prefix_truth * scale * std::sqrt(logistic_regret(p, q));
        truth_product *= p;
        est_product *= q;
        prefix_truth *= p;
    }
    r.lhs = std::abs(truth_product - est_product);
    r.rhs = rhs;
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

std::vector<double> union_node_masses(const LabelTree& tree, const ExactDistribution& dist) {
    if (tree.num_labels() != dist.m)
        throw std::invalid_argument("tree and distribution disagree on m");
    std::vector<std::uint32_t> subtree_mask(tree.node_count(), 0);
    for (std::uint32_t j = 0; j < dist.m; ++j)
        for (std::int32_t v = tree.leaf_of(j); v >= 0; v = tree.node(v).parent)
            subtree_mask[static_cast<std::size_t>(v)] |= 1u << j;
    std::vector<double> mass(tree.node_count(), 0.0);
    for (std::size_t v = 0; v < tree.node_count(); ++v)
        for (const auto& [mask, p] : dist.table)
            if (mask & subtree_mask[v]) mass[v] += p;
    return mass;
}

double union_probability(const ExactDistribution& dist,
                         const std::vector<std::uint32_t>& labels) {
    std::uint32_t subset = 0;
    for (std::uint32_t j : labels) subset |= 1u << j;
    double total = 0.0;
    for (const auto& [mask, p] : dist.table)
        if (mask & subset) total += p;
    return total;
}

}  // namespace xtree
