#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "xtree/label_tree.hpp"

namespace xtree {

// Explicit conditional distribution over all 2^m label vectors, m <= 12.
// Bit i of a mask corresponds to label i.
struct ExactDistribution {
    std::uint32_t m = 0;
    std::vector<std::pair<std::uint32_t, double>> table;  // (mask, probability), masks unique

    void validate() const;  // probabilities >= 0, sum within 1e-12 of 1
    double prob_of(std::uint32_t mask) const;
};

// Fixture format: one "bitmask probability" line each, where the bitmask is
// a string of 0/1 with character position i holding label i. Lines starting
// with '#' are skipped.
ExactDistribution parse_distribution(std::istream& in);
void serialize_distribution(const ExactDistribution& dist, std::ostream& out);

// eta_j = P(y_j = 1).
std::vector<double> marginals(const ExactDistribution& dist);

// Pick-one-label image: eta'_j = sum_y (y_j / |y|) P(y), empty vectors
// contributing zero; sums to 1 - P(y = 0).
std::vector<double> pickone_map(const ExactDistribution& dist);

// k labels with the highest values, ties toward the lower id.
std::vector<std::uint32_t> top_k_indices(std::span<const double> values, std::uint32_t k);

std::vector<std::uint32_t> optimal_topk(const ExactDistribution& dist, std::uint32_t k);

// (1/k) (sum of the top-k marginals - sum of the predicted labels' marginals).
double pk_regret(const ExactDistribution& dist, std::span<const std::uint32_t> predicted,
                 std::uint32_t k);

// Product distribution with the given marginals; m <= 12.
ExactDistribution make_independent(std::span<const double> etas);

// Checks that eta and eta' induce the same label order: no pair may be
// strictly ordered one way in eta and the opposite way in eta' beyond tol.
bool is_order_preserved(const ExactDistribution& dist, double tol = 1e-12);

struct BoundConfig {
    double lambda = 4.0;  // strong-properness constant of the logistic loss
};

// Binary logistic regret of predicting q when the true conditional is p:
// KL(p || q). Inputs are clamped to [1e-12, 1 - 1e-12].
double logistic_regret(double p, double q);

struct Theorem2Result {
    double regret = 0.0;
    double bound = 0.0;
    bool holds = false;
};

// Precision@k regret of ranking by the estimates against ranking by the true
// marginals, checked against the bound 2 * max_l |eta_l - est_l|.
Theorem2Result theorem2_check(std::span<const double> etas, std::span<const double> estimates,
                              std::uint32_t k);

struct Theorem1Result {
    double lhs = 0.0;  // |prod truths - prod estimates| along the path
    double rhs = 0.0;  // sum_i P(z^{i-1}) sqrt(2/lambda) sqrt(reg_i)
    bool holds = false;
    bool clamped = false;  // some input fell outside (0,1)
};

// Path bound for one label: node_truths / node_estimates hold, per node id,
// the conditional probability that the node's bit is 1 given its parent
// prefix (the root entry estimates P(z_0 = 1 | x)).
Theorem1Result theorem1_check(const LabelTree& tree, std::span<const double> node_truths,
                              std::span<const double> node_estimates, std::uint32_t label,
                              const BoundConfig& config = {});

// Subtree masses for a multi-label distribution: node mass = probability
// that at least one label in the node's subtree is positive.
std::vector<double> union_node_masses(const LabelTree& tree, const ExactDistribution& dist);

// Union probability of a label subset; the SubsetMassFn for brute-force
// cost search over a multi-label distribution.
double union_probability(const ExactDistribution& dist, const std::vector<std::uint32_t>& labels);

}  // namespace xtree
