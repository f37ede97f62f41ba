#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xtree/label_tree.hpp"
#include "xtree/oracle.hpp"

namespace xtree {

struct CheckResult {
    std::string name;
    bool ok = false;
    std::string detail;
};

// Embedded distribution fixtures in the "bitmask probability" text format.
namespace fixtures {
// The three-label counterexample distribution from the pick-one-label
// inconsistency proof: eta = (0.6, 0.5, 0.4), eta' = (0.35, 0.25, 0.40).
extern const char* kPickOneCounterexample;
// A dependent three-label distribution on which the Huffman tree built over
// the marginals is strictly costlier than the exhaustive optimum (found by
// randomized search, stored as a golden certificate).
extern const char* kHuffmanSuboptimal;
}  // namespace fixtures

// Random full tree over m labels with node arities in [2, max_arity] and
// depth at most max_depth; every leaf holds one label.
LabelTree random_label_tree(std::mt19937_64& engine, std::uint32_t m, std::uint32_t max_arity,
                            std::uint32_t max_depth);

// Named verification suites: proposition1, proposition2, theorem1, theorem2,
// appendixc, ucs, or "all".
std::vector<CheckResult> run_verify_suite(const std::string& suite, std::uint64_t seed);

}  // namespace xtree
