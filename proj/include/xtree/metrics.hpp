#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "xtree/dataset.hpp"

namespace xtree {

// Fraction of the first k ranked predictions that appear in the true label
// set. Throws if fewer than k predictions are given.
double precision_at_k(std::span<const std::uint32_t> true_labels,
                      std::span<const std::uint32_t> ranked_predictions, std::uint32_t k);

// Arithmetic mean over examples; empty-label examples contribute 0.
double mean_precision_at_k(const Dataset& dataset,
                           const std::vector<std::vector<std::uint32_t>>& predictions,
                           std::uint32_t k);

struct PairedTestResult {
    double t_test_p = 1.0;    // two-sided paired Student t
    double sign_p = 1.0;      // exact two-sided binomial, zero diffs dropped
    double wilcoxon_p = 1.0;  // signed-rank, normal approximation, tie correction
};

PairedTestResult paired_tests(std::span<const double> a, std::span<const double> b);

// Numerical routines behind the tests, exposed for validation against
// published critical values.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, double dof);
double normal_sf(double z);

}  // namespace xtree
