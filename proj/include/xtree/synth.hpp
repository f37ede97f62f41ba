#pragma once

#include <cstdint>
#include <vector>

#include "xtree/dataset.hpp"

namespace xtree {

struct SynthConfig {
    std::uint32_t d = 3;
    std::uint32_t m = 32;
    std::uint64_t n = 100000;
    double c = 10.0;             // softmax scaling, multiclass model
    double noise_sigma2 = 0.25;  // noise variance, dependent model
    std::uint64_t seed = 0;
};

// m label weight vectors sampled uniformly from the unit sphere S^{d-1}.
std::vector<std::vector<double>> sample_label_vectors(const SynthConfig& config);

// The m x m mixing matrix of the dependent model, entries uniform in [-1,1];
// fixed per dataset (seeded), exposed so labels can be recomputed externally.
std::vector<std::vector<double>> sample_mixing_matrix(const SynthConfig& config);

// Point index i sampled uniformly from the closed unit ball (Gaussian
// direction times U^{1/d} radius); i-th draw is independent of the others,
// so generation may be sharded over examples.
std::vector<double> sample_point(const SynthConfig& config, std::uint64_t index);

// W plus the first n points, the geometry shared by all three generators.
struct Geometry {
    std::vector<std::vector<double>> weights;  // m x d
    std::vector<std::vector<double>> points;   // n x d
};
Geometry sample_geometry(const SynthConfig& config);

// One label per example drawn from softmax(c * W x).
Dataset gen_multiclass(const SynthConfig& config);

// y_j ~ Bernoulli(sigmoid(w_j . x)) independently per (example, label).
Dataset gen_independent(const SynthConfig& config);

// y = 1{ M (W x + eps) > 0 } with M ~ U[-1,1]^{m x m} fixed per dataset and
// eps ~ N(0, noise_sigma2) redrawn per example.
Dataset gen_dependent(const SynthConfig& config);

}  // namespace xtree
