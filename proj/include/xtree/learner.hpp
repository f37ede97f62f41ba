#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "xtree/dataset.hpp"

namespace xtree {

// Numerically stable logistic sigmoid.
double sigmoid(double a);

// Logistic loss with predictions clamped to [1e-12, 1 - 1e-12]; the clamp is
// applied to the loss evaluation only, never to stored weights.
double logistic_loss(double prob, double target);

enum class ScheduleKind { LinearDecay, InversePower };

// Learning-rate schedule evaluated on a per-model update counter t
// (completed updates): linear eta0 * max(0, 1 - t/total_updates),
// inverse-power eta0 * (1/(t+1))^power.
struct LrSchedule {
    ScheduleKind kind = ScheduleKind::InversePower;
    double eta0 = 0.1;
    double power = 0.5;               // inverse-power only
    std::uint64_t total_updates = 1;  // linear only

    double rate(std::uint64_t t) const;

    static LrSchedule linear(double eta0, std::uint64_t total_updates);
    static LrSchedule inverse_power(double eta0, double power);
};

// One binary logistic classifier. Weights live either in a sparse map over
// raw feature indices (with a lazy L2 decay multiplier so updates stay
// O(nnz)) or in a dense vector over the embedding dimension.
struct NodeModel {
    bool dense = false;
    std::unordered_map<std::uint32_t, double> w_sparse;
    double scale = 1.0;  // lazy decay multiplier, sparse mode only
    std::vector<double> w_dense;
    double bias = 0.0;
    std::uint64_t updates = 0;  // t
    bool constant_positive = false;
    bool saw_positive = false;  // training stream bookkeeping
    bool saw_negative = false;

    static NodeModel make_sparse();
    static NodeModel make_dense(std::uint32_t dim);

    double weight_at(std::uint32_t index) const;  // scale applied
};

// sigma(w.v + bias); exactly 1 for constant-positive nodes.
double predict_prob(const NodeModel& node, const SparseVector& v);
double predict_prob(const NodeModel& node, std::span<const double> v);

// One SGD step: g = weight * (sigma(w.v + bias) - target);
// w <- (1 - eta*l2) * w - eta * g * v, bias <- bias - eta * g (bias is not
// regularized); returns g. No-op returning 0 on constant-positive nodes.
// The dense overload accumulates the eta-free input gradient g * w_old into
// input_grad when given (for embedding backprop).
double update(NodeModel& node, const SparseVector& v, double target, double weight,
              const LrSchedule& schedule, double l2);
double update(NodeModel& node, std::span<const double> v, double target, double weight,
              const LrSchedule& schedule, double l2, std::vector<double>* input_grad = nullptr);

// Deterministic full-batch gradient descent on the mean regularized logistic
// loss; the in-repo replacement for a batch solver. Sparse inputs only.
struct BatchItem {
    const SparseVector* v;
    double target;
    double weight;
};
void fit_batch(NodeModel& node, std::span<const BatchItem> items, std::uint32_t iterations,
               double lr, double l2);

// Instance representation: either the (optionally TF-IDF reweighted) sparse
// vector itself, or a trainable dense embedding averaged with uniform or
// TF-IDF weights.
enum class ReprKind { SparseDirect, DenseEmbedding };
enum class FeatureWeighting { Uniform, Tfidf };

struct Representation {
    ReprKind kind = ReprKind::SparseDirect;
    FeatureWeighting weighting = FeatureWeighting::Uniform;
    std::uint32_t input_dim = 0;  // d
    std::uint32_t dim = 0;        // embedding width, dense only
    std::vector<double> idf;      // per-feature, when weighting == Tfidf
    std::vector<double> embedding;  // input_dim x dim, row major
    std::uint64_t updates = 0;      // embedding update counter

    static Representation sparse_direct(std::uint32_t input_dim, FeatureWeighting weighting,
                                        std::vector<double> idf = {});
    // Embedding rows initialized uniformly in [-1/dim, 1/dim], seeded.
    static Representation dense_embedding(std::uint32_t input_dim, std::uint32_t dim,
                                          FeatureWeighting weighting, std::uint64_t seed,
                                          std::vector<double> idf = {});

    // Averaging weight of one input feature: 1 or its TF-IDF score.
    double feature_weight(const FeatureEntry& e) const;

    // Sparse path: applies the idf reweighting when configured.
    SparseVector transform_sparse(const SparseVector& x) const;

    // Dense path: out = sum_i w_i E_i / sum_i w_i over the nonzero features
    // of x; the zero vector when x is empty.
    void embed(const SparseVector& x, std::vector<double>& out) const;

    // E_i <- E_i - eta * (w_i / sum w) * input_grad for each nonzero feature
    // of x; eta follows the same schedule, evaluated on this object's own
    // update counter.
    void backprop(const SparseVector& x, std::span<const double> input_grad,
                  const LrSchedule& schedule);
};

// Compares the analytic logistic-loss gradient wrt the touched weights and
// the bias against central finite differences with step h; returns the
// maximum relative error (coordinates where both magnitudes are below 1e-8
// count as exact).
double gradient_check(const NodeModel& node, const SparseVector& v, double target, double h);

}  // namespace xtree
