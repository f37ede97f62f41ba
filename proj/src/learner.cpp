#include "xtree/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xtree/rng.hpp"

namespace xtree {

double sigmoid(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    double e = std::exp(a);
    return e / (1.0 + e);
}

double logistic_loss(double prob, double target) {
    double p = std::clamp(prob, 1e-12, 1.0 - 1e-12);
    return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

double LrSchedule::rate(std::uint64_t t) const {
    if (kind == ScheduleKind::LinearDecay) {
        double frac = static_cast<double>(t) / static_cast<double>(total_updates);
        return eta0 * std::max(0.0, 1.0 - frac);
    }
    if (power == 0.5) return eta0 / std::sqrt(static_cast<double>(t + 1));
    if (power == 0.0) return eta0;
    return eta0 * std::pow(1.0 / static_cast<double>(t + 1), power);
}

LrSchedule LrSchedule::linear(double eta0, std::uint64_t total_updates) {
    if (total_updates == 0) throw std::invalid_argument("linear schedule needs total_updates");
    return {ScheduleKind::LinearDecay, eta0, 0.0, total_updates};
}

LrSchedule LrSchedule::inverse_power(double eta0, double power) {
    return {ScheduleKind::InversePower, eta0, power, 1};
}

NodeModel NodeModel::make_sparse() {
    NodeModel n;
    n.dense = false;
    return n;
}

NodeModel NodeModel::make_dense(std::uint32_t dim) {
    NodeModel n;
    n.dense = true;
    n.w_dense.assign(dim, 0.0);
    return n;
}

double NodeModel::weight_at(std::uint32_t index) const {
    if (dense) return index < w_dense.size() ? w_dense[index] : 0.0;
    auto it = w_sparse.find(index);
    return it == w_sparse.end() ? 0.0 : scale * it->second;
}

namespace {

// scale applied per entry so that predictions match a saved-and-reloaded
// model bit for bit
double dot_sparse(const NodeModel& node, const SparseVector& v) {
    double z = 0.0;
    for (const auto& e : v.entries()) {
        auto it = node.w_sparse.find(e.index);
        if (it != node.w_sparse.end()) z += (node.scale * it->second) * e.value;
    }
    return z;
}

double dot_dense(const NodeModel& node, std::span<const double> v) {
    double z = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) z += node.w_dense[i] * v[i];
    return z;
}

constexpr double kMinScale = 1e-9;

void fold_scale(NodeModel& node) {
    for (auto& [idx, w] : node.w_sparse) w *= node.scale;
    node.scale = 1.0;
}

}  // namespace

double predict_prob(const NodeModel& node, const SparseVector& v) {
    if (node.constant_positive) return 1.0;
    if (node.dense) throw std::invalid_argument("sparse input on a dense node model");
    return sigmoid(dot_sparse(node, v) + node.bias);
}

double predict_prob(const NodeModel& node, std::span<const double> v) {
    if (node.constant_positive) return 1.0;
    if (!node.dense || v.size() != node.w_dense.size())
        throw std::invalid_argument("input dimension does not match the node model");
    return sigmoid(dot_dense(node, v) + node.bias);
}

double update(NodeModel& node, const SparseVector& v, double target, double weight,
              const LrSchedule& schedule, double l2) {
    if (node.constant_positive) return 0.0;
    if (node.dense) throw std::invalid_argument("sparse input on a dense node model");
    double eta = schedule.rate(node.updates);
    double g = weight * (sigmoid(dot_sparse(node, v) + node.bias) - target);
    if (l2 != 0.0) {
        node.scale *= (1.0 - eta * l2);
        if (std::abs(node.scale) < kMinScale) fold_scale(node);
    }
    if (node.scale != 0.0) {
        double step = eta * g / node.scale;
        for (const auto& e : v.entries()) node.w_sparse[e.index] -= step * e.value;
    }
    node.bias -= eta * g;
    ++node.updates;
    return g;
}

double update(NodeModel& node, std::span<const double> v, double target, double weight,
              const LrSchedule& schedule, double l2, std::vector<double>* input_grad) {
    if (node.constant_positive) return 0.0;
    if (!node.dense || v.size() != node.w_dense.size())
        throw std::invalid_argument("input dimension does not match the node model");
    double eta = schedule.rate(node.updates);
    double g = weight * (sigmoid(dot_dense(node, v) + node.bias) - target);
    if (input_grad) {
        input_grad->resize(node.w_dense.size(), 0.0);
        for (std::size_t i = 0; i < node.w_dense.size(); ++i)
            (*input_grad)[i] += g * node.w_dense[i];
    }
    double keep = 1.0 - eta * l2;
    for (std::size_t i = 0; i < node.w_dense.size(); ++i)
        node.w_dense[i] = keep * node.w_dense[i] - eta * g * v[i];
    node.bias -= eta * g;
    ++node.updates;
    return g;
}

void fit_batch(NodeModel& node, std::span<const BatchItem> items, std::uint32_t iterations,
               double lr, double l2) {
    if (node.dense) throw std::invalid_argument("fit_batch supports sparse node models only");
    if (node.constant_positive || items.empty()) return;
    fold_scale(node);
    double total_weight = 0.0;
    for (const auto& it : items) total_weight += it.weight;
    if (total_weight <= 0.0) return;

    std::unordered_map<std::uint32_t, double> grad;
    for (std::uint32_t iter = 0; iter < iterations; ++iter) {
        grad.clear();
        double bias_grad = 0.0;
        for (const auto& it : items) {
            double g = it.weight * (sigmoid(dot_sparse(node, *it.v) + node.bias) - it.target);
            for (const auto& e : it.v->entries()) grad[e.index] += g * e.value;
            bias_grad += g;
        }
        double inv = 1.0 / total_weight;
        for (auto& [idx, w] : node.w_sparse) w -= lr * l2 * w;
        for (const auto& [idx, g] : grad) node.w_sparse[idx] -= lr * g * inv;
        node.bias -= lr * bias_grad * inv;
        ++node.updates;
    }
}

Representation Representation::sparse_direct(std::uint32_t input_dim, FeatureWeighting weighting,
                                             std::vector<double> idf) {
    Representation r;
    r.kind = ReprKind::SparseDirect;
    r.weighting = weighting;
    r.input_dim = input_dim;
    r.idf = std::move(idf);
    if (weighting == FeatureWeighting::Tfidf && r.idf.size() != input_dim)
        throw std::invalid_argument("tfidf weighting needs an idf table of size d");
    return r;
}

Representation Representation::dense_embedding(std::uint32_t input_dim, std::uint32_t dim,
                                               FeatureWeighting weighting, std::uint64_t seed,
                                               std::vector<double> idf) {
    if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
    Representation r;
    r.kind = ReprKind::DenseEmbedding;
    r.weighting = weighting;
    r.input_dim = input_dim;
    r.dim = dim;
    r.idf = std::move(idf);
    if (weighting == FeatureWeighting::Tfidf && r.idf.size() != input_dim)
        throw std::invalid_argument("tfidf weighting needs an idf table of size d");
    r.embedding.resize(static_cast<std::size_t>(input_dim) * dim);
    auto engine = make_engine(seed, Stream::Init);
    std::uniform_real_distribution<double> u(-1.0 / dim, 1.0 / dim);
    for (double& v : r.embedding) v = u(engine);
    return r;
}

double Representation::feature_weight(const FeatureEntry& e) const {
    if (weighting == FeatureWeighting::Uniform) return 1.0;
    return e.value * idf[e.index];
}

SparseVector Representation::transform_sparse(const SparseVector& x) const {
    if (x.dimension() != input_dim)
        throw std::invalid_argument("input dimension does not match the representation");
    if (weighting == FeatureWeighting::Uniform) return x;
    return tfidf_transform(x, idf);
}

void Representation::embed(const SparseVector& x, std::vector<double>& out) const {
    if (kind != ReprKind::DenseEmbedding)
        throw std::invalid_argument("embed requires a dense-embedding representation");
    if (x.dimension() != input_dim)
        throw std::invalid_argument("input dimension does not match the representation");
    out.assign(dim, 0.0);
    double total = 0.0;
    for (const auto& e : x.entries()) {
        double w = feature_weight(e);
        const double* row = embedding.data() + static_cast<std::size_t>(e.index) * dim;
        for (std::uint32_t j = 0; j < dim; ++j) out[j] += w * row[j];
        total += w;
    }
    if (total != 0.0)
        for (double& v : out) v /= total;
}

void Representation::backprop(const SparseVector& x, std::span<const double> input_grad,
                              const LrSchedule& schedule) {
    if (kind != ReprKind::DenseEmbedding)
        throw std::invalid_argument("backprop requires a dense-embedding representation");
    double total = 0.0;
    for (const auto& e : x.entries()) total += feature_weight(e);
    double eta = schedule.rate(updates);
    ++updates;
    if (total == 0.0) return;
    for (const auto& e : x.entries()) {
        double share = feature_weight(e) / total;
        double* row = embedding.data() + static_cast<std::size_t>(e.index) * dim;
        for (std::uint32_t j = 0; j < dim; ++j) row[j] -= eta * share * input_grad[j];
    }
}

double gradient_check(const NodeModel& node, const SparseVector& v, double target, double h) {
    if (h <= 0.0 || h > 1e-3) throw std::invalid_argument("h must be in (0, 1e-3]");
    if (node.dense) throw std::invalid_argument("gradient_check expects a sparse node model");

    auto loss_with = [&](const NodeModel& n) {
        return logistic_loss(sigmoid(dot_sparse(n, v) + n.bias), target);
    };
    double z = dot_sparse(node, v) + node.bias;
    double g = sigmoid(z) - target;

    double max_err = 0.0;
    auto record = [&](double analytic, double numeric) {
        double mag = std::max(std::abs(analytic), std::abs(numeric));
        if (mag < 1e-8) return;  // absolute criterion for vanishing gradients
        max_err = std::max(max_err, std::abs(analytic - numeric) / mag);
    };

    NodeModel probe = node;
    fold_scale(probe);
    for (const auto& e : v.entries()) {
        double saved = probe.w_sparse[e.index];
        probe.w_sparse[e.index] = saved + h;
        double up = loss_with(probe);
        probe.w_sparse[e.index] = saved - h;
        double down = loss_with(probe);
        probe.w_sparse[e.index] = saved;
        record(g * e.value, (up - down) / (2.0 * h));
    }
    {
        double saved = probe.bias;
        probe.bias = saved + h;
        double up = loss_with(probe);
        probe.bias = saved - h;
        double down = loss_with(probe);
        probe.bias = saved;
        record(g, (up - down) / (2.0 * h));
    }
    return max_err;
}

}  // namespace xtree
