#include "xtree/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xtree/rng.hpp"

namespace xtree {

namespace {

void check(const SynthConfig& c) {
    if (c.d < 1 || c.m < 1 || c.n < 1) throw std::invalid_argument("d, m, n must be >= 1");
    if (c.c <= 0.0) throw std::invalid_argument("scaling factor c must be positive");
    if (c.noise_sigma2 < 0.0) throw std::invalid_argument("noise variance must be >= 0");
}

std::vector<double> gaussian_vector(std::mt19937_64& engine, std::uint32_t d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(d);
    for (double& x : v) x = normal(engine);
    return v;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

SparseVector dense_to_sparse(const std::vector<double>& x) {
    std::vector<FeatureEntry> entries;
    entries.reserve(x.size());
    for (std::uint32_t i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) entries.push_back({i, x[i]});
    return SparseVector(std::move(entries), static_cast<std::uint32_t>(x.size()));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

std::vector<std::vector<double>> sample_label_vectors(const SynthConfig& config) {
    check(config);
    std::vector<std::vector<double>> w(config.m);
    for (std::uint32_t j = 0; j < config.m; ++j) {
        auto engine = make_engine(config.seed, Stream::Weights, j);
        std::vector<double> v;
        double len = 0.0;
        do {
            v = gaussian_vector(engine, config.d);
            len = norm(v);
        } while (len == 0.0);
        for (double& x : v) x /= len;
        w[j] = std::move(v);
    }
    return w;
}

std::vector<double> sample_point(const SynthConfig& config, std::uint64_t index) {
    auto engine = make_engine(config.seed, Stream::Points, index);
    std::vector<double> v;
    double len = 0.0;
    do {
        v = gaussian_vector(engine, config.d);
        len = norm(v);
    } while (len == 0.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double radius = std::pow(u(engine), 1.0 / static_cast<double>(config.d));
    for (double& x : v) x *= radius / len;
    return v;
}

Geometry sample_geometry(const SynthConfig& config) {
    check(config);
    Geometry g;
    g.weights = sample_label_vectors(config);
    g.points.reserve(config.n);
    for (std::uint64_t i = 0; i < config.n; ++i) g.points.push_back(sample_point(config, i));
    return g;
}

Dataset gen_multiclass(const SynthConfig& config) {
    check(config);
    auto w = sample_label_vectors(config);
    Dataset ds;
    ds.num_features = config.d;
    ds.num_labels = config.m;
    ds.examples.reserve(config.n);
    std::vector<double> scores(config.m);
    for (std::uint64_t i = 0; i < config.n; ++i) {
        auto x = sample_point(config, i);
        double max_score = -1e300;
        for (std::uint32_t j = 0; j < config.m; ++j) {
            scores[j] = config.c * dot(w[j], x);
            max_score = std::max(max_score, scores[j]);
        }
        double z = 0.0;
        for (std::uint32_t j = 0; j < config.m; ++j) {
            scores[j] = std::exp(scores[j] - max_score);
            z += scores[j];
        }
        auto engine = make_engine(config.seed, Stream::Labels, i);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double r = u(engine) * z;
        std::uint32_t label = config.m - 1;
        double acc = 0.0;
        for (std::uint32_t j = 0; j < config.m; ++j) {
            acc += scores[j];
            if (r < acc) {
                label = j;
                break;
            }
        }
        Example ex;
        ex.features = dense_to_sparse(x);
        ex.labels = {label};
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

Dataset gen_independent(const SynthConfig& config) {
    check(config);
    auto w = sample_label_vectors(config);
    Dataset ds;
    ds.num_features = config.d;
    ds.num_labels = config.m;
    ds.examples.reserve(config.n);
    for (std::uint64_t i = 0; i < config.n; ++i) {
        auto x = sample_point(config, i);
        auto engine = make_engine(config.seed, Stream::Labels, i);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Example ex;
        ex.features = dense_to_sparse(x);
        for (std::uint32_t j = 0; j < config.m; ++j) {
            double eta = 1.0 / (1.0 + std::exp(-dot(w[j], x)));
            if (u(engine) < eta) ex.labels.push_back(j);
        }
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

std::vector<std::vector<double>> sample_mixing_matrix(const SynthConfig& config) {
    check(config);
    std::vector<std::vector<double>> mixing(config.m, std::vector<double>(config.m));
    auto engine = make_engine(config.seed, Stream::Mixing);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& row : mixing)
        for (double& v : row) v = u(engine);
    return mixing;
}

Dataset gen_dependent(const SynthConfig& config) {
    check(config);
    auto w = sample_label_vectors(config);
    auto mixing = sample_mixing_matrix(config);
    const double sigma = std::sqrt(config.noise_sigma2);

    Dataset ds;
    ds.num_features = config.d;
    ds.num_labels = config.m;
    ds.examples.reserve(config.n);
    std::vector<double> latent(config.m);
    for (std::uint64_t i = 0; i < config.n; ++i) {
        auto x = sample_point(config, i);
        auto engine = make_engine(config.seed, Stream::Noise, i);
        std::normal_distribution<double> noise(0.0, sigma);
        for (std::uint32_t j = 0; j < config.m; ++j)
            latent[j] = dot(w[j], x) + (sigma > 0.0 ? noise(engine) : 0.0);
        Example ex;
        ex.features = dense_to_sparse(x);
        for (std::uint32_t j = 0; j < config.m; ++j)
            if (dot(mixing[j], latent) > 0.0) ex.labels.push_back(j);
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

}  // namespace xtree
